//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the verdicts are always printed; exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use asym_cli::config::ExperimentKind;
use asym_cli::{parse_config_str, render_csv, run, ExperimentReport};
use asym_core::experiments::{
    check_fidelity_perturbation_lemma, check_monotonicity, cloner_shrinking_factor, partial_swap_channel,
    run_classical_control, run_degradation_demo, run_no_broadcast_sweep, run_nonadditivity, run_tradeoff_sweep,
    universal_cloner, Construction, DegradationConfig, NoBroadcastConfig, NonadditivityConfig, TradeoffConfig,
};
use asym_core::ki::{
    ehrenfest_constancy_check, ki_decompose, ki_reference_block_dims, orbit_family, KIDecomposition, StateFamily,
    KI_TOL,
};
use asym_core::linalg::random::{random_unitary, split_rng, SimRng};
use asym_core::linalg::{random_density_matrix, ComplexMatrix, DensityMatrix, PureState, SystemSpec};
use asym_core::optimize::{max_recovery_fidelity, OptimizerConfig, RESTART_AGREEMENT};
use asym_core::symmetry::AsymmetryMeasureId;
use rand::Rng;

const SEED: u64 = 7;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(checks: &[(bool, String)]) -> Self {
        Self {
            pass: checks.iter().all(|(ok, _)| *ok),
            detail: checks
                .iter()
                .map(|(ok, what)| if *ok { what.clone() } else { format!("FAILED {what}") })
                .collect::<Vec<_>>()
                .join("; "),
        }
    }
}

type Outcome = Result<Verdict, String>;

/// Name, time budget in seconds, check.
type Criterion = (&'static str, f64, fn() -> Outcome);

fn qubit() -> SystemSpec {
    SystemSpec::ladder(2)
}

fn spread(values: &[f64]) -> f64 {
    let irrevs: Vec<f64> = values.iter().map(|f| 1.0 - f.min(1.0).powi(2)).collect();
    irrevs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - irrevs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn cloner_marginals() -> Outcome {
    let mut rng = split_rng(SEED, 1);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for d in [2usize, 3] {
        for n in 1..=4usize {
            if d.pow(n as u32) > 1024 {
                continue;
            }
            for _ in 0..3 {
                let rank = rng.random_range(1..=d);
                let rho = random_density_matrix(d, rank, &mut rng);
                let rep = universal_cloner(&rho, d, n).map_err(|e| e.to_string())?;
                let expected = (d + n) as f64 / (n * (d + 1)) as f64;
                worst = worst
                    .max(rep.marginal_error)
                    .max(rep.trace_error)
                    .max(rep.permutation_error)
                    .max((rep.c_n - expected).abs());
                cases += 1;
            }
        }
    }
    let c2 = cloner_shrinking_factor(2, 2);
    Ok(Verdict::new(&[
        (cases == 24, format!("{cases} cloner cases")),
        (worst <= 1e-10, format!("max error {worst:.2e} <= 1e-10")),
        ((c2 - 2.0 / 3.0).abs() <= 1e-15, format!("c_2(d=2) = {c2}")),
    ]))
}

fn monotonicity() -> Outcome {
    let mut rng = split_rng(SEED, 2);
    let rep = check_monotonicity(&mut rng, 1000, &[2, 3]).map_err(|e| e.to_string())?;
    Ok(Verdict::new(&[
        (rep.trials == 1000, format!("{} channels", rep.trials)),
        (
            rep.max_ft_increase <= 1e-9,
            format!("max f_t increase {:.2e} <= 1e-9", rep.max_ft_increase),
        ),
        (
            rep.max_skew_increase <= 1e-9,
            format!("max skew increase {:.2e} <= 1e-9", rep.max_skew_increase),
        ),
    ]))
}

fn perturbation_inequality() -> Outcome {
    let mut rng = split_rng(SEED, 3);
    let rep = check_fidelity_perturbation_lemma(&mut rng, 10_000, &[2, 3, 4]).map_err(|e| e.to_string())?;
    Ok(Verdict::new(&[
        (rep.trials == 10_000, format!("{} triples", rep.trials)),
        (
            rep.max_violation <= 1e-9,
            format!("max violation {:.2e} <= 1e-9", rep.max_violation),
        ),
    ]))
}

fn no_broadcasting() -> Outcome {
    let cfg = NoBroadcastConfig {
        optimizer: OptimizerConfig {
            seed: SEED,
            ..OptimizerConfig::default()
        },
        ..NoBroadcastConfig::default()
    };
    let q = qubit();
    let rep = run_no_broadcast_sweep(&PureState::plus().to_density(), &q, &q, &cfg).map_err(|e| e.to_string())?;
    let bucket = rep.buckets.iter().find(|b| b.threshold == 1e-5);
    let (attempts, coherence) = bucket.map_or((0, None), |b| (b.attempts, b.max_coherence));
    let control = run_classical_control(3).map_err(|e| e.to_string())?;
    let gap = control.unconstrained_max - control.output_coherence;
    Ok(Verdict::new(&[
        (attempts > 0, format!("{attempts} attempts with disturbance <= 1e-5")),
        (
            coherence.is_some_and(|c| c <= 1e-4),
            format!(
                "their max output coherence {:.2e} <= 1e-4",
                coherence.unwrap_or(f64::NAN)
            ),
        ),
        (gap <= 1e-8, format!("control coherence gap to maximum {gap:.2e}")),
        (
            control.max_disturbance <= 1e-8,
            format!("control disturbance {:.2e} <= 1e-8", control.max_disturbance),
        ),
    ]))
}

fn tradeoff() -> Outcome {
    let q = qubit();
    let psi = PureState::plus();
    let cfg = TradeoffConfig {
        optimizer: OptimizerConfig {
            seed: SEED,
            ..OptimizerConfig::default()
        },
        ..TradeoffConfig::default()
    };
    let grid_ok = cfg.t_grid == [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4] && cfg.optimizer.lambda_schedule.len() == 6;
    let rep = run_tradeoff_sweep(&psi, &q, &q, &cfg).map_err(|e| e.to_string())?;
    let converged: Vec<_> = rep.records.iter().filter(|r| r.converged).collect();
    let min_slack = converged.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let at_pi = run_tradeoff_sweep(
        &psi,
        &q,
        &q,
        &TradeoffConfig {
            t_grid: vec![PI],
            ..cfg.clone()
        },
    )
    .map_err(|e| e.to_string())?;
    Ok(Verdict::new(&[
        (grid_ok, "default grid of 3 times and 6 penalties".into()),
        (rep.records.len() == 18, format!("{} records", rep.records.len())),
        (!converged.is_empty(), format!("{} converged", converged.len())),
        (min_slack >= -1e-6, format!("min slack {min_slack:.2e} >= -1e-6")),
        (
            rep.skipped.is_empty(),
            format!("skipped {:?} on the default grid", rep.skipped),
        ),
        (
            at_pi.skipped == [PI] && at_pi.records.is_empty(),
            format!("skipped {:?} at t = pi", at_pi.skipped),
        ),
    ]))
}

fn irreversibility() -> Outcome {
    let q = qubit();
    let cfg = OptimizerConfig {
        seed: SEED,
        ..OptimizerConfig::default()
    };
    let mixed = DensityMatrix::maximally_mixed(2);
    let mut rng = split_rng(SEED, 6);
    let generic = random_density_matrix(2, 2, &mut rng);
    let irrev = |rho: &DensityMatrix, sigma: &DensityMatrix| {
        max_recovery_fidelity(rho, sigma, &q, &q, &cfg).map_err(|e| e.to_string())
    };
    let plus = irrev(&PureState::plus().to_density(), &mixed)?;
    let same = irrev(&generic, &generic)?;
    let zero = irrev(&DensityMatrix::basis(2, 0), &mixed)?;
    let worst_spread = [&plus, &same, &zero]
        .iter()
        .map(|r| spread(&r.restart_fidelities))
        .fold(0.0, f64::max);
    Ok(Verdict::new(&[
        (
            (plus.value - 0.5).abs() <= 1e-3 && plus.converged,
            format!("irrev(|+>, I/2) = {:.6}", plus.value),
        ),
        (same.value <= 1e-6, format!("irrev(rho, rho) = {:.2e}", same.value)),
        (zero.value <= 1e-6, format!("irrev(|0>, I/2) = {:.2e}", zero.value)),
        (
            worst_spread <= RESTART_AGREEMENT,
            format!("restart spread {worst_spread:.2e} <= 1e-4"),
        ),
    ]))
}

fn sorted_dims(dec: &KIDecomposition) -> Vec<(usize, usize)> {
    let mut d = dec.dims();
    d.sort_unstable();
    d
}

/// `U (sum_mu p_mu rho_L^mu x omega_mu) U^dagger` with random block shapes, `d <= 6`.
fn planted_family(rng: &mut SimRng) -> (StateFamily, Vec<(usize, usize)>) {
    let mut dims = Vec::new();
    let mut total = 0;
    for _ in 0..rng.random_range(1..=3) {
        let (m, k) = (rng.random_range(1..=2), rng.random_range(1..=2));
        if total + m * k <= 6 {
            dims.push((m, k));
            total += m * k;
        }
    }
    if dims.len() == 1 && dims[0].0 == 1 {
        dims[0].0 = 2;
        total = 2 * dims[0].1;
    }
    let omegas: Vec<DensityMatrix> = dims.iter().map(|&(_, k)| random_density_matrix(k, k, rng)).collect();
    let u = random_unitary(total, rng);
    let states = (0..rng.random_range(3..=4))
        .map(|_| {
            let weights: Vec<f64> = dims.iter().map(|_| rng.random_range(0.2..1.0)).collect();
            let norm: f64 = weights.iter().sum();
            let mut m = ComplexMatrix::zeros(total, total);
            let mut off = 0;
            for ((&(bm, bk), omega), w) in dims.iter().zip(&omegas).zip(&weights) {
                let left = random_density_matrix(bm, bm, rng);
                let block = left.as_matrix().kron(omega.as_matrix()).scale_real(w / norm);
                for i in 0..bm * bk {
                    for j in 0..bm * bk {
                        m[(off + i, off + j)] = block[(i, j)];
                    }
                }
                off += bm * bk;
            }
            DensityMatrix::new(m.conjugate_by(&u).hermitian_part()).unwrap()
        })
        .collect();
    dims.sort_unstable();
    (StateFamily::unlabeled(states).unwrap(), dims)
}

fn koashi_imoto() -> Outcome {
    let e = |err: asym_core::Error| err.to_string();
    let mut rng = split_rng(SEED, 7);
    let mut checks = Vec::new();

    let rho = random_density_matrix(3, 3, &mut rng);
    let single = ki_decompose(&StateFamily::unlabeled(vec![rho.clone()]).map_err(e)?, KI_TOL).map_err(e)?;
    let omega_ok = single.blocks.len() == 1 && {
        let b = &single.blocks[0];
        let lifted = b.omega.as_matrix().conjugate_by(&b.isometry);
        b.m == 1 && b.k == 3 && (&lifted - rho.as_matrix()).max_abs() <= 1e-8
    };
    checks.push((omega_ok, format!("single state {:?}", sorted_dims(&single))));

    let pair = StateFamily::unlabeled(vec![DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)]).map_err(e)?;
    let pair = ki_decompose(&pair, KI_TOL).map_err(e)?;
    let pair_dims = sorted_dims(&pair);
    checks.push((pair_dims == [(1, 1), (1, 1)], format!("commuting pair {pair_dims:?}")));

    let q = qubit();
    let plus = PureState::plus().to_density();
    let orbit = ki_decompose(&orbit_family(&plus, &q, 4).map_err(e)?, KI_TOL).map_err(e)?;
    let orbit_dims = sorted_dims(&orbit);
    checks.push((orbit_dims == [(2, 1)], format!("coherent orbit {orbit_dims:?}")));

    let mut mismatches = 0;
    let mut worst_reconstruction: f64 = 0.0;
    for _ in 0..100 {
        let (fam, planted) = planted_family(&mut rng);
        let dec = ki_decompose(&fam, KI_TOL).map_err(e)?;
        let reference = ki_reference_block_dims(&fam).map_err(e)?;
        let ours = sorted_dims(&dec);
        if ours != reference || ours != planted {
            mismatches += 1;
        }
        worst_reconstruction = worst_reconstruction.max(dec.checks.reconstruction_error);
    }
    checks.push((
        mismatches == 0,
        format!("{mismatches}/100 random families disagree with the reference"),
    ));
    checks.push((
        worst_reconstruction <= 1e-7,
        format!("max reconstruction error {worst_reconstruction:.2e} <= 1e-7"),
    ));

    let grid: Vec<f64> = (0..64)
        .map(|k| std::f64::consts::TAU * k as f64 / 64.0 + 0.013)
        .collect();
    let mut worst_ehrenfest = ehrenfest_constancy_check(&orbit, &plus, &q, &grid).map_err(e)?;
    for d in [2usize, 3, 4] {
        for _ in 0..5 {
            let spectrum: Vec<i64> = (0..d).map(|_| rng.random_range(0i64..=3)).collect();
            let sys = SystemSpec::new(spectrum, random_unitary(d, &mut rng)).map_err(e)?;
            let rank = rng.random_range(1..=d);
            let rho = random_density_matrix(d, rank, &mut rng);
            let dec = ki_decompose(&orbit_family(&rho, &sys, 4).map_err(e)?, KI_TOL).map_err(e)?;
            worst_ehrenfest = worst_ehrenfest.max(ehrenfest_constancy_check(&dec, &rho, &sys, &grid).map_err(e)?);
        }
    }
    checks.push((
        worst_ehrenfest <= 1e-7,
        format!("max Ehrenfest deviation {worst_ehrenfest:.2e} <= 1e-7"),
    ));
    Ok(Verdict::new(&checks))
}

fn nonadditivity() -> Outcome {
    let rep = run_nonadditivity(&NonadditivityConfig::default()).map_err(|e| e.to_string())?;
    let violated = |c: Construction| rep.records.iter().any(|r| r.construction == c && r.violated);
    let bell = rep.records.iter().find(|r| {
        r.construction == Construction::EntangledSubadditivity && r.measure == AsymmetryMeasureId::SkewInformation
    });
    let bell_ok = bell.is_some_and(|r| {
        (r.f_joint - 1.0).abs() <= 1e-9 && r.f_marg_a.abs() <= 1e-9 && r.f_marg_b_or_n_scaled.abs() <= 1e-9
    });
    let smallest = rep
        .records
        .iter()
        .filter(|r| {
            r.construction == Construction::ClonerSuperadditivity
                && r.measure == AsymmetryMeasureId::SkewInformation
                && r.violated
        })
        .filter_map(|r| r.n)
        .min();
    Ok(Verdict::new(&[
        (
            violated(Construction::EntangledSubadditivity),
            "entangled sub-additivity violated".into(),
        ),
        (bell_ok, "Bell state f_joint = 1, marginals 0".into()),
        (
            violated(Construction::ClassicalRegisterSubadditivity),
            "classical-register sub-additivity violated".into(),
        ),
        (
            violated(Construction::ClonerSuperadditivity),
            "cloner super-additivity violated".into(),
        ),
        (
            smallest == Some(14) && rep.smallest_cloner_violation == Some(14),
            format!("smallest violating n {smallest:?}"),
        ),
    ]))
}

fn degradation() -> Outcome {
    let q = qubit();
    let lambda = partial_swap_channel(&q, FRAC_PI_4).map_err(|e| e.to_string())?;
    let cfg = DegradationConfig {
        optimizer: OptimizerConfig {
            seed: SEED,
            ..OptimizerConfig::default()
        },
        ..DegradationConfig::default()
    };
    let rep = run_degradation_demo(&lambda, &PureState::plus().to_density(), &cfg).map_err(|e| e.to_string())?;
    Ok(Verdict::new(&[
        (
            !rep.induced_covariant && rep.induced_witness > 0.01,
            format!("induced channel witness {:.3e} > 0.01", rep.induced_witness),
        ),
        (rep.converged, "converged".into()),
        (
            rep.irrev_lower_bound.is_some_and(|v| v > 1e-3),
            format!("irrev {:?} > 1e-3", rep.irrev_lower_bound),
        ),
    ]))
}

fn run_suite(kind: ExperimentKind) -> Result<ExperimentReport, String> {
    let text = format!(
        r#"{{"schema_version": 1, "experiment": "{}", "seed": {SEED}}}"#,
        kind.name()
    );
    let cfg = parse_config_str(&text, Path::new("acceptance.json"), PathBuf::new()).map_err(|e| e.to_string())?;
    run(&cfg).map_err(|e| e.to_string())
}

fn fingerprint(report: &ExperimentReport) -> Result<(String, String), String> {
    let mut r = report.clone();
    r.wall_time_s = 0.0;
    Ok((
        render_csv(&r).map_err(|e| e.to_string())?,
        r.to_json().map_err(|e| e.to_string())?,
    ))
}

fn determinism() -> Outcome {
    let mut checks = Vec::new();
    for kind in ExperimentKind::ALL {
        let first = fingerprint(&run_suite(kind)?)?;
        let second = fingerprint(&run_suite(kind)?)?;
        checks.push((first == second, format!("{} identical", kind.name())));
    }
    Ok(Verdict::new(&checks))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("cloner marginal formula", 10.0, cloner_marginals),
        ("monotonicity of f_t and skew information", 60.0, monotonicity),
        ("fidelity perturbation inequality", 120.0, perturbation_inequality),
        ("no-broadcasting", 600.0, no_broadcasting),
        ("tradeoff relation", 600.0, tradeoff),
        ("irreversibility optimizer", 120.0, irreversibility),
        ("Koashi-Imoto decomposition", 300.0, koashi_imoto),
        ("non-additivity", 30.0, nonadditivity),
        ("degradation", 300.0, degradation),
        ("determinism", f64::INFINITY, determinism),
    ];
    let mut failures = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(v) => (v.pass && secs < *limit, v.detail),
            Err(err) => (false, format!("error: {err}")),
        };
        let budget = if limit.is_finite() {
            format!("{secs:.2} s of {limit} s")
        } else {
            format!("{secs:.2} s")
        };
        println!(
            "{} {:>2} {name}: {detail} ({budget})",
            if pass { "PASS" } else { "FAIL" },
            k + 1
        );
        failures += usize::from(!pass);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
