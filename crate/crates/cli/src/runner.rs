//! Dispatch from a validated config to the experiment suites.

use std::time::Instant;

use asym_core::experiments::{
    check_broadcast_complementarity, check_fidelity_perturbation_lemma, check_monotonicity, partial_swap_channel,
    run_classical_control, run_degradation_demo, run_no_broadcast_sweep, run_nonadditivity, run_tradeoff_sweep,
    universal_cloner, Assertion, DegradationConfig, NoBroadcastConfig, NonadditivityConfig, TradeoffConfig,
    CLONER_MAX_COPIES, CLONER_MAX_DIM,
};
use asym_core::ki::decompose::MAX_REFERENCE_DIM;
use asym_core::ki::{ehrenfest_constancy_check, ki_decompose, ki_reference_block_dims, orbit_family, StateFamily};
use asym_core::linalg::random::{random_density_matrix, split_rng};
use asym_core::linalg::{Channel, DensityMatrix, SystemSpec};
use asym_core::optimize::{max_recovery_fidelity, OptimizerConfig};
use asym_core::symmetry::random_covariant_channel;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    pure_from, ClonerParams, ComplementarityParams, DegradationParams, ExperimentParams, Inputs, IrrevParams, KiParams,
    Lemma8Params, NoBroadcastParams, NonadditivityParams, RunConfig, TradeoffParams,
};
use crate::error::{CliError, CliResult};
use crate::report::{ExperimentReport, TOOL_NAME, TOOL_VERSION};

struct Outcome {
    records: Vec<Value>,
    summary: Value,
    assertions: Vec<Assertion>,
}

/// Attaches experiment and stage names to a core error.
fn at<T>(experiment: &'static str, stage: &'static str, r: asym_core::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::Numerical {
        experiment,
        stage,
        source,
    })
}

fn to_value<T: Serialize>(x: &T) -> CliResult<Value> {
    serde_json::to_value(x).map_err(|e| CliError::Encode(e.to_string()))
}

fn seeded(opt: &OptimizerConfig, seed: u64) -> OptimizerConfig {
    OptimizerConfig { seed, ..opt.clone() }
}

/// Runs the configured experiment. Deterministic in `(cfg, cfg.seed)` apart
/// from `wall_time_s`.
pub fn run(cfg: &RunConfig) -> CliResult<ExperimentReport> {
    let start = Instant::now();
    let outcome = match &cfg.params {
        ExperimentParams::NoBroadcast(p) => no_broadcast(cfg, p)?,
        ExperimentParams::Tradeoff(p) => tradeoff(cfg, p)?,
        ExperimentParams::Degradation(p) => degradation(cfg, p)?,
        ExperimentParams::Nonadditivity(p) => nonadditivity(p)?,
        ExperimentParams::Irrev(p) => irrev(cfg, p)?,
        ExperimentParams::Ki(p) => ki(cfg, p)?,
        ExperimentParams::Cloner(p) => cloner(cfg, p)?,
        ExperimentParams::Lemma8(p) => lemma8(cfg, p)?,
        ExperimentParams::Complementarity(p) => complementarity(cfg, p)?,
    };
    Ok(ExperimentReport {
        tool: TOOL_NAME.into(),
        tool_version: TOOL_VERSION.into(),
        experiment: cfg.params.kind(),
        config: cfg.clone(),
        generator: asym_core::linalg::random::GENERATOR_ID.into(),
        seed: cfg.seed,
        records: outcome.records,
        summary: outcome.summary,
        assertions: outcome.assertions,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn no_broadcast(cfg: &RunConfig, p: &NoBroadcastParams) -> CliResult<Outcome> {
    const E: &str = "no_broadcast";
    let (rho, q, s) = Inputs::broadcast(cfg, &p.state, &p.system_q, &p.system_s)?;
    let nb_cfg = NoBroadcastConfig {
        optimizer: seeded(&p.optimizer, cfg.seed),
        coherence_tol: p.coherence_tol,
        orbit_samples: p.orbit_samples,
        ki_disturbance_tol: p.ki_disturbance_tol,
        block_symmetry_tol: p.block_symmetry_tol,
    };
    let rep = at(E, "frontier sweep", run_no_broadcast_sweep(&rho, &q, &s, &nb_cfg))?;
    let control = at(E, "classical control", run_classical_control(p.control_levels))?;
    let records = rep.records.iter().map(to_value).collect::<CliResult<_>>()?;
    let mut assertions = rep.assertions.clone();
    assertions.extend(control.assertions.iter().cloned());
    Ok(Outcome {
        records,
        summary: json!({
            "t": rep.t,
            "buckets": to_value(&rep.buckets)?,
            "ki_blocks": to_value(&rep.ki_blocks)?,
            "orbit_samples": rep.orbit_samples,
            "ehrenfest_deviation": rep.ehrenfest_deviation,
            "classical_control": to_value(&control)?,
        }),
        assertions,
    })
}

fn tradeoff(cfg: &RunConfig, p: &TradeoffParams) -> CliResult<Outcome> {
    const E: &str = "tradeoff";
    let (rho, q, s) = Inputs::broadcast(cfg, &p.state, &p.system_q, &p.system_s)?;
    let psi = pure_from(&rho).ok_or_else(|| CliError::Parse {
        path: cfg.base_dir.clone(),
        line: None,
        field: Some("params.state".into()),
        message: "params.state: must be a pure state".into(),
    })?;
    let t_cfg = TradeoffConfig {
        optimizer: seeded(&p.optimizer, cfg.seed),
        t_grid: p.t_grid.clone(),
        slack_tol: p.slack_tol,
    };
    let rep = at(E, "tradeoff sweep", run_tradeoff_sweep(&psi, &q, &s, &t_cfg))?;
    Ok(Outcome {
        records: rep.records.iter().map(to_value).collect::<CliResult<_>>()?,
        summary: json!({ "skipped_t": rep.skipped }),
        assertions: rep.assertions,
    })
}

fn degradation(cfg: &RunConfig, p: &DegradationParams) -> CliResult<Outcome> {
    const E: &str = "degradation";
    let rho = Inputs::state_or_plus(cfg, p.state.as_deref(), "params.state")?;
    let sys = Inputs::system_or_qubit(cfg, p.system.as_deref(), "params.system")?;
    let lambda = at(E, "partial swap", partial_swap_channel(&sys, p.theta))?;
    let d_cfg = DegradationConfig {
        degradation_tol: p.degradation_tol,
        covariance_tol: p.covariance_tol,
        optimizer: seeded(&p.optimizer, cfg.seed),
    };
    let rep = at(E, "degradation", run_degradation_demo(&lambda, &rho, &d_cfg))?;
    Ok(Outcome {
        records: vec![json!({
            "induced_covariant": rep.induced_covariant,
            "induced_witness": rep.induced_witness,
            "irrev_lower_bound": rep.irrev_lower_bound,
            "converged": rep.converged,
        })],
        summary: json!({ "output_q": to_value(&rep.output_q)? }),
        assertions: rep.assertions,
    })
}

fn nonadditivity(p: &NonadditivityParams) -> CliResult<Outcome> {
    let rep = at(
        "nonadditivity",
        "constructions",
        run_nonadditivity(&NonadditivityConfig { max_n: p.max_n, t: p.t }),
    )?;
    let records = rep
        .records
        .iter()
        .map(|r| {
            Ok(json!({
                "construction": to_value(&r.construction)?,
                "measure": r.measure.name(),
                "f_joint": r.f_joint,
                "f_marg_a": r.f_marg_a,
                "f_marg_b_or_n_scaled": r.f_marg_b_or_n_scaled,
                "n": r.n,
                "violated": r.violated,
            }))
        })
        .collect::<CliResult<_>>()?;
    Ok(Outcome {
        records,
        summary: json!({ "smallest_cloner_violation": rep.smallest_cloner_violation }),
        assertions: rep.assertions,
    })
}

fn irrev(cfg: &RunConfig, p: &IrrevParams) -> CliResult<Outcome> {
    let (rho, sigma, from, to) = Inputs::irrev(cfg, p)?;
    let opt = seeded(&p.optimizer, cfg.seed);
    let res = at(
        "irrev",
        "recovery search",
        max_recovery_fidelity(&rho, &sigma, &from, &to, &opt),
    )?;
    let irrevs: Vec<f64> = res
        .restart_fidelities
        .iter()
        .map(|f| 1.0 - f.min(1.0).powi(2))
        .collect();
    let spread =
        irrevs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - irrevs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        records: vec![json!({
            "value": res.value,
            "fidelity": res.fidelity,
            "converged": res.converged,
            "restart_spread": spread,
            "regularization": res.regularization,
        })],
        summary: json!({
            "restart_fidelities": res.restart_fidelities,
            "best_recovery": to_value(&res.best_recovery)?,
        }),
        assertions: vec![
            Assertion::new("recovery optimizer converged", res.converged, res.value),
            Assertion::at_most("restarts agree", spread, asym_core::optimize::RESTART_AGREEMENT),
        ],
    })
}

fn ki(cfg: &RunConfig, p: &KiParams) -> CliResult<Outcome> {
    const E: &str = "ki";
    let mut orbit: Option<(DensityMatrix, SystemSpec)> = None;
    let fam = if p.states.is_empty() {
        let rho = Inputs::state_or_plus(cfg, p.orbit_state.as_deref(), "params.orbit_state")?;
        let sys = Inputs::system_or_qubit(cfg, p.system.as_deref(), "params.system")?;
        let fam = at(E, "orbit family", orbit_family(&rho, &sys, p.orbit_samples))?;
        orbit = Some((rho, sys));
        fam
    } else {
        let states = p
            .states
            .iter()
            .enumerate()
            .map(|(k, s)| Inputs::state(cfg, s, &format!("params.states[{k}]")))
            .collect::<CliResult<Vec<_>>>()?;
        if p.labels.is_empty() {
            at(E, "family", StateFamily::unlabeled(states))?
        } else {
            at(E, "family", StateFamily::new(states, p.labels.clone()))?
        }
    };
    let dec = at(E, "decomposition", ki_decompose(&fam, p.tol))?;
    let records = dec
        .blocks
        .iter()
        .enumerate()
        .map(|(mu, b)| {
            let mean = dec.probs.iter().map(|px| px[mu]).sum::<f64>() / dec.probs.len() as f64;
            json!({ "block": mu, "m": b.m, "k": b.k, "mean_weight": mean })
        })
        .collect();
    let mut assertions = vec![
        Assertion::at_most("block projectors", dec.checks.projector_error, 1e-8),
        Assertion::at_most("block isometries", dec.checks.isometry_error, 1e-8),
        Assertion::at_most("family reconstruction", dec.checks.reconstruction_error, 1e-7),
        Assertion::new("left algebras are full", dec.checks.maximal, 0.0),
    ];
    let mut reference = Value::Null;
    if fam.dim() <= MAX_REFERENCE_DIM {
        let oracle = at(E, "reference decomposition", ki_reference_block_dims(&fam))?;
        let mut ours = dec.dims();
        ours.sort_unstable();
        assertions.push(Assertion::new(
            "block dimensions match the reference construction",
            ours == oracle,
            oracle.len() as f64,
        ));
        reference = to_value(&oracle)?;
    }
    let mut ehrenfest = Value::Null;
    if let Some((rho, sys)) = &orbit {
        let grid: Vec<f64> = (0..64)
            .map(|k| std::f64::consts::TAU * k as f64 / 64.0 + 0.013)
            .collect();
        let dev = at(E, "Ehrenfest check", ehrenfest_constancy_check(&dec, rho, sys, &grid))?;
        assertions.push(Assertion::at_most("Ehrenfest constancy", dev, p.ehrenfest_tol));
        ehrenfest = dev.into();
    }
    Ok(Outcome {
        records,
        summary: json!({
            "family_size": fam.len(),
            "decomposition": to_value(&dec)?,
            "reference_dims": reference,
            "ehrenfest_deviation": ehrenfest,
        }),
        assertions,
    })
}

fn cloner(cfg: &RunConfig, p: &ClonerParams) -> CliResult<Outcome> {
    let mut rng = split_rng(cfg.seed, 0);
    let mut records = Vec::new();
    let mut worst: f64 = 0.0;
    let mut skipped = Vec::new();
    for &d in &p.dims {
        for n in 1..=p.max_n {
            let fits = n <= CLONER_MAX_COPIES && d.checked_pow(n as u32).is_some_and(|t| t <= CLONER_MAX_DIM);
            if !fits {
                skipped.push((d, n));
                continue;
            }
            for trial in 0..p.states_per_case {
                let rank = rng.random_range(1..=d);
                let rho = random_density_matrix(d, rank, &mut rng);
                let rep = at("cloner", "explicit cloner", universal_cloner(&rho, d, n))?;
                worst = worst
                    .max(rep.marginal_error)
                    .max(rep.trace_error)
                    .max(rep.permutation_error);
                records.push(json!({
                    "d": d,
                    "n": n,
                    "trial": trial,
                    "c_n": rep.c_n,
                    "trace_error": rep.trace_error,
                    "permutation_error": rep.permutation_error,
                    "marginal_error": rep.marginal_error,
                }));
            }
        }
    }
    let c2 = asym_core::experiments::cloner_shrinking_factor(2, 2);
    Ok(Outcome {
        records,
        summary: json!({ "skipped": skipped }),
        assertions: vec![
            Assertion::at_most("cloner output matches the closed form", worst, p.tol),
            Assertion::at_most("c_2 = 2/3 for d = 2", (c2 - 2.0 / 3.0).abs(), 1e-15),
        ],
    })
}

fn lemma8(cfg: &RunConfig, p: &Lemma8Params) -> CliResult<Outcome> {
    const E: &str = "lemma8";
    let mut rng = split_rng(cfg.seed, 0);
    let lemma = at(
        E,
        "fidelity perturbation",
        check_fidelity_perturbation_lemma(&mut rng, p.trials, &p.dims),
    )?;
    let mut rng = split_rng(cfg.seed, 1);
    let mono = at(
        E,
        "monotonicity",
        check_monotonicity(&mut rng, p.monotonicity_trials, &p.monotonicity_dims),
    )?;
    Ok(Outcome {
        records: vec![
            json!({ "check": "fidelity_perturbation", "trials": lemma.trials, "max_violation": lemma.max_violation }),
            json!({ "check": "ft_monotonicity", "trials": mono.trials, "max_violation": mono.max_ft_increase }),
            json!({ "check": "skew_monotonicity", "trials": mono.trials, "max_violation": mono.max_skew_increase }),
        ],
        summary: Value::Null,
        assertions: vec![
            Assertion::at_most("fidelity perturbation inequality", lemma.max_violation, p.tol),
            Assertion::at_most("f_t monotone under covariant channels", mono.max_ft_increase, p.tol),
            Assertion::at_most(
                "skew information monotone under covariant channels",
                mono.max_skew_increase,
                p.tol,
            ),
        ],
    })
}

fn complementarity(cfg: &RunConfig, p: &ComplementarityParams) -> CliResult<Outcome> {
    const E: &str = "complementarity";
    let mut cases: Vec<(String, Channel, Option<bool>)> = Vec::new();
    match &p.channel {
        Some(path) => {
            let ch = Inputs::channel(cfg, path, "params.channel")?;
            cases.push((path.display().to_string(), ch, None));
        }
        None => {
            let a = SystemSpec::ladder(2);
            let s = SystemSpec::ladder(3);
            let tau = DensityMatrix::basis(3, 1);
            let prepare = at(E, "built-in maps", Channel::constant(&SystemSpec::trivial(1), &s, &tau))?;
            let pair = SystemSpec::pair(&s, &a);
            // Prepare tau on S and pass A through.
            let trivial = at(
                E,
                "built-in maps",
                prepare.tensor(&Channel::identity(&a)).relabel(a.clone(), pair.clone()),
            )?;
            let mut rng = split_rng(cfg.seed, 0);
            let generic = at(E, "built-in maps", random_covariant_channel(&a, &pair, &mut rng))?;
            cases.push(("prepare_and_pass".into(), trivial, Some(true)));
            cases.push(("random_covariant".into(), generic, Some(false)));
        }
    }
    let mut records = Vec::new();
    let mut assertions = Vec::new();
    for (name, ch, expect_identity) in &cases {
        match check_broadcast_complementarity(ch, p.tol) {
            Ok(v) => {
                records.push(json!({
                    "channel": name,
                    "identity_marginal": v.identity_marginal,
                    "identity_residual": v.identity_residual,
                    "erasure_residual": v.erasure_residual,
                }));
                if let Some(expected) = expect_identity {
                    assertions.push(Assertion::new(
                        format!("{name}: identity marginal detected as expected"),
                        v.identity_marginal == *expected,
                        v.identity_residual,
                    ));
                }
                if let Some(r) = v.erasure_residual {
                    assertions.push(Assertion::at_most(
                        format!("{name}: complement is constant"),
                        r,
                        10.0 * p.tol,
                    ));
                }
            }
            Err(asym_core::Error::AssertionFailure(msg)) => {
                records.push(json!({ "channel": name, "identity_marginal": true }));
                assertions.push(Assertion::new(
                    format!("{name}: complement is constant ({msg})"),
                    false,
                    f64::MAX,
                ));
            }
            Err(e) => return Err(at::<()>(E, "complementarity check", Err(e)).unwrap_err()),
        }
    }
    Ok(Outcome {
        records,
        summary: Value::Null,
        assertions,
    })
}
