//! Broadcast frontier for a coherent state, its Koashi-Imoto cross-check,
//! and the classical control where broadcasting works.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::Assertion;
use crate::ki::{
    ehrenfest_constancy_check, ki_decompose, lemma4_reduced_form_check, orbit_family, StateFamily, KI_TOL,
};
use crate::linalg::channel::{apply_channel, choi_from_map, Channel};
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::linalg::quantum::{partial_trace, trace_distance, DensityMatrix, PureState};
use crate::linalg::system::SystemSpec;
use crate::optimize::{optimize_broadcast, BroadcastAttempt, OptimizerConfig};
use crate::symmetry::{is_covariant_at_times, is_covariant_channel, is_symmetric_state, measure_ft};

/// Disturbance thresholds defining the frontier buckets.
pub const DISTURBANCE_BUCKETS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoBroadcastConfig {
    pub optimizer: OptimizerConfig,
    /// Largest output coherence allowed in the smallest-disturbance bucket.
    pub coherence_tol: f64,
    /// Initial sample count of the orbit family.
    pub orbit_samples: usize,
    /// Attempts at or below this disturbance get the reduced-form check.
    pub ki_disturbance_tol: f64,
    /// Largest asymmetry witness allowed for the recovered block states.
    pub block_symmetry_tol: f64,
}

impl Default for NoBroadcastConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            coherence_tol: 1e-4,
            orbit_samples: 4,
            ki_disturbance_tol: 1e-6,
            block_symmetry_tol: 1e-6,
        }
    }
}

/// Frontier point without the Choi operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierRecord {
    pub lambda: f64,
    pub marginal_disturbance: f64,
    pub output_coherence: f64,
    pub objective: f64,
    pub converged: bool,
    /// Reduced-form residual and worst block-state asymmetry, when checked.
    pub reduced_form_residual: Option<f64>,
    pub block_asymmetry: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketSummary {
    pub threshold: f64,
    pub attempts: usize,
    /// Largest output coherence among attempts in the bucket.
    pub max_coherence: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoBroadcastReport {
    pub t: f64,
    pub records: Vec<FrontierRecord>,
    pub buckets: Vec<BucketSummary>,
    /// Block dimensions `(m, k)` of the orbit family.
    pub ki_blocks: Vec<(usize, usize)>,
    pub orbit_samples: usize,
    pub ehrenfest_deviation: f64,
    pub assertions: Vec<Assertion>,
    #[serde(skip)]
    pub attempts: Vec<BroadcastAttempt>,
}

fn block_check(
    attempt: &BroadcastAttempt,
    fam: &StateFamily,
    dec: &crate::ki::KIDecomposition,
    sys_s: &SystemSpec,
    tol: f64,
) -> Result<(f64, f64)> {
    let rep = lemma4_reduced_form_check(&attempt.map, fam, dec, tol)?;
    let mut worst: f64 = 0.0;
    for s in &rep.block_states {
        worst = worst.max(is_symmetric_state(s, sys_s, 0.0)?.witness);
    }
    Ok((rep.residual, worst))
}

/// Runs the penalized broadcast search for an asymmetric `rho_q` and checks
/// that vanishing disturbance forces vanishing output coherence.
pub fn run_no_broadcast_sweep(
    rho_q: &DensityMatrix,
    sys_q: &SystemSpec,
    sys_s: &SystemSpec,
    cfg: &NoBroadcastConfig,
) -> Result<NoBroadcastReport> {
    let sym = is_symmetric_state(rho_q, sys_q, crate::symmetry::COVARIANCE_TOL)?;
    if sym.holds {
        return Err(Error::PreconditionFailed(format!(
            "state is symmetric (commutator {:.3e}); nothing to broadcast",
            sym.witness
        )));
    }
    let t = cfg.optimizer.t;
    let attempts = optimize_broadcast(rho_q, sys_q, sys_s, t, &cfg.optimizer.lambda_schedule, &cfg.optimizer)?;

    let fam = orbit_family(rho_q, sys_q, cfg.orbit_samples)?;
    let dec = ki_decompose(&fam, KI_TOL)?;
    let grid: Vec<f64> = (0..64)
        .map(|k| std::f64::consts::TAU * k as f64 / 64.0 + 0.013)
        .collect();
    let ehrenfest = ehrenfest_constancy_check(&dec, rho_q, sys_q, &grid)?;

    let mut records = Vec::with_capacity(attempts.len());
    let mut assertions = vec![Assertion::at_most(
        "Ehrenfest constancy on the orbit family",
        ehrenfest,
        1e-7,
    )];
    for a in &attempts {
        let mut rec = FrontierRecord {
            lambda: a.lambda,
            marginal_disturbance: a.marginal_disturbance,
            output_coherence: a.output_coherence,
            objective: a.objective,
            converged: a.converged,
            reduced_form_residual: None,
            block_asymmetry: None,
        };
        let cov = is_covariant_channel(&a.map, 1e-8)?;
        assertions.push(Assertion::at_most(
            format!("attempt lambda={} covariant", a.lambda),
            cov.witness,
            1e-8,
        ));
        if a.marginal_disturbance <= cfg.ki_disturbance_tol {
            // Covariance carries the disturbance of rho_q to every orbit member.
            let (res, asym) = block_check(a, &fam, &dec, sys_s, 2.0 * cfg.ki_disturbance_tol)?;
            rec.reduced_form_residual = Some(res);
            rec.block_asymmetry = Some(asym);
            assertions.push(Assertion::at_most(
                format!("block states symmetric at lambda={}", a.lambda),
                asym,
                cfg.block_symmetry_tol,
            ));
        }
        records.push(rec);
    }

    let buckets: Vec<BucketSummary> = DISTURBANCE_BUCKETS
        .iter()
        .map(|&threshold| {
            let inside: Vec<f64> = records
                .iter()
                .filter(|r| r.marginal_disturbance <= threshold)
                .map(|r| r.output_coherence)
                .collect();
            BucketSummary {
                threshold,
                attempts: inside.len(),
                max_coherence: inside.iter().copied().reduce(f64::max),
            }
        })
        .collect();
    match buckets.iter().rev().find(|b| b.attempts > 0) {
        Some(b) => assertions.push(Assertion::at_most(
            format!("coherence vanishes in the disturbance <= {:e} bucket", b.threshold),
            b.max_coherence.unwrap_or(0.0),
            cfg.coherence_tol,
        )),
        None => assertions.push(Assertion::new(
            "some attempt reaches the largest bucket",
            false,
            f64::MAX,
        )),
    }

    Ok(NoBroadcastReport {
        t,
        records,
        buckets,
        ki_blocks: dec.dims(),
        orbit_samples: fam.len(),
        ehrenfest_deviation: ehrenfest,
        assertions,
        attempts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalControlReport {
    pub n: usize,
    /// Worst trace distance between a Fourier state and its `Q` marginal.
    pub max_disturbance: f64,
    /// Smallest `f_t(sigma_S')` over the family at `t = 2 pi / n`.
    pub output_coherence: f64,
    /// `max f_t` over states of the clock at that `t`.
    pub unconstrained_max: f64,
    /// Covariance witness under the discrete translations `2 pi j / n`.
    pub discrete_covariance_witness: f64,
    /// Covariance witness under the full translation group, for reference.
    pub continuous_covariance_witness: f64,
    pub assertions: Vec<Assertion>,
}

/// Classical control: an `n`-level clock `H = diag(0..n-1)` restricted to the
/// translations `t_j = 2 pi j / n`, which permute the Fourier basis
/// cyclically. The Fourier states form a commuting orbit, and measuring in
/// the Fourier basis then preparing two copies of the outcome is covariant
/// under these translations. It broadcasts every orbit member perfectly
/// while the copy keeps maximal `f_t` at `t = 2 pi / n`.
pub fn run_classical_control(n: usize) -> Result<ClassicalControlReport> {
    if n < 2 {
        return Err(Error::InvalidSystem("clock needs at least two levels".into()));
    }
    let clock = SystemSpec::ladder(n);
    let pair = SystemSpec::pair(&clock, &clock);
    let fourier: Vec<PureState> = (0..n)
        .map(|k| {
            let v: Vec<C64> = (0..n)
                .map(|m| C64::from_polar(1.0, std::f64::consts::TAU * (m * k) as f64 / n as f64))
                .collect();
            PureState::normalized(v)
        })
        .collect::<Result<_>>()?;
    let projectors: Vec<ComplexMatrix> = fourier.iter().map(|f| f.to_density().into_matrix()).collect();
    let choi = choi_from_map(n, n * n, |x| {
        let mut out = ComplexMatrix::zeros(n * n, n * n);
        for p in &projectors {
            out.add_scaled(&p.kron(p), p.hs_inner(x));
        }
        out
    });
    let cloner = Channel::new(clock.clone(), pair, choi)?;
    let t = std::f64::consts::TAU / n as f64;
    let times: Vec<f64> = (0..n).map(|j| j as f64 * t).collect();
    let discrete = is_covariant_at_times(&cloner, &times, 1e-9)?;
    let continuous = is_covariant_channel(&cloner, 1e-9)?;

    let mut max_dist: f64 = 0.0;
    let mut min_coh = f64::INFINITY;
    for f in &fourier {
        let rho = f.to_density();
        let out = apply_channel(&cloner, &rho)?;
        let q = DensityMatrix::new_unchecked(partial_trace(out.as_matrix(), &[n, n], &[0])?);
        let s = DensityMatrix::new_unchecked(partial_trace(out.as_matrix(), &[n, n], &[1])?);
        max_dist = max_dist.max(trace_distance(&q, &rho)?);
        min_coh = min_coh.min(measure_ft(&s, &clock, t)?);
    }
    let unconstrained_max = 1.0;
    let assertions = vec![
        Assertion::at_most(
            "control map covariant under the discrete translations",
            discrete.witness,
            1e-9,
        ),
        Assertion::at_most("control broadcast disturbance", max_dist, 1e-8),
        Assertion::at_most(
            "control output coherence at its maximum",
            unconstrained_max - min_coh,
            1e-8,
        ),
    ];
    Ok(ClassicalControlReport {
        n,
        max_disturbance: max_dist,
        output_coherence: min_coh,
        unconstrained_max,
        discrete_covariance_witness: discrete.witness,
        continuous_covariance_witness: continuous.witness,
        assertions,
    })
}
