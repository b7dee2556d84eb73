//! Tradeoff between broadcast output asymmetry and irreversibility on `Q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::Assertion;
use crate::linalg::channel::apply_channel;
use crate::linalg::quantum::{partial_trace, DensityMatrix, PureState};
use crate::linalg::system::SystemSpec;
use crate::optimize::{max_recovery_fidelity, optimize_broadcast, OptimizerConfig};
use crate::symmetry::measure_ft;

/// Rows with `1 - f_t(psi)` at or below this are skipped.
pub const SATURATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TradeoffConfig {
    pub optimizer: OptimizerConfig,
    pub t_grid: Vec<f64>,
    /// Allowed negative slack on converged rows.
    pub slack_tol: f64,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            optimizer: OptimizerConfig::default(),
            t_grid: vec![PI / 4.0, PI / 2.0, 3.0 * PI / 4.0],
            slack_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRecord {
    pub t: f64,
    pub lambda: f64,
    pub ft_input: f64,
    pub ft_output: f64,
    pub irrev: f64,
    /// `f_t(sigma_S') (1 - f_t(psi))`.
    pub lhs: f64,
    /// `4 sqrt(irrev)`.
    pub rhs: f64,
    pub slack: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeoffReport {
    pub records: Vec<TradeoffRecord>,
    /// Grid times skipped because `f_t(psi) = 1`.
    pub skipped: Vec<f64>,
    pub assertions: Vec<Assertion>,
}

/// For each `t` in the grid, runs the broadcast search and measures the
/// irreversibility of every frontier point's `Q` marginal.
pub fn run_tradeoff_sweep(
    psi: &PureState,
    sys_q: &SystemSpec,
    sys_s: &SystemSpec,
    cfg: &TradeoffConfig,
) -> Result<TradeoffReport> {
    if psi.dim() != sys_q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional state on a {}-dimensional system",
            psi.dim(),
            sys_q.dim()
        )));
    }
    let rho = psi.to_density();
    let (dq, ds) = (sys_q.dim(), sys_s.dim());
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for &t in &cfg.t_grid {
        let ft_input = measure_ft(&rho, sys_q, t)?;
        if 1.0 - ft_input <= SATURATION_TOL {
            skipped.push(t);
            continue;
        }
        let opt = OptimizerConfig {
            t,
            ..cfg.optimizer.clone()
        };
        let frontier = optimize_broadcast(&rho, sys_q, sys_s, t, &opt.lambda_schedule, &opt)?;
        for a in frontier {
            let sigma = apply_channel(&a.map, &rho)?;
            let sigma_q = DensityMatrix::new_unchecked(partial_trace(sigma.as_matrix(), &[dq, ds], &[0])?);
            let irrev = max_recovery_fidelity(&rho, &sigma_q, sys_q, sys_q, &opt)?;
            let lhs = a.output_coherence * (1.0 - ft_input);
            let rhs = 4.0 * irrev.value.sqrt();
            records.push(TradeoffRecord {
                t,
                lambda: a.lambda,
                ft_input,
                ft_output: a.output_coherence,
                irrev: irrev.value,
                lhs,
                rhs,
                slack: rhs - lhs,
                converged: irrev.converged,
            });
        }
    }

    let converged: Vec<&TradeoffRecord> = records.iter().filter(|r| r.converged).collect();
    let worst_slack = converged.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let mut assertions = vec![
        Assertion::new(
            "tradeoff holds on converged rows",
            worst_slack >= -cfg.slack_tol,
            if converged.is_empty() { 0.0 } else { worst_slack },
        ),
        Assertion::new(
            "every row converged",
            records.iter().all(|r| r.converged),
            records.iter().filter(|r| !r.converged).count() as f64,
        ),
    ];
    let bound = 4.0 * 1e-8f64.sqrt();
    let corollary = records
        .iter()
        .filter(|r| r.irrev <= 1e-8)
        .map(|r| r.ft_output - (bound / (1.0 - r.ft_input) + 1e-9))
        .fold(f64::NEG_INFINITY, f64::max);
    assertions.push(Assertion::new(
        "near-reversible rows have near-symmetric output",
        corollary <= 0.0,
        if corollary.is_finite() { corollary } else { 0.0 },
    ));
    Ok(TradeoffReport {
        records,
        skipped,
        assertions,
    })
}
