//! Asymmetry degradation by a covariant interaction with a maximally mixed probe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::Assertion;
use crate::linalg::channel::{apply_channel, induce_channel, swap_operator, Channel};
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::linalg::quantum::{partial_trace, DensityMatrix};
use crate::linalg::system::SystemSpec;
use crate::optimize::{max_recovery_fidelity, OptimizerConfig};
use crate::symmetry::{is_covariant_channel, twirl_channel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradationConfig {
    /// Irreversibility that must be exceeded when the induced map is not covariant.
    pub degradation_tol: f64,
    /// Covariance tolerance for the joint map and the induced map.
    pub covariance_tol: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for DegradationConfig {
    fn default() -> Self {
        Self {
            degradation_tol: 1e-6,
            covariance_tol: 1e-8,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DegradationReport {
    pub induced_covariant: bool,
    /// `||[J, K]||_max` of the induced map `S -> S'`.
    pub induced_witness: f64,
    /// Irreversibility of `rho_Q -> sigma_Q'` with `S` maximally mixed, when
    /// the induced map is not covariant. It bounds the true value from below
    /// only when `converged` holds.
    pub irrev_lower_bound: Option<f64>,
    pub converged: bool,
    /// `sigma_Q'` for the maximally mixed probe.
    pub output_q: Option<DensityMatrix>,
    pub assertions: Vec<Assertion>,
}

/// Twirled partial swap `cos(theta) I + i sin(theta) SWAP` on two copies of `sys`.
pub fn partial_swap_channel(sys: &SystemSpec, theta: f64) -> Result<Channel> {
    let d = sys.dim();
    let mut u = ComplexMatrix::identity(d * d).scale_real(theta.cos());
    u.add_scaled(&swap_operator(d), C64::new(0.0, theta.sin()));
    let pair = SystemSpec::pair(sys, sys);
    twirl_channel(&Channel::unitary(&pair, &u)?)
}

/// Induced map of a covariant `Lambda : Q x S -> Q' x S'` for `rho_Q`, its
/// covariance, and the irreversibility of `rho_Q -> Tr_S'[Lambda(rho_Q x I/d_S)]`.
pub fn run_degradation_demo(
    lambda: &Channel,
    rho_q: &DensityMatrix,
    cfg: &DegradationConfig,
) -> Result<DegradationReport> {
    let joint = is_covariant_channel(lambda, cfg.covariance_tol)?;
    if !joint.holds {
        return Err(Error::NotCovariant(joint.witness));
    }
    let induced = induce_channel(lambda, rho_q)?;
    let v = is_covariant_channel(&induced, cfg.covariance_tol)?;
    let mut assertions = vec![Assertion::at_most(
        "joint map covariant",
        joint.witness,
        cfg.covariance_tol,
    )];
    if v.holds {
        return Ok(DegradationReport {
            induced_covariant: true,
            induced_witness: v.witness,
            irrev_lower_bound: None,
            converged: true,
            output_q: None,
            assertions,
        });
    }
    let (q, s) = (&lambda.input().parts()[0], &lambda.input().parts()[1]);
    let (qp, sp) = (&lambda.output().parts()[0], &lambda.output().parts()[1]);
    let probe = DensityMatrix::maximally_mixed(s.dim());
    let out = apply_channel(lambda, &rho_q.tensor(&probe))?;
    let sigma = DensityMatrix::new_unchecked(partial_trace(out.as_matrix(), &[qp.dim(), sp.dim()], &[0])?);
    let irrev = max_recovery_fidelity(rho_q, &sigma, qp, q, &cfg.optimizer)?;
    assertions.push(Assertion::new(
        "irreversibility optimizer converged",
        irrev.converged,
        irrev.value,
    ));
    assertions.push(Assertion::new(
        "non-covariant induced map degrades asymmetry",
        irrev.converged && irrev.value > cfg.degradation_tol,
        irrev.value,
    ));
    Ok(DegradationReport {
        induced_covariant: false,
        induced_witness: v.witness,
        irrev_lower_bound: Some(irrev.value),
        converged: irrev.converged,
        output_q: Some(sigma),
        assertions,
    })
}
