use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::channel::{apply_choi_adjoint, apply_choi_linear, choi_from_map, Channel};
use crate::linalg::eig::{hermitian_eig, psd_sqrt};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::quantum::{fidelity, DensityMatrix};
use crate::linalg::random::split_rng;
use crate::linalg::system::SystemSpec;
use crate::optimize::ascent::projected_ascent;
use crate::optimize::barrier::recovery_fidelity_sdp;
use crate::optimize::fidelity::fidelity_and_gradient;
use crate::optimize::projection::CovariantChoiSet;
use crate::optimize::OptimizerConfig;
use crate::symmetry::random_covariant_channel;
use crate::tol::REGULARIZATION;

/// Restarts whose optimal values differ by more than this are flagged unconverged.
pub const RESTART_AGREEMENT: f64 = 1e-4;

/// Outcome of [`max_recovery_fidelity`].
#[derive(Clone, Debug, Serialize)]
pub struct IrrevResult {
    /// `1 - F^2` for the best fidelity `F` found.
    pub value: f64,
    pub fidelity: f64,
    pub best_recovery: Channel,
    /// Ascent trace `(iteration, fidelity)` of the winning restart.
    pub fidelity_trace: Vec<(usize, f64)>,
    pub converged: bool,
    /// Best fidelity reached by each restart, in restart order.
    pub restart_fidelities: Vec<f64>,
    /// Shift applied to near-singular recovery outputs in gradient evaluations.
    pub regularization: f64,
}

fn same_system(a: &SystemSpec, b: &SystemSpec) -> bool {
    a.spectrum() == b.spectrum() && (a.eigenbasis() - b.eigenbasis()).max_abs() == 0.0
}

/// Irreversibility `1 - max_R Fid(rho_q, R(sigma))^2` over covariant `R : from -> to`.
///
/// Restart 0 starts from the interior-point solution of the equivalent
/// semidefinite program (or, if that fails, from the identity when `from`
/// and `to` coincide and the completely depolarizing channel otherwise); the
/// remaining restarts start from random covariant channels.
pub fn max_recovery_fidelity(
    rho_q: &DensityMatrix,
    sigma: &DensityMatrix,
    from: &SystemSpec,
    to: &SystemSpec,
    cfg: &OptimizerConfig,
) -> Result<IrrevResult> {
    if sigma.dim() != from.dim() || rho_q.dim() != to.dim() {
        return Err(Error::DimensionMismatch(format!(
            "recovering a {}-dimensional state from a {}-dimensional one across {} -> {} systems",
            rho_q.dim(),
            sigma.dim(),
            from.dim(),
            to.dim()
        )));
    }
    cfg.validate()?;
    let (d_in, d_out) = (from.dim(), to.dim());
    let set = CovariantChoiSet::new(from, to);
    let sigma_t = sigma.as_matrix().transpose();
    let objective = |j: &ComplexMatrix| -> Result<(f64, ComplexMatrix)> {
        let out = apply_choi_linear(j, d_in, d_out, sigma.as_matrix());
        let (f, g, _) = fidelity_and_gradient(rho_q.as_matrix(), &out, false)?;
        Ok((f, g.kron(&sigma_t)))
    };

    let mut runs = Vec::with_capacity(cfg.restarts);
    for r in 0..cfg.restarts {
        let start = if r == 0 {
            match recovery_fidelity_sdp(&set, rho_q.as_matrix(), sigma.as_matrix()) {
                Ok(j) => j,
                Err(_) if same_system(from, to) => Channel::identity(from).into_choi(),
                Err(_) => Channel::completely_depolarizing(from, to).into_choi(),
            }
        } else {
            let mut rng = split_rng(cfg.seed, r as u64);
            random_covariant_channel(from, to, &mut rng)?.into_choi()
        };
        runs.push(projected_ascent(&set, start, cfg, objective)?);
    }

    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.value > runs[best].value {
            best = k;
        }
    }
    let restart_fidelities: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let irrevs: Vec<f64> = restart_fidelities.iter().map(|f| 1.0 - f.min(1.0).powi(2)).collect();
    let spread =
        irrevs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - irrevs.iter().copied().fold(f64::INFINITY, f64::min);
    let converged = runs.iter().all(|r| r.converged) && spread <= RESTART_AGREEMENT;
    let run = runs.swap_remove(best);
    let best_recovery = Channel::new(from.clone(), to.clone(), run.choi)?;
    let achieved = crate::linalg::channel::apply_channel(&best_recovery, sigma)?;
    let fid = fidelity(rho_q, &achieved)?;
    Ok(IrrevResult {
        value: (1.0 - fid * fid).clamp(0.0, 1.0),
        fidelity: fid,
        best_recovery,
        fidelity_trace: run.trace,
        converged,
        restart_fidelities,
        regularization: REGULARIZATION,
    })
}

/// Transpose channel `X -> sqrt(p) E^dagger(E(p)^{-1/2} X E(p)^{-1/2}) sqrt(p)`
/// for `E = ch` and prior `p`, completed on the kernel of `E(p)` by
/// preparing `p`, so that it is trace preserving.
pub fn petz_recovery(ch: &Channel, prior: &DensityMatrix) -> Result<Channel> {
    let (d_in, d_out) = (ch.input().dim(), ch.output().dim());
    if prior.dim() != d_in {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional prior for a channel on {d_in} dimensions",
            prior.dim()
        )));
    }
    let image = apply_choi_linear(ch.choi(), d_in, d_out, prior.as_matrix()).hermitian_part();
    let eig = hermitian_eig(&image)?;
    if eig.max() <= REGULARIZATION {
        return Err(Error::SingularPrior(format!(
            "channel image of the prior has largest eigenvalue {:.3e}",
            eig.max()
        )));
    }
    let inv_sqrt = eig.apply(|x| if x > REGULARIZATION { 1.0 / x.sqrt() } else { 0.0 });
    let kernel = eig.apply(|x| if x > REGULARIZATION { 0.0 } else { 1.0 });
    let sqrt_prior = psd_sqrt(prior.as_matrix())?;
    let j = choi_from_map(d_out, d_in, |x| {
        let inner = inv_sqrt.matmul(x).matmul(&inv_sqrt);
        let back = apply_choi_adjoint(ch.choi(), d_in, d_out, &inner);
        let mut out = sqrt_prior.matmul(&back).matmul(&sqrt_prior);
        out.add_scaled(prior.as_matrix(), kernel.hs_inner(x));
        out
    });
    Channel::with_tolerance(ch.output().clone(), ch.input().clone(), j.hermitian_part(), 1e-8)
}
