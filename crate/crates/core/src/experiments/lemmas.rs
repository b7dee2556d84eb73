//! Monte Carlo checks of the supporting inequalities and the exact-case
//! broadcast complementarity test.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::channel::{apply_channel, Channel};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::quantum::{infidelity, DensityMatrix};
use crate::linalg::random::{random_density_matrix, random_unitary, SimRng};
use crate::linalg::system::SystemSpec;
use crate::symmetry::{measure_ft, random_covariant_channel, skew_information, time_translate};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub trials: usize,
    /// `max (|Fid(U t1 U', t1) - Fid(U t2 U', t2)| - 4 sqrt(1 - Fid(t1, t2)))`.
    pub max_violation: f64,
}

/// Random system of dimension `d` with integer spectrum in `[-3, 3]`.
fn random_system(d: usize, rng: &mut SimRng) -> Result<SystemSpec> {
    let spectrum = (0..d).map(|_| rng.random_range(-3i64..=3)).collect();
    SystemSpec::new(spectrum, random_unitary(d, rng))
}

/// Random state of random rank.
fn random_state(d: usize, rng: &mut SimRng) -> DensityMatrix {
    let rank = rng.random_range(1..=d);
    random_density_matrix(d, rank, rng)
}

/// Samples `(tau1, tau2, U = e^{-iHs})` and returns the worst slack of
/// `|Fid(U tau1 U^dagger, tau1) - Fid(U tau2 U^dagger, tau2)| <= 4 sqrt(1 - Fid(tau1, tau2))`.
///
/// Trials cycle through `dims` and through three pair types: independent
/// states, a state and a small perturbation of it, and a state paired with
/// the maximally mixed state.
pub fn check_fidelity_perturbation_lemma(rng: &mut SimRng, trials: usize, dims: &[usize]) -> Result<LemmaReport> {
    if trials == 0 || dims.is_empty() {
        return Err(Error::PreconditionFailed(
            "need at least one trial and one dimension".into(),
        ));
    }
    let mut worst = f64::NEG_INFINITY;
    for k in 0..trials {
        let d = dims[k % dims.len()];
        let sys = random_system(d, rng)?;
        let s: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let t1 = random_state(d, rng);
        let t2 = match (k / dims.len()) % 3 {
            0 => random_state(d, rng),
            1 => {
                let eps = 10f64.powf(rng.random_range(-8.0..-1.0));
                t1.mix(&random_state(d, rng), 1.0 - eps)
            }
            _ => DensityMatrix::maximally_mixed(d),
        };
        let u1 = infidelity(&time_translate(&t1, &sys, s)?, &t1)?;
        let u2 = infidelity(&time_translate(&t2, &sys, s)?, &t2)?;
        let bound = 4.0 * infidelity(&t1, &t2)?.sqrt();
        worst = worst.max((u1 - u2).abs() - bound);
    }
    Ok(LemmaReport {
        trials,
        max_violation: worst,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub trials: usize,
    /// `max (f(E(rho)) - f(rho))` for `f_t`.
    pub max_ft_increase: f64,
    /// `max (I(E(rho)) - I(rho))` for skew information.
    pub max_skew_increase: f64,
}

/// Random covariant channels between random integer-spectrum systems of the
/// given dimensions, applied to random states; reports the worst increase of
/// `f_t` (random `t`) and of skew information.
pub fn check_monotonicity(rng: &mut SimRng, trials: usize, dims: &[usize]) -> Result<MonotonicityReport> {
    if trials == 0 || dims.is_empty() {
        return Err(Error::PreconditionFailed(
            "need at least one trial and one dimension".into(),
        ));
    }
    let mut ft_inc = f64::NEG_INFINITY;
    let mut skew_inc = f64::NEG_INFINITY;
    for k in 0..trials {
        let d_in = dims[k % dims.len()];
        let d_out = dims[rng.random_range(0..dims.len())];
        let spec_in: Vec<i64> = (0..d_in).map(|_| rng.random_range(0i64..=3)).collect();
        let spec_out: Vec<i64> = (0..d_out).map(|_| rng.random_range(0i64..=3)).collect();
        let a = SystemSpec::from_diag(&spec_in);
        let b = SystemSpec::from_diag(&spec_out);
        let ch = random_covariant_channel(&a, &b, rng)?;
        let rho = random_state(d_in, rng);
        let out = apply_channel(&ch, &rho)?;
        let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        ft_inc = ft_inc.max(measure_ft(&out, &b, t)? - measure_ft(&rho, &a, t)?);
        skew_inc = skew_inc.max(skew_information(&out, &b)? - skew_information(&rho, &a)?);
    }
    Ok(MonotonicityReport {
        trials,
        max_ft_increase: ft_inc,
        max_skew_increase: skew_inc,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplementarityVerdict {
    pub identity_marginal: bool,
    /// `||J_A - J_id||_max` of the `A` marginal.
    pub identity_residual: f64,
    /// `||J_S - tau x I||_max` for the best constant channel, when the `A`
    /// marginal is the identity.
    pub erasure_residual: Option<f64>,
}

/// For `ch : A -> S x A`, tests whether the `A` marginal is the identity
/// channel and, if so, how far the `S` marginal is from a constant channel.
pub fn check_broadcast_complementarity(ch: &Channel, tol: f64) -> Result<ComplementarityVerdict> {
    ch.validate(10.0 * crate::tol::TOL_STRUCT)
        .map_err(|e| Error::InvalidChannel(format!("broadcast map: {e}")))?;
    let parts = ch.output().parts();
    if parts.len() != 2 || parts[1].dim() != ch.input().dim() {
        return Err(Error::InvalidChannel("expected a map A -> S x A".into()));
    }
    let d_a = ch.input().dim();
    let a_marg = ch.output_marginal(&[1])?;
    let identity_residual = (a_marg.choi() - Channel::identity(ch.input()).choi()).max_abs();
    let identity_marginal = identity_residual <= tol;
    if !identity_marginal {
        return Ok(ComplementarityVerdict {
            identity_marginal,
            identity_residual,
            erasure_residual: None,
        });
    }
    let s_marg = ch.output_marginal(&[0])?;
    let d_s = parts[0].dim();
    // The constant channel closest in Frobenius norm prepares the average output.
    let mut tau = ComplexMatrix::zeros(d_s, d_s);
    for i in 0..d_a {
        tau = &tau + apply_channel(&s_marg, &DensityMatrix::basis(d_a, i))?.as_matrix();
    }
    let tau = tau.scale_real(1.0 / d_a as f64);
    let residual = (s_marg.choi() - &tau.kron(&ComplexMatrix::identity(d_a))).max_abs();
    if residual > 10.0 * tol {
        return Err(Error::AssertionFailure(format!(
            "identity A marginal but S marginal is {residual:.3e} from constant"
        )));
    }
    Ok(ComplementarityVerdict {
        identity_marginal,
        identity_residual,
        erasure_residual: Some(residual),
    })
}
