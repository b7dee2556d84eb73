//! Optimization over covariant channels: projection onto the feasible set,
//! the recovery-fidelity irreversibility measure, the Petz baseline and the
//! penalized broadcast search.

mod ascent;
mod barrier;
pub mod broadcast;
pub mod fidelity;
pub mod projection;
pub mod recovery;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use broadcast::{optimize_broadcast, BroadcastAttempt, TRACE_NORM_SMOOTHING};
pub use fidelity::fidelity_gradient;
pub use projection::{project_covariant_tp_psd, PROJECTION_MAX_ITER};
pub use recovery::{max_recovery_fidelity, petz_recovery, IrrevResult, RESTART_AGREEMENT};

/// Settings shared by the recovery and broadcast optimizers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iter: usize,
    /// Relative improvement below which ascent stops.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub lambda_schedule: Vec<f64>,
    /// Translation time of the coherence measure `f_t`.
    pub t: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-8,
            restarts: 5,
            seed: 0,
            lambda_schedule: vec![0.0, 1.0, 4.0, 16.0, 64.0, 256.0],
            t: std::f64::consts::FRAC_PI_2,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.restarts == 0 {
            return Err(Error::PreconditionFailed(
                "max_iter and restarts must be positive".into(),
            ));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::PreconditionFailed(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !self.t.is_finite() || self.lambda_schedule.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::channel::{apply_channel, Channel};
    use crate::linalg::matrix::ComplexMatrix;
    use crate::linalg::quantum::{fidelity, DensityMatrix, PureState};
    use crate::linalg::random::{random_density_matrix, random_hermitian, rng_from_seed};
    use crate::linalg::system::SystemSpec;
    use crate::symmetry::{is_covariant_channel, random_covariant_channel};

    #[test]
    fn projection_fixed_point_and_zero() {
        let q = SystemSpec::ladder(2);
        let b = SystemSpec::from_diag(&[0, 1, 1]);
        let mut rng = rng_from_seed(4);
        let ch = random_covariant_channel(&q, &b, &mut rng).unwrap();
        let p = project_covariant_tp_psd(ch.choi(), &q, &b, PROJECTION_MAX_ITER, 1e-12).unwrap();
        assert!((&p - ch.choi()).max_abs() < 1e-10);
        let z = project_covariant_tp_psd(&ComplexMatrix::zeros(6, 6), &q, &b, PROJECTION_MAX_ITER, 1e-12).unwrap();
        assert!((&z - &ComplexMatrix::identity(6).scale_real(1.0 / 3.0)).max_abs() < 1e-12);
    }

    #[test]
    fn projection_is_nonexpansive_near_feasible() {
        let q = SystemSpec::ladder(2);
        let mut rng = rng_from_seed(8);
        for _ in 0..20 {
            let ch = random_covariant_channel(&q, &q, &mut rng).unwrap();
            let delta = random_hermitian(4, &mut rng);
            let delta = delta.scale_real(1e-3 / delta.frobenius_norm());
            let p = project_covariant_tp_psd(&(ch.choi() + &delta), &q, &q, PROJECTION_MAX_ITER, 1e-12).unwrap();
            assert!((&p - ch.choi()).max_abs() < 1e-2);
            let out = Channel::new(q.clone(), q.clone(), p).unwrap();
            assert!(is_covariant_channel(&out, 1e-9).unwrap().holds);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_from_seed(12);
        for d in [2, 3] {
            let rho = random_density_matrix(d, d, &mut rng);
            let x = random_density_matrix(d, d, &mut rng);
            let g = fidelity_gradient(&rho, &x).unwrap();
            let dir = random_hermitian(d, &mut rng);
            let h = 1e-5;
            let plus = DensityMatrix::new_unchecked(&x.as_matrix().clone() + &dir.scale_real(h));
            let minus = DensityMatrix::new_unchecked(x.as_matrix() - &dir.scale_real(h));
            let fd = (fidelity(&rho, &plus).unwrap() - fidelity(&rho, &minus).unwrap()) / (2.0 * h);
            let an = g.hs_inner(&dir).re;
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{fd} vs {an}");
        }
    }

    #[test]
    fn recovery_examples() {
        let q = SystemSpec::ladder(2);
        let cfg = OptimizerConfig::default();
        let plus = PureState::plus().to_density();
        let mixed = DensityMatrix::maximally_mixed(2);
        let r = max_recovery_fidelity(&plus, &mixed, &q, &q, &cfg).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-3, "{}", r.value);
        let r = max_recovery_fidelity(&DensityMatrix::basis(2, 0), &mixed, &q, &q, &cfg).unwrap();
        assert!(r.value <= 1e-6, "{}", r.value);
        assert!(r.converged);
        let r = max_recovery_fidelity(&plus, &plus, &q, &q, &cfg).unwrap();
        assert!(r.value <= 1e-6);
        for w in r.fidelity_trace.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn petz_examples() {
        let q = SystemSpec::ladder(2);
        let mixed = DensityMatrix::maximally_mixed(2);
        let id = Channel::identity(&q);
        assert!((petz_recovery(&id, &mixed).unwrap().choi() - id.choi()).max_abs() < 1e-9);
        let dep = Channel::completely_depolarizing(&q, &q);
        let p = petz_recovery(&dep, &mixed).unwrap();
        assert!((p.choi() - dep.choi()).max_abs() < 1e-9);
        let deph = Channel::dephasing(&q);
        assert!((petz_recovery(&deph, &mixed).unwrap().choi() - deph.choi()).max_abs() < 1e-9);
    }

    #[test]
    fn broadcast_examples() {
        let q = SystemSpec::ladder(2);
        let cfg = OptimizerConfig {
            max_iter: 300,
            ..OptimizerConfig::default()
        };
        let sym = DensityMatrix::new(ComplexMatrix::diag_real(&[0.3, 0.7])).unwrap();
        for a in optimize_broadcast(&sym, &q, &q, cfg.t, &[0.0, 16.0], &cfg).unwrap() {
            assert!(a.output_coherence <= 1e-8);
            assert!(is_covariant_channel(&a.map, 1e-8).unwrap().holds);
        }
        let plus = PureState::plus().to_density();
        let front = optimize_broadcast(&plus, &q, &q, cfg.t, &[0.0], &cfg).unwrap();
        assert!(front[0].output_coherence > 0.2, "{}", front[0].output_coherence);
        let s = apply_channel(&front[0].map, &plus).unwrap();
        assert!((s.as_matrix().trace().re - 1.0).abs() < 1e-9);
    }
}
