use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::channel::{apply_channel, apply_choi_linear, Channel};
use crate::linalg::eig::hermitian_eig;
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::quantum::{partial_trace, trace_distance, DensityMatrix};
use crate::linalg::random::split_rng;
use crate::linalg::system::SystemSpec;
use crate::optimize::ascent::projected_ascent;
use crate::optimize::fidelity::fidelity_and_gradient;
use crate::optimize::projection::CovariantChoiSet;
use crate::optimize::OptimizerConfig;
use crate::symmetry::{measure_ft, random_covariant_channel};

/// Smoothing constant of the trace-norm penalty.
pub const TRACE_NORM_SMOOTHING: f64 = 1e-6;

/// One point of the broadcast frontier.
#[derive(Clone, Debug, Serialize)]
pub struct BroadcastAttempt {
    pub lambda: f64,
    /// Covariant map `Q -> Q x S'`.
    pub map: Channel,
    /// `||sigma_Q - rho_Q||_1 / 2`.
    pub marginal_disturbance: f64,
    /// `f_t(sigma_S')`.
    pub output_coherence: f64,
    /// Smoothed penalized objective at `map`.
    pub objective: f64,
    pub converged: bool,
    /// Index of the winning start: 0 is the trivial broadcast, 1 the previous
    /// penalty's optimum, later ones random covariant maps.
    pub start_index: usize,
}

/// `Tr sqrt(D^2 + mu^2)` and its gradient `D (D^2 + mu^2)^{-1/2}`.
fn smoothed_trace_norm(d: &ComplexMatrix, mu: f64) -> Result<(f64, ComplexMatrix)> {
    let eig = hermitian_eig(&d.hermitian_part())?;
    let value = eig.values.iter().map(|x| (x * x + mu * mu).sqrt()).sum();
    Ok((value, eig.apply(|x| x / (x * x + mu * mu).sqrt())))
}

/// `Fid(sigma, U sigma U^dagger)` and its gradient in `sigma`.
fn shift_fidelity(sigma: &ComplexMatrix, u: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
    let shifted = sigma.conjugate_by(u);
    let (f, g_first, _) = fidelity_and_gradient(&shifted, sigma, false)?;
    let (_, g_second, _) = fidelity_and_gradient(sigma, &shifted, false)?;
    let g = &g_first + &g_second.conjugate_by(&u.adjoint());
    Ok((f, g.hermitian_part()))
}

struct Problem<'a> {
    rho: &'a DensityMatrix,
    dq: usize,
    ds: usize,
    u_s: ComplexMatrix,
    rho_t: ComplexMatrix,
}

impl Problem<'_> {
    fn marginals(&self, j: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let out = apply_choi_linear(j, self.dq, self.dq * self.ds, self.rho.as_matrix()).hermitian_part();
        let q = partial_trace(&out, &[self.dq, self.ds], &[0])?;
        let s = partial_trace(&out, &[self.dq, self.ds], &[1])?;
        Ok((q, s))
    }

    fn objective(&self, j: &ComplexMatrix, lambda: f64) -> Result<(f64, ComplexMatrix)> {
        let (q, s) = self.marginals(j)?;
        let (fid, g_fid) = shift_fidelity(&s, &self.u_s)?;
        let mut value = 1.0 - fid;
        let mut g_out = ComplexMatrix::identity(self.dq).kron(&g_fid.scale_real(-1.0));
        if lambda > 0.0 {
            let (pen, g_pen) = smoothed_trace_norm(&(&q - self.rho.as_matrix()), TRACE_NORM_SMOOTHING)?;
            value -= lambda * pen;
            g_out = &g_out - &g_pen.kron(&ComplexMatrix::identity(self.ds)).scale_real(lambda);
        }
        Ok((value, g_out.kron(&self.rho_t)))
    }
}

/// Trivial broadcast: keep `Q` and prepare the lowest-energy eigenvector of `S'`.
fn trivial_broadcast(sys_q: &SystemSpec, sys_s: &SystemSpec) -> Result<Channel> {
    let ground = sys_s
        .spectrum()
        .iter()
        .enumerate()
        .min_by_key(|(_, &e)| e)
        .map(|(k, _)| k)
        .unwrap_or(0);
    let v = sys_s.eigenbasis().column(ground);
    let tau = DensityMatrix::new_unchecked(ComplexMatrix::outer(&v, &v));
    let prep = Channel::constant(&SystemSpec::trivial(1), sys_s, &tau)?;
    Channel::identity(sys_q)
        .tensor(&prep)
        .relabel(sys_q.clone(), SystemSpec::pair(sys_q, sys_s))
}

/// Penalized broadcast frontier: for each `lambda` maximizes
/// `f_t(sigma_S') - lambda ||sigma_Q - rho_Q||_1` over covariant maps
/// `Q -> Q x S'`. Each `lambda` starts from the trivial broadcast, the previous
/// optimum and `cfg.restarts - 1` random covariant maps; the best objective wins
/// (lowest start index on ties). Every point is feasible; none is claimed optimal.
pub fn optimize_broadcast(
    rho_q: &DensityMatrix,
    sys_q: &SystemSpec,
    sys_s: &SystemSpec,
    t: f64,
    lambda_schedule: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Vec<BroadcastAttempt>> {
    if rho_q.dim() != sys_q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional state on a {}-dimensional system",
            rho_q.dim(),
            sys_q.dim()
        )));
    }
    if !t.is_finite() || lambda_schedule.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::NonFinite);
    }
    if lambda_schedule.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::PreconditionFailed(
            "penalty schedule must be nondecreasing".into(),
        ));
    }
    cfg.validate()?;
    let out_sys = SystemSpec::pair(sys_q, sys_s);
    let set = CovariantChoiSet::new(sys_q, &out_sys);
    let problem = Problem {
        rho: rho_q,
        dq: sys_q.dim(),
        ds: sys_s.dim(),
        u_s: sys_s.unitary(t),
        rho_t: rho_q.as_matrix().transpose(),
    };
    let trivial = trivial_broadcast(sys_q, sys_s)?.into_choi();
    let mut warm: Option<ComplexMatrix> = None;
    let mut frontier = Vec::with_capacity(lambda_schedule.len());
    for (li, &lambda) in lambda_schedule.iter().enumerate() {
        let mut starts = vec![trivial.clone()];
        if let Some(w) = &warm {
            starts.push(w.clone());
        }
        for r in 1..cfg.restarts {
            let mut rng = split_rng(cfg.seed, (li * 1000 + r) as u64);
            starts.push(random_covariant_channel(sys_q, &out_sys, &mut rng)?.into_choi());
        }
        let mut best: Option<(usize, crate::optimize::ascent::AscentRun)> = None;
        for (k, start) in starts.into_iter().enumerate() {
            let run = projected_ascent(&set, start, cfg, |j| problem.objective(j, lambda))?;
            if best.as_ref().is_none_or(|(_, b)| run.value > b.value) {
                best = Some((k, run));
            }
        }
        let (start_index, run) = best.expect("at least one start");
        let map = Channel::new(sys_q.clone(), out_sys.clone(), run.choi.clone())?;
        let sigma = apply_channel(&map, rho_q)?;
        let q = DensityMatrix::new_unchecked(partial_trace(sigma.as_matrix(), &[problem.dq, problem.ds], &[0])?);
        let s = DensityMatrix::new_unchecked(partial_trace(sigma.as_matrix(), &[problem.dq, problem.ds], &[1])?);
        frontier.push(BroadcastAttempt {
            lambda,
            marginal_disturbance: trace_distance(&q, rho_q)?,
            output_coherence: measure_ft(&s, sys_s, t)?,
            objective: run.value,
            converged: run.converged,
            start_index,
            map,
        });
        warm = Some(run.choi);
    }
    Ok(frontier)
}
