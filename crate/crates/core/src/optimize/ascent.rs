use crate::error::Result;
use crate::linalg::matrix::ComplexMatrix;
use crate::optimize::projection::CovariantChoiSet;
use crate::optimize::OptimizerConfig;

const MAX_BACKTRACKS: usize = 60;
/// Armijo sufficient-increase fraction.
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-10;
const MAX_STEP: f64 = 1e10;
const INNER_PROJECTION_ITER: usize = 2000;
const INNER_PROJECTION_TOL: f64 = 1e-10;
/// Consecutive accepted steps with relative gain below `tol` that end a run.
const STALL_LIMIT: usize = 5;

pub(crate) struct AscentRun {
    pub choi: ComplexMatrix,
    pub value: f64,
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
}

/// Spectral projected gradient ascent over covariant Choi operators.
///
/// `objective` returns the value and its gradient with respect to the Choi
/// operator. Each iteration projects a Barzilai-Borwein gradient step onto
/// the set and searches along the segment towards that point, which stays
/// feasible by convexity, until an Armijo increase holds. Values never
/// decrease, so the trace is monotone. A search that fails in
/// `MAX_BACKTRACKS` halvings, or a vanishing projected step, ends the run.
pub(crate) fn projected_ascent(
    set: &CovariantChoiSet,
    start: ComplexMatrix,
    cfg: &OptimizerConfig,
    mut objective: impl FnMut(&ComplexMatrix) -> Result<(f64, ComplexMatrix)>,
) -> Result<AscentRun> {
    let mut j = start;
    let (mut value, grad) = objective(&j)?;
    let mut dir = set.tangent(&grad);
    let mut trace = vec![(0, value)];
    let mut step = 1.0 / dir.frobenius_norm().max(1e-12);
    let mut converged = false;
    let mut stalls = 0;
    for it in 1..=cfg.max_iter {
        let mut target = j.clone();
        target.add_scaled(&dir, step.into());
        let (target, _, _) = set.project(&target, INNER_PROJECTION_ITER, INNER_PROJECTION_TOL)?;
        let d = &target - &j;
        let slope = dir.hs_inner(&d).re;
        if d.frobenius_norm() <= 1e-14 || slope <= 0.0 {
            converged = true;
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut cand = j.clone();
            cand.add_scaled(&d, alpha.into());
            let (v, g) = objective(&cand)?;
            if v >= value + ARMIJO * alpha * slope {
                accepted = Some((cand, v, g));
                break;
            }
            alpha *= 0.5;
        }
        let Some((cand, v, g)) = accepted else {
            converged = true;
            break;
        };
        let new_dir = set.tangent(&g);
        let s_k = &cand - &j;
        let y_k = &new_dir - &dir;
        let sy = s_k.hs_inner(&y_k).re;
        step = if sy < 0.0 {
            (s_k.hs_inner(&s_k).re / -sy).clamp(MIN_STEP, MAX_STEP)
        } else {
            MAX_STEP.min(step * 4.0)
        };
        let gain = v - value;
        j = cand;
        value = v;
        dir = new_dir;
        trace.push((it, value));
        if gain <= cfg.tol * value.abs().max(1e-3) {
            stalls += 1;
            if stalls >= STALL_LIMIT {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Ok(AscentRun {
        choi: j,
        value,
        trace,
        converged,
    })
}
