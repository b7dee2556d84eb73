//! Orbit families and the structural checks behind the no-broadcasting argument.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ki::algebra::generate_algebra;
use crate::ki::decompose::{KIDecomposition, StateFamily, KI_TOL};
use crate::linalg::channel::{apply_channel, Channel};
use crate::linalg::eig::hermitian_eig;
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::quantum::{partial_trace, trace_distance, DensityMatrix};
use crate::linalg::system::SystemSpec;
use crate::symmetry::time_translate;
use crate::tol::TOL_RANK;

/// Largest orbit sample count reached by the doubling schedule.
pub const MAX_ORBIT_SAMPLES: usize = 64;

fn orbit_states(rho: &DensityMatrix, sys: &SystemSpec, n: usize) -> Result<Vec<DensityMatrix>> {
    (0..n)
        .map(|j| time_translate(rho, sys, 2.0 * std::f64::consts::PI * j as f64 / n as f64))
        .collect()
}

/// Dimension of the algebra generated by the transition operators of `states`.
fn transition_algebra_dim(states: &[DensityMatrix]) -> Result<usize> {
    let d = states[0].dim();
    let mut avg = ComplexMatrix::zeros(d, d);
    for s in states {
        avg = &avg + s.as_matrix();
    }
    let avg = avg.scale_real(1.0 / states.len() as f64).hermitian_part();
    let eig = hermitian_eig(&avg)?;
    let inv = eig.apply(|l| if l > TOL_RANK { 1.0 / l.sqrt() } else { 0.0 });
    let gens: Vec<ComplexMatrix> = states.iter().map(|s| inv.matmul(s.as_matrix()).matmul(&inv)).collect();
    Ok(generate_algebra(&gens, KI_TOL)?.dimension())
}

/// `{U(t_j) rho U(t_j)^dagger : t_j = 2 pi j / n}`, with `n` doubled from
/// `n_samples` until the transition algebra dimension is unchanged by one
/// doubling. The smaller `n` of the stable pair is returned.
pub fn orbit_family(rho: &DensityMatrix, sys: &SystemSpec, n_samples: usize) -> Result<StateFamily> {
    if n_samples < 2 {
        return Err(Error::InvalidState("orbit families need at least two samples".into()));
    }
    if n_samples > MAX_ORBIT_SAMPLES {
        return Err(Error::SizeCap(format!(
            "{n_samples} orbit samples exceed {MAX_ORBIT_SAMPLES}"
        )));
    }
    let mut n = n_samples;
    let mut states = orbit_states(rho, sys, n)?;
    let mut dim = transition_algebra_dim(&states)?;
    while 2 * n <= MAX_ORBIT_SAMPLES {
        let next_states = orbit_states(rho, sys, 2 * n)?;
        let next_dim = transition_algebra_dim(&next_states)?;
        if next_dim == dim {
            break;
        }
        n *= 2;
        states = next_states;
        dim = next_dim;
    }
    let labels = (0..n).map(|j| format!("t{j}")).collect();
    StateFamily::new(states, labels)
}

/// `max_{mu, t} |Tr(Pi_mu U(t) rho U(t)^dagger) - Tr(Pi_mu rho)|`.
pub fn ehrenfest_constancy_check(
    dec: &KIDecomposition,
    rho: &DensityMatrix,
    sys: &SystemSpec,
    t_grid: &[f64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in &dec.blocks {
        let p0 = rho.as_matrix().hs_inner(&b.projector).re;
        for &t in t_grid {
            let pt = time_translate(rho, sys, t)?.as_matrix().hs_inner(&b.projector).re;
            worst = worst.max((pt - p0).abs());
        }
    }
    Ok(worst)
}

/// Output of [`lemma4_reduced_form_check`].
#[derive(Clone, Debug, Serialize)]
pub struct ReducedFormReport {
    /// Worst trace distance between `sigma^x` and `sum_mu p_mu^x sigma^mu`.
    pub residual: f64,
    /// Worst trace distance between a family member and its broadcast `Q` marginal.
    pub marginal_disturbance: f64,
    /// Least-squares block states `sigma^mu` on the side system.
    pub block_states: Vec<DensityMatrix>,
}

/// Fits side-system outputs of `broadcast : Q -> Q x S'` on the family as
/// mixtures of per-block states weighted by the block probabilities.
pub fn lemma4_reduced_form_check(
    broadcast: &Channel,
    fam: &StateFamily,
    dec: &KIDecomposition,
    tol: f64,
) -> Result<ReducedFormReport> {
    let parts = broadcast.output().parts();
    if parts.len() != 2 || parts[0].dim() != fam.dim() || broadcast.input().dim() != fam.dim() {
        return Err(Error::DimensionMismatch(
            "broadcast must map the family space Q to Q x S'".into(),
        ));
    }
    let (dq, ds) = (parts[0].dim(), parts[1].dim());
    let mut sides = Vec::with_capacity(fam.len());
    let mut disturbance: f64 = 0.0;
    for rho in fam.states() {
        let out = apply_channel(broadcast, rho)?;
        let q = DensityMatrix::new_unchecked(partial_trace(out.as_matrix(), &[dq, ds], &[0])?);
        disturbance = disturbance.max(trace_distance(&q, rho)?);
        sides.push(partial_trace(out.as_matrix(), &[dq, ds], &[1])?);
    }
    if disturbance > tol {
        return Err(Error::PreconditionFailed(format!(
            "broadcast disturbs the family marginal by {disturbance:.3e}"
        )));
    }

    let nb = dec.blocks.len();
    let gram = ComplexMatrix::from_fn(nb, nb, |a, b| dec.probs.iter().map(|p| p[a] * p[b]).sum::<f64>().into());
    let eig = hermitian_eig(&gram)?;
    let cutoff = 1e-12 * eig.max().max(1.0);
    let pinv = eig.apply(|l| if l > cutoff { 1.0 / l } else { 0.0 });
    let mut block_states = Vec::with_capacity(nb);
    for mu in 0..nb {
        let mut acc = ComplexMatrix::zeros(ds, ds);
        for (x, side) in sides.iter().enumerate() {
            let w: f64 = (0..nb).map(|nu| pinv[(mu, nu)].re * dec.probs[x][nu]).sum();
            acc = &acc + &side.scale_real(w);
        }
        block_states.push(DensityMatrix::new_unchecked(acc.hermitian_part()));
    }
    let mut residual: f64 = 0.0;
    for (x, side) in sides.iter().enumerate() {
        let mut fit = ComplexMatrix::zeros(ds, ds);
        for (mu, s) in block_states.iter().enumerate() {
            fit = &fit + &s.as_matrix().scale_real(dec.probs[x][mu]);
        }
        let actual = DensityMatrix::new_unchecked(side.clone());
        residual = residual.max(trace_distance(&actual, &DensityMatrix::new_unchecked(fit))?);
    }
    Ok(ReducedFormReport {
        residual,
        marginal_disturbance: disturbance,
        block_states,
    })
}
