//! Koashi-Imoto decomposition of a finite family of states.
//!
//! Writing `rho_bar` for the family average and `T_x = rho_bar^{-1/2} rho_x
//! rho_bar^{-1/2}` on the support of `rho_bar`, the decomposition is the
//! Wedderburn structure of the smallest *-algebra that contains every `T_x`
//! and is invariant under the modular flow `X -> rho_bar^{is} X rho_bar^{-is}`.
//! That algebra is generated by the modular frequency components of the
//! `T_x`: in the eigenbasis of `rho_bar` the entry `(i, j)` of `T_x` belongs to
//! frequency `ln l_i - ln l_j`. Invariance forces `rho_bar` to split as
//! `alpha_mu x omega_mu` on each block and every state as
//! `p_mu^x rho_{L,mu}^x x omega_mu`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ki::algebra::{
    cluster_sorted, commuting_subspace, generate_algebra, left_reduce, right_reduce, wedderburn_decompose, AlgebraBasis,
};
use crate::linalg::eig::{hermitian_eig, unitarity_error};
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::linalg::quantum::{trace_distance, DensityMatrix};
use crate::linalg::random::{complex_gaussian, rng_from_seed};
use crate::tol::TOL_RANK;

/// Largest family dimension accepted by [`ki_decompose`].
pub const MAX_KI_DIM: usize = 32;
/// Largest family dimension accepted by the reference oracle.
pub const MAX_REFERENCE_DIM: usize = 6;
/// Default closure tolerance for the algebra generated by the family.
pub const KI_TOL: f64 = 1e-9;
/// Closure tolerance of the reference oracle; its products of modular flows
/// accumulate more rounding than the main algorithm's frequency components.
const REFERENCE_CLOSURE_TOL: f64 = 1e-7;

const FREQUENCY_TOL: f64 = 1e-8;
const MAX_CONDITION: f64 = 1e12;

/// A finite labelled family of states on a common space.
#[derive(Clone, Debug)]
pub struct StateFamily {
    states: Vec<DensityMatrix>,
    labels: Vec<String>,
}

impl StateFamily {
    pub fn new(states: Vec<DensityMatrix>, labels: Vec<String>) -> Result<Self> {
        let d = match states.first() {
            Some(s) => s.dim(),
            None => return Err(Error::InvalidState("empty state family".into())),
        };
        if labels.len() != states.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} states",
                labels.len(),
                states.len()
            )));
        }
        if states.iter().any(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch("family states differ in dimension".into()));
        }
        let mut seen = labels.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != labels.len() {
            return Err(Error::InvalidState("duplicate state labels".into()));
        }
        Ok(Self { states, labels })
    }

    /// Labels `x0, x1, ...`.
    pub fn unlabeled(states: Vec<DensityMatrix>) -> Result<Self> {
        let labels = (0..states.len()).map(|i| format!("x{i}")).collect();
        Self::new(states, labels)
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn average(&self) -> DensityMatrix {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for s in &self.states {
            acc = &acc + s.as_matrix();
        }
        DensityMatrix::new_unchecked(acc.scale_real(1.0 / self.len() as f64).hermitian_part())
    }
}

/// One block `mu` of the decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct KIBlock {
    pub m: usize,
    pub k: usize,
    /// Projector `Pi_mu` on the original space.
    pub projector: ComplexMatrix,
    /// Isometry `C^m x C^k -> C^d`.
    pub isometry: ComplexMatrix,
    /// Fixed state `omega_mu` on the `k`-dimensional factor.
    pub omega: DensityMatrix,
}

/// Result of [`ki_decompose`].
#[derive(Clone, Debug)]
pub struct KIDecomposition {
    pub blocks: Vec<KIBlock>,
    /// `probs[x][mu] = Tr(Pi_mu rho_x)`.
    pub probs: Vec<Vec<f64>>,
    /// `rho_{L,mu}^x`, or `None` where `p_mu^x` vanishes.
    pub left_states: Vec<Vec<Option<DensityMatrix>>>,
    pub labels: Vec<String>,
    /// Dimension of the generated algebra.
    pub algebra_dim: usize,
    pub checks: KIChecks,
}

/// Measured defects of the decomposition invariants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KIChecks {
    /// Orthogonality, idempotence and completeness on the support.
    pub projector_error: f64,
    pub isometry_error: f64,
    /// Worst trace distance between a state and its block reconstruction.
    pub reconstruction_error: f64,
    /// Every block with `m >= 2` has a full left algebra.
    pub maximal: bool,
}

impl KIChecks {
    pub fn passes(&self) -> bool {
        self.projector_error <= 1e-8 && self.isometry_error <= 1e-8 && self.reconstruction_error <= 1e-7 && self.maximal
    }
}

#[derive(Serialize)]
struct KIJson<'a> {
    blocks: &'a [KIBlock],
    probs: BTreeMap<&'a str, &'a [f64]>,
    algebra_dim: usize,
    checks: &'a KIChecks,
}

impl Serialize for KIDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KIJson {
            blocks: &self.blocks,
            probs: self
                .labels
                .iter()
                .zip(&self.probs)
                .map(|(l, p)| (l.as_str(), p.as_slice()))
                .collect(),
            algebra_dim: self.algebra_dim,
            checks: &self.checks,
        }
        .serialize(s)
    }
}

impl KIDecomposition {
    /// Block dimensions `(m, k)` in block order.
    pub fn dims(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.m, b.k)).collect()
    }

    /// `sum_mu p_mu^x V_mu (rho_L x omega) V_mu^dagger`.
    pub fn reconstruct(&self, x: usize) -> ComplexMatrix {
        let d = self.blocks.first().map(|b| b.isometry.rows()).unwrap_or(0);
        let mut acc = ComplexMatrix::zeros(d, d);
        for (mu, b) in self.blocks.iter().enumerate() {
            if let Some(left) = &self.left_states[x][mu] {
                let local = left.as_matrix().kron(b.omega.as_matrix()).scale_real(self.probs[x][mu]);
                acc = &acc + &local.conjugate_by(&b.isometry);
            }
        }
        acc
    }
}

/// Support of `rho_bar`: eigenvectors (columns) and eigenvalues above `TOL_RANK`.
fn support(rho_bar: &DensityMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
    let eig = hermitian_eig(rho_bar.as_matrix())?;
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > TOL_RANK).collect();
    let lambdas: Vec<f64> = keep.iter().map(|&k| eig.values[k]).collect();
    let max = lambdas.iter().copied().fold(0.0, f64::max);
    let min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    if keep.is_empty() || max / min > MAX_CONDITION {
        return Err(Error::RankCollapse(max / min));
    }
    let d = rho_bar.dim();
    let basis = ComplexMatrix::from_fn(d, keep.len(), |i, j| eig.vectors[(i, keep[j])]);
    Ok((basis, lambdas))
}

/// Transition operators in the eigenbasis of `rho_bar` restricted to its support.
fn transition_operators(fam: &StateFamily, basis: &ComplexMatrix, lambdas: &[f64]) -> Vec<ComplexMatrix> {
    let inv_sqrt: Vec<f64> = lambdas.iter().map(|l| 1.0 / l.sqrt()).collect();
    fam.states()
        .iter()
        .map(|s| {
            let local = s.as_matrix().compress(basis);
            ComplexMatrix::from_fn(lambdas.len(), lambdas.len(), |i, j| {
                local[(i, j)] * inv_sqrt[i] * inv_sqrt[j]
            })
        })
        .collect()
}

/// Splits each operator into modular frequency components.
fn frequency_components(ops: &[ComplexMatrix], lambdas: &[f64]) -> Vec<ComplexMatrix> {
    let r = lambdas.len();
    let logs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(r * r);
    for i in 0..r {
        for j in 0..r {
            pairs.push((logs[i] - logs[j], i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let freqs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let clusters = cluster_sorted(&freqs, FREQUENCY_TOL);
    let mut out = Vec::new();
    for op in ops {
        let scale = op.frobenius_norm();
        for c in &clusters {
            let mut comp = ComplexMatrix::zeros(r, r);
            for &p in c {
                let (_, i, j) = pairs[p];
                comp[(i, j)] = op[(i, j)];
            }
            if comp.frobenius_norm() > 1e-10 * scale.max(1.0) {
                out.push(comp);
            }
        }
    }
    out
}

/// Dimension of `span{pi b pi}` for an orthonormal basis of a space that
/// contains its own compressions by the central projector `pi`.
///
/// The Gram matrix of the compressions is then an orthogonal projector, so
/// its eigenvalues sit at 0 or 1 and the rank is read off at 1/2.
fn compressed_rank(basis: &[ComplexMatrix], pi: &ComplexMatrix) -> Result<usize> {
    let comp: Vec<ComplexMatrix> = basis.iter().map(|b| pi.matmul(b).matmul(pi)).collect();
    let n = comp.len();
    let gram = ComplexMatrix::from_fn(n, n, |k, l| comp[k].hs_inner(&comp[l]));
    Ok(hermitian_eig(&gram.hermitian_part())?
        .values
        .iter()
        .filter(|&&x| x > 0.5)
        .count())
}

/// Koashi-Imoto decomposition of `fam`.
pub fn ki_decompose(fam: &StateFamily, tol: f64) -> Result<KIDecomposition> {
    let d = fam.dim();
    if d > MAX_KI_DIM {
        return Err(Error::SizeCap(format!("family dimension {d} exceeds {MAX_KI_DIM}")));
    }
    let rho_bar = fam.average();
    let (basis, lambdas) = support(&rho_bar)?;
    let r = lambdas.len();
    let t_ops = transition_operators(fam, &basis, &lambdas);
    let mut gens = frequency_components(&t_ops, &lambdas);
    gens.push(ComplexMatrix::identity(r));
    let algebra = generate_algebra(&gens, tol)?;
    let wblocks = wedderburn_decompose(&algebra, tol)?;

    let local_states: Vec<ComplexMatrix> = fam.states().iter().map(|s| s.as_matrix().compress(&basis)).collect();
    let rho_bar_local = ComplexMatrix::diag_real(&lambdas);
    let mut blocks = Vec::with_capacity(wblocks.len());
    let mut probs = vec![Vec::with_capacity(wblocks.len()); fam.len()];
    let mut left_states = vec![Vec::with_capacity(wblocks.len()); fam.len()];
    for wb in &wblocks {
        let (m, k) = (wb.m, wb.k);
        let avg = rho_bar_local.compress(&wb.isometry);
        let omega = right_reduce(&avg, m, k);
        let omega = DensityMatrix::renormalized(omega);
        for (x, s) in local_states.iter().enumerate() {
            let p = s.hs_inner(&wb.projector).re.max(0.0);
            probs[x].push(p);
            if p > TOL_RANK {
                let left = left_reduce(&s.compress(&wb.isometry), m, k);
                left_states[x].push(Some(DensityMatrix::renormalized(left)));
            } else {
                left_states[x].push(None);
            }
        }
        blocks.push(KIBlock {
            m,
            k,
            projector: wb.projector.conjugate_by(&basis),
            isometry: basis.matmul(&wb.isometry),
            omega,
        });
    }

    // Heavier blocks first; ties broken by shape.
    let weights: Vec<f64> = blocks
        .iter()
        .map(|b| b.projector.hs_inner(rho_bar.as_matrix()).re)
        .collect();
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by(|&a, &b| {
        weights[b]
            .total_cmp(&weights[a])
            .then((blocks[a].m, blocks[a].k).cmp(&(blocks[b].m, blocks[b].k)))
    });
    let blocks: Vec<KIBlock> = order.iter().map(|&i| blocks[i].clone()).collect();
    let probs: Vec<Vec<f64>> = probs.iter().map(|p| order.iter().map(|&i| p[i]).collect()).collect();
    let left_states: Vec<Vec<Option<DensityMatrix>>> = left_states
        .iter()
        .map(|l| order.iter().map(|&i| l[i].clone()).collect())
        .collect();

    let mut dec = KIDecomposition {
        blocks,
        probs,
        left_states,
        labels: fam.labels().to_vec(),
        algebra_dim: algebra.dimension(),
        checks: KIChecks {
            projector_error: 0.0,
            isometry_error: 0.0,
            reconstruction_error: 0.0,
            maximal: true,
        },
    };
    dec.checks = verify_decomposition(&dec, fam, &basis)?;
    if cfg!(debug_assertions) && !dec.checks.passes() {
        return Err(Error::AssertionFailure(format!(
            "decomposition invariants violated: {:?}",
            dec.checks
        )));
    }
    Ok(dec)
}

fn verify_decomposition(dec: &KIDecomposition, fam: &StateFamily, support_basis: &ComplexMatrix) -> Result<KIChecks> {
    let d = fam.dim();
    let support_proj = support_basis.matmul(&support_basis.adjoint());
    let mut sum = ComplexMatrix::zeros(d, d);
    let mut projector_error: f64 = 0.0;
    for (mu, b) in dec.blocks.iter().enumerate() {
        projector_error = projector_error.max((&b.projector.matmul(&b.projector) - &b.projector).max_abs());
        for other in &dec.blocks[mu + 1..] {
            projector_error = projector_error.max(b.projector.matmul(&other.projector).max_abs());
        }
        sum = &sum + &b.projector;
    }
    projector_error = projector_error.max((&sum - &support_proj).max_abs());
    let isometry_error = dec
        .blocks
        .iter()
        .map(|b| unitarity_error(&b.isometry))
        .fold(0.0, f64::max);
    let mut reconstruction_error: f64 = 0.0;
    for (x, s) in fam.states().iter().enumerate() {
        let rec = DensityMatrix::new_unchecked(dec.reconstruct(x).hermitian_part());
        reconstruction_error = reconstruction_error.max(trace_distance(s, &rec)?);
    }
    let mut maximal = true;
    for (mu, b) in dec.blocks.iter().enumerate() {
        if b.m < 2 {
            continue;
        }
        let gens: Vec<ComplexMatrix> = dec
            .left_states
            .iter()
            .filter_map(|l| l[mu].as_ref().map(|s| s.as_matrix().clone()))
            .collect();
        if gens.is_empty() || generate_algebra(&gens, KI_TOL)?.dimension() != b.m * b.m {
            maximal = false;
        }
    }
    Ok(KIChecks {
        projector_error,
        isometry_error,
        reconstruction_error,
        maximal,
    })
}

/// Block dimensions `(m, k)`, sorted, from an independent construction used
/// as a test oracle for `d <= 6`.
///
/// The algebra is grown by alternating closure and conjugation with
/// `rho_bar^{is}` at a few incommensurate times until its dimension is
/// stable; block shapes then come from the center and commutant:
/// `dim(Pi A Pi) = m^2` and `dim(Pi A' Pi) = k^2` for each minimal central
/// projector `Pi`.
pub fn ki_reference_block_dims(fam: &StateFamily) -> Result<Vec<(usize, usize)>> {
    let d = fam.dim();
    if d > MAX_REFERENCE_DIM {
        return Err(Error::SizeCap(format!(
            "reference oracle limited to d <= {MAX_REFERENCE_DIM}"
        )));
    }
    let rho_bar = fam.average();
    let (basis, lambdas) = support(&rho_bar)?;
    let r = lambdas.len();
    let mut gens = transition_operators(fam, &basis, &lambdas);
    gens.push(ComplexMatrix::identity(r));
    let times = [1.0, std::f64::consts::SQRT_2 * 2.3, std::f64::consts::PI * 0.731, 7.919];
    let flows: Vec<ComplexMatrix> = times
        .iter()
        .map(|&s| {
            ComplexMatrix::diag(
                &lambdas
                    .iter()
                    .map(|l| C64::from_polar(1.0, s * l.ln()))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let mut algebra: AlgebraBasis = generate_algebra(&gens, REFERENCE_CLOSURE_TOL)?;
    loop {
        let mut next_gens: Vec<ComplexMatrix> = algebra.elements().to_vec();
        for u in &flows {
            for b in algebra.elements() {
                next_gens.push(b.conjugate_by(u));
            }
        }
        let next = generate_algebra(&next_gens, REFERENCE_CLOSURE_TOL)?;
        if next.dimension() == algebra.dimension() {
            break;
        }
        algebra = next;
    }
    let elems = algebra.elements();
    let units: Vec<ComplexMatrix> = (0..r * r)
        .map(|idx| {
            let mut e = ComplexMatrix::zeros(r, r);
            e[(idx / r, idx % r)] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    let commutant = commuting_subspace(&units, elems, 1e-7)?;
    let center = commuting_subspace(elems, elems, 1e-7)?;

    let mut rng = rng_from_seed(0x0ac1e);
    let mut h = ComplexMatrix::zeros(r, r);
    for z in &center {
        h.add_scaled(z, complex_gaussian(&mut rng));
    }
    let h = h.hermitian_part();
    let eig = hermitian_eig(&h)?;
    let scale = eig.values.iter().map(|x| x.abs()).fold(1e-300, f64::max);
    let clusters = cluster_sorted(&eig.values, 1e-7 * scale);
    if clusters.len() != center.len() {
        return Err(Error::CenterDegenerate(0.0));
    }
    let mut dims = Vec::new();
    for c in &clusters {
        let u = ComplexMatrix::from_fn(r, c.len(), |i, j| eig.vectors[(i, c[j])]);
        let pi = u.matmul(&u.adjoint());
        let dim_a = compressed_rank(elems, &pi)?;
        let dim_c = compressed_rank(&commutant, &pi)?;
        let m = (dim_a as f64).sqrt().round() as usize;
        let k = (dim_c as f64).sqrt().round() as usize;
        if m * m != dim_a || k * k != dim_c || m * k != c.len() {
            return Err(Error::AssertionFailure(format!(
                "reference oracle found inconsistent block: dim A = {dim_a}, dim A' = {dim_c}, rank = {}",
                c.len()
            )));
        }
        dims.push((m, k));
    }
    dims.sort();
    Ok(dims)
}
