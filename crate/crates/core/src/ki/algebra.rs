//! Finite-dimensional *-algebras of matrices and their Wedderburn structure.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig;
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::linalg::random::{complex_gaussian, rng_from_seed, SimRng};

/// Largest matrix dimension accepted by [`generate_algebra`].
pub const MAX_ALGEBRA_DIM: usize = 64;

const GENERIC_ATTEMPTS: usize = 5;

/// Orthonormal (Hilbert-Schmidt) basis of a unital *-algebra of `d x d` matrices.
#[derive(Clone, Debug)]
pub struct AlgebraBasis {
    d: usize,
    elements: Vec<ComplexMatrix>,
}

impl AlgebraBasis {
    pub fn matrix_dim(&self) -> usize {
        self.d
    }

    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Distance of `m` from the span of the basis (Frobenius norm).
    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        let mut v = m.clone();
        project_out(&mut v, &self.elements);
        v.frobenius_norm()
    }

    /// Random element `sum_k c_k B_k` with standard complex Gaussian `c_k`.
    pub fn random_element(&self, rng: &mut SimRng) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.d, self.d);
        for b in &self.elements {
            acc.add_scaled(b, complex_gaussian(rng));
        }
        acc
    }
}

/// Removes the components of `v` along the orthonormal list `basis` (two
/// Gram-Schmidt passes).
pub(crate) fn project_out(v: &mut ComplexMatrix, basis: &[ComplexMatrix]) {
    for _ in 0..2 {
        for b in basis {
            let ov = b.hs_inner(v);
            v.add_scaled(b, -ov);
        }
    }
}

/// Orthonormal basis of `span(mats)`. Inputs with norm at most `tol` are
/// skipped; other directions are dropped when their residual falls below
/// `tol` relative to the input norm.
pub(crate) fn orthonormal_span(mats: &[ComplexMatrix], tol: f64) -> Vec<ComplexMatrix> {
    let mut out: Vec<ComplexMatrix> = Vec::new();
    for m in mats {
        let scale = m.frobenius_norm();
        if scale <= tol {
            continue;
        }
        let mut v = m.scale_real(1.0 / scale);
        project_out(&mut v, &out);
        let r = v.frobenius_norm();
        if r > tol {
            out.push(v.scale_real(1.0 / r));
        }
    }
    out
}

/// Smallest unital *-algebra containing `gens`.
///
/// Words in the generators and their adjoints are built by left
/// multiplication from the identity; a product is kept when its residual
/// against the current basis exceeds `tol` (generators are normalized first).
pub fn generate_algebra(gens: &[ComplexMatrix], tol: f64) -> Result<AlgebraBasis> {
    let d = match gens.first() {
        Some(g) => g.rows(),
        None => {
            return Err(Error::DimensionMismatch("no generators given".into()));
        }
    };
    for g in gens {
        if !g.is_square() || g.rows() != d {
            return Err(Error::DimensionMismatch(format!(
                "generator of shape {}x{} in a {d}-dimensional family",
                g.rows(),
                g.cols()
            )));
        }
        if !g.is_finite() {
            return Err(Error::NonFinite);
        }
    }
    if d > MAX_ALGEBRA_DIM {
        return Err(Error::SizeCap(format!(
            "matrix dimension {d} exceeds {MAX_ALGEBRA_DIM}"
        )));
    }
    let mut mults: Vec<ComplexMatrix> = Vec::new();
    for g in gens {
        let n = g.frobenius_norm();
        if n == 0.0 {
            continue;
        }
        let g = g.scale_real(1.0 / n);
        let adj = g.adjoint();
        let hermitian = (&adj - &g).max_abs() <= tol;
        mults.push(g);
        if !hermitian {
            mults.push(adj);
        }
    }
    let mut basis = vec![ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt())];
    let mut next = 0;
    while next < basis.len() {
        let b = basis[next].clone();
        for g in &mults {
            let mut v = g.matmul(&b);
            project_out(&mut v, &basis);
            let r = v.frobenius_norm();
            if r > tol {
                basis.push(v.scale_real(1.0 / r));
                if basis.len() > d * d {
                    return Err(Error::NoConvergence {
                        what: "algebra closure",
                        iterations: basis.len(),
                        residual: r,
                    });
                }
            }
        }
        next += 1;
    }
    Ok(AlgebraBasis { d, elements: basis })
}

/// Elements `sum_k c_k basis_k` commuting with every matrix in `tests`,
/// returned as an orthonormal list.
pub(crate) fn commuting_subspace(
    basis: &[ComplexMatrix],
    tests: &[ComplexMatrix],
    tol: f64,
) -> Result<Vec<ComplexMatrix>> {
    let n = basis.len();
    let comms: Vec<Vec<ComplexMatrix>> = basis
        .iter()
        .map(|b| tests.iter().map(|t| b.commutator(t)).collect())
        .collect();
    let gram = ComplexMatrix::from_fn(n, n, |k, l| {
        comms[k].iter().zip(&comms[l]).map(|(a, b)| a.hs_inner(b)).sum()
    });
    let eig = hermitian_eig(&gram.hermitian_part())?;
    let mut out = Vec::new();
    for (idx, &lambda) in eig.values.iter().enumerate() {
        if lambda.max(0.0).sqrt() > tol {
            continue;
        }
        let d = basis[0].rows();
        let mut z = ComplexMatrix::zeros(d, d);
        for (k, b) in basis.iter().enumerate() {
            z.add_scaled(b, eig.vectors[(k, idx)]);
        }
        out.push(z);
    }
    Ok(orthonormal_span(&out, 1e-8))
}

/// Groups ascending `values` into runs whose consecutive gaps are at most `gap`.
pub(crate) fn cluster_sorted(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if v - values[*c.last().unwrap()] <= gap => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

/// Smallest gap between consecutive clusters.
fn min_cluster_gap(values: &[f64], clusters: &[Vec<usize>]) -> f64 {
    clusters
        .windows(2)
        .map(|w| values[w[1][0]] - values[*w[0].last().unwrap()])
        .fold(f64::INFINITY, f64::min)
}

/// Random Hermitian element of `span(elements)`.
fn generic_hermitian(elements: &[ComplexMatrix], rng: &mut SimRng) -> ComplexMatrix {
    let d = elements[0].rows();
    let mut acc = ComplexMatrix::zeros(d, d);
    for e in elements {
        acc.add_scaled(e, complex_gaussian(rng));
    }
    acc.hermitian_part()
}

/// Eigenvectors of `h` split into clusters of nearly equal eigenvalues.
fn eigen_clusters(h: &ComplexMatrix) -> Result<(Vec<ComplexMatrix>, f64)> {
    let eig = hermitian_eig(h)?;
    let scale = eig.values.iter().map(|x| x.abs()).fold(1e-300, f64::max);
    let clusters = cluster_sorted(&eig.values, 1e-7 * scale);
    let gap = min_cluster_gap(&eig.values, &clusters) / scale;
    let n = h.rows();
    let spaces = clusters
        .iter()
        .map(|c| ComplexMatrix::from_fn(n, c.len(), |i, j| eig.vectors[(i, c[j])]))
        .collect();
    Ok((spaces, gap))
}

/// One simple summand `M_m x I_k` of a *-algebra.
#[derive(Clone, Debug, Serialize)]
pub struct WedderburnBlock {
    /// Central projector onto the block.
    pub projector: ComplexMatrix,
    /// Isometry `C^m x C^k -> C^d`, first factor slow-varying.
    pub isometry: ComplexMatrix,
    pub m: usize,
    pub k: usize,
    /// Worst `||V^dagger B V - b_L x I_k||_max` over the algebra basis.
    pub factor_residual: f64,
}

/// Deterministic generator for the random "generic" elements.
fn generic_rng(basis: &AlgebraBasis) -> SimRng {
    rng_from_seed(0x6b69_0000 ^ (basis.dimension() as u64) << 8 ^ basis.matrix_dim() as u64)
}

/// Splits a unital *-algebra into simple summands and factorizes each as
/// `M_m x I_k`.
pub fn wedderburn_decompose(basis: &AlgebraBasis, tol: f64) -> Result<Vec<WedderburnBlock>> {
    let elems = basis.elements();
    let mut rng = generic_rng(basis);

    // Closure spot check on random pairs.
    let n = elems.len();
    for _ in 0..20 {
        let a = &elems[rng.random_range(0..n)];
        let b = &elems[rng.random_range(0..n)];
        let worst = basis.residual(&a.matmul(b)).max(basis.residual(&a.adjoint()));
        if worst > 1e-6 {
            return Err(Error::PreconditionFailed(format!(
                "basis is not closed under products and adjoints (residual {worst:.3e})"
            )));
        }
    }

    // Three generic elements generate the algebra, so their commutant
    // within it is the center.
    let probes: Vec<ComplexMatrix> = (0..3).map(|_| basis.random_element(&mut rng)).collect();
    let center = commuting_subspace(elems, &probes, 1e-7)?;
    let c = center.len();

    let mut spaces = None;
    let mut last_gap = 0.0;
    for _ in 0..GENERIC_ATTEMPTS {
        let h = generic_hermitian(&center, &mut rng);
        let (s, gap) = eigen_clusters(&h)?;
        last_gap = gap;
        if s.len() == c && (c == 1 || gap > 10.0 * tol) {
            spaces = Some(s);
            break;
        }
    }
    let spaces = spaces.ok_or(Error::CenterDegenerate(last_gap))?;

    let mut blocks = Vec::with_capacity(c);
    for u in spaces {
        let nm = u.cols();
        let compressed: Vec<ComplexMatrix> = elems.iter().map(|b| b.compress(&u)).collect();
        let local = orthonormal_span(&compressed, 1e-8);
        let dim = local.len();
        let m = (dim as f64).sqrt().round() as usize;
        if m * m != dim || nm % m != 0 {
            return Err(Error::AssertionFailure(format!(
                "block of size {nm} carries a {dim}-dimensional algebra, not M_m x I_k"
            )));
        }
        let k = nm / m;
        let v_local = factorize_block(&local, m, k, &mut rng)?;
        let isometry = u.matmul(&v_local);
        let projector = u.matmul(&u.adjoint());
        let factor_residual = elems
            .iter()
            .map(|b| tensor_defect(&b.compress(&isometry), m, k))
            .fold(0.0, f64::max);
        blocks.push(WedderburnBlock {
            projector,
            isometry,
            m,
            k,
            factor_residual,
        });
    }
    Ok(blocks)
}

/// `||M - Tr_R(M)/k x I_k||_max` for `M` on `C^m x C^k`.
pub(crate) fn tensor_defect(m_op: &ComplexMatrix, m: usize, k: usize) -> f64 {
    let left = left_reduce(m_op, m, k).scale_real(1.0 / k as f64);
    (m_op - &left.kron(&ComplexMatrix::identity(k))).max_abs()
}

/// Partial trace over the second factor of `C^m x C^k`.
pub(crate) fn left_reduce(m_op: &ComplexMatrix, m: usize, k: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, m, |a, b| (0..k).map(|j| m_op[(a * k + j, b * k + j)]).sum())
}

/// Partial trace over the first factor of `C^m x C^k`.
pub(crate) fn right_reduce(m_op: &ComplexMatrix, m: usize, k: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(k, k, |i, j| (0..m).map(|a| m_op[(a * k + i, a * k + j)]).sum())
}

/// Isometry `C^m x C^k -> C^n` carrying the simple algebra spanned by `local`
/// (on `C^n`, `n = m k`) to `M_m x I_k`.
fn factorize_block(local: &[ComplexMatrix], m: usize, k: usize, rng: &mut SimRng) -> Result<ComplexMatrix> {
    let n = m * k;
    if m == 1 {
        return Ok(ComplexMatrix::identity(n));
    }
    let mut last_gap = 0.0;
    for _ in 0..GENERIC_ATTEMPTS {
        // A generic Hermitian element is h x I_k with simple h: m eigenspaces of
        // dimension k each.
        let a = generic_hermitian(local, rng);
        let (spaces, gap) = eigen_clusters(&a)?;
        last_gap = gap;
        if spaces.len() != m || spaces.iter().any(|s| s.cols() != k) {
            continue;
        }
        let mut x = ComplexMatrix::zeros(n, n);
        for e in local {
            x.add_scaled(e, complex_gaussian(rng));
        }
        let q1 = &spaces[0];
        let mut v = ComplexMatrix::zeros(n, n);
        let mut ok = true;
        for (a_idx, qa) in spaces.iter().enumerate() {
            let pa = qa.matmul(&qa.adjoint());
            let pax = pa.matmul(&x);
            let first = pax.mul_vec(&q1.column(0));
            let norm = first.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for j in 0..k {
                let col: Vec<C64> = pax.mul_vec(&q1.column(j)).iter().map(|z| z / norm).collect();
                v.set_column(a_idx * k + j, &col);
            }
        }
        if ok {
            return Ok(v);
        }
    }
    Err(Error::CenterDegenerate(last_gap))
}
