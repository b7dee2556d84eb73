//! States and the standard multipartite operations on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eig::{hermitian_eig, psd_sqrt, svd, trace_norm};
use crate::linalg::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::tol::TOL_STRUCT;

/// Hermitian, PSD, unit-trace matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates the density-matrix invariants at `TOL_STRUCT`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, TOL_STRUCT)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidState(format!(
                "{}x{} matrix is not square",
                m.rows(),
                m.cols()
            )));
        }
        let herm = m.hermiticity_error();
        if herm > tol {
            return Err(Error::NonHermitian(herm));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eig(&m)?.min();
        if min < -tol {
            return Err(Error::NotPsd(min));
        }
        Ok(Self(m.hermitian_part()))
    }

    /// Wraps a matrix already known to be a state (hermitized, not checked).
    pub fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    /// Hermitizes and rescales to unit trace, absorbing rounding drift from
    /// linear maps that are trace preserving in exact arithmetic.
    pub fn renormalized(m: ComplexMatrix) -> Self {
        let h = m.hermitian_part();
        let tr = h.trace().re;
        Self(h.scale_real(1.0 / tr))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    /// `|i><i|` in the computational basis.
    pub fn basis(d: usize, i: usize) -> Self {
        PureState::basis(d, i).to_density()
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn purity(&self) -> f64 {
        self.0.hs_inner(&self.0).re
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &Self, w: f64) -> Self {
        Self(&self.0.scale_real(w) + &other.0.scale_real(1.0 - w))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Unit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState(Vec<C64>);

impl PureState {
    pub fn new(v: Vec<C64>) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("vector norm {norm} is not 1")));
        }
        Ok(Self(v))
    }

    pub fn normalized(v: Vec<C64>) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self(v.into_iter().map(|z| z / norm).collect()))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![ZERO; d];
        v[i] = ONE;
        Self(v)
    }

    /// `(|0> + |1>)/sqrt(2)`.
    pub fn plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self(vec![C64::new(s, 0.0), C64::new(s, 0.0)])
    }

    pub fn vec(&self) -> &[C64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix(ComplexMatrix::outer(&self.0, &self.0))
    }

    /// `<psi| m |psi>`.
    pub fn expectation(&self, m: &ComplexMatrix) -> C64 {
        let mv = m.mul_vec(&self.0);
        self.0.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Standard Kronecker product, first factor slow-varying.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Kronecker product of a list of matrices.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1);
    for f in factors {
        out = out.kron(f);
    }
    out
}

/// Partial trace keeping the factors listed in `keep` (in increasing order of
/// factor index).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch(format!(
            "factor dimensions {dims:?} do not match a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if keep.is_empty() {
        return Err(Error::BadIndex {
            index: 0,
            n_factors: dims.len(),
        });
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || kept[k] {
            return Err(Error::BadIndex {
                index: k,
                n_factors: dims.len(),
            });
        }
        kept[k] = true;
    }
    // Row-major strides of the full index.
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let kept_factors: Vec<usize> = (0..dims.len()).filter(|&k| kept[k]).collect();
    let traced_factors: Vec<usize> = (0..dims.len()).filter(|&k| !kept[k]).collect();
    let offsets = |factors: &[usize]| -> Vec<usize> {
        let count: usize = factors.iter().map(|&k| dims[k]).product();
        (0..count)
            .map(|mut idx| {
                let mut off = 0;
                for &k in factors.iter().rev() {
                    off += (idx % dims[k]) * strides[k];
                    idx /= dims[k];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&kept_factors);
    let traced_off = offsets(&traced_factors);
    let dk = kept_off.len();
    Ok(ComplexMatrix::from_fn(dk, dk, |a, b| {
        traced_off.iter().map(|&t| m[(kept_off[a] + t, kept_off[b] + t)]).sum()
    }))
}

/// Uhlmann fidelity `||sqrt(a) sqrt(b)||_1`, clamped to `[0, 1]`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between {}- and {}-dimensional states",
            a.dim(),
            b.dim()
        )));
    }
    let sa = psd_sqrt(a.as_matrix())?;
    let sb = psd_sqrt(b.as_matrix())?;
    Ok(trace_norm(&sa.matmul(&sb))?.clamp(0.0, 1.0))
}

/// `1 - Fid(a, b)` without cancellation near 1, as half the squared
/// Bures distance `min_U ||sqrt(a) - sqrt(b) U||_2^2` at the polar unitary
/// of `sqrt(a) sqrt(b)`.
pub fn infidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "infidelity between {}- and {}-dimensional states",
            a.dim(),
            b.dim()
        )));
    }
    let sa = psd_sqrt(a.as_matrix())?;
    let sb = psd_sqrt(b.as_matrix())?;
    let dec = svd(&sa.matmul(&sb))?;
    let u = dec.v.matmul(&dec.u.adjoint());
    let diff = &sa - &sb.matmul(&u);
    Ok((0.5 * diff.frobenius_norm().powi(2)).clamp(0.0, 1.0))
}

/// `||a - b||_1 / 2`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between {}- and {}-dimensional states",
            a.dim(),
            b.dim()
        )));
    }
    Ok(0.5 * trace_norm(&(a.as_matrix() - b.as_matrix()))?)
}

/// `(1/sqrt(d)) sum_i |ii>`.
pub fn maximally_entangled_state(d: usize) -> PureState {
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        v[i * d + i] = amp;
    }
    PureState(v)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Index of `|i_{perm[0]} ... i_{perm[n-1]}>` given the index of `|i_0 ... i_{n-1}>`.
pub fn permute_index(index: usize, d: usize, perm: &[usize]) -> usize {
    let n = perm.len();
    let mut digits = vec![0usize; n];
    let mut x = index;
    for k in (0..n).rev() {
        digits[k] = x % d;
        x /= d;
    }
    perm.iter().fold(0, |acc, &p| acc * d + digits[p])
}

pub const SYM_MAX_COPIES: usize = 5;
pub const SYM_MAX_DIM: usize = 4096;

fn check_sym_size(d: usize, n: usize) -> Result<usize> {
    if n == 0 || d == 0 {
        return Err(Error::SizeCap("d and n must be positive".into()));
    }
    if n > SYM_MAX_COPIES {
        return Err(Error::SizeCap(format!("n = {n} exceeds {SYM_MAX_COPIES} copies")));
    }
    let total = d.checked_pow(n as u32).filter(|&t| t <= SYM_MAX_DIM);
    total.ok_or_else(|| Error::SizeCap(format!("{d}^{n} exceeds {SYM_MAX_DIM}")))
}

/// Projector onto the symmetric subspace of `n` copies of `C^d`, as the
/// average of all `n!` permutation operators.
pub fn symmetric_subspace_projector(d: usize, n: usize) -> Result<ComplexMatrix> {
    let total = check_sym_size(d, n)?;
    let perms = permutations(n);
    let w = 1.0 / perms.len() as f64;
    let mut pi = ComplexMatrix::zeros(total, total);
    for j in 0..total {
        for perm in &perms {
            pi[(permute_index(j, d, perm), j)] += w;
        }
    }
    Ok(pi)
}

/// `Pi_sym X Pi_sym` without forming `Pi_sym`: rows and columns are averaged
/// over the permutation group.
pub fn symmetrize(x: &ComplexMatrix, d: usize, n: usize) -> Result<ComplexMatrix> {
    let total = check_sym_size(d, n)?;
    if x.rows() != total || x.cols() != total {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on {n} copies of C^{d}",
            x.rows(),
            x.cols()
        )));
    }
    let perms = permutations(n);
    let tables: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| (0..total).map(|i| permute_index(i, d, p)).collect())
        .collect();
    let w = 1.0 / perms.len() as f64;
    let mut rows_avg = ComplexMatrix::zeros(total, total);
    for t in &tables {
        for i in 0..total {
            let src = t[i];
            for j in 0..total {
                rows_avg[(i, j)] += x[(src, j)] * w;
            }
        }
    }
    let mut out = ComplexMatrix::zeros(total, total);
    for t in &tables {
        for j in 0..total {
            let src = t[j];
            for i in 0..total {
                out[(i, j)] += rows_avg[(i, src)] * w;
            }
        }
    }
    Ok(out)
}

/// Number of states in the symmetric subspace, `binomial(d + n - 1, n)`.
pub fn symmetric_dimension(d: usize, n: usize) -> u64 {
    binomial((d + n - 1) as u64, n as u64)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_density_matrix, random_unitary, rng_from_seed};

    #[test]
    fn infidelity_matches_fidelity_away_from_one() {
        let mut rng = rng_from_seed(5);
        for d in 2..5 {
            for rank in 1..=d {
                let a = random_density_matrix(d, rank, &mut rng);
                let b = random_density_matrix(d, d, &mut rng);
                let direct = 1.0 - fidelity(&a, &b).unwrap();
                assert!((infidelity(&a, &b).unwrap() - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn infidelity_resolves_nearby_states() {
        let mut rng = rng_from_seed(6);
        let w = random_unitary(3, &mut rng);
        let p: [f64; 3] = [0.2, 0.3, 0.5];
        let eps = 1e-9;
        let q: [f64; 3] = [0.2 + eps, 0.3 - 3.0 * eps, 0.5 + 2.0 * eps];
        let rotate =
            |v: &[f64]| DensityMatrix::new(ComplexMatrix::diag_real(v).conjugate_by(&w).hermitian_part()).unwrap();
        let exact: f64 = 0.5
            * p.iter()
                .zip(&q)
                .map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2))
                .sum::<f64>();
        let got = infidelity(&rotate(&p), &rotate(&q)).unwrap();
        assert!((got - exact).abs() <= 1e-3 * exact, "{got:e} vs {exact:e}");
        assert!(infidelity(&rotate(&p), &rotate(&p)).unwrap() <= 1e-15);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diag_real(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diag_real(&[0.7, 0.3])).is_ok());
    }

    #[test]
    fn partial_trace_bell_state() {
        let bell = maximally_entangled_state(2).to_density();
        let r = partial_trace(bell.as_matrix(), &[2, 2], &[0]).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!((&r - &half).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_product_and_identity() {
        let mut rng = rng_from_seed(4);
        let rho = random_density_matrix(2, 2, &mut rng);
        let sigma = random_density_matrix(3, 2, &mut rng);
        let joint = tensor_product(rho.as_matrix(), sigma.as_matrix());
        let r = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!((&r - rho.as_matrix()).max_abs() < 1e-12);
        let s = partial_trace(&joint, &[2, 3], &[1]).unwrap();
        assert!((&s - sigma.as_matrix()).max_abs() < 1e-12);

        let id = partial_trace(&ComplexMatrix::identity(6), &[2, 3], &[1]).unwrap();
        assert_eq!(id, ComplexMatrix::identity(3).scale_real(2.0));
    }

    #[test]
    fn partial_trace_three_factors_middle() {
        let mut rng = rng_from_seed(8);
        let a = random_density_matrix(2, 2, &mut rng);
        let b = random_density_matrix(3, 3, &mut rng);
        let c = random_density_matrix(2, 1, &mut rng);
        let joint = tensor_all(&[a.as_matrix(), b.as_matrix(), c.as_matrix()]);
        let ac = partial_trace(&joint, &[2, 3, 2], &[0, 2]).unwrap();
        let expected = a.as_matrix().kron(c.as_matrix());
        assert!((&ac - &expected).max_abs() < 1e-12);
    }

    #[test]
    fn partial_trace_errors() {
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, &[2, 3], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(partial_trace(&m, &[2, 2], &[2]), Err(Error::BadIndex { .. })));
        assert!(matches!(partial_trace(&m, &[2, 2], &[]), Err(Error::BadIndex { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let zero = DensityMatrix::basis(2, 0);
        let plus = PureState::plus().to_density();
        let mixed = DensityMatrix::maximally_mixed(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((fidelity(&plus, &plus).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity(&zero, &plus).unwrap() - s).abs() < 1e-12);
        assert!((fidelity(&zero, &mixed).unwrap() - s).abs() < 1e-12);
        assert!(fidelity(&zero, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn fidelity_pure_state_formula() {
        let mut rng = rng_from_seed(21);
        for d in 2..5 {
            let psi = crate::linalg::random::random_pure_state(d, &mut rng);
            let b = random_density_matrix(d, d, &mut rng);
            let f = fidelity(&psi.to_density(), &b).unwrap();
            let expected = psi.expectation(b.as_matrix()).re.sqrt();
            assert!((f - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn maximally_entangled_marginals() {
        assert_eq!(maximally_entangled_state(1).vec(), &[ONE]);
        for d in 1..5 {
            let psi = maximally_entangled_state(d).to_density();
            let mixed = DensityMatrix::maximally_mixed(d);
            for keep in [0, 1] {
                let r = partial_trace(psi.as_matrix(), &[d, d], &[keep]).unwrap();
                assert!((&r - mixed.as_matrix()).max_abs() < 1e-12);
            }
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = maximally_entangled_state(2);
        assert!((v.vec()[0].re - s).abs() < 1e-15 && (v.vec()[3].re - s).abs() < 1e-15);
    }

    #[test]
    fn symmetric_projector_examples() {
        let p22 = symmetric_subspace_projector(2, 2).unwrap();
        assert!((p22.trace().re - 3.0).abs() < 1e-12);
        assert_eq!(symmetric_subspace_projector(3, 1).unwrap(), ComplexMatrix::identity(3));
        let p23 = symmetric_subspace_projector(2, 3).unwrap();
        assert!((p23.trace().re - 4.0).abs() < 1e-12);
        assert!((&p23.matmul(&p23) - &p23).max_abs() < 1e-12);
        assert!(matches!(symmetric_subspace_projector(2, 6), Err(Error::SizeCap(_))));
        assert!(matches!(symmetric_subspace_projector(17, 3), Err(Error::SizeCap(_))));
    }

    #[test]
    fn symmetric_projector_properties() {
        let mut rng = rng_from_seed(77);
        for (d, n) in [(2usize, 2usize), (2, 3), (3, 2), (2, 4), (3, 3)] {
            let p = symmetric_subspace_projector(d, n).unwrap();
            assert!((&p.matmul(&p) - &p).max_abs() < 1e-10);
            assert!(p.hermiticity_error() < 1e-12);
            assert!((p.trace().re - symmetric_dimension(d, n) as f64).abs() < 1e-10);
            for _ in 0..100 {
                let u = random_unitary(d, &mut rng);
                let un = tensor_all(&vec![&u; n]);
                assert!(p.commutator(&un).max_abs() < 1e-9);
            }
        }
    }

    #[test]
    fn symmetrize_matches_explicit_projector() {
        let mut rng = rng_from_seed(3);
        let x = crate::linalg::random::ginibre(8, 8, &mut rng);
        let p = symmetric_subspace_projector(2, 3).unwrap();
        let explicit = p.matmul(&x).matmul(&p);
        let fast = symmetrize(&x, 2, 3).unwrap();
        assert!((&explicit - &fast).max_abs() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 3), 4);
        assert_eq!(symmetric_dimension(2, 2), 3);
        assert_eq!(symmetric_dimension(3, 4), 15);
    }
}
