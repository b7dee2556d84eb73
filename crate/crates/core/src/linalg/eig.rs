//! Cyclic Jacobi eigen-solver for Hermitian matrices and the spectral
//! functions built on it (square roots, trace norm, pseudo-inverses).
//!
//! Singular values use the one-sided (Hestenes) Jacobi variant, which keeps
//! small singular values accurate to `eps * ||m||` instead of
//! `sqrt(eps) * ||m||` as forming `m^dagger m` would.

use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, C64, ZERO};
use crate::tol::{TOL_RANK, TOL_STRUCT};

const MAX_SWEEPS: usize = 200;

/// Eigen-decomposition `m = V diag(values) V^dagger`, values ascending.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    /// `V diag(f(values)) V^dagger`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for (k, &w) in fv.iter().enumerate() {
                if w != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * w;
                }
            }
            acc
        })
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Givens-type unitary acting on the `(p, q)` plane, stored as its four entries
/// `[[jpp, jpq], [jqp, jqq]]`.
#[derive(Clone, Copy)]
struct PlaneRotation {
    jpp: C64,
    jpq: C64,
    jqp: C64,
    jqq: C64,
}

impl PlaneRotation {
    /// Unitary diagonalizing the Hermitian 2x2 block `[[app, apq], [conj(apq), aqq]]`.
    fn diagonalizing(app: f64, aqq: f64, apq: C64) -> Self {
        let r = apq.norm();
        let phase = apq / r;
        let theta = (aqq - app) / (2.0 * r);
        let t = if theta == 0.0 {
            1.0
        } else {
            theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
        };
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        let phi = phase.conj();
        PlaneRotation {
            jpp: C64::new(c, 0.0),
            jpq: C64::new(s, 0.0),
            jqp: phi * (-s),
            jqq: phi * c,
        }
    }

    /// `m <- m J` restricted to columns `p` and `q`.
    fn apply_right(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.rows() {
            let mkp = m[(k, p)];
            let mkq = m[(k, q)];
            m[(k, p)] = mkp * self.jpp + mkq * self.jqp;
            m[(k, q)] = mkp * self.jpq + mkq * self.jqq;
        }
    }

    /// `m <- J^dagger m` restricted to rows `p` and `q`.
    fn apply_left_adjoint(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.cols() {
            let mpk = m[(p, k)];
            let mqk = m[(q, k)];
            m[(p, k)] = self.jpp.conj() * mpk + self.jqp.conj() * mqk;
            m[(q, k)] = self.jpq.conj() * mpk + self.jqq.conj() * mqk;
        }
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Eigenvalues are returned ascending. Degenerate eigenspaces get an
/// arbitrary orthonormal basis.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigen-decomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let herm_err = m.hermiticity_error();
    if herm_err > TOL_STRUCT * m.max_abs().max(1.0) {
        return Err(Error::NonHermitian(herm_err));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();
    let threshold = norm * f64::EPSILON * (n as f64).max(4.0);

    let mut converged = n <= 1 || norm == 0.0;
    let mut sweeps = 0;
    let mut prev_off = f64::INFINITY;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                what: "Jacobi eigen-solver",
                iterations: MAX_SWEEPS,
                residual: off_diagonal_norm(&a),
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Negligible against both diagonal entries: rounding noise.
                if sweeps > 3 && r <= f64::EPSILON * 0.5 * (app.abs().min(aqq.abs())) {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                let rot = PlaneRotation::diagonalizing(app, aqq, apq);
                rot.apply_right(&mut a, p, q);
                rot.apply_left_adjoint(&mut a, p, q);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                rot.apply_right(&mut v, p, q);
            }
        }
        let off = off_diagonal_norm(&a);
        // Rounding can leave a floor slightly above the threshold; stop once
        // the sweep no longer makes progress there.
        converged = off <= threshold || (off <= 1e3 * threshold && off > 0.5 * prev_off);
        prev_off = off;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

/// One-sided Jacobi orthogonalization: returns `(m v, v)` with `v` unitary
/// and the columns of `m v` mutually orthogonal.
fn orthogonalize_columns(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut a = m.clone();
    let n = a.cols();
    let rows = a.rows();
    let mut v = ComplexMatrix::identity(n);
    let col_dot =
        |a: &ComplexMatrix, p: usize, q: usize| -> C64 { (0..rows).map(|k| a[(k, p)].conj() * a[(k, q)]).sum() };
    let tiny = (f64::EPSILON * m.frobenius_norm()).powi(2);
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha = col_dot(&a, p, p).re;
                let beta = col_dot(&a, q, q).re;
                let gamma = col_dot(&a, p, q);
                let g = gamma.norm();
                if g <= tiny || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let rot = PlaneRotation::diagonalizing(alpha, beta, gamma);
                rot.apply_right(&mut a, p, q);
                rot.apply_right(&mut v, p, q);
            }
        }
        sweeps += 1;
        if !rotated {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                what: "one-sided Jacobi SVD",
                iterations: MAX_SWEEPS,
                residual: f64::NAN,
            });
        }
    }
    Ok((a, v))
}

fn column_norm(a: &ComplexMatrix, j: usize) -> f64 {
    (0..a.rows()).map(|k| a[(k, j)].norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values (descending) by one-sided Jacobi orthogonalization of the
/// columns.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let (a, _) = orthogonalize_columns(m)?;
    let mut sv: Vec<f64> = (0..a.cols()).map(|j| column_norm(&a, j)).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// `m = u diag(values) v^dagger` for square `m`, with `u` and `v` unitary.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Full singular value decomposition of a square matrix. Left vectors of
/// vanishing singular values are completed to a unitary.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "svd of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let (a, v) = orthogonalize_columns(m)?;
    let values: Vec<f64> = (0..n).map(|j| column_norm(&a, j)).collect();
    let cutoff = f64::EPSILON * values.iter().copied().fold(0.0, f64::max) * n as f64;
    let mut u = ComplexMatrix::zeros(n, n);
    let mut filled: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (j, &s) in values.iter().enumerate() {
        if s > cutoff {
            let col: Vec<C64> = a.column(j).iter().map(|x| x / s).collect();
            u.set_column(j, &col);
            filled.push(col);
        } else {
            missing.push(j);
        }
    }
    let mut candidate = 0;
    for j in missing {
        loop {
            let mut e = vec![ZERO; n];
            e[candidate % n] = C64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for f in &filled {
                    let ov: C64 = f.iter().zip(&e).map(|(x, y)| x.conj() * y).sum();
                    for (ek, fk) in e.iter_mut().zip(f) {
                        *ek -= ov * fk;
                    }
                }
            }
            let r = e.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if r > 0.5 {
                let col: Vec<C64> = e.iter().map(|x| x / r).collect();
                u.set_column(j, &col);
                filled.push(col);
                break;
            }
        }
    }
    Ok(Svd { u, values, v })
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Principal square root of a PSD matrix; eigenvalues below `TOL_RANK` are
/// clipped to zero first.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let floor = TOL_STRUCT * m.max_abs().max(1.0);
    if eig.min() < -floor {
        return Err(Error::NotPsd(eig.min()));
    }
    Ok(eig.apply(|x| if x < TOL_RANK { 0.0 } else { x.sqrt() }))
}

/// `m^{-1/2}` on the support of `m` (eigenvalues above `cutoff`), zero elsewhere.
pub fn psd_pinv_sqrt(m: &ComplexMatrix, cutoff: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    Ok(eig.apply(|x| if x > cutoff { 1.0 / x.sqrt() } else { 0.0 }))
}

/// Orthonormal basis (as columns) of the eigenspace of `m` with eigenvalues
/// above `cutoff`.
pub fn support_basis(m: &ComplexMatrix, cutoff: f64) -> Result<(ComplexMatrix, Vec<f64>)> {
    let eig = hermitian_eig(m)?;
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > cutoff).collect();
    let basis = ComplexMatrix::from_fn(m.rows(), keep.len(), |i, j| eig.vectors[(i, keep[j])]);
    Ok((basis, keep.iter().map(|&k| eig.values[k]).collect()))
}

/// Max deviation of `u^dagger u` from the identity.
pub fn unitarity_error(u: &ComplexMatrix) -> f64 {
    let g = u.adjoint().matmul(u);
    (&g - &ComplexMatrix::identity(g.rows())).max_abs()
}
