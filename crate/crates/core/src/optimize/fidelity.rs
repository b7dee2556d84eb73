use crate::error::{Error, Result};
use crate::linalg::eig::{hermitian_eig, psd_sqrt, support_basis};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::quantum::DensityMatrix;
use crate::tol::{REGULARIZATION, TOL_RANK};

/// Largest condition number of `sqrt(rho) X sqrt(rho)` on the support of `rho`.
pub const MAX_FIDELITY_CONDITION: f64 = 1e14;

/// Fidelity `Tr sqrt(sqrt(rho) X sqrt(rho))` and its gradient in `X`.
///
/// `X` is shifted by `REGULARIZATION * I` when its smallest eigenvalue is
/// below that value; the returned flag reports whether this happened. With
/// `strict`, an ill-conditioned `sqrt(rho) X sqrt(rho)` is an error;
/// otherwise its inverse square root is taken on the eigenvalues above
/// `1 / MAX_FIDELITY_CONDITION` of the largest.
pub(crate) fn fidelity_and_gradient(
    rho: &ComplexMatrix,
    x: &ComplexMatrix,
    strict: bool,
) -> Result<(f64, ComplexMatrix, bool)> {
    let d = rho.rows();
    let mut x = x.hermitian_part();
    let regularized = hermitian_eig(&x)?.min() < REGULARIZATION;
    if regularized {
        x = &x + &ComplexMatrix::identity(d).scale_real(REGULARIZATION);
    }
    let sqrt_rho = psd_sqrt(rho)?;
    let (s, _) = support_basis(rho, TOL_RANK)?;
    let left = sqrt_rho.matmul(&s);
    let a = x.compress(&left).hermitian_part();
    let eig = hermitian_eig(&a)?;
    let (lo, hi) = (eig.min(), eig.max());
    let cutoff = hi / MAX_FIDELITY_CONDITION;
    if strict && (lo <= 0.0 || lo < cutoff) {
        return Err(Error::SingularTarget(if lo > 0.0 { hi / lo } else { f64::INFINITY }));
    }
    let fid: f64 = eig.values.iter().map(|v| v.max(0.0).sqrt()).sum();
    let inv = eig.apply(|v| if v > cutoff && v > 0.0 { 0.5 / v.sqrt() } else { 0.0 });
    let g = inv.conjugate_by(&left).hermitian_part();
    Ok((fid, g, regularized))
}

/// Hermitian `G` with `Fid(rho, X + delta) ≈ Fid(rho, X) + Tr(G delta)`:
/// `G = sqrt(rho) (sqrt(rho) X sqrt(rho))^{-1/2} sqrt(rho) / 2`.
pub fn fidelity_gradient(rho: &DensityMatrix, x: &DensityMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "gradient of fidelity between {}- and {}-dimensional states",
            rho.dim(),
            x.dim()
        )));
    }
    Ok(fidelity_and_gradient(rho.as_matrix(), x.as_matrix(), true)?.1)
}
