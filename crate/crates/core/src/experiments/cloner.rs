//! Universal symmetric cloner `rho -> (d / d_sym) Pi_sym (rho x I^{n-1}) Pi_sym`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::quantum::{
    partial_trace, permutations, permute_index, symmetric_dimension, symmetrize, DensityMatrix,
};

/// Largest copy number for the explicit map.
pub const CLONER_MAX_COPIES: usize = 4;
/// Largest `d^n` for the explicit map.
pub const CLONER_MAX_DIM: usize = 1024;

/// `c_n = (d + n) / (n (d + 1))`.
pub fn cloner_shrinking_factor(d: usize, n: usize) -> f64 {
    (d + n) as f64 / (n * (d + 1)) as f64
}

/// Single-copy marginal `c_n rho + (1 - c_n) I / d`.
pub fn cloner_marginal_closed_form(rho: &DensityMatrix, n: usize) -> DensityMatrix {
    rho.mix(
        &DensityMatrix::maximally_mixed(rho.dim()),
        cloner_shrinking_factor(rho.dim(), n),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct ClonerReport {
    pub d: usize,
    pub n: usize,
    pub c_n: f64,
    /// Joint output on `n` copies.
    pub joint: DensityMatrix,
    pub trace_error: f64,
    /// Worst entry change of the output under a copy permutation.
    pub permutation_error: f64,
    /// Worst entry deviation of any single-copy marginal from the closed form.
    pub marginal_error: f64,
}

/// Runs the explicit cloner on `rho` and checks its output against the closed form.
pub fn universal_cloner(rho: &DensityMatrix, d: usize, n: usize) -> Result<ClonerReport> {
    if rho.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional state for d = {d}",
            rho.dim()
        )));
    }
    if n == 0 || n > CLONER_MAX_COPIES {
        return Err(Error::SizeCap(format!(
            "explicit cloner needs 1 <= n <= {CLONER_MAX_COPIES}, got {n}"
        )));
    }
    let total = d
        .checked_pow(n as u32)
        .filter(|&t| t <= CLONER_MAX_DIM)
        .ok_or_else(|| Error::SizeCap(format!("{d}^{n} exceeds {CLONER_MAX_DIM}")))?;
    let mut input = rho.as_matrix().clone();
    for _ in 1..n {
        input = input.kron(&ComplexMatrix::identity(d));
    }
    let scale = d as f64 / symmetric_dimension(d, n) as f64;
    let joint = symmetrize(&input, d, n)?.scale_real(scale).hermitian_part();

    let trace_error = (joint.trace().re - 1.0).abs();
    let mut permutation_error: f64 = 0.0;
    for perm in permutations(n) {
        let table: Vec<usize> = (0..total).map(|i| permute_index(i, d, &perm)).collect();
        for i in 0..total {
            for j in 0..total {
                permutation_error = permutation_error.max((joint[(table[i], table[j])] - joint[(i, j)]).norm());
            }
        }
    }
    let expected = cloner_marginal_closed_form(rho, n);
    let dims = vec![d; n];
    let mut marginal_error: f64 = 0.0;
    for k in 0..n {
        let m = partial_trace(&joint, &dims, &[k])?;
        marginal_error = marginal_error.max((&m - expected.as_matrix()).max_abs());
    }
    Ok(ClonerReport {
        d,
        n,
        c_n: cloner_shrinking_factor(d, n),
        joint: DensityMatrix::new_unchecked(joint),
        trace_error,
        permutation_error,
        marginal_error,
    })
}
