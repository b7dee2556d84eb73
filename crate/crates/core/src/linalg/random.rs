//! Seeded random matrices.
//!
//! Every sampler takes the generator explicitly. The crate-wide generator is
//! ChaCha20 seeded through `SeedableRng::seed_from_u64`; complex Gaussians use
//! two independent `StandardNormal` draws (real part first) scaled by `1/sqrt(2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::linalg::quantum::{DensityMatrix, PureState};

pub type SimRng = ChaCha20Rng;

/// Identifier recorded in reports.
pub const GENERATOR_ID: &str = "chacha20/seed_from_u64 (rand_chacha 0.9)";

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Derives an independent stream for sub-task `index`.
pub fn split_rng(parent_seed: u64, index: u64) -> SimRng {
    let mut r = ChaCha20Rng::seed_from_u64(parent_seed);
    r.set_stream(index.wrapping_add(1));
    r
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of independent standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// GUE-distributed Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(n, n, rng).hermitian_part()
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase fix).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for u in &q {
                let ov: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= ov * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // R's diagonal ends up positive, which is the Haar-measure phase fix.
        for x in v.iter_mut() {
            *x /= norm;
        }
        q.push(v);
    }
    ComplexMatrix::from_columns(n, &q)
}

/// `G G^dagger / Tr(G G^dagger)` for a `d x rank` Ginibre matrix `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    assert!(rank >= 1 && rank <= d, "rank must lie in 1..=d");
    let g = ginibre(d, rank, rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new_unchecked(m.scale_real(1.0 / tr).hermitian_part())
}

pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    PureState::normalized(v).expect("a Gaussian vector is nonzero")
}
