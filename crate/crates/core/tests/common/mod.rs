#![allow(dead_code)]

use asym_core::linalg::channel::{choi_input_marginal, Channel};
use asym_core::linalg::eig::psd_pinv_sqrt;
use asym_core::linalg::random::{ginibre, random_density_matrix, random_unitary, SimRng};
use asym_core::linalg::{ComplexMatrix, DensityMatrix, SystemSpec};
use rand::Rng;

/// Generic (non-covariant) random channel from a Ginibre Choi operator.
pub fn random_channel(input: &SystemSpec, output: &SystemSpec, rng: &mut SimRng) -> Channel {
    let (d_in, d_out) = (input.dim(), output.dim());
    let g = ginibre(d_in * d_out, d_in * d_out, rng);
    let j0 = g.matmul(&g.adjoint()).hermitian_part();
    let x = choi_input_marginal(&j0, d_in, d_out).hermitian_part();
    let y = ComplexMatrix::identity(d_out).kron(&psd_pinv_sqrt(&x, 0.0).unwrap());
    Channel::new(input.clone(), output.clone(), y.matmul(&j0).matmul(&y).hermitian_part()).unwrap()
}

/// State of random rank.
pub fn random_state(d: usize, rng: &mut SimRng) -> DensityMatrix {
    let rank = rng.random_range(1..=d);
    random_density_matrix(d, rank, rng)
}

/// Integer spectrum in `0..=3`, computational or random eigenbasis.
pub fn random_system(d: usize, rotated: bool, rng: &mut SimRng) -> SystemSpec {
    let spectrum: Vec<i64> = (0..d).map(|_| rng.random_range(0i64..=3)).collect();
    if rotated {
        SystemSpec::new(spectrum, random_unitary(d, rng)).unwrap()
    } else {
        SystemSpec::from_diag(&spectrum)
    }
}
