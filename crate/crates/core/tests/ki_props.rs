mod common;

use asym_core::ki::{
    ehrenfest_constancy_check, ki_decompose, ki_reference_block_dims, orbit_family, StateFamily, KI_TOL,
};
use asym_core::linalg::random::{random_unitary, SimRng};
use asym_core::linalg::{random_density_matrix, rng_from_seed, ComplexMatrix, DensityMatrix};
use common::random_system;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

struct Planted {
    family: StateFamily,
    dims: Vec<(usize, usize)>,
}

/// Family `U (sum_mu p_mu^x rho_L^{x,mu} x omega_mu) U^dagger` with random shapes, `d <= 6`.
fn planted_family(rng: &mut SimRng) -> Planted {
    let mut dims = Vec::new();
    let mut total = 0;
    let n_blocks = rng.random_range(1..=3);
    for _ in 0..n_blocks {
        let m = rng.random_range(1..=2);
        let k = rng.random_range(1..=2);
        if total + m * k <= 6 {
            dims.push((m, k));
            total += m * k;
        }
    }
    if dims.len() == 1 && dims[0].0 == 1 {
        dims[0].0 = 2;
        total = 2 * dims[0].1;
    }
    let omegas: Vec<DensityMatrix> = dims.iter().map(|&(_, k)| random_density_matrix(k, k, rng)).collect();
    let u = random_unitary(total, rng);
    let n_states = rng.random_range(3..=4);
    let states = (0..n_states)
        .map(|_| {
            let weights: Vec<f64> = dims.iter().map(|_| rng.random_range(0.2..1.0)).collect();
            let norm: f64 = weights.iter().sum();
            let mut m = ComplexMatrix::zeros(total, total);
            let mut off = 0;
            for ((&(bm, bk), omega), w) in dims.iter().zip(&omegas).zip(&weights) {
                let left = random_density_matrix(bm, bm, rng);
                let block = left.as_matrix().kron(omega.as_matrix()).scale_real(w / norm);
                for i in 0..bm * bk {
                    for j in 0..bm * bk {
                        m[(off + i, off + j)] = block[(i, j)];
                    }
                }
                off += bm * bk;
            }
            DensityMatrix::new(m.conjugate_by(&u).hermitian_part()).unwrap()
        })
        .collect();
    dims.sort();
    Planted {
        family: StateFamily::unlabeled(states).unwrap(),
        dims,
    }
}

fn sorted(mut v: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    v.sort();
    v
}

fn sorted_probs(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn planted_families_match_reference_and_reconstruct(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let p = planted_family(&mut rng);
        let dec = ki_decompose(&p.family, KI_TOL).unwrap();
        let reference = ki_reference_block_dims(&p.family).unwrap();
        prop_assert_eq!(sorted(dec.dims()), sorted(reference));
        prop_assert_eq!(sorted(dec.dims()), p.dims.clone());
        prop_assert!(dec.checks.passes(), "{:?}", dec.checks);
        prop_assert!(dec.checks.reconstruction_error <= 1e-7);
        for (x, probs) in dec.probs.iter().enumerate() {
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            let rec = dec.reconstruct(x);
            prop_assert!((&rec - p.family.states()[x].as_matrix()).max_abs() <= 1e-7);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn decomposition_is_permutation_invariant(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let p = planted_family(&mut rng);
        let dec = ki_decompose(&p.family, KI_TOL).unwrap();
        let mut order: Vec<usize> = (0..p.family.len()).collect();
        order.shuffle(&mut rng);
        let shuffled = StateFamily::unlabeled(order.iter().map(|&i| p.family.states()[i].clone()).collect()).unwrap();
        let dec2 = ki_decompose(&shuffled, KI_TOL).unwrap();
        prop_assert_eq!(sorted(dec.dims()), sorted(dec2.dims()));
        for (new_x, &old_x) in order.iter().enumerate() {
            let a = sorted_probs(&dec.probs[old_x]);
            let b = sorted_probs(&dec2.probs[new_x]);
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn decomposition_is_unitarily_equivariant(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let states: Vec<DensityMatrix> = (0..3).map(|_| random_density_matrix(3, 3, &mut rng)).collect();
        let w = random_unitary(3, &mut rng);
        let fam = StateFamily::unlabeled(states.clone()).unwrap();
        let rotated = StateFamily::unlabeled(
            states.iter().map(|s| DensityMatrix::new(s.as_matrix().conjugate_by(&w).hermitian_part()).unwrap()).collect(),
        )
        .unwrap();
        let dec = ki_decompose(&fam, KI_TOL).unwrap();
        let dec2 = ki_decompose(&rotated, KI_TOL).unwrap();
        prop_assert_eq!(sorted(dec.dims()), sorted(dec2.dims()));
        for b in &dec.blocks {
            let image = b.projector.conjugate_by(&w);
            let best = dec2
                .blocks
                .iter()
                .map(|b2| (&b2.projector - &image).max_abs())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(best <= 1e-7, "projector mismatch {best}");
        }
    }

    #[test]
    fn commuting_families_are_classical(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = rng_from_seed(seed);
        let v = random_unitary(d, &mut rng);
        let diags: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let w: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..1.0)).collect();
                let n: f64 = w.iter().sum();
                w.iter().map(|x| x / n).collect()
            })
            .collect();
        let states: Vec<DensityMatrix> = diags
            .iter()
            .map(|p| DensityMatrix::new(ComplexMatrix::diag_real(p).conjugate_by(&v).hermitian_part()).unwrap())
            .collect();
        let dec = ki_decompose(&StateFamily::unlabeled(states).unwrap(), KI_TOL).unwrap();
        prop_assert!(dec.blocks.iter().all(|b| b.m == 1));
        prop_assert_eq!(dec.blocks.len(), d);
        for (mu, b) in dec.blocks.iter().enumerate() {
            let local = b.projector.compress(&v);
            let i = (0..d).max_by(|&a, &c| local[(a, a)].re.total_cmp(&local[(c, c)].re)).unwrap();
            prop_assert!((local[(i, i)].re - 1.0).abs() <= 1e-8);
            for (x, p) in diags.iter().enumerate() {
                prop_assert!((dec.probs[x][mu] - p[i]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn orbit_block_weights_are_translation_invariant(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = rng_from_seed(seed);
        let sys = random_system(d, seed % 2 == 0, &mut rng);
        let rho = random_density_matrix(d, d, &mut rng);
        let fam = orbit_family(&rho, &sys, 4).unwrap();
        let dec = ki_decompose(&fam, KI_TOL).unwrap();
        prop_assert!(dec.checks.passes(), "{:?}", dec.checks);
        let grid: Vec<f64> = (0..16).map(|j| 2.0 * std::f64::consts::PI * j as f64 / 16.0 + 0.1).collect();
        let drift = ehrenfest_constancy_check(&dec, &rho, &sys, &grid).unwrap();
        prop_assert!(drift <= 1e-7, "drift {drift}");
    }
}
