//! Koashi-Imoto structure of state families.

pub mod algebra;
pub mod checks;
pub mod decompose;

pub use algebra::{generate_algebra, wedderburn_decompose, AlgebraBasis, WedderburnBlock};
pub use checks::{ehrenfest_constancy_check, lemma4_reduced_form_check, orbit_family, ReducedFormReport};
pub use decompose::{ki_decompose, ki_reference_block_dims, KIBlock, KIChecks, KIDecomposition, StateFamily, KI_TOL};
