//! Dense complex linear algebra and quantum-object primitives.

pub mod channel;
pub mod eig;
pub mod matrix;
pub mod quantum;
pub mod random;
pub mod system;

pub use channel::{apply_channel, induce_channel, Channel};
pub use eig::{hermitian_eig, psd_sqrt, singular_values, svd, trace_norm, HermitianEig, Svd};
pub use matrix::{ComplexMatrix, C64};
pub use quantum::{
    fidelity, infidelity, maximally_entangled_state, partial_trace, symmetric_subspace_projector, tensor_product,
    trace_distance, DensityMatrix, PureState,
};
pub use random::{random_density_matrix, rng_from_seed, SimRng};
pub use system::SystemSpec;
