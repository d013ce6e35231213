//! Complex and quaternionic arithmetic, Ginibre sampling and the evolution law `M(t) = M₀ + t·S`.

mod evolution;
pub(crate) use evolution::complex_pair;
mod ginibre;
mod matrix;
mod quaternion;

pub use evolution::{
    deformation_matrix, evolve, evolve_2x2_cycle, evolve_2x2_cycle_with, reconstruct_matrix,
    reconstruct_matrix_with_cap, EvolutionLaw, DEFAULT_COND_CAP, DEFAULT_MAX_RATE,
};
pub use ginibre::{ginibre_standard, sample_ginibre, splitmix64};
pub use matrix::{ComplexMatrix, Lu, C64};
pub use quaternion::{quat_mul, Quaternion};
