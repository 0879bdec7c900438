//! Regular discrete-time stochastic descriptor systems: representation,
//! quasi-Weierstrass decomposition, first-order-hold discretization and
//! simulation of the non-causal fast dynamics.

mod discretize;
mod simulate;
mod system;
mod weierstrass;

pub use discretize::{discretize_foh, foh_integrals, FohDiscretization};
pub use simulate::{sample_noise, sample_noise_from, simulate, NoiseRealization, PlantStepper, Trajectory, NOISE_RANK_REL};
pub use system::DescriptorSystem;
pub use weierstrass::{
    check_pencil_regularity, check_regularity, decompose_pencil, determinant_degree, weierstrass_decompose, PencilSplit,
    RegularityVerdict, WeierstrassForm, DEFAULT_DECOMPOSITION_TOL,
};
