//! Lattice geometry, finitely supported sequences on `Z^n`, and `ℓ^p`
//! quasi-norms.

mod certified;
mod exponents;
mod grid;
mod norms;
mod point;

pub use certified::CertifiedValue;
pub use exponents::{
    exponent_serde, molecule_theta, moment_degree, potential_moment_order, ExponentConfig,
};
pub use grid::GridFunction;
pub use norms::{lp_norm, lp_norm_values, lp_power_sum, root, weighted_lp_norm, weighted_values};
pub(crate) use norms::reduce;
pub use point::{cube_points, norm, norm_inf, norm_sq, DiscreteCube, LatticePoint, Window};
