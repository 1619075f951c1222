//! Approximation of shape-constrained functions: block means on monotone
//! pieces, linear interpolation of convex-concave pieces, and the
//! variation functionals that control their errors.

mod blocks;
mod index;
mod interp;
mod modulus;

pub use blocks::{
    block_mean_approx, mean_abs_deviation, piecewise_constant_approx, variation_on_design, BlockApprox,
    IntervalVariation, PiecewiseApprox, VariationReport,
};
pub use index::{
    linear_index, linear_index_of, variation_index, variation_index_from, variation_of_curve, LinearIndexReport,
    VariationIndexReport,
};
pub use interp::{interpolant_error_bounds, k_linear_interpolation, ChordBounds, InterpCertificate, InterpMode, Interpolant};
pub use modulus::{modulus_from_design, modulus_violation, psi_by_quadrature, Measure, Modulus, ModulusShape};
