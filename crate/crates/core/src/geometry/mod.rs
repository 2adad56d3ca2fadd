//! Spherical grids, support-function calculus and support/radial conversion.

mod field;
mod grid;
mod radial;
mod stencil;

pub use field::{
    convexity_check, differentiate, hausdorff_distance, symmetrize_even, BodyGeometry,
    ConvexityReport, SupportField,
};
pub(crate) use field::{convexity_of, geometry_of};
pub use grid::{build_grid, gauss_legendre, DirectionGrid, Resolution};
pub(crate) use grid::DiffOperators;
pub use radial::{radial_from_support, radial_sample, radial_samples, RadialLocator, RadialSample};
pub use stencil::{fornberg_weights, SparseOp};
