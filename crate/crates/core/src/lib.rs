//! Gaussian volumes and L_p-Gaussian surface area measures of o-symmetric
//! convex bodies in R² and R³, and a Newton/homotopy solver for the
//! L_p-Gaussian Minkowski equation
//!
//! ```text
//! (2π)^{-n/2} h^{1-p} e^{-(h² + |∇h|²)/2} det(∇²h + hI) = f     on S^{n-1}
//! ```
//!
//! that finds solutions on both the small (γ_n < 1/2) and the large
//! (γ_n > 1/2) volume branch.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`geometry`] | quadrature grids, support-function derivatives, radial conversion |
//! | [`measures`] | γ_n (quadrature and Monte Carlo), surface measure densities, φ/Γ/Γ⁻¹ |
//! | [`isotropic`] | constant solutions of the isotropic equation and the linearised spectrum |
//! | [`solver`] | residual, Jacobian, damped Newton, homotopy continuation |
//! | [`verification`] | random even bodies and the property suites |
//! | [`io`] | schema-versioned body/density/report files |
//! | [`cli`] | the `gmink` command-line driver |
//!
//! ```
//! use gaussian_minkowski::geometry::{build_grid, Resolution, SupportField};
//! use gaussian_minkowski::measures::gaussian_volume;
//!
//! let grid = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
//! let disk = SupportField::ball(grid, 1.0, 1.0).unwrap();
//! let g = gaussian_volume(&disk).unwrap();
//! assert!((g - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
//! ```

pub mod cli;
mod error;
pub mod geometry;
pub mod io;
pub mod isotropic;
pub mod measures;
pub mod solver;
pub mod verification;

pub use error::{Error, Result};
