//! Gaussian volume, L_p-Gaussian surface area measures and the scalar
//! Gaussian functions behind the isoperimetric bound.

mod special;
mod surface;
mod volume;

pub use special::{gamma_cdf, gamma_inv, isoperimetric_lower_bound, mass_threshold, phi, radial_moment};
pub use surface::{
    surface_measure_density, surface_measure_total, surface_measure_total_radial, MeasureDensity,
};
pub use volume::{gaussian_volume, gaussian_volume_mc, McEstimate, MIN_MC_SAMPLES};
