//! L_p-Gaussian surface area measure of an ellipse-like body: the
//! Gauss-map density, its total by both integration routes, and the
//! Gaussian isoperimetric lower bound.

use gaussian_minkowski::geometry::{build_grid, Resolution, SupportField};
use gaussian_minkowski::measures::{
    gaussian_volume, isoperimetric_lower_bound, surface_measure_density, surface_measure_total,
    surface_measure_total_radial,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = build_grid(2, Resolution::Circle { n: 256 })?;
    for p in [1.0, 1.5, 2.0] {
        // support function of the ellipse with semi-axes 1.5 and 1
        let h = SupportField::from_fn(grid.clone(), p, |u| (2.25 * u.x * u.x + u.y * u.y).sqrt())?;
        let d = surface_measure_density(&h)?;
        let total = surface_measure_total(&d);
        let radial = surface_measure_total_radial(&h)?;
        let g = gaussian_volume(&h)?;
        let bound = isoperimetric_lower_bound(g, 2, p)?;
        println!(
            "p = {p}: density in [{:.5}, {:.5}], total {total:.8} (radial route {radial:.8}), gamma_2 = {g:.6}, bound {bound:.6}",
            d.values().iter().cloned().fold(f64::INFINITY, f64::min),
            d.values().iter().cloned().fold(0.0, f64::max),
        );
    }
    Ok(())
}
