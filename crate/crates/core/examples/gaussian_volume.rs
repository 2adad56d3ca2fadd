//! Gaussian volume by polar quadrature against closed forms and Monte Carlo.

use gaussian_minkowski::geometry::{build_grid, Resolution, SupportField};
use gaussian_minkowski::measures::{gaussian_volume, gaussian_volume_mc};
use gaussian_minkowski::verification::random_even_body;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let circle = build_grid(2, Resolution::Circle { n: 256 })?;
    for r in [0.5, 1.17741, 2.0] {
        let g = gaussian_volume(&SupportField::ball(circle.clone(), r, 1.0)?)?;
        println!("disk r = {r}: quadrature {g:.12}, exact {:.12}", 1.0 - (-r * r / 2.0f64).exp());
    }
    let sphere = build_grid(3, Resolution::Sphere { n_lat: 32, n_lon: 64 })?;
    for (name, grid) in [("S^1", &circle), ("S^2", &sphere)] {
        let h = random_even_body(grid, 1.0, 42, 0.3)?;
        let g = gaussian_volume(&h)?;
        let mc = gaussian_volume_mc(&h, 1_000_000, 7)?;
        println!(
            "random body on {name}: quadrature {g:.6}, Monte Carlo {:.6} +/- {:.1e}",
            mc.value, mc.std_error
        );
    }
    Ok(())
}
