//! Runs the property suites with small trial counts and prints the records.

use gaussian_minkowski::geometry::{build_grid, Resolution};
use gaussian_minkowski::verification::{
    check_isoperimetric_on, check_weak_convergence, probe_isotropic_constancy, random_even_body,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = build_grid(2, Resolution::Circle { n: 128 })?;
    let records = vec![
        check_isoperimetric_on(&grid, 20, 1.5, 1)?,
        check_weak_convergence(&random_even_body(&grid, 1.0, 3, 0.3)?, 24, 3)?,
        probe_isotropic_constancy(2, 1.0, 0.25, &(0..10).collect::<Vec<_>>())?,
    ];
    for rec in records {
        println!("{}", serde_json::to_string(&rec)?);
    }
    Ok(())
}
