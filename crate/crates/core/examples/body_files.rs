//! Writes a solved body, its report and homotopy trace, then reads the body
//! back and checks it is bit-identical. Also drives the CLI in-process.

use gaussian_minkowski::cli::cli_main;
use gaussian_minkowski::geometry::{build_grid, Resolution};
use gaussian_minkowski::io::{read_body, write_body, write_report, write_trace_csv, DensitySpec};
use gaussian_minkowski::solver::{homotopy_solve, Branch, SolveConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("gmink-body-files");
    std::fs::create_dir_all(&dir)?;
    let grid = build_grid(2, Resolution::Circle { n: 128 })?;
    let f = DensitySpec::parse("cosine_even:c=0.04,a1=0.1")?.to_density(&grid)?;
    let rep = homotopy_solve(&f, 1.0, Branch::Large, &SolveConfig::default())?;
    write_body(&dir.join("body.json"), &rep.solution)?;
    write_report(&dir.join("report.json"), &rep)?;
    write_trace_csv(&dir.join("trace.csv"), &rep.homotopy_trace)?;
    let back = read_body(&dir.join("body.json"))?;
    println!("round trip bit-identical: {}", back.values() == rep.solution.values());
    println!("artifacts in {}", dir.display());

    let body = dir.join("body.json");
    let code = cli_main(["gmink", "volume", body.to_str().unwrap(), "--samples", "100000"]);
    println!("gmink volume exited with {code}");
    Ok(())
}
