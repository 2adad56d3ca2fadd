//! Isotropic and L^1 mass thresholds for the supported (n, p).

use gaussian_minkowski::isotropic::isotropic_threshold;
use gaussian_minkowski::measures::mass_threshold;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>2} {:>4} {:>12} {:>12}", "n", "p", "isotropic", "L1 mass");
    for n in [2, 3] {
        for p in [1.0, 1.5, 2.0] {
            let iso = isotropic_threshold(n, p).map_or("-".to_string(), |t| format!("{t:.6}"));
            println!("{n:>2} {p:>4} {iso:>12} {:>12.6}", mass_threshold(n, p));
        }
    }
    Ok(())
}
