//! Constant solutions of r^{n-p} e^{-r^2/2} = C below, at and above the
//! threshold, and the linearised spectrum at each root.

use gaussian_minkowski::isotropic::{isotropic_report, linearized_spectrum};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, p) = (3, 1.0);
    for c in [0.5, 2.0 / std::f64::consts::E, 1.0] {
        let rep = isotropic_report(n, p, c)?;
        println!("C = {c:.6}: {} constant solution(s) {:?} (threshold {:.12})", rep.root_count, rep.roots, rep.threshold);
        for r0 in rep.roots {
            let s = linearized_spectrum(n, p, r0, 4)?;
            println!("  r0 = {r0:.6}: lambda_0..4 = {:.4?}, invertible = {}", s.eigenvalues, s.invertible);
        }
    }
    Ok(())
}
