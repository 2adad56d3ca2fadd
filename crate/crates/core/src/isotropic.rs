//! Constant solutions of the isotropic equation
//! h^{1−p} e^{-(|∇h|²+h²)/2} det(∇²h + hI) = C.
//!
//! For h ≡ r the left side is g(r) = r^{n−p} e^{-r²/2}, which increases on
//! (0, √(n−p)) and decreases afterwards. Everything here works with
//! ln g(r) = (n−p) ln r − r²/2 to stay finite for large r and tiny C.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tolerance for treating C as exactly the threshold.
pub const THRESHOLD_RTOL: f64 = 1e-12;

/// Absolute tolerance when testing (n−p) − r₀² against k(k+n−2).
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropicReport {
    pub n: usize,
    pub p: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub threshold: f64,
    pub root_count: usize,
    pub roots: Vec<f64>,
}

fn check_domain(n: usize, p: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
    }
    if !(p >= 1.0 && p < n as f64) {
        return Err(Error::Domain(format!("need 1 <= p < n, got p = {p}, n = {n}")));
    }
    Ok(())
}

/// e^{-(n−p)/2} (n−p)^{(n−p)/2}, the maximum of g attained at r* = √(n−p).
pub fn isotropic_threshold(n: usize, p: f64) -> Result<f64> {
    check_domain(n, p)?;
    let m = n as f64 - p;
    Ok((-0.5 * m).exp() * m.powf(0.5 * m))
}

/// Number of constant solutions: 2 below the threshold, 1 at it, 0 above.
pub fn count_constant_solutions(n: usize, p: f64, c: f64) -> Result<usize> {
    let threshold = isotropic_threshold(n, p)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("C = {c} must be positive")));
    }
    Ok(if (c - threshold).abs() <= THRESHOLD_RTOL * threshold {
        1
    } else if c < threshold {
        2
    } else {
        0
    })
}

/// Sorted constant roots of r^{n−p} e^{-r²/2} = C.
pub fn solve_constant_roots(n: usize, p: f64, c: f64) -> Result<Vec<f64>> {
    let count = count_constant_solutions(n, p, c)?;
    let m = n as f64 - p;
    let r_star = m.sqrt();
    match count {
        0 => Err(Error::NoConstantSolution {
            c,
            threshold: isotropic_threshold(n, p)?,
        }),
        1 => Ok(vec![r_star]),
        _ => {
            let ln_c = c.ln();
            let f = |r: f64| m * r.ln() - 0.5 * r * r - ln_c;
            let mut lo = r_star;
            while f(lo) >= 0.0 {
                lo *= 1e-3;
            }
            let small = bracketed_root(&f, m, lo, r_star);
            let mut hi = r_star + 1.0;
            while f(hi) >= 0.0 {
                hi *= 2.0;
            }
            let large = bracketed_root(&f, m, r_star, hi);
            Ok(vec![small, large])
        }
    }
}

/// Root of the log-form equation in a sign-changing bracket: bisection,
/// then Newton polish kept inside the bracket.
fn bracketed_root(f: &impl Fn(f64) -> f64, m: f64, mut a: f64, mut b: f64) -> f64 {
    let fa_neg = f(a) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if (f(mid) < 0.0) == fa_neg {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a) <= 1e-15 * b {
            break;
        }
    }
    let mut r = 0.5 * (a + b);
    for _ in 0..8 {
        let d = m / r - r;
        if d == 0.0 {
            break;
        }
        let next = r - f(r) / d;
        if !(next >= a && next <= b) {
            break;
        }
        r = next;
    }
    r
}

pub fn isotropic_report(n: usize, p: f64, c: f64) -> Result<IsotropicReport> {
    let threshold = isotropic_threshold(n, p)?;
    let root_count = count_constant_solutions(n, p, c)?;
    let roots = if root_count == 0 {
        Vec::new()
    } else {
        solve_constant_roots(n, p, c)?
    };
    Ok(IsotropicReport {
        n,
        p,
        c,
        threshold,
        root_count,
        roots,
    })
}

/// Eigenvalues λ_k = ((n−p) − r₀²) − k(k+n−2) of φ ↦ Δφ + ((n−p) − r₀²)φ on
/// the degree-k spherical harmonics.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// No λ_k vanishes for any k ≥ 0 (not only k ≤ k_max).
    pub invertible: bool,
}

pub fn linearized_spectrum(n: usize, p: f64, r0: f64, k_max: usize) -> Result<Spectrum> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::Domain(format!("r0 = {r0} must be positive")));
    }
    let shift = n as f64 - p - r0 * r0;
    let eigenvalues = (0..=k_max)
        .map(|k| shift - (k * (k + n - 2)) as f64)
        .collect();
    Ok(Spectrum {
        eigenvalues,
        invertible: degenerate_mode(n, p, r0).is_none(),
    })
}

/// The harmonic degree k with (n−p) − r₀² = k(k+n−2) (within
/// [`DEGENERACY_TOL`]), if any.
pub fn degenerate_mode(n: usize, p: f64, r0: f64) -> Option<usize> {
    let shift = n as f64 - p - r0 * r0;
    if shift < -DEGENERACY_TOL {
        return None;
    }
    let b = n as f64 - 2.0;
    let k = 0.5 * (-b + (b * b + 4.0 * shift.max(0.0)).sqrt());
    [k.floor(), k.ceil()]
        .into_iter()
        .map(|k| k as usize)
        .find(|&k| (shift - (k * (k + n - 2)) as f64).abs() <= DEGENERACY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, p: f64, r: f64) -> f64 {
        r.powf(n as f64 - p) * (-0.5 * r * r).exp()
    }

    /// Plain bisection on g(r) − C, test oracle.
    fn bisect(n: usize, p: f64, c: f64, mut a: f64, mut b: f64) -> f64 {
        let sa = g(n, p, a) - c > 0.0;
        for _ in 0..300 {
            let m = 0.5 * (a + b);
            if (g(n, p, m) - c > 0.0) == sa {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn thresholds() {
        let e = std::f64::consts::E;
        assert!((isotropic_threshold(3, 1.0).unwrap() - 2.0 / e).abs() < 1e-15);
        assert!((isotropic_threshold(2, 1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((isotropic_threshold(3, 2.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!(isotropic_threshold(2, 2.0).is_err());
        assert!(isotropic_threshold(3, 0.5).is_err());
    }

    #[test]
    fn trichotomy() {
        let e = std::f64::consts::E;
        assert_eq!(count_constant_solutions(3, 1.0, 0.5).unwrap(), 2);
        assert_eq!(count_constant_solutions(3, 1.0, 2.0 / e).unwrap(), 1);
        assert_eq!(count_constant_solutions(3, 1.0, 1.0).unwrap(), 0);
        assert!(matches!(solve_constant_roots(3, 1.0, 1.0), Err(Error::NoConstantSolution { .. })));
        let roots = solve_constant_roots(3, 1.0, 2.0 / e).unwrap();
        assert_eq!(roots, vec![2f64.sqrt()]);
    }

    #[test]
    fn roots_match_bisection_oracle() {
        let c = 0.251_327;
        let roots = solve_constant_roots(2, 1.0, c).unwrap();
        let small = bisect(2, 1.0, c, 1e-9, 1.0);
        let large = bisect(2, 1.0, c, 1.0, 10.0);
        assert!((roots[0] - small).abs() < 1e-13 && (roots[0] - 0.2600).abs() < 1e-4);
        assert!((roots[1] - large).abs() < 1e-13 && (roots[1] - 2.048_456).abs() < 1e-6);
        for r in &roots {
            assert!((g(2, 1.0, *r) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_right_hand_side() {
        let roots = solve_constant_roots(2, 1.0, 1e-8).unwrap();
        let large = bisect(2, 1.0, 1e-8, 1.0, 10.0);
        assert!((roots[0] - 1e-8).abs() < 1e-15);
        assert!((roots[1] - large).abs() < 1e-12);
        assert!((roots[1] - 6.367_397).abs() < 1e-6);
    }

    #[test]
    fn spectrum_examples() {
        let s = linearized_spectrum(2, 1.0, 0.26, 2).unwrap();
        let expect = [0.9324, -0.0676, -3.0676];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(s.invertible);
        let s = linearized_spectrum(2, 1.0, 1.0, 1).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, -1.0]);
        assert!(!s.invertible);
        let s = linearized_spectrum(3, 1.0, 2f64.sqrt(), 0).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-15 && !s.invertible);
        // n = 3, p = 1: r0 → 0 approaches the k = 1 level k(k+1) = 2
        assert_eq!(degenerate_mode(3, 1.0, 1e-9), Some(1));
        assert_eq!(degenerate_mode(3, 1.0, 0.5), None);
    }
}
