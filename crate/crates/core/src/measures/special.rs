//! Scalar Gaussian functions: density φ, CDF Γ and its inverse, and the
//! incomplete radial moment g_n(ρ) = ∫₀^ρ e^{-r²/2} r^{n-1} dr.
//!
//! Γ goes through `libm::erfc`, a port of the musl/fdlibm rational
//! approximations (sub-ulp on the real line), so results do not depend on
//! the platform's libm.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result};

/// Standard normal density e^{-t²/2}/√(2π).
pub fn phi(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn gamma_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse of [`gamma_cdf`] on (0, 1): safeguarded Newton inside a
/// bisection bracket.
pub fn gamma_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!("gamma_inv needs y in (0,1), got {y}")));
    }
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    let mut x = 0.0;
    for _ in 0..200 {
        let fx = gamma_cdf(x) - y;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = phi(x);
        let newton = x - fx / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// g_n(ρ) = ∫₀^ρ e^{-r²/2} r^{n-1} dr for n ≥ 1.
///
/// g₁ = √(π/2) erf(ρ/√2), g₂ = 1 − e^{-ρ²/2},
/// g_n = (n−2) g_{n−2} − ρ^{n−2} e^{-ρ²/2}.
pub fn radial_moment(n: usize, rho: f64) -> f64 {
    assert!(n >= 1, "dimension must be at least 1");
    let e = (-0.5 * rho * rho).exp();
    let mut g = if n % 2 == 1 {
        (PI / 2.0).sqrt() * libm::erf(rho * FRAC_1_SQRT_2)
    } else {
        -libm::expm1(-0.5 * rho * rho)
    };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        k += 2;
        g = (k - 2) as f64 * g - rho.powi(k as i32 - 2) * e;
    }
    g
}

/// (1/√(2π))^p (n/2)^{1−p}: the L¹ mass below which a small-volume
/// solution is guaranteed, equal to the isoperimetric bound at γ = 1/2.
pub fn mass_threshold(n: usize, p: f64) -> f64 {
    (2.0 * PI).sqrt().powf(-p) * (n as f64 / 2.0).powf(1.0 - p)
}

/// Lower bound n·γ·(φ(Γ⁻¹(γ)) / (n·γ))^p on the total L_p-Gaussian surface
/// measure of a body with Gaussian volume γ.
pub fn isoperimetric_lower_bound(gamma: f64, n: usize, p: f64) -> Result<f64> {
    if p < 1.0 || !p.is_finite() {
        return Err(Error::Domain(format!("isoperimetric bound needs p >= 1, got {p}")));
    }
    if n < 1 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let ng = n as f64 * gamma;
    Ok(ng * (phi(gamma_inv(gamma)?) / ng).powf(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson quadrature, test oracle only.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
        let h = (b - a) / m as f64;
        let mut s = f(a) + f(b);
        for i in 1..m {
            let x = a + h * i as f64;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn phi_and_cdf_values() {
        assert!((phi(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(gamma_cdf(0.0), 0.5);
        assert_eq!(gamma_inv(0.5).unwrap(), 0.0);
        // Γ(1) by quadrature of the density
        let g1 = 0.5 + simpson(phi, 0.0, 1.0, 2000);
        assert!((gamma_cdf(1.0) - g1).abs() < 1e-13);
        assert!((gamma_cdf(gamma_inv(0.841344).unwrap()) - 0.841344).abs() < 1e-10);
        assert!((gamma_inv(g1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_inv_round_trip() {
        for k in 1..=99 {
            let y = k as f64 / 100.0;
            let x = gamma_inv(y).unwrap();
            assert!((gamma_cdf(x) - y).abs() < 1e-12, "y = {y}");
        }
        assert!(gamma_inv(0.0).is_err());
        assert!(gamma_inv(1.0).is_err());
        assert!(gamma_inv(f64::NAN).is_err());
    }

    #[test]
    fn radial_moment_matches_quadrature() {
        for n in 1..=5 {
            for rho in [0.1, 0.7, 1.5, 3.0] {
                let q = simpson(|r| (-0.5 * r * r).exp() * r.powi(n as i32 - 1), 0.0, rho, 4000);
                assert!((radial_moment(n, rho) - q).abs() < 1e-11, "n={n} rho={rho}");
            }
        }
    }

    #[test]
    fn isoperimetric_bound_examples() {
        let b = isoperimetric_lower_bound(0.5, 2, 1.0).unwrap();
        assert!((b - 0.398_942_3).abs() < 1e-7);
        assert!((b - mass_threshold(2, 1.0)).abs() < 1e-15);
        let b = isoperimetric_lower_bound(0.5, 3, 2.0).unwrap();
        assert!((b - 1.0 / (3.0 * PI)).abs() < 1e-12);
        for n in 2..6 {
            let g = 0.27;
            let b = isoperimetric_lower_bound(g, n, 1.0).unwrap();
            assert!((b - phi(gamma_inv(g).unwrap())).abs() < 1e-15);
        }
        assert!(isoperimetric_lower_bound(0.5, 2, 0.5).is_err());
        assert!(isoperimetric_lower_bound(1.5, 2, 1.0).is_err());
    }
}
