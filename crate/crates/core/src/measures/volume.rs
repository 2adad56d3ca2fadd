use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::special::radial_moment;
use crate::geometry::{convexity_check, radial_samples, RadialLocator, SupportField};
use crate::{Error, Result};

/// Gaussian volume by the polar formula
/// γ_n(K) = (2π)^{-n/2} Σᵢ wᵢ g_n(ρ(uᵢ)).
pub fn gaussian_volume(h: &SupportField) -> Result<f64> {
    let report = convexity_check(h);
    if !report.is_convex {
        return Err(Error::NonConvex {
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    Ok(polar_volume(h, &radial_samples(h)?.iter().map(|s| s.rho).collect::<Vec<_>>()))
}

pub(crate) fn polar_volume(h: &SupportField, rho: &[f64]) -> f64 {
    let n = h.dim();
    let g: Vec<f64> = rho.iter().map(|&r| radial_moment(n, r)).collect();
    h.grid().integrate(&g) / (2.0 * PI).powf(0.5 * n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

pub const MIN_MC_SAMPLES: u64 = 10_000;
const CHUNK: u64 = 1 << 14;

/// Monte Carlo estimate of γ_n(K): the fraction of standard Gaussian points
/// x with max_v (x·v)/h(v) ≤ 1.
///
/// Sample `k` is drawn from ChaCha8 stream `k / 2^14` seeded with `seed`, so
/// the estimate does not depend on the number of worker threads.
pub fn gaussian_volume_mc(h: &SupportField, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::Domain(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    let n = h.dim();
    let locator = RadialLocator::new(h);
    let chunks = samples.div_ceil(CHUNK);
    let inside: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut hits = 0u64;
            for _ in 0..count {
                let mut x = Vector3::zeros();
                for k in 0..n {
                    x[k] = rng.sample(StandardNormal);
                }
                if contains(&locator, &x) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let frac = inside as f64 / samples as f64;
    Ok(McEstimate {
        value: frac,
        std_error: (frac * (1.0 - frac) / samples as f64).sqrt(),
        samples,
    })
}

fn contains(locator: &RadialLocator<'_>, x: &Vector3<f64>) -> bool {
    let r = x.norm();
    if r == 0.0 {
        return true;
    }
    // The discrete gauge underestimates the true one; refinement moves it by
    // far less than the 5% window.
    let (q, _) = locator.coarse_gauge(x);
    if q > 1.0 {
        return false;
    }
    if q < 0.95 {
        return true;
    }
    r <= locator.sample(&(x / r)).rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Resolution};

    #[test]
    fn disk_volume_closed_form() {
        let grid = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
        for r in [0.5, 1.177_41, 2.0] {
            let g = gaussian_volume(&SupportField::ball(grid.clone(), r, 1.0).unwrap()).unwrap();
            assert!((g - (1.0 - (-0.5 * r * r).exp())).abs() < 1e-12);
        }
        let g = gaussian_volume(&SupportField::ball(grid, 1.177_41, 1.0).unwrap()).unwrap();
        assert!((g - 0.5).abs() < 1e-6);
    }

    #[test]
    fn ball_volume_in_three_dimensions() {
        let grid = build_grid(3, Resolution::Sphere { n_lat: 16, n_lon: 32 }).unwrap();
        let g = gaussian_volume(&SupportField::ball(grid.clone(), 1.538, 1.0).unwrap()).unwrap();
        assert!((g - 0.5).abs() < 1e-3);
        let tiny = gaussian_volume(&SupportField::ball(grid, 1e-4, 1.0).unwrap()).unwrap();
        assert!(tiny < 1e-8 && tiny > 0.0);
    }

    #[test]
    fn rejects_non_convex() {
        let grid = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
        let h = SupportField::from_fn(grid, 1.0, |u| 1.0 + 0.5 * (2.0 * u.y.atan2(u.x)).cos()).unwrap();
        assert!(matches!(gaussian_volume(&h), Err(Error::NonConvex { .. })));
    }

    #[test]
    fn monte_carlo_is_deterministic_and_saturates() {
        let grid = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
        let h = SupportField::ball(grid.clone(), 1.177_41, 1.0).unwrap();
        let a = gaussian_volume_mc(&h, 50_000, 7).unwrap();
        let b = gaussian_volume_mc(&h, 50_000, 7).unwrap();
        assert_eq!(a, b);
        assert!((a.value - 0.5).abs() < 4.0 * a.std_error);
        let big = gaussian_volume_mc(&SupportField::ball(grid.clone(), 10.0, 1.0).unwrap(), 20_000, 1).unwrap();
        assert!((big.value - 1.0).abs() < 1e-6);
        assert!(gaussian_volume_mc(&h, 9_999, 1).is_err());
    }
}
