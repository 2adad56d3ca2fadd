use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::geometry::{convexity_of, differentiate, radial_samples, symmetrize_even, DirectionGrid, SupportField};
use crate::{Error, Result};

/// Sampled density f of a measure dμ = f dv on the sphere.
#[derive(Debug, Clone)]
pub struct MeasureDensity {
    grid: Arc<DirectionGrid>,
    values: Vec<f64>,
    l1_norm: f64,
}

impl MeasureDensity {
    pub fn new(grid: Arc<DirectionGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositive {
                what: "density value",
                index,
                value,
            });
        }
        let l1_norm = grid.integrate(&values);
        Ok(MeasureDensity { grid, values, l1_norm })
    }

    pub fn constant(grid: Arc<DirectionGrid>, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    pub fn from_fn(grid: Arc<DirectionGrid>, f: impl Fn(&Vector3<f64>) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Σᵢ wᵢ fᵢ.
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn mean(&self) -> f64 {
        self.l1_norm / self.grid.sphere_area()
    }

    /// ∫ g dμ by quadrature.
    pub fn integrate_with(&self, g: impl Fn(&Vector3<f64>) -> f64) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .zip(self.grid.weights())
            .map(|((u, f), w)| w * f * g(u))
            .sum()
    }

    /// Same density with antipodal pairs averaged.
    pub fn symmetrized(&self) -> Self {
        let values = symmetrize_even(&self.values, &self.grid);
        let l1_norm = self.grid.integrate(&values);
        MeasureDensity {
            grid: self.grid.clone(),
            values,
            l1_norm,
        }
    }

    pub fn is_even(&self) -> bool {
        (0..self.values.len()).all(|i| self.values[i] == self.values[self.grid.antipode(i)])
    }

    /// Pointwise (1−t)·c₀ + t·f.
    pub fn blend(&self, c0: f64, t: f64) -> Self {
        let values: Vec<f64> = self.values.iter().map(|f| (1.0 - t) * c0 + t * f).collect();
        let l1_norm = self.grid.integrate(&values);
        MeasureDensity {
            grid: self.grid.clone(),
            values,
            l1_norm,
        }
    }
}

fn gaussian_normalizer(n: usize) -> f64 {
    (2.0 * PI).powf(-0.5 * n as f64)
}

/// Density of S_{p,γ_n,K} against spherical Lebesgue measure:
/// (2π)^{-n/2} h^{1−p} e^{-(h²+|∇h|²)/2} det(∇²h + hI).
pub fn surface_measure_density(h: &SupportField) -> Result<MeasureDensity> {
    let geom = differentiate(h);
    let report = convexity_of(&geom);
    if !report.is_convex {
        return Err(Error::NonConvex {
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    let c = gaussian_normalizer(h.dim());
    let values = h
        .values()
        .iter()
        .enumerate()
        .map(|(i, &hv)| {
            c * hv.powf(1.0 - h.p()) * (-0.5 * (hv * hv + geom.gradient_norm_sq(i))).exp() * geom.gauss_map_dets[i]
        })
        .collect();
    MeasureDensity::new(h.grid().clone(), values)
}

/// Total mass Σᵢ wᵢ fᵢ.
pub fn surface_measure_total(d: &MeasureDensity) -> f64 {
    d.l1_norm()
}

/// Total mass of S_{p,γ_n,K} through the radial parametrisation of ∂K:
/// (2π)^{-n/2} Σᵢ wᵢ h(α)^{1−p} e^{-ρ²/2} ρ^{n−1} / (uᵢ·α), with ρ = ρ(uᵢ)
/// and α = α(uᵢ). Uses no derivatives of h; h(α) = ρ (u·α).
pub fn surface_measure_total_radial(h: &SupportField) -> Result<f64> {
    let report = crate::geometry::convexity_check(h);
    if !report.is_convex {
        return Err(Error::NonConvex {
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    let n = h.dim() as i32;
    let p = h.p();
    let samples = radial_samples(h)?;
    let integrand: Vec<f64> = h
        .grid()
        .nodes()
        .iter()
        .zip(&samples)
        .map(|(u, s)| {
            let cos = u.dot(&s.normal);
            let support = s.rho * cos;
            support.powf(1.0 - p) * (-0.5 * s.rho * s.rho).exp() * s.rho.powi(n - 1) / cos
        })
        .collect();
    Ok(gaussian_normalizer(h.dim()) * h.grid().integrate(&integrand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Resolution};

    #[test]
    fn disk_density_and_total() {
        let grid = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
        let d = surface_measure_density(&SupportField::ball(grid.clone(), 1.0, 1.0).unwrap()).unwrap();
        let expect = (-0.5f64).exp() / (2.0 * PI);
        assert!(d.values().iter().all(|v| (v - expect).abs() < 1e-12));
        assert!((expect - 0.09653).abs() < 1e-5);
        assert!((surface_measure_total(&d) - (-0.5f64).exp()).abs() < 1e-12);
        let radial = surface_measure_total_radial(&SupportField::ball(grid, 1.0, 1.0).unwrap()).unwrap();
        assert!((radial - 0.606_530_66).abs() < 1e-8);
    }

    #[test]
    fn sphere_density_p1() {
        let grid = build_grid(3, Resolution::Sphere { n_lat: 12, n_lon: 24 }).unwrap();
        let d = surface_measure_density(&SupportField::ball(grid, 2.0, 1.0).unwrap()).unwrap();
        let expect = 4.0 * (-2.0f64).exp() / (2.0 * PI).powf(1.5);
        assert!((expect - 0.03437).abs() < 1e-5);
        assert!(d.values().iter().all(|v| (v - expect).abs() < 1e-9));
    }

    #[test]
    fn p_changes_density_by_power_of_h() {
        let grid = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
        let vals: Vec<f64> = grid.nodes().iter().map(|u| 1.2 + 0.1 * (2.0 * u.y.atan2(u.x)).cos()).collect();
        let d1 = surface_measure_density(&SupportField::new(grid.clone(), vals.clone(), 1.0).unwrap()).unwrap();
        let d2 = surface_measure_density(&SupportField::new(grid, vals.clone(), 2.0).unwrap()).unwrap();
        for i in 0..vals.len() {
            assert!((d2.values()[i] - d1.values()[i] / vals[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_density_total() {
        let grid = build_grid(3, Resolution::Sphere { n_lat: 8, n_lon: 16 }).unwrap();
        let d = MeasureDensity::constant(grid, 0.3).unwrap();
        assert!((surface_measure_total(&d) - 0.3 * 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn balls_agree_between_routes() {
        for grid in [
            build_grid(2, Resolution::Circle { n: 32 }).unwrap(),
            build_grid(3, Resolution::Sphere { n_lat: 8, n_lon: 16 }).unwrap(),
        ] {
            for p in [1.0, 1.5, 2.0] {
                let h = SupportField::ball(grid.clone(), 0.8, p).unwrap();
                let a = surface_measure_total(&surface_measure_density(&h).unwrap());
                let b = surface_measure_total_radial(&h).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn routes_agree_on_perturbed_disk() {
        let grid = build_grid(2, Resolution::Circle { n: 256 }).unwrap();
        let h = SupportField::from_fn(grid, 1.0, |u| 1.0 + 0.1 * (2.0 * u.y.atan2(u.x)).cos()).unwrap();
        let a = surface_measure_total(&surface_measure_density(&h).unwrap());
        let b = surface_measure_total_radial(&h).unwrap();
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }
}
