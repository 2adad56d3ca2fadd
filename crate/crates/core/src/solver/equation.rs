//! Residual of the Monge–Ampère equation and its exact discrete Jacobian.
//!
//! F(h) = det(∇²h + hI) − (2π)^{n/2} e^{(|∇h|²+h²)/2} h^{p−1} f,
//! so h solves the L_p-Gaussian Minkowski equation iff F ≡ 0.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::geometry::{convexity_of, geometry_of, BodyGeometry, DiffOperators, SparseOp, SupportField};
use crate::measures::MeasureDensity;
use crate::{Error, Result};

fn check_same_grid(h: &SupportField, f: &MeasureDensity) -> Result<()> {
    if h.grid().same_as(f.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Measure term Mᵢ = (2π)^{n/2} e^{(|∇h|²+h²)/2} h^{p−1} fᵢ.
fn measure_term(h: &SupportField, geom: &BodyGeometry, f: &MeasureDensity) -> Vec<f64> {
    let scale = (2.0 * PI).powf(0.5 * h.dim() as f64);
    h.values()
        .iter()
        .zip(f.values())
        .enumerate()
        .map(|(i, (&hv, &fv))| {
            scale * (0.5 * (geom.gradient_norm_sq(i) + hv * hv)).exp() * hv.powf(h.p() - 1.0) * fv
        })
        .collect()
}

/// Per-node residual F(h).
pub fn residual(h: &SupportField, f: &MeasureDensity) -> Result<Vec<f64>> {
    check_same_grid(h, f)?;
    let geom = geometry_of(h.grid(), h.values());
    Ok(residual_from(h, &geom, f))
}

pub(crate) fn residual_from(h: &SupportField, geom: &BodyGeometry, f: &MeasureDensity) -> Vec<f64> {
    measure_term(h, geom, f)
        .into_iter()
        .zip(&geom.gauss_map_dets)
        .map(|(m, d)| d - m)
        .collect()
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Dense Jacobian ∂Fᵢ/∂hⱼ of the discrete residual.
///
/// The determinant is differentiated through its adjugate, with every
/// geometric quantity written as a linear stencil operator applied to h;
/// the exponential term contributes
/// −M·((h + (p−1)/h)δ + ∇h·∇δ).
pub fn assemble_jacobian(h: &SupportField, f: &MeasureDensity) -> Result<DMatrix<f64>> {
    check_same_grid(h, f)?;
    let geom = geometry_of(h.grid(), h.values());
    let report = convexity_of(&geom);
    if !report.is_convex {
        return Err(Error::NonConvex {
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    Ok(jacobian_from(h, &geom, f))
}

pub(crate) fn jacobian_from(h: &SupportField, geom: &BodyGeometry, f: &MeasureDensity) -> DMatrix<f64> {
    let grid = h.grid();
    let n = grid.len();
    let p = h.p();
    let m = measure_term(h, geom, f);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    let add = |jac: &mut DMatrix<f64>, op: &SparseOp, i: usize, coef: f64| {
        if coef != 0.0 {
            for (j, w) in op.row(i) {
                jac[(i, j)] += coef * w;
            }
        }
    };
    match &grid.ops {
        DiffOperators::Circle { d1, d2 } => {
            for i in 0..n {
                let hv = h.values()[i];
                let g = geom.gradient[i][0];
                add(&mut jac, d2, i, 1.0);
                add(&mut jac, d1, i, -m[i] * g);
                jac[(i, i)] += 1.0 - m[i] * (hv + (p - 1.0) / hv);
            }
        }
        DiffOperators::Sphere {
            dt,
            dp,
            dtt,
            dtp,
            dpp,
        } => {
            for i in 0..n {
                let hv = h.values()[i];
                let s = grid.sin_theta(i);
                let cot = grid.cot_theta(i);
                let [a, b, c] = geom.shifted_hessian[i];
                let [g_t, g_p] = geom.gradient[i];
                // d det = c dA_θθ + a dA_φφ − 2b dA_θφ with
                // dA_θθ = δ_θθ + δ, dA_φφ = δ_φφ/s² + cot δ_θ + δ,
                // dA_θφ = (δ_θφ − cot δ_φ)/s, and d|∇h|²/2 = g_θ δ_θ + g_φ δ_φ/s.
                add(&mut jac, dtt, i, c);
                add(&mut jac, dpp, i, a / (s * s));
                add(&mut jac, dt, i, a * cot - m[i] * g_t);
                add(&mut jac, dtp, i, -2.0 * b / s);
                add(&mut jac, dp, i, 2.0 * b * cot / s - m[i] * g_p / s);
                jac[(i, i)] += a + c - m[i] * (hv + (p - 1.0) / hv);
            }
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Resolution};
    use crate::isotropic::solve_constant_roots;

    #[test]
    fn constant_root_nearly_solves() {
        let grid = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
        let f = MeasureDensity::constant(grid.clone(), 0.04).unwrap();
        let h = SupportField::ball(grid.clone(), 0.2600, 1.0).unwrap();
        assert!(sup_norm(&residual(&h, &f).unwrap()) <= 1e-4);
        let r0 = solve_constant_roots(2, 1.0, 2.0 * PI * 0.04).unwrap()[0];
        let h = SupportField::ball(grid, r0, 1.0).unwrap();
        assert!(sup_norm(&residual(&h, &f).unwrap()) <= 1e-12);
    }

    #[test]
    fn residual_with_vanishing_density_is_det() {
        let grid = build_grid(3, Resolution::Sphere { n_lat: 8, n_lon: 16 }).unwrap();
        let f = MeasureDensity::constant(grid.clone(), 1e-300).unwrap();
        let h = SupportField::ball(grid, 1.5, 1.0).unwrap();
        assert!(residual(&h, &f).unwrap().iter().all(|v| (v - 2.25).abs() < 1e-10));
    }

    #[test]
    fn residual_linear_in_density() {
        let grid = build_grid(2, Resolution::Circle { n: 32 }).unwrap();
        let h = SupportField::from_fn(grid.clone(), 1.5, |u| 1.0 + 0.1 * u.x * u.x).unwrap();
        let f = MeasureDensity::from_fn(grid.clone(), |u| 0.05 + 0.01 * u.y * u.y).unwrap();
        let f2 = MeasureDensity::new(grid.clone(), f.values().iter().map(|v| 2.0 * v).collect()).unwrap();
        let r1 = residual(&h, &f).unwrap();
        let r2 = residual(&h, &f2).unwrap();
        let geom = geometry_of(&grid, h.values());
        let m = measure_term(&h, &geom, &f);
        for i in 0..grid.len() {
            assert!((r1[i] - r2[i] - m[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobian_rejects_non_convex() {
        let grid = build_grid(2, Resolution::Circle { n: 32 }).unwrap();
        let h = SupportField::from_fn(grid.clone(), 1.0, |u| 1.0 + 0.5 * (2.0 * u.y.atan2(u.x)).cos()).unwrap();
        let f = MeasureDensity::constant(grid, 0.04).unwrap();
        assert!(matches!(assemble_jacobian(&h, &f), Err(Error::NonConvex { .. })));
    }
}
