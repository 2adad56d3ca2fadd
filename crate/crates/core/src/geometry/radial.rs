//! Support ↔ radial conversion: 1/ρ(u) = max_v (u·v)/h(v).

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use super::field::SupportField;
use super::grid::DirectionGrid;
use crate::{Error, Result};

/// Radial value ρ(u) together with the outer unit normal α(u) at ρ(u)u.
#[derive(Debug, Clone, Copy)]
pub struct RadialSample {
    pub rho: f64,
    pub normal: Vector3<f64>,
}

/// ρ(u) by discrete maximisation over the grid plus local quadratic
/// refinement around the maximising node.
pub fn radial_from_support(h: &SupportField, u: &Vector3<f64>) -> Result<f64> {
    radial_sample(h, u).map(|s| s.rho)
}

/// As [`radial_from_support`], also returning the normal α(u).
pub fn radial_sample(h: &SupportField, u: &Vector3<f64>) -> Result<RadialSample> {
    let grid = h.grid();
    let vals = h.values();
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in grid.nodes().iter().enumerate() {
        let dot = u.dot(v);
        if dot > 0.0 {
            let q = dot / vals[i];
            if best.is_none_or(|(_, b)| q > b) {
                best = Some((i, q));
            }
        }
    }
    let (i, _) = best.ok_or(Error::NoVisibleNode)?;
    Ok(refine(grid, vals, u, i))
}

/// ρ at every grid node.
pub fn radial_samples(h: &SupportField) -> Result<Vec<RadialSample>> {
    h.grid().nodes().iter().map(|u| radial_sample(h, u)).collect()
}

/// Radial lookup for arbitrary directions by hill climbing from a nearby
/// node. Valid for strictly convex fields, where (u·v)/h(v) has a single
/// local maximum on the hemisphere u·v > 0.
#[derive(Debug, Clone, Copy)]
pub struct RadialLocator<'a> {
    grid: &'a DirectionGrid,
    vals: &'a [f64],
}

impl<'a> RadialLocator<'a> {
    pub fn new(h: &'a SupportField) -> Self {
        RadialLocator {
            grid: h.grid(),
            vals: h.values(),
        }
    }

    /// Index of the discrete maximiser of (u·v)/h(v); `u` need not be unit.
    pub fn argmax(&self, u: &Vector3<f64>) -> usize {
        let score = |k: usize| u.dot(&self.grid.node(k)) / self.vals[k];
        let mut cur = self.grid.nearby_node(u);
        let mut cur_q = score(cur);
        loop {
            let mut moved = false;
            for k in self.grid.neighbors(cur) {
                let q = score(k);
                if q > cur_q {
                    cur = k;
                    cur_q = q;
                    moved = true;
                }
            }
            if !moved {
                return cur;
            }
        }
    }

    /// Discrete (unrefined) gauge max_v (x·v)/h(v) and its maximiser.
    pub fn coarse_gauge(&self, x: &Vector3<f64>) -> (f64, usize) {
        let k = self.argmax(x);
        (x.dot(&self.grid.node(k)) / self.vals[k], k)
    }

    pub fn sample(&self, u: &Vector3<f64>) -> RadialSample {
        let k = self.argmax(u);
        refine(self.grid, self.vals, u, k)
    }
}

/// Local refinement around node `i`: h is replaced by its quadratic fit over
/// the node and its neighbours in orthographic tangent coordinates x at the
/// node, and ln((u·v(x))/h(x)) is maximised by Newton's method with v(x) on
/// the sphere. Exact for balls.
fn refine(grid: &DirectionGrid, vals: &[f64], u: &Vector3<f64>, i: usize) -> RadialSample {
    let v0 = grid.node(i);
    let q0 = u.dot(&v0) / vals[i];
    let fallback = RadialSample {
        rho: 1.0 / q0,
        normal: v0,
    };
    let nb = grid.neighbors(i);
    let [e0, e1] = grid.frame(i);
    let u0 = u.dot(&v0);
    let (ua, ub) = (u.dot(&e0), u.dot(&e1));

    // h ≈ c0 + c1 a + c2 b + c3 a² + c4 ab + c5 b² in scaled coordinates a/s, b/s
    let mut reach: f64 = 0.0;
    for &k in &nb {
        let v = grid.node(k);
        reach = reach.max(v.dot(&e0).abs()).max(v.dot(&e1).abs());
    }
    if reach <= 0.0 {
        return fallback;
    }
    let coeffs = if grid.dim() == 2 {
        let mut m = Matrix3::zeros();
        let mut rhs = Vector3::zeros();
        for (row, k) in [i, nb[0], nb[1]].into_iter().enumerate() {
            let a = grid.node(k).dot(&e0) / reach;
            m.set_row(row, &Vector3::new(1.0, a, a * a).transpose());
            rhs[row] = vals[k];
        }
        let Some(c) = m.lu().solve(&rhs) else {
            return fallback;
        };
        Vector6::new(c[0], c[1], 0.0, c[2], 0.0, 0.0)
    } else {
        let mut ata = Matrix6::<f64>::zeros();
        let mut atb = Vector6::<f64>::zeros();
        for k in std::iter::once(i).chain(nb.iter().copied()) {
            let v = grid.node(k);
            let (a, b) = (v.dot(&e0) / reach, v.dot(&e1) / reach);
            let row = Vector6::new(1.0, a, b, a * a, a * b, b * b);
            ata += row * row.transpose();
            atb += row * vals[k];
        }
        let Some(c) = ata.lu().solve(&atb) else {
            return fallback;
        };
        c
    };
    let s = reach;
    let fit = |a: f64, b: f64| {
        let (y, z) = (a / s, b / s);
        let val = coeffs[0] + coeffs[1] * y + coeffs[2] * z + coeffs[3] * y * y + coeffs[4] * y * z + coeffs[5] * z * z;
        let grad = [
            (coeffs[1] + 2.0 * coeffs[3] * y + coeffs[4] * z) / s,
            (coeffs[2] + coeffs[4] * y + 2.0 * coeffs[5] * z) / s,
        ];
        let hess = [2.0 * coeffs[3] / (s * s), coeffs[4] / (s * s), 2.0 * coeffs[5] / (s * s)];
        (val, grad, hess)
    };
    let planar = grid.dim() == 2;

    let (mut a, mut b) = (0.0f64, 0.0f64);
    for _ in 0..12 {
        let c = (1.0 - a * a - b * b).sqrt();
        let num = u0 * c + ua * a + ub * b;
        let (hv, hg, hh) = fit(a, b);
        if !(num > 0.0 && hv > 0.0) {
            return fallback;
        }
        let c3 = c * c * c;
        let ng = [ua - u0 * a / c, ub - u0 * b / c];
        let nh = [-u0 * (1.0 / c + a * a / c3), -u0 * a * b / c3, -u0 * (1.0 / c + b * b / c3)];
        // gradient and Hessian of ln N − ln H
        let g = [ng[0] / num - hg[0] / hv, ng[1] / num - hg[1] / hv];
        let m = [
            nh[0] / num - ng[0] * ng[0] / (num * num) - hh[0] / hv + hg[0] * hg[0] / (hv * hv),
            nh[1] / num - ng[0] * ng[1] / (num * num) - hh[1] / hv + hg[0] * hg[1] / (hv * hv),
            nh[2] / num - ng[1] * ng[1] / (num * num) - hh[2] / hv + hg[1] * hg[1] / (hv * hv),
        ];
        let (da, db) = if planar {
            if m[0] >= 0.0 {
                return fallback;
            }
            (-g[0] / m[0], 0.0)
        } else {
            let det = m[0] * m[2] - m[1] * m[1];
            if !(m[0] < 0.0 && det > 0.0) {
                return fallback;
            }
            ((-g[0] * m[2] + g[1] * m[1]) / det, (-g[1] * m[0] + g[0] * m[1]) / det)
        };
        a += da;
        b += db;
        if a.abs() > 1.5 * reach || b.abs() > 1.5 * reach {
            return fallback;
        }
        if da.abs().max(db.abs()) < 1e-15 {
            break;
        }
    }
    let c = (1.0 - a * a - b * b).sqrt();
    let normal = v0 * c + e0 * a + e1 * b;
    let q = u.dot(&normal) / fit(a, b).0;
    if !(q.is_finite() && q >= q0) {
        return fallback;
    }
    RadialSample { rho: 1.0 / q, normal }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Resolution};

    #[test]
    fn ball_radial_equals_radius() {
        for grid in [
            build_grid(2, Resolution::Circle { n: 64 }).unwrap(),
            build_grid(3, Resolution::Sphere { n_lat: 16, n_lon: 32 }).unwrap(),
        ] {
            let h = SupportField::ball(grid.clone(), 1.3, 1.0).unwrap();
            for u in [Vector3::new(0.6, 0.8, 0.0), Vector3::new(0.0, 0.6, 0.8).normalize()] {
                let u = if grid.dim() == 2 { Vector3::new(u.x, u.y, 0.0).normalize() } else { u };
                assert!((radial_from_support(&h, &u).unwrap() - 1.3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_is_even_for_even_bodies() {
        let grid = build_grid(2, Resolution::Circle { n: 128 }).unwrap();
        let h = SupportField::from_fn(grid, 1.0, |u| 1.0 + 0.1 * (2.0 * u.y.atan2(u.x)).cos()).unwrap();
        let u = Vector3::new(0.3, 0.7, 0.0).normalize();
        let a = radial_from_support(&h, &u).unwrap();
        let b = radial_from_support(&h, &(-u)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn locator_agrees_with_full_scan() {
        let grid = build_grid(3, Resolution::Sphere { n_lat: 16, n_lon: 32 }).unwrap();
        let h = SupportField::from_fn(grid.clone(), 1.0, |u| 1.0 + 0.15 * u.z * u.z - 0.1 * u.x * u.y).unwrap();
        let loc = RadialLocator::new(&h);
        for k in 0..200 {
            let t = k as f64 * 0.731;
            let u = Vector3::new(t.sin() * (3.0 * t).cos(), t.sin() * (3.0 * t).sin(), t.cos()).normalize();
            let a = radial_from_support(&h, &u).unwrap();
            let b = loc.sample(&u).rho;
            assert_eq!(a, b, "direction {u:?}");
        }
    }
}
