use std::sync::Arc;

use nalgebra::Vector3;

use super::grid::{DiffOperators, DirectionGrid};
use crate::{Error, Result};

/// Sampled support function of a convex body, with its L_p parameter.
///
/// Positivity is enforced on construction. Convexity is not: Newton trial
/// iterates may leave the convex cone and are checked with
/// [`convexity_check`] instead.
#[derive(Debug, Clone)]
pub struct SupportField {
    grid: Arc<DirectionGrid>,
    values: Vec<f64>,
    p: f64,
}

impl SupportField {
    pub fn new(grid: Arc<DirectionGrid>, values: Vec<f64>, p: f64) -> Result<Self> {
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
                what: "support value",
                index,
                value,
            });
        }
        if !p.is_finite() {
            return Err(Error::Domain(format!("p = {p} is not finite")));
        }
        Ok(SupportField { grid, values, p })
    }

    /// Support function of the centred ball of radius `r`.
    pub fn ball(grid: Arc<DirectionGrid>, r: f64, p: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![r; n], p)
    }

    pub fn from_fn(grid: Arc<DirectionGrid>, p: f64, f: impl Fn(&Vector3<f64>) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(f).collect();
        Self::new(grid, values, p)
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `h(-u) == h(u)` bit-for-bit at every node.
    pub fn is_even(&self) -> bool {
        (0..self.values.len()).all(|i| self.values[i] == self.values[self.grid.antipode(i)])
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.p)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Derived differential data of a support field.
///
/// Tangent quantities are expressed in the grid's orthonormal frame
/// (e_θ, e_φ). On S¹ only the first gradient component and the first Hessian
/// entry are meaningful. Hessians are stored as `[θθ, θφ, φφ]`.
#[derive(Debug, Clone)]
pub struct BodyGeometry {
    pub dim: usize,
    pub gradient: Vec<[f64; 2]>,
    pub hessian: Vec<[f64; 3]>,
    /// ∇²h + hI.
    pub shifted_hessian: Vec<[f64; 3]>,
    /// x(v) = ∇h(v) + h(v) v.
    pub boundary_points: Vec<Vector3<f64>>,
    /// det(∇²h + hI).
    pub gauss_map_dets: Vec<f64>,
}

impl BodyGeometry {
    pub fn len(&self) -> usize {
        self.gradient.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gradient.is_empty()
    }

    pub fn gradient_norm_sq(&self, i: usize) -> f64 {
        let [a, b] = self.gradient[i];
        a * a + b * b
    }

    /// Eigenvalues of ∇²h + hI at node `i`, ascending.
    pub fn eigenvalues(&self, i: usize) -> Vec<f64> {
        let [a, b, c] = self.shifted_hessian[i];
        if self.dim == 2 {
            vec![a]
        } else {
            let mean = 0.5 * (a + c);
            let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            vec![mean - rad, mean + rad]
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        (0..self.len())
            .map(|i| self.eigenvalues(i)[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Raw coordinate derivatives on the grid.
pub(crate) struct Derivatives {
    /// S¹: h'. S²: h_θ.
    pub d1: Vec<f64>,
    /// S²: h_φ.
    pub dp: Vec<f64>,
    /// S¹: h''. S²: h_θθ.
    pub d2: Vec<f64>,
    pub dtp: Vec<f64>,
    pub dpp: Vec<f64>,
}

pub(crate) fn raw_derivatives(grid: &DirectionGrid, h: &[f64]) -> Derivatives {
    match &grid.ops {
        DiffOperators::Circle { d1, d2 } => Derivatives {
            d1: d1.apply(h),
            d2: d2.apply(h),
            dp: Vec::new(),
            dtp: Vec::new(),
            dpp: Vec::new(),
        },
        DiffOperators::Sphere {
            dt,
            dp,
            dtt,
            dtp,
            dpp,
        } => Derivatives {
            d1: dt.apply(h),
            dp: dp.apply(h),
            d2: dtt.apply(h),
            dtp: dtp.apply(h),
            dpp: dpp.apply(h),
        },
    }
}

/// Computes ∇h, the covariant Hessian ∇²h, boundary points and
/// det(∇²h + hI). Non-convex input yields non-positive determinants rather
/// than an error.
pub fn differentiate(h: &SupportField) -> BodyGeometry {
    geometry_of(h.grid(), h.values())
}

pub(crate) fn geometry_of(grid: &DirectionGrid, h: &[f64]) -> BodyGeometry {
    let n = grid.len();
    let d = raw_derivatives(grid, h);
    let mut gradient = Vec::with_capacity(n);
    let mut hessian = Vec::with_capacity(n);
    let mut shifted = Vec::with_capacity(n);
    let mut boundary = Vec::with_capacity(n);
    let mut dets = Vec::with_capacity(n);
    for i in 0..n {
        let [e_t, e_p] = grid.frame(i);
        let v = grid.node(i);
        if grid.dim() == 2 {
            let a = d.d2[i] + h[i];
            gradient.push([d.d1[i], 0.0]);
            hessian.push([d.d2[i], 0.0, 0.0]);
            shifted.push([a, 0.0, 0.0]);
            boundary.push(v * h[i] + e_t * d.d1[i]);
            dets.push(a);
        } else {
            let s = grid.sin_theta(i);
            let cot = grid.cot_theta(i);
            let g_t = d.d1[i];
            let g_p = d.dp[i] / s;
            let h_tt = d.d2[i];
            let h_tp = (d.dtp[i] - cot * d.dp[i]) / s;
            let h_pp = d.dpp[i] / (s * s) + cot * d.d1[i];
            let a = h_tt + h[i];
            let c = h_pp + h[i];
            gradient.push([g_t, g_p]);
            hessian.push([h_tt, h_tp, h_pp]);
            shifted.push([a, h_tp, c]);
            boundary.push(v * h[i] + e_t * g_t + e_p * g_p);
            dets.push(a * c - h_tp * h_tp);
        }
    }
    BodyGeometry {
        dim: grid.dim(),
        gradient,
        hessian,
        shifted_hessian: shifted,
        boundary_points: boundary,
        gauss_map_dets: dets,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    pub min_eigenvalue: f64,
    pub is_convex: bool,
}

/// Smallest eigenvalue of ∇²h + hI over all nodes.
pub fn convexity_check(h: &SupportField) -> ConvexityReport {
    convexity_of(&differentiate(h))
}

pub(crate) fn convexity_of(geom: &BodyGeometry) -> ConvexityReport {
    let min_eigenvalue = geom.min_eigenvalue();
    ConvexityReport {
        min_eigenvalue,
        is_convex: min_eigenvalue > 0.0,
    }
}

/// Sampled Hausdorff distance: maxᵢ |h₁ᵢ − h₂ᵢ|.
pub fn hausdorff_distance(h1: &SupportField, h2: &SupportField) -> Result<f64> {
    if !h1.grid().same_as(h2.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(h1
        .values()
        .iter()
        .zip(h2.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Replaces each antipodal pair by its mean.
pub fn symmetrize_even(values: &[f64], grid: &DirectionGrid) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            let j = grid.antipode(i);
            // order the pair so both nodes receive the bit-identical mean
            let (a, b) = if i < j { (values[i], values[j]) } else { (values[j], values[i]) };
            0.5 * (a + b)
        })
        .collect()
}
