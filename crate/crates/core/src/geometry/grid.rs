//! Quadrature grids on S¹ and S² together with their differentiation operators.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;

use super::stencil::{fornberg_weights, SparseOp};
use crate::{Error, Result};

/// Grid resolution parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    /// `n` uniformly spaced angles on S¹.
    Circle { n: usize },
    /// Gauss–Legendre colatitudes × uniform longitudes on S².
    Sphere { n_lat: usize, n_lon: usize },
}

impl Resolution {
    pub fn dim(&self) -> usize {
        match self {
            Resolution::Circle { .. } => 2,
            Resolution::Sphere { .. } => 3,
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            Resolution::Circle { n } => n,
            Resolution::Sphere { n_lat, n_lon } => n_lat * n_lon,
        }
    }

    /// `[n]` or `[n_lat, n_lon]`.
    pub fn to_vec(&self) -> Vec<usize> {
        match *self {
            Resolution::Circle { n } => vec![n],
            Resolution::Sphere { n_lat, n_lon } => vec![n_lat, n_lon],
        }
    }

    pub fn from_slice(dim: usize, parts: &[usize]) -> Result<Self> {
        match (dim, parts) {
            (2, &[n]) => Ok(Resolution::Circle { n }),
            (3, &[n_lat, n_lon]) => Ok(Resolution::Sphere { n_lat, n_lon }),
            _ => Err(Error::InvalidGrid(format!(
                "resolution {parts:?} does not fit dimension {dim}"
            ))),
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Resolution::Circle { n } => write!(f, "{n}"),
            Resolution::Sphere { n_lat, n_lon } => write!(f, "{n_lat}x{n_lon}"),
        }
    }
}

/// Discrete derivative operators matching the grid's node ordering.
#[derive(Debug, Clone)]
pub(crate) enum DiffOperators {
    /// Trigonometric differentiation matrices in the polar angle.
    Circle { d1: SparseOp, d2: SparseOp },
    /// Coordinate derivatives in (colatitude θ, longitude φ).
    Sphere {
        dt: SparseOp,
        dp: SparseOp,
        dtt: SparseOp,
        dtp: SparseOp,
        dpp: SparseOp,
    },
}

/// Quadrature nodes and weights on S^{n-1}, n ∈ {2, 3}.
///
/// Nodes are stored in R³ (with zero third component on S¹). The node set is
/// closed under `u ↦ -u` bit-for-bit; [`DirectionGrid::antipode`] gives the
/// index of the antipodal node.
#[derive(Debug, Clone)]
pub struct DirectionGrid {
    resolution: Resolution,
    nodes: Vec<Vector3<f64>>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
    /// Polar angle on S¹, colatitude on S².
    theta: Vec<f64>,
    /// Longitude on S² (zero on S¹).
    phi: Vec<f64>,
    /// Orthonormal tangent frame (e_θ, e_φ); e_φ is zero on S¹.
    frames: Vec<[Vector3<f64>; 2]>,
    sin_theta: Vec<f64>,
    cot_theta: Vec<f64>,
    /// Colatitude of each row (S² only).
    row_theta: Vec<f64>,
    pub(crate) ops: DiffOperators,
}

/// Builds the quadrature grid for S^{dim-1}.
pub fn build_grid(dim: usize, resolution: Resolution) -> Result<Arc<DirectionGrid>> {
    if dim != resolution.dim() {
        return Err(Error::InvalidGrid(format!(
            "dimension {dim} with resolution {resolution}"
        )));
    }
    let check = |name: &str, v: usize| {
        if v % 2 != 0 {
            Err(Error::InvalidGrid(format!("{name} = {v} must be even")))
        } else if v < 8 {
            Err(Error::InvalidGrid(format!("{name} = {v} must be at least 8")))
        } else {
            Ok(())
        }
    };
    match resolution {
        Resolution::Circle { n } => {
            check("N", n)?;
            Ok(Arc::new(circle_grid(n)))
        }
        Resolution::Sphere { n_lat, n_lon } => {
            check("N_lat", n_lat)?;
            check("N_lon", n_lon)?;
            Ok(Arc::new(sphere_grid(n_lat, n_lon)))
        }
    }
}

fn circle_grid(n: usize) -> DirectionGrid {
    let step = 2.0 * PI / n as f64;
    let half = n / 2;
    let mut nodes = vec![Vector3::zeros(); n];
    let mut frames = vec![[Vector3::zeros(); 2]; n];
    for j in 0..half {
        let t = step * j as f64;
        let (s, c) = t.sin_cos();
        nodes[j] = Vector3::new(c, s, 0.0);
        frames[j] = [Vector3::new(-s, c, 0.0), Vector3::zeros()];
        nodes[j + half] = -nodes[j];
        frames[j + half] = [-frames[j][0], Vector3::zeros()];
    }
    let theta = (0..n).map(|j| step * j as f64).collect();
    let antipode = (0..n).map(|j| (j + half) % n).collect();

    // periodic trigonometric differentiation (N even): both matrices are circulant
    let mut c1 = vec![0.0; n];
    let mut c2 = vec![0.0; n];
    c2[0] = -PI * PI / (3.0 * step * step) - 1.0 / 6.0;
    for (k, (a, b)) in c1.iter_mut().zip(c2.iter_mut()).enumerate().skip(1) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let half_angle = 0.5 * step * k as f64;
        *a = 0.5 * sign / half_angle.tan();
        *b = -0.5 * sign / half_angle.sin().powi(2);
    }
    let circulant = |c: &[f64]| {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| (j, c[(i + n - j) % n])).collect())
            .collect();
        SparseOp::from_rows(n, rows)
    };
    let ops = DiffOperators::Circle {
        d1: circulant(&c1),
        d2: circulant(&c2),
    };

    DirectionGrid {
        resolution: Resolution::Circle { n },
        nodes,
        weights: vec![step; n],
        antipode,
        theta,
        phi: vec![0.0; n],
        frames,
        sin_theta: vec![1.0; n],
        cot_theta: vec![0.0; n],
        row_theta: Vec::new(),
        ops,
    }
}

/// Gauss–Legendre nodes on [-1, 1] in decreasing order with their weights.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn sphere_grid(n_lat: usize, n_lon: usize) -> DirectionGrid {
    let (x, w) = gauss_legendre(n_lat);
    let dphi = 2.0 * PI / n_lon as f64;
    let half_lat = n_lat / 2;
    let half_lon = n_lon / 2;
    let count = n_lat * n_lon;
    let idx = |i: usize, j: usize| i * n_lon + j;

    let mut row_theta = vec![0.0; n_lat];
    for i in 0..half_lat {
        row_theta[i] = x[i].acos();
        row_theta[n_lat - 1 - i] = PI - row_theta[i];
    }

    let mut nodes = vec![Vector3::zeros(); count];
    let mut frames = vec![[Vector3::zeros(); 2]; count];
    let mut theta = vec![0.0; count];
    let mut phi = vec![0.0; count];
    let mut sin_theta = vec![0.0; count];
    let mut cot_theta = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let mut antipode = vec![0; count];
    for i in 0..half_lat {
        let t = row_theta[i];
        let (st, ct) = t.sin_cos();
        for j in 0..n_lon {
            let p = dphi * j as f64;
            let (sp, cp) = p.sin_cos();
            let k = idx(i, j);
            let ka = idx(n_lat - 1 - i, (j + half_lon) % n_lon);
            nodes[k] = Vector3::new(st * cp, st * sp, ct);
            frames[k] = [
                Vector3::new(ct * cp, ct * sp, -st),
                Vector3::new(-sp, cp, 0.0),
            ];
            nodes[ka] = -nodes[k];
            frames[ka] = [frames[k][0], -frames[k][1]];
            sin_theta[k] = st;
            sin_theta[ka] = st;
            cot_theta[k] = ct / st;
            cot_theta[ka] = -cot_theta[k];
            weights[k] = w[i] * dphi;
            weights[ka] = weights[k];
            antipode[k] = ka;
            antipode[ka] = k;
        }
    }
    for i in 0..n_lat {
        for j in 0..n_lon {
            theta[idx(i, j)] = row_theta[i];
            phi[idx(i, j)] = dphi * j as f64;
        }
    }

    // Colatitude stencils: five points, reflected through the poles onto the
    // meridian φ + π. Weights for the southern half mirror the northern half.
    let mut lat_w1 = vec![[0.0; 5]; n_lat];
    let mut lat_w2 = vec![[0.0; 5]; n_lat];
    for i in 0..half_lat {
        let ext: Vec<f64> = (-2..=2)
            .map(|d| extended_row(n_lat, &row_theta, i as isize + d).2)
            .collect();
        let wts = fornberg_weights(row_theta[i], &ext, 2);
        for s in 0..5 {
            lat_w1[i][s] = wts[1][s];
            lat_w2[i][s] = wts[2][s];
            lat_w1[n_lat - 1 - i][4 - s] = -wts[1][s];
            lat_w2[n_lat - 1 - i][4 - s] = wts[2][s];
        }
    }
    let lat_op = |weights: &[[f64; 5]]| {
        let rows = (0..count)
            .map(|k| {
                let (i, j) = (k / n_lon, k % n_lon);
                (0..5)
                    .map(|s| {
                        let (row, flip, _) = extended_row(n_lat, &row_theta, i as isize + s as isize - 2);
                        let col = if flip { (j + half_lon) % n_lon } else { j };
                        (idx(row, col), weights[i][s])
                    })
                    .collect()
            })
            .collect();
        SparseOp::from_rows(count, rows)
    };
    let dt = lat_op(&lat_w1);
    let dtt = lat_op(&lat_w2);

    let lon_w1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
    let lon_w2 = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
    let lon_op = |weights: &[f64; 5], scale: f64| {
        let rows = (0..count)
            .map(|k| {
                let (i, j) = (k / n_lon, k % n_lon);
                (0..5)
                    .filter(|&s| weights[s] != 0.0)
                    .map(|s| {
                        let col = (j + n_lon + s - 2) % n_lon;
                        (idx(i, col), weights[s] * scale)
                    })
                    .collect()
            })
            .collect();
        SparseOp::from_rows(count, rows)
    };
    let dp = lon_op(&lon_w1, 1.0 / dphi);
    let dpp = lon_op(&lon_w2, 1.0 / (dphi * dphi));
    let dtp = dt.compose(&dp);

    DirectionGrid {
        resolution: Resolution::Sphere { n_lat, n_lon },
        nodes,
        weights,
        antipode,
        theta,
        phi,
        frames,
        sin_theta,
        cot_theta,
        row_theta,
        ops: DiffOperators::Sphere {
            dt,
            dp,
            dtt,
            dtp,
            dpp,
        },
    }
}

/// Maps an extended colatitude row index (possibly beyond a pole) to
/// `(physical row, crosses pole, extended colatitude)`.
fn extended_row(n_lat: usize, row_theta: &[f64], e: isize) -> (usize, bool, f64) {
    let n = n_lat as isize;
    if e < 0 {
        let r = (-e - 1) as usize;
        (r, true, -row_theta[r])
    } else if e >= n {
        let r = (2 * n - 1 - e) as usize;
        (r, true, 2.0 * PI - row_theta[r])
    } else {
        (e as usize, false, row_theta[e as usize])
    }
}

impl DirectionGrid {
    pub fn dim(&self) -> usize {
        self.resolution.dim()
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Vector3<f64> {
        self.nodes[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn antipode(&self, i: usize) -> usize {
        self.antipode[i]
    }

    /// Polar angle (S¹) or colatitude (S²) of node `i`.
    pub fn theta(&self, i: usize) -> f64 {
        self.theta[i]
    }

    /// Longitude of node `i` (S² only; zero on S¹).
    pub fn phi(&self, i: usize) -> f64 {
        self.phi[i]
    }

    /// Orthonormal tangent frame at node `i`; the second vector is zero on S¹.
    pub fn frame(&self, i: usize) -> [Vector3<f64>; 2] {
        self.frames[i]
    }

    pub(crate) fn sin_theta(&self, i: usize) -> f64 {
        self.sin_theta[i]
    }

    pub(crate) fn cot_theta(&self, i: usize) -> f64 {
        self.cot_theta[i]
    }

    /// Total surface measure of the sphere: 2π or 4π.
    pub fn sphere_area(&self) -> f64 {
        match self.dim() {
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        }
    }

    /// Quadrature of sampled values: Σ wᵢ vᵢ.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub(crate) fn same_as(&self, other: &DirectionGrid) -> bool {
        std::ptr::eq(self, other) || self.resolution == other.resolution
    }

    /// Grid neighbours of node `i` (2 on S¹, 8 on S²). Neighbours across a
    /// pole are taken on the opposite meridian.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        match self.resolution {
            Resolution::Circle { n } => vec![(i + n - 1) % n, (i + 1) % n],
            Resolution::Sphere { n_lat, n_lon } => {
                let (r, c) = (i / n_lon, i % n_lon);
                let mut out = Vec::with_capacity(8);
                for dr in -1isize..=1 {
                    for dc in -1isize..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (row, flip, _) = extended_row(n_lat, &self.row_theta, r as isize + dr);
                        let mut col = (c as isize + dc).rem_euclid(n_lon as isize) as usize;
                        if flip {
                            col = (col + n_lon / 2) % n_lon;
                        }
                        let k = row * n_lon + col;
                        if k != i && !out.contains(&k) {
                            out.push(k);
                        }
                    }
                }
                out
            }
        }
    }

    /// A grid node close to direction `u` (not necessarily the closest).
    pub fn nearby_node(&self, u: &Vector3<f64>) -> usize {
        match self.resolution {
            Resolution::Circle { n } => {
                let t = u.y.atan2(u.x).rem_euclid(2.0 * PI);
                ((t / (2.0 * PI / n as f64)).round() as usize) % n
            }
            Resolution::Sphere { n_lat, n_lon } => {
                let norm = u.norm();
                let t = (u.z / norm).clamp(-1.0, 1.0).acos();
                let row = match self
                    .row_theta
                    .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
                {
                    Ok(r) => r,
                    Err(0) => 0,
                    Err(r) if r >= n_lat => n_lat - 1,
                    Err(r) => {
                        if t - self.row_theta[r - 1] < self.row_theta[r] - t {
                            r - 1
                        } else {
                            r
                        }
                    }
                };
                let p = u.y.atan2(u.x).rem_euclid(2.0 * PI);
                let col = ((p / (2.0 * PI / n_lon as f64)).round() as usize) % n_lon;
                row * n_lon + col
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_eight_nodes() {
        let g = build_grid(2, Resolution::Circle { n: 8 }).unwrap();
        assert_eq!(g.len(), 8);
        for (j, (u, w)) in g.nodes().iter().zip(g.weights()).enumerate() {
            let t = PI / 4.0 * j as f64;
            assert!((u.x - t.cos()).abs() < 1e-15 && (u.y - t.sin()).abs() < 1e-15);
            assert!((w - PI / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_sum_to_sphere_area() {
        let g = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
        assert!((g.weights().iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
        let g = build_grid(3, Resolution::Sphere { n_lat: 16, n_lon: 32 }).unwrap();
        assert!((g.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_resolutions() {
        assert!(build_grid(2, Resolution::Circle { n: 9 }).is_err());
        assert!(build_grid(2, Resolution::Circle { n: 6 }).is_err());
        assert!(build_grid(3, Resolution::Sphere { n_lat: 8, n_lon: 15 }).is_err());
        assert!(build_grid(4, Resolution::Circle { n: 8 }).is_err());
        assert!(build_grid(3, Resolution::Circle { n: 8 }).is_err());
    }

    #[test]
    fn grid_invariants() {
        for g in [
            build_grid(2, Resolution::Circle { n: 32 }).unwrap(),
            build_grid(3, Resolution::Sphere { n_lat: 12, n_lon: 24 }).unwrap(),
        ] {
            for i in 0..g.len() {
                let u = g.node(i);
                assert!((u.norm() - 1.0).abs() < 1e-12);
                assert!(g.weights()[i] > 0.0);
                let a = g.antipode(i);
                assert_eq!(g.node(a), -u);
                assert_eq!(g.antipode(a), i);
                let [e0, e1] = g.frame(i);
                assert!(e0.dot(&u).abs() < 1e-14);
                assert!(e1.dot(&u).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        for deg in 0..20 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "degree {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn sphere_neighbors_cross_pole() {
        let g = build_grid(3, Resolution::Sphere { n_lat: 8, n_lon: 16 }).unwrap();
        let nb = g.neighbors(0);
        assert_eq!(nb.len(), 8);
        // across the north pole lands on the opposite meridian of row 0
        assert!(nb.contains(&8));
        for k in nb {
            assert!(g.node(0).dot(&g.node(k)) > 0.8);
        }
    }
}
