use serde::{Deserialize, Serialize};

use super::SolveReport;
use crate::geometry::differentiate;
use crate::measures::MeasureDensity;

/// Smallest eigenvalue of ∇²h + hI below which a solution is flagged.
pub const DEGENERACY_FLAG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Default for Range {
    fn default() -> Self {
        Range {
            min: f64::NAN,
            max: f64::NAN,
        }
    }
}

impl Range {
    fn of(values: impl IntoIterator<Item = f64>) -> Self {
        values.into_iter().fold(
            Range {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            },
            |r, v| Range {
                min: r.min.min(v),
                max: r.max.max(v),
            },
        )
    }

    fn positive_finite(&self) -> bool {
        self.min > 0.0 && self.max.is_finite()
    }
}

/// Bounds of a computed solution: h, |x(v)| = √(|∇h|² + h²) and the
/// eigenvalues of ∇²h + hI.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    pub support: Range,
    pub boundary_norm: Range,
    pub hessian_eigenvalues: Range,
    pub density: Range,
    pub all_positive_finite: bool,
    /// Smallest eigenvalue below [`DEGENERACY_FLAG`].
    pub near_degenerate: bool,
}

pub fn apriori_check(report: &SolveReport, f: &MeasureDensity) -> AprioriReport {
    let h = &report.solution;
    let geom = differentiate(h);
    let support = Range::of(h.values().iter().copied());
    let boundary_norm = Range::of((0..geom.len()).map(|i| (geom.gradient_norm_sq(i) + h.values()[i].powi(2)).sqrt()));
    let hessian_eigenvalues = Range::of((0..geom.len()).flat_map(|i| geom.eigenvalues(i)));
    let density = Range::of(f.values().iter().copied());
    AprioriReport {
        all_positive_finite: support.positive_finite()
            && boundary_norm.positive_finite()
            && hessian_eigenvalues.positive_finite(),
        near_degenerate: hessian_eigenvalues.min < DEGENERACY_FLAG,
        support,
        boundary_norm,
        hessian_eigenvalues,
        density,
    }
}
