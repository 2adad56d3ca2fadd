//! Newton iteration and homotopy continuation for the L_p-Gaussian
//! Minkowski equation on S¹ and S².

mod apriori;
mod equation;
mod homotopy;
mod newton;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::SupportField;

pub use apriori::{apriori_check, AprioriReport, Range};
pub use equation::{assemble_jacobian, residual, sup_norm};
pub use homotopy::{homotopy_solve, solve_both, BothBranches, HomotopyDensity, BRANCH_COLLAPSE_TOL};
pub use newton::newton_solve;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Sup-norm residual target.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub backtrack_factor: f64,
    pub min_step: f64,
    pub initial_dt: f64,
    pub min_dt: f64,
    /// Reject line-search trials whose ∇²h + hI is not positive definite.
    pub convexity_guard: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            newton_tol: 1e-10,
            max_newton_iters: 50,
            backtrack_factor: 0.5,
            min_step: 2f64.powi(-20),
            initial_dt: 0.1,
            min_dt: 1e-4,
            convexity_guard: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.newton_tol > 0.0
            && self.min_step > 0.0
            && self.initial_dt > 0.0
            && self.min_dt > 0.0
            && self.backtrack_factor > 0.0
            && self.backtrack_factor < 1.0
            && self.max_newton_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidInput(format!("invalid solver configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Small,
    Large,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Small => "small",
            Branch::Large => "large",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub gamma_n: f64,
    pub residual_sup: f64,
    pub newton_steps: usize,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: SupportField,
    pub branch: Branch,
    pub gamma_n: f64,
    pub residual_sup: f64,
    /// Sup-norm residual before each accepted Newton step and at the end,
    /// concatenated over all continuation steps.
    pub newton_history: Vec<f64>,
    pub homotopy_trace: Vec<TracePoint>,
    pub apriori: AprioriReport,
    /// Isotropic start level actually used (after any degeneracy shift).
    pub c0: Option<f64>,
    /// The γ_n trace crossed 1/2 somewhere along the path.
    pub crossed_half: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    LineSearchStall,
    IterationCap,
    ConvexityLost,
    SingularJacobian,
    InvalidStart,
    NoIsotropicStart,
    DegenerateStart,
    ContinuationCollapse,
}

/// Structured solver failure carrying the history up to the point of failure.
#[derive(Debug, Clone)]
pub struct SolveFailure {
    pub kind: FailureKind,
    pub message: String,
    pub newton_history: Vec<f64>,
    pub homotopy_trace: Vec<TracePoint>,
    /// Last successfully reached homotopy parameter.
    pub last_t: Option<f64>,
}

impl SolveFailure {
    pub(crate) fn new(kind: FailureKind, message: impl Into<String>) -> Self {
        SolveFailure {
            kind,
            message: message.into(),
            newton_history: Vec::new(),
            homotopy_trace: Vec::new(),
            last_t: None,
        }
    }
}

impl fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)?;
        if let Some(t) = self.last_t {
            write!(f, " (last t = {t})")?;
        }
        Ok(())
    }
}

impl std::error::Error for SolveFailure {}
