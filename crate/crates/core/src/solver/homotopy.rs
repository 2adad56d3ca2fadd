use std::f64::consts::PI;

use log::{info, warn};

use super::newton::{even_density, finish, newton_iterate};
use super::{Branch, FailureKind, SolveConfig, SolveFailure, SolveReport, TracePoint};
use crate::geometry::{hausdorff_distance, SupportField};
use crate::isotropic::{degenerate_mode, solve_constant_roots};
use crate::measures::{gaussian_volume, mass_threshold, MeasureDensity};

/// f_t = (1−t)·c₀ + t·f.
#[derive(Debug, Clone)]
pub struct HomotopyDensity {
    pub c0: f64,
    pub f_target: MeasureDensity,
    pub t: f64,
}

impl HomotopyDensity {
    pub fn sample(&self) -> MeasureDensity {
        self.f_target.blend(self.c0, self.t)
    }
}

/// Multiplicative shifts tried on c₀ when the linearisation at the
/// isotropic root is singular.
const C0_SHIFTS: [f64; 3] = [1.0, 1.01, 0.99];

/// Picks the isotropic start (c₀, r₀) for `branch`.
fn isotropic_start(n: usize, p: f64, mean: f64, branch: Branch) -> Result<(f64, f64), SolveFailure> {
    let scale = (2.0 * PI).powf(0.5 * n as f64);
    for shift in C0_SHIFTS {
        let c0 = mean * shift;
        let roots = solve_constant_roots(n, p, scale * c0)
            .map_err(|e| SolveFailure::new(FailureKind::NoIsotropicStart, e.to_string()))?;
        if roots.len() < 2 {
            return Err(SolveFailure::new(
                FailureKind::NoIsotropicStart,
                format!("isotropic equation at c0 = {c0} has a single constant solution"),
            ));
        }
        let r0 = match branch {
            Branch::Small => roots[0],
            Branch::Large => roots[1],
        };
        match degenerate_mode(n, p, r0) {
            None => return Ok((c0, r0)),
            Some(k) => warn!("linearisation singular on degree {k} harmonics at c0 = {c0}; shifting c0"),
        }
    }
    Err(SolveFailure::new(
        FailureKind::DegenerateStart,
        format!("no invertible isotropic start near c0 = {mean}"),
    ))
}

/// Continues from the constant solution of f ≡ c₀ (c₀ = mean of f) on the
/// requested branch to a solution for f, with adaptive steps in t.
pub fn homotopy_solve(
    f: &MeasureDensity,
    p: f64,
    branch: Branch,
    cfg: &SolveConfig,
) -> Result<SolveReport, SolveFailure> {
    cfg.validate()
        .map_err(|e| SolveFailure::new(FailureKind::InvalidStart, e.to_string()))?;
    let f = even_density(f)?;
    let grid = f.grid().clone();
    let n = grid.dim();
    let threshold = mass_threshold(n, p);
    if f.l1_norm() >= threshold {
        warn!(
            "|f|_L1 = {:.6} is not below the small-volume threshold {threshold:.6}; proceeding",
            f.l1_norm()
        );
    }
    let (c0, r0) = isotropic_start(n, p, f.mean(), branch)?;
    info!("{branch} branch: c0 = {c0:.6e}, r0 = {r0:.12}");

    let mut path = HomotopyDensity {
        c0,
        f_target: f.clone(),
        t: 0.0,
    };
    let fail_with = |mut e: SolveFailure, history: &[f64], trace: &[TracePoint], t: Option<f64>| {
        let mut h = history.to_vec();
        h.extend(e.newton_history.drain(..));
        e.newton_history = h;
        e.homotopy_trace = trace.to_vec();
        e.last_t = t;
        e
    };

    let start = SupportField::ball(grid.clone(), r0, p)
        .map_err(|e| SolveFailure::new(FailureKind::InvalidStart, e.to_string()))?;
    let mut history = Vec::new();
    let mut trace = Vec::new();
    let out = newton_iterate(&start, &path.sample(), cfg).map_err(|e| fail_with(e, &history, &trace, None))?;
    let gamma = |h: &SupportField| gaussian_volume(h).unwrap_or(f64::NAN);
    trace.push(TracePoint {
        t: 0.0,
        gamma_n: gamma(&out.solution),
        residual_sup: out.residual_sup,
        newton_steps: out.steps,
    });
    history.extend(&out.history);
    let mut current = out;

    let mut dt = cfg.initial_dt;
    while path.t < 1.0 {
        let t_next = if path.t + dt >= 1.0 - 1e-12 { 1.0 } else { path.t + dt };
        let trial = HomotopyDensity {
            t: t_next,
            ..path.clone()
        };
        match newton_iterate(&current.solution, &trial.sample(), cfg) {
            Ok(out) => {
                let g = gamma(&out.solution);
                info!(
                    "t = {t_next:.4}: {} Newton steps, sup|F| = {:.3e}, gamma_n = {g:.6}",
                    out.steps, out.residual_sup
                );
                trace.push(TracePoint {
                    t: t_next,
                    gamma_n: g,
                    residual_sup: out.residual_sup,
                    newton_steps: out.steps,
                });
                history.extend(&out.history);
                path = trial;
                current = out;
                dt = (2.0 * dt).min(cfg.initial_dt);
            }
            Err(e) => {
                dt *= 0.5;
                info!("t = {t_next:.4} failed ({e}); dt -> {dt:.3e}");
                if dt < cfg.min_dt {
                    let e = SolveFailure::new(
                        FailureKind::ContinuationCollapse,
                        format!("step size fell below {} after {e}", cfg.min_dt),
                    );
                    return Err(fail_with(e, &history, &trace, Some(path.t)));
                }
            }
        }
    }
    current.history = history;
    finish(current, &f, Some(branch), trace, Some(c0))
}

/// Outcome of solving on both branches.
#[derive(Debug)]
pub struct BothBranches {
    pub small: Result<SolveReport, SolveFailure>,
    pub large: Result<SolveReport, SolveFailure>,
    /// Sampled Hausdorff distance between the two solutions.
    pub hausdorff: Option<f64>,
    /// Both succeeded and the solutions are at least 1e-6 apart.
    pub distinct: bool,
    /// h_small < h_large at every node of the final solutions.
    pub ordered_at_end: Option<bool>,
}

/// Minimum separation for two branch solutions to count as different bodies.
pub const BRANCH_COLLAPSE_TOL: f64 = 1e-6;

pub fn solve_both(f: &MeasureDensity, p: f64, cfg: &SolveConfig) -> BothBranches {
    let (small, large) = rayon::join(
        || homotopy_solve(f, p, Branch::Small, cfg),
        || homotopy_solve(f, p, Branch::Large, cfg),
    );
    let (hausdorff, ordered_at_end) = match (&small, &large) {
        (Ok(s), Ok(l)) => (
            hausdorff_distance(&s.solution, &l.solution).ok(),
            Some(
                s.solution
                    .values()
                    .iter()
                    .zip(l.solution.values())
                    .all(|(a, b)| a < b),
            ),
        ),
        _ => (None, None),
    };
    BothBranches {
        distinct: hausdorff.is_some_and(|d| d >= BRANCH_COLLAPSE_TOL),
        small,
        large,
        hausdorff,
        ordered_at_end,
    }
}
