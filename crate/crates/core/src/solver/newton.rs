use log::trace;

use super::equation::{jacobian_from, residual_from, sup_norm};
use super::{apriori_check, Branch, FailureKind, SolveConfig, SolveFailure, SolveReport};
use crate::geometry::{convexity_of, geometry_of, symmetrize_even, SupportField};
use crate::measures::{gaussian_volume, MeasureDensity};

/// Relative antipodal mismatch tolerated in input densities before they are
/// symmetrised.
pub(crate) const EVEN_RTOL: f64 = 1e-10;

pub(crate) fn even_density(f: &MeasureDensity) -> Result<MeasureDensity, SolveFailure> {
    let grid = f.grid();
    let scale = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = (0..f.values().len())
        .map(|i| (f.values()[i] - f.values()[grid.antipode(i)]).abs())
        .fold(0.0, f64::max);
    if worst > EVEN_RTOL * scale {
        return Err(SolveFailure::new(
            FailureKind::InvalidStart,
            format!("density is not even (antipodal mismatch {worst:.3e})"),
        ));
    }
    Ok(f.symmetrized())
}

pub(crate) struct NewtonOutcome {
    pub solution: SupportField,
    pub residual_sup: f64,
    pub history: Vec<f64>,
    pub steps: usize,
}

/// Damped Newton iteration on F(h) = 0 with backtracking on sup|F|.
///
/// `h0` and `f` must be even; every accepted iterate stays exactly even
/// and, with the guard on, strictly convex.
pub(crate) fn newton_iterate(
    h0: &SupportField,
    f: &MeasureDensity,
    cfg: &SolveConfig,
) -> Result<NewtonOutcome, SolveFailure> {
    let grid = h0.grid().clone();
    if !grid.same_as(f.grid()) {
        return Err(SolveFailure::new(FailureKind::InvalidStart, "density lives on a different grid"));
    }
    if !h0.is_even() {
        return Err(SolveFailure::new(FailureKind::InvalidStart, "initial support function is not even"));
    }
    let mut h = h0.clone();
    let mut geom = geometry_of(&grid, h.values());
    if cfg.convexity_guard && !convexity_of(&geom).is_convex {
        return Err(SolveFailure::new(FailureKind::InvalidStart, "initial support function is not convex"));
    }
    let mut res = residual_from(&h, &geom, f);
    let mut r = sup_norm(&res);
    let mut history = vec![r];
    let fail = |kind, msg: String, history: &Vec<f64>| {
        let mut e = SolveFailure::new(kind, msg);
        e.newton_history = history.clone();
        e
    };

    for step in 0..=cfg.max_newton_iters {
        if r <= cfg.newton_tol {
            return Ok(NewtonOutcome {
                solution: h,
                residual_sup: r,
                history,
                steps: step,
            });
        }
        if step == cfg.max_newton_iters {
            break;
        }
        let jac = jacobian_from(&h, &geom, f);
        let rhs = nalgebra::DVector::from_iterator(res.len(), res.iter().map(|v| -v));
        let Some(delta) = jac.lu().solve(&rhs) else {
            return Err(fail(FailureKind::SingularJacobian, format!("singular Jacobian at step {step}"), &history));
        };
        let delta = symmetrize_even(delta.as_slice(), &grid);

        let mut alpha = 1.0;
        let mut lost_convexity = false;
        let accepted = loop {
            if alpha < cfg.min_step {
                break None;
            }
            let trial: Vec<f64> = h.values().iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            if trial.iter().all(|v| *v > 0.0 && v.is_finite()) {
                let trial = h.with_values(trial).expect("validated positive");
                let tgeom = geometry_of(&grid, trial.values());
                if cfg.convexity_guard && !convexity_of(&tgeom).is_convex {
                    lost_convexity = true;
                } else {
                    let tres = residual_from(&trial, &tgeom, f);
                    let tr = sup_norm(&tres);
                    if tr.is_finite() && tr < (1.0 - 1e-4 * alpha) * r {
                        break Some((trial, tgeom, tres, tr));
                    }
                }
            }
            alpha *= cfg.backtrack_factor;
        };
        let Some((trial, tgeom, tres, tr)) = accepted else {
            let kind = if lost_convexity {
                FailureKind::ConvexityLost
            } else {
                FailureKind::LineSearchStall
            };
            return Err(fail(kind, format!("line search failed at step {step} with sup|F| = {r:.3e}"), &history));
        };
        trace!("newton step {step}: alpha = {alpha:.3e}, sup|F| {r:.3e} -> {tr:.3e}");
        h = trial;
        geom = tgeom;
        res = tres;
        r = tr;
        history.push(r);
    }
    Err(fail(
        FailureKind::IterationCap,
        format!("no convergence in {} iterations (sup|F| = {r:.3e})", cfg.max_newton_iters),
        &history,
    ))
}

/// Newton solve from `h0`. The branch tag is read off the Gaussian volume of
/// the result (small below 1/2).
pub fn newton_solve(h0: &SupportField, f: &MeasureDensity, cfg: &SolveConfig) -> Result<SolveReport, SolveFailure> {
    cfg.validate()
        .map_err(|e| SolveFailure::new(FailureKind::InvalidStart, e.to_string()))?;
    let f = even_density(f)?;
    let out = newton_iterate(h0, &f, cfg)?;
    finish(out, &f, None, Vec::new(), None)
}

pub(crate) fn finish(
    out: NewtonOutcome,
    f: &MeasureDensity,
    branch: Option<Branch>,
    trace: Vec<super::TracePoint>,
    c0: Option<f64>,
) -> Result<SolveReport, SolveFailure> {
    let gamma_n = gaussian_volume(&out.solution)
        .map_err(|e| SolveFailure::new(FailureKind::ConvexityLost, e.to_string()))?;
    let branch = branch.unwrap_or(if gamma_n < 0.5 { Branch::Small } else { Branch::Large });
    let crossed_half = trace
        .windows(2)
        .any(|w| (w[0].gamma_n < 0.5) != (w[1].gamma_n < 0.5));
    let mut report = SolveReport {
        apriori: Default::default(),
        solution: out.solution,
        branch,
        gamma_n,
        residual_sup: out.residual_sup,
        newton_history: out.history,
        homotopy_trace: trace,
        c0,
        crossed_half,
    };
    report.apriori = apriori_check(&report, f);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::{build_grid, Resolution};
    use crate::isotropic::solve_constant_roots;

    #[test]
    fn constant_density_converges_to_both_roots() {
        let grid = build_grid(2, Resolution::Circle { n: 64 }).unwrap();
        let f = MeasureDensity::constant(grid.clone(), 0.04).unwrap();
        let roots = solve_constant_roots(2, 1.0, 2.0 * PI * 0.04).unwrap();
        let cfg = SolveConfig::default();

        let rep = newton_solve(&SupportField::ball(grid.clone(), 0.3, 1.0).unwrap(), &f, &cfg).unwrap();
        assert!(rep.newton_history.len() - 1 <= 8);
        assert!(rep.solution.values().iter().all(|v| (v - roots[0]).abs() < 1e-8));
        assert_eq!(rep.branch, Branch::Small);

        let rep = newton_solve(&SupportField::ball(grid.clone(), 2.2, 1.0).unwrap(), &f, &cfg).unwrap();
        assert!(rep.solution.values().iter().all(|v| (v - roots[1]).abs() < 1e-8));
        assert_eq!(rep.branch, Branch::Large);

        let rep = newton_solve(&SupportField::ball(grid, roots[0], 1.0).unwrap(), &f, &cfg).unwrap();
        assert_eq!(rep.newton_history.len(), 1);
    }

    #[test]
    fn rejects_odd_start() {
        let grid = build_grid(2, Resolution::Circle { n: 32 }).unwrap();
        let f = MeasureDensity::constant(grid.clone(), 0.04).unwrap();
        let h = SupportField::from_fn(grid, 1.0, |u| 1.0 + 0.01 * u.x).unwrap();
        let err = newton_solve(&h, &f, &SolveConfig::default()).unwrap_err();
        assert_eq!(err.kind, FailureKind::InvalidStart);
    }

    #[test]
    fn no_solution_above_threshold() {
        let grid = build_grid(2, Resolution::Circle { n: 32 }).unwrap();
        // 2π f = 0.7 > e^{-1/2}
        let f = MeasureDensity::constant(grid.clone(), 0.7 / (2.0 * PI)).unwrap();
        let h = SupportField::ball(grid, 1.0, 1.0).unwrap();
        assert!(newton_solve(&h, &f, &SolveConfig::default()).is_err());
    }
}
