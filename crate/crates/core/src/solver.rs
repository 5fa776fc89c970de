//! Least-squares TDOA position fix by steepest descent.
//!
//! Minimizes `J(x) = Σ_i (r_i − d_i(x) + d_ref(x))²` with iterates
//! `x_{k+1} = x_k − μ_k ∇J(x_k)`. With the line search enabled, each trial
//! `μ_k` is the Barzilai-Borwein secant step `sᵀs / sᵀy` (falling back to
//! twice the previous accepted step) and is halved until `J` decreases. The
//! direction is always `−∇J`; the secant step only sets its length, which
//! matters in the long narrow valleys that appear when the UE sits outside
//! the stations' hull.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::TdoaSystem;
use crate::scenario::{distance, Point2};

/// Consecutive cost increases tolerated by the fixed-step iteration.
pub const DIVERGENCE_PATIENCE: usize = 10;

const MAX_STEP_GROWTH: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub mu: f64,
    pub max_iters: usize,
    /// Stop once `‖∇J‖` falls below this, meters.
    pub grad_tol: f64,
    /// Stop once an accepted step is shorter than this, meters.
    pub step_tol: f64,
    pub line_search: bool,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu: 0.05,
            max_iters: 2000,
            grad_tol: 1e-6,
            step_tol: 1e-9,
            line_search: true,
            backtrack_factor: 0.5,
            max_backtracks: 20,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.mu, self.grad_tol, self.step_tol];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("mu and tolerances must be positive".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidParameter("backtrack_factor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionEstimate {
    pub x_hat: Point2,
    pub iterations: usize,
    pub converged: bool,
    /// `J(x_hat)`, m².
    pub final_cost: f64,
}

/// One row of the optional iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub x: Point2,
    pub cost: f64,
    pub grad_norm: f64,
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "x", "y", "cost", "grad_norm"])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            format!("{:e}", r.x.x),
            format!("{:e}", r.x.y),
            format!("{:e}", r.cost),
            format!("{:e}", r.grad_norm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares cost `J(x)`, m².
pub fn cost(x: Point2, system: &TdoaSystem) -> Result<f64> {
    Ok(system.residuals(x)?.iter().map(|e| e * e).sum())
}

/// Analytic gradient `∇J(x) = 2 Σ_i e_i(x) ∂e_i/∂x`, where
/// `∂e_i/∂x = (v_i − x)/d_i − (v_ref − x)/d_ref`.
pub fn gradient(x: Point2, system: &TdoaSystem) -> Result<Point2> {
    system.check_regular(x)?;
    let d_ref = distance(system.reference, x);
    let u_ref = (system.reference - x) * (1.0 / d_ref);
    let mut g = Point2::default();
    for (&v, &r) in system.anchors.iter().zip(&system.ranges) {
        let d = distance(v, x);
        let e = r - d + d_ref;
        let de = (v - x) * (1.0 / d) - u_ref;
        g = g + de * (2.0 * e);
    }
    Ok(g)
}

fn cost_or_inf(x: Point2, system: &TdoaSystem) -> f64 {
    cost(x, system).unwrap_or(f64::INFINITY)
}

/// Steepest-descent LS fix from `x_init`.
pub fn solve(system: &TdoaSystem, x_init: Point2, cfg: &SolverConfig) -> Result<PositionEstimate> {
    solve_traced(system, x_init, cfg, None)
}

pub fn solve_traced(
    system: &TdoaSystem,
    x_init: Point2,
    cfg: &SolverConfig,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<PositionEstimate> {
    cfg.validate()?;
    if system.len() + 1 < 4 {
        return Err(Error::InsufficientGeometry { required: 4, got: system.len() + 1 });
    }
    if !x_init.is_finite() {
        return Err(Error::InvalidParameter(format!("initial point {x_init} is not finite")));
    }

    let mut x = x_init;
    let mut j = cost(x, system)?;
    let mut best = (x, j);
    let mut mu = cfg.mu;
    let mut rising = 0;
    let mut prev: Option<(Point2, Point2)> = None;
    let mut g = gradient(x, system)?;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iters {
        let gn = g.norm();
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceRow { k: iterations, x, cost: j, grad_norm: gn });
        }
        if gn < cfg.grad_tol {
            converged = true;
            break;
        }

        let (next, j_next) = if cfg.line_search {
            // Barzilai-Borwein trial step from the last secant pair, when curvature is positive
            let mut step = match prev {
                Some((s, y)) if s.dot(y) > 0.0 => (s.dot(s) / s.dot(y)).min(cfg.mu * MAX_STEP_GROWTH),
                _ => mu,
            };
            let mut accepted = None;
            for _ in 0..=cfg.max_backtracks {
                let cand = x - g * step;
                let jc = cost_or_inf(cand, system);
                if jc < j {
                    accepted = Some((cand, jc));
                    break;
                }
                step *= cfg.backtrack_factor;
            }
            let Some(acc) = accepted else {
                // no representable descent step along −∇J: stationary to precision
                converged = true;
                break;
            };
            mu = (step / cfg.backtrack_factor).min(cfg.mu * MAX_STEP_GROWTH);
            acc
        } else {
            let cand = x - g * cfg.mu;
            let jc = cost(cand, system)?;
            rising = if jc > j { rising + 1 } else { 0 };
            if rising >= DIVERGENCE_PATIENCE || !jc.is_finite() {
                return Err(Error::Divergence { iterations: iterations + 1 });
            }
            (cand, jc)
        };

        iterations += 1;
        let step_len = distance(next, x);
        let g_next = gradient(next, system)?;
        prev = Some((next - x, g_next - g));
        g = g_next;
        x = next;
        j = j_next;
        if j < best.1 {
            best = (x, j);
        }
        if step_len < cfg.step_tol {
            converged = true;
            break;
        }
    }

    // line search keeps J monotone, so `best` only differs in fixed-step mode
    let (x_hat, final_cost) = if converged { (x, j) } else { best };
    Ok(PositionEstimate { x_hat, iterations, converged, final_cost })
}

/// Outcome of [`solve_with_restarts`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartedEstimate {
    pub estimate: PositionEstimate,
    /// Number of extra starts tried after the first.
    pub restarts: usize,
}

/// Solve from `x_init`; if that does not converge, also try `x_init + offset`
/// for every offset and keep the lowest-cost result.
pub fn solve_with_restarts(
    system: &TdoaSystem,
    x_init: Point2,
    offsets: &[Point2],
    cfg: &SolverConfig,
) -> Result<RestartedEstimate> {
    let first = solve(system, x_init, cfg);
    if let Ok(est) = first {
        if est.converged {
            return Ok(RestartedEstimate { estimate: est, restarts: 0 });
        }
    }
    let mut best = first.as_ref().ok().copied();
    let mut last_err = first.err();
    for &off in offsets {
        match solve(system, x_init + off, cfg) {
            Ok(est) => {
                let better = match best {
                    None => true,
                    Some(b) => {
                        (est.converged && !b.converged)
                            || (est.converged == b.converged && est.final_cost < b.final_cost)
                    }
                };
                if better {
                    best = Some(est);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    log::debug!("solver restarted {} times", offsets.len());
    match best {
        Some(estimate) => Ok(RestartedEstimate { estimate, restarts: offsets.len() }),
        None => Err(last_err.unwrap_or(Error::EmptyInput)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn square_system(truth: Point2) -> TdoaSystem {
        TdoaSystem::exact(p(0.0, 0.0), vec![p(100.0, 0.0), p(100.0, 100.0), p(0.0, 100.0)], truth)
    }

    #[test]
    fn zero_cost_at_truth() {
        let truth = p(31.0, 62.5);
        assert_eq!(cost(truth, &square_system(truth)).unwrap(), 0.0);
        let g = gradient(truth, &square_system(truth)).unwrap();
        assert!(g.norm() < 1e-9);
    }

    #[test]
    fn cost_is_squared_residual_norm() {
        let mut sys = square_system(p(20.0, 30.0));
        sys.ranges[1] += 0.7;
        for x in [p(5.0, 5.0), p(50.0, 80.0), p(-30.0, 120.0)] {
            let res = sys.residuals(x).unwrap();
            let want: f64 = res.iter().map(|e| e * e).sum();
            assert_eq!(cost(x, &sys).unwrap(), want);
        }
    }

    #[test]
    fn cost_hand_computed() {
        // reference (0,0), single anchor (6,0), r = 2; at (3,4) both distances are 5
        let sys = TdoaSystem { reference: p(0.0, 0.0), anchors: vec![p(6.0, 0.0)], ranges: vec![2.0] };
        assert_eq!(cost(p(3.0, 4.0), &sys).unwrap(), 4.0);
        // at (0,3): d_ref = 3, d = sqrt(45) => e = 2 − sqrt(45) + 3
        let e = 5.0 - 45f64.sqrt();
        assert!((cost(p(0.0, 3.0), &sys).unwrap() - e * e).abs() < 1e-12);
    }

    #[test]
    fn symmetric_gradient_has_no_cross_axis_component() {
        // reference and one anchor on the axis x = 50, the other two mirrored about it
        let truth = p(50.0, 40.0);
        let sys = TdoaSystem::exact(p(50.0, 0.0), vec![p(0.0, 100.0), p(100.0, 100.0), p(50.0, 120.0)], truth);
        let g = gradient(p(50.0, 70.0), &sys).unwrap();
        assert!(g.x.abs() < 1e-12, "{g}");
        assert!(g.y.abs() > 1e-6);
    }

    #[test]
    fn singular_points_rejected() {
        let sys = square_system(p(20.0, 30.0));
        assert!(matches!(cost(p(100.0, 0.0), &sys), Err(Error::Singular(_))));
        assert!(matches!(gradient(p(0.0, 0.0), &sys), Err(Error::Singular(_))));
    }

    #[test]
    fn noiseless_square_from_centroid() {
        let truth = p(27.0, 64.0);
        let est = solve(&square_system(truth), p(50.0, 50.0), &SolverConfig::default()).unwrap();
        assert!(est.converged);
        assert!(distance(est.x_hat, truth) < 1e-3, "{}", est.x_hat);
    }

    #[test]
    fn ue_outside_hull_converges() {
        let truth = p(924.79, 987.55);
        let sys =
            TdoaSystem::exact(p(894.98, 959.31), vec![p(390.25, 789.14), p(278.44, 317.28), p(528.70, 635.81)], truth);
        let start = crate::scenario::centroid(&sys.positions()).unwrap();
        let est = solve(&sys, start, &SolverConfig::default()).unwrap();
        assert!(est.converged);
        assert!(distance(est.x_hat, truth) < 1e-3, "{}", distance(est.x_hat, truth));
    }

    #[test]
    fn start_at_truth_exits_immediately() {
        let truth = p(27.0, 64.0);
        let est = solve(&square_system(truth), truth, &SolverConfig::default()).unwrap();
        assert!(est.converged);
        assert!(est.iterations <= 1);
    }

    #[test]
    fn noisy_fix_matches_grid_search() {
        let truth = p(37.3, 58.1);
        let mut sys = square_system(truth);
        sys.ranges[0] += 0.41;
        sys.ranges[1] -= 0.27;
        sys.ranges[2] += 0.12;
        let est = solve(&sys, p(50.0, 50.0), &SolverConfig::default()).unwrap();
        // exhaustive 0.01 m grid over a 20 m box around the truth
        let mut best = (f64::INFINITY, truth);
        for i in 0..=2000 {
            for k in 0..=2000 {
                let x = p(truth.x - 10.0 + 0.01 * i as f64, truth.y - 10.0 + 0.01 * k as f64);
                let c = cost(x, &sys).unwrap();
                if c < best.0 {
                    best = (c, x);
                }
            }
        }
        assert!(distance(est.x_hat, best.1) < 0.02, "{} vs {}", est.x_hat, best.1);
        assert!(est.final_cost <= best.0 + 1e-9);
    }

    #[test]
    fn fixed_step_diverges_with_huge_mu() {
        let truth = p(27.0, 64.0);
        let cfg = SolverConfig { mu: 5.0, line_search: false, ..SolverConfig::default() };
        let r = solve(&square_system(truth), p(50.0, 50.0), &cfg);
        assert!(matches!(r, Err(Error::Divergence { .. }) | Err(Error::Singular(_))), "{r:?}");
    }

    #[test]
    fn fixed_step_plain_descent_converges() {
        let truth = p(27.0, 64.0);
        let cfg = SolverConfig { line_search: false, max_iters: 20_000, ..SolverConfig::default() };
        let est = solve(&square_system(truth), p(50.0, 50.0), &cfg).unwrap();
        assert!(distance(est.x_hat, truth) < 1e-3);
    }

    #[test]
    fn too_few_stations() {
        let sys = TdoaSystem::exact(p(0.0, 0.0), vec![p(1.0, 0.0), p(0.0, 1.0)], p(3.0, 3.0));
        assert!(matches!(
            solve(&sys, p(0.5, 0.5), &SolverConfig::default()),
            Err(Error::InsufficientGeometry { required: 4, got: 3 })
        ));
    }

    #[test]
    fn exhaustion_reports_not_converged() {
        let truth = p(27.0, 64.0);
        let cfg = SolverConfig { max_iters: 2, ..SolverConfig::default() };
        let est = solve(&square_system(truth), p(90.0, 10.0), &cfg).unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations, 2);
    }

    #[test]
    fn trace_records_monotone_cost() {
        let truth = p(27.0, 64.0);
        let mut trace = Vec::new();
        solve_traced(&square_system(truth), p(90.0, 10.0), &SolverConfig::default(), Some(&mut trace)).unwrap();
        assert!(trace.len() > 2);
        assert!(trace.windows(2).all(|w| w[1].cost <= w[0].cost));
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("k,x,y,cost,grad_norm\n0,"));
    }

    fn pt(r: f64) -> impl Strategy<Value = Point2> {
        (-r..r, -r..r).prop_map(|(x, y)| Point2::new(x, y))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn gradient_matches_central_differences(
            stations in prop::collection::vec(pt(300.0), 4..7),
            x in pt(200.0),
            noise in prop::collection::vec(-2.0..2.0f64, 6),
        ) {
            let truth = Point2::new(10.0, -5.0);
            let mut sys = TdoaSystem::exact(stations[0], stations[1..].to_vec(), truth);
            for (r, n) in sys.ranges.iter_mut().zip(&noise) { *r += n; }
            prop_assume!(stations.iter().all(|&s| distance(s, x) > 1.0));
            let g = gradient(x, &sys).unwrap();
            let h = 1e-4;
            let c = |q: Point2| cost(q, &sys).unwrap();
            let fd = Point2::new(
                (c(x + Point2::new(h, 0.0)) - c(x - Point2::new(h, 0.0))) / (2.0 * h),
                (c(x + Point2::new(0.0, h)) - c(x - Point2::new(0.0, h))) / (2.0 * h),
            );
            let err = distance(g, fd) / g.norm().max(1e-3);
            prop_assert!(err < 1e-6, "analytic {} fd {} rel {}", g, fd, err);
        }

        #[test]
        fn line_search_descent_is_monotone(stations in prop::collection::vec(pt(300.0), 4..7), init in pt(250.0)) {
            let sys = TdoaSystem::exact(stations[0], stations[1..].to_vec(), Point2::new(3.0, 4.0));
            prop_assume!(stations.iter().all(|&s| distance(s, init) > 1e-3));
            let mut trace = Vec::new();
            solve_traced(&sys, init, &SolverConfig::default(), Some(&mut trace)).unwrap();
            prop_assert!(trace.windows(2).all(|w| w[1].cost <= w[0].cost));
        }
    }
}
