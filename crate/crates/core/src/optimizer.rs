//! Outer loops driving the control to stationarity: steepest descent with
//! Armijo backtracking, and a damped fixed-point iteration on the optimality
//! condition.

use serde::{Deserialize, Serialize};

use crate::control::solve_optimality_field;
use crate::error::{Error, Result};
use crate::mesh::SpaceTimeField;
use crate::objective::CostBreakdown;
use crate::problem::{Evaluation, Problem};

pub const MAX_BACKTRACKS: usize = 40;
/// Fixed-point iteration aborts once the residual exceeds its running
/// minimum by this factor.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub shrink: f64,
    pub step0: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { max_iters: 200, grad_tol: 1e-6, armijo_c: 1e-4, shrink: 0.5, step0: 1.0 }
    }
}

impl DescentOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.grad_tol > 0.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.step0 > 0.0
            && self.step0.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("descent options out of range: {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub max_iters: usize,
    pub damping: f64,
    pub tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { max_iters: 200, damping: 0.5, tol: 1e-6 }
    }
}

impl FixedPointOptions {
    pub fn validate(&self) -> Result<()> {
        if self.damping > 0.0 && self.damping <= 1.0 && self.tol > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("fixed-point options out of range: {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GradientDescent,
    FixedPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradTol,
    MaxIters,
    LineSearchFailure,
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub cost: CostBreakdown,
    pub grad_norm: f64,
    /// Accepted step size (descent) or damping (fixed point); 0 at iteration 0.
    pub step: f64,
    pub optimality_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub method: Method,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub reason: StopReason,
}

impl OptimizeReport {
    pub fn last(&self) -> &IterationRecord {
        self.iterations.last().expect("report has at least the initial record")
    }

    /// True when the recorded costs never increase.
    pub fn is_monotone(&self) -> bool {
        self.iterations.windows(2).all(|w| w[1].cost.total <= w[0].cost.total)
    }
}

fn record(iter: usize, ev: &Evaluation, step: f64) -> IterationRecord {
    let g = ev.gradient.norm();
    IterationRecord { iter, cost: ev.cost, grad_norm: g, step, optimality_residual: g }
}

pub fn optimize_gradient_descent(
    f0: &SpaceTimeField,
    problem: &Problem,
    opts: &DescentOptions,
) -> Result<(SpaceTimeField, OptimizeReport)> {
    opts.validate()?;
    let mut f = f0.clone();
    let mut ev = problem.evaluate(&f)?;
    let g0 = ev.gradient.norm();
    let target = opts.grad_tol * (1.0 + g0);
    let mut iterations = vec![record(0, &ev, 0.0)];
    let mut reason = StopReason::MaxIters;

    for k in 1..=opts.max_iters + 1 {
        let gnorm = ev.gradient.norm();
        if gnorm <= target {
            reason = StopReason::GradTol;
            break;
        }
        if k > opts.max_iters {
            break;
        }
        let j = ev.cost.total;
        let decrease = opts.armijo_c * gnorm * gnorm;
        let mut alpha = opts.step0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial = f.clone();
            trial.axpy(-alpha, &ev.gradient.g);
            match problem.state(&trial) {
                Ok(state) => {
                    let cost = problem.cost_of_state(&state, &trial)?;
                    if cost.total <= j - alpha * decrease {
                        accepted = Some((trial, state));
                        break;
                    }
                }
                // An overly long trial step may break the inner solves.
                Err(e) if e.is_solver_failure() => {}
                Err(e) => return Err(e),
            }
            alpha *= opts.shrink;
        }
        let Some((trial, state)) = accepted else {
            reason = StopReason::LineSearchFailure;
            break;
        };
        ev = problem.evaluate_with_state(&trial, state)?;
        f = trial;
        iterations.push(record(k, &ev, alpha));
    }
    let converged = reason == StopReason::GradTol;
    Ok((f, OptimizeReport { method: Method::GradientDescent, iterations, converged, reason }))
}

/// Iterates `f ← (1 − θ) f + θ B(p1(f))` where `B` solves the time
/// boundary-value problem of the optimality condition.
pub fn optimize_fixed_point(
    f0: &SpaceTimeField,
    problem: &Problem,
    opts: &FixedPointOptions,
) -> Result<(SpaceTimeField, OptimizeReport)> {
    opts.validate()?;
    let theta = opts.damping;
    let mut f = f0.clone();
    let mut ev = problem.evaluate(&f)?;
    let mut iterations = vec![record(0, &ev, 0.0)];
    let mut best = ev.gradient.norm();
    let mut reason = StopReason::MaxIters;

    for k in 1..=opts.max_iters + 1 {
        let r = ev.gradient.norm();
        if r <= opts.tol * (1.0 + ev.forcing.norm()) {
            reason = StopReason::GradTol;
            break;
        }
        if r > DIVERGENCE_FACTOR * best {
            reason = StopReason::Diverged;
            break;
        }
        if k > opts.max_iters {
            break;
        }
        best = best.min(r);
        let target = solve_optimality_field(&ev.forcing, &problem.pen)?;
        let mut next = f.scaled(1.0 - theta);
        next.axpy(theta, &target);
        ev = problem.evaluate(&next)?;
        f = next;
        iterations.push(record(k, &ev, theta));
    }
    let converged = reason == StopReason::GradTol;
    Ok((f, OptimizeReport { method: Method::FixedPoint, iterations, converged, reason }))
}

/// L²(Q_T) norm of the optimality-condition residual at `f`, which is the
/// norm of the reduced gradient.
pub fn check_optimality(f: &SpaceTimeField, problem: &Problem) -> Result<f64> {
    Ok(problem.evaluate(f)?.gradient.norm())
}
