//! First-order optimality condition for the control.
//!
//! The reduced gradient, in the trapezoidal L²(Q_T) pairing, is
//!
//! ```text
//! G = q0 β1 |f|^{2q0−2} f − β2 ∂tt f − p1
//! ```
//!
//! with `∂t f = 0` at both ends of the time interval. Its penalty part is the
//! exact derivative of the discrete penalty terms: `∂tt` is the three-point
//! second difference closed by reflection (`f^{-1} = f^1`,
//! `f^{nt+1} = f^{nt-1}`). The adjoint pressure enters through
//! [`adjoint_forcing`], which places the multiplier of step `m − 1 → m` on
//! the control level `m` that drives that step.

use crate::error::{Error, Result};
use crate::mesh::{check_same, SpaceTimeField};
use crate::objective::PenaltyConfig;
use crate::problem::Problem;

/// Floor inside `|f|^{2q0−2}` for the Newton Jacobian only.
pub const NEWTON_FLOOR: f64 = 1e-12;
pub const NEWTON_MAX_ITERS: usize = 50;
const NEWTON_MAX_HALVINGS: usize = 60;

/// Reduced gradient of the cost with respect to the control.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub g: SpaceTimeField,
}

impl GradientField {
    pub fn norm(&self) -> f64 {
        self.g.norm()
    }
    pub fn pair(&self, h: &SpaceTimeField) -> f64 {
        self.g.inner(h)
    }
}

/// `|x|^{2q0−2} x`
fn power_term(x: f64, q0: f64) -> f64 {
    if q0 == 1.0 {
        x
    } else {
        x.abs().powf(2.0 * q0 - 2.0) * x
    }
}

/// Second difference in time with reflective closure, on one node's series.
fn second_difference(series: &[f64], dt: f64) -> Vec<f64> {
    let n = series.len() - 1;
    let idt2 = 1.0 / (dt * dt);
    (0..=n)
        .map(|m| {
            let prev = if m == 0 { series[1] } else { series[m - 1] };
            let next = if m == n { series[n - 1] } else { series[m + 1] };
            (prev - 2.0 * series[m] + next) * idt2
        })
        .collect()
}

/// `q0 β1 |f|^{2q0−2} f − β2 ∂tt f` for one time series.
fn penalty_series(series: &[f64], pen: &PenaltyConfig, dt: f64) -> Vec<f64> {
    let kappa = pen.q0 * pen.beta1;
    second_difference(series, dt)
        .iter()
        .zip(series)
        .map(|(dtt, &x)| kappa * power_term(x, pen.q0) - pen.beta2 * dtt)
        .collect()
}

/// Gradient of the two penalty terms alone.
pub fn penalty_gradient(f: &SpaceTimeField, pen: &PenaltyConfig) -> SpaceTimeField {
    let disc = *f.disc();
    let mut out = SpaceTimeField::zeros(disc);
    for k in 0..disc.nodes() {
        out.set_trace(k, &penalty_series(&f.trace(k), pen, disc.dt()));
    }
    out
}

/// Adjoint pressure shifted onto control levels: level 0 gets zero (the
/// control there drives no step), level `m >= 1` gets `p1^{m−1} / w_m`
/// with `w_m` the trapezoidal weight.
pub fn adjoint_forcing(p1: &SpaceTimeField) -> SpaceTimeField {
    let disc = *p1.disc();
    let mut out = SpaceTimeField::zeros(disc);
    for m in 1..=disc.nt() {
        let w = disc.time_weight(m);
        out.set_frame(m, p1.frame(m - 1).scaled(1.0 / w));
    }
    out
}

pub fn reduced_gradient(
    f: &SpaceTimeField,
    p1: &SpaceTimeField,
    pen: &PenaltyConfig,
) -> Result<GradientField> {
    check_same(f.disc(), p1.disc())?;
    let mut g = penalty_gradient(f, pen);
    g.axpy(-1.0, &adjoint_forcing(p1));
    Ok(GradientField { g })
}

/// Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `q0 β1 |f|^{2q0−2} f − β2 ∂tt f = forcing` in time at one node by
/// damped Newton, starting from the pointwise solution without the time
/// derivative term.
pub fn solve_optimality_time_bvp(forcing: &[f64], pen: &PenaltyConfig, dt: f64) -> Result<Vec<f64>> {
    if forcing.len() < 3 {
        return Err(Error::InvalidParameter("need at least two time steps".into()));
    }
    let kappa = pen.q0 * pen.beta1;
    let expo = 1.0 / (2.0 * pen.q0 - 1.0);
    let mut f: Vec<f64> =
        forcing.iter().map(|&s| s.signum() * (s.abs() / kappa).powf(expo)).collect();
    let residual = |f: &[f64]| -> Vec<f64> {
        penalty_series(f, pen, dt).iter().zip(forcing).map(|(a, s)| a - s).collect()
    };
    let target = 1e-10 * (1.0 + max_abs(forcing));
    let n = forcing.len();
    let b = pen.beta2 / (dt * dt);

    let mut r = residual(&f);
    let mut rnorm = max_abs(&r);
    for _ in 0..NEWTON_MAX_ITERS {
        if rnorm <= target {
            return Ok(f);
        }
        let diag: Vec<f64> = f
            .iter()
            .map(|&x| {
                let slope = if pen.q0 == 1.0 {
                    1.0
                } else {
                    (2.0 * pen.q0 - 1.0) * (x.abs() + NEWTON_FLOOR).powf(2.0 * pen.q0 - 2.0)
                };
                kappa * slope + 2.0 * b
            })
            .collect();
        let mut sub = vec![-b; n];
        let mut sup = vec![-b; n];
        sup[0] = -2.0 * b;
        sub[n - 1] = -2.0 * b;
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = solve_tridiagonal(&sub, &diag, &sup, &neg_r);

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..NEWTON_MAX_HALVINGS {
            let trial: Vec<f64> = f.iter().zip(&step).map(|(x, s)| x + lambda * s).collect();
            let rt = residual(&trial);
            let rtn = max_abs(&rt);
            if rtn < rnorm {
                f = trial;
                r = rt;
                rnorm = rtn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if rnorm <= target {
        Ok(f)
    } else {
        Err(Error::Newton { residual: rnorm, iterations: NEWTON_MAX_ITERS })
    }
}

/// Applies [`solve_optimality_time_bvp`] at every spatial node.
pub fn solve_optimality_field(forcing: &SpaceTimeField, pen: &PenaltyConfig) -> Result<SpaceTimeField> {
    let disc = *forcing.disc();
    let mut out = SpaceTimeField::zeros(disc);
    for k in 0..disc.nodes() {
        let series = solve_optimality_time_bvp(&forcing.trace(k), pen, disc.dt())?;
        out.set_trace(k, &series);
    }
    Ok(out)
}

/// Central differences `(J(f + εh) − J(f − εh)) / 2ε` for each `ε`.
pub fn fd_gradient_oracle(
    problem: &Problem,
    f: &SpaceTimeField,
    h: &SpaceTimeField,
    eps_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    check_same(f.disc(), problem.disc())?;
    check_same(h.disc(), problem.disc())?;
    for (i, &e) in eps_list.iter().enumerate() {
        if !(e > 0.0 && e.is_finite()) || eps_list[..i].contains(&e) {
            return Err(Error::InvalidParameter(format!("eps values must be positive and distinct, got {e}")));
        }
    }
    eps_list
        .iter()
        .map(|&eps| {
            let mut plus = f.clone();
            plus.axpy(eps, h);
            let mut minus = f.clone();
            minus.axpy(-eps, h);
            let jp = problem.cost(&plus)?.total;
            let jm = problem.cost(&minus)?.total;
            Ok((eps, (jp - jm) / (2.0 * eps)))
        })
        .collect()
}
