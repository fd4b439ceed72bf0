//! Tracking-plus-penalty cost
//!
//! ```text
//! J = ½‖u − U‖² + ½‖p − P‖² + (β1/2)‖f‖_{2q0}^{2q0} + (β2/2)‖∂t f‖²
//! ```
//!
//! State-like terms use trapezoidal time quadrature, the `∂t f` term forward
//! differences with the rectangle rule over the `nt` intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::StateSolution;
use crate::mesh::{check_same, interval_l2_norm, lp_norm_qt, time_forward_diff, SpaceTimeField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub q0: f64,
}

impl PenaltyConfig {
    pub fn new(beta1: f64, beta2: f64, q0: f64) -> Result<Self> {
        if !(beta1 > 0.0 && beta1.is_finite()) || !(beta2 > 0.0 && beta2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "penalty weights must be positive, got beta1 = {beta1}, beta2 = {beta2}"
            )));
        }
        if !(q0 >= 1.0 && q0.is_finite()) {
            return Err(Error::InvalidParameter(format!("q0 must be >= 1, got {q0}")));
        }
        Ok(Self { beta1, beta2, q0 })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub misfit_u: f64,
    pub misfit_p: f64,
    pub penalty_f: f64,
    pub penalty_dtf: f64,
    pub total: f64,
}

/// `(β1/2) ‖f‖^{2q0}` and `(β2/2) ‖∂t f‖²`.
pub fn penalty_terms(f: &SpaceTimeField, pen: &PenaltyConfig) -> Result<(f64, f64)> {
    let exponent = 2.0 * pen.q0;
    let pf = 0.5 * pen.beta1 * lp_norm_qt(f, exponent)?.powf(exponent);
    let pdt = 0.5 * pen.beta2 * interval_l2_norm(&time_forward_diff(f)).powi(2);
    Ok((pf, pdt))
}

pub fn evaluate_cost(
    state: &StateSolution,
    f: &SpaceTimeField,
    u_target: &SpaceTimeField,
    p_target: &SpaceTimeField,
    pen: &PenaltyConfig,
) -> Result<CostBreakdown> {
    let d = f.disc();
    for other in [state.u.disc(), state.p.disc(), u_target.disc(), p_target.disc()] {
        check_same(other, d)?;
    }
    let misfit_u = 0.5 * lp_norm_qt(&state.u.sub(u_target), 2.0)?.powi(2);
    let misfit_p = 0.5 * lp_norm_qt(&state.p.sub(p_target), 2.0)?.powi(2);
    let (penalty_f, penalty_dtf) = penalty_terms(f, pen)?;
    Ok(CostBreakdown {
        misfit_u,
        misfit_p,
        penalty_f,
        penalty_dtf,
        total: misfit_u + misfit_p + penalty_f + penalty_dtf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Discretization, ScalarField};

    fn grid() -> Discretization {
        Discretization::new(31, 31, 8, 1.0).unwrap()
    }

    fn zero_state(d: Discretization) -> StateSolution {
        StateSolution { u: SpaceTimeField::zeros(d), p: SpaceTimeField::zeros(d) }
    }

    #[test]
    fn attained_targets_cost_nothing() {
        let d = grid();
        let s = StateSolution {
            u: SpaceTimeField::from_fn(d, |x, y, t| x * y * t),
            p: SpaceTimeField::from_fn(d, |x, _, t| x + t),
        };
        let pen = PenaltyConfig::new(1.0, 1.0, 1.5).unwrap();
        let c = evaluate_cost(&s, &SpaceTimeField::zeros(d), &s.u, &s.p, &pen).unwrap();
        assert_eq!(c, CostBreakdown::default());
    }

    #[test]
    fn constant_misfit() {
        let d = grid();
        let s = zero_state(d);
        let minus_one = SpaceTimeField::steady(&ScalarField::constant(d, -1.0));
        let pen = PenaltyConfig::new(1.0, 1.0, 1.0).unwrap();
        let c = evaluate_cost(&s, &SpaceTimeField::zeros(d), &minus_one, &s.p, &pen).unwrap();
        let vol = d.nodes() as f64 * d.cell_area();
        assert!((c.misfit_u - 0.5 * vol).abs() < 1e-12);
        assert!((c.total - c.misfit_u).abs() < 1e-15);
    }

    #[test]
    fn constant_control_penalty() {
        let d = grid();
        let f = SpaceTimeField::steady(&ScalarField::constant(d, 0.7));
        let pen = PenaltyConfig::new(2.0, 3.0, 1.0).unwrap();
        let (pf, pdt) = penalty_terms(&f, &pen).unwrap();
        let vol = d.nodes() as f64 * d.cell_area();
        assert!((pf - 0.49 * vol).abs() < 1e-12);
        assert_eq!(pdt, 0.0);
    }

    #[test]
    fn scaling_laws() {
        let d = Discretization::new(7, 7, 6, 0.5).unwrap();
        let f = SpaceTimeField::from_fn(d, |x, y, t| (x - y) * (1.0 + t * t));
        let pen = PenaltyConfig::new(1.3, 0.4, 1.0).unwrap();
        let (a, _) = penalty_terms(&f, &pen).unwrap();
        let (b, _) = penalty_terms(&f.scaled(2.0), &pen).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
        let doubled = PenaltyConfig { beta1: 2.6, ..pen };
        let (c, _) = penalty_terms(&f, &doubled).unwrap();
        assert!((c / a - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_penalties() {
        assert!(PenaltyConfig::new(0.0, 1.0, 1.5).is_err());
        assert!(PenaltyConfig::new(1.0, -1.0, 1.5).is_err());
        assert!(PenaltyConfig::new(1.0, 1.0, 0.9).is_err());
    }
}
