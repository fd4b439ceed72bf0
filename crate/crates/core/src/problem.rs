//! A fully specified control problem and the state → cost → adjoint →
//! gradient pipeline evaluated at a control.

use crate::adjoint::{solve_adjoint, AdjointSolution};
use crate::coefficients::CoefficientModel;
use crate::control::{adjoint_forcing, reduced_gradient, GradientField};
use crate::error::Result;
use crate::forward::{solve_forward, InitialData, StateSolution};
use crate::mesh::{check_same, Discretization, SpaceTimeField};
use crate::objective::{evaluate_cost, CostBreakdown, PenaltyConfig};

#[derive(Clone, Debug)]
pub struct Problem {
    pub model: CoefficientModel,
    pub pen: PenaltyConfig,
    pub initial: InitialData,
    pub u_target: SpaceTimeField,
    pub p_target: SpaceTimeField,
}

/// Everything computed at one control.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub state: StateSolution,
    pub cost: CostBreakdown,
    pub adjoint: AdjointSolution,
    /// Adjoint pressure aligned with the control levels.
    pub forcing: SpaceTimeField,
    pub gradient: GradientField,
}

impl Problem {
    pub fn new(
        model: CoefficientModel,
        pen: PenaltyConfig,
        initial: InitialData,
        u_target: SpaceTimeField,
        p_target: SpaceTimeField,
    ) -> Result<Self> {
        let d = *u_target.disc();
        for other in [initial.u0.disc(), initial.p0.disc(), p_target.disc()] {
            check_same(other, &d)?;
        }
        Ok(Self { model, pen, initial, u_target, p_target })
    }

    pub fn disc(&self) -> &Discretization {
        self.u_target.disc()
    }

    pub fn state(&self, f: &SpaceTimeField) -> Result<StateSolution> {
        solve_forward(&self.model, &self.initial.u0, &self.initial.p0, f)
    }

    pub fn cost_of_state(&self, state: &StateSolution, f: &SpaceTimeField) -> Result<CostBreakdown> {
        evaluate_cost(state, f, &self.u_target, &self.p_target, &self.pen)
    }

    pub fn cost(&self, f: &SpaceTimeField) -> Result<CostBreakdown> {
        let state = self.state(f)?;
        self.cost_of_state(&state, f)
    }

    pub fn evaluate(&self, f: &SpaceTimeField) -> Result<Evaluation> {
        let state = self.state(f)?;
        self.evaluate_with_state(f, state)
    }

    /// Completes an evaluation from an already computed state.
    pub fn evaluate_with_state(&self, f: &SpaceTimeField, state: StateSolution) -> Result<Evaluation> {
        let cost = self.cost_of_state(&state, f)?;
        let adjoint = solve_adjoint(&state, &self.u_target, &self.p_target, &self.model)?;
        let forcing = adjoint_forcing(&adjoint.p1);
        let gradient = reduced_gradient(f, &adjoint.p1, &self.pen)?;
        Ok(Evaluation { state, cost, adjoint, forcing, gradient })
    }

    /// Same problem with the tracking targets replaced by the state reached
    /// from `f`, so the misfit and its derivative vanish at `f`.
    pub fn with_targets_at(&self, f: &SpaceTimeField) -> Result<Self> {
        let state = self.state(f)?;
        Ok(Self { u_target: state.u, p_target: state.p, ..self.clone() })
    }
}
