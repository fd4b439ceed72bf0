//! Backward-in-time adjoint system
//!
//! ```text
//! ∂t e1 + div(φ'(u)∇e1) − d'(u)∇p·∇p1 − φ''(u)∇u·∇e1 − g'(u)∇p·∇e1 = u − U
//! ∂t p1 + div(d(u)∇p1) + div(g(u)∇e1)                             = p − P
//! e1 = p1 = 0 on the boundary and at t = T
//! ```
//!
//! Frame `n` of the adjoint is the multiplier of the forward step
//! `n → n + 1`. Marching from `n + 1` to `n`, diffusion is implicit with
//! coefficients at level `n` (the matrices of the forward step); the
//! tracking sources and the first-order transport terms are taken at level
//! `n + 1`, the sources with the trapezoidal weight of the misfit
//! quadrature. The `div(g ∇e1)` coupling uses the freshly computed `e1^n`.
//!
//! With this staggering the scheme coincides with the transpose of the
//! forward scheme whenever the coefficients are constant and uncoupled, so
//! the reduced gradient is exact there; otherwise the two differ by terms
//! that vanish under refinement.

use crate::coefficients::{CoefficientModel, Role};
use crate::error::{Error, Result};
use crate::forward::StateSolution;
use crate::linalg::ImplicitDiffusion;
use crate::mesh::{check_same, grad_dot, FluxStencil, ScalarField, SpaceTimeField};

#[derive(Clone, Debug, PartialEq)]
pub struct AdjointSolution {
    pub e1: SpaceTimeField,
    pub p1: SpaceTimeField,
}

/// State and tracking data consumed by one backward step `n + 1 → n`.
pub struct AdjointStepData<'a> {
    /// Saturation at level `n` (implicit coefficients).
    pub u_n: &'a ScalarField,
    /// Saturation and pressure at level `n + 1` (explicit terms).
    pub u_next: &'a ScalarField,
    pub p_next: &'a ScalarField,
    /// Weighted misfits `w (u − U)` and `w (p − P)` at level `n + 1`.
    pub source_u: &'a ScalarField,
    pub source_p: &'a ScalarField,
}

/// `φ''(u)∇u·∇e1 + g'(u)∇p·∇e1 + d'(u)∇p·∇p1`
fn transport_terms(
    model: &CoefficientModel,
    u: &ScalarField,
    p: &ScalarField,
    e1: &ScalarField,
    p1: &ScalarField,
) -> Result<ScalarField> {
    let a = grad_dot(u, e1)?.zip_map(&model.on_field(Role::Phi, 2, u), |x, c| x * c);
    let pe = grad_dot(p, e1)?;
    let pp = grad_dot(p, p1)?;
    let g1 = model.on_field(Role::G, 1, u);
    let d1 = model.on_field(Role::D, 1, u);
    let values = (0..u.disc().nodes())
        .map(|k| a.values()[k] + g1.values()[k] * pe.values()[k] + d1.values()[k] * pp.values()[k])
        .collect();
    ScalarField::from_values(*u.disc(), values)
}

pub fn step_adjoint(
    e1_next: &ScalarField,
    p1_next: &ScalarField,
    data: &AdjointStepData<'_>,
    model: &CoefficientModel,
    dt: f64,
) -> Result<(ScalarField, ScalarField)> {
    let disc = e1_next.disc();
    for d in [
        p1_next.disc(),
        data.u_n.disc(),
        data.u_next.disc(),
        data.p_next.disc(),
        data.source_u.disc(),
        data.source_p.disc(),
    ] {
        check_same(d, disc)?;
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }

    let transport = transport_terms(model, data.u_next, data.p_next, e1_next, p1_next)?;
    let mut rhs_e = e1_next.clone();
    rhs_e.axpy(-dt, data.source_u);
    rhs_e.axpy(-dt, &transport);
    let sat = ImplicitDiffusion::new(&model.on_field(Role::Phi, 1, data.u_n), dt);
    let e1 = sat.solve(&rhs_e, e1_next)?;

    let coupling = FluxStencil::new(&model.on_field(Role::G, 0, data.u_n)).apply(&e1);
    let mut rhs_p = p1_next.clone();
    rhs_p.axpy(-dt, data.source_p);
    rhs_p.axpy(dt, &coupling);
    let pres = ImplicitDiffusion::new(&model.on_field(Role::D, 0, data.u_n), dt);
    let p1 = pres.solve(&rhs_p, p1_next)?;
    Ok((e1, p1))
}

fn weighted_misfit(state: &SpaceTimeField, target: &SpaceTimeField, n: usize) -> ScalarField {
    let w = state.disc().time_weight(n);
    state.frame(n).zip_map(target.frame(n), |a, b| w * (a - b))
}

pub fn solve_adjoint(
    state: &StateSolution,
    u_target: &SpaceTimeField,
    p_target: &SpaceTimeField,
    model: &CoefficientModel,
) -> Result<AdjointSolution> {
    let disc = *state.u.disc();
    for d in [state.p.disc(), u_target.disc(), p_target.disc()] {
        check_same(d, &disc)?;
    }
    let dt = disc.dt();
    let mut e1 = SpaceTimeField::zeros(disc);
    let mut p1 = SpaceTimeField::zeros(disc);
    for n in (0..disc.nt()).rev() {
        let source_u = weighted_misfit(&state.u, u_target, n + 1);
        let source_p = weighted_misfit(&state.p, p_target, n + 1);
        let data = AdjointStepData {
            u_n: state.u.frame(n),
            u_next: state.u.frame(n + 1),
            p_next: state.p.frame(n + 1),
            source_u: &source_u,
            source_p: &source_p,
        };
        let (a, b) = step_adjoint(e1.frame(n + 1), p1.frame(n + 1), &data, model, dt)
            .map_err(|e| Error::AtLevel { stage: "adjoint step", level: n, source: Box::new(e) })?;
        e1.set_frame(n, a);
        p1.set_frame(n, b);
    }
    Ok(AdjointSolution { e1, p1 })
}

/// Strong-form residuals (left side minus right side) of both adjoint
/// equations under the stepping stencils, at levels `0..nt`; level `nt`
/// holds the terminal values.
pub fn adjoint_residual(
    adj: &AdjointSolution,
    state: &StateSolution,
    u_target: &SpaceTimeField,
    p_target: &SpaceTimeField,
    model: &CoefficientModel,
) -> Result<(SpaceTimeField, SpaceTimeField)> {
    let disc = *state.u.disc();
    for d in [state.p.disc(), u_target.disc(), p_target.disc(), adj.e1.disc(), adj.p1.disc()] {
        check_same(d, &disc)?;
    }
    let inv_dt = 1.0 / disc.dt();
    let nt = disc.nt();
    let mut ra = SpaceTimeField::zeros(disc);
    let mut rb = SpaceTimeField::zeros(disc);
    for n in 0..nt {
        let u_n = state.u.frame(n);
        let (e_n, e_next) = (adj.e1.frame(n), adj.e1.frame(n + 1));
        let (q_n, q_next) = (adj.p1.frame(n), adj.p1.frame(n + 1));

        let mut a = e_next.zip_map(e_n, |x, y| (x - y) * inv_dt);
        a.axpy(1.0, &FluxStencil::new(&model.on_field(Role::Phi, 1, u_n)).apply(e_n));
        let transport =
            transport_terms(model, state.u.frame(n + 1), state.p.frame(n + 1), e_next, q_next)?;
        a.axpy(-1.0, &transport);
        a.axpy(-1.0, &weighted_misfit(&state.u, u_target, n + 1));
        ra.set_frame(n, a);

        let mut b = q_next.zip_map(q_n, |x, y| (x - y) * inv_dt);
        b.axpy(1.0, &FluxStencil::new(&model.on_field(Role::D, 0, u_n)).apply(q_n));
        b.axpy(1.0, &FluxStencil::new(&model.on_field(Role::G, 0, u_n)).apply(e_n));
        b.axpy(-1.0, &weighted_misfit(&state.p, p_target, n + 1));
        rb.set_frame(n, b);
    }
    ra.set_frame(nt, adj.e1.frame(nt).clone());
    rb.set_frame(nt, adj.p1.frame(nt).clone());
    Ok((ra, rb))
}
