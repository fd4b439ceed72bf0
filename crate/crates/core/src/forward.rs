//! Time integration of the saturation/pressure system
//!
//! ```text
//! ∂t u − div(φ'(u) ∇u) = div(g(u) ∇p)
//! ∂t p − div(d(u) ∇p)  = f
//! ```
//!
//! with zero Dirichlet data and initial values `(u0, p0)`.
//!
//! Each step lags the coefficients at level `n` and solves two SPD systems:
//! first pressure, then saturation driven by the fresh pressure. The control
//! frame `n + 1` drives the step `n → n + 1`.

use crate::coefficients::{CoefficientModel, Role};
use crate::error::{Error, Result};
use crate::linalg::ImplicitDiffusion;
use crate::mesh::{check_same, FluxStencil, ScalarField, SpaceTimeField};

#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    pub u0: ScalarField,
    pub p0: ScalarField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateSolution {
    pub u: SpaceTimeField,
    pub p: SpaceTimeField,
}

/// Additional right-hand sides for the two equations, used by manufactured
/// solution studies.
#[derive(Clone, Debug)]
pub struct ExtraSources {
    pub u: SpaceTimeField,
    pub p: SpaceTimeField,
}

/// One semi-implicit step. `source_u`/`source_p` are optional extra sources
/// evaluated at the new level.
pub fn step_state_with_sources(
    u_n: &ScalarField,
    p_n: &ScalarField,
    f_next: &ScalarField,
    model: &CoefficientModel,
    dt: f64,
    source_u: Option<&ScalarField>,
    source_p: Option<&ScalarField>,
) -> Result<(ScalarField, ScalarField)> {
    check_same(u_n.disc(), p_n.disc())?;
    check_same(u_n.disc(), f_next.disc())?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }

    let mut rhs_p = p_n.clone();
    rhs_p.axpy(dt, f_next);
    if let Some(s) = source_p {
        rhs_p.axpy(dt, s);
    }
    let pressure = ImplicitDiffusion::new(&model.on_field(Role::D, 0, u_n), dt);
    let p_next = pressure.solve(&rhs_p, p_n)?;

    let coupling = FluxStencil::new(&model.on_field(Role::G, 0, u_n)).apply(&p_next);
    let mut rhs_u = u_n.clone();
    rhs_u.axpy(dt, &coupling);
    if let Some(s) = source_u {
        rhs_u.axpy(dt, s);
    }
    let saturation = ImplicitDiffusion::new(&model.on_field(Role::Phi, 1, u_n), dt);
    let u_next = saturation.solve(&rhs_u, u_n)?;
    Ok((u_next, p_next))
}

pub fn step_state(
    u_n: &ScalarField,
    p_n: &ScalarField,
    f_next: &ScalarField,
    model: &CoefficientModel,
    dt: f64,
) -> Result<(ScalarField, ScalarField)> {
    step_state_with_sources(u_n, p_n, f_next, model, dt, None, None)
}

pub fn solve_forward(
    model: &CoefficientModel,
    u0: &ScalarField,
    p0: &ScalarField,
    f: &SpaceTimeField,
) -> Result<StateSolution> {
    solve_forward_with_sources(model, u0, p0, f, None)
}

pub fn solve_forward_with_sources(
    model: &CoefficientModel,
    u0: &ScalarField,
    p0: &ScalarField,
    f: &SpaceTimeField,
    sources: Option<&ExtraSources>,
) -> Result<StateSolution> {
    let disc = *f.disc();
    check_same(u0.disc(), &disc)?;
    check_same(p0.disc(), &disc)?;
    if let Some(s) = sources {
        check_same(s.u.disc(), &disc)?;
        check_same(s.p.disc(), &disc)?;
    }
    let dt = disc.dt();
    let mut u = SpaceTimeField::zeros(disc);
    let mut p = SpaceTimeField::zeros(disc);
    u.set_frame(0, u0.clone());
    p.set_frame(0, p0.clone());
    for n in 0..disc.nt() {
        let (su, sp) = match sources {
            Some(s) => (Some(s.u.frame(n + 1)), Some(s.p.frame(n + 1))),
            None => (None, None),
        };
        let (un, pn) =
            step_state_with_sources(u.frame(n), p.frame(n), f.frame(n + 1), model, dt, su, sp)
                .map_err(|e| Error::AtLevel { stage: "forward step", level: n + 1, source: Box::new(e) })?;
        u.set_frame(n + 1, un);
        p.set_frame(n + 1, pn);
    }
    Ok(StateSolution { u, p })
}

/// Strong-form residuals of both state equations under the stepping
/// stencils. Level 0 holds the mismatch against the initial data.
pub fn state_residual(
    state: &StateSolution,
    f: &SpaceTimeField,
    model: &CoefficientModel,
    initial: &InitialData,
) -> Result<(SpaceTimeField, SpaceTimeField)> {
    let disc = *f.disc();
    for d in [state.u.disc(), state.p.disc(), initial.u0.disc(), initial.p0.disc()] {
        check_same(d, &disc)?;
    }
    let inv_dt = 1.0 / disc.dt();
    let mut r1 = SpaceTimeField::zeros(disc);
    let mut r2 = SpaceTimeField::zeros(disc);
    r1.set_frame(0, state.u.frame(0).zip_map(&initial.u0, |a, b| a - b));
    r2.set_frame(0, state.p.frame(0).zip_map(&initial.p0, |a, b| a - b));
    for n in 1..=disc.nt() {
        let (u_prev, u_now) = (state.u.frame(n - 1), state.u.frame(n));
        let (p_prev, p_now) = (state.p.frame(n - 1), state.p.frame(n));

        let mut a = u_now.zip_map(u_prev, |x, y| (x - y) * inv_dt);
        a.axpy(-1.0, &FluxStencil::new(&model.on_field(Role::Phi, 1, u_prev)).apply(u_now));
        a.axpy(-1.0, &FluxStencil::new(&model.on_field(Role::G, 0, u_prev)).apply(p_now));
        r1.set_frame(n, a);

        let mut b = p_now.zip_map(p_prev, |x, y| (x - y) * inv_dt);
        b.axpy(-1.0, &FluxStencil::new(&model.on_field(Role::D, 0, u_prev)).apply(p_now));
        b.axpy(-1.0, f.frame(n));
        r2.set_frame(n, b);
    }
    Ok((r1, r2))
}
