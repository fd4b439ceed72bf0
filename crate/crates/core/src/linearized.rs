//! Directional (Gâteaux) derivative of the discrete state residual.
//!
//! At a base point `(u, p, f)` and direction `(e, w, h)` the two rows are
//!
//! ```text
//! ∂t e − div(φ'(u)∇e) − div(φ''(u) e ∇u) − div(g(u)∇w) − div(g'(u) e ∇p)
//! ∂t w − div(d(u)∇w) − div(d'(u) e ∇p) − h
//! ```
//!
//! discretized with exactly the lagged stencils of
//! [`state_residual`](crate::forward::state_residual), so the result is the
//! exact derivative of that discrete map. Product coefficients such as
//! `φ''(u) e` are formed nodewise before face averaging.

use crate::coefficients::{CoefficientModel, Role};
use crate::error::Result;
use crate::forward::StateSolution;
use crate::mesh::{check_same, FluxStencil, ScalarField, SpaceTimeField};

#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    pub e: SpaceTimeField,
    pub w: SpaceTimeField,
    pub h: SpaceTimeField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentResidual {
    /// Saturation row at levels `1..=nt` (level 0 is zero).
    pub res1: SpaceTimeField,
    /// Pressure row at levels `1..=nt` (level 0 is zero).
    pub res2: SpaceTimeField,
    /// Initial trace of `e`.
    pub trace_e: ScalarField,
    /// Initial trace of `w`.
    pub trace_w: ScalarField,
}

pub fn apply_tangent(
    state: &StateSolution,
    f: &SpaceTimeField,
    model: &CoefficientModel,
    dir: &Direction,
) -> Result<TangentResidual> {
    let disc = *f.disc();
    for d in [state.u.disc(), state.p.disc(), dir.e.disc(), dir.w.disc(), dir.h.disc()] {
        check_same(d, &disc)?;
    }
    let inv_dt = 1.0 / disc.dt();
    let mut res1 = SpaceTimeField::zeros(disc);
    let mut res2 = SpaceTimeField::zeros(disc);
    for n in 1..=disc.nt() {
        let u_prev = state.u.frame(n - 1);
        let (u_now, p_now) = (state.u.frame(n), state.p.frame(n));
        let (e_prev, e_now) = (dir.e.frame(n - 1), dir.e.frame(n));
        let (w_prev, w_now) = (dir.w.frame(n - 1), dir.w.frame(n));

        let phi1 = model.on_field(Role::Phi, 1, u_prev);
        let phi2_e = model.on_field(Role::Phi, 2, u_prev).zip_map(e_prev, |a, b| a * b);
        let g0 = model.on_field(Role::G, 0, u_prev);
        let g1_e = model.on_field(Role::G, 1, u_prev).zip_map(e_prev, |a, b| a * b);
        let d0 = model.on_field(Role::D, 0, u_prev);
        let d1_e = model.on_field(Role::D, 1, u_prev).zip_map(e_prev, |a, b| a * b);

        let mut a = e_now.zip_map(e_prev, |x, y| (x - y) * inv_dt);
        a.axpy(-1.0, &FluxStencil::new(&phi1).apply(e_now));
        a.axpy(-1.0, &FluxStencil::new(&phi2_e).apply(u_now));
        a.axpy(-1.0, &FluxStencil::new(&g0).apply(w_now));
        a.axpy(-1.0, &FluxStencil::new(&g1_e).apply(p_now));
        res1.set_frame(n, a);

        let mut b = w_now.zip_map(w_prev, |x, y| (x - y) * inv_dt);
        b.axpy(-1.0, &FluxStencil::new(&d0).apply(w_now));
        b.axpy(-1.0, &FluxStencil::new(&d1_e).apply(p_now));
        b.axpy(-1.0, dir.h.frame(n));
        res2.set_frame(n, b);
    }
    Ok(TangentResidual {
        res1,
        res2,
        trace_e: dir.e.frame(0).clone(),
        trace_w: dir.w.frame(0).clone(),
    })
}
