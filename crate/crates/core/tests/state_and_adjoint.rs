use proptest::prelude::*;

use deadoil::adjoint::{adjoint_residual, solve_adjoint, AdjointSolution};
use deadoil::coefficients::{CoefficientModel, Family, Role};
use deadoil::forward::{solve_forward, state_residual, InitialData, StateSolution};
use deadoil::linearized::{apply_tangent, Direction};
use deadoil::mesh::{div_coeff_grad, lp_norm_qt};
use deadoil::random::SmoothRandom;
use deadoil::{Discretization, ScalarField, SpaceTimeField};

fn nonlinear() -> CoefficientModel {
    CoefficientModel::new(Family::Smoothstep(1.0, 0.5), Family::Smoothstep(0.0, 1.0), Family::Rational(1.0, 0.5))
}

/// Zero-extended nodal value.
fn at(v: &ScalarField, i: isize, j: isize) -> f64 {
    let d = v.disc();
    if i < 0 || j < 0 || i >= d.nx() as isize || j >= d.ny() as isize {
        0.0
    } else {
        v.at(i as usize, j as usize)
    }
}

/// Coefficient value with the boundary taking the interior neighbour's value.
fn coef(c: &ScalarField, i: isize, j: isize, fi: isize, fj: isize) -> f64 {
    let d = c.disc();
    if i < 0 || j < 0 || i >= d.nx() as isize || j >= d.ny() as isize {
        c.at(fi as usize, fj as usize)
    } else {
        c.at(i as usize, j as usize)
    }
}

/// Naive five-point `div(c ∇v)`.
fn naive_div(c: &ScalarField, v: &ScalarField) -> ScalarField {
    let d = *v.disc();
    let (hx2, hy2) = (d.hx() * d.hx(), d.hy() * d.hy());
    let mut out = vec![0.0; d.nodes()];
    for j in 0..d.ny() as isize {
        for i in 0..d.nx() as isize {
            let me = at(v, i, j);
            let cm = c.at(i as usize, j as usize);
            let mut s = 0.0;
            for (di, dj, h2) in [(-1, 0, hx2), (1, 0, hx2), (0, -1, hy2), (0, 1, hy2)] {
                let face = 0.5 * (cm + coef(c, i + di, j + dj, i, j));
                s += face * (at(v, i + di, j + dj) - me) / h2;
            }
            out[d.index(i as usize, j as usize)] = s;
        }
    }
    ScalarField::from_values(d, out).unwrap()
}

fn naive_grad_dot(a: &ScalarField, b: &ScalarField) -> ScalarField {
    let d = *a.disc();
    let mut out = vec![0.0; d.nodes()];
    for j in 0..d.ny() as isize {
        for i in 0..d.nx() as isize {
            let ax = (at(a, i + 1, j) - at(a, i - 1, j)) / (2.0 * d.hx());
            let ay = (at(a, i, j + 1) - at(a, i, j - 1)) / (2.0 * d.hy());
            let bx = (at(b, i + 1, j) - at(b, i - 1, j)) / (2.0 * d.hx());
            let by = (at(b, i, j + 1) - at(b, i, j - 1)) / (2.0 * d.hy());
            out[d.index(i as usize, j as usize)] = ax * bx + ay * by;
        }
    }
    ScalarField::from_values(d, out).unwrap()
}

fn coeff(model: &CoefficientModel, role: Role, order: usize, u: &ScalarField) -> ScalarField {
    let fam = match role {
        Role::Phi => model.phi,
        Role::G => model.g,
        Role::D => model.d,
    };
    u.map(|r| fam.eval(order, r))
}

fn close(a: &ScalarField, b: &ScalarField, tol: f64) -> bool {
    let scale = 1.0 + b.max_abs();
    a.zip_map(b, |x, y| x - y).max_abs() <= tol * scale
}

fn random_state(d: Discretization, seed: u64) -> StateSolution {
    StateSolution {
        u: SmoothRandom::new(seed).sample(&d, 0.5),
        p: SmoothRandom::new(seed + 1).sample(&d, 1.0),
    }
}

#[test]
fn div_coeff_grad_matches_naive_assembly() {
    let d = Discretization::new(6, 9, 2, 1.0).unwrap();
    let c = SmoothRandom::new(3).sample(&d, 1.0).frame(1).map(|v| 1.5 + v);
    let v = SmoothRandom::new(4).sample(&d, 1.0).frame(2).clone();
    assert!(close(&div_coeff_grad(&c, &v).unwrap(), &naive_div(&c, &v), 1e-12));
}

proptest! {
    #[test]
    fn constant_coefficient_operator_is_symmetric(seed in 0u64..500, c in 0.1f64..10.0) {
        let d = Discretization::new(9, 9, 2, 1.0).unwrap();
        let u = SmoothRandom::new(seed).sample(&d, 1.0).frame(1).map(|x| x + (x * 37.0).sin());
        let v = SmoothRandom::new(seed + 1).sample(&d, 1.0).frame(2).map(|x| x * x - (x * 11.0).cos());
        let cf = ScalarField::constant(d, c);
        let a = u.inner(&div_coeff_grad(&cf, &v).unwrap());
        let b = v.inner(&div_coeff_grad(&cf, &u).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
    }

    #[test]
    fn operator_is_negative_semidefinite(seed in 0u64..500) {
        let d = Discretization::new(9, 7, 2, 1.0).unwrap();
        let c = SmoothRandom::new(seed).sample(&d, 1.0).frame(1).map(|x| 0.2 + x * x);
        let v = SmoothRandom::new(seed + 7).sample(&d, 1.0).frame(2).map(|x| x + (x * 23.0).sin());
        prop_assert!(v.inner(&div_coeff_grad(&c, &v).unwrap()) <= 0.0);
    }

    #[test]
    fn lp_norm_is_absolutely_homogeneous(seed in 0u64..500, alpha in -5.0f64..5.0, p in 1.0f64..4.0) {
        let d = Discretization::new(5, 5, 3, 0.7).unwrap();
        let v = SmoothRandom::new(seed).sample(&d, 1.0);
        let lhs = lp_norm_qt(&v.scaled(alpha), p).unwrap();
        let rhs = alpha.abs() * lp_norm_qt(&v, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }
}

#[test]
fn state_residual_matches_naive_assembly() {
    let d = Discretization::new(7, 6, 3, 0.3).unwrap();
    let model = nonlinear();
    let s = random_state(d, 10);
    let f = SmoothRandom::new(12).sample(&d, 1.0);
    let initial = InitialData { u0: ScalarField::zeros(d), p0: ScalarField::zeros(d) };
    let (r1, r2) = state_residual(&s, &f, &model, &initial).unwrap();
    assert!(close(r1.frame(0), s.u.frame(0), 0.0));
    for n in 1..=d.nt() {
        let (up, un) = (s.u.frame(n - 1), s.u.frame(n));
        let (pp, pn) = (s.p.frame(n - 1), s.p.frame(n));
        let mut a = un.zip_map(up, |x, y| (x - y) / d.dt());
        a.axpy(-1.0, &naive_div(&coeff(&model, Role::Phi, 1, up), un));
        a.axpy(-1.0, &naive_div(&coeff(&model, Role::G, 0, up), pn));
        let mut b = pn.zip_map(pp, |x, y| (x - y) / d.dt());
        b.axpy(-1.0, &naive_div(&coeff(&model, Role::D, 0, up), pn));
        b.axpy(-1.0, f.frame(n));
        assert!(close(r1.frame(n), &a, 1e-12) && close(r2.frame(n), &b, 1e-12), "level {n}");
    }
}

#[test]
fn adjoint_residual_matches_naive_assembly() {
    let d = Discretization::new(7, 6, 3, 0.3).unwrap();
    let model = nonlinear();
    let s = random_state(d, 20);
    let adj = AdjointSolution {
        e1: SmoothRandom::new(22).sample(&d, 1.0),
        p1: SmoothRandom::new(23).sample(&d, 1.0),
    };
    let (ut, pt) = (SmoothRandom::new(24).sample(&d, 1.0), SmoothRandom::new(25).sample(&d, 1.0));
    let (ra, rb) = adjoint_residual(&adj, &s, &ut, &pt, &model).unwrap();
    for n in 0..d.nt() {
        let w = d.time_weight(n + 1);
        let un = s.u.frame(n);
        let (u1, p1s) = (s.u.frame(n + 1), s.p.frame(n + 1));
        let (en, e1) = (adj.e1.frame(n), adj.e1.frame(n + 1));
        let (qn, q1) = (adj.p1.frame(n), adj.p1.frame(n + 1));
        let mut a = e1.zip_map(en, |x, y| (x - y) / d.dt());
        a.axpy(1.0, &naive_div(&coeff(&model, Role::Phi, 1, un), en));
        let t1 = naive_grad_dot(u1, e1).zip_map(&coeff(&model, Role::Phi, 2, u1), |x, c| x * c);
        let t2 = naive_grad_dot(p1s, e1).zip_map(&coeff(&model, Role::G, 1, u1), |x, c| x * c);
        let t3 = naive_grad_dot(p1s, q1).zip_map(&coeff(&model, Role::D, 1, u1), |x, c| x * c);
        for t in [&t1, &t2, &t3] {
            a.axpy(-1.0, t);
        }
        a.axpy(-w, &u1.zip_map(ut.frame(n + 1), |x, y| x - y));
        let mut b = q1.zip_map(qn, |x, y| (x - y) / d.dt());
        b.axpy(1.0, &naive_div(&coeff(&model, Role::D, 0, un), qn));
        b.axpy(1.0, &naive_div(&coeff(&model, Role::G, 0, un), en));
        b.axpy(-w, &p1s.zip_map(pt.frame(n + 1), |x, y| x - y));
        assert!(close(ra.frame(n), &a, 1e-12) && close(rb.frame(n), &b, 1e-12), "level {n}");
    }
}

#[test]
fn tangent_is_linear_in_the_direction() {
    let d = Discretization::new(7, 7, 4, 0.4).unwrap();
    let model = nonlinear();
    let s = random_state(d, 30);
    let f = SmoothRandom::new(32).sample(&d, 1.0);
    let dir = |k: u64| Direction {
        e: SmoothRandom::new(k).sample(&d, 1.0),
        w: SmoothRandom::new(k + 1).sample(&d, 1.0),
        h: SmoothRandom::new(k + 2).sample(&d, 1.0),
    };
    let (a, b) = (dir(40), dir(50));
    let alpha = -1.7;
    let combo = Direction {
        e: a.e.scaled(alpha).add(&b.e),
        w: a.w.scaled(alpha).add(&b.w),
        h: a.h.scaled(alpha).add(&b.h),
    };
    let ta = apply_tangent(&s, &f, &model, &a).unwrap();
    let tb = apply_tangent(&s, &f, &model, &b).unwrap();
    let tc = apply_tangent(&s, &f, &model, &combo).unwrap();
    let expect1 = ta.res1.scaled(alpha).add(&tb.res1);
    let expect2 = ta.res2.scaled(alpha).add(&tb.res2);
    assert!(tc.res1.sub(&expect1).max_abs() <= 1e-12 * (1.0 + expect1.max_abs()));
    assert!(tc.res2.sub(&expect2).max_abs() <= 1e-12 * (1.0 + expect2.max_abs()));
}

#[test]
fn uncoupled_saturation_ignores_control_and_pressure() {
    let d = Discretization::new(9, 9, 6, 0.5).unwrap();
    let model = CoefficientModel::new(Family::Smoothstep(1.0, 0.5), Family::Constant(0.0), Family::Rational(1.0, 0.5));
    let u0 = SmoothRandom::new(1).sample(&d, 1.0).frame(0).clone();
    let a = solve_forward(&model, &u0, &ScalarField::zeros(d), &SpaceTimeField::zeros(d)).unwrap();
    let b = solve_forward(
        &model,
        &u0,
        SmoothRandom::new(2).sample(&d, 3.0).frame(1),
        &SmoothRandom::new(3).sample(&d, 5.0),
    )
    .unwrap();
    for (x, y) in a.u.frames().iter().zip(b.u.frames()) {
        assert!(x.values().iter().zip(y.values()).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn pressure_energy_decays_without_forcing() {
    let d = Discretization::new(11, 11, 10, 0.5).unwrap();
    let model = CoefficientModel::new(Family::Smoothstep(1.0, 0.5), Family::Constant(0.0), Family::Rational(1.0, 0.5));
    let u0 = SmoothRandom::new(4).sample(&d, 2.0).frame(0).clone();
    let p0 = SmoothRandom::new(5).sample(&d, 1.0).frame(0).clone();
    let s = solve_forward(&model, &u0, &p0, &SpaceTimeField::zeros(d)).unwrap();
    let norms: Vec<f64> = s.p.frames().iter().map(|f| f.inner(f)).collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0]), "{norms:?}");
}

#[test]
fn maximum_principle_without_coupling() {
    let d = Discretization::new(13, 13, 20, 1.0).unwrap();
    let model = CoefficientModel::new(Family::Rational(1.0, 0.6), Family::Constant(0.0), Family::Smoothstep(1.0, 0.3));
    let u0 = ScalarField::from_fn(d, |x, y| (6.0 * x).sin() * (4.0 * y).cos() * x * (1.0 - x) * y * (1.0 - y) * 30.0);
    let s = solve_forward(&model, &u0, &ScalarField::zeros(d), &SpaceTimeField::zeros(d)).unwrap();
    let slack = 1e-9 * u0.max_abs();
    for fr in s.u.frames() {
        assert!(fr.min() >= u0.min().min(0.0) - slack && fr.max() <= u0.max().max(0.0) + slack);
    }
}

/// With φ = id, g = 0, d = 1 the saturation adjoint is a backward heat
/// equation; reversed in time it is the forward pressure solve with the
/// weighted misfit as control.
#[test]
fn decoupled_adjoint_matches_time_reflected_forward_solve() {
    let d = Discretization::new(15, 15, 12, 0.6).unwrap();
    let model = CoefficientModel::decoupled_heat();
    let state = random_state(d, 60);
    let (ut, pt) = (SmoothRandom::new(62).sample(&d, 1.0), SmoothRandom::new(63).sample(&d, 1.0));
    let adj = solve_adjoint(&state, &ut, &pt, &model).unwrap();

    let nt = d.nt();
    let mut control = SpaceTimeField::zeros(d);
    for m in 1..=nt {
        let k = nt - m + 1;
        let w = d.time_weight(k);
        control.set_frame(m, state.u.frame(k).zip_map(ut.frame(k), |a, b| w * (a - b)));
    }
    let z = ScalarField::zeros(d);
    let reflected = solve_forward(&model, &z, &z, &control).unwrap().p;
    let mut expect = SpaceTimeField::zeros(d);
    for n in 0..=nt {
        expect.set_frame(n, reflected.frame(nt - n).scaled(-1.0));
    }
    let rel = adj.e1.sub(&expect).norm() / expect.norm();
    assert!(rel <= 1e-8, "{rel:e}");
}

#[test]
fn decoupled_saturation_adjoint_ignores_pressure_data() {
    let d = Discretization::new(7, 7, 5, 0.5).unwrap();
    let model = CoefficientModel::decoupled_heat();
    let s = random_state(d, 70);
    let ut = SmoothRandom::new(72).sample(&d, 1.0);
    let a = solve_adjoint(&s, &ut, &SpaceTimeField::zeros(d), &model).unwrap();
    let s2 = StateSolution { u: s.u.clone(), p: SmoothRandom::new(73).sample(&d, 4.0) };
    let b = solve_adjoint(&s2, &ut, &SmoothRandom::new(74).sample(&d, 2.0), &model).unwrap();
    assert_eq!(a.e1, b.e1);
}
