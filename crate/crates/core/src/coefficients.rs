//! The constitutive triple (φ, g, d) and its admissibility gate.
//!
//! φ enters the saturation equation through `Δφ(u) = div(φ'(u) ∇u)`, g couples
//! saturation to the pressure gradient and d is the pressure diffusivity.
//! The state, tangent and adjoint equations need φ up to its third
//! derivative, g up to its second and d up to its first.
//!
//! Admissibility is checked by dense sampling on `[-R, R]`:
//!
//! * `d(r) >= c1` and `c1 <= φ'(r) <= c2`,
//! * `|d'(r)|, |φ'(r)|, |φ''(r)|, |φ'''(r)| <= c3`.
//!
//! Bounds left unset only require strict positivity of `d` and `φ'`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::ScalarField;
use crate::profile::parse_call;

/// Closed-form scalar families. All provide derivatives up to order 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// r
    Identity,
    /// c
    Constant(f64),
    /// a + b r
    Affine(f64, f64),
    /// a r + b tanh(r)
    Smoothstep(f64, f64),
    /// a + b r / sqrt(1 + r²)
    Rational(f64, f64),
}

impl Family {
    pub fn new(name: &str, params: &[f64]) -> Result<Self> {
        let arity = match name {
            "identity" => 0,
            "constant" => 1,
            "affine" | "smoothstep" | "rational" => 2,
            _ => return Err(Error::UnknownFamily(name.to_string())),
        };
        if params.len() != arity {
            return Err(Error::Arity { name: name.to_string(), expected: arity, got: params.len() });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite parameter in `{name}`")));
        }
        Ok(match name {
            "identity" => Family::Identity,
            "constant" => Family::Constant(params[0]),
            "affine" => Family::Affine(params[0], params[1]),
            "smoothstep" => Family::Smoothstep(params[0], params[1]),
            _ => Family::Rational(params[0], params[1]),
        })
    }

    pub fn parse(src: &str) -> Result<Self> {
        let (name, params) = parse_call(src)?;
        Self::new(&name, &params)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Identity => "identity",
            Family::Constant(_) => "constant",
            Family::Affine(..) => "affine",
            Family::Smoothstep(..) => "smoothstep",
            Family::Rational(..) => "rational",
        }
    }

    /// `order`-th derivative at `r`; `order <= 3`.
    pub fn eval(&self, order: usize, r: f64) -> f64 {
        debug_assert!(order <= 3);
        match (*self, order) {
            (Family::Identity, 0) => r,
            (Family::Identity, 1) => 1.0,
            (Family::Identity, _) => 0.0,
            (Family::Constant(c), 0) => c,
            (Family::Constant(_), _) => 0.0,
            (Family::Affine(a, b), 0) => a + b * r,
            (Family::Affine(_, b), 1) => b,
            (Family::Affine(..), _) => 0.0,
            (Family::Smoothstep(a, b), k) => {
                let t = r.tanh();
                let s = 1.0 - t * t;
                match k {
                    0 => a * r + b * t,
                    1 => a + b * s,
                    2 => -2.0 * b * t * s,
                    _ => -2.0 * b * s * (1.0 - 3.0 * t * t),
                }
            }
            (Family::Rational(a, b), k) => {
                let q = 1.0 + r * r;
                let sq = q.sqrt();
                match k {
                    0 => a + b * r / sq,
                    1 => b / (q * sq),
                    2 => -3.0 * b * r / (q * q * sq),
                    _ => b * (12.0 * r * r - 3.0) / (q * q * q * sq),
                }
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Identity => write!(f, "identity()"),
            Family::Constant(c) => write!(f, "constant({c:?})"),
            Family::Affine(a, b) => write!(f, "affine({a:?}, {b:?})"),
            Family::Smoothstep(a, b) => write!(f, "smoothstep({a:?}, {b:?})"),
            Family::Rational(a, b) => write!(f, "rational({a:?}, {b:?})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Phi,
    G,
    D,
}

impl Role {
    pub fn max_order(self) -> usize {
        match self {
            Role::Phi => 3,
            Role::G => 2,
            Role::D => 1,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Role::Phi => "phi",
            Role::G => "g",
            Role::D => "d",
        }
    }
}

/// Hypothesis constants. `None` leaves the corresponding bound unchecked
/// (lower bounds then only require strict positivity).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisBounds {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientModel {
    pub phi: Family,
    pub g: Family,
    pub d: Family,
    pub bounds: HypothesisBounds,
}

impl CoefficientModel {
    pub fn new(phi: Family, g: Family, d: Family) -> Self {
        Self { phi, g, d, bounds: HypothesisBounds::default() }
    }

    /// φ = identity, g ≡ 0, d ≡ 1: saturation and pressure decouple into
    /// two heat equations.
    pub fn decoupled_heat() -> Self {
        Self::new(Family::Identity, Family::Constant(0.0), Family::Constant(1.0))
    }

    pub fn family(&self, role: Role) -> &Family {
        match role {
            Role::Phi => &self.phi,
            Role::G => &self.g,
            Role::D => &self.d,
        }
    }

    /// Nodewise derivative of one coefficient applied to a field. Internal
    /// callers stay within the role's order limit.
    pub(crate) fn on_field(&self, role: Role, order: usize, u: &ScalarField) -> ScalarField {
        debug_assert!(order <= role.max_order());
        let fam = *self.family(role);
        u.map(|r| fam.eval(order, r))
    }
}

/// Derivative of order `order` of the named coefficient at `r`.
pub fn eval_coefficient(model: &CoefficientModel, which: Role, order: usize, r: f64) -> Result<f64> {
    if order > which.max_order() {
        return Err(Error::UnsupportedOrder {
            family: model.family(which).name().to_string(),
            role: which.label(),
            order,
        });
    }
    Ok(model.family(which).eval(order, r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub function: Role,
    pub order: usize,
    pub r: f64,
    pub value: f64,
    /// Which bound failed: `c1`, `c2`, `c3` or `finite`.
    pub bound: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.function {
            Role::Phi => "phi",
            Role::G => "g",
            Role::D => "d",
        };
        let primes = "'".repeat(self.order);
        let what = match self.bound.as_str() {
            "c1" => "lower bound c1",
            "c2" => "upper bound c2",
            "c3" => "derivative bound c3",
            _ => "finiteness",
        };
        write!(f, "{name}{primes}({:.6}) = {:.6e} violates {what}", self.r, self.value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub range: [f64; 2],
    pub samples: usize,
    /// min over samples of `min(d, φ')`
    pub observed_c1: f64,
    /// max over samples of `φ'`
    pub observed_c2: f64,
    /// max over samples of `|d'|, |φ'|, |φ''|, |φ'''|`
    pub observed_c3: f64,
    pub pass: bool,
    /// Total number of failed checks; at most [`MAX_RECORDED_VIOLATIONS`]
    /// of them are listed.
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

pub const MAX_RECORDED_VIOLATIONS: usize = 64;

impl ValidationReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} violation(s) on [{}, {}]",
            self.violation_count, self.range[0], self.range[1]
        );
        for v in self.violations.iter().take(3) {
            s.push_str("; ");
            s.push_str(&v.to_string());
        }
        s
    }
}

/// Samples `[-range, range]` at `samples` equispaced points and checks the
/// hypotheses listed in the module docs.
pub fn validate_hypotheses(
    model: &CoefficientModel,
    range: f64,
    samples: usize,
) -> Result<ValidationReport> {
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::InvalidParameter(format!("validation range must be positive, got {range}")));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {samples}")));
    }
    let b = model.bounds;
    let mut obs_c1 = f64::INFINITY;
    let mut obs_c2 = f64::NEG_INFINITY;
    let mut obs_c3: f64 = 0.0;
    let mut count = 0;
    let mut violations = Vec::new();
    let mut flag = |function: Role, order: usize, r: f64, value: f64, bound: &str| {
        count += 1;
        if violations.len() < MAX_RECORDED_VIOLATIONS {
            violations.push(Violation { function, order, r, value, bound: bound.to_string() });
        }
    };
    let lower_ok = |v: f64| match b.c1 {
        Some(c1) => v >= c1,
        None => v > 0.0,
    };

    for k in 0..samples {
        let r = -range + 2.0 * range * k as f64 / (samples - 1) as f64;
        for role in [Role::Phi, Role::G, Role::D] {
            for order in 0..=role.max_order() {
                let v = model.family(role).eval(order, r);
                if !v.is_finite() {
                    flag(role, order, r, v, "finite");
                }
            }
        }
        let d0 = model.d.eval(0, r);
        let d1 = model.d.eval(1, r);
        let p1 = model.phi.eval(1, r);
        let p2 = model.phi.eval(2, r);
        let p3 = model.phi.eval(3, r);

        obs_c1 = obs_c1.min(d0).min(p1);
        obs_c2 = obs_c2.max(p1);
        obs_c3 = obs_c3.max(d1.abs()).max(p1.abs()).max(p2.abs()).max(p3.abs());

        if !lower_ok(d0) {
            flag(Role::D, 0, r, d0, "c1");
        }
        if !lower_ok(p1) {
            flag(Role::Phi, 1, r, p1, "c1");
        }
        if let Some(c2) = b.c2 {
            if p1 > c2 {
                flag(Role::Phi, 1, r, p1, "c2");
            }
        }
        if let Some(c3) = b.c3 {
            for (role, order, v) in
                [(Role::D, 1, d1), (Role::Phi, 1, p1), (Role::Phi, 2, p2), (Role::Phi, 3, p3)]
            {
                if v.abs() > c3 {
                    flag(role, order, r, v, "c3");
                }
            }
        }
    }
    Ok(ValidationReport {
        range: [-range, range],
        samples,
        observed_c1: obs_c1,
        observed_c2: obs_c2,
        observed_c3: obs_c3,
        pass: count == 0,
        violation_count: count,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_model() -> CoefficientModel {
        CoefficientModel::new(
            Family::Smoothstep(1.0, 0.5),
            Family::Smoothstep(0.0, 0.1),
            Family::Rational(1.0, 0.5),
        )
    }

    #[test]
    fn simple_evaluations() {
        let m = CoefficientModel::decoupled_heat();
        assert_eq!(eval_coefficient(&m, Role::Phi, 1, 0.3).unwrap(), 1.0);
        assert_eq!(eval_coefficient(&m, Role::D, 0, -4.0).unwrap(), 1.0);
        assert_eq!(eval_coefficient(&m, Role::D, 1, 2.0).unwrap(), 0.0);
        assert!(matches!(
            eval_coefficient(&m, Role::D, 2, 0.0),
            Err(Error::UnsupportedOrder { order: 2, .. })
        ));
        assert!(eval_coefficient(&m, Role::G, 3, 0.0).is_err());
        assert!(eval_coefficient(&m, Role::Phi, 3, 0.0).is_ok());
    }

    #[test]
    fn parse_families() {
        assert_eq!(Family::parse("smoothstep(0.2, 1.0)").unwrap(), Family::Smoothstep(0.2, 1.0));
        assert_eq!(Family::parse("identity").unwrap(), Family::Identity);
        assert!(Family::parse("affine(1)").is_err());
        assert!(Family::parse("spline(1,2)").is_err());
        let f = Family::Rational(1.0, -0.25);
        assert_eq!(Family::parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn smoothstep_second_derivative_matches_fd() {
        let f = Family::Smoothstep(0.2, 1.0);
        let h = 1e-4;
        for &r in &[-2.0, -0.3, 0.0, 0.7, 3.1] {
            let fd = (f.eval(1, r + h) - f.eval(1, r - h)) / (2.0 * h);
            let exact = f.eval(2, r);
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn identity_model_passes() {
        let rep = validate_hypotheses(&CoefficientModel::decoupled_heat(), 10.0, 101).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.observed_c1, 1.0);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn linear_diffusivity_fails_lower_bound() {
        let m = CoefficientModel::new(Family::Identity, Family::Constant(0.0), Family::Affine(0.0, 1.0));
        let rep = validate_hypotheses(&m, 1.0, 101).unwrap();
        assert!(!rep.pass);
        assert!(rep.violations.iter().all(|v| v.function == Role::D && v.bound == "c1" && v.r <= 0.0));
        assert!(rep.summary().contains("lower bound c1"));
    }

    #[test]
    fn explicit_bounds_are_enforced() {
        let mut m = default_model();
        m.bounds = HypothesisBounds { c1: Some(0.5), c2: Some(1.5), c3: Some(2.0) };
        assert!(validate_hypotheses(&m, 5.0, 1001).unwrap().pass);
        m.bounds.c2 = Some(1.2);
        let rep = validate_hypotheses(&m, 5.0, 1001).unwrap();
        assert!(rep.violations.iter().any(|v| v.bound == "c2"));
        assert!(validate_hypotheses(&m, 0.0, 10).is_err());
        assert!(validate_hypotheses(&m, 1.0, 1).is_err());
    }

    #[test]
    fn observed_constants_are_stable_under_densification() {
        let m = default_model();
        let a = validate_hypotheses(&m, 5.0, 10001).unwrap();
        let b = validate_hypotheses(&m, 5.0, 20001).unwrap();
        assert!(a.pass && b.pass);
        assert!((a.observed_c1 - b.observed_c1).abs() < 1e-3);
        assert!((a.observed_c2 - b.observed_c2).abs() < 1e-3);
        assert!((a.observed_c3 - b.observed_c3).abs() < 1e-3);
    }

    fn family_strategy() -> impl Strategy<Value = Family> {
        prop_oneof![
            Just(Family::Identity),
            (-3.0..3.0f64).prop_map(Family::Constant),
            (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| Family::Affine(a, b)),
            (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| Family::Smoothstep(a, b)),
            (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| Family::Rational(a, b)),
        ]
    }

    proptest! {
        #[test]
        fn analytic_derivatives_match_fd(f in family_strategy(), r in -5.0..5.0f64) {
            let h = 1e-4;
            for k in 1..=3 {
                let fd = (f.eval(k - 1, r + h) - f.eval(k - 1, r - h)) / (2.0 * h);
                let exact = f.eval(k, r);
                prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                    "{f} order {k} at {r}: {fd} vs {exact}");
            }
        }

        #[test]
        fn validation_monotone_in_range(
            d in family_strategy(), phi in family_strategy(), r_big in 0.5..8.0f64, frac in 0.05..1.0f64
        ) {
            let m = CoefficientModel::new(phi, Family::Constant(0.0), d);
            let big = validate_hypotheses(&m, r_big, 2001).unwrap();
            let small = validate_hypotheses(&m, r_big * frac, 2001).unwrap();
            if big.pass {
                prop_assert!(small.pass);
            }
        }
    }
}
