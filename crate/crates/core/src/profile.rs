//! Analytic descriptions of initial data, targets, controls and test
//! directions.
//!
//! An expression is a spatial profile optionally multiplied by a temporal
//! factor, e.g. `sinprod(0.5)`, `bump(1, 0.3, 0.7, 0.2) * exp(-1)`.
//!
//! | profile                 | value                                   |
//! |-------------------------|-----------------------------------------|
//! | `zero`                  | 0                                       |
//! | `constant(c)`           | c                                       |
//! | `sinprod(a)`            | a sin(πx) sin(πy)                       |
//! | `polyprod(a)`           | a x(1−x) y(1−y)                         |
//! | `bump(a, x0, y0, r)`    | C∞ bump of height a and radius r        |
//!
//! | temporal factor | value        |
//! |-----------------|--------------|
//! | `exp(k)`        | e^{k t}      |
//! | `cos(w)`        | cos(w t)     |
//! | `lin(a, b)`     | a + b t      |

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::mesh::{Discretization, ScalarField, SpaceTimeField};

#[derive(Clone, Debug, PartialEq)]
pub enum Spatial {
    Zero,
    Constant(f64),
    SinProd(f64),
    PolyProd(f64),
    Bump { amplitude: f64, x0: f64, y0: f64, radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Temporal {
    Exp(f64),
    Cos(f64),
    Lin(f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub spatial: Spatial,
    pub temporal: Option<Temporal>,
}

/// Result of [`eval_profile`].
#[derive(Clone, Debug, PartialEq)]
pub enum ProfileField {
    Steady(ScalarField),
    SpaceTime(SpaceTimeField),
}

fn expect_arity(name: &str, params: &[f64], expected: usize) -> Result<()> {
    if params.len() != expected {
        return Err(Error::Arity { name: name.to_string(), expected, got: params.len() });
    }
    Ok(())
}

impl Spatial {
    pub fn new(name: &str, params: &[f64]) -> Result<Self> {
        let arity = match name {
            "zero" => 0,
            "constant" | "sinprod" | "polyprod" => 1,
            "bump" => 4,
            _ => return Err(Error::UnknownProfile(name.to_string())),
        };
        expect_arity(name, params, arity)?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite parameter in `{name}`")));
        }
        Ok(match name {
            "zero" => Spatial::Zero,
            "constant" => Spatial::Constant(params[0]),
            "sinprod" => Spatial::SinProd(params[0]),
            "polyprod" => Spatial::PolyProd(params[0]),
            _ => {
                let (amplitude, x0, y0, radius) = (params[0], params[1], params[2], params[3]);
                if !(radius > 0.0
                    && x0 - radius >= 0.0
                    && x0 + radius <= 1.0
                    && y0 - radius >= 0.0
                    && y0 + radius <= 1.0)
                {
                    return Err(Error::InvalidParameter(format!(
                        "bump support must be a disk inside the unit square, got center ({x0}, {y0}) radius {radius}"
                    )));
                }
                Spatial::Bump { amplitude, x0, y0, radius }
            }
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Spatial::Zero => 0.0,
            Spatial::Constant(c) => c,
            Spatial::SinProd(a) => a * (PI * x).sin() * (PI * y).sin(),
            Spatial::PolyProd(a) => a * x * (1.0 - x) * y * (1.0 - y),
            Spatial::Bump { amplitude, x0, y0, radius } => {
                let s = ((x - x0).powi(2) + (y - y0).powi(2)) / (radius * radius);
                if s < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether the profile has zero trace on the boundary of the square.
    pub fn vanishes_on_boundary(&self) -> bool {
        !matches!(*self, Spatial::Constant(c) if c != 0.0)
    }
}

impl Temporal {
    pub fn new(name: &str, params: &[f64]) -> Result<Self> {
        let arity = match name {
            "exp" | "cos" => 1,
            "lin" => 2,
            _ => return Err(Error::UnknownProfile(name.to_string())),
        };
        expect_arity(name, params, arity)?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite parameter in `{name}`")));
        }
        Ok(match name {
            "exp" => Temporal::Exp(params[0]),
            "cos" => Temporal::Cos(params[0]),
            _ => Temporal::Lin(params[0], params[1]),
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Temporal::Exp(k) => (k * t).exp(),
            Temporal::Cos(w) => (w * t).cos(),
            Temporal::Lin(a, b) => a + b * t,
        }
    }
}

/// Splits `name(a, b, ...)` (or a bare `name`) into its parts.
pub fn parse_call(src: &str) -> Result<(String, Vec<f64>)> {
    let s = src.trim();
    let Some(open) = s.find('(') else {
        if s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Parse(format!("expected `name(params)`, got `{s}`")));
        }
        return Ok((s.to_string(), Vec::new()));
    };
    if !s.ends_with(')') {
        return Err(Error::Parse(format!("missing `)` in `{s}`")));
    }
    let name = s[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::Parse(format!("bad name in `{s}`")));
    }
    let inner = s[open + 1..s.len() - 1].trim();
    let params = if inner.is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number `{}` in `{s}`", p.trim())))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok((name.to_string(), params))
}

impl Profile {
    pub fn steady(spatial: Spatial) -> Self {
        Self { spatial, temporal: None }
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut parts = src.split('*');
        let head = parts.next().unwrap_or_default();
        let (name, params) = parse_call(head)?;
        let spatial = Spatial::new(&name, &params)?;
        let temporal = match parts.next() {
            None => None,
            Some(t) => {
                let (name, params) = parse_call(t)?;
                Some(Temporal::new(&name, &params)?)
            }
        };
        if parts.next().is_some() {
            return Err(Error::Parse(format!("at most one temporal factor allowed in `{src}`")));
        }
        Ok(Self { spatial, temporal })
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        let s = self.spatial.eval(x, y);
        match &self.temporal {
            Some(tf) => s * tf.eval(t),
            None => s,
        }
    }

    /// Samples at time zero.
    pub fn sample(&self, disc: &Discretization) -> ScalarField {
        ScalarField::from_fn(*disc, |x, y| self.eval(x, y, 0.0))
    }

    pub fn sample_space_time(&self, disc: &Discretization) -> SpaceTimeField {
        SpaceTimeField::from_fn(*disc, |x, y, t| self.eval(x, y, t))
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.spatial {
            Spatial::Zero => write!(f, "zero")?,
            Spatial::Constant(c) => write!(f, "constant({c:?})")?,
            Spatial::SinProd(a) => write!(f, "sinprod({a:?})")?,
            Spatial::PolyProd(a) => write!(f, "polyprod({a:?})")?,
            Spatial::Bump { amplitude, x0, y0, radius } => {
                write!(f, "bump({amplitude:?}, {x0:?}, {y0:?}, {radius:?})")?
            }
        }
        match self.temporal {
            None => Ok(()),
            Some(Temporal::Exp(k)) => write!(f, " * exp({k:?})"),
            Some(Temporal::Cos(w)) => write!(f, " * cos({w:?})"),
            Some(Temporal::Lin(a, b)) => write!(f, " * lin({a:?}, {b:?})"),
        }
    }
}

/// Materializes a named spatial profile on the grid, either at `t = 0` or at
/// every time level.
pub fn eval_profile(
    name: &str,
    params: &[f64],
    disc: &Discretization,
    time_dependent: bool,
) -> Result<ProfileField> {
    let profile = Profile::steady(Spatial::new(name, params)?);
    Ok(if time_dependent {
        ProfileField::SpaceTime(profile.sample_space_time(disc))
    } else {
        ProfileField::Steady(profile.sample(disc))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steady(name: &str, params: &[f64], d: &Discretization) -> ScalarField {
        match eval_profile(name, params, d, false).unwrap() {
            ProfileField::Steady(f) => f,
            _ => unreachable!(),
        }
    }

    #[test]
    fn named_profiles() {
        let d = Discretization::new(17, 17, 4, 1.0).unwrap();
        assert_eq!(steady("zero", &[], &d).max_abs(), 0.0);
        // node 8 of 17 sits at x = 1/2
        let s = steady("sinprod", &[1.0], &d);
        assert!((s.at(8, 8) - 1.0).abs() < 1e-15);
        assert!((s.max() - 1.0).abs() < 1e-15);
        let p = steady("polyprod", &[1.0], &d);
        assert!((p.at(8, 8) - 1.0 / 16.0).abs() < 1e-15);
        match eval_profile("constant", &[2.0], &d, true).unwrap() {
            ProfileField::SpaceTime(f) => assert_eq!(f.frames().len(), 5),
            _ => unreachable!(),
        }
    }

    #[test]
    fn profile_errors() {
        let d = Discretization::new(5, 5, 4, 1.0).unwrap();
        assert!(matches!(eval_profile("gauss", &[], &d, false), Err(Error::UnknownProfile(_))));
        assert!(matches!(eval_profile("sinprod", &[], &d, false), Err(Error::Arity { .. })));
        assert!(Spatial::new("bump", &[1.0, 0.1, 0.5, 0.2]).is_err());
    }

    #[test]
    fn parse_expressions() {
        let p = Profile::parse("bump(2, 0.5, 0.5, 0.25) * exp(-1.5)").unwrap();
        assert_eq!(p.temporal, Some(Temporal::Exp(-1.5)));
        assert!((p.eval(0.5, 0.5, 1.0) - 2.0 * (-1.5f64).exp()).abs() < 1e-15);
        assert_eq!(Profile::parse("zero").unwrap().spatial, Spatial::Zero);
        assert_eq!(Profile::parse(" zero() ").unwrap().spatial, Spatial::Zero);
        for bad in ["", "sinprod(", "sinprod(x)", "sinprod(1)*exp(1)*exp(1)", "a b(1)"] {
            assert!(Profile::parse(bad).is_err(), "{bad}");
        }
        let again = Profile::parse(&p.to_string()).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn boundary_trace() {
        assert!(!Spatial::Constant(1.0).vanishes_on_boundary());
        assert!(Spatial::Constant(0.0).vanishes_on_boundary());
        assert!(Spatial::SinProd(3.0).vanishes_on_boundary());
        let b = Spatial::new("bump", &[1.0, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(b.eval(0.0, 0.5), 0.0);
        assert_eq!(b.eval(0.5, 0.5), 1.0);
    }
}
