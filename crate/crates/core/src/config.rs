//! Problem configuration files.
//!
//! ```ini
//! version = 1
//!
//! [grid]
//! nx = 17
//! ny = 17
//! nt = 16
//! T = 0.5
//!
//! [coefficients]
//! phi = smoothstep(1.0, 0.5)
//! g = smoothstep(0.0, 1.0)
//! d = rational(1.0, 0.5)
//! # c1, c2, c3 optional
//!
//! [penalty]
//! beta1 = 0.01
//! beta2 = 0.001
//! q0 = 1.5
//!
//! [data]
//! u0 = sinprod(0.8)
//! p0 = zero
//! U = sinprod(0.3) * exp(-1)
//! P = csv:targets_P.csv
//! # f0 optional, defaults to zero
//!
//! [optimizer]      # optional section
//! method = gradient_descent
//!
//! [validation]     # optional section
//! range = 10
//!
//! [output]         # optional section
//! dir = out
//! ```
//!
//! `#` and `;` start comments. Unknown sections or keys, duplicates and
//! missing required keys are errors. `csv:` paths are relative to the
//! directory of the configuration file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::coefficients::{validate_hypotheses, CoefficientModel, Family, HypothesisBounds, ValidationReport};
use crate::error::{Error, Result};
use crate::forward::InitialData;
use crate::io::{read_field_csv, read_frame_csv};
use crate::mesh::{Discretization, ScalarField, SpaceTimeField};
use crate::objective::PenaltyConfig;
use crate::optimizer::{DescentOptions, FixedPointOptions, Method};
use crate::problem::Problem;
use crate::profile::Profile;

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_VALIDATION_RANGE: f64 = 10.0;
pub const VALIDATION_SAMPLES: usize = 10001;

const SECTIONS: &[(&str, &[&str])] = &[
    ("", &["version"]),
    ("grid", &["nx", "ny", "nt", "T"]),
    ("coefficients", &["phi", "g", "d", "c1", "c2", "c3"]),
    ("penalty", &["beta1", "beta2", "q0"]),
    ("data", &["u0", "p0", "U", "P", "f0"]),
    (
        "optimizer",
        &["method", "max_iters", "grad_tol", "armijo_c", "shrink", "step0", "damping", "tol"],
    ),
    ("validation", &["range"]),
    ("output", &["dir"]),
];

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerSettings {
    pub method: Method,
    pub descent: DescentOptions,
    pub fixed_point: FixedPointOptions,
}

/// A parsed, validated configuration.
#[derive(Clone, Debug)]
pub struct ProblemBundle {
    pub disc: Discretization,
    pub model: CoefficientModel,
    pub pen: PenaltyConfig,
    pub u0: ScalarField,
    pub p0: ScalarField,
    pub u_target: SpaceTimeField,
    pub p_target: SpaceTimeField,
    pub f0: SpaceTimeField,
    pub optimizer: OptimizerSettings,
    pub validation: ValidationReport,
    pub output_dir: PathBuf,
}

impl ProblemBundle {
    pub fn problem(&self) -> Problem {
        Problem {
            model: self.model.clone(),
            pen: self.pen,
            initial: InitialData { u0: self.u0.clone(), p0: self.p0.clone() },
            u_target: self.u_target.clone(),
            p_target: self.p_target.clone(),
        }
    }
}

type Sections = BTreeMap<String, BTreeMap<String, (usize, String)>>;

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn tokenize(text: &str) -> Result<Sections> {
    let mut sections: Sections = BTreeMap::new();
    sections.insert(String::new(), BTreeMap::new());
    let mut current = String::new();
    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse(format!("line {lineno}: malformed section header")))?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| !s.is_empty() && *s == name) {
                return Err(Error::Parse(format!("line {lineno}: unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(Error::Parse(format!("line {lineno}: duplicate section [{name}]")));
            }
            sections.insert(name.to_string(), BTreeMap::new());
            current = name.to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {lineno}: expected `key = value`")))?;
        let (key, value) = (key.trim(), value.trim());
        let allowed = SECTIONS.iter().find(|(s, _)| *s == current).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            let at = if current.is_empty() { "top level".to_string() } else { format!("[{current}]") };
            return Err(Error::Parse(format!("line {lineno}: unknown key `{key}` at {at}")));
        }
        if value.is_empty() {
            return Err(Error::Parse(format!("line {lineno}: empty value for `{key}`")));
        }
        let entries = sections.get_mut(&current).expect("current section exists");
        if entries.contains_key(key) {
            return Err(Error::Parse(format!("line {lineno}: duplicate key `{key}`")));
        }
        entries.insert(key.to_string(), (lineno, value.to_string()));
    }
    Ok(sections)
}

struct Reader {
    sections: Sections,
}

impl Reader {
    fn get(&self, section: &str, key: &str) -> Option<&(usize, String)> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    fn required(&self, section: &str, key: &str) -> Result<&(usize, String)> {
        self.get(section, key).ok_or_else(|| {
            let at = if section.is_empty() { "top level".to_string() } else { format!("[{section}]") };
            Error::Parse(format!("missing key `{key}` at {at}"))
        })
    }

    fn parse_value<T: std::str::FromStr>(entry: &(usize, String), key: &str) -> Result<T> {
        entry
            .1
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad value `{}` for `{key}`", entry.0, entry.1)))
    }

    fn number<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T> {
        Self::parse_value(self.required(section, key)?, key)
    }

    fn optional<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        self.get(section, key).map(|e| Self::parse_value(e, key)).transpose()
    }

    fn family(&self, key: &str) -> Result<Family> {
        let (lineno, value) = self.required("coefficients", key)?;
        Family::parse(value).map_err(|e| Error::Parse(format!("line {lineno}: `{key}`: {e}")))
    }
}

fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read `{}`: {e}", path.display())))
}

fn space_time_data(r: &Reader, key: &str, disc: &Discretization, base: &Path) -> Result<Option<SpaceTimeField>> {
    let Some((lineno, value)) = r.get("data", key) else { return Ok(None) };
    let ctx = |e: Error| Error::Parse(format!("line {lineno}: `{key}`: {e}"));
    if let Some(path) = value.strip_prefix("csv:") {
        let text = read_text(&resolve(base, path.trim()))?;
        return read_field_csv(&text, disc).map(Some).map_err(ctx);
    }
    Ok(Some(Profile::parse(value).map_err(ctx)?.sample_space_time(disc)))
}

fn initial_data(r: &Reader, key: &str, disc: &Discretization, base: &Path) -> Result<ScalarField> {
    let (lineno, value) = r.required("data", key)?;
    let ctx = |e: Error| Error::Parse(format!("line {lineno}: `{key}`: {e}"));
    if let Some(path) = value.strip_prefix("csv:") {
        let text = read_text(&resolve(base, path.trim()))?;
        return read_frame_csv(&text, disc).map_err(ctx);
    }
    let profile = Profile::parse(value).map_err(ctx)?;
    if profile.temporal.is_some() {
        return Err(Error::Parse(format!("line {lineno}: `{key}` must not have a temporal factor")));
    }
    if !profile.spatial.vanishes_on_boundary() {
        return Err(Error::Parse(format!(
            "line {lineno}: `{key}` = `{value}` does not vanish on the boundary"
        )));
    }
    Ok(profile.sample(disc))
}

fn optimizer_settings(r: &Reader) -> Result<OptimizerSettings> {
    let method = match r.get("optimizer", "method") {
        None => Method::GradientDescent,
        Some((lineno, v)) => match v.as_str() {
            "gradient_descent" => Method::GradientDescent,
            "fixed_point" => Method::FixedPoint,
            other => {
                return Err(Error::Parse(format!(
                    "line {lineno}: unknown method `{other}` (expected gradient_descent or fixed_point)"
                )))
            }
        },
    };
    let mut descent = DescentOptions::default();
    let mut fixed_point = FixedPointOptions::default();
    if let Some(n) = r.optional::<usize>("optimizer", "max_iters")? {
        descent.max_iters = n;
        fixed_point.max_iters = n;
    }
    if let Some(v) = r.optional("optimizer", "grad_tol")? {
        descent.grad_tol = v;
    }
    if let Some(v) = r.optional("optimizer", "armijo_c")? {
        descent.armijo_c = v;
    }
    if let Some(v) = r.optional("optimizer", "shrink")? {
        descent.shrink = v;
    }
    if let Some(v) = r.optional("optimizer", "step0")? {
        descent.step0 = v;
    }
    if let Some(v) = r.optional("optimizer", "damping")? {
        fixed_point.damping = v;
    }
    if let Some(v) = r.optional("optimizer", "tol")? {
        fixed_point.tol = v;
    }
    descent.validate()?;
    fixed_point.validate()?;
    Ok(OptimizerSettings { method, descent, fixed_point })
}

/// Parses configuration text; `base` resolves relative paths.
pub fn parse_config_str(text: &str, base: &Path) -> Result<ProblemBundle> {
    let r = Reader { sections: tokenize(text)? };

    let version: u32 = r.number("", "version")?;
    if version != CONFIG_VERSION {
        return Err(Error::Parse(format!("unsupported config version {version}, expected {CONFIG_VERSION}")));
    }

    let disc = Discretization::new(
        r.number("grid", "nx")?,
        r.number("grid", "ny")?,
        r.number("grid", "nt")?,
        r.number("grid", "T")?,
    )?;

    let mut model = CoefficientModel::new(r.family("phi")?, r.family("g")?, r.family("d")?);
    model.bounds = HypothesisBounds {
        c1: r.optional("coefficients", "c1")?,
        c2: r.optional("coefficients", "c2")?,
        c3: r.optional("coefficients", "c3")?,
    };
    for (name, v) in [("c1", model.bounds.c1), ("c2", model.bounds.c2), ("c3", model.bounds.c3)] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parse(format!("`{name}` must be positive, got {v}")));
            }
        }
    }
    let range = r.optional("validation", "range")?.unwrap_or(DEFAULT_VALIDATION_RANGE);
    let validation = validate_hypotheses(&model, range, VALIDATION_SAMPLES)?;
    if !validation.pass {
        return Err(Error::Hypotheses(Box::new(validation)));
    }

    let pen = PenaltyConfig::new(
        r.number("penalty", "beta1")?,
        r.number("penalty", "beta2")?,
        r.number("penalty", "q0")?,
    )?;

    let u0 = initial_data(&r, "u0", &disc, base)?;
    let p0 = initial_data(&r, "p0", &disc, base)?;
    r.required("data", "U")?;
    r.required("data", "P")?;
    let u_target = space_time_data(&r, "U", &disc, base)?.expect("checked above");
    let p_target = space_time_data(&r, "P", &disc, base)?.expect("checked above");
    let f0 = space_time_data(&r, "f0", &disc, base)?.unwrap_or_else(|| SpaceTimeField::zeros(disc));

    let optimizer = optimizer_settings(&r)?;
    let output_dir = resolve(base, r.get("output", "dir").map(|e| e.1.as_str()).unwrap_or("out"));

    Ok(ProblemBundle { disc, model, pen, u0, p0, u_target, p_target, f0, optimizer, validation, output_dir })
}

pub fn parse_config(path: &Path) -> Result<ProblemBundle> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config_str(&text, base)
}
