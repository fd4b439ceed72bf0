//! Command dispatch for the `deadoil` binary.
//!
//! Every invocation either writes its artifacts or a one-line `error.json`
//! into the output directory, and returns one of the exit codes below.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use deadoil::coefficients::ValidationReport;
use deadoil::config::{parse_config, ProblemBundle};
use deadoil::control::fd_gradient_oracle;
use deadoil::io::{write_field_csv, write_json};
use deadoil::objective::CostBreakdown;
use deadoil::optimizer::{
    check_optimality, optimize_fixed_point, optimize_gradient_descent, Method, OptimizeReport,
};
use deadoil::profile::{parse_call, Profile};
use deadoil::random::SmoothRandom;
use deadoil::{Error, Result, SpaceTimeField};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;

pub const DEFAULT_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const DEFAULT_DIRECTION: &str = "random(0.1)";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Forward,
    Adjoint,
    Gradcheck,
    Optimize,
    ValidateCoeffs,
}

#[derive(Clone, Debug)]
pub struct Flags {
    /// Overrides `[output] dir`.
    pub out: Option<PathBuf>,
    pub eps: Vec<f64>,
    pub direction: String,
    pub seed: u64,
    pub assert_tol: Option<f64>,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            out: None,
            eps: DEFAULT_EPS.to_vec(),
            direction: DEFAULT_DIRECTION.to_string(),
            seed: DEFAULT_SEED,
            assert_tol: None,
        }
    }
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
    violations: Option<Box<ValidationReport>>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = if e.is_solver_failure() {
            (EXIT_SOLVER, "solver_failure")
        } else if matches!(e, Error::Io(_)) {
            (EXIT_CONFIG, "io")
        } else {
            (EXIT_CONFIG, "config")
        };
        let violations = match &e {
            Error::Hypotheses(rep) => Some(rep.clone()),
            _ => None,
        };
        Failure { code, kind, message: e.to_string(), violations }
    }
}

fn threshold(message: String) -> Failure {
    Failure { code: EXIT_THRESHOLD, kind: "threshold", message, violations: None }
}

/// Test direction for `gradcheck`: `random(scale)` draws a seeded smooth
/// field, anything else is a profile expression.
pub fn gradcheck_direction(expr: &str, seed: u64, bundle: &ProblemBundle) -> Result<SpaceTimeField> {
    if expr.trim_start().starts_with("random") {
        let (_, params) = parse_call(expr)?;
        let scale = match params.as_slice() {
            [] => 1.0,
            [s] => *s,
            _ => return Err(Error::Arity { name: "random".into(), expected: 1, got: params.len() }),
        };
        return Ok(SmoothRandom::new(seed).sample(&bundle.disc, scale));
    }
    Ok(Profile::parse(expr)?.sample_space_time(&bundle.disc))
}

#[derive(Serialize)]
struct GradcheckRow {
    eps: f64,
    fd_value: f64,
    adjoint_value: f64,
    rel_error: f64,
}

#[derive(Serialize)]
pub struct RunReport<'a> {
    pub version: u32,
    #[serde(flatten)]
    pub report: &'a OptimizeReport,
    pub grid: serde_json::Value,
    pub final_cost: CostBreakdown,
    pub optimality_residual: f64,
}

fn write_gradcheck(bundle: &ProblemBundle, flags: &Flags, out: &Path) -> std::result::Result<(), Failure> {
    let problem = bundle.problem();
    let h = gradcheck_direction(&flags.direction, flags.seed, bundle)?;
    let adjoint_value = problem.evaluate(&bundle.f0)?.gradient.pair(&h);
    let rows: Vec<GradcheckRow> = fd_gradient_oracle(&problem, &bundle.f0, &h, &flags.eps)?
        .into_iter()
        .map(|(eps, fd_value)| {
            let denom = fd_value.abs().max(f64::MIN_POSITIVE);
            let rel_error = if fd_value == adjoint_value { 0.0 } else { (adjoint_value - fd_value).abs() / denom };
            GradcheckRow { eps, fd_value, adjoint_value, rel_error }
        })
        .collect();
    let mut csv = String::from("eps,fd_value,adjoint_value,rel_error\n");
    for r in &rows {
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", r.eps, r.fd_value, r.adjoint_value, r.rel_error));
    }
    fs::write(out.join("gradcheck.csv"), csv).map_err(Error::from)?;
    let max_rel = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    write_json(
        &out.join("gradcheck.json"),
        &json!({
            "seed": flags.seed,
            "direction": flags.direction,
            "adjoint_value": adjoint_value,
            "max_rel_error": max_rel,
            "rows": rows,
        }),
    )?;
    if let Some(tol) = flags.assert_tol {
        if !(max_rel <= tol) {
            return Err(threshold(format!("gradcheck max rel_error {max_rel:.3e} exceeds {tol:.3e}")));
        }
    }
    Ok(())
}

fn write_optimize(bundle: &ProblemBundle, flags: &Flags, out: &Path) -> std::result::Result<(), Failure> {
    let problem = bundle.problem();
    let settings = &bundle.optimizer;
    let (f_star, report) = match settings.method {
        Method::GradientDescent => optimize_gradient_descent(&bundle.f0, &problem, &settings.descent)?,
        Method::FixedPoint => optimize_fixed_point(&bundle.f0, &problem, &settings.fixed_point)?,
    };
    write_field_csv(&out.join("f_star.csv"), &f_star)?;
    let residual = check_optimality(&f_star, &problem)?;
    let d = bundle.disc;
    let run = RunReport {
        version: 1,
        report: &report,
        grid: json!({ "nx": d.nx(), "ny": d.ny(), "nt": d.nt(), "T": d.t_final() }),
        final_cost: report.last().cost,
        optimality_residual: residual,
    };
    write_json(&out.join("report.json"), &run)?;
    if let Some(tol) = flags.assert_tol {
        if !(residual <= tol) {
            return Err(threshold(format!("optimality residual {residual:.3e} exceeds {tol:.3e}")));
        }
    }
    Ok(())
}

fn execute(command: Command, bundle: &ProblemBundle, flags: &Flags, out: &Path) -> std::result::Result<(), Failure> {
    let problem = bundle.problem();
    match command {
        Command::Forward | Command::Adjoint => {
            let state = problem.state(&bundle.f0)?;
            write_field_csv(&out.join("u.csv"), &state.u)?;
            write_field_csv(&out.join("p.csv"), &state.p)?;
            write_json(&out.join("cost.json"), &problem.cost_of_state(&state, &bundle.f0)?)?;
            if command == Command::Adjoint {
                let ev = problem.evaluate_with_state(&bundle.f0, state)?;
                write_field_csv(&out.join("e1.csv"), &ev.adjoint.e1)?;
                write_field_csv(&out.join("p1.csv"), &ev.adjoint.p1)?;
            }
            Ok(())
        }
        Command::Gradcheck => write_gradcheck(bundle, flags, out),
        Command::Optimize => write_optimize(bundle, flags, out),
        Command::ValidateCoeffs => Ok(write_json(&out.join("validation.json"), &bundle.validation)?),
    }
}

fn write_error(out: &Path, failure: &Failure) {
    let mut doc = json!({
        "exit_code": failure.code,
        "kind": failure.kind,
        "message": failure.message,
    });
    if let Some(rep) = &failure.violations {
        doc["violations"] = json!(rep.violations);
        doc["violation_count"] = json!(rep.violation_count);
    }
    let _ = fs::create_dir_all(out);
    if let Err(e) = fs::write(out.join("error.json"), format!("{doc}\n")) {
        eprintln!("cannot write error.json: {e}");
    }
}

/// Runs one command and returns its exit code. Without `--out` and with an
/// unreadable config, `error.json` lands in `out/` next to the config.
pub fn run_command(command: Command, config: &Path, flags: &Flags) -> i32 {
    let fallback = flags
        .out
        .clone()
        .unwrap_or_else(|| config.parent().unwrap_or_else(|| Path::new(".")).join("out"));
    let bundle = match parse_config(config) {
        Ok(b) => b,
        Err(e) => {
            let failure = Failure::from(e);
            if command == Command::ValidateCoeffs {
                if let Some(rep) = &failure.violations {
                    let _ = fs::create_dir_all(&fallback);
                    let _ = write_json(&fallback.join("validation.json"), rep);
                }
            }
            eprintln!("error: {}", failure.message);
            write_error(&fallback, &failure);
            return failure.code;
        }
    };
    let out = flags.out.clone().unwrap_or_else(|| bundle.output_dir.clone());
    let result = fs::create_dir_all(&out)
        .map_err(|e| Failure::from(Error::from(e)))
        .and_then(|()| execute(command, &bundle, flags, &out));
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            write_error(&out, &failure);
            failure.code
        }
    }
}
