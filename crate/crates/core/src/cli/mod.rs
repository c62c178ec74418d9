//! Batch front end: reads a JSON request, runs one command and writes JSON
//! and CSV artifacts into the output directory.

pub mod json;
pub mod requests;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::expr::{Expression, VectorField};
use crate::extension::{
    common_majorant, domain_estimate, fmt_csv, integrability_report, IntegrabilityOptions, DEFAULT_RADIUS_ORDER,
};
use crate::flow::{certify, flow_observable, flow_trajectory, CertifyOptions, FlowCertificate};
use crate::geometry::{Polydisc, DEFAULT_SAFETY};
use crate::oracle::{run_worked_examples, verify_all, ExperimentReport, DEFAULT_SEED};
use crate::seminorm::{seminorm_field, seminorm_function, seminorm_operator, SeminormConfig, DEFAULT_MAX_ORDER};
use crate::timevarying::StepField;
use requests::{interval, parse, ExtendRequest, FlowRequest, SeminormRequest, Versioned};

pub const DEFAULT_TAIL: f64 = 1e-12;
pub const DEFAULT_RADIUS: f64 = 0.5;
pub const DEFAULT_OUT: &str = "anaflow-out";
pub const DEFAULT_TRAJECTORY_TIMES: usize = 11;

pub const EXIT_SCHEMA: i32 = 1;
pub const EXIT_CERTIFICATION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Certified flow of a field from a set of initial points
    Flow,
    /// Analytic seminorm of a function or field on a box
    Seminorm,
    /// Radii of holomorphic extension, integrability and common majorants
    Extend,
    /// Convergence certificate without point evaluation
    Certify,
    /// Run every verification suite
    Verify,
    /// Reproduce the worked examples
    Examples,
}

impl Command {
    fn needs_input(self) -> bool {
        matches!(self, Command::Flow | Command::Seminorm | Command::Extend | Command::Certify)
    }
}

#[derive(Debug, Parser)]
#[command(name = "anaflow", version, about = "Series flows of real analytic vector fields with seminorm certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON request file
    #[arg(long, global = true, env = "ANAFLOW_INPUT")]
    pub input: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, env = "ANAFLOW_OUT", default_value = DEFAULT_OUT)]
    pub out: PathBuf,
    /// Truncation order: seminorm horizon, or maximum series order
    #[arg(long, global = true, env = "ANAFLOW_ORDER")]
    pub order: Option<usize>,
    /// Target tail bound per certified subinterval
    #[arg(long, global = true, env = "ANAFLOW_TAIL")]
    pub tail: Option<f64>,
    /// Polydisc radius (overrides the request)
    #[arg(long, global = true, env = "ANAFLOW_RADIUS")]
    pub radius: Option<f64>,
    /// Samples per box axis (overrides the request)
    #[arg(long, global = true, env = "ANAFLOW_GRID")]
    pub grid: Option<usize>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "ANAFLOW_THREADS")]
    pub threads: Option<usize>,
    /// Seed of the randomized verification suites
    #[arg(long, global = true, env = "ANAFLOW_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

/// Everything one run depends on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub order: Option<usize>,
    pub tail: Option<f64>,
    pub radius: Option<f64>,
    pub grid: Option<usize>,
    pub threads: Option<usize>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            input: None,
            out: PathBuf::from(DEFAULT_OUT),
            order: None,
            tail: None,
            radius: None,
            grid: None,
            threads: None,
            seed: DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::invalid(format!("--{name} must be positive"))),
            _ => Ok(()),
        };
        positive("tail", self.tail)?;
        positive("radius", self.radius)?;
        for (name, v) in [("order", self.order), ("grid", self.grid), ("threads", self.threads)] {
            if v == Some(0) {
                return Err(Error::invalid(format!("--{name} must be positive")));
            }
        }
        if self.command.needs_input() && self.input.is_none() {
            return Err(Error::invalid(format!(
                "`{}` needs --input",
                serde_json::to_value(self.command)?.as_str().unwrap_or("command")
            )));
        }
        Ok(())
    }
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        RunConfig {
            command: c.command,
            input: c.input,
            out: c.out,
            order: c.order,
            tail: c.tail,
            radius: c.radius,
            grid: c.grid,
            threads: c.threads,
            seed: c.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
    /// Machine-readable error document, when the run failed.
    pub error: Option<String>,
}

/// Exit status for an error raised while running `command`.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::Mismatch(_) | Error::Invalid(_) | Error::Io(_) => {
            EXIT_SCHEMA
        }
        _ => EXIT_CERTIFICATION,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Syntax { .. } => "syntax",
        Error::UnknownIdentifier { .. } => "unknown_identifier",
        Error::Domain { .. } => "domain",
        Error::HorizonExceeded { .. } => "horizon_exceeded",
        Error::Mismatch(_) => "mismatch",
        Error::DegreeBudget { .. } => "degree_budget",
        Error::NotExtendable { .. } => "not_extendable",
        Error::TailUnreachable { .. } => "tail_unreachable",
        Error::BlowUp { .. } => "blow_up",
        Error::CertificateMismatch(_) => "certificate_mismatch",
        Error::SizeGuard(_) => "size_guard",
        Error::Invalid(_) => "invalid",
        Error::Io(_) => "io",
    }
}

pub fn error_document(e: &Error, code: i32) -> String {
    let doc = json!({
        "schema": json::SCHEMA_VERSION,
        "kind": "error",
        "error": { "kind": error_kind(e), "message": e.to_string(), "exit_code": code },
    });
    json::to_string(&doc).unwrap_or_else(|_| format!("{{\"schema\": 1, \"kind\": \"error\", \"exit_code\": {code}}}\n"))
}

/// Runs one command. Failures become a nonzero exit code and an
/// `error.json` in the output directory.
pub fn run(cfg: &RunConfig) -> RunOutcome {
    let mut artifacts = Vec::new();
    let result = cfg.validate().and_then(|_| {
        if let Some(n) = cfg.threads {
            // a global pool may already exist (e.g. in tests); keep it then
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        fs::create_dir_all(&cfg.out)?;
        dispatch(cfg, &mut artifacts)
    });
    match result {
        Ok(code) => RunOutcome {
            exit_code: code,
            artifacts,
            error: None,
        },
        Err(e) => {
            let code = exit_code(&e);
            let doc = error_document(&e, code);
            let path = cfg.out.join("error.json");
            if fs::create_dir_all(&cfg.out).and_then(|_| fs::write(&path, &doc)).is_ok() {
                artifacts.push(path);
            }
            RunOutcome {
                exit_code: code,
                artifacts,
                error: Some(doc),
            }
        }
    }
}

fn write(out: &mut Vec<PathBuf>, path: PathBuf, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(&path, text)?;
    out.push(path);
    Ok(())
}

fn write_doc<T: Serialize>(out: &mut Vec<PathBuf>, path: PathBuf, kind: &str, payload: &T) -> Result<()> {
    let text = json::to_string(&json::document(kind, payload)?)?;
    write(out, path, &text)
}

fn read_input(cfg: &RunConfig) -> Result<String> {
    let path = cfg.input.as_ref().ok_or_else(|| Error::invalid("missing --input"))?;
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn dispatch(cfg: &RunConfig, out: &mut Vec<PathBuf>) -> Result<i32> {
    match cfg.command {
        Command::Flow => run_flow(cfg, out, true),
        Command::Certify => run_flow(cfg, out, false),
        Command::Seminorm => run_seminorm(cfg, out),
        Command::Extend => run_extend(cfg, out),
        Command::Verify => run_reports(&cfg.out.join("verify"), out, verify_all(cfg.seed), cfg.seed),
        Command::Examples => run_reports(&cfg.out.join("examples"), out, run_worked_examples(), cfg.seed),
    }
}

fn certify_request(cfg: &RunConfig, req: &FlowRequest) -> Result<(StepField, FlowCertificate)> {
    req.validate()?;
    let t = interval(req.interval)?;
    let x = req.field.step_field(t)?;
    let mut k = req.domain.clone();
    if let Some(g) = cfg.grid {
        k = k.with_grid(g);
    }
    k.validate()?;
    let d = cfg.radius.or(req.polydisc_radius).unwrap_or(DEFAULT_RADIUS);
    let v = Polydisc::new(k.clone(), d)?.with_safety(req.safety.unwrap_or(DEFAULT_SAFETY));
    let f = match &req.observable {
        Some(s) => Expression::parse(s, x.dim())?,
        None => Expression::var(x.dim(), 0),
    };
    let tail = cfg.tail.or(req.target_tail).unwrap_or(DEFAULT_TAIL);
    let opts = CertifyOptions {
        max_order: cfg.order.unwrap_or(crate::flow::MAX_SERIES_ORDER),
        ..Default::default()
    };
    let cert = certify(&x, t, &k, &v, &f, tail, &opts)?;
    Ok((x, cert))
}

fn run_flow(cfg: &RunConfig, out: &mut Vec<PathBuf>, evaluate: bool) -> Result<i32> {
    let req: FlowRequest = parse(&read_input(cfg)?)?;
    let (x, cert) = certify_request(cfg, &req)?;
    write_doc(out, cfg.out.join("certificate.json"), "certificate", &cert)?;
    if !evaluate {
        return Ok(0);
    }
    let t = cert.interval;
    let times = req.times.clone().unwrap_or_else(|| {
        let n = DEFAULT_TRAJECTORY_TIMES;
        (0..n)
            .map(|i| if i == n - 1 { t.end } else { t.start + t.len() * i as f64 / (n - 1) as f64 })
            .collect()
    });
    let points = if req.points.is_empty() { vec![cert.domain.center()] } else { req.points.clone() };
    let mut csv = String::from("point,t");
    for i in 1..=x.dim() {
        let _ = write!(csv, ",x{i}");
    }
    csv.push_str(",residual_bound,observable,observable_bound\n");
    let mut summary = Vec::new();
    for (pi, p) in points.iter().enumerate() {
        let traj = flow_trajectory(&x, t.start, &times, p, &cert)?;
        for fp in &traj {
            let obs = flow_observable(&x, t.start, fp.t, p, &cert.observable, &cert)?;
            let _ = write!(csv, "{pi},{}", fmt_csv(fp.t));
            for c in &fp.point {
                let _ = write!(csv, ",{}", fmt_csv(*c));
            }
            let _ = writeln!(csv, ",{},{},{}", fmt_csv(fp.residual_bound), fmt_csv(obs.value), fmt_csv(obs.residual_bound));
        }
        summary.push(json!({ "initial": p, "final": traj.last() }));
    }
    write(out, cfg.out.join("trajectory.csv"), &csv)?;
    write_doc(
        out,
        cfg.out.join("flow.json"),
        "flow",
        &json!({
            "subintervals": cert.subintervals.len(),
            "order": cert.order,
            "total_tail": cert.total_tail,
            "points": summary,
        }),
    )?;
    Ok(0)
}

fn run_seminorm(cfg: &RunConfig, out: &mut Vec<PathBuf>) -> Result<i32> {
    let req: SeminormRequest = parse(&read_input(cfg)?)?;
    req.validate()?;
    let mut k = req.domain.clone();
    if let Some(g) = cfg.grid {
        k = k.with_grid(g);
    }
    k.validate()?;
    let order = cfg.order.unwrap_or(DEFAULT_MAX_ORDER);
    let a = req.weights.build(order)?;
    let majorant = match cfg.radius.or(req.polydisc_radius) {
        Some(d) => Some(Polydisc::new(k.clone(), d)?),
        None => None,
    };
    let sc = SeminormConfig {
        max_order: order,
        majorant,
    };
    let n = k.dim();
    let value = match (&req.function, &req.field) {
        (Some(f), None) => {
            let f = Expression::parse(f, n)?;
            match &req.apply_field {
                Some(c) => {
                    let texts: Vec<&str> = c.iter().map(String::as_str).collect();
                    seminorm_operator(&VectorField::parse(&texts)?, &f, &k, &a, req.t, &sc)?
                }
                None => seminorm_function(&f, &k, &a, req.t, &sc)?,
            }
        }
        (None, Some(c)) => {
            let texts: Vec<&str> = c.iter().map(String::as_str).collect();
            seminorm_field(&VectorField::parse(&texts)?, &k, &a, req.t, &sc)?
        }
        _ => return Err(Error::invalid("give exactly one of `function` and `field`")),
    };
    write_doc(out, cfg.out.join("seminorm.json"), "seminorm", &json!({ "order": order, "result": value }))?;
    Ok(0)
}

fn run_extend(cfg: &RunConfig, out: &mut Vec<PathBuf>) -> Result<i32> {
    let req: ExtendRequest = parse(&read_input(cfg)?)?;
    req.validate()?;
    let mut k = req.domain.clone();
    if let Some(g) = cfg.grid {
        k = k.with_grid(g);
    }
    k.validate()?;
    let texts: Vec<&str> = req.field.iter().map(String::as_str).collect();
    let x = VectorField::parse(&texts)?;
    let times = req.times.clone().unwrap_or_else(|| vec![0.0]);
    let est = domain_estimate(&x, &k, &times, req.radius_order.unwrap_or(DEFAULT_RADIUS_ORDER))?;
    let mut doc = json!({ "domain": est });
    let radius = cfg.radius.or(req.polydisc_radius).or(est.polydisc_radius);
    let safety = req.safety.unwrap_or(DEFAULT_SAFETY);
    if let Some(t) = req.interval {
        let t = interval(t)?;
        let d = radius.ok_or_else(|| Error::invalid("integrability needs a polydisc radius"))?;
        let v = Polydisc::new(k.clone(), d)?.with_safety(safety);
        let order = cfg.order.unwrap_or(DEFAULT_MAX_ORDER);
        let opts = IntegrabilityOptions {
            time_points: req.time_points.unwrap_or(101),
            max_order: order,
        };
        let a = req.weights.build(2 * order)?;
        let rep = integrability_report(&x, t, &k, &a, &v, &opts)?;
        write(out, cfg.out.join("integrability.csv"), &rep.to_csv())?;
        doc["integrability"] = serde_json::to_value(&rep)?;
    }
    if let Some(family) = &req.family {
        let t = interval(req.interval.unwrap_or([0.0, 1.0]))?;
        let members = family
            .iter()
            .map(|c| {
                let texts: Vec<&str> = c.iter().map(String::as_str).collect();
                StepField::constant(VectorField::parse(&texts)?, t)
            })
            .collect::<Result<Vec<_>>>()?;
        let grid = req.d_grid.clone().unwrap_or_else(|| vec![0.0625, 0.125, 0.25, 0.5, 1.0]);
        doc["majorant"] = serde_json::to_value(common_majorant(&members, &k, &grid, safety)?)?;
    }
    write_doc(out, cfg.out.join("extend.json"), "extend", &doc)?;
    Ok(0)
}

fn run_reports(dir: &Path, out: &mut Vec<PathBuf>, reports: Vec<ExperimentReport>, seed: u64) -> Result<i32> {
    let mut summary = Vec::new();
    for r in &reports {
        write_doc(out, dir.join(format!("{}.json", r.name)), "experiment_report", r)?;
        write(out, dir.join(format!("{}.csv", r.name)), &r.to_csv())?;
        summary.push(json!({ "name": r.name, "pass": r.pass, "cases": r.cases.len(), "failed": r.failures().count() }));
    }
    let all = reports.iter().all(|r| r.pass);
    write_doc(out, dir.join("summary.json"), "summary", &json!({ "seed": seed, "pass": all, "suites": summary }))?;
    Ok(if all { 0 } else { EXIT_VERIFICATION })
}
