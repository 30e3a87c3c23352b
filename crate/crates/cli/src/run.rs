//! Command dispatch, run reports and output files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use subglue::capacity::{circle_samples, equilibrium_weights, fekete_capacity, node_points, write_points, OptParams};
use subglue::field::{is_harmonic_on, is_subharmonic_on, write_field};
use subglue::gluing::{glue_basic, glue_full, glue_green, glue_quantitative, glue_two, GreenGlueInput};
use subglue::harmonic::{green_function, green_min_constant};
use subglue::{
    CheckKind, Error, GlueConstants, GlueResult, GridDomain, NodeSet, ScalarField, Tolerance,
    ToleranceOverride, VerificationReport,
};

use crate::config::{CapacityMethod, Command, ConfigError, Scene, VerifyCheck};
use crate::render::{render, RangePolicy};

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Certified,
    ParseError,
    PreconditionFailure,
    CertificationFailure,
    InternalError,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Certified => 0,
            Status::ParseError => 2,
            Status::PreconditionFailure => 3,
            Status::CertificationFailure => 4,
            Status::InternalError => 5,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub tol: Option<f64>,
    pub render: bool,
    pub seed: Option<u64>,
}

fn ser_num<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn ser_opt_num<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => ser_num(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    #[serde(serialize_with = "ser_num")]
    pub worst_violation: f64,
    pub worst_location: Option<Vec<f64>>,
    #[serde(serialize_with = "ser_num")]
    pub tolerance: f64,
    pub checked: usize,
    pub detail: String,
}

impl From<&VerificationReport> for CheckRecord {
    fn from(r: &VerificationReport) -> Self {
        CheckRecord {
            name: r.name.clone(),
            kind: r.kind,
            passed: r.passed,
            worst_violation: r.worst_violation,
            worst_location: r.worst_location.clone(),
            tolerance: r.tolerance,
            checked: r.checked,
            detail: r.detail.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsRecord {
    #[serde(rename = "M_v", serialize_with = "ser_num")]
    pub upper_v: f64,
    #[serde(rename = "m_v", serialize_with = "ser_num")]
    pub lower_v: f64,
    #[serde(rename = "M_g", serialize_with = "ser_num")]
    pub upper_g: f64,
    #[serde(rename = "m_g", serialize_with = "ser_num")]
    pub lower_g: f64,
    #[serde(serialize_with = "ser_opt_num")]
    pub scale: Option<f64>,
}

impl ConstantsRecord {
    fn new(c: &GlueConstants, scale: Option<f64>) -> Self {
        ConstantsRecord {
            upper_v: c.upper_v,
            lower_v: c.lower_v,
            upper_g: c.upper_g,
            lower_g: c.lower_g,
            scale,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord {
    pub module: &'static str,
    pub stage: Option<String>,
    pub message: String,
}

/// Everything a run produced, serialized as `report.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: Status,
    pub exit_code: i32,
    pub parameters: Option<Command>,
    pub seed: Option<u64>,
    pub constants: Option<ConstantsRecord>,
    pub tolerance: Option<Tolerance>,
    pub checks: Vec<CheckRecord>,
    pub outputs: Vec<String>,
    pub details: Option<serde_json::Value>,
    pub error: Option<ErrorRecord>,
}

impl RunReport {
    fn new(command: &str, parameters: Option<Command>, seed: Option<u64>) -> RunReport {
        RunReport {
            command: command.to_string(),
            status: Status::Certified,
            exit_code: 0,
            parameters,
            seed,
            constants: None,
            tolerance: None,
            checks: Vec::new(),
            outputs: Vec::new(),
            details: None,
            error: None,
        }
    }

    fn set_status(&mut self, s: Status) {
        self.status = s;
        self.exit_code = s.code();
    }

    /// Report for a scene file that failed to parse or resolve.
    pub fn parse_failure(err: &ConfigError, seed: Option<u64>) -> RunReport {
        let mut r = RunReport::new("unknown", None, seed);
        r.set_status(Status::ParseError);
        r.error = Some(ErrorRecord {
            module: "cli",
            stage: Some("config".into()),
            message: err.to_string(),
        });
        r
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// One human-readable line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<5} {:<12} {:<28} worst {:.3e} tol {:.3e}\n",
                if c.passed { "ok" } else { "FAIL" },
                format!("{:?}", c.kind).to_lowercase(),
                c.name,
                c.worst_violation,
                c.tolerance
            ));
        }
        if let Some(e) = &self.error {
            out.push_str(&format!(
                "error [{}{}]: {}\n",
                e.module,
                e.stage.as_deref().map(|s| format!("/{s}")).unwrap_or_default(),
                e.message
            ));
        }
        out.push_str(&format!("{} ({}): {:?}\n", self.command, self.exit_code, self.status));
        out
    }
}

/// Write `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, &target)?;
    Ok(target)
}

fn module_of(cmd: &Command) -> &'static str {
    match cmd {
        Command::Green { .. } => "harmonic",
        Command::Capacity { .. } => "capacity",
        Command::Verify { .. } => "field",
        _ => "gluing",
    }
}

fn classify(e: &Error) -> Status {
    match e.root() {
        Error::NoConvergence { .. } | Error::Io(_) | Error::UndefinedArithmetic(_) | Error::Format(_) => {
            Status::InternalError
        }
        _ => Status::PreconditionFailure,
    }
}

fn stage_of(e: &Error) -> Option<String> {
    let mut stages = Vec::new();
    let mut cur = e;
    while let Error::Stage { stage, source } = cur {
        stages.push(*stage);
        cur = source;
    }
    (!stages.is_empty()).then(|| stages.join("/"))
}

enum Failure {
    Config(ConfigError),
    Core(Error),
    Io(io::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

struct Outputs<'a> {
    opts: &'a RunOptions,
    written: Vec<String>,
}

impl Outputs<'_> {
    fn bytes(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        write_atomic(&self.opts.out, name, bytes)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn field(&mut self, stem: &str, f: &ScalarField) -> Result<(), Failure> {
        let mut buf = Vec::new();
        write_field(f, &mut buf)?;
        self.bytes(&format!("{stem}.txt"), &buf)?;
        if self.opts.render {
            let img = render(f, RangePolicy::Finite);
            if let Some(w) = &img.warning {
                eprintln!("warning: {stem}: {w}");
            }
            self.bytes(&format!("{stem}.pgm"), img.to_pgm().as_bytes())?;
        }
        Ok(())
    }
}

fn status_from_checks(checks: &[CheckRecord]) -> Status {
    if checks.iter().any(|c| c.kind == CheckKind::Hypothesis && !c.passed) {
        Status::PreconditionFailure
    } else if checks.iter().any(|c| !c.passed) {
        Status::CertificationFailure
    } else {
        Status::Certified
    }
}

fn tolerance_override(scene: &Scene, opts: &RunOptions) -> ToleranceOverride {
    let mut t = scene.config.tolerance_override();
    if let Some(x) = opts.tol {
        t.laplacian = Some(x);
        t.value = Some(x);
    }
    t
}

fn domain(scene: &Scene, key: &str, src: &str) -> Result<GridDomain, Failure> {
    let set = scene.set(key, src)?;
    if set.is_empty() {
        return Err(Failure::Core(Error::EmptyDomain));
    }
    Ok(GridDomain::from_set(scene.lattice.clone(), &set)?)
}

fn record_glue(report: &mut RunReport, out: &mut Outputs<'_>, r: &GlueResult) -> Result<(), Failure> {
    report.checks = r.reports.iter().map(CheckRecord::from).collect();
    report.tolerance = Some(r.tolerance);
    report.constants = r.constants.as_ref().map(|c| ConstantsRecord::new(c, r.scale));
    out.field("field", &r.field)?;
    if let Some(c) = &r.continued {
        out.field("continued", c)?;
    }
    if let Some(g) = &r.green {
        out.field("green", g.field())?;
        let meta = g.meta(r.constants.map(|c| c.upper_g));
        let mut text = serde_json::to_string_pretty(&meta).expect("meta serializes");
        text.push('\n');
        out.bytes("green.meta.json", text.as_bytes())?;
    }
    Ok(())
}

fn execute(scene: &Scene, opts: &RunOptions, report: &mut RunReport, out: &mut Outputs<'_>) -> Result<(), Failure> {
    let tol = tolerance_override(scene, opts);
    let params = scene.config.solver_params();
    match &scene.config.command {
        Command::GlueBasic { u, u0 } => {
            let r = glue_basic(scene.field(u), scene.field(u0), tol)?;
            record_glue(report, out, &r)?;
        }
        Command::GlueTwo { v, v0 } => {
            let r = glue_two(scene.field(v), scene.field(v0), tol)?;
            record_glue(report, out, &r)?;
        }
        Command::GlueQuant {
            v,
            g,
            upper_v,
            lower_v,
            upper_g,
            lower_g,
        } => {
            let c = GlueConstants::new(*upper_v, *lower_v, *upper_g, *lower_g);
            report.constants = Some(ConstantsRecord::new(&c, None));
            let r = glue_quantitative(scene.field(v), scene.field(g), &c, tol)?;
            record_glue(report, out, &r)?;
        }
        Command::GlueGreen {
            v,
            s0,
            s,
            d,
            pole,
            lower_v,
            upper_v,
        } => {
            let s0 = scene.set("command.s0", s0)?;
            let s = scene.set("command.s", s)?;
            let d = domain(scene, "command.d", d)?;
            let input = GreenGlueInput {
                v: scene.field(v),
                s0: &s0,
                s: &s,
                d: &d,
                pole: scene.point("command.pole", pole)?,
                lower_v: *lower_v,
                upper_v: *upper_v,
            };
            let r = glue_green(&input, &params, tol)?;
            record_glue(report, out, &r)?;
        }
        Command::GlueFull { v, s0, pole, r, upper_v } => {
            let s0 = scene.set("command.s0", s0)?;
            let pole = scene.point("command.pole", pole)?;
            let res = glue_full(scene.field(v), &s0, &pole, *r, *upper_v, &params, tol)?;
            record_glue(report, out, &res)?;
        }
        Command::Green { domain: d, pole, s0 } => {
            let d = domain(scene, "command.domain", d)?;
            let pole = scene.point("command.pole", pole)?;
            let g = green_function(&d, &pole, &params).map_err(|e| e.at_stage("green"))?;
            let lattice = &scene.lattice;
            let h = lattice.spacing();
            let mut core = d.interior();
            core.remove(g.pole_node());
            let far = NodeSet::from_fn(lattice.len(), |i| {
                core.contains(i) && lattice.point(i).dist(&g.pole_point()) > 3.0 * h
            });
            let t = tol.resolve(|| Tolerance::estimate(&[(g.field(), Some(&far))]));
            let mut harm = is_harmonic_on(g.field(), Some(&core), t.laplacian);
            harm.name = "harmonic".into();
            let mut zero = VerificationReport::new("zero-outside", CheckKind::Test, 0.0);
            let dset = d.interior();
            for i in g.field().domain().active_indices() {
                if !dset.contains(i) {
                    zero.record(g.field().raw()[i].abs(), Some(lattice.point(i).coords()));
                }
            }
            let zero = zero.with_detail("g vanishes exactly off the interior of D");
            let mut checks = vec![harm, zero];
            let mut m_g = None;
            if let Some(s0) = s0 {
                let s0 = scene.set("command.s0", s0)?;
                let m = green_min_constant(&g, &s0).map_err(|e| e.at_stage("green-minimum"))?;
                m_g = Some(m);
                let mut mp = VerificationReport::new("minimum-principle", CheckKind::Test, 1e-6);
                for i in s0.iter() {
                    if i != g.pole_node() {
                        mp.record((m - g.field().raw()[i]).max(0.0), Some(lattice.point(i).coords()));
                    }
                }
                checks.push(mp.with_detail(format!("g >= M_g = {m} on S0 minus the pole")));
            }
            report.checks = checks.iter().map(CheckRecord::from).collect();
            report.tolerance = Some(t);
            out.field("green", g.field())?;
            let mut text = serde_json::to_string_pretty(&g.meta(m_g)).expect("meta serializes");
            text.push('\n');
            out.bytes("green.meta.json", text.as_bytes())?;
        }
        Command::Capacity { method, set, circle, n } => {
            let (points, d) = match (set, circle) {
                (Some(s), _) => {
                    let s = scene.set("command.set", s)?;
                    (node_points(&scene.lattice, &s), scene.config.dim())
                }
                (None, Some(c)) => {
                    let centre = scene.point("command.circle", &c[..2])?;
                    (circle_samples(&centre, c[2], c[3] as usize)?, 2)
                }
                (None, None) => unreachable!("validated"),
            };
            let opt = OptParams::default();
            let (energy, chosen, weights) = match method {
                CapacityMethod::Fekete => {
                    let f = fekete_capacity(&points, n.expect("validated"), &opt)?;
                    (f.report, f.points, None)
                }
                CapacityMethod::Equilibrium => {
                    let eq = equilibrium_weights(&points, d, &opt)?;
                    (eq.report, points, Some(eq.measure.weights().to_vec()))
                }
            };
            let conv = VerificationReport::verdict(
                "converged",
                CheckKind::Test,
                energy.converged,
                format!("{} iterations", energy.iterations),
            );
            report.checks = vec![CheckRecord::from(&conv)];
            report.details = Some(serde_json::json!({
                "energy": energy.energy,
                "capacity": energy.capacity,
                "iterations": energy.iterations,
                "converged": energy.converged,
                "weights": weights,
            }));
            let mut buf = Vec::new();
            write_points(&chosen, &mut buf)?;
            out.bytes("points.txt", &buf)?;
        }
        Command::Verify { field, check, region } => {
            let f = scene.field(field);
            let region = match region {
                Some(r) => Some(scene.set("command.region", r)?),
                None => None,
            };
            let t = tol.resolve(|| Tolerance::estimate(&[(f, region.as_ref())]));
            let rep = match check {
                VerifyCheck::Subharmonic => is_subharmonic_on(f, region.as_ref(), t.laplacian),
                VerifyCheck::Harmonic => is_harmonic_on(f, region.as_ref(), t.laplacian),
            };
            report.checks = vec![CheckRecord::from(&rep)];
            report.tolerance = Some(t);
        }
    }
    Ok(())
}

/// Run the scene's command, write its outputs under `opts.out` and return
/// the report (already written as `report.json`).
pub fn run(scene: &Scene, opts: &RunOptions) -> io::Result<RunReport> {
    let cmd = &scene.config.command;
    let mut report = RunReport::new(cmd.name(), Some(cmd.clone()), opts.seed);
    let mut out = Outputs {
        opts,
        written: Vec::new(),
    };
    match execute(scene, opts, &mut report, &mut out) {
        Ok(()) => report.set_status(status_from_checks(&report.checks)),
        Err(Failure::Core(e)) => {
            if let Error::Hypothesis(rep) = e.root() {
                report.checks.push(CheckRecord::from(rep.as_ref()));
            }
            report.set_status(classify(&e));
            report.error = Some(ErrorRecord {
                module: module_of(cmd),
                stage: stage_of(&e),
                message: e.to_string(),
            });
        }
        Err(Failure::Config(e)) => {
            report.set_status(Status::ParseError);
            report.error = Some(ErrorRecord {
                module: "cli",
                stage: Some("config".into()),
                message: e.to_string(),
            });
        }
        Err(Failure::Io(e)) => return Err(e),
    }
    out.written.push("report.json".into());
    report.outputs = out.written;
    write_atomic(&opts.out, "report.json", report.to_json().as_bytes())?;
    Ok(report)
}
