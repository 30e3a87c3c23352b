//! Scene files: a TOML document with `[grid]`, `[sets]`, `[fields]`,
//! optional `[solver]` and `[tolerance]` tables, and one `[command]`.
//!
//! ```toml
//! [grid]
//! origin = [-1.0, -1.0]
//! spacing = 0.0078125
//! shape = [257, 257]
//!
//! [sets]
//! O = "ball (0, 0) 1"
//! S0 = "closed_ball (0, 0) 0.15"
//!
//! [fields.v]
//! on = "O - S0"
//! expr = "kernel 2 (0, 0)"
//!
//! [command]
//! run = "glue-full"
//! v = "v"
//! s0 = "S0"
//! pole = [0.0, 0.0]
//! r = 0.3
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subglue::field::read_field;
use subglue::geometry::{Ball, Shape};
use subglue::kernels::fundamental_kernel;
use subglue::{GridDomain, Lattice, NodeSet, Point, ScalarField, SolverParams, ToleranceOverride};
use thiserror::Error;

use crate::expr::{ExprError, FieldExpr, SetExpr};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{key}: {source}")]
    Expression {
        key: String,
        #[source]
        source: ExprError,
    },
    #[error("{key}: unresolved {kind} `{name}`")]
    Unresolved {
        key: String,
        kind: &'static str,
        name: String,
    },
    #[error("{key}: definition cycle through `{name}`")]
    Cycle { key: String, name: String },
    #[error("{key}: {msg}")]
    Invalid { key: String, msg: String },
    #[error("cannot read {path}: {msg}")]
    Read { path: PathBuf, msg: String },
}

fn invalid(key: impl Into<String>, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        msg: msg.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    /// Domain as a set expression; the whole grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on: Option<String>,
    pub expr: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyCheck {
    Subharmonic,
    Harmonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityMethod {
    Fekete,
    Equilibrium,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "run", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    GlueBasic {
        u: String,
        u0: String,
    },
    GlueTwo {
        v: String,
        v0: String,
    },
    GlueQuant {
        v: String,
        g: String,
        #[serde(rename = "M_v")]
        upper_v: f64,
        #[serde(rename = "m_v")]
        lower_v: f64,
        #[serde(rename = "M_g")]
        upper_g: f64,
        #[serde(rename = "m_g")]
        lower_g: f64,
    },
    GlueGreen {
        v: String,
        s0: String,
        s: String,
        d: String,
        pole: Vec<f64>,
        #[serde(rename = "m_v")]
        lower_v: f64,
        #[serde(rename = "M_v")]
        upper_v: f64,
    },
    GlueFull {
        v: String,
        s0: String,
        pole: Vec<f64>,
        r: f64,
        #[serde(rename = "M_v", default, skip_serializing_if = "Option::is_none")]
        upper_v: Option<f64>,
    },
    Green {
        domain: String,
        pole: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s0: Option<String>,
    },
    Capacity {
        method: CapacityMethod,
        /// Set expression whose nodes are the candidate points.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        set: Option<String>,
        /// `[cx, cy, radius, samples]`: equally spaced points on a circle.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        circle: Option<[f64; 4]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Verify {
        field: String,
        check: VerifyCheck,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        region: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GlueBasic { .. } => "glue-basic",
            Command::GlueTwo { .. } => "glue-two",
            Command::GlueQuant { .. } => "glue-quant",
            Command::GlueGreen { .. } => "glue-green",
            Command::GlueFull { .. } => "glue-full",
            Command::Green { .. } => "green",
            Command::Capacity { .. } => "capacity",
            Command::Verify { .. } => "verify",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laplacian: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub sets: BTreeMap<String, String>,
    #[serde(default)]
    pub fields: BTreeMap<String, FieldConfig>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub tolerance: ToleranceConfig,
    pub command: Command,
}

fn is_default<T: Default + PartialEq>(t: &T) -> bool {
    *t == T::default()
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Parse and validate a scene file. Field files are not read here.
pub fn parse_config(text: &str) -> Result<SceneConfig, ConfigError> {
    let cfg: SceneConfig = toml::from_str(text).map_err(|e| {
        let (line, col) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Syntax {
            line,
            col,
            msg: e.message().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn to_toml(cfg: &SceneConfig) -> String {
    toml::to_string(cfg).expect("scene configs always serialize")
}

fn parse_set(key: &str, src: &str) -> Result<SetExpr, ConfigError> {
    SetExpr::parse(src).map_err(|source| ConfigError::Expression {
        key: key.to_string(),
        source,
    })
}

fn parse_field(key: &str, src: &str) -> Result<FieldExpr, ConfigError> {
    FieldExpr::parse(src).map_err(|source| ConfigError::Expression {
        key: key.to_string(),
        source,
    })
}

fn set_points(e: &SetExpr) -> Vec<&[f64]> {
    match e {
        SetExpr::Ball { center, .. } | SetExpr::ClosedBall { center, .. } => vec![center],
        SetExpr::Box { lo, hi } => vec![lo, hi],
        SetExpr::Union(a, b) | SetExpr::Difference(a, b) => {
            let mut v = set_points(a);
            v.extend(set_points(b));
            v
        }
        _ => Vec::new(),
    }
}

fn check_acyclic<'a>(
    section: &str,
    kind: &'static str,
    graph: &BTreeMap<&'a str, Vec<&'a str>>,
) -> Result<(), ConfigError> {
    fn visit<'a>(
        n: &'a str,
        graph: &BTreeMap<&'a str, Vec<&'a str>>,
        state: &mut HashMap<&'a str, u8>,
        section: &str,
        kind: &'static str,
    ) -> Result<(), ConfigError> {
        match state.get(n) {
            Some(2) => return Ok(()),
            Some(1) => {
                return Err(ConfigError::Cycle {
                    key: format!("{section}.{n}"),
                    name: n.to_string(),
                })
            }
            _ => {}
        }
        state.insert(n, 1);
        for &m in &graph[n] {
            if !graph.contains_key(m) {
                return Err(ConfigError::Unresolved {
                    key: format!("{section}.{n}"),
                    kind,
                    name: m.to_string(),
                });
            }
            visit(m, graph, state, section, kind)?;
        }
        state.insert(n, 2);
        Ok(())
    }
    let mut state = HashMap::new();
    for &n in graph.keys() {
        visit(n, graph, &mut state, section, kind)?;
    }
    Ok(())
}

impl SceneConfig {
    pub fn dim(&self) -> usize {
        self.grid.shape.len()
    }

    pub fn solver_params(&self) -> SolverParams {
        let mut p = SolverParams::default();
        p.omega = self.solver.omega;
        if let Some(m) = self.solver.max_sweeps {
            p.max_sweeps = m;
        }
        if let Some(t) = self.solver.tolerance {
            p.tolerance = t;
        }
        p
    }

    pub fn tolerance_override(&self) -> ToleranceOverride {
        ToleranceOverride {
            laplacian: self.tolerance.laplacian,
            value: self.tolerance.value,
        }
    }

    fn check_point(&self, key: &str, p: &[f64]) -> Result<(), ConfigError> {
        if p.len() != self.dim() {
            return Err(invalid(
                key,
                format!("point {p:?} has {} coordinates on a {}-dimensional grid", p.len(), self.dim()),
            ));
        }
        Ok(())
    }

    fn check_set_expr(&self, key: &str, src: &str) -> Result<(), ConfigError> {
        let e = parse_set(key, src)?;
        for p in set_points(&e) {
            self.check_point(key, p)?;
        }
        for r in e.references() {
            if !self.sets.contains_key(r) {
                return Err(ConfigError::Unresolved {
                    key: key.to_string(),
                    kind: "set",
                    name: r.to_string(),
                });
            }
        }
        Ok(())
    }

    fn check_field_name(&self, key: &str, name: &str) -> Result<(), ConfigError> {
        if !self.fields.contains_key(name) {
            return Err(ConfigError::Unresolved {
                key: key.to_string(),
                kind: "field",
                name: name.to_string(),
            });
        }
        Ok(())
    }

    /// Reference, dimension and range checks.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if !(1..=3).contains(&g.shape.len()) {
            return Err(invalid("grid.shape", "the grid must have 1, 2 or 3 axes"));
        }
        if g.origin.len() != g.shape.len() {
            return Err(invalid("grid.origin", "origin and shape lengths differ"));
        }
        if !(g.spacing > 0.0 && g.spacing.is_finite()) {
            return Err(invalid("grid.spacing", "spacing must be a positive number"));
        }
        if g.shape.iter().any(|&n| n < 3) {
            return Err(invalid("grid.shape", "every axis needs at least 3 nodes"));
        }

        let mut set_graph = BTreeMap::new();
        for (name, src) in &self.sets {
            let key = format!("sets.{name}");
            let e = parse_set(&key, src)?;
            for p in set_points(&e) {
                self.check_point(&key, p)?;
            }
            set_graph.insert(name.as_str(), e.references().into_iter().map(|s| s.to_owned()).collect::<Vec<_>>());
        }
        let graph: BTreeMap<&str, Vec<&str>> = set_graph
            .iter()
            .map(|(k, v)| (*k, v.iter().map(|s| s.as_str()).collect()))
            .collect();
        check_acyclic("sets", "set", &graph)?;

        let mut field_refs = BTreeMap::new();
        for (name, f) in &self.fields {
            let key = format!("fields.{name}");
            if let Some(on) = &f.on {
                self.check_set_expr(&format!("{key}.on"), on)?;
            }
            let e = parse_field(&format!("{key}.expr"), &f.expr)?;
            for p in e.points() {
                self.check_point(&key, p)?;
            }
            field_refs.insert(name.as_str(), e.references().into_iter().map(|s| s.to_owned()).collect::<Vec<_>>());
        }
        let graph: BTreeMap<&str, Vec<&str>> = field_refs
            .iter()
            .map(|(k, v)| (*k, v.iter().map(|s| s.as_str()).collect()))
            .collect();
        check_acyclic("fields", "field", &graph)?;

        for (key, t) in [("tolerance.laplacian", self.tolerance.laplacian), ("tolerance.value", self.tolerance.value)] {
            if let Some(t) = t {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(invalid(key, format!("tolerance must be a nonnegative number, got {t}")));
                }
            }
        }
        if let Some(w) = self.solver.omega {
            if !(w > 1.0 && w < 2.0) {
                return Err(invalid("solver.omega", format!("omega must lie in (1, 2), got {w}")));
            }
        }
        if let Some(t) = self.solver.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("solver.tolerance", format!("must be positive, got {t}")));
            }
        }
        if self.solver.max_sweeps == Some(0) {
            return Err(invalid("solver.max_sweeps", "must be at least 1"));
        }

        match &self.command {
            Command::GlueBasic { u, u0 } => {
                self.check_field_name("command.u", u)?;
                self.check_field_name("command.u0", u0)?;
            }
            Command::GlueTwo { v, v0 } => {
                self.check_field_name("command.v", v)?;
                self.check_field_name("command.v0", v0)?;
            }
            Command::GlueQuant { v, g, .. } => {
                self.check_field_name("command.v", v)?;
                self.check_field_name("command.g", g)?;
            }
            Command::GlueGreen { v, s0, s, d, pole, .. } => {
                self.check_field_name("command.v", v)?;
                self.check_set_expr("command.s0", s0)?;
                self.check_set_expr("command.s", s)?;
                self.check_set_expr("command.d", d)?;
                self.check_point("command.pole", pole)?;
            }
            Command::GlueFull { v, s0, pole, r, .. } => {
                self.check_field_name("command.v", v)?;
                self.check_set_expr("command.s0", s0)?;
                self.check_point("command.pole", pole)?;
                if !(*r > 0.0 && r.is_finite()) {
                    return Err(invalid("command.r", format!("radius must be positive, got {r}")));
                }
            }
            Command::Green { domain, pole, s0 } => {
                self.check_set_expr("command.domain", domain)?;
                self.check_point("command.pole", pole)?;
                if let Some(s0) = s0 {
                    self.check_set_expr("command.s0", s0)?;
                }
            }
            Command::Capacity { method, set, circle, n } => {
                match (set, circle) {
                    (Some(s), None) => self.check_set_expr("command.set", s)?,
                    (None, Some(c)) => {
                        if !(c[2] > 0.0) || c[3] < 2.0 || c[3].fract() != 0.0 {
                            return Err(invalid(
                                "command.circle",
                                "expected [cx, cy, radius > 0, samples >= 2]",
                            ));
                        }
                    }
                    _ => return Err(invalid("command", "give exactly one of `set` and `circle`")),
                }
                if *method == CapacityMethod::Fekete && !n.is_some_and(|n| n >= 3) {
                    return Err(invalid("command.n", "Fekete selection needs n >= 3"));
                }
            }
            Command::Verify { field, region, .. } => {
                self.check_field_name("command.field", field)?;
                if let Some(r) = region {
                    self.check_set_expr("command.region", r)?;
                }
            }
        }
        Ok(())
    }
}

/// A validated configuration with its lattice, sets and fields evaluated.
#[derive(Clone, Debug)]
pub struct Scene {
    pub config: SceneConfig,
    pub lattice: Lattice,
    pub sets: BTreeMap<String, NodeSet>,
    pub fields: BTreeMap<String, ScalarField>,
}

struct Builder<'a> {
    cfg: &'a SceneConfig,
    lattice: Lattice,
    base: PathBuf,
    sets: BTreeMap<String, NodeSet>,
    fields: BTreeMap<String, ScalarField>,
    files: HashMap<String, ScalarField>,
}

impl Builder<'_> {
    fn shape_set(&self, shape: Shape) -> NodeSet {
        NodeSet::from_fn(self.lattice.len(), |i| shape.contains(&self.lattice.point(i)))
    }

    fn point(&self, key: &str, c: &[f64]) -> Result<Point, ConfigError> {
        Point::new(c).map_err(|e| invalid(key, e.to_string()))
    }

    fn eval_set(&mut self, key: &str, e: &SetExpr) -> Result<NodeSet, ConfigError> {
        Ok(match e {
            SetExpr::Ball { center, radius } => {
                let ball = Ball::new(self.point(key, center)?, *radius)
                    .map_err(|e| invalid(key, e.to_string()))?;
                self.shape_set(Shape::Ball(ball))
            }
            SetExpr::ClosedBall { center, radius } => {
                if !(*radius >= 0.0) {
                    return Err(invalid(key, format!("radius must be nonnegative, got {radius}")));
                }
                let center = self.point(key, center)?;
                self.shape_set(Shape::ClosedBall { center, radius: *radius })
            }
            SetExpr::Box { lo, hi } => {
                let lo = self.point(key, lo)?;
                let hi = self.point(key, hi)?;
                self.shape_set(Shape::Box { lo, hi })
            }
            SetExpr::All => NodeSet::full(self.lattice.len()),
            SetExpr::Ref(name) => self.named_set(name)?,
            SetExpr::Union(a, b) => self.eval_set(key, a)?.union(&self.eval_set(key, b)?),
            SetExpr::Difference(a, b) => self.eval_set(key, a)?.difference(&self.eval_set(key, b)?),
        })
    }

    fn named_set(&mut self, name: &str) -> Result<NodeSet, ConfigError> {
        if let Some(s) = self.sets.get(name) {
            return Ok(s.clone());
        }
        let key = format!("sets.{name}");
        let e = parse_set(&key, &self.cfg.sets[name])?;
        let s = self.eval_set(&key, &e)?;
        self.sets.insert(name.to_string(), s.clone());
        Ok(s)
    }

    fn set_domain(&mut self, key: &str, src: Option<&str>) -> Result<GridDomain, ConfigError> {
        let set = match src {
            Some(src) => {
                let e = parse_set(key, src)?;
                self.eval_set(key, &e)?
            }
            None => NodeSet::full(self.lattice.len()),
        };
        if set.is_empty() {
            return Err(invalid(key, "the set contains no grid node"));
        }
        GridDomain::from_set(self.lattice.clone(), &set).map_err(|e| invalid(key, e.to_string()))
    }

    fn file(&mut self, key: &str, path: &str) -> Result<ScalarField, ConfigError> {
        if let Some(f) = self.files.get(path) {
            return Ok(f.clone());
        }
        let full = self.base.join(path);
        let file = File::open(&full).map_err(|e| ConfigError::Read {
            path: full.clone(),
            msg: e.to_string(),
        })?;
        let f = read_field(BufReader::new(file)).map_err(|e| ConfigError::Read {
            path: full.clone(),
            msg: e.to_string(),
        })?;
        if f.lattice() != &self.lattice {
            return Err(invalid(key, format!("{} lives on a different grid", full.display())));
        }
        self.files.insert(path.to_string(), f.clone());
        Ok(f)
    }

    fn named_field(&mut self, name: &str) -> Result<ScalarField, ConfigError> {
        if let Some(f) = self.fields.get(name) {
            return Ok(f.clone());
        }
        let key = format!("fields.{name}");
        let fc = &self.cfg.fields[name];
        let dom = self.set_domain(&format!("{key}.on"), fc.on.as_deref())?;
        let e = parse_field(&format!("{key}.expr"), &fc.expr)?;
        let mut values = vec![f64::NAN; self.lattice.len()];
        for i in dom.active_indices() {
            values[i] = self.eval_at(&key, &e, i)?;
        }
        let f = ScalarField::new(dom, values).map_err(|e| invalid(&key, e.to_string()))?;
        self.fields.insert(name.to_string(), f.clone());
        Ok(f)
    }

    fn sample(&self, key: &str, f: &ScalarField, i: usize, what: &str) -> Result<f64, ConfigError> {
        f.get(i).ok_or_else(|| {
            invalid(
                key,
                format!("{what} is undefined at {:?}", self.lattice.point(i).coords()),
            )
        })
    }

    fn eval_at(&mut self, key: &str, e: &FieldExpr, i: usize) -> Result<f64, ConfigError> {
        let x = self.lattice.point(i);
        Ok(match e {
            FieldExpr::Constant(c) => {
                if c.is_nan() || *c == f64::INFINITY {
                    return Err(invalid(key, "constants must be real or -inf"));
                }
                *c
            }
            FieldExpr::Kernel { d, pole } => {
                let o = self.point(key, pole)?;
                fundamental_kernel(*d, &x, &o).to_f64()
            }
            FieldExpr::Affine { a, b } => a.iter().zip(x.coords()).map(|(a, x)| a * x).sum::<f64>() + b,
            FieldExpr::Quadratic { k, center } => {
                let c = self.point(key, center)?;
                k * x.dist2(&c)
            }
            FieldExpr::File(path) => {
                let f = self.file(key, path)?;
                self.sample(key, &f, i, path)?
            }
            FieldExpr::Max(a, b) => self.eval_at(key, a, i)?.max(self.eval_at(key, b, i)?),
            FieldExpr::Scale(s, e) => {
                let v = self.eval_at(key, e, i)?;
                if v == f64::NEG_INFINITY {
                    if *s == 0.0 {
                        0.0
                    } else if *s > 0.0 {
                        v
                    } else {
                        return Err(invalid(key, "a negative scale maps -inf to +inf"));
                    }
                } else {
                    s * v
                }
            }
            FieldExpr::Offset(c, e) => self.eval_at(key, e, i)? + c,
            FieldExpr::Ref(name) => {
                let f = self.named_field(name)?;
                self.sample(key, &f, i, name)?
            }
        })
    }
}

impl Scene {
    /// Evaluate every set and field of `cfg`. Relative `file` paths are
    /// resolved against `base`.
    pub fn build(cfg: SceneConfig, base: &Path) -> Result<Scene, ConfigError> {
        cfg.validate()?;
        let origin = Point::new(&cfg.grid.origin).map_err(|e| invalid("grid.origin", e.to_string()))?;
        let lattice = Lattice::new(origin, cfg.grid.spacing, &cfg.grid.shape)
            .map_err(|e| invalid("grid", e.to_string()))?;
        let mut b = Builder {
            cfg: &cfg,
            lattice: lattice.clone(),
            base: base.to_path_buf(),
            sets: BTreeMap::new(),
            fields: BTreeMap::new(),
            files: HashMap::new(),
        };
        let names: BTreeSet<&String> = cfg.sets.keys().collect();
        for n in names {
            b.named_set(n)?;
        }
        let names: BTreeSet<&String> = cfg.fields.keys().collect();
        for n in names {
            b.named_field(n)?;
        }
        let sets = b.sets;
        let fields = b.fields;
        Ok(Scene {
            config: cfg,
            lattice,
            sets,
            fields,
        })
    }

    /// Evaluate a set expression against this scene.
    pub fn set(&self, key: &str, src: &str) -> Result<NodeSet, ConfigError> {
        let mut b = Builder {
            cfg: &self.config,
            lattice: self.lattice.clone(),
            base: PathBuf::new(),
            sets: self.sets.clone(),
            fields: BTreeMap::new(),
            files: HashMap::new(),
        };
        let e = parse_set(key, src)?;
        b.eval_set(key, &e)
    }

    pub fn field(&self, name: &str) -> &ScalarField {
        &self.fields[name]
    }

    pub fn point(&self, key: &str, c: &[f64]) -> Result<Point, ConfigError> {
        Point::new(c).map_err(|e| invalid(key, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[grid]
origin = [0.0, 0.0]
spacing = 0.25
shape = [5, 5]

[fields.c]
expr = "constant 2"

[command]
run = "verify"
field = "c"
check = "harmonic"
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        let scene = Scene::build(cfg, Path::new(".")).unwrap();
        assert_eq!(scene.field("c").domain().active_count(), 25);
    }

    #[test]
    fn syntax_error_has_position() {
        let bad = MINIMAL.replace("spacing = 0.25", "spacing = = 0.25");
        match parse_config(&bad) {
            Err(ConfigError::Syntax { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_primitive_and_names() {
        let bad = MINIMAL.replace("constant 2", "sine(2, x)");
        assert!(matches!(parse_config(&bad), Err(ConfigError::Expression { .. })));
        let bad = MINIMAL.replace("field = \"c\"", "field = \"d\"");
        assert!(matches!(parse_config(&bad), Err(ConfigError::Unresolved { kind: "field", .. })));
        let bad = MINIMAL.replace("constant 2", "max(c, constant 1)");
        assert!(matches!(parse_config(&bad), Err(ConfigError::Cycle { .. })));
    }

    #[test]
    fn fields_reference_each_other() {
        let text = MINIMAL.replace(
            "[command]",
            "[fields.d]\non = \"box (0.1, 0.1) (0.9, 0.9)\"\nexpr = \"offset(1, scale(0.5, max(c, affine (1, 0) 0)))\"\n\n[command]",
        );
        let scene = Scene::build(parse_config(&text).unwrap(), Path::new(".")).unwrap();
        let d = scene.field("d");
        assert_eq!(d.domain().active_count(), 9);
        assert!(d.domain().active_indices().all(|i| d.get(i) == Some(2.0)));
    }
}
