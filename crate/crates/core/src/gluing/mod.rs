//! Gluing constructions for subharmonic fields.
//!
//! Every construction checks its hypotheses on the grid, builds the glued
//! field, and certifies the promised conclusions. Hypothesis failures that
//! leave the construction well defined are reported, not raised; the caller
//! decides what to do with an unverified result.
//!
//! Discrete interfaces use Moore adjacency. For open sets `A`, `B` the nodes
//! of `A ∩ ∂B` are the nodes of `A \ B` with a Moore neighbour in `A ∩ B`,
//! and the upper limit at such a node is the largest value over those
//! neighbours.

mod basic;
mod full;
mod green;
mod quantitative;

pub use basic::{glue_basic, glue_two};
pub use full::{glue_full, layer_supremum};
pub use green::{glue_green, GreenGlueInput};
pub use quantitative::{glue_quantitative, quantitative_v0};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CheckKind, ScalarField, Tolerance, VerificationReport};
use crate::geometry::{Lattice, NodeSet, Point};
use crate::harmonic::{asymptotic_slope, GreenField};
use crate::kernels::ExtReal;

/// The four constants of the quantitative gluing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueConstants {
    #[serde(rename = "M_v")]
    pub upper_v: f64,
    #[serde(rename = "m_v")]
    pub lower_v: f64,
    #[serde(rename = "M_g")]
    pub upper_g: f64,
    #[serde(rename = "m_g")]
    pub lower_g: f64,
}

impl GlueConstants {
    pub fn new(upper_v: f64, lower_v: f64, upper_g: f64, lower_g: f64) -> GlueConstants {
        GlueConstants {
            upper_v,
            lower_v,
            upper_g,
            lower_g,
        }
    }

    /// `(M_v^+ + m_v^-) / (M_g - m_g)`
    pub fn scale(&self) -> Result<f64> {
        self.validate()?;
        let num = self.upper_v.max(0.0) + (-self.lower_v).max(0.0);
        Ok(num / (self.upper_g - self.lower_g))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("M_v", self.upper_v),
            ("m_v", self.lower_v),
            ("M_g", self.upper_g),
            ("m_g", self.lower_g),
        ] {
            if !x.is_finite() {
                return Err(Error::Invalid(format!("{name} must be finite, got {x}")));
            }
        }
        if !(self.upper_g > self.lower_g) {
            return Err(Error::Invalid(format!(
                "M_g = {} must exceed m_g = {}",
                self.upper_g, self.lower_g
            )));
        }
        Ok(())
    }
}

/// Optional replacements for the tolerances a construction estimates from
/// its inputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ToleranceOverride {
    pub laplacian: Option<f64>,
    pub value: Option<f64>,
}

impl ToleranceOverride {
    pub fn resolve(&self, estimate: impl FnOnce() -> Tolerance) -> Tolerance {
        let est = estimate();
        Tolerance {
            laplacian: self.laplacian.unwrap_or(est.laplacian),
            value: self.value.unwrap_or(est.value),
        }
    }
}

/// A glued field with its hypothesis, stage and conclusion reports.
#[derive(Clone, Debug)]
pub struct GlueResult {
    pub field: ScalarField,
    pub reports: Vec<VerificationReport>,
    pub constants: Option<GlueConstants>,
    pub scale: Option<f64>,
    pub tolerance: Tolerance,
    pub green: Option<GreenField>,
    pub continued: Option<ScalarField>,
}

impl GlueResult {
    pub fn reports_of(&self, kind: CheckKind) -> impl Iterator<Item = &VerificationReport> {
        self.reports.iter().filter(move |r| r.kind == kind)
    }

    pub fn report(&self, name: &str) -> Option<&VerificationReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.reports_of(CheckKind::Hypothesis).all(|r| r.passed)
    }

    pub fn conclusions_hold(&self) -> bool {
        self.reports_of(CheckKind::Conclusion).all(|r| r.passed)
    }

    /// Hypotheses and conclusions all pass.
    pub fn verified(&self) -> bool {
        self.hypotheses_hold() && self.conclusions_hold()
    }

    /// The failing report with the largest violation-to-tolerance ratio.
    pub fn worst_failure(&self) -> Option<&VerificationReport> {
        let ratio = |r: &VerificationReport| {
            if r.tolerance > 0.0 {
                r.worst_violation / r.tolerance
            } else {
                f64::INFINITY
            }
        };
        self.reports
            .iter()
            .filter(|r| !r.passed)
            .max_by(|a, b| ratio(a).total_cmp(&ratio(b)))
    }
}

pub(crate) fn same_lattice(a: &Lattice, b: &Lattice) -> Result<()> {
    if a != b {
        return Err(Error::Invalid("fields live on different lattices".into()));
    }
    Ok(())
}

/// Nodes of `outside` with a Moore neighbour in `near`.
pub(crate) fn interface(outside: &NodeSet, near: &NodeSet, lattice: &Lattice) -> NodeSet {
    NodeSet::from_fn(outside.lattice_len(), |i| {
        outside.contains(i) && lattice.moore_neighbors(i).iter().any(|&j| near.contains(j))
    })
}

/// Largest value of `v` over the Moore neighbours of `node` lying in `from`.
pub(crate) fn upper_limit(v: &ScalarField, from: &NodeSet, node: usize) -> ExtReal {
    let mut best = ExtReal::NegInf;
    for j in v.lattice().moore_neighbors(node) {
        if from.contains(j) {
            if let Some(x) = v.value(j) {
                best = best.max(x);
            }
        }
    }
    best
}

/// Amount by which `a <= b` fails (`0` when it holds).
pub(crate) fn excess(a: ExtReal, b: ExtReal) -> f64 {
    if a <= b {
        0.0
    } else {
        match (a, b) {
            (ExtReal::Real(x), ExtReal::Real(y)) => x - y,
            _ => f64::INFINITY,
        }
    }
}

pub(crate) fn location(lattice: &Lattice, i: usize) -> Vec<f64> {
    lattice.point(i).coords().to_vec()
}

/// Bit-exact agreement of `out` with `v` on `region`.
pub(crate) fn identity_report(
    out: &ScalarField,
    v: &ScalarField,
    region: &NodeSet,
    what: &str,
) -> VerificationReport {
    let mut rep = VerificationReport::new("outside-identity", CheckKind::Conclusion, 0.0);
    let lattice = out.lattice();
    for i in region.iter() {
        let (Some(a), Some(b)) = (out.get(i), v.get(i)) else {
            continue;
        };
        let violation = if a.to_bits() == b.to_bits() {
            0.0
        } else {
            (a - b).abs().max(f64::MIN_POSITIVE)
        };
        rep.record(violation, Some(&location(lattice, i)));
    }
    rep.with_detail(format!("glued field equals the input bit for bit on {what}"))
}

/// Slope of `out` against `-K_{d-2}(·, pole)` over `2h <= |x - pole| <= 8h`
/// compared with `expected` (relative error, 5%).
pub(crate) fn pole_report(out: &ScalarField, pole: &Point, expected: f64) -> VerificationReport {
    let h = out.lattice().spacing();
    let mut rep = VerificationReport::new("pole-asymptotics", CheckKind::Conclusion, 0.05);
    match asymptotic_slope(out, pole, 2.0 * h, 8.0 * h) {
        Ok(slope) => {
            let violation = if expected == 0.0 {
                slope.abs()
            } else {
                ((slope - expected) / expected).abs()
            };
            rep.record(violation, Some(pole.coords()));
            rep.with_detail(format!(
                "regression slope {slope} against expected coefficient {expected}"
            ))
        }
        Err(e) => {
            rep.record(f64::INFINITY, Some(pole.coords()));
            rep.with_detail(e.to_string())
        }
    }
}

pub(crate) fn as_kind(mut r: VerificationReport, kind: CheckKind) -> VerificationReport {
    r.kind = kind;
    r
}

pub(crate) fn renamed(mut r: VerificationReport, name: &str, kind: CheckKind) -> VerificationReport {
    r.name = name.to_string();
    r.kind = kind;
    r
}
