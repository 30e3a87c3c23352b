use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::NodeSet;
use crate::kernels::ExtReal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// A standalone certification (is_subharmonic and friends).
    Test,
    /// A hypothesis of a gluing construction.
    Hypothesis,
    /// An intermediate check inside a pipeline.
    Stage,
    /// A conclusion the construction promises.
    Conclusion,
}

/// Outcome of one check. `passed` is false exactly when
/// `worst_violation > tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub worst_violation: f64,
    pub worst_location: Option<Vec<f64>>,
    pub tolerance: f64,
    pub checked: usize,
    pub detail: String,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>, kind: CheckKind, tolerance: f64) -> VerificationReport {
        VerificationReport {
            name: name.into(),
            kind,
            passed: true,
            worst_violation: 0.0,
            worst_location: None,
            tolerance,
            checked: 0,
            detail: String::new(),
        }
    }

    /// Record one sample; `violation <= 0` means the sample is satisfied.
    pub fn record(&mut self, violation: f64, location: Option<&[f64]>) {
        self.checked += 1;
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if v > self.worst_violation || (self.worst_location.is_none() && v >= self.worst_violation && v > 0.0)
        {
            self.worst_violation = v;
            self.worst_location = location.map(|l| l.to_vec());
        }
        self.passed = !(self.worst_violation > self.tolerance);
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> VerificationReport {
        self.detail = detail.into();
        self
    }

    pub fn with_kind(mut self, kind: CheckKind) -> VerificationReport {
        self.kind = kind;
        self
    }

    /// Single pass/fail verdict with no magnitude (e.g. a finiteness test).
    pub fn verdict(name: &str, kind: CheckKind, ok: bool, detail: impl Into<String>) -> VerificationReport {
        let mut r = VerificationReport::new(name, kind, 0.0);
        r.record(if ok { 0.0 } else { f64::INFINITY }, None);
        r.with_detail(detail)
    }
}

/// Tolerances used when certifying a field: `laplacian` bounds the discrete
/// Laplacian, `value` bounds pointwise comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub laplacian: f64,
    pub value: f64,
}

impl Tolerance {
    /// Default tolerances derived from the input fields, each over an optional
    /// region: `laplacian = 1e-8 * range + 4 * stencil error estimate` and
    /// `value = 1e-6 + h * sqrt(d) * gradient bound`.
    pub fn estimate(inputs: &[(&ScalarField, Option<&NodeSet>)]) -> Tolerance {
        let mut lap: f64 = 0.0;
        let mut val: f64 = 1e-6;
        for (f, region) in inputs {
            let range = f.finite_range_on(*region).map_or(0.0, |(a, b)| b - a);
            lap = lap.max(1e-8 * range + 4.0 * stencil_error_estimate(f, *region));
            let h = f.domain().spacing();
            let d = f.domain().dim() as f64;
            val = val.max(1e-6 + h * d.sqrt() * gradient_bound(f, *region));
        }
        Tolerance {
            laplacian: lap.max(1e-12),
            value: val,
        }
    }
}

/// `(Σ neighbours - 2d v) / h²` at an interior node.
///
/// A `-inf` centre gives `+inf` (the sub-mean inequality holds trivially);
/// a `-inf` neighbour of a finite centre gives `-inf`.
pub fn discrete_laplacian(v: &ScalarField, node: usize) -> Result<ExtReal> {
    let dom = v.domain();
    if !dom.is_interior(node) {
        return Err(Error::NotInterior(node));
    }
    let centre = v.raw()[node];
    if centre == f64::NEG_INFINITY {
        return Ok(ExtReal::PosInf);
    }
    let lattice = dom.lattice();
    let mut sum = 0.0;
    for nb in lattice.axis_neighbors(node) {
        let x = v.raw()[nb.expect("interior node")];
        if x == f64::NEG_INFINITY {
            return Ok(ExtReal::NegInf);
        }
        sum += x - centre;
    }
    let h = lattice.spacing();
    Ok(ExtReal::Real(sum / (h * h)))
}

/// Discrete subharmonicity over every interior node of the field's domain.
pub fn is_subharmonic(v: &ScalarField, tol: f64) -> VerificationReport {
    is_subharmonic_on(v, None, tol)
}

/// Subharmonicity over the interior nodes of `region` (all interior nodes if `None`).
pub fn is_subharmonic_on(v: &ScalarField, region: Option<&NodeSet>, tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::new("subharmonic", CheckKind::Test, tol);
    let dom = v.domain();
    let lattice = dom.lattice();
    for i in dom.active_indices() {
        if region.is_some_and(|r| !r.contains(i)) || !dom.is_interior(i) {
            continue;
        }
        let lap = discrete_laplacian(v, i).expect("interior");
        let violation = match lap {
            ExtReal::PosInf => 0.0,
            ExtReal::NegInf => f64::INFINITY,
            ExtReal::Real(x) => (-x).max(0.0),
        };
        rep.record(violation, Some(lattice.point(i).coords()));
    }
    rep.with_detail("worst violation is max(0, -Δ_h v)")
}

/// `|Δ_h v| <= tol` on the interior nodes of `region`.
pub fn is_harmonic(v: &ScalarField, region: &NodeSet, tol: f64) -> VerificationReport {
    is_harmonic_on(v, Some(region), tol)
}

pub fn is_harmonic_on(v: &ScalarField, region: Option<&NodeSet>, tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::new("harmonic", CheckKind::Test, tol);
    let dom = v.domain();
    let lattice = dom.lattice();
    for i in dom.active_indices() {
        if region.is_some_and(|r| !r.contains(i)) || !dom.is_interior(i) {
            continue;
        }
        let violation = match discrete_laplacian(v, i).expect("interior") {
            ExtReal::Real(x) => x.abs(),
            _ => f64::INFINITY,
        };
        rep.record(violation, Some(lattice.point(i).coords()));
    }
    rep.with_detail("worst violation is |Δ_h v|")
}

/// Discrete `limsup` of `v` at `at_node` along `from`: the largest value of
/// `v` over the Moore neighbours of `at_node` that lie in `from`.
pub fn boundary_limsup(v: &ScalarField, from: &NodeSet, at_node: usize) -> Result<ExtReal> {
    let dom = v.domain();
    dom.check_set(from)?;
    let mut best: Option<ExtReal> = None;
    for j in dom.lattice().moore_neighbors(at_node) {
        if from.contains(j) {
            if let Some(x) = v.value(j) {
                best = Some(best.map_or(x, |b| b.max(x)));
            }
        }
    }
    best.ok_or(Error::NoNeighbour(at_node))
}

/// `(inf, sup)` of `v` over the active nodes of `s`.
pub fn extremal_constants(v: &ScalarField, s: &NodeSet) -> Result<(ExtReal, ExtReal)> {
    v.domain().check_set(s)?;
    let mut lo = ExtReal::PosInf;
    let mut hi = ExtReal::NegInf;
    let mut any = false;
    for i in s.iter() {
        if let Some(x) = v.value(i) {
            any = true;
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !any {
        return Err(Error::Invalid("extremal constants over an empty set".into()));
    }
    Ok((lo, hi))
}

/// Estimate of the 5/7-point stencil truncation error `(h²/12) Σ_a |∂_a⁴ v|`,
/// from fourth differences, maximised over nodes whose `±2` axis stencil is
/// active and finite.
pub fn stencil_error_estimate(v: &ScalarField, region: Option<&NodeSet>) -> f64 {
    let dom = v.domain();
    let lattice = dom.lattice();
    let h = lattice.spacing();
    let vals = v.raw();
    let fin = |j: Option<usize>| j.filter(|&k| dom.is_active(k) && vals[k].is_finite());
    let mut worst: f64 = 0.0;
    'node: for i in dom.active_indices() {
        if region.is_some_and(|r| !r.contains(i)) || !vals[i].is_finite() {
            continue;
        }
        let mut s = 0.0;
        for a in 0..lattice.dim() {
            let m1 = fin(lattice.step(i, a, -1));
            let p1 = fin(lattice.step(i, a, 1));
            let (Some(m1), Some(p1)) = (m1, p1) else { continue 'node };
            let (Some(m2), Some(p2)) = (fin(lattice.step(m1, a, -1)), fin(lattice.step(p1, a, 1)))
            else {
                continue 'node;
            };
            s += (vals[m2] - 4.0 * vals[m1] + 6.0 * vals[i] - 4.0 * vals[p1] + vals[p2]).abs();
        }
        worst = worst.max(s / (12.0 * h * h));
    }
    worst
}

/// Largest forward-difference gradient magnitude over finite active pairs.
pub fn gradient_bound(v: &ScalarField, region: Option<&NodeSet>) -> f64 {
    let dom = v.domain();
    let lattice = dom.lattice();
    let h = lattice.spacing();
    let vals = v.raw();
    let mut worst: f64 = 0.0;
    for i in dom.active_indices() {
        if region.is_some_and(|r| !r.contains(i)) || !vals[i].is_finite() {
            continue;
        }
        let mut g2 = 0.0;
        for a in 0..lattice.dim() {
            let mut best: f64 = 0.0;
            for dir in [-1isize, 1] {
                if let Some(j) = lattice.step(i, a, dir) {
                    if dom.is_active(j) && vals[j].is_finite() {
                        best = best.max((vals[j] - vals[i]).abs() / h);
                    }
                }
            }
            g2 += best * best;
        }
        worst = worst.max(g2.sqrt());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GridDomain, Lattice, Point};
    use crate::kernels::fundamental_kernel;

    fn grid2(n: usize, h: f64) -> GridDomain {
        let lo = -(h * (n - 1) as f64) / 2.0;
        GridDomain::full(Lattice::new(Point::new(&[lo, lo]).unwrap(), h, &[n, n]).unwrap())
    }

    #[test]
    fn laplacian_exact_on_quadratics_and_affine() {
        let d = grid2(9, 0.25);
        let q = ScalarField::from_fn(d.clone(), |x| x[0] * x[0] + x[1] * x[1]).unwrap();
        let a = ScalarField::from_fn(d.clone(), |x| 3.0 * x[0] - x[1] + 0.5).unwrap();
        for i in d.interior().iter() {
            assert_eq!(discrete_laplacian(&q, i).unwrap(), ExtReal::Real(4.0));
            assert_eq!(discrete_laplacian(&a, i).unwrap(), ExtReal::Real(0.0));
        }
        assert!(matches!(discrete_laplacian(&q, 0), Err(Error::NotInterior(0))));
    }

    #[test]
    fn laplacian_next_to_pole_is_very_negative() {
        let d = grid2(9, 0.25);
        let y = Point::new(&[0.0, 0.0]).unwrap();
        let pole = d.node_at(&y).unwrap();
        let punctured = d.punctured(pole);
        let k = ScalarField::from_fn(d.clone(), |x| fundamental_kernel(2, x, &y).to_f64()).unwrap();
        let nb = d.lattice().step(pole, 0, 1).unwrap();
        assert_eq!(discrete_laplacian(&k, nb).unwrap(), ExtReal::NegInf);
        // finite puncture: still strongly negative with the pole removed from the stencil sum
        let k2 = ScalarField::from_fn(d, |x| {
            if x.norm() == 0.0 { -10.0 } else { x.norm().ln() }
        })
        .unwrap();
        assert!(discrete_laplacian(&k2, nb).unwrap().to_f64() < -10.0);
        let kp = k.restrict(&punctured).unwrap();
        assert!(!kp.domain().is_interior(nb));
    }

    #[test]
    fn superharmonic_fails_with_violation_four() {
        let d = grid2(9, 0.25);
        let v = ScalarField::from_fn(d, |x| -(x[0] * x[0] + x[1] * x[1])).unwrap();
        let r = is_subharmonic(&v, 1e-9);
        assert!(!r.passed);
        assert!((r.worst_violation - 4.0).abs() < 1e-9);
    }

    #[test]
    fn harmonic_checks() {
        let d = grid2(11, 0.1);
        let all = d.as_set();
        let xy = ScalarField::from_fn(d.clone(), |x| x[0] * x[1]).unwrap();
        let r = is_harmonic(&xy, &all, 1e-12);
        assert!(r.passed, "{r:?}");
        let sq = ScalarField::from_fn(d, |x| x[0] * x[0] + x[1] * x[1]).unwrap();
        assert!(!is_harmonic(&sq, &all, 1e-6).passed);
    }

    #[test]
    fn minus_infinity_nodes_never_violate() {
        let d = grid2(5, 1.0);
        let mut vals = vec![0.0; 25];
        vals[12] = f64::NEG_INFINITY;
        let f = ScalarField::new(d, vals).unwrap();
        assert_eq!(discrete_laplacian(&f, 12).unwrap(), ExtReal::PosInf);
        // the four neighbours see -inf and fail
        let r = is_subharmonic(&f, 1.0);
        assert!(!r.passed);
        assert_eq!(r.worst_violation, f64::INFINITY);
    }

    #[test]
    fn limsup_and_extremes() {
        let d = grid2(5, 1.0);
        let l = d.lattice().clone();
        let f = ScalarField::constant(d.clone(), 2.5);
        let set = NodeSet::from_indices(l.len(), [l.index(&[1, 1]), l.index(&[1, 2])]);
        assert_eq!(boundary_limsup(&f, &set, l.index(&[2, 2])).unwrap(), ExtReal::Real(2.5));
        assert!(boundary_limsup(&f, &set, l.index(&[4, 4])).is_err());
        let g = ScalarField::from_fn(d.clone(), |x| x[0]).unwrap();
        let single = NodeSet::from_indices(l.len(), [l.index(&[3, 0])]);
        assert_eq!(
            boundary_limsup(&g, &single, l.index(&[4, 0])).unwrap(),
            ExtReal::Real(g.get(l.index(&[3, 0])).unwrap())
        );
        let five = ScalarField::constant(d.clone(), 5.0);
        assert_eq!(
            extremal_constants(&five, &d.as_set()).unwrap(),
            (ExtReal::Real(5.0), ExtReal::Real(5.0))
        );
        let mut vals = vec![1.0; 25];
        vals[7] = f64::NEG_INFINITY;
        let h = ScalarField::new(d.clone(), vals).unwrap();
        assert_eq!(extremal_constants(&h, &d.as_set()).unwrap().0, ExtReal::NegInf);
    }

    #[test]
    fn report_invariant() {
        let mut r = VerificationReport::new("x", CheckKind::Test, 0.5);
        r.record(0.2, None);
        assert!(r.passed);
        r.record(0.7, Some(&[1.0]));
        assert!(!r.passed);
        assert_eq!(r.worst_location, Some(vec![1.0]));
        assert_eq!(r.checked, 2);
    }

    #[test]
    fn stencil_estimate_vanishes_on_cubics() {
        let d = grid2(11, 0.1);
        let c = ScalarField::from_fn(d.clone(), |x| x[0].powi(3) - 2.0 * x[0] * x[1] * x[1]).unwrap();
        assert!(stencil_error_estimate(&c, None) < 1e-9);
        let q = ScalarField::from_fn(d, |x| x[0].powi(4)).unwrap();
        // ∂⁴ x⁴ = 24 → (h²/12)·24
        assert!((stencil_error_estimate(&q, None) - 0.01 * 2.0).abs() < 1e-9);
    }
}
