use super::{
    excess, identity_report, interface, location, same_lattice, upper_limit, GlueResult,
    ToleranceOverride,
};
use crate::error::{Error, Result};
use crate::field::{is_subharmonic, CheckKind, ScalarField, Tolerance, VerificationReport};
use crate::geometry::GridDomain;

fn subharmonic_conclusion(v: &ScalarField, tol: f64) -> VerificationReport {
    let mut r = is_subharmonic(v, tol);
    r.kind = CheckKind::Conclusion;
    r
}

/// Glue `u` on `O` with `u0` on `O0 ⊂ O`: the result is `max(u, u0)` on `O0`
/// and `u` elsewhere. The hypothesis is that the upper limit of `u0` at each
/// node of `O ∩ ∂O0` matches `u` there.
pub fn glue_basic(u: &ScalarField, u0: &ScalarField, tol: ToleranceOverride) -> Result<GlueResult> {
    same_lattice(u.lattice(), u0.lattice())?;
    let lattice = u.lattice();
    let o = u.domain().as_set();
    let o0 = u0.domain().as_set();
    if !o0.is_subset(&o) {
        return Err(Error::Invalid("the inner domain is not contained in the outer one".into()));
    }
    let tol = tol.resolve(|| Tolerance::estimate(&[(u, None), (u0, None)]));

    let rim = interface(&o.difference(&o0), &o0, lattice);
    let mut hyp = VerificationReport::new("interface-match", CheckKind::Hypothesis, tol.value);
    for x in rim.iter() {
        let ls = upper_limit(u0, &o0, x);
        let ux = u.value(x).expect("active");
        let violation = if ls == ux {
            0.0
        } else {
            excess(ls, ux).max(excess(ux, ls))
        };
        hyp.record(violation, Some(&location(lattice, x)));
    }
    let hyp = hyp.with_detail("|upper limit of the inner field - outer field| on the interface");

    let mut values = u.raw().to_vec();
    for i in o0.iter() {
        values[i] = values[i].max(u0.raw()[i]);
    }
    let out = ScalarField::new(u.domain().clone(), values)?;
    let sub = subharmonic_conclusion(&out, tol.laplacian);
    let ident = identity_report(&out, u, &o.difference(&o0), "the complement of the inner domain");
    Ok(GlueResult {
        field: out,
        reports: vec![hyp, sub, ident],
        constants: None,
        scale: None,
        tolerance: tol,
        green: None,
        continued: None,
    })
}

/// Interface checks and glued field of the two-set gluing, with a resolved
/// tolerance.
pub(crate) fn glue_two_with(
    v: &ScalarField,
    v0: &ScalarField,
    tol: Tolerance,
) -> Result<(ScalarField, Vec<VerificationReport>)> {
    same_lattice(v.lattice(), v0.lattice())?;
    let lattice = v.lattice();
    let o = v.domain().as_set();
    let o0 = v0.domain().as_set();
    let both = o.intersection(&o0);

    let outer_rim = interface(&o0.difference(&o), &both, lattice);
    let mut outer = VerificationReport::new("outer-interface-bound", CheckKind::Hypothesis, tol.value);
    for x in outer_rim.iter() {
        let ls = upper_limit(v, &both, x);
        outer.record(excess(ls, v0.value(x).expect("active")), Some(&location(lattice, x)));
    }
    let outer = outer.with_detail("upper limit of v from the overlap <= v0 on O0 ∩ ∂O");

    let inner_rim = interface(&o.difference(&o0), &both, lattice);
    let mut inner = VerificationReport::new("inner-interface-bound", CheckKind::Hypothesis, tol.value);
    for x in inner_rim.iter() {
        let ls = upper_limit(v0, &both, x);
        inner.record(excess(ls, v.value(x).expect("active")), Some(&location(lattice, x)));
    }
    let inner = inner.with_detail("upper limit of v0 from the overlap <= v on O ∩ ∂O0");

    let union = o.union(&o0);
    let mut values = vec![f64::NAN; lattice.len()];
    for i in union.iter() {
        values[i] = match (v.get(i), v0.get(i)) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!(),
        };
    }
    let out = ScalarField::new(GridDomain::from_set(lattice.clone(), &union)?, values)?;
    Ok((out, vec![outer, inner]))
}

/// Glue `v` on `O` with `v0` on `O0`: `v0` on `O0 \ O`, `max(v0, v)` on the
/// overlap and `v` on `O \ O0`.
pub fn glue_two(v: &ScalarField, v0: &ScalarField, tol: ToleranceOverride) -> Result<GlueResult> {
    same_lattice(v.lattice(), v0.lattice())?;
    let tol = tol.resolve(|| Tolerance::estimate(&[(v, None), (v0, None)]));
    let (out, mut reports) = glue_two_with(v, v0, tol)?;
    let only_v = v.domain().as_set().difference(&v0.domain().as_set());
    reports.push(subharmonic_conclusion(&out, tol.laplacian));
    reports.push(identity_report(&out, v, &only_v, "O \\ O0"));
    Ok(GlueResult {
        field: out,
        reports,
        constants: None,
        scale: None,
        tolerance: tol,
        green: None,
        continued: None,
    })
}
