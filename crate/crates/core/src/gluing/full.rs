use super::green::{green_core, host_domain, hypothesis_error};
use super::{excess, identity_report, location, pole_report, renamed, GlueResult, ToleranceOverride};
use crate::error::{Error, Result};
use crate::field::{
    discrete_laplacian, is_subharmonic, mean_inf_constant, CheckKind, ScalarField, Tolerance,
    VerificationReport,
};
use crate::geometry::{dist_to_complement, parallel_set, regularized_domain, GridDomain, NodeSet, Point};
use crate::harmonic::{harmonic_layer_continuation, SolverParams};
use crate::kernels::ExtReal;

/// Supremum of `v` over `layer` and the nodes of its outer ring where `v`
/// is defined.
pub fn layer_supremum(v: &ScalarField, layer: &NodeSet) -> Result<ExtReal> {
    v.domain().check_set(layer)?;
    let lattice = v.lattice();
    let mut best = ExtReal::NegInf;
    let mut any = false;
    for i in layer.union(&layer.outer_ring(lattice)).iter() {
        if let Some(x) = v.value(i) {
            best = best.max(x);
            any = true;
        }
    }
    if !any {
        return Err(Error::Invalid("the layer carries no field values".into()));
    }
    Ok(best)
}

/// Extend `v` from `O \ S0` to `O` by peeling `S0` from the outside, each
/// new node taking the largest value among its already valued Moore
/// neighbours.
fn extend_inward(v: &ScalarField, host: &GridDomain) -> Result<ScalarField> {
    let lattice = host.lattice();
    let mut values = v.raw().to_vec();
    let mut known = v.domain().as_set();
    let mut todo = host.as_set().difference(&known);
    while !todo.is_empty() {
        let front: Vec<(usize, f64)> = todo
            .iter()
            .filter_map(|i| {
                let best = lattice
                    .moore_neighbors(i)
                    .into_iter()
                    .filter(|&j| known.contains(j))
                    .map(|j| values[j])
                    .reduce(f64::max)?;
                Some((i, best))
            })
            .collect();
        if front.is_empty() {
            break;
        }
        for (i, x) in front {
            values[i] = x;
            known.insert(i);
            todo.remove(i);
        }
    }
    for i in todo.iter() {
        values[i] = f64::NAN;
    }
    ScalarField::new(GridDomain::from_set(lattice.clone(), &known)?, values)
}

/// Full gluing of `v` on `O \ S0` with a Green function pole at `pole`:
/// harmonic continuation of `v` into the layer `S0^{∪r} \ S0`, a
/// regularized Green domain between the `r/3` and `2r/3` parallel sets, and
/// Green gluing across them. When `upper_v` is `None`, `M_v` is the layer
/// supremum of `v`.
pub fn glue_full(
    v: &ScalarField,
    s0: &NodeSet,
    pole: &Point,
    r: f64,
    upper_v: Option<f64>,
    params: &SolverParams,
    tol: ToleranceOverride,
) -> Result<GlueResult> {
    let o = host_domain(v, s0)?;
    let lattice = o.lattice().clone();
    let h = lattice.spacing();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Invalid(format!("radius must be positive, got {r}")));
    }
    if r / 3.0 < 2.0 * h {
        return Err(Error::ResolutionTooCoarse(format!(
            "r/3 = {} is below two lattice spacings ({})",
            r / 3.0,
            2.0 * h
        )));
    }
    let vr = v.restrict(&o.restrict(&o.as_set().difference(s0))?)?;

    let pole_inside = o
        .node_at(pole)
        .is_some_and(|i| s0.interior(&lattice).contains(i));
    if !pole_inside {
        return Err(hypothesis_error(
            "inclusion-chain",
            format!("the pole {:?} is not an interior node of S0", pole.coords()),
        ));
    }
    if !s0.compactly_inside(&o.as_set(), &lattice) {
        return Err(hypothesis_error("inclusion-chain", "S0 is not compactly inside O".into()));
    }
    let reach = dist_to_complement(s0, &o)?;
    if !(r < reach) {
        return Err(hypothesis_error(
            "radius-below-distance",
            format!("r = {r} is not below the distance {reach} from S0 to the boundary of O"),
        ));
    }

    let s_r = parallel_set(&o, s0, r)?;
    let s1 = parallel_set(&o, s0, r / 3.0)?;
    let s2 = parallel_set(&o, s0, 2.0 * r / 3.0)?;
    let layer = s_r.difference(s0);
    let mean_shell = s2.difference(&s1);
    let outside_s1 = o.as_set().difference(&s1);
    let tol = tol.resolve(|| Tolerance::estimate(&[(&vr, Some(&outside_s1))]));

    let upper = match upper_v {
        Some(m) => m,
        None => layer_supremum(&vr, &layer)?.to_f64(),
    };
    if !upper.is_finite() {
        return Err(hypothesis_error("layer-upper-bound", format!("M_v = {upper} is not finite")));
    }
    let mut layer_bound = VerificationReport::new("layer-upper-bound", CheckKind::Hypothesis, tol.value);
    for i in layer.iter() {
        layer_bound.record(
            excess(vr.value(i).expect("layer lies in the domain"), ExtReal::Real(upper)),
            Some(&location(&lattice, i)),
        );
    }
    let layer_bound = layer_bound.with_detail(format!("v <= M_v = {upper} on S0^(∪r) \\ S0"));

    let extended = extend_inward(&vr, &o)?;
    let lower = mean_inf_constant(&extended, &mean_shell, r / 3.0)
        .map_err(|e| e.at_stage("mean-infimum"))?;
    let lower = match lower {
        ExtReal::Real(x) => x,
        other => {
            return Err(Error::Invalid(format!("m_v = {other:?} is not finite")).at_stage("mean-infimum"))
        }
    };

    let cont = harmonic_layer_continuation(&vr, &layer, params).map_err(|e| e.at_stage("continuation"))?;
    let vt = cont.field;
    let mut cb = VerificationReport::new("continuation-bounds", CheckKind::Stage, tol.value);
    for i in mean_shell.iter() {
        cb.record(excess(ExtReal::Real(lower), vt.value(i).expect("active")), Some(&location(&lattice, i)));
    }
    for i in layer.iter() {
        cb.record(excess(vt.value(i).expect("active"), ExtReal::Real(upper)), Some(&location(&lattice, i)));
    }
    let cb = cb.with_detail(format!(
        "m_v = {lower} <= continued v on the mean shell and continued v <= M_v = {upper} on the layer"
    ));

    let d = regularized_domain(s0, r, &o).map_err(|e| e.at_stage("regularized-domain"))?;
    let core = green_core(&vt, &o, &s1, &s2, &d, pole, lower, upper, params, tol)
        .map_err(|e| e.at_stage("green-gluing"))?;
    let out = core.field;

    let mut reports = vec![layer_bound, cb];
    reports.extend(
        core.reports
            .into_iter()
            .map(|rep| {
                let name = format!("green-{}", rep.name);
                renamed(rep, &name, CheckKind::Stage)
            }),
    );

    let sub = renamed(is_subharmonic(&out, tol.laplacian), "subharmonic", CheckKind::Conclusion);
    let ident = identity_report(&out, v, &o.as_set().difference(&s_r), "O \\ S0^(∪r)");

    let pole_node = core.green.pole_node();
    let mut harm = VerificationReport::new("harmonic-core", CheckKind::Conclusion, 1.0);
    for i in s0.iter() {
        if i == pole_node || !out.domain().is_interior(i) {
            continue;
        }
        let lap = match discrete_laplacian(&out, i)? {
            ExtReal::Real(x) => x.abs() / tol.laplacian,
            _ => f64::INFINITY,
        };
        let neg = (-out.raw()[i]).max(0.0) / tol.value;
        harm.record(lap.max(neg), Some(&location(&lattice, i)));
    }
    let harm = harm.with_detail(format!(
        "max of |Δ_h V| / {} and max(0, -V) / {} on S0 minus the pole",
        tol.laplacian, tol.value
    ));
    let asym = pole_report(&out, &lattice.point(pole_node), 2.0 * core.scale);
    reports.extend([sub, ident, harm, asym]);

    Ok(GlueResult {
        field: out,
        reports,
        constants: Some(core.constants),
        scale: Some(core.scale),
        tolerance: tol,
        green: Some(core.green),
        continued: Some(vt),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, Ball, Lattice, Region, Shape};

    fn scene(f: impl Fn(&Point) -> f64) -> (ScalarField, NodeSet) {
        let lat = Lattice::new(Point::new(&[-1.0, -1.0]).unwrap(), 1.0 / 32.0, &[65, 65]).unwrap();
        let c = Point::origin(2);
        let o = rasterize(&Region::new().union(Shape::Ball(Ball::new(c, 1.0).unwrap())), &lat)
            .unwrap();
        let s0 = rasterize(&Region::new().union(Shape::ClosedBall { center: c, radius: 0.2 }), &lat)
            .unwrap()
            .as_set();
        let vdom = o.restrict(&o.as_set().difference(&s0)).unwrap();
        (ScalarField::from_fn(vdom, f).unwrap(), s0)
    }

    #[test]
    fn extension_fills_the_hole() {
        let (v, s0) = scene(|x| x.norm().ln());
        let o = host_domain(&v, &s0).unwrap();
        let e = extend_inward(&v, &o).unwrap();
        assert_eq!(e.domain().active_count(), o.active_count());
        for i in v.domain().active_indices() {
            assert_eq!(e.get(i), v.get(i));
        }
    }

    #[test]
    fn zero_field() {
        let (v, s0) = scene(|_| 0.0);
        let r = glue_full(&v, &s0, &Point::origin(2), 0.4, None, &SolverParams::default(), ToleranceOverride::default())
            .unwrap();
        assert_eq!(r.scale, Some(0.0));
        assert!(r.field.domain().active_indices().all(|i| r.field.get(i) == Some(0.0)));
    }

    #[test]
    fn logarithm_is_certified() {
        let (v, s0) = scene(|x| x.norm().ln());
        let r = glue_full(&v, &s0, &Point::origin(2), 0.45, None, &SolverParams::default(), ToleranceOverride::default())
            .unwrap();
        let failing: Vec<_> = r.reports.iter().filter(|r| !r.passed).collect();
        assert!(failing.is_empty(), "{failing:#?}");
        assert_eq!(r.reports_of(CheckKind::Conclusion).count(), 4);
    }

    #[test]
    fn radius_too_large() {
        let (v, s0) = scene(|x| x.norm().ln());
        match glue_full(&v, &s0, &Point::origin(2), 0.9, None, &SolverParams::default(), ToleranceOverride::default()) {
            Err(Error::Hypothesis(rep)) => assert_eq!(rep.name, "radius-below-distance"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coarse_radius() {
        let (v, s0) = scene(|x| x.norm().ln());
        assert!(matches!(
            glue_full(&v, &s0, &Point::origin(2), 0.1, None, &SolverParams::default(), ToleranceOverride::default()),
            Err(Error::ResolutionTooCoarse(_))
        ));
    }
}
