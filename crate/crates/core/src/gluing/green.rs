use super::{
    excess, identity_report, location, pole_report, quantitative_v0, renamed, GlueConstants,
    GlueResult, ToleranceOverride,
};
use crate::error::{Error, Result};
use crate::field::{is_harmonic_on, is_subharmonic, CheckKind, ScalarField, Tolerance, VerificationReport};
use crate::geometry::{GridDomain, NodeSet, Point};
use crate::harmonic::{green_function, green_min_constant, GreenField, SolverParams};
use crate::kernels::ExtReal;

/// Inputs of [`glue_green`].
#[derive(Clone, Debug)]
pub struct GreenGlueInput<'a> {
    /// Field on `O \ S0` (values on `S0`, if any, are ignored).
    pub v: &'a ScalarField,
    pub s0: &'a NodeSet,
    pub s: &'a NodeSet,
    /// Regular domain with `S0 ⋐ D ⋐ S`.
    pub d: &'a GridDomain,
    pub pole: Point,
    /// `m_v <= v` on `S \ S0`.
    pub lower_v: f64,
    /// `v <= M_v` on `S \ S0`.
    pub upper_v: f64,
}

pub(crate) struct GreenCore {
    pub field: ScalarField,
    pub reports: Vec<VerificationReport>,
    pub green: GreenField,
    pub constants: GlueConstants,
    pub scale: f64,
}

pub(crate) fn hypothesis_error(name: &str, detail: String) -> Error {
    Error::Hypothesis(Box::new(VerificationReport::verdict(
        name,
        CheckKind::Hypothesis,
        false,
        detail,
    )))
}

/// Host domain `O = dom v ∪ S0`.
pub(crate) fn host_domain(v: &ScalarField, s0: &NodeSet) -> Result<GridDomain> {
    v.domain().check_set(s0)?;
    GridDomain::from_set(v.lattice().clone(), &v.domain().as_set().union(s0))
}

/// Green gluing on a host `o`, once the inclusion chain is known to hold.
#[allow(clippy::too_many_arguments)]
pub(crate) fn green_core(
    v: &ScalarField,
    o: &GridDomain,
    s0: &NodeSet,
    s: &NodeSet,
    d: &GridDomain,
    pole: &Point,
    lower_v: f64,
    upper_v: f64,
    params: &SolverParams,
    tol: Tolerance,
) -> Result<GreenCore> {
    let lattice = o.lattice();
    let shell = s.difference(s0);
    let mut bounds = VerificationReport::new("shell-bounds", CheckKind::Hypothesis, tol.value);
    for i in shell.iter() {
        let x = v.value(i).ok_or_else(|| {
            Error::Invalid(format!(
                "the field is undefined at {:?} in the shell",
                lattice.point(i).coords()
            ))
        })?;
        let bad = excess(ExtReal::Real(lower_v), x).max(excess(x, ExtReal::Real(upper_v)));
        bounds.record(bad, Some(&location(lattice, i)));
    }
    let bounds = bounds.with_detail(format!("m_v = {lower_v} <= v <= M_v = {upper_v} on S \\ S0"));

    let g = green_function(d, pole, params).map_err(|e| e.at_stage("green"))?;
    let upper_g = green_min_constant(&g, s0).map_err(|e| e.at_stage("green-minimum"))?;
    let constants = GlueConstants::new(upper_v, lower_v, upper_g, 0.0);
    let scale = constants.scale()?;
    let v0 = quantitative_v0(g.field(), &constants)?;

    let pole_node = g.pole_node();
    let host = o.punctured(pole_node);
    let mut values = vec![f64::NAN; lattice.len()];
    for i in host.active_indices() {
        values[i] = if s0.contains(i) {
            v0.raw()[i]
        } else if shell.contains(i) {
            v0.raw()[i].max(v.raw()[i])
        } else {
            v.raw()[i]
        };
    }
    let out = ScalarField::new(host, values)?;

    let mut core = s0.clone();
    core.remove(pole_node);
    let sub = renamed(is_subharmonic(&out, tol.laplacian), "subharmonic", CheckKind::Conclusion);
    let harm = renamed(
        is_harmonic_on(&out, Some(&core), tol.laplacian),
        "harmonic-core",
        CheckKind::Conclusion,
    );
    let mut pos = VerificationReport::new("nonnegative-core", CheckKind::Conclusion, tol.value);
    for i in core.iter() {
        pos.record((-out.raw()[i]).max(0.0), Some(&location(lattice, i)));
    }
    let pos = pos.with_detail("V >= 0 on S0 minus the pole");
    let asym = pole_report(&out, &lattice.point(pole_node), 2.0 * scale);
    let outside = o.as_set().difference(s);
    let ident = identity_report(&out, v, &outside, "O \\ S");

    Ok(GreenCore {
        field: out,
        reports: vec![bounds, sub, harm, pos, asym, ident],
        green: g,
        constants,
        scale,
    })
}

/// Glue `v` with the scaled Green function `s (2 g_D(·, o) - M_g)` inside
/// `S`: the result is that function on `S0`, the maximum of both on
/// `S \ S0`, and `v` on `O \ S`.
pub fn glue_green(
    input: &GreenGlueInput<'_>,
    params: &SolverParams,
    tol: ToleranceOverride,
) -> Result<GlueResult> {
    let GreenGlueInput {
        v,
        s0,
        s,
        d,
        pole,
        lower_v,
        upper_v,
    } = *input;
    let o = host_domain(v, s0)?;
    let lattice = o.lattice();
    if d.lattice() != lattice {
        return Err(Error::Invalid("the Green domain lives on a different lattice".into()));
    }
    o.check_set(s)?;
    for (name, x) in [("m_v", lower_v), ("M_v", upper_v)] {
        if !x.is_finite() {
            return Err(hypothesis_error("shell-bounds", format!("{name} = {x} is not finite")));
        }
    }

    let pole_inside = o
        .node_at(&pole)
        .is_some_and(|i| s0.interior(lattice).contains(i));
    if !pole_inside {
        return Err(hypothesis_error(
            "inclusion-chain",
            format!("the pole {:?} is not an interior node of S0", pole.coords()),
        ));
    }
    if !s0.compactly_inside(s, lattice) {
        return Err(hypothesis_error("inclusion-chain", "S0 is not compactly inside S".into()));
    }
    if !s.compactly_inside(&o.as_set(), lattice) {
        return Err(hypothesis_error("inclusion-chain", "S is not compactly inside O".into()));
    }
    let dset = d.as_set();
    if !s0.compactly_inside(&dset, lattice) || !dset.compactly_inside(s, lattice) {
        return Err(hypothesis_error(
            "domain-sandwich",
            "the Green domain D does not satisfy S0 ⋐ D ⋐ S".into(),
        ));
    }

    let outside = o.as_set().difference(s0);
    let tol = tol.resolve(|| Tolerance::estimate(&[(v, Some(&outside))]));
    let core = green_core(v, &o, s0, s, d, &pole, lower_v, upper_v, params, tol)?;
    Ok(GlueResult {
        field: core.field,
        reports: core.reports,
        constants: Some(core.constants),
        scale: Some(core.scale),
        tolerance: tol,
        green: Some(core.green),
        continued: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, Ball, Lattice, Region, Shape};

    struct Scene {
        v: ScalarField,
        s0: NodeSet,
        s: NodeSet,
        d: GridDomain,
    }

    fn scene(f: impl Fn(&Point) -> f64) -> Scene {
        let lat = Lattice::new(Point::new(&[-1.0, -1.0]).unwrap(), 1.0 / 32.0, &[65, 65]).unwrap();
        let c = Point::origin(2);
        let closed = |r: f64| {
            rasterize(&Region::new().union(Shape::ClosedBall { center: c, radius: r }), &lat)
                .unwrap()
                .as_set()
        };
        let o = rasterize(&Region::new().union(Shape::Ball(Ball::new(c, 0.99).unwrap())), &lat)
            .unwrap();
        let s0 = closed(0.2);
        let s = closed(0.5);
        let d = rasterize(&Region::new().union(Shape::Ball(Ball::new(c, 0.35).unwrap())), &lat)
            .unwrap();
        let vdom = o.restrict(&o.as_set().difference(&s0)).unwrap();
        Scene {
            v: ScalarField::from_fn(vdom, f).unwrap(),
            s0,
            s,
            d,
        }
    }

    #[test]
    fn zero_field_glues_to_zero() {
        let sc = scene(|_| 0.0);
        let input = GreenGlueInput {
            v: &sc.v,
            s0: &sc.s0,
            s: &sc.s,
            d: &sc.d,
            pole: Point::origin(2),
            lower_v: 0.0,
            upper_v: 0.0,
        };
        let r = glue_green(&input, &SolverParams::default(), ToleranceOverride::default()).unwrap();
        assert_eq!(r.scale, Some(0.0));
        assert!(r.field.domain().active_indices().all(|i| r.field.get(i) == Some(0.0)));
        assert!(r.report("subharmonic").unwrap().passed);
    }

    #[test]
    fn logarithm_scene_is_certified() {
        let sc = scene(|x| x.norm().ln());
        let input = GreenGlueInput {
            v: &sc.v,
            s0: &sc.s0,
            s: &sc.s,
            d: &sc.d,
            pole: Point::origin(2),
            lower_v: 0.2f64.ln(),
            upper_v: 0.5f64.ln(),
        };
        let r = glue_green(&input, &SolverParams::default(), ToleranceOverride::default()).unwrap();
        let failing: Vec<_> = r.reports.iter().filter(|r| !r.passed).collect();
        assert!(r.verified(), "{failing:#?}");
        let s = r.scale.unwrap();
        let m_g = r.constants.unwrap().upper_g;
        assert!((s - (-(0.2f64.ln())) / m_g).abs() < 1e-12);
        assert!(r.report("pole-asymptotics").unwrap().worst_violation < 0.05);
    }

    #[test]
    fn pole_outside_s0_is_rejected() {
        let sc = scene(|x| x.norm().ln());
        let input = GreenGlueInput {
            v: &sc.v,
            s0: &sc.s0,
            s: &sc.s,
            d: &sc.d,
            pole: Point::new(&[0.6, 0.0]).unwrap(),
            lower_v: -2.0,
            upper_v: 0.0,
        };
        match glue_green(&input, &SolverParams::default(), ToleranceOverride::default()) {
            Err(Error::Hypothesis(rep)) => assert_eq!(rep.name, "inclusion-chain"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn green_domain_must_sit_between() {
        let sc = scene(|x| x.norm().ln());
        let big = sc.v.domain().clone();
        let input = GreenGlueInput {
            v: &sc.v,
            s0: &sc.s0,
            s: &sc.s,
            d: &big,
            pole: Point::origin(2),
            lower_v: -2.0,
            upper_v: 0.0,
        };
        match glue_green(&input, &SolverParams::default(), ToleranceOverride::default()) {
            Err(Error::Hypothesis(rep)) => assert_eq!(rep.name, "domain-sandwich"),
            other => panic!("{other:?}"),
        }
    }
}
