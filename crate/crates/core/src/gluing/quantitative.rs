use super::basic::glue_two_with;
use super::{
    as_kind, excess, identity_report, interface, location, same_lattice, upper_limit,
    GlueConstants, GlueResult, ToleranceOverride,
};
use crate::error::{Error, Result};
use crate::field::{is_subharmonic, CheckKind, ScalarField, Tolerance, VerificationReport};
use crate::kernels::ExtReal;

/// `v0 = s (2g - M_g - m_g)` with `s = (M_v^+ + m_v^-) / (M_g - m_g)`,
/// evaluated in extended-real arithmetic so that `-inf` values of `g` stay
/// `-inf` (or become `0` when `s = 0`).
pub fn quantitative_v0(g: &ScalarField, c: &GlueConstants) -> Result<ScalarField> {
    let s = ExtReal::Real(c.scale()?);
    let big = ExtReal::Real(c.upper_g);
    let small = ExtReal::Real(c.lower_g);
    let mut values = vec![f64::NAN; g.lattice().len()];
    for i in g.domain().active_indices() {
        let x = g.value(i).expect("active");
        let t = ExtReal::Real(2.0).mul(x).checked_sub(big)?.checked_sub(small)?;
        values[i] = s.mul(t).to_f64();
    }
    ScalarField::new(g.domain().clone(), values)
}

/// Quantitative gluing of `v` on `O` with the affine image of `g` on `O0`
/// fixed by the constants `c`.
pub fn glue_quantitative(
    v: &ScalarField,
    g: &ScalarField,
    c: &GlueConstants,
    tol: ToleranceOverride,
) -> Result<GlueResult> {
    same_lattice(v.lattice(), g.lattice())?;
    for (name, x, label) in [
        ("lower-constant", c.lower_v, "m_v"),
        ("upper-constant", c.upper_v, "M_v"),
    ] {
        if !x.is_finite() {
            return Err(Error::Hypothesis(Box::new(VerificationReport::verdict(
                name,
                CheckKind::Hypothesis,
                false,
                format!("{label} = {x} is not finite"),
            ))));
        }
    }
    if !(c.lower_g < c.upper_g) || !c.lower_g.is_finite() || !c.upper_g.is_finite() {
        return Err(Error::Hypothesis(Box::new(VerificationReport::verdict(
            "green-level-chain",
            CheckKind::Hypothesis,
            false,
            format!("m_g = {} is not strictly below M_g = {}", c.lower_g, c.upper_g),
        ))));
    }

    let v0 = quantitative_v0(g, c)?;
    let s = c.scale()?;
    let tol = tol.resolve(|| Tolerance::estimate(&[(v, None), (&v0, None)]));
    let lattice = v.lattice();
    let o = v.domain().as_set();
    let o0 = g.domain().as_set();
    let both = o.intersection(&o0);
    let inner_rim = interface(&o.difference(&o0), &both, lattice);
    let outer_rim = interface(&o0.difference(&o), &both, lattice);
    let lower_v = ExtReal::Real(c.lower_v);
    let upper_v = ExtReal::Real(c.upper_v);
    let lower_g = ExtReal::Real(c.lower_g);
    let upper_g = ExtReal::Real(c.upper_g);

    let mut lower = VerificationReport::new("lower-constant", CheckKind::Hypothesis, tol.value);
    for x in inner_rim.iter() {
        lower.record(excess(lower_v, v.value(x).expect("active")), Some(&location(lattice, x)));
    }
    let lower = lower.with_detail(format!("m_v = {} <= v on O ∩ ∂O0", c.lower_v));

    let mut upper = VerificationReport::new("upper-constant", CheckKind::Hypothesis, tol.value);
    for x in outer_rim.iter() {
        upper.record(excess(upper_limit(v, &both, x), upper_v), Some(&location(lattice, x)));
    }
    let upper = upper.with_detail(format!("upper limit of v <= M_v = {} on O0 ∩ ∂O", c.upper_v));

    let mut chain = VerificationReport::new("green-level-chain", CheckKind::Hypothesis, tol.value);
    let mut sup_g = ExtReal::NegInf;
    for x in inner_rim.iter() {
        let ls = upper_limit(g, &both, x);
        sup_g = sup_g.max(ls);
        chain.record(excess(ls, lower_g), Some(&location(lattice, x)));
    }
    for x in outer_rim.iter() {
        chain.record(excess(upper_g, g.value(x).expect("active")), Some(&location(lattice, x)));
    }
    if !inner_rim.is_empty() && sup_g == ExtReal::NegInf {
        chain.record(f64::INFINITY, None);
    }
    let chain = chain.with_detail(format!(
        "upper limit of g on O ∩ ∂O0 <= m_g = {} < M_g = {} <= g on O0 ∩ ∂O",
        c.lower_g, c.upper_g
    ));

    let chain_tol = Tolerance {
        laplacian: tol.laplacian,
        value: tol.value * (1.0 + 2.0 * s),
    };
    let (out, stage) = glue_two_with(v, &v0, chain_tol)?;
    let a = ExtReal::Real(c.upper_v.max(0.0) + (-c.lower_v).max(0.0));

    let mut outer_chain = VerificationReport::new("proof-chain-outer", CheckKind::Stage, chain_tol.value);
    for x in outer_rim.iter() {
        let step1 = excess(upper_limit(v, &both, x), a);
        let step2 = excess(a, v0.value(x).expect("active"));
        outer_chain.record(step1.max(step2), Some(&location(lattice, x)));
    }
    let outer_chain =
        outer_chain.with_detail("upper limit of v <= M_v^+ + m_v^- <= v0 on O0 ∩ ∂O");

    let mut inner_chain = VerificationReport::new("proof-chain-inner", CheckKind::Stage, chain_tol.value);
    for x in inner_rim.iter() {
        let step1 = excess(upper_limit(&v0, &both, x), -a);
        let step2 = excess(lower_v, v.value(x).expect("active"));
        inner_chain.record(step1.max(step2), Some(&location(lattice, x)));
    }
    let inner_chain = inner_chain
        .with_detail("upper limit of v0 <= -(M_v^+ + m_v^-) <= -m_v^- <= m_v <= v on O ∩ ∂O0");

    let mut reports = vec![lower, upper, chain];
    reports.extend(stage.into_iter().map(|r| as_kind(r, CheckKind::Stage)));
    reports.push(outer_chain);
    reports.push(inner_chain);
    let mut sub = is_subharmonic(&out, tol.laplacian);
    sub.kind = CheckKind::Conclusion;
    reports.push(sub);
    reports.push(identity_report(&out, v, &o.difference(&o0), "O \\ O0"));
    Ok(GlueResult {
        field: out,
        reports,
        constants: Some(*c),
        scale: Some(s),
        tolerance: tol,
        green: None,
        continued: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, Ball, GridDomain, Lattice, Point, Region, Shape};

    fn grid() -> GridDomain {
        GridDomain::full(Lattice::new(Point::new(&[0.0, 0.0]).unwrap(), 0.5, &[5, 5]).unwrap())
    }

    #[test]
    fn formula_on_constants() {
        let g = ScalarField::constant(grid(), 2.0);
        let v0 = quantitative_v0(&g, &GlueConstants::new(1.0, 0.0, 2.0, 0.0)).unwrap();
        assert!(v0.domain().active_indices().all(|i| v0.get(i) == Some(1.0)));
        let zero = quantitative_v0(&g, &GlueConstants::new(0.0, 0.0, 2.0, 0.0)).unwrap();
        assert!(zero.domain().active_indices().all(|i| zero.get(i) == Some(0.0)));
        let mid = ScalarField::constant(grid(), 1.5);
        let z = quantitative_v0(&mid, &GlueConstants::new(3.0, -1.0, 2.0, 1.0)).unwrap();
        assert!(z.domain().active_indices().all(|i| z.get(i) == Some(0.0)));
        assert!(quantitative_v0(&g, &GlueConstants::new(1.0, 0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn minus_infinity_conventions() {
        let d = grid();
        let mut vals = vec![1.0; 25];
        vals[12] = f64::NEG_INFINITY;
        let g = ScalarField::new(d, vals).unwrap();
        let v0 = quantitative_v0(&g, &GlueConstants::new(1.0, 0.0, 2.0, 0.0)).unwrap();
        assert_eq!(v0.get(12), Some(f64::NEG_INFINITY));
        let z = quantitative_v0(&g, &GlueConstants::new(0.0, 0.0, 2.0, 0.0)).unwrap();
        assert_eq!(z.get(12), Some(0.0));
    }

    fn annulus_scene() -> (ScalarField, ScalarField) {
        let h = 1.0 / 32.0;
        let lat = Lattice::new(Point::new(&[-1.0, -1.0]).unwrap(), h, &[65, 65]).unwrap();
        let c = Point::origin(2);
        let o = rasterize(
            &Region::new().union(Shape::Ball(Ball::new(c, 0.6).unwrap())),
            &lat,
        )
        .unwrap();
        let o0 = rasterize(
            &Region::new()
                .union(Shape::Ball(Ball::new(c, 0.95).unwrap()))
                .difference(Shape::ClosedBall { center: c, radius: 0.3 }),
            &lat,
        )
        .unwrap();
        let v = ScalarField::from_fn(o, |x| x[0] + 0.1).unwrap();
        let g = ScalarField::from_fn(o0, |x| x.norm().ln()).unwrap();
        (v, g)
    }

    #[test]
    fn annulus_scene_is_certified() {
        let (v, g) = annulus_scene();
        // v in [-0.5, 0.7] on the interfaces; log|x| <= log 0.36 next to |x| = 0.3 and >= log 0.58 near 0.6
        let c = GlueConstants::new(0.8, -0.6, 0.6f64.ln() - 0.05, 0.36f64.ln());
        let r = glue_quantitative(&v, &g, &c, ToleranceOverride::default()).unwrap();
        assert!(r.verified(), "{:#?}", r.reports.iter().filter(|r| !r.passed).collect::<Vec<_>>());
        assert!(r.report("proof-chain-outer").unwrap().passed);
        assert!(r.report("proof-chain-inner").unwrap().passed);
    }

    #[test]
    fn violated_green_chain_is_named() {
        let (v, g) = annulus_scene();
        let bad = GlueConstants::new(0.8, -0.6, 0.6f64.ln() - 0.05, 0.2f64.ln());
        let r = glue_quantitative(&v, &g, &bad, ToleranceOverride::default()).unwrap();
        assert!(!r.report("green-level-chain").unwrap().passed);
        let flipped = GlueConstants::new(0.8, -0.6, -1.0, -0.5);
        match glue_quantitative(&v, &g, &flipped, ToleranceOverride::default()) {
            Err(Error::Hypothesis(rep)) => assert_eq!(rep.name, "green-level-chain"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_field_gives_zero_scale() {
        let (v, g) = annulus_scene();
        let v = v.map(|_| 0.0).unwrap();
        let c = GlueConstants::new(0.0, 0.0, 0.6f64.ln() - 0.05, 0.36f64.ln());
        let r = glue_quantitative(&v, &g, &c, ToleranceOverride::default()).unwrap();
        assert_eq!(r.scale, Some(0.0));
        assert!(r.verified(), "{:#?}", r.reports.iter().filter(|r| !r.passed).collect::<Vec<_>>());
        assert!(r.field.domain().active_indices().all(|i| r.field.get(i) == Some(0.0)));
    }
}
