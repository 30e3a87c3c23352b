use proptest::prelude::*;
use subglue::geometry::{rasterize, Ball, Region, Shape};
use subglue::gluing::{glue_two, quantitative_v0};
use subglue::{GlueConstants, GridDomain, Lattice, Point, ScalarField, ToleranceOverride};

fn lattice() -> Lattice {
    Lattice::new(Point::new(&[-1.0, -1.0]).unwrap(), 1.0 / 16.0, &[33, 33]).unwrap()
}

fn ball(c: [f64; 2], r: f64) -> GridDomain {
    rasterize(
        &Region::new().union(Shape::Ball(Ball::new(Point::new(&c).unwrap(), r).unwrap())),
        &lattice(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn zero_numerator_collapses_to_zero(
        vals in prop::collection::vec(-50.0f64..50.0, 1089), mg in 0.1f64..5.0, lg in -5.0f64..0.0,
    ) {
        let g = ScalarField::new(GridDomain::full(lattice()), vals).unwrap();
        let v0 = quantitative_v0(&g, &GlueConstants::new(0.0, 0.0, mg, lg)).unwrap();
        prop_assert!(v0.domain().active_indices().all(|i| v0.raw()[i] == 0.0));
    }

    #[test]
    fn two_set_gluing_keeps_v_outside_and_dominates(
        a in prop::array::uniform2(-0.4f64..0.4), ra in 0.3f64..0.6,
        b in prop::array::uniform2(-0.4f64..0.4), rb in 0.3f64..0.6,
        k in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let v = ScalarField::from_fn(ball(a, ra), |x| x[0] * x[0] + k[0] * x[1]).unwrap();
        let v0 = ScalarField::from_fn(ball(b, rb), |x| k[1] * x[0] + k[2]).unwrap();
        let r = glue_two(&v, &v0, ToleranceOverride::default()).unwrap();
        let o0 = v0.domain().as_set();
        for i in v.domain().active_indices() {
            let out = r.field.raw()[i];
            prop_assert!(out >= v.raw()[i]);
            if !o0.contains(i) {
                prop_assert_eq!(out.to_bits(), v.raw()[i].to_bits());
            }
        }
        prop_assert!(r.report("outside-identity").unwrap().passed);
    }
}
