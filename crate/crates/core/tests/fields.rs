use proptest::prelude::*;
use subglue::field::{is_subharmonic, read_field, spherical_mean, write_field};
use subglue::geometry::{rasterize, Ball, Region, Shape};
use subglue::{GridDomain, Lattice, Point, ScalarField};

fn disk() -> GridDomain {
    let lat = Lattice::new(Point::new(&[-1.0, -1.0]).unwrap(), 1.0 / 16.0, &[33, 33]).unwrap();
    rasterize(&Region::new().union(Shape::Ball(Ball::new(Point::origin(2), 0.95).unwrap())), &lat).unwrap()
}

fn convex(a: [f64; 2], k: f64, b: [f64; 3]) -> impl Fn(&Point) -> f64 {
    move |x| k * ((x[0] - a[0]).powi(2) + (x[1] - a[1]).powi(2)) + b[0] * x[0] + b[1] * x[1] + b[2]
}

proptest! {
    #[test]
    fn max_of_subharmonic_fields_is_subharmonic(
        a in prop::array::uniform2(-1.0f64..1.0), b in prop::array::uniform2(-1.0f64..1.0),
        ka in 0.0f64..2.0, kb in 0.0f64..2.0,
        la in prop::array::uniform3(-1.0f64..1.0), lb in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let f = ScalarField::from_fn(disk(), convex(a, ka, la)).unwrap();
        let g = ScalarField::from_fn(disk(), convex(b, kb, lb)).unwrap();
        prop_assert!(is_subharmonic(&f, 1e-9).passed);
        prop_assert!(is_subharmonic(&g, 1e-9).passed);
        let vals: Vec<f64> = f.raw().iter().zip(g.raw()).map(|(x, y)| x.max(*y)).collect();
        let m = ScalarField::new(disk(), vals).unwrap();
        prop_assert!(is_subharmonic(&m, 1e-9).passed);
    }

    #[test]
    fn field_files_round_trip(
        vals in prop::collection::vec(prop_oneof![9 => -1e6f64..1e6, 1 => Just(f64::NEG_INFINITY)], 1089),
    ) {
        let f = ScalarField::new(disk(), vals).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        let back = read_field(buf.as_slice()).unwrap();
        prop_assert_eq!(back.domain(), f.domain());
        for i in f.domain().active_indices() {
            prop_assert_eq!(back.raw()[i].to_bits(), f.raw()[i].to_bits());
        }
    }

    #[test]
    fn affine_means_equal_centre_values(
        c in prop::array::uniform2(-0.3f64..0.3), r in 0.05f64..0.5, slope in prop::array::uniform2(-2.0f64..2.0),
    ) {
        let f = ScalarField::from_fn(disk(), |x| slope[0] * x[0] + slope[1] * x[1] - 0.5).unwrap();
        let p = Point::new(&c).unwrap();
        let m = spherical_mean(&f, &p, r, 256).unwrap().to_f64();
        prop_assert!((m - (slope[0] * c[0] + slope[1] * c[1] - 0.5)).abs() < 1e-9);
    }
}

#[test]
fn concave_field_is_not_subharmonic() {
    let f = ScalarField::from_fn(disk(), |x| -(x[0] * x[0] + x[1] * x[1])).unwrap();
    let rep = is_subharmonic(&f, 1e-6);
    assert!(!rep.passed);
    assert!((rep.worst_violation - 4.0).abs() < 1e-9);
}
