use proptest::prelude::*;
use subglue::geometry::{inversion, parallel_set, rasterize, Ball, Region, Shape};
use subglue::{GridDomain, Lattice, Point};

fn grid() -> GridDomain {
    GridDomain::full(Lattice::new(Point::new(&[-1.0, -1.0]).unwrap(), 1.0 / 16.0, &[33, 33]).unwrap())
}

proptest! {
    #[test]
    fn parallel_sets_grow_with_radius(
        cx in -0.5f64..0.5, cy in -0.5f64..0.5, rad in 0.05f64..0.3,
        r1 in 0.01f64..0.4, extra in 0.0f64..0.4,
    ) {
        let g = grid();
        let seed = rasterize(
            &Region::new().union(Shape::ClosedBall { center: Point::new(&[cx, cy]).unwrap(), radius: rad }),
            g.lattice(),
        ).unwrap().as_set();
        let a = parallel_set(&g, &seed, r1).unwrap();
        let b = parallel_set(&g, &seed, r1 + extra).unwrap();
        prop_assert!(seed.is_subset(&a));
        prop_assert!(a.is_subset(&b));
    }

    #[test]
    fn inversion_is_an_involution(
        x in prop::array::uniform3(-3.0f64..3.0), o in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let xp = Point::new(&x).unwrap();
        let op = Point::new(&o).unwrap();
        prop_assume!(xp.dist(&op) > 1e-3);
        let back = inversion(&inversion(&xp, &op).unwrap(), &op).unwrap();
        prop_assert!(back.dist(&xp) <= 1e-9 * (1.0 + xp.norm()));
    }

    #[test]
    fn inversion_fixes_the_unit_sphere(t in 0.0f64..std::f64::consts::TAU) {
        let o = Point::new(&[0.25, -0.5]).unwrap();
        let x = Point::new(&[0.25 + t.cos(), -0.5 + t.sin()]).unwrap();
        prop_assert!(inversion(&x, &o).unwrap().dist(&x) < 1e-12);
    }
}

#[test]
fn ball_parallel_set_is_a_larger_ball() {
    let g = grid();
    let c = Point::origin(2);
    let seed = rasterize(&Region::new().union(Shape::ClosedBall { center: c, radius: 0.25 }), g.lattice())
        .unwrap()
        .as_set();
    let grown = parallel_set(&g, &seed, 0.25).unwrap();
    let h = g.spacing();
    for i in g.active_indices() {
        let t = g.lattice().point(i).norm();
        if t < 0.5 - 2.0 * h {
            assert!(grown.contains(i), "{t}");
        }
        if t > 0.5 + 2.0 * h {
            assert!(!grown.contains(i), "{t}");
        }
    }
    let open = rasterize(&Region::new().union(Shape::Ball(Ball::new(c, 0.9).unwrap())), g.lattice()).unwrap();
    assert!(parallel_set(&open, &seed, 0.8).unwrap().is_subset(&open.as_set()));
}
