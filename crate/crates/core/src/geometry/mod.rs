//! Points, balls, rasterized open sets and the set operations used by the
//! gluing constructions.
//!
//! Open sets are represented by their rasterization on a uniform lattice:
//! a node is active when its position lies strictly inside the set. What
//! happens to the true boundary below the lattice spacing is not resolved.

mod lattice;
mod sets;

pub use lattice::{GridDomain, Lattice, NodeSet};
pub use sets::{
    components, dist_to_complement, distance_transform, parallel_set, regularized_domain,
};

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// A point of `R^d`, `1 <= d <= 3`, with finite coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: usize,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Point> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::Invalid(format!(
                "point dimension must be in 1..={MAX_DIM}, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid(format!("non-finite coordinate in {coords:?}")));
        }
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Point {
            coords: c,
            dim: coords.len(),
        })
    }

    pub fn origin(dim: usize) -> Point {
        assert!((1..=MAX_DIM).contains(&dim));
        Point {
            coords: [0.0; MAX_DIM],
            dim,
        }
    }

    pub(crate) fn from_array(coords: [f64; MAX_DIM], dim: usize) -> Point {
        Point { coords, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        (0..self.dim)
            .map(|i| (self.coords[i] - other.coords[i]).powi(2))
            .sum()
    }

    pub fn sub(&self, other: &Point) -> Point {
        let mut c = [0.0; MAX_DIM];
        for (i, ci) in c.iter_mut().enumerate().take(self.dim) {
            *ci = self.coords[i] - other.coords[i];
        }
        Point::from_array(c, self.dim)
    }

    pub fn add(&self, other: &Point) -> Point {
        let mut c = [0.0; MAX_DIM];
        for (i, ci) in c.iter_mut().enumerate().take(self.dim) {
            *ci = self.coords[i] + other.coords[i];
        }
        Point::from_array(c, self.dim)
    }

    pub fn scale(&self, s: f64) -> Point {
        let mut c = self.coords;
        for ci in c.iter_mut().take(self.dim) {
            *ci *= s;
        }
        Point::from_array(c, self.dim)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim,
            });
        }
        Ok(())
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords()[i]
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Point, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Point::new(&v).map_err(serde::de::Error::custom)
    }
}

/// Open ball `B(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Ball> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.center.dist(p) < self.radius
    }
}

/// Elementary shapes that can be combined into a [`Region`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// `|x - c| < r`
    Ball(Ball),
    /// `|x - c| <= r`; radius zero selects a single point.
    ClosedBall { center: Point, radius: f64 },
    /// Open box `lo < x < hi` componentwise.
    Box { lo: Point, hi: Point },
}

impl Shape {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Shape::Ball(b) => b.contains(p),
            Shape::ClosedBall { center, radius } => center.dist(p) <= *radius,
            Shape::Box { lo, hi } => {
                (0..p.dim()).all(|i| lo[i] < p[i] && p[i] < hi[i])
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Ball(b) => b.center.dim(),
            Shape::ClosedBall { center, .. } => center.dim(),
            Shape::Box { lo, .. } => lo.dim(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetOp {
    Union,
    Difference,
}

/// A set built left to right from shapes: start empty, then add or remove.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub parts: Vec<(SetOp, Shape)>,
}

impl Region {
    pub fn new() -> Region {
        Region::default()
    }

    pub fn union(mut self, s: Shape) -> Region {
        self.parts.push((SetOp::Union, s));
        self
    }

    pub fn difference(mut self, s: Shape) -> Region {
        self.parts.push((SetOp::Difference, s));
        self
    }

    pub fn contains(&self, p: &Point) -> bool {
        let mut inside = false;
        for (op, s) in &self.parts {
            match op {
                SetOp::Union => inside |= s.contains(p),
                SetOp::Difference => inside &= !s.contains(p),
            }
        }
        inside
    }
}

/// Rasterize a region on a lattice: a node is active iff its position lies
/// in the region.
pub fn rasterize(region: &Region, lattice: &Lattice) -> Result<GridDomain> {
    for (_, s) in &region.parts {
        s.dim_check(lattice.dim())?;
    }
    let mask: Vec<bool> = (0..lattice.len())
        .map(|i| region.contains(&lattice.point(i)))
        .collect();
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyDomain);
    }
    GridDomain::new(lattice.clone(), mask)
}

impl Shape {
    fn dim_check(&self, dim: usize) -> Result<()> {
        match self {
            Shape::Ball(b) => b.center.check_dim(dim),
            Shape::ClosedBall { center, radius } => {
                if !(*radius >= 0.0) {
                    return Err(Error::Invalid(format!("negative radius {radius}")));
                }
                center.check_dim(dim)
            }
            Shape::Box { lo, hi } => {
                lo.check_dim(dim)?;
                hi.check_dim(dim)
            }
        }
    }
}

/// Inversion in the unit sphere centred at `o`: `x -> o + (x - o)/|x - o|^2`.
pub fn inversion(x: &Point, o: &Point) -> Result<Point> {
    x.check_dim(o.dim())?;
    let dx = x.sub(o);
    let n2 = dx.coords().iter().map(|c| c * c).sum::<f64>();
    if n2 == 0.0 {
        return Err(Error::PoleOfInversion);
    }
    Ok(o.add(&dx.scale(1.0 / n2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    #[test]
    fn rasterize_unit_ball() {
        let lat = Lattice::new(p(&[-1.0, -1.0]), 0.5, &[5, 5]).unwrap();
        let region = Region::new().union(Shape::Ball(Ball::new(p(&[0.0, 0.0]), 1.0).unwrap()));
        let dom = rasterize(&region, &lat).unwrap();
        assert_eq!(dom.active_count(), 9);
        for i in dom.active_indices() {
            assert!(dom.lattice().point(i).norm() < 1.0);
        }
    }

    #[test]
    fn rasterize_empty_is_error() {
        let lat = Lattice::new(p(&[-1.0, -1.0]), 0.5, &[5, 5]).unwrap();
        assert!(matches!(rasterize(&Region::new(), &lat), Err(Error::EmptyDomain)));
    }

    #[test]
    fn rasterize_box_minus_ball_matches_brute_force() {
        let h = 1.0 / 16.0;
        let lat = Lattice::new(p(&[-0.25, -0.25]), h, &[25, 25]).unwrap();
        let region = Region::new()
            .union(Shape::Box { lo: p(&[0.0, 0.0]), hi: p(&[1.0, 1.0]) })
            .difference(Shape::Ball(Ball::new(p(&[0.5, 0.5]), 0.25).unwrap()));
        let dom = rasterize(&region, &lat).unwrap();
        let mut brute = 0;
        for i in 0..25 {
            for j in 0..25 {
                let x = -0.25 + i as f64 * h;
                let y = -0.25 + j as f64 * h;
                let in_box = x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0;
                let in_ball = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt() < 0.25;
                if in_box && !in_ball {
                    brute += 1;
                }
            }
        }
        assert_eq!(dom.active_count(), brute);
    }

    #[test]
    fn inversion_examples() {
        let o = p(&[0.0, 0.0]);
        assert_eq!(inversion(&p(&[2.0, 0.0]), &o).unwrap(), p(&[0.5, 0.0]));
        let s = 0.5f64.sqrt();
        let q = inversion(&p(&[s, s]), &o).unwrap();
        assert_relative_eq!(q[0], s, epsilon = 1e-15);
        assert_relative_eq!(q[1], s, epsilon = 1e-15);
        let o1 = p(&[1.0, 0.0]);
        assert_eq!(inversion(&p(&[3.0, 0.0]), &o1).unwrap(), p(&[1.5, 0.0]));
        assert!(matches!(inversion(&o1, &o1), Err(Error::PoleOfInversion)));
    }

    #[test]
    fn point_rejects_bad_input() {
        assert!(Point::new(&[]).is_err());
        assert!(Point::new(&[0.0; 4]).is_err());
        assert!(Point::new(&[f64::NAN]).is_err());
    }
}
