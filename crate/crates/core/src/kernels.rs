//! Extended reals, the radial kernels `k_q`, the fundamental kernel
//! `K_{d-2}` and the Kelvin transform.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{inversion, GridDomain, Point};

/// A real number or one of the two ends `-inf`, `+inf`.
///
/// Products follow the measure-theory conventions: `x * (+-inf) = +-inf` for
/// `x > 0`, `0 * (+-inf) = 0`, and `x / (+-inf) = 0` for real `x`. The sum
/// `(+inf) + (-inf)` is rejected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    NegInf,
    Real(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Real(0.0);

    /// Maps `f64` infinities to the marks; NaN is rejected.
    pub fn new(x: f64) -> Result<ExtReal> {
        if x.is_nan() {
            return Err(Error::UndefinedArithmetic("NaN is not an extended real"));
        }
        Ok(ExtReal::from_f64_unchecked(x))
    }

    pub(crate) fn from_f64_unchecked(x: f64) -> ExtReal {
        if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else if x == f64::INFINITY {
            ExtReal::PosInf
        } else {
            ExtReal::Real(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Real(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Real(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Real(_))
    }

    /// `x^+ = max(0, x)`
    pub fn pos_part(self) -> ExtReal {
        self.max(ExtReal::ZERO)
    }

    /// `x^- = (-x)^+`
    pub fn neg_part(self) -> ExtReal {
        (-self).pos_part()
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn checked_add(self, other: ExtReal) -> Result<ExtReal> {
        use ExtReal::*;
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => {
                Err(Error::UndefinedArithmetic("(+inf) + (-inf)"))
            }
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Real(a), Real(b)) => Ok(Real(a + b)),
        }
    }

    pub fn checked_sub(self, other: ExtReal) -> Result<ExtReal> {
        self.checked_add(-other)
    }

    pub fn mul(self, other: ExtReal) -> ExtReal {
        use ExtReal::*;
        match (self, other) {
            (Real(a), Real(b)) => Real(a * b),
            (Real(a), inf) | (inf, Real(a)) => {
                if a == 0.0 {
                    ExtReal::ZERO
                } else if a > 0.0 {
                    inf
                } else {
                    -inf
                }
            }
            (a, b) => {
                if (a == PosInf) == (b == PosInf) {
                    PosInf
                } else {
                    NegInf
                }
            }
        }
    }

    pub fn checked_div(self, other: ExtReal) -> Result<ExtReal> {
        use ExtReal::*;
        match (self, other) {
            (_, Real(b)) if b == 0.0 => Err(Error::UndefinedArithmetic("division by zero")),
            (Real(_), PosInf | NegInf) => Ok(ExtReal::ZERO),
            (PosInf | NegInf, PosInf | NegInf) => {
                Err(Error::UndefinedArithmetic("(+-inf) / (+-inf)"))
            }
            (a, Real(b)) => Ok(a.mul(Real(1.0 / b))),
        }
    }
}

impl std::ops::Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::PosInf => ExtReal::NegInf,
            ExtReal::Real(x) => ExtReal::Real(-x),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN; use [`ExtReal::new`] for untrusted input.
    fn from(x: f64) -> ExtReal {
        ExtReal::new(x).expect("NaN is not an extended real")
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::PosInf => write!(f, "+inf"),
            ExtReal::Real(x) => write!(f, "{x}"),
        }
    }
}

/// Radial kernel `k_q(t)`: `log t` for `q = 0`, `-sgn(q) t^{-q}` otherwise.
pub fn radial_kernel(q: i32, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::KernelDomain(t));
    }
    Ok(match q.cmp(&0) {
        Ordering::Equal => t.ln(),
        Ordering::Greater => -t.powi(-q),
        Ordering::Less => t.powi(-q),
    })
}

/// Inverse of `t -> k_q(t)`, used to turn energies into capacities.
pub fn radial_kernel_inverse(q: i32, value: f64) -> Result<f64> {
    match q.cmp(&0) {
        Ordering::Equal => Ok(value.exp()),
        Ordering::Greater if value < 0.0 => Ok((-value).powf(-1.0 / q as f64)),
        Ordering::Less if value > 0.0 => Ok(value.powf(-1.0 / q as f64)),
        _ => Err(Error::KernelDomain(value)),
    }
}

/// Fundamental kernel `K_{d-2}(x, y)`.
pub fn fundamental_kernel(d: usize, x: &Point, y: &Point) -> ExtReal {
    let t = x.dist(y);
    if t == 0.0 {
        return if d >= 2 {
            ExtReal::NegInf
        } else {
            ExtReal::ZERO
        };
    }
    ExtReal::Real(radial_kernel(d as i32 - 2, t).expect("t > 0"))
}

/// Normalisation `c_d` with `Δ(-K_{d-2}(·, o)) = -c_d δ_o`: `2π` in the plane,
/// `(d-2)|S^{d-1}|` otherwise (`2` on the line).
pub fn kernel_flux(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension {d}"),
    }
}

/// Kelvin transform of `u` with respect to inversion in `∂B(o, 1)`, sampled
/// on the active nodes of `target`: the value at `y` is
/// `|x - o|^{d-2} u(x)` with `x = y*`, and `u(x)` is multilinearly
/// interpolated from the source grid.
pub fn kelvin_transform(u: &ScalarField, o: &Point, target: &GridDomain) -> Result<ScalarField> {
    let d = u.domain().dim();
    if o.dim() != d || target.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: o.dim().min(target.dim()),
        });
    }
    if let Some(i) = u.domain().node_at(o) {
        if u.domain().lattice().point(i).dist(o) < 1e-12 * u.domain().spacing() {
            return Err(Error::Invalid("inversion centre is an active node of the source".into()));
        }
    }
    let lattice = target.lattice();
    let mut values = vec![f64::NAN; lattice.len()];
    for y_idx in target.active_indices() {
        let y = lattice.point(y_idx);
        let x = inversion(&y, o)?;
        let ux = u
            .interpolate(&x)
            .ok_or_else(|| Error::InversionEscapes(x.coords().to_vec()))?;
        let factor = x.dist(o).powi(d as i32 - 2);
        values[y_idx] = ExtReal::Real(factor).mul(ux).to_f64();
    }
    ScalarField::new(target.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, Ball, Lattice, Region, Shape};
    use approx::assert_relative_eq;

    fn p(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    #[test]
    fn radial_kernel_values() {
        assert_eq!(radial_kernel(0, 1.0).unwrap(), 0.0);
        assert_eq!(radial_kernel(1, 2.0).unwrap(), -0.5);
        assert_eq!(radial_kernel(-1, 3.0).unwrap(), 3.0);
        assert!(radial_kernel(0, 0.0).is_err());
        assert!(radial_kernel(1, -1.0).is_err());
    }

    #[test]
    fn radial_kernel_inverse_roundtrip() {
        for q in [-1, 0, 1, 2] {
            for t in [0.1, 1.0, 3.5] {
                let k = radial_kernel(q, t).unwrap();
                assert_relative_eq!(radial_kernel_inverse(q, k).unwrap(), t, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn fundamental_kernel_values() {
        assert_eq!(fundamental_kernel(2, &p(&[0.0, 0.0]), &p(&[1.0, 0.0])), ExtReal::ZERO);
        let x = p(&[0.3, 0.1, 0.2]);
        assert_eq!(fundamental_kernel(3, &x, &x), ExtReal::NegInf);
        assert_eq!(fundamental_kernel(1, &p(&[0.5]), &p(&[0.5])), ExtReal::ZERO);
        assert_eq!(
            fundamental_kernel(3, &p(&[0.0, 0.0, 0.0]), &p(&[0.0, 2.0, 0.0])),
            ExtReal::Real(-0.5)
        );
    }

    #[test]
    fn ext_real_conventions() {
        use ExtReal::*;
        assert_eq!(Real(0.0).mul(PosInf), Real(0.0));
        assert_eq!(Real(0.0).mul(NegInf), Real(0.0));
        assert_eq!(Real(2.0).mul(NegInf), NegInf);
        assert_eq!(Real(-2.0).mul(NegInf), PosInf);
        assert_eq!(NegInf.mul(NegInf), PosInf);
        assert_eq!(Real(5.0).checked_div(PosInf).unwrap(), Real(0.0));
        assert!(PosInf.checked_add(NegInf).is_err());
        assert!(PosInf.checked_div(NegInf).is_err());
        assert_eq!(NegInf.checked_add(Real(3.0)).unwrap(), NegInf);
        assert!(NegInf < Real(-1e300) && Real(1e300) < PosInf);
        assert_eq!(Real(-3.0).neg_part(), Real(3.0));
        assert_eq!(Real(-3.0).pos_part(), Real(0.0));
        assert_eq!(NegInf.neg_part(), PosInf);
        assert!(ExtReal::new(f64::NAN).is_err());
    }

    fn annulus(h: f64, n: usize, inner: f64, outer: f64) -> GridDomain {
        let o = p(&[0.0, 0.0]);
        let lo = -(h * (n - 1) as f64) / 2.0;
        let lat = Lattice::new(p(&[lo, lo]), h, &[n, n]).unwrap();
        let region = Region::new()
            .union(Shape::Ball(Ball::new(o, outer).unwrap()))
            .difference(Shape::ClosedBall { center: o, radius: inner });
        rasterize(&region, &lat).unwrap()
    }

    #[test]
    fn kelvin_in_plane_is_composition() {
        let src = annulus(1.0 / 64.0, 321, 0.4, 2.4);
        let u = ScalarField::from_fn(src, |x| x[0] + 2.0 * x[1]).unwrap();
        let tgt = annulus(1.0 / 32.0, 129, 0.5, 2.0);
        let k = kelvin_transform(&u, &p(&[0.0, 0.0]), &tgt).unwrap();
        for i in tgt.active_indices() {
            let y = tgt.lattice().point(i);
            let x = inversion(&y, &p(&[0.0, 0.0])).unwrap();
            assert_relative_eq!(k.get(i).unwrap(), x[0] + 2.0 * x[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn kelvin_of_log_is_minus_log() {
        let src = annulus(1.0 / 128.0, 641, 0.4, 2.4);
        let u = ScalarField::from_fn(src, |x| x.norm().ln()).unwrap();
        let tgt = annulus(1.0 / 32.0, 129, 0.5, 2.0);
        let k = kelvin_transform(&u, &p(&[0.0, 0.0]), &tgt).unwrap();
        let err = tgt
            .active_indices()
            .map(|i| (k.get(i).unwrap() + tgt.lattice().point(i).norm().ln()).abs())
            .fold(0.0, f64::max);
        // multilinear interpolation error bound h^2/8 * max|D^2 log| on |x| >= 0.5
        let bound = (1.0f64 / 128.0).powi(2) / 8.0 * 2.0 / 0.25;
        assert!(err <= bound, "{err} > {bound}");
    }

    #[test]
    fn kelvin_constant_in_space() {
        let h = 1.0 / 16.0;
        let lat = Lattice::new(p(&[-3.0, -3.0, -3.0]), h, &[97, 97, 97]).unwrap();
        let o = p(&[0.0, 0.0, 0.0]);
        let shell = |a: f64, b: f64| {
            rasterize(
                &Region::new()
                    .union(Shape::Ball(Ball::new(o, b).unwrap()))
                    .difference(Shape::ClosedBall { center: o, radius: a }),
                &lat,
            )
            .unwrap()
        };
        let u = ScalarField::constant(shell(0.4, 2.9), 1.0);
        let tgt_lat = Lattice::new(p(&[-2.0, -2.0, -2.0]), 0.25, &[17, 17, 17]).unwrap();
        let tgt = rasterize(
            &Region::new()
                .union(Shape::Ball(Ball::new(o, 2.0).unwrap()))
                .difference(Shape::ClosedBall { center: o, radius: 0.5 }),
            &tgt_lat,
        )
        .unwrap();
        let k = kelvin_transform(&u, &o, &tgt).unwrap();
        for i in tgt.active_indices() {
            let y = tgt_lat.point(i);
            assert_relative_eq!(k.get(i).unwrap(), 1.0 / y.norm(), max_relative = 1e-12);
        }
    }

    #[test]
    fn kelvin_escape_is_error() {
        let src = annulus(1.0 / 32.0, 129, 0.9, 1.9);
        let u = ScalarField::constant(src, 1.0);
        let tgt = annulus(1.0 / 32.0, 129, 0.3, 1.5);
        assert!(matches!(
            kelvin_transform(&u, &p(&[0.0, 0.0]), &tgt),
            Err(Error::InversionEscapes(_))
        ));
    }
}
