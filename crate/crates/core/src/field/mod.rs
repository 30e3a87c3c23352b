//! Scalar fields on grid domains and their certification.

mod io;
mod means;
mod verify;

pub use io::{read_field, write_field};
pub use means::{mean_inf_constant, sphere_directions, spherical_mean, DEFAULT_SAMPLES};
pub use verify::{
    boundary_limsup, discrete_laplacian, extremal_constants, gradient_bound, is_harmonic,
    is_harmonic_on, is_subharmonic, is_subharmonic_on, stencil_error_estimate, CheckKind,
    Tolerance, VerificationReport,
};

use crate::error::{Error, Result};
use crate::geometry::{GridDomain, Lattice, NodeSet, Point, MAX_DIM};
use crate::kernels::ExtReal;

/// Values on the active nodes of a [`GridDomain`]: finite reals or `-inf`.
///
/// Storage covers the whole lattice; inactive entries hold NaN and are
/// never exposed.
#[derive(Clone, Debug)]
pub struct ScalarField {
    domain: GridDomain,
    values: Vec<f64>,
}

/// Equal domains and equal values on every active node.
impl PartialEq for ScalarField {
    fn eq(&self, other: &ScalarField) -> bool {
        self.domain == other.domain
            && self
                .domain
                .active_indices()
                .all(|i| self.values[i] == other.values[i])
    }
}

impl ScalarField {
    pub fn new(domain: GridDomain, mut values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != domain.lattice().len() {
            return Err(Error::LatticeMismatch {
                expected: domain.lattice().len(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter_mut().enumerate() {
            if domain.is_active(i) {
                if v.is_nan() || *v == f64::INFINITY {
                    return Err(Error::Invalid(format!(
                        "field value {v} at node {i} is not in [-inf, +inf)"
                    )));
                }
            } else {
                *v = f64::NAN;
            }
        }
        Ok(ScalarField { domain, values })
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(&Point) -> f64) -> Result<ScalarField> {
        let lattice = domain.lattice();
        let values = (0..lattice.len())
            .map(|i| {
                if domain.is_active(i) {
                    f(&lattice.point(i))
                } else {
                    f64::NAN
                }
            })
            .collect();
        ScalarField::new(domain, values)
    }

    pub fn constant(domain: GridDomain, c: f64) -> ScalarField {
        ScalarField::from_fn(domain, |_| c).expect("finite constant")
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn lattice(&self) -> &Lattice {
        self.domain.lattice()
    }

    /// Raw lattice-length storage (NaN on inactive nodes).
    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> Option<f64> {
        self.domain.is_active(idx).then(|| self.values[idx])
    }

    pub fn value(&self, idx: usize) -> Option<ExtReal> {
        self.get(idx).map(ExtReal::from_f64_unchecked)
    }

    /// Nodes where the field is `-inf`.
    pub fn minus_infinity_set(&self) -> NodeSet {
        NodeSet::from_fn(self.values.len(), |i| {
            self.domain.is_active(i) && self.values[i] == f64::NEG_INFINITY
        })
    }

    /// Smallest and largest finite value, if any.
    pub fn finite_range(&self) -> Option<(f64, f64)> {
        self.finite_range_on(None)
    }

    pub(crate) fn finite_range_on(&self, region: Option<&NodeSet>) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in self.domain.active_indices() {
            if region.is_some_and(|r| !r.contains(i)) {
                continue;
            }
            let v = self.values[i];
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Same values restricted to a smaller domain on the same lattice.
    pub fn restrict(&self, domain: &GridDomain) -> Result<ScalarField> {
        if domain.lattice() != self.lattice() {
            return Err(Error::Invalid("restriction to a different lattice".into()));
        }
        if !domain.as_set().is_subset(&self.domain.as_set()) {
            return Err(Error::Invalid("restriction domain is not a subset".into()));
        }
        ScalarField::new(domain.clone(), self.values.clone())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| if self.domain.is_active(i) { f(v) } else { f64::NAN })
            .collect();
        ScalarField::new(self.domain.clone(), values)
    }

    /// Multilinear interpolation at `p`. `None` when a cell corner carrying
    /// positive weight is inactive or `p` is off the lattice. A `-inf`
    /// corner with positive weight makes the result `-inf`; corners with zero
    /// weight are ignored (`0 * (-inf) = 0`).
    pub fn interpolate(&self, p: &Point) -> Option<ExtReal> {
        let lattice = self.lattice();
        let d = lattice.dim();
        if p.dim() != d {
            return None;
        }
        let h = lattice.spacing();
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0f64; MAX_DIM];
        for a in 0..d {
            let t = (p[a] - lattice.origin()[a]) / h;
            let n = lattice.shape()[a];
            // tolerate round-off at the lattice faces
            let eps = 1e-9;
            if t < -eps || t > (n - 1) as f64 + eps {
                return None;
            }
            let t = t.clamp(0.0, (n - 1) as f64);
            let b = (t.floor() as usize).min(n - 2);
            base[a] = b;
            frac[a] = t - b as f64;
        }
        let mut acc = 0.0;
        let mut minus_inf = false;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = 0usize;
            for a in 0..d {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                idx += (base[a] + bit) * lattice.stride(a);
            }
            if w == 0.0 {
                continue;
            }
            if !self.domain.is_active(idx) {
                return None;
            }
            let v = self.values[idx];
            if v == f64::NEG_INFINITY {
                minus_inf = true;
            } else {
                acc += w * v;
            }
        }
        Some(if minus_inf {
            ExtReal::NegInf
        } else {
            ExtReal::Real(acc)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid2(n: usize, h: f64) -> GridDomain {
        GridDomain::full(Lattice::new(Point::new(&[0.0, 0.0]).unwrap(), h, &[n, n]).unwrap())
    }

    #[test]
    fn rejects_plus_infinity_and_nan() {
        let d = grid2(3, 1.0);
        let mut v = vec![0.0; 9];
        v[4] = f64::INFINITY;
        assert!(ScalarField::new(d.clone(), v.clone()).is_err());
        v[4] = f64::NAN;
        assert!(ScalarField::new(d.clone(), v.clone()).is_err());
        v[4] = f64::NEG_INFINITY;
        let f = ScalarField::new(d, v).unwrap();
        assert_eq!(f.minus_infinity_set().count(), 1);
    }

    #[test]
    fn interpolation_is_exact_on_bilinear() {
        let f = ScalarField::from_fn(grid2(5, 0.5), |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1])
            .unwrap();
        for &(a, b) in &[(0.1, 0.2), (1.3, 1.9), (2.0, 2.0), (0.0, 0.0)] {
            let p = Point::new(&[a, b]).unwrap();
            let want = 1.0 + 2.0 * a - b + 0.5 * a * b;
            assert_relative_eq!(f.interpolate(&p).unwrap().to_f64(), want, epsilon = 1e-12);
        }
        assert!(f.interpolate(&Point::new(&[2.1, 0.0]).unwrap()).is_none());
    }

    #[test]
    fn interpolation_minus_infinity_weighting() {
        let d = grid2(3, 1.0);
        let mut v = vec![1.0; 9];
        v[0] = f64::NEG_INFINITY;
        let f = ScalarField::new(d, v).unwrap();
        // exactly on node (1,0): the -inf corner has zero weight
        let on_node = f.interpolate(&Point::new(&[1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(on_node, ExtReal::Real(1.0));
        let inside = f.interpolate(&Point::new(&[0.5, 0.5]).unwrap()).unwrap();
        assert_eq!(inside, ExtReal::NegInf);
    }
}
