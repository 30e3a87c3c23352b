use std::f64::consts::PI;

use super::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::{NodeSet, Point, MAX_DIM};
use crate::kernels::ExtReal;

pub const DEFAULT_SAMPLES: usize = 256;

/// Unit directions used to sample a sphere in dimension `d`: equally spaced
/// angles on the circle, a Fibonacci lattice on `S²`, and `±1` on the line.
pub fn sphere_directions(d: usize, samples: usize) -> Vec<[f64; MAX_DIM]> {
    match d {
        1 => vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        2 => (0..samples)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / samples as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..samples)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / samples as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    [rho * phi.cos(), rho * phi.sin(), z]
                })
                .collect()
        }
        _ => panic!("unsupported dimension {d}"),
    }
}

fn mean_with(v: &ScalarField, x: &Point, r: f64, dirs: &[[f64; MAX_DIM]]) -> Result<ExtReal> {
    let d = x.dim();
    let mut sum = 0.0;
    let mut minus_inf = false;
    for u in dirs {
        let mut c = [0.0; MAX_DIM];
        for a in 0..d {
            c[a] = x[a] + r * u[a];
        }
        let p = Point::new(&c[..d])?;
        match v.interpolate(&p) {
            None => {
                return Err(Error::SphereExitsDomain {
                    center: x.coords().to_vec(),
                    radius: r,
                })
            }
            Some(ExtReal::Real(y)) => sum += y,
            Some(_) => minus_inf = true,
        }
    }
    Ok(if minus_inf {
        ExtReal::NegInf
    } else {
        ExtReal::Real(sum / dirs.len() as f64)
    })
}

/// Average of `v` over `∂B(x, r)` with respect to normalised surface measure,
/// approximated by `samples` interpolated point values.
pub fn spherical_mean(v: &ScalarField, x: &Point, r: f64, samples: usize) -> Result<ExtReal> {
    let d = v.domain().dim();
    if x.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.dim(),
        });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Invalid(format!("sphere radius must be positive, got {r}")));
    }
    if samples < 8 {
        return Err(Error::Invalid(format!("at least 8 samples are required, got {samples}")));
    }
    mean_with(v, x, r, &sphere_directions(d, samples))
}

/// `inf` over the nodes of `shell` of the spherical mean of radius `r`.
pub fn mean_inf_constant(v: &ScalarField, shell: &NodeSet, r: f64) -> Result<ExtReal> {
    v.domain().check_set(shell)?;
    if shell.is_empty() {
        return Err(Error::Invalid("mean infimum over an empty shell".into()));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Invalid(format!("sphere radius must be positive, got {r}")));
    }
    let lattice = v.lattice();
    let dirs = sphere_directions(lattice.dim(), DEFAULT_SAMPLES);
    let mut best = ExtReal::PosInf;
    for i in shell.iter() {
        best = best.min(mean_with(v, &lattice.point(i), r, &dirs)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GridDomain, Lattice};
    use approx::assert_relative_eq;

    fn square(n: usize, h: f64) -> GridDomain {
        let lo = -(h * (n - 1) as f64) / 2.0;
        GridDomain::full(Lattice::new(Point::new(&[lo, lo]).unwrap(), h, &[n, n]).unwrap())
    }

    #[test]
    fn constant_mean_is_exact() {
        let f = ScalarField::constant(square(33, 1.0 / 16.0), 2.75);
        let m = spherical_mean(&f, &Point::new(&[0.1, -0.2]).unwrap(), 0.5, 64).unwrap();
        assert_eq!(m, ExtReal::Real(2.75));
    }

    #[test]
    fn affine_mean_is_centre_value() {
        let f = ScalarField::from_fn(square(33, 1.0 / 16.0), |x| x[0] - 3.0 * x[1]).unwrap();
        let c = Point::new(&[0.2, 0.1]).unwrap();
        let m = spherical_mean(&f, &c, 0.4, 256).unwrap().to_f64();
        assert_relative_eq!(m, 0.2 - 0.3, epsilon = 1e-12);
    }

    #[test]
    fn fibonacci_directions_are_unit_and_balanced() {
        let dirs = sphere_directions(3, 400);
        let mut s = [0.0; 3];
        for u in &dirs {
            assert_relative_eq!(u[0] * u[0] + u[1] * u[1] + u[2] * u[2], 1.0, epsilon = 1e-12);
            for a in 0..3 {
                s[a] += u[a] / 400.0;
            }
        }
        assert!(s.iter().all(|c| c.abs() < 1e-2), "{s:?}");
    }

    #[test]
    fn escaping_sphere_and_too_few_samples() {
        let f = ScalarField::constant(square(9, 0.25), 1.0);
        let c = Point::new(&[0.0, 0.0]).unwrap();
        assert!(matches!(
            spherical_mean(&f, &c, 1.5, 16),
            Err(Error::SphereExitsDomain { .. })
        ));
        assert!(spherical_mean(&f, &c, 0.5, 4).is_err());
    }

    #[test]
    fn minus_infinity_is_absorbing() {
        let d = square(9, 0.25);
        let mut vals = vec![0.0; 81];
        vals[d.lattice().index(&[4, 6])] = f64::NEG_INFINITY;
        let f = ScalarField::new(d, vals).unwrap();
        let m = spherical_mean(&f, &Point::new(&[0.0, 0.0]).unwrap(), 0.5, 8).unwrap();
        assert_eq!(m, ExtReal::NegInf);
    }
}
