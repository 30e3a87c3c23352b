use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{components, GridDomain, NodeSet};

/// Successive over-relaxation settings. `omega = None` picks
/// `2 / (1 + sin(π h / L))` from the extent `L` of the unknowns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub omega: Option<f64>,
    pub max_sweeps: usize,
    /// Relative stopping threshold on the largest Gauss-Seidel correction.
    pub tolerance: f64,
}

impl Default for SolverParams {
    fn default() -> SolverParams {
        SolverParams {
            omega: None,
            max_sweeps: 1_000_000,
            tolerance: 1e-10,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.omega {
            if !(w > 1.0 && w < 2.0) {
                return Err(Error::Invalid(format!("relaxation factor must lie in (1, 2), got {w}")));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Invalid(format!(
                "solver tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Invalid("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub sweeps: usize,
    /// Largest Gauss-Seidel correction in the final sweep.
    pub residual: f64,
    pub omega: f64,
}

/// Red-black SOR for `Δ_h u = f` on the active, non-fixed nodes of `domain`.
///
/// `values` holds the lattice-length storage: fixed nodes keep their entries,
/// unknown entries are overwritten. `rhs` lists `(node, h² f(node))` pairs;
/// nodes not listed have `f = 0`.
pub(crate) fn relax(
    domain: &GridDomain,
    fixed: &NodeSet,
    values: &mut [f64],
    rhs: &[(usize, f64)],
    params: &SolverParams,
) -> Result<SolveStats> {
    params.validate()?;
    let lattice = domain.lattice();
    let dim = lattice.dim();
    let two_d = 2 * dim;

    let mut lo_fixed = f64::INFINITY;
    let mut hi_fixed = f64::NEG_INFINITY;
    for i in fixed.iter() {
        let x = values[i];
        if !x.is_finite() {
            return Err(Error::Invalid(format!("non-finite boundary value {x} at node {i}")));
        }
        lo_fixed = lo_fixed.min(x);
        hi_fixed = hi_fixed.max(x);
    }
    if fixed.is_empty() {
        return Err(Error::Invalid("Dirichlet problem without boundary nodes".into()));
    }

    let mut colour: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut nbs: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut lo_m = [usize::MAX; 3];
    let mut hi_m = [0usize; 3];
    for i in domain.active_indices().filter(|&i| !fixed.contains(i)) {
        if !domain.is_interior(i) {
            return Err(Error::NotInterior(i));
        }
        let m = lattice.multi_index(i);
        for a in 0..dim {
            lo_m[a] = lo_m[a].min(m[a]);
            hi_m[a] = hi_m[a].max(m[a]);
        }
        let c = m[..dim].iter().sum::<usize>() % 2;
        colour[c].push(i);
        nbs[c].extend(lattice.axis_neighbors(i).map(|n| n.expect("interior node")));
    }
    let unknowns = colour[0].len() + colour[1].len();

    let mut source = vec![0.0; lattice.len()];
    let mut source_scale: f64 = 0.0;
    for &(i, f) in rhs {
        source[i] += f;
        source_scale = source_scale.max(f.abs());
    }
    let scale = (hi_fixed - lo_fixed).max(source_scale);
    let abs_tol = if scale > 0.0 {
        params.tolerance * scale
    } else {
        params.tolerance
    };

    let omega = params.omega.unwrap_or_else(|| {
        let extent = (0..dim)
            .map(|a| hi_m[a].saturating_sub(lo_m[a]) + 2)
            .max()
            .unwrap_or(2) as f64;
        2.0 / (1.0 + (PI / extent).sin())
    });

    if unknowns == 0 {
        return Ok(SolveStats {
            sweeps: 0,
            residual: 0.0,
            omega,
        });
    }

    let guess = fixed.iter().map(|i| values[i]).sum::<f64>() / fixed.count() as f64;
    for c in &colour {
        for &i in c {
            values[i] = guess;
        }
    }

    let inv = 1.0 / two_d as f64;
    let mut residual = f64::INFINITY;
    for sweep in 1..=params.max_sweeps {
        residual = 0.0;
        for c in 0..2 {
            for (k, &i) in colour[c].iter().enumerate() {
                let s: f64 = nbs[c][k * two_d..(k + 1) * two_d].iter().map(|&j| values[j]).sum();
                let corr = (s - source[i]) * inv - values[i];
                residual = residual.max(corr.abs());
                values[i] += omega * corr;
            }
        }
        if residual <= abs_tol {
            return Ok(SolveStats {
                sweeps: sweep,
                residual,
                omega,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: params.max_sweeps,
        residual,
    })
}

/// Discrete harmonic function on the connected domain `domain` that agrees
/// with `boundary` on the boundary nodes of `domain`.
pub fn solve_dirichlet(
    domain: &GridDomain,
    boundary: &ScalarField,
    params: &SolverParams,
) -> Result<(ScalarField, SolveStats)> {
    if domain.lattice() != boundary.lattice() {
        return Err(Error::Invalid("boundary data lives on a different lattice".into()));
    }
    let active = domain.as_set();
    if active.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let comps = components(&active, domain.lattice()).len();
    if comps != 1 {
        return Err(Error::Disconnected { components: comps });
    }
    let fixed = domain.boundary();
    let mut values = vec![f64::NAN; domain.lattice().len()];
    for i in fixed.iter() {
        values[i] = boundary
            .get(i)
            .ok_or_else(|| Error::Invalid(format!("no boundary value at node {i}")))?;
    }
    let stats = relax(domain, &fixed, &mut values, &[], params)?;
    Ok((ScalarField::new(domain.clone(), values)?, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{is_harmonic, is_subharmonic};
    use crate::geometry::{rasterize, Ball, Lattice, Point, Region, Shape};

    fn square(n: usize, h: f64) -> GridDomain {
        let lo = -(h * (n - 1) as f64) / 2.0;
        GridDomain::full(Lattice::new(Point::new(&[lo, lo]).unwrap(), h, &[n, n]).unwrap())
    }

    #[test]
    fn constant_boundary_gives_constant() {
        let d = square(17, 0.125);
        let b = ScalarField::constant(d.clone(), 3.5);
        let (u, stats) = solve_dirichlet(&d, &b, &SolverParams::default()).unwrap();
        assert!(stats.sweeps <= 1);
        assert!(d.active_indices().all(|i| u.get(i) == Some(3.5)));
    }

    #[test]
    fn affine_boundary_reproduces_affine() {
        let d = square(33, 1.0 / 32.0);
        let b = ScalarField::from_fn(d.clone(), |x| 2.0 * x[0] - x[1]).unwrap();
        let (u, _) = solve_dirichlet(&d, &b, &SolverParams::default()).unwrap();
        let err = d
            .active_indices()
            .map(|i| (u.get(i).unwrap() - b.get(i).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn annulus_log_within_second_order() {
        let h = 1.0 / 64.0;
        let lat = Lattice::new(Point::new(&[-1.0, -1.0]).unwrap(), h, &[129, 129]).unwrap();
        let o = Point::new(&[0.0, 0.0]).unwrap();
        let d = rasterize(
            &Region::new()
                .union(Shape::ClosedBall { center: o, radius: 1.0 })
                .difference(Shape::Ball(Ball::new(o, 0.5).unwrap())),
            &lat,
        )
        .unwrap();
        let b = ScalarField::from_fn(d.clone(), |x| x.norm().ln()).unwrap();
        let (u, _) = solve_dirichlet(&d, &b, &SolverParams::default()).unwrap();
        let err = d
            .active_indices()
            .map(|i| (u.get(i).unwrap() - b.get(i).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err < 10.0 * h * h, "{err}");
        assert!(is_harmonic(&u, &d.interior(), 1e-4).passed);
        assert!(is_subharmonic(&u, 1e-4).passed);
    }

    #[test]
    fn rejects_bad_params_and_disconnected_domains() {
        let d = square(9, 0.25);
        let b = ScalarField::constant(d.clone(), 0.0);
        let bad = SolverParams {
            omega: Some(2.5),
            ..SolverParams::default()
        };
        assert!(solve_dirichlet(&d, &b, &bad).is_err());
        let l = d.lattice().clone();
        let two = GridDomain::from_set(
            l.clone(),
            &NodeSet::from_fn(l.len(), |i| {
                let m = l.multi_index(i);
                m[0] <= 2 || m[0] >= 6
            }),
        )
        .unwrap();
        assert!(matches!(
            solve_dirichlet(&two, &b, &SolverParams::default()),
            Err(Error::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn sweep_cap_reports_residual() {
        let d = square(65, 1.0 / 64.0);
        let b = ScalarField::from_fn(d.clone(), |x| x[0] * x[0] - x[1] * x[1]).unwrap();
        let p = SolverParams {
            max_sweeps: 3,
            ..SolverParams::default()
        };
        match solve_dirichlet(&d, &b, &p) {
            Err(Error::NoConvergence { iterations: 3, residual }) => assert!(residual > 0.0),
            other => panic!("{other:?}"),
        }
    }
}
