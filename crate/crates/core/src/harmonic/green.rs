use serde::{Deserialize, Serialize};

use super::solver::{relax, SolveStats, SolverParams};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{components, GridDomain, NodeSet, Point};
use crate::kernels::{fundamental_kernel, kernel_flux};

/// Discrete Green function `g_D(·, o)` on the full lattice of `D`.
///
/// The field is `0` off `D` and on the boundary nodes of `D`, and the pole
/// node is removed from its domain. The finite value the point-source solve
/// produces at the pole is kept in [`GreenField::pole_value`].
#[derive(Clone, Debug)]
pub struct GreenField {
    field: ScalarField,
    domain: GridDomain,
    pole: Point,
    pole_node: usize,
    pole_value: f64,
    stats: SolveStats,
}

/// Sidecar record written next to a Green field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenMeta {
    pub pole: Vec<f64>,
    pub pole_node: Vec<f64>,
    pub pole_offset: Vec<f64>,
    #[serde(rename = "M_g")]
    pub min_constant: Option<f64>,
    pub pole_value: f64,
    pub solver_sweeps: usize,
    pub solver_residual: f64,
}

impl GreenField {
    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    /// The requested pole.
    pub fn pole(&self) -> &Point {
        &self.pole
    }

    pub fn pole_node(&self) -> usize {
        self.pole_node
    }

    /// Position of the lattice node the pole was snapped to.
    pub fn pole_point(&self) -> Point {
        self.domain.lattice().point(self.pole_node)
    }

    pub fn pole_value(&self) -> f64 {
        self.pole_value
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn meta(&self, min_constant: Option<f64>) -> GreenMeta {
        let node = self.pole_point();
        GreenMeta {
            pole: self.pole.coords().to_vec(),
            pole_node: node.coords().to_vec(),
            pole_offset: self.pole.sub(&node).coords().to_vec(),
            min_constant,
            pole_value: self.pole_value,
            solver_sweeps: self.stats.sweeps,
            solver_residual: self.stats.residual,
        }
    }
}

/// Green function of the connected grid domain `d` with pole at the node
/// nearest to `o`, computed from `Δ_h g = -c_d h^{-d} δ_pole` with `g = 0` on
/// the boundary nodes of `d`.
pub fn green_function(d: &GridDomain, o: &Point, params: &SolverParams) -> Result<GreenField> {
    let lattice = d.lattice();
    let dim = lattice.dim();
    if o.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: o.dim(),
        });
    }
    let pole_node = d
        .node_at(o)
        .filter(|&i| d.is_interior(i))
        .ok_or_else(|| Error::PoleOutsideDomain(o.coords().to_vec()))?;
    let comps = components(&d.as_set(), lattice).len();
    if comps != 1 {
        return Err(Error::Disconnected { components: comps });
    }

    let h = lattice.spacing();
    let fixed = d.boundary();
    let mut values = vec![f64::NAN; lattice.len()];
    for i in fixed.iter() {
        values[i] = 0.0;
    }
    let h2f = -kernel_flux(dim) * h.powi(2 - dim as i32);
    let stats = relax(d, &fixed, &mut values, &[(pole_node, h2f)], params)?;
    let pole_value = values[pole_node];

    let g: Vec<f64> = (0..lattice.len())
        .map(|i| {
            if d.is_active(i) && !fixed.contains(i) {
                values[i].max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let host = GridDomain::full(lattice.clone()).punctured(pole_node);
    Ok(GreenField {
        field: ScalarField::new(host, g)?,
        domain: d.clone(),
        pole: *o,
        pole_node,
        pole_value,
        stats,
    })
}

/// `M_g`: the minimum of `g` over the boundary nodes of `s0`, pole excluded.
pub fn green_min_constant(g: &GreenField, s0: &NodeSet) -> Result<f64> {
    let lattice = g.field.lattice();
    g.field.domain().check_set(s0)?;
    let mut rim = s0.boundary(lattice);
    rim.remove(g.pole_node);
    if rim.is_empty() {
        return Err(Error::Invalid("the set has no boundary nodes".into()));
    }
    let m = rim
        .iter()
        .map(|i| g.field.raw()[i])
        .fold(f64::INFINITY, f64::min);
    if !(m > 0.0) {
        return Err(Error::DegenerateGreenMinimum(m));
    }
    Ok(m)
}

/// Least-squares slope of `v` against `-K_{d-2}(·, c)` over the active
/// finite nodes with `r_min <= |x - c| <= r_max`.
pub fn asymptotic_slope(v: &ScalarField, c: &Point, r_min: f64, r_max: f64) -> Result<f64> {
    let lattice = v.lattice();
    let d = lattice.dim();
    let eps = 1e-9 * lattice.spacing();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in v.domain().active_indices() {
        let p = lattice.point(i);
        let t = p.dist(c);
        let y = v.raw()[i];
        if t + eps >= r_min && t <= r_max + eps && t > 0.0 && y.is_finite() {
            xs.push(-fundamental_kernel(d, &p, c).to_f64());
            ys.push(y);
        }
    }
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::Invalid(format!(
            "fewer than two nodes in the range [{r_min}, {r_max}]"
        )));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Invalid("all sample nodes are equidistant from the centre".into()));
    }
    Ok(sxy / sxx)
}
