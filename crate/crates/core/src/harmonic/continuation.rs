use super::solver::{relax, SolveStats, SolverParams};
use crate::error::{Error, Result};
use crate::field::{boundary_limsup, ScalarField};
use crate::geometry::{GridDomain, NodeSet};

/// Output of [`harmonic_layer_continuation`].
#[derive(Clone, Debug)]
pub struct LayerContinuation {
    pub field: ScalarField,
    /// Layer nodes where `v` exceeded the harmonic solution and was kept.
    pub engaged: usize,
    pub stats: SolveStats,
}

/// Replace `v` on `layer` by `max(h, v)`, where `h` is the discrete harmonic
/// function on `layer` with boundary values taken on the outer ring of
/// `layer`. Ring nodes outside the domain of `v` take the discrete upper
/// limit of `v` from the layer.
pub fn harmonic_layer_continuation(
    v: &ScalarField,
    layer: &NodeSet,
    params: &SolverParams,
) -> Result<LayerContinuation> {
    let dom = v.domain();
    dom.check_set(layer)?;
    if layer.is_empty() {
        return Err(Error::Invalid("empty continuation layer".into()));
    }
    if !layer.is_subset(&dom.as_set()) {
        return Err(Error::Invalid("layer is not contained in the field domain".into()));
    }
    let lattice = dom.lattice();
    let ring = layer.outer_ring(lattice);
    let mut values = vec![f64::NAN; lattice.len()];
    for i in ring.iter() {
        let x = match v.get(i) {
            Some(x) => x,
            None => boundary_limsup(v, layer, i)?.to_f64(),
        };
        if !x.is_finite() {
            return Err(Error::MinusInfinityOnLayerBoundary(i));
        }
        values[i] = x;
    }
    let solve_domain = GridDomain::from_set(lattice.clone(), &layer.union(&ring))?;
    let stats = relax(&solve_domain, &ring, &mut values, &[], params)?;

    let mut out = v.raw().to_vec();
    let mut engaged = 0;
    for i in layer.iter() {
        if out[i] > values[i] {
            engaged += 1;
        } else {
            out[i] = values[i];
        }
    }
    Ok(LayerContinuation {
        field: ScalarField::new(dom.clone(), out)?,
        engaged,
        stats,
    })
}
