use std::collections::VecDeque;

use super::{GridDomain, Lattice, NodeSet};
use crate::error::{Error, Result};

const FAR: f64 = 1e30;

/// Exact squared Euclidean distance, in lattice steps, from every node to the
/// nearest node of `features` (separable lower-envelope algorithm of
/// Felzenszwalb and Huttenlocher). Nodes are `+inf` when `features` is empty.
pub fn distance_transform(lattice: &Lattice, features: &NodeSet) -> Vec<f64> {
    let n = lattice.len();
    if features.is_empty() {
        return vec![f64::INFINITY; n];
    }
    let mut dt: Vec<f64> = (0..n)
        .map(|i| if features.contains(i) { 0.0 } else { FAR })
        .collect();

    let longest = *lattice.shape().iter().max().unwrap();
    let mut f = vec![0.0; longest];
    let mut out = vec![0.0; longest];
    let mut v = vec![0usize; longest];
    let mut z = vec![0.0; longest + 1];

    for axis in 0..lattice.dim() {
        let len = lattice.shape()[axis];
        let stride = lattice.stride(axis);
        for start in 0..n {
            // one line per node whose coordinate along `axis` is zero
            if (start / stride) % len != 0 {
                continue;
            }
            for q in 0..len {
                f[q] = dt[start + q * stride];
            }
            envelope_1d(&f[..len], &mut out[..len], &mut v, &mut z);
            for q in 0..len {
                dt[start + q * stride] = out[q];
            }
        }
    }
    for d in dt.iter_mut() {
        if *d >= FAR * 0.5 {
            *d = f64::INFINITY;
        }
    }
    dt
}

fn envelope_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        let mut s;
        loop {
            let p = v[k] as f64;
            s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * qf - 2.0 * p);
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Connected components of `set` under Moore (8/26) connectivity, ordered by
/// their smallest node index.
pub fn components(set: &NodeSet, lattice: &Lattice) -> Vec<NodeSet> {
    let n = set.lattice_len();
    let mut label = vec![usize::MAX; n];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for seed in set.iter() {
        if label[seed] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut comp = NodeSet::empty(n);
        label[seed] = id;
        queue.push_back(seed);
        while let Some(i) = queue.pop_front() {
            comp.insert(i);
            for j in lattice.moore_neighbors(i) {
                if set.contains(j) && label[j] == usize::MAX {
                    label[j] = id;
                    queue.push_back(j);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

fn within(lattice: &Lattice, s: &NodeSet, r: f64) -> Vec<bool> {
    let dt = distance_transform(lattice, s);
    let steps = r / lattice.spacing();
    dt.iter().map(|&d| d.sqrt() < steps).collect()
}

/// Outer `r`-parallel set: the active nodes at distance `< r` from some node
/// of `s`, together with `s` itself.
pub fn parallel_set(domain: &GridDomain, s: &NodeSet, r: f64) -> Result<NodeSet> {
    domain.check_set(s)?;
    if !(r > 0.0) {
        return Err(Error::Invalid(format!("parallel-set radius must be positive, got {r}")));
    }
    if s.is_empty() {
        return Err(Error::Invalid("parallel set of an empty node set".into()));
    }
    let near = within(domain.lattice(), s, r);
    Ok(NodeSet::from_fn(s.lattice_len(), |i| {
        s.contains(i) || (near[i] && domain.is_active(i))
    }))
}

/// Regular domain between the `r/3` and `2r/3` parallel sets of a connected
/// `s0`: the component of `s0^{∪ r/2}` containing `s0`.
///
/// Every finite masked lattice component is regular for the discrete
/// Dirichlet problem, so no further boundary test is needed.
pub fn regularized_domain(s0: &NodeSet, r: f64, host: &GridDomain) -> Result<GridDomain> {
    host.check_set(s0)?;
    let lattice = host.lattice();
    let h = lattice.spacing();
    if s0.is_empty() {
        return Err(Error::Invalid("empty seed set".into()));
    }
    let comps = components(s0, lattice);
    if comps.len() != 1 {
        return Err(Error::Disconnected {
            components: comps.len(),
        });
    }
    if r / 3.0 < 2.0 * h {
        return Err(Error::ResolutionTooCoarse(format!(
            "r/3 = {} is below two lattice spacings ({})",
            r / 3.0,
            2.0 * h
        )));
    }
    let reach = within(lattice, s0, r);
    for (i, &inside) in reach.iter().enumerate() {
        if inside && (!host.is_active(i) || lattice.edge_steps(i) == 0) {
            return Err(Error::Invalid(format!(
                "parallel set of radius {r} leaves the host domain at {:?}",
                lattice.point(i).coords()
            )));
        }
    }

    let inner = parallel_set(host, s0, r / 3.0)?;
    let outer = parallel_set(host, s0, 2.0 * r / 3.0)?;
    let half = parallel_set(host, s0, r / 2.0)?;
    let seed = s0.iter().next().unwrap();
    let d = components(&half, lattice)
        .into_iter()
        .find(|c| c.contains(seed))
        .expect("seed lies in its own parallel set");
    if !inner.compactly_inside(&d, lattice) || !d.compactly_inside(&outer, lattice) {
        return Err(Error::ResolutionTooCoarse(format!(
            "cannot separate the r/3, r/2 and 2r/3 parallel sets at spacing {h}"
        )));
    }
    GridDomain::from_set(lattice.clone(), &d)
}

/// Smallest distance from a node of `s` to an inactive node of `o`'s lattice
/// or to the lattice faces.
pub fn dist_to_complement(s: &NodeSet, o: &GridDomain) -> Result<f64> {
    o.check_set(s)?;
    if !s.is_subset(&o.as_set()) {
        return Err(Error::Invalid("node set is not contained in the domain".into()));
    }
    let lattice = o.lattice();
    let inactive = o.as_set().complement();
    let dt = distance_transform(lattice, &inactive);
    let best = s
        .iter()
        .map(|i| dt[i].sqrt().min(lattice.edge_steps(i) as f64))
        .fold(f64::INFINITY, f64::min);
    Ok(best * lattice.spacing())
}
