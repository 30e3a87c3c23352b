use serde::{Deserialize, Serialize};

use super::{Point, MAX_DIM};
use crate::error::{Error, Result};

/// Uniform rectilinear lattice. Node indices are row-major: the last axis
/// varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeSpec", into = "LatticeSpec")]
pub struct Lattice {
    origin: Point,
    spacing: f64,
    shape: [usize; MAX_DIM],
    strides: [usize; MAX_DIM],
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct LatticeSpec {
    origin: Point,
    spacing: f64,
    shape: Vec<usize>,
}

impl TryFrom<LatticeSpec> for Lattice {
    type Error = Error;

    fn try_from(s: LatticeSpec) -> Result<Lattice> {
        Lattice::new(s.origin, s.spacing, &s.shape)
    }
}

impl From<Lattice> for LatticeSpec {
    fn from(l: Lattice) -> LatticeSpec {
        LatticeSpec {
            origin: l.origin,
            spacing: l.spacing,
            shape: l.shape().to_vec(),
        }
    }
}

impl Lattice {
    pub fn new(origin: Point, spacing: f64, shape: &[usize]) -> Result<Lattice> {
        let dim = origin.dim();
        if shape.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: shape.len(),
            });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Invalid(format!("spacing must be positive, got {spacing}")));
        }
        if shape.iter().any(|&n| n < 2) {
            return Err(Error::Invalid(format!(
                "every lattice axis needs at least 2 nodes, got {shape:?}"
            )));
        }
        let mut sh = [1usize; MAX_DIM];
        sh[..dim].copy_from_slice(shape);
        let mut strides = [0usize; MAX_DIM];
        let mut s = 1;
        for a in (0..dim).rev() {
            strides[a] = s;
            s *= sh[a];
        }
        Ok(Lattice {
            origin,
            spacing,
            shape: sh,
            strides,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim);
        multi
            .iter()
            .zip(&self.strides)
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn multi_index(&self, idx: usize) -> [usize; MAX_DIM] {
        let mut m = [0usize; MAX_DIM];
        for a in 0..self.dim {
            m[a] = (idx / self.strides[a]) % self.shape[a];
        }
        m
    }

    pub fn point(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let mut c = [0.0; MAX_DIM];
        for a in 0..self.dim {
            c[a] = self.origin[a] + m[a] as f64 * self.spacing;
        }
        Point::from_array(c, self.dim)
    }

    /// Neighbour of `idx` one step along `axis` in direction `dir` (+1/-1).
    pub fn step(&self, idx: usize, axis: usize, dir: isize) -> Option<usize> {
        let m = (idx / self.strides[axis]) % self.shape[axis];
        if dir < 0 {
            (m > 0).then(|| idx - self.strides[axis])
        } else {
            (m + 1 < self.shape[axis]).then(|| idx + self.strides[axis])
        }
    }

    /// The `2d` axis neighbours; `None` where the lattice ends.
    pub fn axis_neighbors(&self, idx: usize) -> impl Iterator<Item = Option<usize>> + '_ {
        (0..self.dim).flat_map(move |a| [self.step(idx, a, -1), self.step(idx, a, 1)])
    }

    /// All `3^d - 1` surrounding nodes present on the lattice.
    pub fn moore_neighbors(&self, idx: usize) -> Vec<usize> {
        let m = self.multi_index(idx);
        let mut out = Vec::with_capacity(26);
        let count = 3usize.pow(self.dim as u32);
        'outer: for code in 0..count {
            let mut c = code;
            let mut target = 0usize;
            let mut zero = true;
            for a in 0..self.dim {
                let off = (c % 3) as isize - 1;
                c /= 3;
                if off != 0 {
                    zero = false;
                }
                let v = m[a] as isize + off;
                if v < 0 || v >= self.shape[a] as isize {
                    continue 'outer;
                }
                target += v as usize * self.strides[a];
            }
            if !zero {
                out.push(target);
            }
        }
        out
    }

    /// Nearest lattice node to `p`, if `p` lies within half a cell of the lattice.
    pub fn nearest_node(&self, p: &Point) -> Option<usize> {
        if p.dim() != self.dim {
            return None;
        }
        let mut idx = 0;
        for a in 0..self.dim {
            let t = ((p[a] - self.origin[a]) / self.spacing).round();
            if t < 0.0 || t >= self.shape[a] as f64 {
                return None;
            }
            idx += t as usize * self.strides[a];
        }
        Some(idx)
    }

    /// Distance (in lattice steps) from a node to the nearest lattice face.
    pub fn edge_steps(&self, idx: usize) -> usize {
        let m = self.multi_index(idx);
        (0..self.dim)
            .map(|a| m[a].min(self.shape[a] - 1 - m[a]))
            .min()
            .unwrap_or(0)
    }

    pub fn same_as(&self, other: &Lattice) -> bool {
        self == other
    }
}

/// A subset of the nodes of one lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSet {
    members: Vec<bool>,
}

impl NodeSet {
    pub fn empty(len: usize) -> NodeSet {
        NodeSet {
            members: vec![false; len],
        }
    }

    pub fn full(len: usize) -> NodeSet {
        NodeSet {
            members: vec![true; len],
        }
    }

    pub fn from_mask(members: Vec<bool>) -> NodeSet {
        NodeSet { members }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> NodeSet {
        let mut s = NodeSet::empty(len);
        for i in indices {
            s.members[i] = true;
        }
        s
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> bool) -> NodeSet {
        NodeSet {
            members: (0..len).map(f).collect(),
        }
    }

    /// Size of the underlying lattice.
    pub fn lattice_len(&self) -> usize {
        self.members.len()
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members.get(idx).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, idx: usize) {
        self.members[idx] = true;
    }

    pub fn remove(&mut self, idx: usize) {
        self.members[idx] = false;
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    fn zip_with(&self, other: &NodeSet, f: impl Fn(bool, bool) -> bool) -> NodeSet {
        assert_eq!(self.members.len(), other.members.len(), "node sets from different lattices");
        NodeSet {
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> NodeSet {
        NodeSet {
            members: self.members.iter().map(|&m| !m).collect(),
        }
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(&a, &b)| !a || b)
    }

    /// `clos(self) ⊂ Int(other)` on the lattice: every member and all of its
    /// Moore neighbours belong to `other`, and no member touches the lattice edge.
    pub fn compactly_inside(&self, other: &NodeSet, lattice: &Lattice) -> bool {
        let full = 3usize.pow(lattice.dim() as u32) - 1;
        self.iter().all(|i| {
            let nb = lattice.moore_neighbors(i);
            other.contains(i) && nb.len() == full && nb.iter().all(|&j| other.contains(j))
        })
    }

    /// Members whose `2d` axis neighbours are all members.
    pub fn interior(&self, lattice: &Lattice) -> NodeSet {
        NodeSet::from_fn(self.members.len(), |i| {
            self.members[i] && lattice.axis_neighbors(i).all(|n| n.is_some_and(|j| self.members[j]))
        })
    }

    /// Members with at least one axis neighbour outside the set (or off the lattice).
    pub fn boundary(&self, lattice: &Lattice) -> NodeSet {
        self.difference(&self.interior(lattice))
    }

    /// Non-members with at least one axis neighbour in the set.
    pub fn outer_ring(&self, lattice: &Lattice) -> NodeSet {
        NodeSet::from_fn(self.members.len(), |i| {
            !self.members[i] && lattice.axis_neighbors(i).any(|n| n.is_some_and(|j| self.members[j]))
        })
    }
}

/// A lattice with an active-node mask: the rasterization of an open set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    lattice: Lattice,
    mask: Vec<bool>,
}

impl GridDomain {
    pub fn new(lattice: Lattice, mask: Vec<bool>) -> Result<GridDomain> {
        if mask.len() != lattice.len() {
            return Err(Error::LatticeMismatch {
                expected: lattice.len(),
                got: mask.len(),
            });
        }
        Ok(GridDomain { lattice, mask })
    }

    pub fn full(lattice: Lattice) -> GridDomain {
        let n = lattice.len();
        GridDomain {
            lattice,
            mask: vec![true; n],
        }
    }

    pub fn from_set(lattice: Lattice, set: &NodeSet) -> Result<GridDomain> {
        GridDomain::new(lattice, set.mask().to_vec())
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.lattice.spacing()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_active(&self, idx: usize) -> bool {
        self.mask.get(idx).copied().unwrap_or(false)
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn as_set(&self) -> NodeSet {
        NodeSet::from_mask(self.mask.clone())
    }

    /// Active node whose `2d` axis neighbours are all active.
    pub fn is_interior(&self, idx: usize) -> bool {
        self.is_active(idx)
            && self
                .lattice
                .axis_neighbors(idx)
                .all(|n| n.is_some_and(|j| self.mask[j]))
    }

    pub fn interior(&self) -> NodeSet {
        NodeSet::from_fn(self.mask.len(), |i| self.is_interior(i))
    }

    /// Active nodes with at least one inactive (or missing) axis neighbour.
    pub fn boundary(&self) -> NodeSet {
        NodeSet::from_fn(self.mask.len(), |i| self.is_active(i) && !self.is_interior(i))
    }

    pub fn restrict(&self, set: &NodeSet) -> Result<GridDomain> {
        self.check_set(set)?;
        let mask = self
            .mask
            .iter()
            .zip(set.mask())
            .map(|(&a, &b)| a && b)
            .collect();
        GridDomain::new(self.lattice.clone(), mask)
    }

    /// Copy of the domain with the given node deactivated.
    pub fn punctured(&self, idx: usize) -> GridDomain {
        let mut d = self.clone();
        d.mask[idx] = false;
        d
    }

    pub fn check_set(&self, set: &NodeSet) -> Result<()> {
        if set.lattice_len() != self.lattice.len() {
            return Err(Error::LatticeMismatch {
                expected: self.lattice.len(),
                got: set.lattice_len(),
            });
        }
        Ok(())
    }

    /// Active node nearest to `p`.
    pub fn node_at(&self, p: &Point) -> Option<usize> {
        self.lattice.nearest_node(p).filter(|&i| self.mask[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(shape: &[usize]) -> Lattice {
        let o = vec![0.0; shape.len()];
        Lattice::new(Point::new(&o).unwrap(), 1.0, shape).unwrap()
    }

    #[test]
    fn index_roundtrip_3d() {
        let l = lat(&[3, 4, 5]);
        for i in 0..l.len() {
            let m = l.multi_index(i);
            assert_eq!(l.index(&m[..3]), i);
        }
        assert_eq!(l.index(&[1, 2, 3]), 1 * 20 + 2 * 5 + 3);
    }

    #[test]
    fn neighbour_counts() {
        let l = lat(&[4, 4]);
        assert_eq!(l.moore_neighbors(l.index(&[0, 0])).len(), 3);
        assert_eq!(l.moore_neighbors(l.index(&[1, 1])).len(), 8);
        assert_eq!(lat(&[3, 3, 3]).moore_neighbors(13).len(), 26);
        let present = l.axis_neighbors(l.index(&[0, 2])).flatten().count();
        assert_eq!(present, 3);
    }

    #[test]
    fn boundary_is_active_with_inactive_neighbour() {
        let l = lat(&[5, 5]);
        let dom = GridDomain::full(l.clone());
        let b = dom.boundary();
        assert_eq!(b.count(), 16);
        assert_eq!(dom.interior().count(), 9);
        assert!(dom.interior().is_subset(&dom.as_set()));
    }

    #[test]
    fn compact_inclusion() {
        let l = lat(&[7, 7]);
        let small = NodeSet::from_indices(l.len(), [l.index(&[3, 3])]);
        let mid = NodeSet::from_fn(l.len(), |i| {
            let m = l.multi_index(i);
            (2..=4).contains(&m[0]) && (2..=4).contains(&m[1])
        });
        assert!(small.compactly_inside(&mid, &l));
        assert!(!mid.compactly_inside(&mid, &l));
    }
}
