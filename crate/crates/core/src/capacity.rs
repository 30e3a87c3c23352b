//! Energies of discrete measures and logarithmic capacity estimates.
//!
//! The self-energy of an atom is infinite, so the diagonal of the energy sum
//! is regularised: atom `i` contributes `w_i² k_{d-2}(δ_i)` with `δ_i` half
//! the distance to its nearest neighbour in the support.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Lattice, NodeSet, Point};
use crate::kernels::{radial_kernel, radial_kernel_inverse, ExtReal};

/// Probability measure with finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    support: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(support: Vec<Point>, weights: Vec<f64>) -> Result<DiscreteMeasure> {
        if support.is_empty() {
            return Err(Error::Capacity("empty support".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::Capacity(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        let d = support[0].dim();
        if let Some(p) = support.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Capacity(format!("weight {w} is not a nonnegative real")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Capacity(format!("weights sum to {total}, not 1")));
        }
        for i in 0..support.len() {
            for j in 0..i {
                if support[i] == support[j] {
                    return Err(Error::Capacity(format!(
                        "support point {:?} is repeated",
                        support[i].coords()
                    )));
                }
            }
        }
        Ok(DiscreteMeasure { support, weights })
    }

    /// Equal weights on `support`.
    pub fn uniform(support: Vec<Point>) -> Result<DiscreteMeasure> {
        let n = support.len().max(1);
        DiscreteMeasure::new(support, vec![1.0 / n as f64; n])
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Energy of a measure together with the capacity it implies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub energy: f64,
    pub capacity: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Output of [`mutual_energy`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MutualEnergy {
    pub energy: ExtReal,
    pub off_diagonal: f64,
    pub diagonal: f64,
    /// The regularised diagonal carries more than 1% of the total.
    pub regularization_dominant: bool,
    /// Single-atom measure: the energy is `-inf`.
    pub degenerate: bool,
}

fn check_dim(d: usize, pts: &[Point]) -> Result<()> {
    if d < 2 {
        return Err(Error::Capacity(format!("energies need d >= 2, got {d}")));
    }
    if let Some(p) = pts.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.dim(),
        });
    }
    Ok(())
}

fn kernel_matrix(pts: &[Point], d: usize) -> Vec<Vec<f64>> {
    let q = d as i32 - 2;
    let n = pts.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut nearest = f64::INFINITY;
        for j in 0..n {
            if i != j {
                let t = pts[i].dist(&pts[j]);
                nearest = nearest.min(t);
                k[i][j] = radial_kernel(q, t).expect("distinct points");
            }
        }
        k[i][i] = radial_kernel(q, 0.5 * nearest).expect("distinct points");
    }
    k
}

fn quadratic(k: &[Vec<f64>], w: &[f64]) -> (f64, f64) {
    let mut off = 0.0;
    let mut diag = 0.0;
    for i in 0..w.len() {
        for j in 0..w.len() {
            if i == j {
                diag += w[i] * w[i] * k[i][i];
            } else {
                off += w[i] * w[j] * k[i][j];
            }
        }
    }
    (off, diag)
}

/// `Σ_i Σ_j w_i w_j K_{d-2}(x_i, x_j)` with regularised diagonal.
pub fn mutual_energy(mu: &DiscreteMeasure, d: usize) -> Result<MutualEnergy> {
    check_dim(d, mu.support())?;
    if mu.len() == 1 {
        return Ok(MutualEnergy {
            energy: ExtReal::NegInf,
            off_diagonal: 0.0,
            diagonal: f64::NEG_INFINITY,
            regularization_dominant: true,
            degenerate: true,
        });
    }
    let k = kernel_matrix(mu.support(), d);
    let (off, diag) = quadratic(&k, mu.weights());
    let total = off + diag;
    Ok(MutualEnergy {
        energy: ExtReal::Real(total),
        off_diagonal: off,
        diagonal: diag,
        regularization_dominant: diag.abs() > 0.01 * total.abs(),
        degenerate: false,
    })
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Step and stopping controls of the capacity optimisers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptParams {
    pub max_iterations: usize,
    /// Stop once the energy changes by less than this between iterations.
    pub tolerance: f64,
}

impl Default for OptParams {
    fn default() -> Self {
        OptParams {
            max_iterations: 200_000,
            tolerance: 1e-15,
        }
    }
}

/// Equilibrium measure on a fixed support.
#[derive(Clone, Debug)]
pub struct Equilibrium {
    pub measure: DiscreteMeasure,
    pub report: EnergyReport,
}

/// Weights on `support` maximising the regularised mutual energy, by
/// projected gradient ascent from the uniform measure. A run that exhausts
/// `max_iterations` returns its last iterate with `converged = false`.
pub fn equilibrium_weights(support: &[Point], d: usize, params: &OptParams) -> Result<Equilibrium> {
    if support.len() < 2 {
        return Err(Error::Capacity("equilibrium weights need at least two points".into()));
    }
    check_dim(d, support)?;
    let uniform = DiscreteMeasure::uniform(support.to_vec())?;
    let n = support.len();
    let k = kernel_matrix(support, d);
    let lipschitz = k
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * 2.0;
    let step = 1.0 / lipschitz.max(f64::MIN_POSITIVE);

    let mut w = uniform.weights().to_vec();
    let (o, dg) = quadratic(&k, &w);
    let mut energy = o + dg;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iterations {
        iterations += 1;
        let grad: Vec<f64> = (0..n)
            .map(|i| 2.0 * (0..n).map(|j| k[i][j] * w[j]).sum::<f64>())
            .collect();
        let trial: Vec<f64> = w.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
        let next = project_to_simplex(&trial);
        let (o, dg) = quadratic(&k, &next);
        let e = o + dg;
        let moved = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let change = (e - energy).abs();
        w = next;
        energy = e;
        if change < params.tolerance * energy.abs().max(1.0) && moved < 1e-12 {
            converged = true;
            break;
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let capacity = radial_kernel_inverse(d as i32 - 2, energy)?;
    Ok(Equilibrium {
        measure: DiscreteMeasure::new(support.to_vec(), w)?,
        report: EnergyReport {
            energy,
            capacity,
            iterations,
            converged,
        },
    })
}

/// Fekete configuration with its capacity estimate.
#[derive(Clone, Debug)]
pub struct Fekete {
    pub points: Vec<Point>,
    pub report: EnergyReport,
}

/// Transfinite-diameter estimate of the planar set sampled by `candidates`:
/// `n` candidates are chosen greedily, then improved by single-point
/// exchanges, to maximise `Σ_{i<j} log |x_i - x_j|`. The estimate is
/// `exp(2 / (n (n - 1)) Σ_{i<j} log |x_i - x_j|)`.
pub fn fekete_capacity(candidates: &[Point], n: usize, params: &OptParams) -> Result<Fekete> {
    if n < 3 {
        return Err(Error::Capacity(format!("Fekete selection needs n >= 3, got {n}")));
    }
    check_dim(2, candidates)?;
    if candidates.len() < n {
        return Err(Error::Capacity(format!(
            "only {} candidate points for n = {n}",
            candidates.len()
        )));
    }
    let m = candidates.len();
    let log_dist = |a: usize, b: usize| {
        let t = candidates[a].dist(&candidates[b]);
        if t > 0.0 {
            t.ln()
        } else {
            f64::NEG_INFINITY
        }
    };

    // potential[c] = Σ over selected s of log |c - s|
    let mut potential = vec![0.0; m];
    let mut chosen = vec![false; m];
    let mut selected = Vec::with_capacity(n);
    let add = |c: usize, potential: &mut Vec<f64>, sign: f64| {
        for (j, p) in potential.iter_mut().enumerate() {
            if j != c {
                *p += sign * log_dist(c, j);
            }
        }
    };
    selected.push(0);
    chosen[0] = true;
    add(0, &mut potential, 1.0);
    while selected.len() < n {
        let best = (0..m)
            .filter(|&c| !chosen[c])
            .max_by(|&a, &b| potential[a].total_cmp(&potential[b]).then(b.cmp(&a)))
            .expect("enough candidates");
        if potential[best] == f64::NEG_INFINITY {
            return Err(Error::Capacity("fewer than n distinct candidate points".into()));
        }
        selected.push(best);
        chosen[best] = true;
        add(best, &mut potential, 1.0);
    }

    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < params.max_iterations {
        sweeps += 1;
        let mut improved = false;
        for slot in 0..n {
            let old = selected[slot];
            let base = potential[old];
            let mut best = None;
            let mut gain_best = 0.0;
            for c in 0..m {
                if chosen[c] {
                    continue;
                }
                let gain = potential[c] - log_dist(c, old) - base;
                if gain > gain_best + 1e-13 * base.abs().max(1.0) {
                    gain_best = gain;
                    best = Some(c);
                }
            }
            if let Some(c) = best {
                add(old, &mut potential, -1.0);
                chosen[old] = false;
                selected[slot] = c;
                chosen[c] = true;
                add(c, &mut potential, 1.0);
                improved = true;
            }
        }
        if !improved {
            converged = true;
            break;
        }
    }

    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..i {
            sum += log_dist(selected[i], selected[j]);
        }
    }
    let energy = 2.0 * sum / (n * (n - 1)) as f64;
    Ok(Fekete {
        points: selected.iter().map(|&i| candidates[i]).collect(),
        report: EnergyReport {
            energy,
            capacity: energy.exp(),
            iterations: sweeps,
            converged,
        },
    })
}

/// `m` equally spaced points on the circle of radius `radius` about `center`.
pub fn circle_samples(center: &Point, radius: f64, m: usize) -> Result<Vec<Point>> {
    if center.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: center.dim(),
        });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Capacity(format!("radius must be positive, got {radius}")));
    }
    let c = center.coords();
    (0..m)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / m as f64;
            Point::new(&[c[0] + radius * t.cos(), c[1] + radius * t.sin()])
        })
        .collect()
}

/// Coordinates of the nodes of `set`.
pub fn node_points(lattice: &Lattice, set: &NodeSet) -> Vec<Point> {
    set.iter().map(|i| lattice.point(i)).collect()
}

/// One point per line, coordinates separated by spaces.
pub fn write_points(points: &[Point], mut w: impl Write) -> Result<()> {
    for p in points {
        let line: Vec<String> = p.coords().iter().map(|x| format!("{x:?}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_points(r: impl BufRead) -> Result<Vec<Point>> {
    let mut out: Vec<Point> = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", n + 1)))?;
        let p = Point::new(&coords).map_err(|e| Error::Format(format!("line {}: {e}", n + 1)))?;
        if let Some(first) = out.first() {
            if first.dim() != p.dim() {
                return Err(Error::Format(format!("line {}: dimension changes", n + 1)));
            }
        }
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(&[x, y]).unwrap()
    }

    #[test]
    fn two_points_at_unit_distance() {
        let mu = DiscreteMeasure::uniform(vec![pt(0.0, 0.0), pt(1.0, 0.0)]).unwrap();
        let e = mutual_energy(&mu, 2).unwrap();
        assert_eq!(e.off_diagonal, 0.0);
        assert_abs_diff_eq!(e.diagonal, 0.5 * 0.5f64.ln(), epsilon = 1e-15);
        assert!(e.regularization_dominant);
    }

    #[test]
    fn single_atom_is_degenerate() {
        let mu = DiscreteMeasure::new(vec![pt(0.3, 0.1)], vec![1.0]).unwrap();
        let e = mutual_energy(&mu, 2).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.energy, ExtReal::NegInf);
    }

    #[test]
    fn measure_invariants() {
        assert!(DiscreteMeasure::new(vec![pt(0.0, 0.0), pt(1.0, 0.0)], vec![0.7, 0.2]).is_err());
        assert!(DiscreteMeasure::new(vec![pt(0.0, 0.0), pt(0.0, 0.0)], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![pt(0.0, 0.0), pt(1.0, 0.0)], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_to_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let q = project_to_simplex(&[0.5, 0.5, 0.5]);
        for x in q {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_point_equilibrium_is_symmetric() {
        let eq = equilibrium_weights(&[pt(0.0, 0.0), pt(0.0, 2.0)], 2, &OptParams::default()).unwrap();
        for w in eq.measure.weights() {
            assert_abs_diff_eq!(*w, 0.5, epsilon = 1e-12);
        }
        assert!(eq.report.converged);
    }

    #[test]
    fn equilateral_triangle_on_circle() {
        let c = circle_samples(&Point::origin(2), 1.0, 60).unwrap();
        let f = fekete_capacity(&c, 3, &OptParams::default()).unwrap();
        for i in 0..3 {
            for j in 0..i {
                assert_abs_diff_eq!(f.points[i].dist(&f.points[j]), 3f64.sqrt(), epsilon = 1e-12);
            }
        }
        assert!(f.report.converged);
    }

    #[test]
    fn too_few_candidates() {
        let c = circle_samples(&Point::origin(2), 1.0, 4).unwrap();
        assert!(fekete_capacity(&c, 5, &OptParams::default()).is_err());
        assert!(fekete_capacity(&c, 2, &OptParams::default()).is_err());
    }

    #[test]
    fn point_file_round_trip() {
        let pts = circle_samples(&pt(0.5, -1.0), 0.3, 7).unwrap();
        let mut buf = Vec::new();
        write_points(&pts, &mut buf).unwrap();
        assert_eq!(read_points(buf.as_slice()).unwrap(), pts);
        assert!(read_points("1 2\n3\n".as_bytes()).is_err());
    }
}
