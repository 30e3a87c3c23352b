//! Plain (P2) PGM rendering of scalar fields.
//!
//! Finite values map linearly onto `0..=255` over the chosen range, `-inf`
//! renders as `0` and inactive nodes as a checkerboard of [`CHECKER`]
//! levels. Rows run from the largest second coordinate down; three
//! dimensional fields render their middle slice along the last axis.

use subglue::ScalarField;

/// Gray levels of the inactive-node checkerboard.
pub const CHECKER: [u8; 2] = [96, 160];

/// Range used for the linear gray map.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum RangePolicy {
    /// Smallest to largest finite value of the field.
    #[default]
    Finite,
    Fixed(f64, f64),
}

/// Rendered image and any warning raised on the way.
#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    pub warning: Option<String>,
}

impl Rendered {
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let mut line = String::new();
            for (k, p) in row.iter().enumerate() {
                let cell = p.to_string();
                if !line.is_empty() && line.len() + cell.len() + 1 > 70 {
                    out.push_str(&line);
                    out.push('\n');
                    line.clear();
                } else if k > 0 {
                    line.push(' ');
                }
                line.push_str(&cell);
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

pub fn render(field: &ScalarField, range: RangePolicy) -> Rendered {
    let lattice = field.lattice();
    let shape = lattice.shape();
    let (width, height) = (shape[0], if shape.len() > 1 { shape[1] } else { 1 });
    let slice = if shape.len() == 3 { shape[2] / 2 } else { 0 };

    let mut warning = None;
    let (lo, hi) = match range {
        RangePolicy::Fixed(lo, hi) => (lo, hi),
        RangePolicy::Finite => field.finite_range().unwrap_or((0.0, 0.0)),
    };
    let flat = !(hi > lo);
    if flat {
        warning = Some(format!("empty value range [{lo}, {hi}]; rendering mid-gray"));
    }

    let mut pixels = Vec::with_capacity(width * height);
    for row in 0..height {
        let y = height - 1 - row;
        for x in 0..width {
            let multi = [x, y, slice];
            let i = lattice.index(&multi[..shape.len()]);
            let p = match field.get(i) {
                None => CHECKER[(x + y) % 2],
                Some(v) if v == f64::NEG_INFINITY => 0,
                Some(_) if flat => 128,
                Some(v) => {
                    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
                    (t * 255.0).round() as u8
                }
            };
            pixels.push(p);
        }
    }
    Rendered {
        width,
        height,
        pixels,
        warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use subglue::{GridDomain, Lattice, Point};

    fn grid() -> GridDomain {
        GridDomain::full(Lattice::new(Point::new(&[0.0, 0.0]).unwrap(), 1.0, &[4, 3]).unwrap())
    }

    #[test]
    fn constant_is_mid_gray() {
        let r = render(&ScalarField::constant(grid(), 3.5), RangePolicy::Finite);
        assert!(r.pixels.iter().all(|&p| p == 128));
        assert!(r.warning.is_some());
        assert_eq!((r.width, r.height), (4, 3));
    }

    #[test]
    fn two_values_give_two_levels() {
        let f = ScalarField::from_fn(grid(), |x| if x[0] < 1.5 { 0.0 } else { 1.0 }).unwrap();
        let r = render(&f, RangePolicy::Finite);
        let mut levels: Vec<u8> = r.pixels.clone();
        levels.sort();
        levels.dedup();
        assert_eq!(levels, vec![0, 255]);
        assert_eq!(r.to_pgm().lines().nth(3).unwrap(), "0 0 255 255");
    }

    #[test]
    fn minus_infinity_and_inactive_nodes() {
        let lat = grid().lattice().clone();
        let mut mask = vec![true; 12];
        mask[lat.index(&[0, 0])] = false;
        let dom = GridDomain::new(lat.clone(), mask).unwrap();
        let mut vals = vec![1.0; 12];
        vals[lat.index(&[1, 0])] = f64::NEG_INFINITY;
        vals[lat.index(&[2, 0])] = 2.0;
        let r = render(&ScalarField::new(dom, vals).unwrap(), RangePolicy::Finite);
        let bottom = &r.pixels[8..12];
        assert_eq!(bottom, &[CHECKER[0], 0, 255, 0]);
    }
}
