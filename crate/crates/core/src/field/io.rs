use std::io::{BufRead, Write};

use super::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::{GridDomain, Lattice, Point};

fn join<T: std::fmt::Debug>(xs: &[T]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

fn rle(mask: &[bool]) -> String {
    let mut runs = Vec::new();
    let mut it = mask.iter().peekable();
    while let Some(&b) = it.next() {
        let mut n = 1usize;
        while it.peek() == Some(&&b) {
            it.next();
            n += 1;
        }
        runs.push(format!("{}x{n}", u8::from(b)));
    }
    runs.join(" ")
}

/// Write `field` in the text field format: a five-line header followed by one
/// value per active node in row-major order.
pub fn write_field(field: &ScalarField, mut w: impl Write) -> Result<()> {
    let lattice = field.lattice();
    writeln!(w, "dim {}", lattice.dim())?;
    writeln!(w, "shape {}", join(lattice.shape()))?;
    writeln!(w, "origin {}", join(lattice.origin().coords()))?;
    writeln!(w, "spacing {:?}", lattice.spacing())?;
    writeln!(w, "mask rle {}", rle(field.domain().mask()))?;
    for i in field.domain().active_indices() {
        writeln!(w, "{:?}", field.raw()[i])?;
    }
    w.flush()?;
    Ok(())
}

fn header<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Format(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::Format(format!("expected `{key} ...`, got `{line}`")))
}

fn numbers<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Format(format!("bad {what} entry `{t}`")))
        })
        .collect()
}

/// Read a field written by [`write_field`].
pub fn read_field(r: impl BufRead) -> Result<ScalarField> {
    let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines.iter().map(|s| s.trim()).filter(|s| !s.is_empty());
    let dim: usize = header(it.next(), "dim")?
        .trim()
        .parse()
        .map_err(|_| Error::Format("bad dimension".into()))?;
    let shape: Vec<usize> = numbers(header(it.next(), "shape")?, "shape")?;
    let origin: Vec<f64> = numbers(header(it.next(), "origin")?, "origin")?;
    let spacing: f64 = header(it.next(), "spacing")?
        .trim()
        .parse()
        .map_err(|_| Error::Format("bad spacing".into()))?;
    if shape.len() != dim || origin.len() != dim {
        return Err(Error::Format(format!(
            "dimension {dim} disagrees with shape {shape:?} or origin {origin:?}"
        )));
    }
    let lattice = Lattice::new(Point::new(&origin)?, spacing, &shape)?;
    let rle_text = header(it.next(), "mask rle")?;
    let mut mask = Vec::with_capacity(lattice.len());
    for run in rle_text.split_whitespace() {
        let (b, n) = run
            .split_once('x')
            .ok_or_else(|| Error::Format(format!("bad mask run `{run}`")))?;
        let n: usize = n.parse().map_err(|_| Error::Format(format!("bad mask run `{run}`")))?;
        let b = match b {
            "0" => false,
            "1" => true,
            _ => return Err(Error::Format(format!("bad mask run `{run}`"))),
        };
        mask.extend(std::iter::repeat(b).take(n));
    }
    if mask.len() != lattice.len() {
        return Err(Error::Format(format!(
            "mask covers {} nodes, lattice has {}",
            mask.len(),
            lattice.len()
        )));
    }
    let domain = GridDomain::new(lattice, mask)?;
    let mut values = vec![f64::NAN; domain.lattice().len()];
    let active: Vec<usize> = domain.active_indices().collect();
    for (k, &i) in active.iter().enumerate() {
        let t = it
            .next()
            .ok_or_else(|| Error::Format(format!("expected {} values, got {k}", active.len())))?;
        values[i] = t
            .parse()
            .map_err(|_| Error::Format(format!("bad value `{t}`")))?;
    }
    if let Some(extra) = it.next() {
        return Err(Error::Format(format!("trailing data `{extra}`")));
    }
    ScalarField::new(domain, values).map_err(|e| Error::Format(e.to_string()))
}
