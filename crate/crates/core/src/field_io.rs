//! FIELD v1 text format.
//!
//! ```text
//! FIELD v1
//! nx ny x0 y0 h
//! <ny rows of nx space-separated values, row-major from y-min>
//! ```
//!
//! Scalar values are written with 17 significant digits and `nan` marks nodes outside the
//! domain; masks are written as `0`/`1`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{CompactMask, Grid, Point, ScalarField};

pub const HEADER: &str = "FIELD v1";

fn header(g: &Grid) -> String {
    format!("{HEADER}\n{} {} {:.16e} {:.16e} {:.16e}\n", g.nx, g.ny, g.origin.x, g.origin.y, g.h)
}

fn rows(g: &Grid, mut cell: impl FnMut(usize) -> String) -> String {
    let mut s = String::new();
    for j in 0..g.ny {
        for i in 0..g.nx {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&cell(g.index(i, j)));
        }
        s.push('\n');
    }
    s
}

pub fn field_to_string(f: &ScalarField) -> String {
    let mut s = header(&f.grid);
    s += &rows(&f.grid, |i| if f.inside[i] { format!("{:.16e}", f.values[i]) } else { "nan".into() });
    s
}

pub fn mask_to_string(m: &CompactMask) -> String {
    let mut s = header(&m.grid);
    s += &rows(&m.grid, |i| if m.member[i] { "1".into() } else { "0".into() });
    s
}

/// Grid and raw values (`NaN` for `nan`).
pub fn parse(text: &str) -> Result<(Grid, Vec<f64>)> {
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim() == HEADER => {}
        Some(l) => return Err(Error::Format(format!("unsupported header {:?}, expected {HEADER:?}", l.trim()))),
        None => return Err(Error::Format("empty file".into())),
    }
    let dims: Vec<&str> = lines.next().ok_or_else(|| Error::Format("missing grid line".into()))?.split_whitespace().collect();
    if dims.len() != 5 {
        return Err(Error::Format(format!("grid line needs 5 entries, found {}", dims.len())));
    }
    let bad = |e: &dyn std::fmt::Display| Error::Format(format!("grid line: {e}"));
    let nx: usize = dims[0].parse().map_err(|e| bad(&e))?;
    let ny: usize = dims[1].parse().map_err(|e| bad(&e))?;
    let x0: f64 = dims[2].parse().map_err(|e| bad(&e))?;
    let y0: f64 = dims[3].parse().map_err(|e| bad(&e))?;
    let h: f64 = dims[4].parse().map_err(|e| bad(&e))?;
    let grid = Grid::new(Point::new(x0, y0), h, nx, ny)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut count_rows = 0;
    for (j, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let row: Vec<&str> = line.split_whitespace().collect();
        if row.len() != nx {
            return Err(Error::Format(format!("shape mismatch: row {j} has {} values, expected {nx}", row.len())));
        }
        for v in row {
            values.push(v.parse::<f64>().map_err(|e| Error::Format(format!("row {j}: {e}")))?);
        }
        count_rows += 1;
    }
    if count_rows != ny {
        return Err(Error::Format(format!("shape mismatch: {count_rows} rows, expected {ny}")));
    }
    Ok((grid, values))
}

pub fn field_from_str(text: &str, quantity: &str) -> Result<ScalarField> {
    let (grid, values) = parse(text)?;
    let inside: Vec<bool> = values.iter().map(|v| !v.is_nan()).collect();
    let mut f = ScalarField::new(grid, inside, quantity);
    f.values = values;
    Ok(f)
}

pub fn mask_from_str(text: &str) -> Result<CompactMask> {
    let (grid, values) = parse(text)?;
    let member = values
        .iter()
        .map(|&v| match v {
            v if v == 0.0 => Ok(false),
            v if v == 1.0 => Ok(true),
            v => Err(Error::Format(format!("mask value {v} is not 0 or 1"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompactMask { grid, member })
}

pub fn emit_field(path: &Path, f: &ScalarField) -> Result<()> {
    Ok(std::fs::write(path, field_to_string(f))?)
}

pub fn emit_mask(path: &Path, m: &CompactMask) -> Result<()> {
    Ok(std::fs::write(path, mask_to_string(m))?)
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    let quantity = path.file_stem().and_then(|s| s.to_str()).unwrap_or("field").to_string();
    field_from_str(&std::fs::read_to_string(path)?, &quantity)
}

pub fn read_mask(path: &Path) -> Result<CompactMask> {
    mask_from_str(&std::fs::read_to_string(path)?)
}

/// Plain CSV `x,y,value` of the inside nodes, for plotting.
pub fn field_to_csv(f: &ScalarField) -> String {
    let mut s = String::from("x,y,value\n");
    for i in f.inside_indices() {
        let p = f.grid.point(i);
        let _ = writeln!(s, "{},{},{:.16e}", p.x, p.y, f.values[i]);
    }
    s
}
