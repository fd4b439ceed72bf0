//! Field CSV files and JSON documents.
//!
//! Fields are written as `t,x,y,value` rows, ordered by time level and then
//! row-major over interior nodes, with 17 significant digits so that a
//! write/read cycle is bitwise lossless.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{Discretization, ScalarField, SpaceTimeField};

pub const CSV_HEADER: &str = "t,x,y,value";

/// Coordinates must match the grid to this absolute tolerance.
const COORD_TOL: f64 = 1e-9;

fn push_frame(out: &mut String, frame: &ScalarField, t: f64) {
    use std::fmt::Write;
    let d = frame.disc();
    for j in 0..d.ny() {
        for i in 0..d.nx() {
            let v = frame.values()[d.index(i, j)];
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", t, d.x(i), d.y(j), v).expect("string write");
        }
    }
}

pub fn format_field_csv(field: &SpaceTimeField) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (n, frame) in field.frames().iter().enumerate() {
        push_frame(&mut out, frame, field.disc().t(n));
    }
    out
}

/// A single frame stamped with time `t`.
pub fn format_frame_csv(frame: &ScalarField, t: f64) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    push_frame(&mut out, frame, t);
    out
}

pub fn write_field_csv(path: &Path, field: &SpaceTimeField) -> Result<()> {
    Ok(fs::write(path, format_field_csv(field))?)
}

fn parse_rows(text: &str) -> Result<Vec<[f64; 4]>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Csv(format!("expected header `{CSV_HEADER}`"))),
    }
    lines
        .map(|(k, line)| {
            let mut row = [0.0f64; 4];
            let mut cols = line.split(',');
            for slot in row.iter_mut() {
                let c = cols.next().ok_or_else(|| Error::Csv(format!("line {}: expected 4 columns", k + 1)))?;
                *slot = c
                    .trim()
                    .parse()
                    .map_err(|_| Error::Csv(format!("line {}: bad number `{}`", k + 1, c.trim())))?;
            }
            if cols.next().is_some() {
                return Err(Error::Csv(format!("line {}: expected 4 columns", k + 1)));
            }
            if !row[3].is_finite() {
                return Err(Error::Csv(format!("line {}: non-finite value", k + 1)));
            }
            Ok(row)
        })
        .collect()
}

fn frames_from_rows(rows: &[[f64; 4]], disc: &Discretization, levels: usize) -> Result<Vec<ScalarField>> {
    let per_frame = disc.nodes();
    if rows.len() != levels * per_frame {
        return Err(Error::Csv(format!(
            "expected {} rows for a {}x{} grid with {levels} time level(s), got {}",
            levels * per_frame,
            disc.nx(),
            disc.ny(),
            rows.len()
        )));
    }
    let mut frames = Vec::with_capacity(levels);
    for (n, chunk) in rows.chunks(per_frame).enumerate() {
        let t = if levels == 1 { 0.0 } else { disc.t(n) };
        let mut values = Vec::with_capacity(per_frame);
        for (k, row) in chunk.iter().enumerate() {
            let (i, j) = (k % disc.nx(), k / disc.nx());
            let ok = (row[0] - t).abs() <= COORD_TOL * (1.0 + t.abs())
                && (row[1] - disc.x(i)).abs() <= COORD_TOL
                && (row[2] - disc.y(j)).abs() <= COORD_TOL;
            if !ok {
                return Err(Error::Csv(format!(
                    "row {} has coordinates ({}, {}, {}), expected ({t}, {}, {})",
                    n * per_frame + k + 2,
                    row[0],
                    row[1],
                    row[2],
                    disc.x(i),
                    disc.y(j)
                )));
            }
            values.push(row[3]);
        }
        frames.push(ScalarField::from_values(*disc, values)?);
    }
    Ok(frames)
}

/// Reads a field on `disc` with all `nt + 1` time levels.
pub fn read_field_csv(text: &str, disc: &Discretization) -> Result<SpaceTimeField> {
    let rows = parse_rows(text)?;
    let frames = frames_from_rows(&rows, disc, disc.nt() + 1)?;
    SpaceTimeField::from_frames(*disc, frames)
}

/// Reads a single frame stamped `t = 0`.
pub fn read_frame_csv(text: &str, disc: &Discretization) -> Result<ScalarField> {
    let rows = parse_rows(text)?;
    Ok(frames_from_rows(&rows, disc, 1)?.remove(0))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(fs::write(path, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn disc() -> Discretization {
        Discretization::new(3, 4, 2, 0.7).unwrap()
    }

    #[test]
    fn layout() {
        let d = disc();
        let f = SpaceTimeField::from_fn(d, |x, y, t| x + 10.0 * y + 100.0 * t);
        let text = format_field_csv(&f);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 3 * 12);
        // second row advances x first
        let second: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(second[1], d.x(1));
        assert_eq!(second[2], d.y(0));
    }

    #[test]
    fn rejects_malformed() {
        let d = disc();
        let good = format_field_csv(&SpaceTimeField::zeros(d));
        assert!(read_field_csv(&good, &d).is_ok());
        assert!(read_field_csv(&good.replacen("t,x,y,value", "t,x,y", 1), &d).is_err());
        let short: String = good.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(read_field_csv(&short, &d).is_err());
        assert!(read_field_csv(&good, &Discretization::new(4, 3, 2, 0.7).unwrap()).is_err());
        assert!(read_field_csv(&good.replace("0.0000000000000000e0\n", "nan\n"), &d).is_err());
        assert!(read_field_csv(&good.replace("0.0000000000000000e0\n", "0,1\n"), &d).is_err());
    }

    #[test]
    fn frame_round_trip() {
        let d = disc();
        let f = ScalarField::from_fn(d, |x, y| (x * 7.0).exp() - y / 3.0);
        assert_eq!(read_frame_csv(&format_frame_csv(&f, 0.0), &d).unwrap(), f);
        assert!(read_frame_csv(&format_frame_csv(&f, 0.5), &d).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bitwise(values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 36)) {
            let d = disc();
            let frames = values
                .chunks(12)
                .map(|c| ScalarField::from_values(d, c.to_vec()).unwrap())
                .collect();
            let f = SpaceTimeField::from_frames(d, frames).unwrap();
            let back = read_field_csv(&format_field_csv(&f), &d).unwrap();
            for (a, b) in f.frames().iter().zip(back.frames()) {
                for (x, y) in a.values().iter().zip(b.values()) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }
}
