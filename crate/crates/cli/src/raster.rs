//! Raster serialization: lossless CSV and 16-bit binary PGM.

use std::fmt::Write as _;

/// Row-major values, comma-separated, 17 significant digits, LF endings.
pub fn to_csv(values: &[f64], cols: usize) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for row in values.chunks(cols) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Parses a rectangular numeric CSV into `(rows, cols, values)`.
pub fn parse_csv(text: &str) -> Result<(usize, usize, Vec<f64>), String> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let before = values.len();
        for cell in line.split(',') {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| format!("line {}: '{}' is not a number", i + 1, cell.trim()))?;
            values.push(v);
        }
        let width = values.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => return Err(format!("line {}: expected {c} columns, found {width}", i + 1)),
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or("no data rows")?;
    Ok((rows, cols, values))
}

/// Quantization bounds of a PGM image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn of(values: &[f64]) -> Bounds {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Bounds { min, max }
    }

    pub fn quantize(&self, z: f64) -> u16 {
        let span = self.max - self.min;
        if !(span > 0.0) {
            return 0;
        }
        (65535.0 * (z - self.min) / span).round().clamp(0.0, 65535.0) as u16
    }

    pub fn sidecar(&self) -> String {
        format!("min={:.16e}\nmax={:.16e}\n", self.min, self.max)
    }
}

/// Binary "P5" PGM with maxval 65535 and big-endian samples.
pub fn to_pgm16(values: &[f64], rows: usize, cols: usize, bounds: Bounds) -> Vec<u8> {
    let mut out = format!("P5\n{cols} {rows}\n65535\n").into_bytes();
    out.reserve(values.len() * 2);
    for &v in values {
        out.extend_from_slice(&bounds.quantize(v).to_be_bytes());
    }
    out
}
