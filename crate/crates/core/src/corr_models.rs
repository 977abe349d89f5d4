//! Target correlation structures: a parametric two-branch model, tabulated
//! matrices, and the block Pearson estimator that measures them from images.
//!
//! Lags are `(row, column)`; tables are row-major with lag `(0, 0)` first.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field_gen::{extend_rho, CorrelationGrid};

/// Tabulated values with magnitude below this are treated as zero.
pub const MATRIX_ZERO_THRESHOLD: f64 = 1e-3;

/// A correlation known on a rectangular window of non-negative lags.
pub trait LagTable {
    fn lag_rows(&self) -> usize;
    fn lag_cols(&self) -> usize;
    fn lag(&self, k: usize, l: usize) -> f64;
}

/// `rho(k, l) = h(a e^{-k²/L²})` for `k >= l` and `-h(a e^{-l²/L²})` otherwise,
/// where `h` zeroes magnitudes below `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricCorr {
    pub a: f64,
    pub length: u32,
    pub eps: f64,
}

impl ParametricCorr {
    pub const DEFAULT_EPS: f64 = 1e-3;

    pub fn new(a: f64, length: u32, eps: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::domain(format!("a must lie in (0, 1), got {a}")));
        }
        if length < 2 || length % 2 != 0 {
            return Err(Error::domain(format!("L must be an even integer >= 2, got {length}")));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::domain(format!("eps must be positive, got {eps}")));
        }
        Ok(ParametricCorr { a, length, eps })
    }

    fn h(&self, x: f64) -> f64 {
        if x.abs() < self.eps {
            0.0
        } else {
            x
        }
    }

    pub fn rho(&self, k: usize, l: usize) -> f64 {
        let l2 = (self.length as f64).powi(2);
        let decay = |m: usize| self.a * (-((m * m) as f64) / l2).exp();
        if (k, l) == (0, 0) {
            1.0
        } else if k >= l {
            self.h(decay(k))
        } else {
            -self.h(decay(l))
        }
    }

    /// Values on `{0..N/2}²`, row-major.
    pub fn quarter(&self, size: usize) -> Vec<f64> {
        let h = size / 2;
        (0..=h).flat_map(|k| (0..=h).map(move |l| self.rho(k, l))).collect()
    }

    pub fn correlation_grid(&self, size: usize) -> Result<CorrelationGrid> {
        extend_rho(&self.quarter(size), size)
    }
}

/// Correlation tabulated by lag, as read from a matrix file.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCorr {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl LagTable for MatrixCorr {
    fn lag_rows(&self) -> usize {
        self.rows
    }
    fn lag_cols(&self) -> usize {
        self.cols
    }
    fn lag(&self, k: usize, l: usize) -> f64 {
        self.values[k * self.cols + l]
    }
}

impl MatrixCorr {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::domain(format!("{} values do not fill a {rows}x{cols} table", values.len())));
        }
        if values[0] != 1.0 {
            return Err(Error::domain(format!("lag (0, 0) must be 1, got {}", values[0])));
        }
        if let Some(i) = values.iter().position(|v| !(v.abs() <= 1.0)) {
            return Err(Error::domain(format!("lag ({}, {}) = {} is not a correlation", i / cols, i % cols, values[i])));
        }
        Ok(MatrixCorr { rows, cols, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Parses comma-separated rows; `#` lines and blank lines are skipped.
    /// Entries below [`MATRIX_ZERO_THRESHOLD`] in magnitude become 0.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let row = trimmed
                .split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: line_no,
                        msg: format!("'{}' is not a number ({e})", cell.trim()),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected {c} columns, found {}", row.len()),
                    })
                }
                _ => {}
            }
            for (c, &v) in row.iter().enumerate() {
                if !(v.abs() <= 1.0) {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("entry {v} in column {} is outside [-1, 1]", c + 1),
                    });
                }
                if rows == 0 && c == 0 && v != 1.0 {
                    return Err(Error::Parse { line: line_no, msg: format!("first entry must be 1, got {v}") });
                }
            }
            values.extend(row.into_iter().map(|v| if v.abs() < MATRIX_ZERO_THRESHOLD { 0.0 } else { v }));
            rows += 1;
        }
        let cols = cols.ok_or(Error::Parse { line: 0, msg: "no data rows".into() })?;
        MatrixCorr::new(rows, cols, values)
    }

    /// CSV with 17 significant digits, which parses back bit for bit.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.cols) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Block Pearson estimate of lag correlations over an `n_v × n_v` window.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCorrelation {
    pub window: usize,
    /// `r((0,0),(k,l))`, row-major over the window.
    pub corr: Vec<f64>,
    /// Blocks across the columns and down the rows.
    pub n_c: usize,
    pub n_f: usize,
}

impl LagTable for SampleCorrelation {
    fn lag_rows(&self) -> usize {
        self.window
    }
    fn lag_cols(&self) -> usize {
        self.window
    }
    fn lag(&self, k: usize, l: usize) -> f64 {
        self.corr[k * self.window + l]
    }
}

impl SampleCorrelation {
    pub fn to_matrix(&self) -> Result<MatrixCorr> {
        MatrixCorr::new(self.window, self.window, self.corr.clone())
    }
}

/// Tiles the image with non-overlapping `2n_v × 2n_v` blocks and correlates,
/// across blocks, the top-left pixel of each block's `n_v × n_v` corner with
/// every other pixel of that corner.
pub fn pearson_estimate(image: &[f64], rows: usize, cols: usize, window: usize) -> Result<SampleCorrelation> {
    if image.len() != rows * cols {
        return Err(Error::domain(format!("{} pixels do not fill a {rows}x{cols} image", image.len())));
    }
    if window == 0 {
        return Err(Error::domain("window must be at least 1"));
    }
    let n_c = cols / (2 * window);
    let n_f = rows / (2 * window);
    if n_c * n_f < 2 {
        return Err(Error::domain(format!(
            "a {rows}x{cols} image holds {} blocks of side {}; at least 2 are needed",
            n_c * n_f,
            2 * window
        )));
    }
    let blocks = (n_c * n_f) as f64;
    // samples[p][b]: position p of the corner in block b
    let position = |k: usize, l: usize| -> Vec<f64> {
        let mut v = Vec::with_capacity(n_c * n_f);
        for i in 0..n_f {
            for j in 0..n_c {
                v.push(image[(2 * window * i + k) * cols + 2 * window * j + l]);
            }
        }
        v
    };
    let centered = |v: Vec<f64>| -> (Vec<f64>, f64) {
        let mean = v.iter().sum::<f64>() / blocks;
        let c: Vec<f64> = v.into_iter().map(|x| x - mean).collect();
        let s = (c.iter().map(|x| x * x).sum::<f64>() / blocks).sqrt();
        (c, s)
    };
    let (origin, s0) = centered(position(0, 0));
    if s0 == 0.0 {
        return Err(Error::DegenerateVariance { row: 0, col: 0 });
    }
    let mut corr = Vec::with_capacity(window * window);
    for k in 0..window {
        for l in 0..window {
            if (k, l) == (0, 0) {
                corr.push(1.0);
                continue;
            }
            let (other, s) = centered(position(k, l));
            if s == 0.0 {
                return Err(Error::DegenerateVariance { row: k, col: l });
            }
            let cov = origin.iter().zip(&other).map(|(a, b)| a * b).sum::<f64>() / blocks;
            corr.push((cov / (s0 * s)).clamp(-1.0, 1.0));
        }
    }
    Ok(SampleCorrelation { window, corr, n_c, n_f })
}

/// Quarter-grid target `{0..N/2}²` from a lag table: values inside the table,
/// 0 beyond it, 1 at the origin.
pub fn to_r1_rho(table: &dyn LagTable, size: usize) -> Result<Vec<f64>> {
    if size < 4 || size % 2 != 0 {
        return Err(Error::domain(format!("grid size must be even and >= 4, got {size}")));
    }
    let side = size / 2 + 1;
    if table.lag_rows() > side || table.lag_cols() > side {
        return Err(Error::domain(format!(
            "a {}x{} lag table does not fit the {side}x{side} quarter grid of N = {size}",
            table.lag_rows(),
            table.lag_cols()
        )));
    }
    let mut out = vec![0.0; side * side];
    for k in 0..table.lag_rows() {
        for l in 0..table.lag_cols() {
            out[k * side + l] = table.lag(k, l);
        }
    }
    out[0] = 1.0;
    Ok(out)
}
