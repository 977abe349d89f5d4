//! Spectral synthesis of a correlated Gaussian field on the N×N torus and its
//! pointwise transform to G_A^0 clutter.
//!
//! Lags and rasters are indexed `(row, column)` and stored row-major. A target
//! correlation given on the quarter `{0..N/2}²` is mirrored onto the torus,
//! mapped to Gaussian correlations `tau`, and realized by filtering white noise
//! with `ψ = sqrt(DFT(tau) / N²)`.

use std::collections::HashMap;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::corr_map::{self, CorrLookup, CorrMapKey};
use crate::error::{Error, Result, Stage};
use crate::ga0::GA0Params;
use crate::numerics::{normal_cdf, normal_quantile, normal_sf};
use crate::sampling;

/// Spectrum values in `[-SPECTRUM_TOL, 0)` are rounding noise; lower ones are fatal.
pub const SPECTRUM_TOL: f64 = 1e-9;
/// Largest imaginary part tolerated in the synthesized Gaussian field.
pub const FIELD_IMAG_TOL: f64 = 1e-8;
/// Smallest tail probability fed to the clutter quantile.
pub const TAIL_FLOOR: f64 = 1e-15;

/// An N×N real raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub size: usize,
    pub values: Vec<f64>,
}

impl FieldGrid {
    pub fn new(size: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != size * size {
            return Err(Error::domain(format!("{} values do not fill a {size}x{size} grid", values.len())));
        }
        Ok(FieldGrid { size, values })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.size + col]
    }

    /// Empirical torus correlation between pixels `(row, col)` lags apart.
    pub fn lag_correlation(&self, dr: usize, dc: usize) -> f64 {
        let n = self.size;
        let count = (n * n) as f64;
        let mean = self.values.iter().sum::<f64>() / count;
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
        let mut cov = 0.0;
        for r in 0..n {
            for c in 0..n {
                cov += (self.get(r, c) - mean) * (self.get((r + dr) % n, (c + dc) % n) - mean);
            }
        }
        cov / count / var
    }
}

fn check_size(size: usize) -> Result<usize> {
    if size < 4 || size % 2 != 0 {
        return Err(Error::domain(format!("grid size must be even and >= 4, got {size}")));
    }
    Ok(size / 2)
}

/// Target clutter correlation on all torus lags.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGrid {
    size: usize,
    rho: Vec<f64>,
}

impl CorrelationGrid {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.rho[k * self.size + l]
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    /// The quarter `{0..N/2}²` the grid was built from.
    pub fn quarter(&self) -> Vec<f64> {
        let h = self.size / 2;
        (0..=h).flat_map(|k| (0..=h).map(move |l| (k, l))).map(|(k, l)| self.get(k, l)).collect()
    }

    /// Delta correlation: independent pixels.
    pub fn delta(size: usize) -> Result<Self> {
        let h = check_size(size)?;
        let mut base = vec![0.0; (h + 1) * (h + 1)];
        base[0] = 1.0;
        extend_rho(&base, size)
    }
}

/// Mirrors `base`, given row-major on `{0..N/2}²`, onto the torus:
/// `rho(k, l) = base(min(k, N-k), min(l, N-l))`.
pub fn extend_rho(base: &[f64], size: usize) -> Result<CorrelationGrid> {
    let h = check_size(size)?;
    let side = h + 1;
    if base.len() != side * side {
        return Err(Error::domain(format!("quarter grid for N = {size} needs {} values, got {}", side * side, base.len())));
    }
    if base[0] != 1.0 {
        return Err(Error::domain(format!("correlation at lag (0, 0) must be 1, got {}", base[0])));
    }
    if let Some(i) = (1..base.len()).find(|&i| !(base[i].abs() < 1.0)) {
        return Err(Error::domain(format!(
            "correlation at lag ({}, {}) must lie in (-1, 1), got {}",
            i / side,
            i % side,
            base[i]
        )));
    }
    let fold = |k: usize| k.min(size - k);
    let rho = (0..size * size).map(|i| base[fold(i / size) * side + fold(i % size)]).collect();
    Ok(CorrelationGrid { size, rho })
}

/// Gaussian correlations on all torus lags.
#[derive(Debug, Clone, PartialEq)]
pub struct TauGrid {
    pub size: usize,
    pub tau: Vec<f64>,
}

/// Applies `ð` lag by lag with the cached default lookup for `key`.
pub fn tau_grid(corr: &CorrelationGrid, key: CorrMapKey) -> Result<TauGrid> {
    let lookup = corr_map::default_lookup(key)?;
    tau_grid_with(corr, &lookup)
}

/// Applies `ð` lag by lag; each distinct value is inverted once. Infeasible
/// targets are all reported together, by their quarter-grid lags.
pub fn tau_grid_with(corr: &CorrelationGrid, lookup: &CorrLookup) -> Result<TauGrid> {
    let mut distinct: Vec<f64> = corr.rho.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| a.to_bits() == b.to_bits());
    let range = lookup.feasible_range();

    let h = corr.size / 2;
    let mut bad = Vec::new();
    for k in 0..=h {
        for l in 0..=h {
            let rho = corr.get(k, l);
            if (k, l) != (0, 0) && rho != 0.0 && !range.contains(rho) {
                bad.push((k, l, rho));
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::InfeasibleLags { lags: bad });
    }

    let taus = distinct.par_iter().map(|&r| lookup.tau_of_rho(r)).collect::<Result<Vec<_>>>()?;
    let table: HashMap<u64, f64> = distinct.iter().map(|r| r.to_bits()).zip(taus).collect();
    let tau = corr.rho.iter().map(|r| table[&r.to_bits()]).collect();
    Ok(TauGrid { size: corr.size, tau })
}

/// In-place 2-D DFT of a row-major N×N array, unnormalized.
fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex64::default(); n];
    for c in 0..n {
        for r in 0..n {
            column[r] = data[r * n + c];
        }
        fft.process(&mut column);
        for r in 0..n {
            data[r * n + c] = column[r];
        }
    }
}

fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// `ψ = sqrt(F(tau))` with `F` the forward DFT scaled by `1/N²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMask {
    pub size: usize,
    pub psi: Vec<f64>,
    /// Frequencies whose slightly negative spectrum was clamped to zero.
    pub clamped: usize,
}

pub fn spectral_mask(tau: &TauGrid) -> Result<SpectralMask> {
    let n = tau.size;
    let mut spectrum = to_complex(&tau.tau);
    fft2(&mut spectrum, n, false);
    let scale = 1.0 / (n * n) as f64;

    let imag = spectrum.iter().map(|z| (z.im * scale).abs()).fold(0.0, f64::max);
    if imag > SPECTRUM_TOL {
        return Err(Error::Normalization(imag));
    }
    // average each frequency with its mirror so ψ(k, l) = ψ(-k, -l) bit for bit
    let mirror = |i: usize| ((n - i / n) % n) * n + (n - i % n) % n;
    let real: Vec<f64> = (0..n * n).map(|i| 0.5 * (spectrum[i].re + spectrum[mirror(i)].re) * scale).collect();

    let (worst, value) = real.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty grid");
    if value < -SPECTRUM_TOL {
        return Err(Error::InvalidCorrelation { value, k: worst / n, l: worst % n });
    }
    let clamped = real.iter().filter(|&&v| v < 0.0).count();
    let psi = real.iter().map(|&v| v.max(0.0).sqrt()).collect();
    Ok(SpectralMask { size: n, psi, clamped })
}

/// The filter `θ = IDFT(ψ) / N`, whose circular self-convolution is `tau`.
pub fn theta(mask: &SpectralMask) -> Result<FieldGrid> {
    let n = mask.size;
    let mut data = to_complex(&mask.psi);
    fft2(&mut data, n, true);
    let scale = 1.0 / n as f64;
    let imag = data.iter().map(|z| (z.im * scale).abs()).fold(0.0, f64::max);
    if imag > FIELD_IMAG_TOL {
        return Err(Error::Normalization(imag));
    }
    FieldGrid::new(n, data.iter().map(|z| z.re * scale).collect())
}

/// N² standard normal draws filled row by row from a seeded generator.
pub fn white_noise(size: usize, seed: u64) -> Result<FieldGrid> {
    if size < 1 {
        return Err(Error::domain("white noise needs size >= 1"));
    }
    let mut rng = sampling::seeded(seed);
    let values = (0..size * size)
        .map(|_| normal_quantile(sampling::open_unit(&mut rng)))
        .collect::<Result<Vec<_>>>()?;
    FieldGrid::new(size, values)
}

/// `ζ = θ ∗ ξ`, computed as `IDFT(ψ · DFT(ξ)) / N`.
pub fn correlated_gaussian(mask: &SpectralMask, noise: &FieldGrid) -> Result<FieldGrid> {
    let n = mask.size;
    if noise.size != n {
        return Err(Error::domain(format!("mask is {n}x{n} but noise is {0}x{0}", noise.size)));
    }
    let mut data = to_complex(&noise.values);
    fft2(&mut data, n, false);
    for (z, &p) in data.iter_mut().zip(&mask.psi) {
        *z *= p;
    }
    fft2(&mut data, n, true);
    let scale = 1.0 / n as f64;
    let imag = data.iter().map(|z| (z.im * scale).abs()).fold(0.0, f64::max);
    if imag > FIELD_IMAG_TOL {
        return Err(Error::Normalization(imag));
    }
    FieldGrid::new(n, data.iter().map(|z| z.re * scale).collect())
}

/// Clutter raster with the number of pixels whose tail probability was floored.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterField {
    pub field: FieldGrid,
    pub clamped: usize,
}

/// Pointwise `sqrt(γ) · G^{-1}(Φ(ζ), (α, 1, n))`. Positive `ζ` go through the
/// upper tail; tail probabilities below [`TAIL_FLOOR`] are floored and counted.
pub fn to_clutter(zeta: &FieldGrid, params: &GA0Params) -> Result<ClutterField> {
    params.require_simulation_valid()?;
    let unit = params.unit();
    let root_gamma = params.gamma.sqrt();
    let mapped = zeta
        .values
        .par_iter()
        .map(|&u| {
            if u > 0.0 {
                let q = normal_sf(u);
                let floored = q < TAIL_FLOOR;
                Ok((root_gamma * unit.quantile_upper(q.max(TAIL_FLOOR))?, floored))
            } else {
                Ok((root_gamma * unit.quantile(normal_cdf(u))?, false))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let clamped = mapped.iter().filter(|m| m.1).count();
    let field = FieldGrid::new(zeta.size, mapped.into_iter().map(|m| m.0).collect())?;
    Ok(ClutterField { field, clamped })
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub params: GA0Params,
    pub corr: CorrelationGrid,
    pub seed: u64,
    pub quadrature_order: usize,
    pub lookup_size: usize,
}

impl SimulationConfig {
    pub fn new(params: GA0Params, corr: CorrelationGrid, seed: u64) -> Self {
        SimulationConfig {
            params,
            corr,
            seed,
            quadrature_order: corr_map::DEFAULT_QUADRATURE_ORDER,
            lookup_size: corr_map::DEFAULT_LOOKUP_SIZE,
        }
    }
}

/// Every intermediate of a simulation run, kept for auditing.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub tau: TauGrid,
    pub mask: SpectralMask,
    pub zeta: FieldGrid,
    pub clutter: ClutterField,
}

pub fn simulate(config: &SimulationConfig) -> Result<Simulation> {
    let params = GA0Params::new(config.params.alpha, config.params.gamma, config.params.looks)?;
    params.require_simulation_valid()?;
    let key = CorrMapKey::new(params.alpha, params.looks)?;
    let lookup = corr_map::lookup(key, config.lookup_size, config.quadrature_order).map_err(|e| e.at(Stage::Lookup))?;
    let tau = tau_grid_with(&config.corr, &lookup).map_err(|e| e.at(Stage::TauGrid))?;
    let mask = spectral_mask(&tau).map_err(|e| e.at(Stage::SpectralMask))?;
    let noise = white_noise(config.corr.size, config.seed).map_err(|e| e.at(Stage::WhiteNoise))?;
    let zeta = correlated_gaussian(&mask, &noise).map_err(|e| e.at(Stage::CorrelatedGaussian))?;
    let clutter = to_clutter(&zeta, &params).map_err(|e| e.at(Stage::Clutter))?;
    Ok(Simulation { tau, mask, zeta, clutter })
}
