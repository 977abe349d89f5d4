//! The G_A^0(α, γ, n) amplitude law.
//!
//! Density, distribution function and quantile are expressed through the
//! Snedecor F law: `G(z) = Υ_{2n,-2α}(-α z² / γ)`. Moments use the closed
//! form `(γ/n)^{r/2} Γ(-α-r/2) Γ(n+r/2) / (Γ(-α) Γ(n))`, evaluated in log
//! space so very rough or very smooth textures do not overflow.

use crate::error::{Error, Result};
use crate::numerics::{f_cdf, f_quantile, f_quantile_upper, f_sf, find_root, ln_gamma, normal_cdf, normal_sf, RootBracket};
use crate::sampling;

/// Quantile arguments at or above this are reported as infinite.
pub const QUANTILE_CEILING: f64 = 1.0 - 1e-15;

/// Parameters of the G_A^0 law: roughness `alpha < 0`, scale `gamma > 0` and
/// number of looks `looks >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GA0Params {
    pub alpha: f64,
    pub gamma: f64,
    pub looks: u32,
}

/// Mean and variance of a G_A^0 variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
}

impl GA0Params {
    pub fn new(alpha: f64, gamma: f64, looks: u32) -> Result<Self> {
        if !(alpha < 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be negative, got {alpha}")));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
        }
        if looks < 1 {
            return Err(Error::domain("looks must be at least 1"));
        }
        Ok(GA0Params { alpha, gamma, looks })
    }

    /// Unit-scale law with the same roughness and looks.
    pub fn unit(&self) -> Self {
        GA0Params { gamma: 1.0, ..*self }
    }

    /// Finite variance, which correlation-based simulation needs.
    pub fn is_simulation_valid(&self) -> bool {
        self.alpha < -1.0
    }

    pub fn require_simulation_valid(&self) -> Result<()> {
        if self.is_simulation_valid() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "simulation needs alpha < -1 (finite variance), got {}",
                self.alpha
            )))
        }
    }

    fn validate(&self) -> Result<()> {
        GA0Params::new(self.alpha, self.gamma, self.looks).map(|_| ())
    }

    fn dof(&self) -> (f64, f64) {
        (2.0 * self.looks as f64, -2.0 * self.alpha)
    }

    pub fn pdf(&self, z: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.ln_pdf(z)?.exp())
    }

    /// Natural log of the density; `-inf` outside the support.
    pub fn ln_pdf(&self, z: f64) -> Result<f64> {
        self.validate()?;
        if !(z > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        let n = self.looks as f64;
        let a = self.alpha;
        let g = self.gamma;
        let ln_norm = 2f64.ln() + n * n.ln() + ln_gamma(n - a)? - 0.5 * g.ln() - ln_gamma(-a)? - ln_gamma(n)?;
        let ln_kernel = (2.0 * n - 1.0) * (z.ln() - 0.5 * g.ln()) - (n - a) * (n * z * z / g).ln_1p();
        Ok(ln_norm + ln_kernel)
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        self.validate()?;
        if !(z > 0.0) {
            return Ok(0.0);
        }
        let (nu1, nu2) = self.dof();
        f_cdf(nu1, nu2, -self.alpha * z * z / self.gamma)
    }

    /// Upper tail `1 - cdf(z)` without cancellation.
    pub fn sf(&self, z: f64) -> Result<f64> {
        self.validate()?;
        if !(z > 0.0) {
            return Ok(1.0);
        }
        let (nu1, nu2) = self.dof();
        f_sf(nu1, nu2, -self.alpha * z * z / self.gamma)
    }

    /// `G^{-1}(t) = sqrt(-(γ/α) Υ^{-1}_{2n,-2α}(t))`, computed as `sqrt(γ)` times
    /// the unit-scale quantile so the scale property holds exactly.
    pub fn quantile(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if t >= QUANTILE_CEILING && t <= 1.0 {
            return Err(Error::InfiniteQuantile(t));
        }
        if !(0.0..1.0).contains(&t) {
            return Err(Error::domain(format!("quantile needs t in [0, 1), got {t}")));
        }
        let (nu1, nu2) = self.dof();
        let unit = (f_quantile(nu1, nu2, t)? / -self.alpha).sqrt();
        Ok(self.gamma.sqrt() * unit)
    }

    /// Quantile addressed by its upper-tail probability `q = 1 - t`, for `q ∈ (0, 1]`.
    pub fn quantile_upper(&self, q: f64) -> Result<f64> {
        self.validate()?;
        let (nu1, nu2) = self.dof();
        let unit = (f_quantile_upper(nu1, nu2, q)? / -self.alpha).sqrt();
        Ok(self.gamma.sqrt() * unit)
    }

    /// `G^{-1}(Φ(u))`, routing positive `u` through the upper tail so large
    /// Gaussian values keep their precision. Tail probabilities are floored at
    /// the smallest normal double.
    pub fn from_gaussian(&self, u: f64) -> Result<f64> {
        if u > 0.0 {
            self.quantile_upper(normal_sf(u).max(f64::MIN_POSITIVE))
        } else {
            self.quantile(normal_cdf(u).max(f64::MIN_POSITIVE))
        }
    }

    /// Raw moment `E[Z^r]`; infinite (an error) unless `alpha < -r/2`.
    pub fn moment(&self, r: f64) -> Result<f64> {
        self.validate()?;
        if !(r > 0.0) {
            return Err(Error::domain(format!("moment order must be positive, got {r}")));
        }
        if !(self.alpha < -r / 2.0) {
            return Err(Error::InfiniteMoment { alpha: self.alpha, order: r });
        }
        let n = self.looks as f64;
        let a = self.alpha;
        let ln = 0.5 * r * (self.gamma / n).ln() + ln_gamma(-a - r / 2.0)? + ln_gamma(n + r / 2.0)?
            - ln_gamma(-a)?
            - ln_gamma(n)?;
        Ok(ln.exp())
    }

    pub fn moment_summary(&self) -> Result<MomentSummary> {
        self.validate()?;
        if !(self.alpha < -1.0) {
            return Err(Error::InfiniteMoment { alpha: self.alpha, order: 2.0 });
        }
        let mean = self.moment(1.0)?;
        let variance = (self.moment(2.0)? - mean * mean).max(0.0);
        Ok(MomentSummary { mean, variance })
    }
}

/// Scale `γ_{α,n}` that gives the G_A^0(α, γ, n) law unit mean.
pub fn normalizing_scale(alpha: f64, looks: u32) -> Result<f64> {
    if !(alpha < -1.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("normalizing scale needs alpha < -1, got {alpha}")));
    }
    if looks < 1 {
        return Err(Error::domain("looks must be at least 1"));
    }
    let n = looks as f64;
    let ln_ratio = ln_gamma(-alpha)? + ln_gamma(n)? - ln_gamma(-alpha - 0.5)? - ln_gamma(n + 0.5)?;
    Ok(n * (2.0 * ln_ratio).exp())
}

/// `count` independent draws by inversion of uniforms, deterministic in `seed`.
pub fn sample_iid(params: &GA0Params, count: usize, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = sampling::seeded(seed);
    (0..count)
        .map(|_| {
            let v = sampling::open_unit(&mut rng);
            if v < 0.5 {
                params.quantile(v)
            } else {
                params.quantile_upper(1.0 - v)
            }
        })
        .collect()
}

const FIT_ALPHA_MIN: f64 = -200.0;
const FIT_ALPHA_MAX: f64 = -1.0 - 1e-6;

/// Scale-free ratio `E[Z]^2 / E[Z^2]` as a function of roughness.
fn moment_ratio(alpha: f64, looks: u32) -> f64 {
    let n = looks as f64;
    let ln_mean = ln_gamma(n + 0.5).unwrap_or(f64::NAN) + ln_gamma(-alpha - 0.5).unwrap_or(f64::NAN)
        - ln_gamma(n).unwrap_or(f64::NAN)
        - ln_gamma(-alpha).unwrap_or(f64::NAN);
    (2.0 * ln_mean).exp() / n * (-alpha - 1.0)
}

/// Moment estimates of `(alpha, gamma)` from amplitude data with known looks.
pub fn fit_moments(amplitudes: &[f64], looks: u32) -> Result<GA0Params> {
    if amplitudes.is_empty() {
        return Err(Error::domain("no samples to fit"));
    }
    if let Some(bad) = amplitudes.iter().find(|z| !(**z > 0.0) || !z.is_finite()) {
        return Err(Error::domain(format!("amplitudes must be positive and finite, got {bad}")));
    }
    let count = amplitudes.len() as f64;
    let m1 = amplitudes.iter().sum::<f64>() / count;
    let m2 = amplitudes.iter().map(|z| z * z).sum::<f64>() / count;
    fit_from_moments(m1, m2, looks)
}

/// Solves `moment(1) = m1`, `moment(2) = m2` for `(alpha, gamma)`.
pub fn fit_from_moments(m1: f64, m2: f64, looks: u32) -> Result<GA0Params> {
    if looks < 1 {
        return Err(Error::domain("looks must be at least 1"));
    }
    if !(m1 > 0.0 && m2 > 0.0) || !m1.is_finite() || !m2.is_finite() {
        return Err(Error::domain(format!("sample moments must be positive, got m1 = {m1}, m2 = {m2}")));
    }
    let ratio = m1 * m1 / m2;
    let lo = moment_ratio(FIT_ALPHA_MAX, looks);
    let hi = moment_ratio(FIT_ALPHA_MIN, looks);
    if !(ratio >= lo && ratio <= hi) {
        return Err(Error::NoMomentSolution { ratio, lo, hi });
    }
    let f = |alpha: f64| moment_ratio(alpha, looks) - ratio;
    let bracket = RootBracket::new(f, FIT_ALPHA_MIN, FIT_ALPHA_MAX)?;
    let alpha = find_root(f, bracket, 1e-12)?;
    let gamma = m1 * m1 * normalizing_scale(alpha, looks)?;
    GA0Params::new(alpha, gamma, looks)
}
