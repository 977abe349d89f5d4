//! Correlation transfer between the Gaussian and the G_A^0 domains.
//!
//! Two standard normals with correlation `tau`, pushed through
//! `g(u) = G^{-1}(Φ(u))`, have clutter correlation
//! `ϱ(τ) = (R(τ) - μ²) / (E[Z²] - μ²)` where `R(τ) = E[g(U) g(V)]`.
//! `ϱ` is strictly increasing on (-1, 1) with range strictly inside it, so the
//! inverse `ð` exists only on a feasible sub-interval.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ga0::GA0Params;
use crate::numerics::{find_root, gauss_hermite, QuadratureRule, RootBracket};

pub const DEFAULT_QUADRATURE_ORDER: usize = 64;
pub const DEFAULT_LOOKUP_SIZE: usize = 129;
/// Distance from ±1 of the outermost tabulated `tau`.
pub const LOOKUP_MARGIN: f64 = 1e-4;
/// `cross_moment` refuses `|tau| > 1 - SINGULAR_MARGIN`.
pub const SINGULAR_MARGIN: f64 = 1e-6;
const TAU_TOL: f64 = 1e-10;

/// The `(alpha, looks)` pair indexing a correlation map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrMapKey {
    pub alpha: f64,
    pub looks: u32,
}

impl CorrMapKey {
    pub fn new(alpha: f64, looks: u32) -> Result<Self> {
        if !(alpha < -1.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("correlation map needs alpha < -1, got {alpha}")));
        }
        if looks < 1 {
            return Err(Error::domain("looks must be at least 1"));
        }
        Ok(CorrMapKey { alpha, looks })
    }

    fn unit_law(&self) -> GA0Params {
        GA0Params { alpha: self.alpha, gamma: 1.0, looks: self.looks }
    }
}

/// Attainable clutter correlations `[rho_min, rho_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleRange {
    pub rho_min: f64,
    pub rho_max: f64,
}

impl FeasibleRange {
    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.rho_min && rho <= self.rho_max
    }
}

/// Quadrature evaluator of `R(τ)` and `ϱ(τ)` for one key.
#[derive(Debug, Clone)]
pub struct CorrMap {
    key: CorrMapKey,
    rule: QuadratureRule,
    /// `w_i g(√2 t_i) / π`, the outer factor of the tensor rule.
    outer: Vec<f64>,
    mean_sq: f64,
    second: f64,
}

impl CorrMap {
    pub fn new(key: CorrMapKey, quadrature_order: usize) -> Result<Self> {
        let key = CorrMapKey::new(key.alpha, key.looks)?;
        if quadrature_order < 2 {
            return Err(Error::domain(format!("quadrature order must be >= 2, got {quadrature_order}")));
        }
        let rule = gauss_hermite(quadrature_order)?;
        let law = key.unit_law();
        let outer = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| Ok(w * law.from_gaussian(SQRT_2 * t)? / PI))
            .collect::<Result<Vec<_>>>()?;
        let mean = law.moment(1.0)?;
        Ok(CorrMap {
            key,
            rule,
            outer,
            mean_sq: mean * mean,
            second: law.moment(2.0)?,
        })
    }

    pub fn key(&self) -> CorrMapKey {
        self.key
    }

    pub fn quadrature_order(&self) -> usize {
        self.rule.order
    }

    /// `R(τ) = E[g(U) g(V)]` for unit-scale clutter. With `u = √2 t_i` and
    /// `v = √2 (τ t_i + √(1-τ²) t_j)` the bivariate normal weight factorizes
    /// into two Hermite weights.
    pub fn cross_moment(&self, tau: f64) -> Result<f64> {
        if !(tau.abs() <= 1.0 - SINGULAR_MARGIN) {
            return Err(Error::NearSingular { tau });
        }
        let law = self.key.unit_law();
        let s = (1.0 - tau * tau).sqrt();
        let mut total = 0.0;
        for (&ti, &oi) in self.rule.nodes.iter().zip(&self.outer) {
            let mut inner = 0.0;
            for (&tj, &wj) in self.rule.nodes.iter().zip(&self.rule.weights) {
                inner += wj * law.from_gaussian(SQRT_2 * (tau * ti + s * tj))?;
            }
            total += oi * inner;
        }
        Ok(total)
    }

    pub fn rho_of_tau(&self, tau: f64) -> Result<f64> {
        let r = self.cross_moment(tau)?;
        Ok((r - self.mean_sq) / (self.second - self.mean_sq))
    }

    /// `μ²` and `E[Z²]` of the unit-scale law: the limits `R(0)` and `R(1⁻)`.
    pub fn limits(&self) -> (f64, f64) {
        (self.mean_sq, self.second)
    }
}

/// Monotone tabulation of `ϱ` on a Chebyshev-spaced `tau` grid that is dense
/// near ±1, plus the evaluator used to refine inversions.
#[derive(Debug, Clone)]
pub struct CorrLookup {
    pub key: CorrMapKey,
    pub taus: Vec<f64>,
    pub rhos: Vec<f64>,
    pub quadrature_order: usize,
    map: CorrMap,
}

/// Chebyshev–Lobatto points on `[-1 + margin, 1 - margin]`, exactly odd-symmetric.
fn lookup_taus(grid_size: usize) -> Vec<f64> {
    let half = (grid_size - 1) as f64 / 2.0;
    (0..grid_size)
        .map(|i| (1.0 - LOOKUP_MARGIN) * (PI * (i as f64 - half) / (grid_size - 1) as f64).sin())
        .collect()
}

pub fn build_lookup(key: CorrMapKey, grid_size: usize, quadrature_order: usize) -> Result<CorrLookup> {
    if grid_size < 33 {
        return Err(Error::domain(format!("lookup grid needs at least 33 points, got {grid_size}")));
    }
    if quadrature_order < 32 {
        return Err(Error::domain(format!("lookup quadrature order must be >= 32, got {quadrature_order}")));
    }
    let map = CorrMap::new(key, quadrature_order)?;
    let taus = lookup_taus(grid_size);
    let rhos = taus.par_iter().map(|&t| map.rho_of_tau(t)).collect::<Result<Vec<_>>>()?;
    if let Some(i) = rhos.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::Monotonicity { tau: taus[i + 1] });
    }
    Ok(CorrLookup { key: map.key(), taus, rhos, quadrature_order, map })
}

impl CorrLookup {
    pub fn feasible_range(&self) -> FeasibleRange {
        FeasibleRange {
            rho_min: self.rhos[0],
            rho_max: *self.rhos.last().expect("lookup is non-empty"),
        }
    }

    pub fn rho_of_tau(&self, tau: f64) -> Result<f64> {
        self.map.rho_of_tau(tau)
    }

    pub fn map(&self) -> &CorrMap {
        &self.map
    }

    /// `ð(ρ)`: the `tau` with `ϱ(tau) = rho`. `±1` and `0` map to themselves.
    pub fn tau_of_rho(&self, rho: f64) -> Result<f64> {
        if rho == 1.0 || rho == -1.0 || rho == 0.0 {
            return Ok(rho);
        }
        let range = self.feasible_range();
        if !range.contains(rho) {
            return Err(Error::Infeasible {
                rho,
                alpha: self.key.alpha,
                looks: self.key.looks,
                rho_min: range.rho_min,
                rho_max: range.rho_max,
            });
        }
        // first tabulated rho not below the target
        let hi = self.rhos.partition_point(|&r| r < rho);
        if self.rhos[hi] == rho {
            return Ok(self.taus[hi]);
        }
        let lo = hi - 1;
        let bracket = RootBracket::with_values(self.taus[lo], self.taus[hi], self.rhos[lo] - rho, self.rhos[hi] - rho)?;
        let failure = std::cell::RefCell::new(None);
        let f = |t: f64| match self.map.rho_of_tau(t) {
            Ok(r) => r - rho,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let tau = find_root(f, bracket, TAU_TOL)?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(tau),
        }
    }
}

type CacheKey = (u64, u32, usize, usize);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<CorrLookup>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<CorrLookup>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cached [`build_lookup`]; each `(alpha, looks, quadrature_order, grid_size)`
/// is tabulated once per process.
pub fn lookup(key: CorrMapKey, grid_size: usize, quadrature_order: usize) -> Result<Arc<CorrLookup>> {
    let ck = (key.alpha.to_bits(), key.looks, quadrature_order, grid_size);
    if let Some(hit) = cache().lock().expect("lookup cache poisoned").get(&ck) {
        return Ok(Arc::clone(hit));
    }
    let built = Arc::new(build_lookup(key, grid_size, quadrature_order)?);
    Ok(Arc::clone(cache().lock().expect("lookup cache poisoned").entry(ck).or_insert(built)))
}

pub fn default_lookup(key: CorrMapKey) -> Result<Arc<CorrLookup>> {
    lookup(key, DEFAULT_LOOKUP_SIZE, DEFAULT_QUADRATURE_ORDER)
}

pub fn cross_moment(key: CorrMapKey, tau: f64) -> Result<f64> {
    CorrMap::new(key, DEFAULT_QUADRATURE_ORDER)?.cross_moment(tau)
}

pub fn rho_of_tau(key: CorrMapKey, tau: f64) -> Result<f64> {
    CorrMap::new(key, DEFAULT_QUADRATURE_ORDER)?.rho_of_tau(tau)
}

pub fn feasible_range(key: CorrMapKey) -> Result<FeasibleRange> {
    Ok(default_lookup(key)?.feasible_range())
}

pub fn tau_of_rho(key: CorrMapKey, rho: f64) -> Result<f64> {
    default_lookup(key)?.tau_of_rho(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal_cdf;
    use crate::sampling::{open_unit, seeded};

    fn key(alpha: f64, looks: u32) -> CorrMapKey {
        CorrMapKey::new(alpha, looks).unwrap()
    }

    #[test]
    fn key_validation() {
        assert!(CorrMapKey::new(-1.0, 1).is_err());
        assert!(CorrMapKey::new(-0.5, 1).is_err());
        assert!(CorrMapKey::new(-2.0, 0).is_err());
    }

    #[test]
    fn cross_moment_limits() {
        for &(a, n) in &[(-1.5, 1), (-3.0, 1), (-9.0, 3), (-3.0, 10)] {
            let k = key(a, n);
            let law = GA0Params::new(a, 1.0, n).unwrap();
            let m1 = law.moment(1.0).unwrap();
            let r0 = cross_moment(k, 0.0).unwrap();
            assert!((r0 - m1 * m1).abs() < 1e-5, "R(0) a={a} n={n}: {r0} vs {}", m1 * m1);
            let r1 = cross_moment(k, 1.0 - 1e-6).unwrap();
            let m2 = -1.0 / (1.0 + a);
            assert!((r1 - m2).abs() < 2e-3 * m2, "R(1-) a={a} n={n}: {r1} vs {m2}");
        }
        assert!(matches!(cross_moment(key(-3.0, 1), 0.9999999), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn cross_moment_matches_monte_carlo() {
        // single-look closed-form quantile keeps the oracle independent of the F route
        let a: f64 = -3.0;
        let g = |u: f64| ((1.0 - normal_cdf(u)).powf(1.0 / a) - 1.0).sqrt();
        let tau: f64 = 0.5;
        let s = (1.0 - tau * tau).sqrt();
        let mut rng = seeded(2024);
        let draws = 10_000_000usize;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..draws {
            let r = (-2.0 * open_unit(&mut rng).ln()).sqrt();
            let phi = 2.0 * PI * open_unit(&mut rng);
            let (u, w) = (r * phi.cos(), r * phi.sin());
            let x = g(u) * g(tau * u + s * w);
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / draws as f64;
        let se = ((sum_sq / draws as f64 - mean * mean) / draws as f64).sqrt();
        let quad = cross_moment(key(a, 1), tau).unwrap();
        assert!((quad - mean).abs() < 3.0 * se, "quadrature {quad} vs MC {mean} ± {se}");
    }

    #[test]
    fn rho_at_zero_and_table_spots() {
        assert!(rho_of_tau(key(-3.0, 1), 0.0).unwrap().abs() < 5e-4);
        assert!((rho_of_tau(key(-1.5, 1), 0.629).unwrap() - 0.5).abs() < 0.01);
        assert!((rho_of_tau(key(-9.0, 3), -0.953).unwrap() + 0.9).abs() < 0.01);
    }

    #[test]
    fn lookup_is_monotone_and_sign_preserving() {
        let lk = default_lookup(key(-3.0, 1)).unwrap();
        assert_eq!(lk.taus.len(), 129);
        assert!(lk.rhos.windows(2).all(|w| w[0] < w[1]));
        for (&t, &r) in lk.taus.iter().zip(&lk.rhos) {
            if t != 0.0 {
                assert_eq!(t.signum(), r.signum(), "tau {t} rho {r}");
            } else {
                assert!(r.abs() < 5e-4);
            }
        }
        assert!(lk.taus.iter().zip(lk.taus.iter().rev()).all(|(a, b)| *a == -*b));
    }

    #[test]
    fn lookup_rejects_small_configs() {
        assert!(build_lookup(key(-3.0, 1), 17, 64).is_err());
        assert!(build_lookup(key(-3.0, 1), 129, 16).is_err());
    }

    #[test]
    fn doubling_quadrature_order_converges() {
        let k = key(-3.0, 1);
        let coarse = build_lookup(k, 65, 64).unwrap();
        let fine = build_lookup(k, 65, 128).unwrap();
        let worst = coarse.rhos.iter().zip(&fine.rhos).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-4, "{worst}");
    }

    #[test]
    fn feasible_ranges() {
        let r = feasible_range(key(-1.5, 1)).unwrap();
        assert!(r.rho_min > -0.5 && r.rho_min <= -0.4, "{r:?}");
        assert!(feasible_range(key(-9.0, 3)).unwrap().rho_min < -0.9);
        for &(a, n) in &[(-1.5, 1), (-3.0, 6), (-9.0, 10)] {
            let r = feasible_range(key(a, n)).unwrap();
            assert!(r.rho_max > 0.9 && r.rho_min < 0.0);
        }
    }

    #[test]
    fn inverse_examples() {
        assert!((tau_of_rho(key(-1.5, 1), 0.5).unwrap() - 0.629).abs() < 0.01);
        assert!((tau_of_rho(key(-3.0, 1), -0.7).unwrap() + 0.886).abs() < 0.01);
        assert_eq!(tau_of_rho(key(-3.0, 1), 0.0).unwrap(), 0.0);
        assert_eq!(tau_of_rho(key(-3.0, 1), 1.0).unwrap(), 1.0);
        assert!(matches!(tau_of_rho(key(-1.5, 1), -0.9), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn inverse_residual_is_small() {
        let lk = default_lookup(key(-3.0, 3)).unwrap();
        for i in -9..=9 {
            let rho = i as f64 / 10.0;
            if !lk.feasible_range().contains(rho) {
                continue;
            }
            let tau = lk.tau_of_rho(rho).unwrap();
            if rho != 0.0 {
                assert!((lk.rho_of_tau(tau).unwrap() - rho).abs() <= 5e-4);
            }
        }
    }

    #[test]
    fn round_trip() {
        let lk = default_lookup(key(-1.5, 1)).unwrap();
        for i in -9..=9 {
            let tau = i as f64 / 10.0;
            let back = lk.tau_of_rho(lk.rho_of_tau(tau).unwrap()).unwrap();
            assert!((back - tau).abs() <= 1e-3, "tau {tau} -> {back}");
        }
    }

    #[test]
    fn limit_form_matches_closed_form_denominator() {
        let m = CorrMap::new(key(-3.0, 1), 64).unwrap();
        let r0 = m.cross_moment(0.0).unwrap();
        let r1 = m.cross_moment(1.0 - 1e-6).unwrap();
        for &t in &[-0.8, -0.3, 0.2, 0.7] {
            let limit_form = (m.cross_moment(t).unwrap() - r0) / (r1 - r0);
            assert!((limit_form - m.rho_of_tau(t).unwrap()).abs() <= 2e-4);
        }
    }

    #[test]
    fn parallel_build_is_order_independent() {
        let k = key(-9.0, 6);
        let parallel = build_lookup(k, 33, 32).unwrap();
        let map = CorrMap::new(k, 32).unwrap();
        let serial: Vec<f64> = parallel.taus.iter().map(|&t| map.rho_of_tau(t).unwrap()).collect();
        assert_eq!(parallel.rhos, serial);
    }
}
