use crate::error::{Error, Result};

/// Default tolerance on the argument for [`find_root`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// A sign-changing interval `[lo, hi]` together with the function values at its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl RootBracket {
    /// Evaluates `f` at both ends and validates the bracket.
    pub fn new(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self> {
        Self::with_values(lo, hi, f(lo), f(hi))
    }

    /// Builds a bracket from already known end values.
    pub fn with_values(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        let bracket = RootBracket { lo, hi, f_lo, f_hi };
        if !(lo < hi) || f_lo.is_nan() || f_hi.is_nan() || f_lo * f_hi > 0.0 {
            return Err(Error::InvalidBracket { lo, hi, f_lo, f_hi });
        }
        Ok(bracket)
    }
}

/// Brent's method. The result always lies inside the bracket.
pub fn find_root(f: impl Fn(f64) -> f64, bracket: RootBracket, tol: f64) -> Result<f64> {
    let RootBracket { lo, hi, f_lo, f_hi } = RootBracket::with_values(bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi)?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!("root tolerance must be positive, got {tol}")));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }

    let (mut a, mut b, mut c) = (lo, hi, hi);
    let (mut fa, mut fb, mut fc) = (f_lo, f_hi, f_hi);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b.clamp(lo, hi));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(b.clamp(lo, hi))
}
