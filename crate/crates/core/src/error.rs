use std::fmt;

use thiserror::Error;

/// Pipeline stage tag attached to errors raised by [`crate::field_gen::simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Lookup,
    TauGrid,
    SpectralMask,
    WhiteNoise,
    CorrelatedGaussian,
    Clutter,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Lookup => "correlation lookup",
            Stage::TauGrid => "gaussian correlation grid",
            Stage::SpectralMask => "spectral mask",
            Stage::WhiteNoise => "white noise",
            Stage::CorrelatedGaussian => "correlated gaussian field",
            Stage::Clutter => "clutter transform",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("moment of order {order} is infinite for alpha = {alpha} (needs alpha < {})", -order / 2.0)]
    InfiniteMoment { alpha: f64, order: f64 },

    #[error("quantile at t = {0} is infinite")]
    InfiniteQuantile(f64),

    #[error("no moment solution: ratio m1^2/m2 = {ratio} outside attainable range [{lo}, {hi}]")]
    NoMomentSolution { ratio: f64, lo: f64, hi: f64 },

    #[error("invalid root bracket [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("correlation {tau} too close to +-1 for the bivariate normal integral")]
    NearSingular { tau: f64 },

    #[error("correlation {rho} is infeasible for (alpha = {alpha}, looks = {looks}); attainable range is [{rho_min:.6}, {rho_max:.6}]")]
    Infeasible {
        rho: f64,
        alpha: f64,
        looks: u32,
        rho_min: f64,
        rho_max: f64,
    },

    #[error("infeasible target correlation at {} lag(s): {}", .lags.len(), format_lags(.lags))]
    InfeasibleLags { lags: Vec<(usize, usize, f64)> },

    #[error("invalid correlation structure: spectrum value {value:e} at frequency ({k}, {l}) is negative")]
    InvalidCorrelation { value: f64, k: usize, l: usize },

    #[error("normalization inconsistency: imaginary residue {0:e} exceeds tolerance")]
    Normalization(f64),

    #[error("correlation map is not strictly increasing near tau = {tau} (quadrature order too low?)")]
    Monotonicity { tau: f64 },

    #[error("degenerate variance at block position ({row}, {col})")]
    DegenerateVariance { row: usize, col: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at(self, stage: Stage) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

fn format_lags(lags: &[(usize, usize, f64)]) -> String {
    const SHOWN: usize = 12;
    let mut out = lags
        .iter()
        .take(SHOWN)
        .map(|(k, l, r)| format!("({k},{l})={r}"))
        .collect::<Vec<_>>()
        .join(", ");
    if lags.len() > SHOWN {
        out.push_str(&format!(", ... ({} more)", lags.len() - SHOWN));
    }
    out
}

pub type Result<T> = std::result::Result<T, Error>;
