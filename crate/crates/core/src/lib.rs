//! Simulation of spatially correlated G_A^0 amplitude clutter.
//!
//! The pipeline maps a target clutter correlation `rho` on the N×N torus to
//! the Gaussian correlation `tau` that produces it after the pointwise
//! transform `G^{-1}(Phi(.))`, filters white noise with the square root of the
//! spectrum of `tau`, and transforms the resulting Gaussian field to the
//! G_A^0 marginal law.

pub mod corr_map;
pub mod corr_models;
pub mod error;
pub mod field_gen;
pub mod ga0;
pub mod numerics;
mod sampling;
#[cfg(test)]
mod test_support;

pub use corr_map::{CorrLookup, CorrMapKey, FeasibleRange};
pub use corr_models::{LagTable, MatrixCorr, ParametricCorr, SampleCorrelation};
pub use error::{Error, Result, Stage};
pub use field_gen::{CorrelationGrid, FieldGrid, SimulationConfig};
pub use ga0::{GA0Params, MomentSummary};
