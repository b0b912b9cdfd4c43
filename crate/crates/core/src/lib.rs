//! Extended sine-skewed (ESS) circular distributions.
//!
//! An ESS distribution of order `m` over a symmetric circular base `f_0` has
//! density
//!
//! ```text
//! f(theta) = 2 f_0(theta - mu) G_m(lambda sin(theta - mu))
//! ```
//!
//! where `G_m` is the distribution function of the Beta-type density
//! `C_m (1 - x^2)^m` on `[-1, 1]`. Order zero is the sine-skewed family.
//!
//! All angles are radians on `[-pi, pi)`; see [`wrap_angle`].

pub mod bases;
pub mod dataset;
mod error;
pub mod ess;
pub mod experiments;
pub mod inference;
pub mod moments;
pub mod selection;
pub mod skewing;

use std::f64::consts::PI;

pub use bases::{BaseFamily, BaseModel, CircularBase, VonMises, WrappedCauchy};
pub use dataset::{ingest, AngleDataset, AngleUnit};
pub use error::{EssError, Result};
pub use ess::EssModel;
pub use experiments::{run_campaign, CellSummary, SimCampaign};
pub use inference::{fit_mle, log_likelihood, FitConfig, FitReport};
pub use moments::{centered_moments, circular_skewness, moments, skewness_range, TrigMoments};
pub use selection::{
    sample_circular_stats, select_order, select_order_with, symmetry_test, OrderSelection,
    SampleStats, SymmetryTestResult,
};
pub use skewing::SkewingPolynomial;

/// Maps any angle onto `[-pi, pi)` via `((theta + pi) mod 2 pi) - pi`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}
