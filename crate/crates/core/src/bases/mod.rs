//! Reflectively symmetric circular base densities centered at zero.
//!
//! A base only has to provide its density and its cosine moments
//! `alpha_{0,p} = E[cos(p T)]`; everything the ESS family needs (density,
//! trigonometric moments, sampling) is built from those plus a sampler.

pub mod bessel;
mod von_mises;
mod wrapped_cauchy;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EssError, Result};

pub use bessel::{bessel_ratio, log_bessel_i0, BesselRatios};
pub use von_mises::{approx_kappa_from_mrl, VonMises};
pub use wrapped_cauchy::WrappedCauchy;

pub trait CircularBase: Clone + fmt::Debug + Send + Sync {
    /// Density at `theta` (radians), centered at zero.
    fn density(&self, theta: f64) -> f64;

    fn log_density(&self, theta: f64) -> f64 {
        self.density(theta).ln()
    }

    /// `alpha_{0,p}`; even in `p`.
    fn cosine_moment(&self, p: i64) -> f64;

    /// `alpha_{0,0..=max_order}`.
    fn cosine_moments(&self, max_order: usize) -> Vec<f64> {
        (0..=max_order as i64)
            .map(|p| self.cosine_moment(p))
            .collect()
    }

    /// One draw from the centered base.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseFamily {
    #[serde(alias = "vonmises", alias = "von_mises")]
    Vm,
    #[serde(alias = "wrappedcauchy", alias = "wrapped_cauchy")]
    Wc,
}

impl BaseFamily {
    pub fn concentration_name(self) -> &'static str {
        match self {
            BaseFamily::Vm => "kappa",
            BaseFamily::Wc => "rho",
        }
    }
}

impl fmt::Display for BaseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseFamily::Vm => "vm",
            BaseFamily::Wc => "wc",
        })
    }
}

impl FromStr for BaseFamily {
    type Err = EssError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vm" | "vonmises" | "von_mises" | "von-mises" => Ok(BaseFamily::Vm),
            "wc" | "wrappedcauchy" | "wrapped_cauchy" | "wrapped-cauchy" => Ok(BaseFamily::Wc),
            other => Err(EssError::InvalidConfig(format!(
                "unknown base family {other:?} (expected vm or wc)"
            ))),
        }
    }
}

/// The two bases this crate ships, behind one type.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseModel {
    VonMises(VonMises),
    WrappedCauchy(WrappedCauchy),
}

impl BaseModel {
    pub fn von_mises(kappa: f64) -> Result<Self> {
        Ok(BaseModel::VonMises(VonMises::new(kappa)?))
    }

    pub fn wrapped_cauchy(rho: f64) -> Result<Self> {
        Ok(BaseModel::WrappedCauchy(WrappedCauchy::new(rho)?))
    }

    pub fn from_family(family: BaseFamily, concentration: f64) -> Result<Self> {
        match family {
            BaseFamily::Vm => Self::von_mises(concentration),
            BaseFamily::Wc => Self::wrapped_cauchy(concentration),
        }
    }

    pub fn family(&self) -> BaseFamily {
        match self {
            BaseModel::VonMises(_) => BaseFamily::Vm,
            BaseModel::WrappedCauchy(_) => BaseFamily::Wc,
        }
    }

    /// `kappa` or `rho`.
    pub fn concentration(&self) -> f64 {
        match self {
            BaseModel::VonMises(b) => b.kappa(),
            BaseModel::WrappedCauchy(b) => b.rho(),
        }
    }

    /// `log f_0(t)` given `cos t`.
    #[inline]
    pub fn log_density_from_cos(&self, cos_t: f64) -> f64 {
        match self {
            BaseModel::VonMises(b) => b.log_density_from_cos(cos_t),
            BaseModel::WrappedCauchy(b) => b.log_density_from_cos(cos_t),
        }
    }

    /// Partial derivatives of `log f_0(t)` with respect to `t` and to the
    /// concentration parameter, given `(cos t, sin t)`.
    #[inline]
    pub fn log_density_gradient(&self, cos_t: f64, sin_t: f64) -> (f64, f64) {
        match self {
            BaseModel::VonMises(b) => (-b.kappa() * sin_t, cos_t - b.mean_resultant_length()),
            BaseModel::WrappedCauchy(b) => {
                let rho = b.rho();
                let denom = 1.0 + rho * rho - 2.0 * rho * cos_t;
                (
                    -2.0 * rho * sin_t / denom,
                    -2.0 * rho / (1.0 - rho * rho) - (2.0 * rho - 2.0 * cos_t) / denom,
                )
            }
        }
    }

    /// Second partial derivatives `(d_tt, d_tc, d_cc)` of `log f_0(t)` in
    /// `t` and the concentration, given `(cos t, sin t)`.
    #[inline]
    pub fn log_density_hessian(&self, cos_t: f64, sin_t: f64) -> (f64, f64, f64) {
        match self {
            BaseModel::VonMises(b) => {
                let k = b.kappa();
                let a = b.mean_resultant_length();
                (-k * cos_t, -sin_t, -(1.0 - a / k - a * a))
            }
            BaseModel::WrappedCauchy(b) => {
                let rho = b.rho();
                let q = 1.0 + rho * rho - 2.0 * rho * cos_t;
                let dq = 2.0 * rho - 2.0 * cos_t;
                let one_minus = 1.0 - rho * rho;
                (
                    -2.0 * rho * cos_t / q + 4.0 * rho * rho * sin_t * sin_t / (q * q),
                    -2.0 * sin_t / q + 2.0 * rho * sin_t * dq / (q * q),
                    -2.0 * (1.0 + rho * rho) / (one_minus * one_minus) - 2.0 / q
                        + dq * dq / (q * q),
                )
            }
        }
    }
}

impl CircularBase for BaseModel {
    fn density(&self, theta: f64) -> f64 {
        match self {
            BaseModel::VonMises(b) => b.density(theta),
            BaseModel::WrappedCauchy(b) => b.density(theta),
        }
    }

    fn log_density(&self, theta: f64) -> f64 {
        self.log_density_from_cos(theta.cos())
    }

    fn cosine_moment(&self, p: i64) -> f64 {
        match self {
            BaseModel::VonMises(b) => b.cosine_moment(p),
            BaseModel::WrappedCauchy(b) => b.cosine_moment(p),
        }
    }

    fn cosine_moments(&self, max_order: usize) -> Vec<f64> {
        match self {
            BaseModel::VonMises(b) => b.cosine_moments(max_order),
            BaseModel::WrappedCauchy(b) => b.cosine_moments(max_order),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            BaseModel::VonMises(b) => b.sample(rng),
            BaseModel::WrappedCauchy(b) => b.sample(rng),
        }
    }
}

impl From<VonMises> for BaseModel {
    fn from(b: VonMises) -> Self {
        BaseModel::VonMises(b)
    }
}

impl From<WrappedCauchy> for BaseModel {
    fn from(b: WrappedCauchy) -> Self {
        BaseModel::WrappedCauchy(b)
    }
}

/// `alpha_{0,p}` of any base.
pub fn base_cosine_moment<B: CircularBase>(base: &B, p: i64) -> f64 {
    base.cosine_moment(p)
}

pub fn base_density<B: CircularBase>(base: &B, theta: f64) -> f64 {
    base.density(crate::wrap_angle(theta))
}

pub fn base_sample<B: CircularBase, R: Rng + ?Sized>(base: &B, rng: &mut R) -> f64 {
    base.sample(rng)
}
