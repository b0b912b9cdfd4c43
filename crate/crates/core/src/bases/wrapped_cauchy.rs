use std::f64::consts::PI;

use rand::Rng;

use super::CircularBase;
use crate::error::{EssError, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Centered wrapped Cauchy density `(1 - rho^2) / (2 pi (1 + rho^2 - 2 rho cos t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct WrappedCauchy {
    rho: f64,
    log_numer: f64,
}

impl WrappedCauchy {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(EssError::InvalidParameter {
                name: "rho",
                value: rho,
                reason: "must lie in (0, 1)",
            });
        }
        Ok(Self {
            rho,
            log_numer: (1.0 - rho * rho).ln() - LN_2PI,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn log_density_from_cos(&self, cos_t: f64) -> f64 {
        let rho = self.rho;
        self.log_numer - (1.0 + rho * rho - 2.0 * rho * cos_t).ln()
    }
}

impl CircularBase for WrappedCauchy {
    fn density(&self, theta: f64) -> f64 {
        let rho = self.rho;
        (1.0 - rho * rho) / (2.0 * PI * (1.0 + rho * rho - 2.0 * rho * theta.cos()))
    }

    fn log_density(&self, theta: f64) -> f64 {
        self.log_density_from_cos(theta.cos())
    }

    fn cosine_moment(&self, p: i64) -> f64 {
        self.rho.powi(p.unsigned_abs() as i32)
    }

    /// Inverse transform `2 atan(((1-rho)/(1+rho)) tan(pi (U - 1/2)))`.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let t = ((1.0 - self.rho) / (1.0 + self.rho)) * (PI * (u - 0.5)).tan();
        2.0 * t.atan()
    }
}
