//! Ratios `I_p(kappa) / I_0(kappa)` of modified Bessel functions of the first
//! kind, by Miller's backward recurrence
//!
//! ```text
//! I_{k-1}(kappa) = (2k / kappa) I_k(kappa) + I_{k+1}(kappa)
//! ```
//!
//! normalized with `I_0 + 2 sum_{k>=1} I_k = e^kappa`. Only scaled quantities
//! are ever formed, so nothing overflows for large `kappa`.

use crate::error::{EssError, Result};

const RESCALE_ABOVE: f64 = 1e200;
const RESCALE_BY: f64 = 1e-200;

/// Bessel ratios up to some order, plus `ln I_0(kappa)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRatios {
    kappa: f64,
    ratios: Vec<f64>,
    log_i0: f64,
}

impl BesselRatios {
    /// Ratios `I_k / I_0` for `k = 0..=max_order`.
    pub fn new(max_order: usize, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(EssError::InvalidParameter {
                name: "kappa",
                value: kappa,
                reason: "must be positive and finite",
            });
        }
        Ok(Self::compute(max_order, kappa))
    }

    fn compute(max_order: usize, kappa: f64) -> Self {
        let start = start_order(max_order, kappa);
        let mut stored = vec![0.0; max_order + 1];
        // v_{k+1}, v_k while walking down from `start`.
        let mut upper = 0.0f64;
        let mut current = 1e-30f64;
        let mut sum = 0.0f64; // 2 * sum_{j >= k} v_j over visited j >= 1
        let mut k = start;
        loop {
            if k <= max_order {
                stored[k] = current;
            }
            if k == 0 {
                break;
            }
            sum += 2.0 * current;
            let lower = (2.0 * k as f64 / kappa) * current + upper;
            upper = current;
            current = lower;
            k -= 1;
            if current > RESCALE_ABOVE {
                current *= RESCALE_BY;
                upper *= RESCALE_BY;
                sum *= RESCALE_BY;
                for v in stored.iter_mut().skip(k + 1) {
                    *v *= RESCALE_BY;
                }
            }
        }
        let v0 = current;
        let total = v0 + sum;
        let ratios = stored.iter().map(|v| v / v0).collect();
        Self {
            kappa,
            ratios,
            log_i0: kappa + (v0 / total).ln(),
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn max_order(&self) -> usize {
        self.ratios.len() - 1
    }

    /// `I_|p|(kappa) / I_0(kappa)`; orders beyond the computed range return
    /// `None`.
    pub fn ratio(&self, p: i64) -> Option<f64> {
        self.ratios.get(p.unsigned_abs() as usize).copied()
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// `ln I_0(kappa)`.
    pub fn log_i0(&self) -> f64 {
        self.log_i0
    }
}

/// Requests up to this order share one start point, so a ratio does not
/// depend on how many others were computed alongside it.
const MIN_START_BASE: f64 = 48.0;

fn start_order(max_order: usize, kappa: f64) -> usize {
    let base = (max_order as f64).max(kappa.ceil()).max(MIN_START_BASE);
    (base + 40.0 + 6.0 * kappa.sqrt()).ceil() as usize
}

/// `I_p(kappa) / I_0(kappa)` for `p >= 0`, `kappa > 0`.
pub fn bessel_ratio(p: usize, kappa: f64) -> Result<f64> {
    Ok(BesselRatios::new(p, kappa)?.ratios[p])
}

/// `ln I_0(kappa)` for `kappa > 0`.
pub fn log_bessel_i0(kappa: f64) -> Result<f64> {
    Ok(BesselRatios::new(0, kappa)?.log_i0)
}
