use std::f64::consts::PI;

use rand::Rng;

use super::bessel::BesselRatios;
use super::CircularBase;
use crate::error::Result;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Centered von Mises density `exp(kappa cos t) / (2 pi I_0(kappa))`.
#[derive(Debug, Clone, PartialEq)]
pub struct VonMises {
    kappa: f64,
    log_norm: f64,
    mean_resultant: f64,
}

impl VonMises {
    pub fn new(kappa: f64) -> Result<Self> {
        let ratios = BesselRatios::new(1, kappa)?;
        Ok(Self {
            kappa,
            log_norm: LN_2PI + ratios.log_i0(),
            mean_resultant: ratios.ratios()[1],
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `I_1(kappa) / I_0(kappa)`, the derivative of `ln I_0`.
    pub fn mean_resultant_length(&self) -> f64 {
        self.mean_resultant
    }

    /// `ln(2 pi I_0(kappa))`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    #[inline]
    pub fn log_density_from_cos(&self, cos_t: f64) -> f64 {
        self.kappa * cos_t - self.log_norm
    }
}

impl CircularBase for VonMises {
    fn density(&self, theta: f64) -> f64 {
        self.log_density(theta).exp()
    }

    fn log_density(&self, theta: f64) -> f64 {
        self.log_density_from_cos(theta.cos())
    }

    fn cosine_moment(&self, p: i64) -> f64 {
        match p.unsigned_abs() {
            0 => 1.0,
            1 => self.mean_resultant,
            q => BesselRatios::new(q as usize, self.kappa)
                .map(|r| r.ratios()[q as usize])
                .unwrap_or(0.0),
        }
    }

    fn cosine_moments(&self, max_order: usize) -> Vec<f64> {
        BesselRatios::new(max_order, self.kappa)
            .map(|r| r.ratios().to_vec())
            .unwrap_or_else(|_| vec![0.0; max_order + 1])
    }

    /// Best & Fisher (1979) wrapped-Cauchy envelope rejection sampler.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let kappa = self.kappa;
        if kappa < 1e-8 {
            return PI * (2.0 * rng.random::<f64>() - 1.0);
        }
        let s = if kappa < 1e-5 {
            1.0 / kappa + kappa
        } else {
            let r = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
            let rho = (r - (2.0 * r).sqrt()) / (2.0 * kappa);
            (1.0 + rho * rho) / (2.0 * rho)
        };
        let w = loop {
            let z = (PI * rng.random::<f64>()).cos();
            let w = (1.0 + s * z) / (s + z);
            let y = kappa * (s - w);
            let v: f64 = rng.random();
            if y * (2.0 - y) - v >= 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
                break w;
            }
        };
        let angle = w.clamp(-1.0, 1.0).acos();
        if rng.random::<f64>() < 0.5 {
            -angle
        } else {
            angle
        }
    }
}

/// Approximate inverse of `A(kappa) = I_1(kappa)/I_0(kappa)` (Best & Fisher
/// 1981), used for starting values.
pub fn approx_kappa_from_mrl(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0 - 1e-12);
    if r < 0.53 {
        2.0 * r + r.powi(3) + 5.0 * r.powi(5) / 6.0
    } else if r < 0.85 {
        -0.4 + 1.39 * r + 0.43 / (1.0 - r)
    } else {
        1.0 / (r.powi(3) - 4.0 * r * r + 3.0 * r)
    }
}
