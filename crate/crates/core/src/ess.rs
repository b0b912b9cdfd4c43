use rand::Rng;

use crate::bases::{BaseFamily, BaseModel, CircularBase};
use crate::error::{EssError, Result};
use crate::skewing::SkewingPolynomial;
use crate::wrap_angle;

const LN_2: f64 = std::f64::consts::LN_2;

/// An ESS distribution: location `mu`, a centered symmetric base, skewness
/// `lambda` in `[-1, 1]` and integer order `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct EssModel<B: CircularBase = BaseModel> {
    mu: f64,
    base: B,
    lambda: f64,
    skew: SkewingPolynomial,
}

impl<B: CircularBase> EssModel<B> {
    pub fn new(mu: f64, base: B, lambda: f64, m: usize) -> Result<Self> {
        Self::with_skewing(mu, base, lambda, SkewingPolynomial::new(m)?)
    }

    /// Builds a model reusing precomputed skewing coefficients.
    pub fn with_skewing(mu: f64, base: B, lambda: f64, skew: SkewingPolynomial) -> Result<Self> {
        if !mu.is_finite() {
            return Err(EssError::InvalidParameter {
                name: "mu",
                value: mu,
                reason: "must be finite",
            });
        }
        if !(-1.0..=1.0).contains(&lambda) {
            return Err(EssError::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "must lie in [-1, 1]",
            });
        }
        Ok(Self {
            mu: wrap_angle(mu),
            base,
            lambda,
            skew,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.skew.order()
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn skewing(&self) -> &SkewingPolynomial {
        &self.skew
    }

    /// Same distribution moved to location `mu`.
    pub fn with_mu(&self, mu: f64) -> Self {
        Self {
            mu: wrap_angle(mu),
            ..self.clone()
        }
    }

    pub fn density(&self, theta: f64) -> f64 {
        let x = wrap_angle(theta - self.mu);
        2.0 * self.base.density(x) * self.skew.cdf_clamped(self.lambda * x.sin())
    }

    /// `log f_0(theta - mu) + log(2 G_m(lambda sin(theta - mu)))` with the
    /// skewing term floored, so the result is always finite.
    pub fn log_density(&self, theta: f64) -> f64 {
        let x = wrap_angle(theta - self.mu);
        self.base.log_density(x) + LN_2 + self.skew.log_cdf_clamped(self.lambda * x.sin())
    }

    /// One draw: take `phi` from the base, keep it with probability
    /// `G_m(lambda sin phi)` and reflect it otherwise, then shift by `mu`.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let phi = self.base.sample(rng);
        let u: f64 = rng.random();
        let theta = if u < self.skew.cdf_clamped(self.lambda * phi.sin()) {
            phi
        } else {
            -phi
        };
        wrap_angle(theta + self.mu)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

impl EssModel<BaseModel> {
    /// Convenience constructor from a family name and its concentration.
    pub fn from_family(
        family: BaseFamily,
        mu: f64,
        concentration: f64,
        lambda: f64,
        m: usize,
    ) -> Result<Self> {
        Self::new(
            mu,
            BaseModel::from_family(family, concentration)?,
            lambda,
            m,
        )
    }

    pub fn family(&self) -> BaseFamily {
        self.base.family()
    }

    pub fn concentration(&self) -> f64 {
        self.base.concentration()
    }
}

pub fn ess_density<B: CircularBase>(model: &EssModel<B>, theta: f64) -> f64 {
    model.density(theta)
}

pub fn ess_log_density<B: CircularBase>(model: &EssModel<B>, theta: f64) -> f64 {
    model.log_density(theta)
}

pub fn ess_sample<B: CircularBase, R: Rng + ?Sized>(
    model: &EssModel<B>,
    n: usize,
    rng: &mut R,
) -> Vec<f64> {
    model.sample(n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skewing::LOG_FLOOR;
    use std::f64::consts::PI;

    fn wc(rho: f64) -> BaseModel {
        BaseModel::wrapped_cauchy(rho).unwrap()
    }

    #[test]
    fn zero_lambda_is_shifted_base() {
        let base = wc(0.8);
        for m in 0..4 {
            let model = EssModel::new(0.7, base.clone(), 0.0, m).unwrap();
            for i in 0..30 {
                let t = -PI + i as f64 * 0.2;
                let want = base.density(wrap_angle(t - 0.7));
                assert!((model.density(t) - want).abs() < 1e-14);
                assert!((model.log_density(t) - want.ln()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sine_skewed_value_at_quarter_turn() {
        let model = EssModel::new(0.0, wc(0.8), 1.0, 0).unwrap();
        let want = 2.0 * 0.36 / (2.0 * PI * 1.64);
        assert!((model.density(PI / 2.0) - want).abs() < 1e-14);
        assert!((want - 0.069_872_9).abs() < 1e-7);
    }

    #[test]
    fn log_density_floored_at_zero_density() {
        let model = EssModel::new(0.0, wc(0.8), 1.0, 0).unwrap();
        let v = model.log_density(-PI / 2.0);
        assert!(v.is_finite());
        assert!(v < LOG_FLOOR.ln() + 10.0);
        assert_eq!(model.density(-PI / 2.0), 0.0);
    }

    #[test]
    fn exp_log_density_matches_density() {
        let vm = BaseModel::von_mises(8.0).unwrap();
        let model = EssModel::new(-1.2, vm, 0.9, 5).unwrap();
        for i in 0..50 {
            let t = -PI + i as f64 * 0.125;
            let d = model.density(t);
            if d > 1e-200 {
                assert!(((model.log_density(t).exp() - d) / d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(EssModel::new(0.0, wc(0.5), 1.5, 0).is_err());
        assert!(EssModel::new(f64::NAN, wc(0.5), 0.5, 0).is_err());
        assert!(EssModel::new(0.0, wc(0.5), 0.5, 99).is_err());
    }

    #[test]
    fn mu_is_wrapped() {
        let model = EssModel::new(3.0 * PI, wc(0.5), 0.2, 1).unwrap();
        assert!((model.mu() + PI).abs() < 1e-12);
    }
}
