//! The symmetric Beta-type skewing density `g_m(x) = C_m (1 - x^2)^m` on
//! `[-1, 1]` and its distribution function `G_m`.
//!
//! For integer order `m`, `G_m` is the odd polynomial
//!
//! ```text
//! G_m(x) = 1/2 + C_m * sum_{l=0}^{m} binom(m, l) (-1)^l x^(2l+1) / (2l+1)
//! ```
//!
//! The coefficients are built in exact rational arithmetic and only then
//! rounded to `f64`. Near the endpoints the alternating polynomial loses
//! relative accuracy, so the tails are evaluated with the positive-term
//! series of the regularized incomplete beta function `I_z(m+1, m+1)`,
//! `z = (1 + x) / 2`, which is the same function.

use num_integer::binomial;
use num_rational::Ratio;

use crate::error::{EssError, Result};

/// Largest order the exact coefficient construction supports.
pub const MAX_SKEWING_ORDER: usize = 30;

/// Arguments this far outside `[-1, 1]` are clamped instead of rejected.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Floor applied before taking `log G_m`.
pub const LOG_FLOOR: f64 = 1e-300;

/// Beyond this `|x|` the tail series replaces the polynomial.
const TAIL_SWITCH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SkewingPolynomial {
    m: usize,
    normalizer: f64,
    exact_normalizer: Ratio<i128>,
    /// `(2l + 1, C_m binom(m,l) (-1)^l / (2l+1))` for `l = 0..=m`.
    exact_coeffs: Vec<(u32, Ratio<i128>)>,
    /// Same coefficients in `f64`, indexed by `l`.
    coeffs: Vec<f64>,
}

impl SkewingPolynomial {
    pub fn new(m: usize) -> Result<Self> {
        if m > MAX_SKEWING_ORDER {
            return Err(EssError::OrderTooLarge {
                m,
                max: MAX_SKEWING_ORDER,
            });
        }
        let exact_normalizer = normalizer_exact(m);
        let exact_coeffs: Vec<(u32, Ratio<i128>)> = (0..=m)
            .map(|l| {
                let sign = if l % 2 == 0 { 1 } else { -1 };
                let c = exact_normalizer
                    * Ratio::new(sign * binomial(m as i128, l as i128), 2 * l as i128 + 1);
                ((2 * l + 1) as u32, c)
            })
            .collect();
        let coeffs = exact_coeffs.iter().map(|(_, c)| ratio_to_f64(c)).collect();
        Ok(Self {
            m,
            normalizer: ratio_to_f64(&exact_normalizer),
            exact_normalizer,
            exact_coeffs,
            coeffs,
        })
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// `C_m = Gamma(2(m+1)) / (2^(2m+1) Gamma(m+1)^2)`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn exact_normalizer(&self) -> Ratio<i128> {
        self.exact_normalizer
    }

    /// Exact `(exponent, coefficient)` pairs of the odd part of `G_m`; the
    /// constant term is always `1/2`.
    pub fn exact_cdf_coeffs(&self) -> &[(u32, Ratio<i128>)] {
        &self.exact_coeffs
    }

    /// Floating-point `(exponent, coefficient)` pairs.
    pub fn cdf_coeffs(&self) -> Vec<(u32, f64)> {
        self.exact_coeffs
            .iter()
            .zip(&self.coeffs)
            .map(|((e, _), c)| (*e, *c))
            .collect()
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.pdf_clamped(check_domain(x)?))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_clamped(check_domain(x)?))
    }

    /// `log(max(G_m(x), 1e-300))`.
    pub fn log_cdf(&self, x: f64) -> Result<f64> {
        Ok(self.log_cdf_clamped(check_domain(x)?))
    }

    /// Density without domain checking; `x` is clamped to `[-1, 1]`.
    #[inline]
    pub fn pdf_clamped(&self, x: f64) -> f64 {
        let x = x.clamp(-1.0, 1.0);
        self.normalizer * powi((1.0 - x) * (1.0 + x), self.m)
    }

    /// Distribution function without domain checking; `x` is clamped.
    #[inline]
    pub fn cdf_clamped(&self, x: f64) -> f64 {
        let x = x.clamp(-1.0, 1.0);
        if x < -TAIL_SWITCH {
            self.lower_tail(x)
        } else if x > TAIL_SWITCH {
            1.0 - self.lower_tail(-x)
        } else {
            self.poly(x)
        }
    }

    #[inline]
    pub fn log_cdf_clamped(&self, x: f64) -> f64 {
        self.cdf_clamped(x).max(LOG_FLOOR).ln()
    }

    /// `g_m'(x)`, with `x` clamped.
    #[inline]
    pub fn pdf_derivative_clamped(&self, x: f64) -> f64 {
        if self.m == 0 {
            return 0.0;
        }
        let x = x.clamp(-1.0, 1.0);
        -2.0 * self.m as f64 * x * self.normalizer * powi((1.0 - x) * (1.0 + x), self.m - 1)
    }

    /// `g_m(x) / G_m(x)`, with `G_m` floored as in [`Self::log_cdf`].
    #[inline]
    pub fn pdf_over_cdf(&self, x: f64) -> f64 {
        self.pdf_clamped(x) / self.cdf_clamped(x).max(LOG_FLOOR)
    }

    #[inline]
    fn poly(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x2 + c;
        }
        0.5 + x * acc
    }

    /// `G_m(x)` for `x <= 0` as `I_z(a, a)` with `a = m + 1`, `z = (1+x)/2`:
    /// `C_m (1-x^2)^(m+1) / (2(m+1)) * [1 + sum_n t_n z^(n+1)]`,
    /// `t_0 = 2a/(a+1)`, `t_n = t_{n-1} (2a+n)/(a+n+1)`.
    fn lower_tail(&self, x: f64) -> f64 {
        let a = (self.m + 1) as f64;
        let z = 0.5 * (1.0 + x);
        if z <= 0.0 {
            return 0.0;
        }
        // (1 - x)(1 + x) keeps relative accuracy as x -> -1.
        let prefactor = self.normalizer * powi((1.0 - x) * (1.0 + x), self.m + 1) / (2.0 * a);
        let mut term = z * 2.0 * a / (a + 1.0);
        let mut sum = 1.0 + term;
        let mut n = 1.0;
        while term > 1e-17 * sum {
            term *= z * (2.0 * a + n) / (a + n + 1.0);
            sum += term;
            n += 1.0;
            if n > 2000.0 {
                break;
            }
        }
        prefactor * sum
    }
}

#[inline]
fn powi(x: f64, n: usize) -> f64 {
    x.powi(n as i32)
}

fn check_domain(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() > 1.0 + DOMAIN_SLACK {
        Err(EssError::OutOfDomain { x })
    } else {
        Ok(x.clamp(-1.0, 1.0))
    }
}

/// `(2m+1)! / (2^(2m+1) (m!)^2) = (m+1) binom(2m+1, m) / 2^(2m+1)`.
fn normalizer_exact(m: usize) -> Ratio<i128> {
    let m = m as i128;
    Ratio::new((m + 1) * binomial(2 * m + 1, m), 1i128 << (2 * m + 1))
}

pub(crate) fn ratio_to_f64(r: &Ratio<i128>) -> f64 {
    // Numerators and denominators here stay below 2^100, so the division of
    // the two correctly rounded values is accurate to a couple of ulps.
    *r.numer() as f64 / *r.denom() as f64
}

pub fn skewing_pdf(m: usize, x: f64) -> Result<f64> {
    SkewingPolynomial::new(m)?.pdf(x)
}

pub fn skewing_cdf(m: usize, x: f64) -> Result<f64> {
    SkewingPolynomial::new(m)?.cdf(x)
}

pub fn skewing_log_cdf(m: usize, x: f64) -> Result<f64> {
    SkewingPolynomial::new(m)?.log_cdf(x)
}
