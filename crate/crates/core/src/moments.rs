//! Closed-form trigonometric moments of ESS distributions.
//!
//! With `mu = 0` the cosine moments equal those of the base,
//! `alpha_p = alpha_{0,p}`, for every order. The sine moments follow from
//! expanding `G_m(lambda sin t) - 1/2` in odd powers of `sin t`, writing each
//! `sin^n t` as a combination of `sin(j t)` for odd `j <= n`, and using
//! `2 sin(j t) sin(p t) = cos((j-p) t) - cos((j+p) t)`:
//!
//! ```text
//! beta_p = C_m sum_l binom(m,l) (-1)^(l+1) / (2l+1) lambda^(2l+1)
//!              sum_k c_{2l+1, 2l+1-2k} (alpha_{0,|2l+1-2k+p|} - alpha_{0,|2l+1-2k-p|})
//! ```

use num_integer::binomial;
use num_rational::Ratio;
use serde::Serialize;

use crate::bases::{BaseFamily, BaseModel, CircularBase};
use crate::error::{EssError, Result};
use crate::ess::EssModel;
use crate::skewing::{ratio_to_f64, SkewingPolynomial};

/// Largest order supported by the moment machinery.
pub const MAX_MOMENT_ORDER: usize = 12;

/// Largest odd power `sin^n` that can be expanded.
pub const MAX_SIN_POWER: usize = 2 * MAX_MOMENT_ORDER + 1;

/// `sin^n t = sum_k c_{n, n-2k} sin((n - 2k) t)` for odd `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinPowerExpansion {
    n: usize,
    exact: Vec<Ratio<i128>>,
    coeffs: Vec<f64>,
}

impl SinPowerExpansion {
    pub fn power(&self) -> usize {
        self.n
    }

    /// `c_{n, n-2k}` indexed by `k`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn exact_coeffs(&self) -> &[Ratio<i128>] {
        &self.exact
    }

    /// Coefficient of `sin(j t)`; zero unless `j` is odd and `<= n`.
    pub fn coeff_of(&self, j: usize) -> f64 {
        if j % 2 == 1 && j <= self.n {
            self.coeffs[(self.n - j) / 2]
        } else {
            0.0
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (((self.n - 2 * k) as f64) * t).sin())
            .sum()
    }

    fn from_exact(n: usize, exact: Vec<Ratio<i128>>) -> Self {
        let coeffs = exact.iter().map(ratio_to_f64).collect();
        Self { n, exact, coeffs }
    }
}

fn check_sin_power(n: usize) -> Result<()> {
    if n % 2 == 1 && n <= MAX_SIN_POWER {
        Ok(())
    } else {
        Err(EssError::InvalidSinPower {
            n,
            max: MAX_SIN_POWER,
        })
    }
}

/// `a_{j,i}` with `sin(j t) = sum_i a_{j,i} sin^i t`, from the imaginary part
/// of de Moivre's formula with `cos^2 = 1 - sin^2`. Indexed by `i`.
fn multiple_angle_row(j: usize) -> Vec<i128> {
    let mut row = vec![0i128; j + 1];
    for k in (1..=j).step_by(2) {
        let outer = binomial(j as i128, k as i128) * if (k - 1) / 2 % 2 == 0 { 1 } else { -1 };
        let half = (j - k) / 2;
        for r in 0..=half {
            let inner = binomial(half as i128, r as i128) * if r % 2 == 0 { 1 } else { -1 };
            row[k + 2 * r] += outer * inner;
        }
    }
    row
}

/// Expansion coefficients by back-substitution through the upper-triangular
/// system `(sin n t, ..., sin t)^T = A (sin^n t, ..., sin t)^T`.
pub fn sin_power_coeffs(n: usize) -> Result<SinPowerExpansion> {
    check_sin_power(n)?;
    let rows: Vec<Vec<i128>> = (0..=n)
        .map(|j| {
            if j % 2 == 1 {
                multiple_angle_row(j)
            } else {
                vec![]
            }
        })
        .collect();
    // Solve sum_{j >= i} c_j a_{j,i} = [i == n] for i = n, n-2, ..., 1.
    let mut c = vec![Ratio::from_integer(0i128); n + 1];
    for i in (1..=n).rev().step_by(2) {
        let rhs = if i == n {
            Ratio::from_integer(1)
        } else {
            Ratio::from_integer(0)
        };
        let mut acc = rhs;
        for j in (i + 2..=n).step_by(2) {
            acc -= c[j] * Ratio::from_integer(rows[j][i]);
        }
        c[i] = acc / Ratio::from_integer(rows[i][i]);
    }
    let exact = (0..=(n - 1) / 2).map(|k| c[n - 2 * k]).collect();
    Ok(SinPowerExpansion::from_exact(n, exact))
}

/// Same coefficients from the binomial closed form
/// `c_{n,n-2k} = (-1)^((n-1)/2 - k) binom(n, k) / 2^(n-1)`.
pub fn sin_power_coeffs_closed_form(n: usize) -> Result<SinPowerExpansion> {
    check_sin_power(n)?;
    let half = (n - 1) / 2;
    let exact = (0..=half)
        .map(|k| {
            let sign = if (half - k).is_multiple_of(2) { 1 } else { -1 };
            Ratio::new(sign * binomial(n as i128, k as i128), 1i128 << (n - 1))
        })
        .collect();
    Ok(SinPowerExpansion::from_exact(n, exact))
}

/// Precomputed sine-moment weights for one order `m`:
/// `beta_p = sum_j d_j(lambda) (alpha_{0,|j+p|} - alpha_{0,|j-p|})` over odd
/// `j <= 2m+1`, where `d_j` is an odd polynomial in `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineMomentKernel {
    m: usize,
    /// `weights[(j-1)/2][l]` multiplies `lambda^(2l+1)`.
    weights: Vec<Vec<f64>>,
}

impl SineMomentKernel {
    pub fn new(m: usize) -> Result<Self> {
        if m > MAX_MOMENT_ORDER {
            return Err(EssError::OrderTooLarge {
                m,
                max: MAX_MOMENT_ORDER,
            });
        }
        let skew = SkewingPolynomial::new(m)?;
        let c_m = skew.exact_normalizer();
        let mut exact = vec![vec![Ratio::from_integer(0i128); m + 1]; m + 1];
        for l in 0..=m {
            let sign = if l % 2 == 0 { -1 } else { 1 };
            let w = c_m * Ratio::new(sign * binomial(m as i128, l as i128), 2 * l as i128 + 1);
            let expansion = sin_power_coeffs(2 * l + 1)?;
            for (k, c) in expansion.exact_coeffs().iter().enumerate() {
                let j = 2 * l + 1 - 2 * k;
                exact[(j - 1) / 2][l] += w * c;
            }
        }
        let weights = exact
            .iter()
            .map(|row| row.iter().map(ratio_to_f64).collect())
            .collect();
        Ok(Self { m, weights })
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// Highest cosine-moment order needed for `beta_p`.
    pub fn moments_needed(&self, p: i64) -> usize {
        p.unsigned_abs() as usize + 2 * self.m + 1
    }

    /// `beta_p` given `alpha0[q] = alpha_{0,q}` for `q = 0..=moments_needed(p)`.
    pub fn beta(&self, lambda: f64, p: i64, alpha0: &[f64]) -> f64 {
        let a = |q: i64| alpha0[q.unsigned_abs() as usize];
        let lambda2 = lambda * lambda;
        let mut total = 0.0;
        for (idx, row) in self.weights.iter().enumerate() {
            let j = (2 * idx + 1) as i64;
            // d_j(lambda) = lambda * sum_l row[l] lambda^(2l)
            let mut d = 0.0;
            for w in row.iter().rev() {
                d = d * lambda2 + w;
            }
            d *= lambda;
            total += d * (a(j + p) - a(j - p));
        }
        total
    }
}

/// `(alpha_p, beta_p)` of the model as if it were centered at `mu = 0`.
pub fn centered_moments<B: CircularBase>(model: &EssModel<B>, p: i64) -> Result<(f64, f64)> {
    let kernel = SineMomentKernel::new(model.order())?;
    let alpha0 = model.base().cosine_moments(kernel.moments_needed(p));
    Ok((
        alpha0[p.unsigned_abs() as usize],
        kernel.beta(model.lambda(), p, &alpha0),
    ))
}

/// The `p`th trigonometric moment with its mean direction and mean
/// resultant length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigMoments {
    pub p: i64,
    pub alpha: f64,
    pub beta: f64,
    /// Mean direction `atan2(beta, alpha)` in `(-pi, pi]`.
    pub md: f64,
    pub mrl: f64,
}

/// Rotates `(alpha_p, beta_p)` of the centered model by `mu`.
pub fn rotate(p: i64, mu: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let (s, c) = (p as f64 * mu).sin_cos();
    (c * alpha - s * beta, c * beta + s * alpha)
}

pub fn moments<B: CircularBase>(model: &EssModel<B>, p: i64) -> Result<TrigMoments> {
    let (a, b) = centered_moments(model, p)?;
    let (alpha, beta) = rotate(p, model.mu(), a, b);
    let mrl = alpha.hypot(beta);
    if mrl < 1e-12 {
        return Err(EssError::UndefinedMeanDirection { mrl });
    }
    Ok(TrigMoments {
        p,
        alpha,
        beta,
        md: beta.atan2(alpha),
        mrl,
    })
}

/// Circular skewness `E[sin(2(T - md_1))] / (1 - mrl_1)^(3/2)`.
pub fn circular_skewness<B: CircularBase>(model: &EssModel<B>) -> Result<f64> {
    let first = moments(model, 1)?;
    let gap = 1.0 - first.mrl;
    if gap < 1e-10 {
        return Err(EssError::UndefinedSkewness { gap });
    }
    let (a2, b2) = centered_moments(model, 2)?;
    let (alpha2, beta2) = rotate(2, model.mu(), a2, b2);
    let (s, c) = (2.0 * first.md).sin_cos();
    let centered_beta2 = beta2 * c - alpha2 * s;
    Ok(centered_beta2 / gap.powf(1.5))
}

/// Achievable skewness range of a family at a given order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkewnessRange {
    pub m: usize,
    pub s_min: f64,
    pub s_max: f64,
    /// Concentration at which the extrema are attained.
    pub argmax_concentration: f64,
    /// `lambda` attaining `s_max`; `s_min` is attained at its negative.
    pub argmax_lambda: f64,
}

pub const SKEW_RANGE_KAPPA_BOUNDS: (f64, f64) = (0.01, 50.0);

/// Skewness extrema of the ESS-vM family at order `m`.
///
/// The extrema sit at `lambda = +-1`, so only `kappa` is searched: a
/// logarithmic grid scan over `[0.01, 50]` brackets the maximum of `|s|`,
/// then golden-section search refines it.
pub fn skewness_range(family: BaseFamily, m: usize) -> Result<SkewnessRange> {
    if family != BaseFamily::Vm {
        return Err(EssError::InvalidConfig(
            "the wrapped Cauchy skewness is unbounded as rho -> 1".into(),
        ));
    }
    let kernel = SineMomentKernel::new(m)?;
    let skew = SkewingPolynomial::new(m)?;
    let abs_s = |kappa: f64| -> Result<f64> {
        let model = EssModel::with_skewing(0.0, BaseModel::von_mises(kappa)?, 1.0, skew.clone())?;
        Ok(skewness_with_kernel(&model, &kernel)?.abs())
    };

    let (lo, hi) = SKEW_RANGE_KAPPA_BOUNDS;
    let grid_len = 400;
    let grid: Vec<f64> = (0..grid_len)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (grid_len - 1) as f64).exp())
        .collect();
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &k) in grid.iter().enumerate() {
        let v = abs_s(k)?;
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid_len - 1)];

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = abs_s(c)?;
    let mut fd = abs_s(d)?;
    let mut iterations = 0;
    while (b - a) > 1e-10 * (a + b) {
        iterations += 1;
        if iterations > 500 {
            return Err(EssError::NonConvergence(
                "golden-section search on kappa".into(),
            ));
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = abs_s(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = abs_s(d)?;
        }
    }
    let kappa = 0.5 * (a + b);
    let model = EssModel::with_skewing(0.0, BaseModel::von_mises(kappa)?, 1.0, skew)?;
    let s_at_plus_one = skewness_with_kernel(&model, &kernel)?;
    let s_star = s_at_plus_one.abs();
    Ok(SkewnessRange {
        m,
        s_min: -s_star,
        s_max: s_star,
        argmax_concentration: kappa,
        argmax_lambda: if s_at_plus_one >= 0.0 { 1.0 } else { -1.0 },
    })
}

fn skewness_with_kernel(model: &EssModel<BaseModel>, kernel: &SineMomentKernel) -> Result<f64> {
    let alpha0 = model.base().cosine_moments(kernel.moments_needed(2));
    let lambda = model.lambda();
    let (a1, b1) = (alpha0[1], kernel.beta(lambda, 1, &alpha0));
    let (a2, b2) = (alpha0[2], kernel.beta(lambda, 2, &alpha0));
    let mrl = a1.hypot(b1);
    let gap = 1.0 - mrl;
    if gap < 1e-10 {
        return Err(EssError::UndefinedSkewness { gap });
    }
    let md = b1.atan2(a1);
    let (s, c) = (2.0 * md).sin_cos();
    Ok((b2 * c - a2 * s) / gap.powf(1.5))
}
