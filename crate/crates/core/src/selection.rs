//! Order selection over a grid of `m`, sample circular statistics, and the
//! large-sample test of reflective symmetry (Pewsey, 2002).

use rayon::prelude::*;
use serde::Serialize;

use crate::bases::BaseFamily;
use crate::error::{EssError, Result};
use crate::inference::{fit_observations, FitConfig, FitReport, Observations, N_PARAMS};

/// The fit at one grid point, or why it failed.
#[derive(Debug, Clone, Serialize)]
pub struct OrderFit {
    pub m: usize,
    pub report: Option<FitReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderSelection {
    pub family: BaseFamily,
    pub grid: Vec<usize>,
    /// One entry per grid point, in grid order.
    pub fits: Vec<OrderFit>,
    /// Maximizes the log-likelihood, equivalently minimizes AIC.
    pub m_mll: Option<usize>,
    /// Minimizes TIC among fits with a nonsingular information matrix.
    pub m_tic: Option<usize>,
}

impl OrderSelection {
    pub fn report(&self, m: usize) -> Option<&FitReport> {
        self.fits
            .iter()
            .find(|f| f.m == m)
            .and_then(|f| f.report.as_ref())
    }
}

pub const DEFAULT_ORDER_GRID: [usize; 5] = [0, 1, 2, 3, 4];

/// Fits every order in `grid` with default settings for `family`.
pub fn select_order(data: &[f64], family: BaseFamily, grid: &[usize]) -> Result<OrderSelection> {
    select_order_with(data, &FitConfig::new(family, 0), grid)
}

/// As [`select_order`], using `template` for everything except `m`.
pub fn select_order_with(
    data: &[f64],
    template: &FitConfig,
    grid: &[usize],
) -> Result<OrderSelection> {
    if data.len() < N_PARAMS + 1 {
        return Err(EssError::InsufficientData {
            needed: N_PARAMS + 1,
            got: data.len(),
        });
    }
    let obs = Observations::new(data)?;
    select_order_observations(&obs, template, grid)
}

pub(crate) fn select_order_observations(
    obs: &Observations,
    template: &FitConfig,
    grid: &[usize],
) -> Result<OrderSelection> {
    if grid.is_empty() {
        return Err(EssError::InvalidConfig("order grid is empty".into()));
    }
    let fits: Vec<OrderFit> = grid
        .par_iter()
        .map(|&m| {
            let config = FitConfig {
                m,
                ..template.clone()
            };
            match config
                .validate()
                .and_then(|_| fit_observations(obs, &config))
            {
                Ok(report) => OrderFit {
                    m,
                    report: Some(report),
                    error: None,
                },
                Err(e) => OrderFit {
                    m,
                    report: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(summarize(template.family, grid, fits))
}

fn summarize(family: BaseFamily, grid: &[usize], fits: Vec<OrderFit>) -> OrderSelection {
    // Ties keep the smaller order (earlier grid entry).
    let pick = |key: &dyn Fn(&FitReport) -> Option<f64>| {
        let mut best: Option<(usize, f64)> = None;
        for f in &fits {
            if let Some(v) = f.report.as_ref().and_then(key) {
                if best.is_none_or(|(_, b)| v < b) {
                    best = Some((f.m, v));
                }
            }
        }
        best.map(|(m, _)| m)
    };
    let m_mll = pick(&|r| Some(-r.loglik_total));
    let m_tic = pick(&|r| r.tic);
    OrderSelection {
        family,
        grid: grid.to_vec(),
        fits,
        m_mll,
        m_tic,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean_direction: f64,
    pub mean_resultant_length: f64,
    /// `b2 / (1 - R)^(3/2)`, `b2` the mean of `sin 2(theta - mean_direction)`.
    pub skewness: f64,
}

/// Centered cosine moments `a_1..=a_4` and `b_2` about the sample mean
/// direction.
struct Centered {
    md: f64,
    a: [f64; 5],
    b2: f64,
}

fn centered_sample_moments(data: &[f64]) -> Result<Centered> {
    let n = data.len() as f64;
    let (s, c) = data
        .iter()
        .fold((0.0, 0.0), |(s, c), t| (s + t.sin(), c + t.cos()));
    let r = c.hypot(s) / n;
    if r < 1e-12 {
        return Err(EssError::UndefinedMeanDirection { mrl: r });
    }
    let md = s.atan2(c);
    let mut a = [0.0; 5];
    let mut b2 = 0.0;
    for &t in data {
        let x = t - md;
        for (p, ap) in a.iter_mut().enumerate() {
            *ap += (p as f64 * x).cos() / n;
        }
        b2 += (2.0 * x).sin() / n;
    }
    Ok(Centered { md, a, b2 })
}

pub fn sample_circular_stats(data: &[f64]) -> Result<SampleStats> {
    if data.len() < 2 {
        return Err(EssError::InsufficientData {
            needed: 2,
            got: data.len(),
        });
    }
    let m = centered_sample_moments(data)?;
    let r = m.a[1];
    let gap = 1.0 - r;
    if gap < 1e-12 {
        return Err(EssError::UndefinedSkewness { gap });
    }
    Ok(SampleStats {
        n: data.len(),
        mean_direction: m.md,
        mean_resultant_length: r,
        skewness: m.b2 / gap.powf(1.5),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryTestResult {
    /// `b2 / sqrt(var(b2))`.
    pub statistic: f64,
    /// Two-sided standard normal tail.
    pub p_value: f64,
    pub sample_stats: SampleStats,
}

/// Large-sample test of reflective symmetry about the mean direction.
///
/// The variance estimate of `b2` is
/// `[(1 - a4)/2 - 2 a2 + (2 a2 / R)(a3 + a2 (1 - a2) / R)] / n`
/// with `a_p` the centered sample cosine moments.
pub fn symmetry_test(data: &[f64]) -> Result<SymmetryTestResult> {
    const MIN_N: usize = 10;
    if data.len() < MIN_N {
        return Err(EssError::InsufficientData {
            needed: MIN_N,
            got: data.len(),
        });
    }
    let sample_stats = sample_circular_stats(data)?;
    let m = centered_sample_moments(data)?;
    let [_, r, a2, a3, a4] = m.a;
    let n = data.len() as f64;
    let var = ((1.0 - a4) / 2.0 - 2.0 * a2 + (2.0 * a2 / r) * (a3 + a2 * (1.0 - a2) / r)) / n;
    if !(var > 0.0) || !var.is_finite() {
        return Err(EssError::DegenerateVariance);
    }
    let statistic = m.b2 / var.sqrt();
    let p_value = libm::erfc(statistic.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0);
    Ok(SymmetryTestResult {
        statistic,
        p_value,
        sample_stats,
    })
}
