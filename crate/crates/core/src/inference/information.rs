use nalgebra::{Matrix3, SymmetricEigen};
use serde::Serialize;

use super::{FitReport, Observations};
use crate::bases::BaseModel;
use crate::error::{EssError, Result};
use crate::ess::EssModel;
use crate::skewing::SkewingPolynomial;

/// `J` is flagged singular above this condition number.
pub const SINGULAR_CONDITION: f64 = 1e10;

type Mat = [[f64; 3]; 3];

/// Observed information pieces in `(mu, concentration, lambda)` order, both
/// per observation.
#[derive(Debug, Clone, Serialize)]
pub struct InformationEstimate {
    /// Negative mean Hessian of the log density.
    pub j: Mat,
    /// Mean outer product of the scores.
    pub i: Mat,
    pub j_inverse: Option<Mat>,
    /// `tr(J^-1 I)`.
    pub penalty: Option<f64>,
    pub condition_number: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaldErrors {
    /// `sqrt(diag(J^-1) / n)`.
    pub model_based: [f64; 3],
    /// `sqrt(diag(J^-1 I J^-1) / n)`.
    pub sandwich: [f64; 3],
}

/// Score of one observation at `x = theta - mu`, given `cos x` and `sin x`.
#[inline]
fn score_at(base: &BaseModel, lambda: f64, skew: &SkewingPolynomial, c: f64, s: f64) -> [f64; 3] {
    let (d_t, d_c) = base.log_density_gradient(c, s);
    let ratio = skew.pdf_over_cdf(lambda * s);
    [-d_t - ratio * lambda * c, d_c, ratio * s]
}

/// Analytic score of a single observation.
pub fn observation_score(model: &EssModel<BaseModel>, theta: f64) -> [f64; 3] {
    let (s, c) = (theta - model.mu()).sin_cos();
    score_at(model.base(), model.lambda(), model.skewing(), c, s)
}

/// Per-observation Hessian of the log density at `x = theta - mu`.
#[inline]
fn hessian_at(base: &BaseModel, lambda: f64, skew: &SkewingPolynomial, c: f64, s: f64) -> Mat {
    let (d_tt, d_tc, d_cc) = base.log_density_hessian(c, s);
    let u = lambda * s;
    let r = skew.pdf_over_cdf(u);
    let g = skew.cdf_clamped(u).max(crate::skewing::LOG_FLOOR);
    let dr = skew.pdf_derivative_clamped(u) / g - r * r;
    let mm = d_tt + lambda * lambda * dr * c * c - lambda * r * s;
    let mc = -d_tc;
    let ml = -c * (r + u * dr);
    let ll = dr * s * s;
    [[mm, mc, ml], [mc, d_cc, 0.0], [ml, 0.0, ll]]
}

/// Mean score, mean Hessian and mean score outer product over the sample.
pub(crate) struct Derivatives {
    pub score: [f64; 3],
    pub hessian: Mat,
    pub outer: Mat,
}

pub(crate) fn derivatives(model: &EssModel<BaseModel>, obs: &Observations) -> Derivatives {
    let skew = model.skewing();
    let lambda = model.lambda();
    let n = obs.len() as f64;
    let mut d = Derivatives {
        score: [0.0; 3],
        hessian: [[0.0; 3]; 3],
        outer: [[0.0; 3]; 3],
    };
    for (c, s) in obs.centered(model.mu()) {
        let sc = score_at(model.base(), lambda, skew, c, s);
        let h = hessian_at(model.base(), lambda, skew, c, s);
        for a in 0..3 {
            d.score[a] += sc[a] / n;
            for b in 0..3 {
                d.outer[a][b] += sc[a] * sc[b] / n;
                d.hessian[a][b] += h[a][b] / n;
            }
        }
    }
    d
}

/// `J` from the analytic per-observation Hessian, `I` from the score outer
/// products.
pub fn observed_information(
    model: &EssModel<BaseModel>,
    obs: &Observations,
) -> Result<InformationEstimate> {
    let d = derivatives(model, obs);
    let info_i = d.outer;
    let j = d.hessian.map(|row| row.map(|v| -v));
    if j.iter().flatten().any(|v| !v.is_finite()) {
        return Err(EssError::NonConvergence(
            "observed information is not finite".into(),
        ));
    }

    let jm = Matrix3::from_fn(|r, c| j[r][c]);
    let eig = SymmetricEigen::new(jm).eigenvalues;
    let abs_max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let abs_min = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let condition_number = if abs_min > 0.0 {
        abs_max / abs_min
    } else {
        f64::INFINITY
    };
    let singular = !(condition_number <= SINGULAR_CONDITION);

    let j_inverse = if singular {
        None
    } else {
        jm.try_inverse()
            .map(|inv| std::array::from_fn(|r| std::array::from_fn(|c| inv[(r, c)])))
    };
    let penalty = j_inverse.map(|ji: Mat| {
        (0..3)
            .map(|a| (0..3).map(|b| ji[a][b] * info_i[b][a]).sum::<f64>())
            .sum()
    });

    Ok(InformationEstimate {
        j,
        i: info_i,
        j_inverse,
        penalty,
        condition_number,
        singular,
    })
}

/// `(AIC, TIC)` from the total log-likelihood; TIC is absent when `J` is
/// singular.
pub fn information_criteria(loglik_total: f64, info: &InformationEstimate) -> (f64, Option<f64>) {
    let aic = -2.0 * loglik_total + 6.0;
    let tic = info.penalty.map(|p| -2.0 * loglik_total + 2.0 * p);
    (aic, tic)
}

/// Wald standard errors, withheld at the `lambda` boundary or when `J` is
/// singular or not positive definite.
pub fn wald_standard_errors(report: &FitReport) -> Result<WaldErrors> {
    if report.boundary {
        return Err(EssError::NonConvergence(format!(
            "lambda_hat = {:.6} is at the boundary; Wald errors are not valid",
            report.lambda
        )));
    }
    let ji = report.information.j_inverse.ok_or_else(|| {
        EssError::NonConvergence(format!(
            "observed information is singular (condition number {:.3e})",
            report.condition_number
        ))
    })?;
    let i = &report.information.i;
    let n = report.n as f64;
    let mut model_based = [0.0; 3];
    let mut sandwich = [0.0; 3];
    for a in 0..3 {
        let mut v = 0.0;
        for b in 0..3 {
            for c in 0..3 {
                v += ji[a][b] * i[b][c] * ji[c][a];
            }
        }
        if !(ji[a][a] > 0.0 && v > 0.0) {
            return Err(EssError::NonConvergence(
                "observed information is not positive definite".into(),
            ));
        }
        model_based[a] = (ji[a][a] / n).sqrt();
        sandwich[a] = (v / n).sqrt();
    }
    Ok(WaldErrors {
        model_based,
        sandwich,
    })
}

fn shifted(model: &EssModel<BaseModel>, k: usize, d: f64) -> Result<EssModel<BaseModel>> {
    let mut p = [model.mu(), model.concentration(), model.lambda()];
    p[k] += d;
    EssModel::with_skewing(
        p[0],
        BaseModel::from_family(model.family(), p[1])?,
        p[2],
        model.skewing().clone(),
    )
}

fn difference(model: &EssModel<BaseModel>, theta: f64, k: usize, h: f64) -> Result<f64> {
    let up = shifted(model, k, h)?.log_density(theta);
    let down = shifted(model, k, -h)?.log_density(theta);
    Ok((up - down) / (2.0 * h))
}

/// Central-difference score of one observation with step `h`.
pub fn score_central_difference(
    model: &EssModel<BaseModel>,
    theta: f64,
    h: f64,
) -> Result<[f64; 3]> {
    Ok([
        difference(model, theta, 0, h)?,
        difference(model, theta, 1, h)?,
        difference(model, theta, 2, h)?,
    ])
}

/// Central differences at `h` and `h/2` combined by Richardson extrapolation.
pub fn score_richardson(model: &EssModel<BaseModel>, theta: f64, h: f64) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let coarse = difference(model, theta, k, h)?;
        let fine = difference(model, theta, k, 0.5 * h)?;
        *o = (4.0 * fine - coarse) / 3.0;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::BaseFamily;

    #[test]
    fn analytic_score_matches_richardson() {
        for (family, conc) in [(BaseFamily::Vm, 2.0), (BaseFamily::Wc, 0.6)] {
            for m in [0, 2] {
                let model = EssModel::from_family(family, 0.4, conc, -0.5, m).unwrap();
                for &t in &[-2.5, -1.0, 0.2, 1.3, 3.0] {
                    let a = observation_score(&model, t);
                    let r = score_richardson(&model, t, 1e-3).unwrap();
                    for k in 0..3 {
                        assert!((a[k] - r[k]).abs() < 1e-7, "{family} m={m} t={t} k={k}");
                    }
                }
            }
        }
    }

    fn mean_score(
        obs: &Observations,
        family: BaseFamily,
        params: [f64; 3],
        skew: &SkewingPolynomial,
    ) -> Result<[f64; 3]> {
        let base = BaseModel::from_family(family, params[1])?;
        let mut acc = [0.0; 3];
        for (c, s) in obs.centered(params[0]) {
            let sc = score_at(&base, params[2], skew, c, s);
            for k in 0..3 {
                acc[k] += sc[k];
            }
        }
        let n = obs.len() as f64;
        Ok(acc.map(|v| v / n))
    }

    #[test]
    fn analytic_hessian_matches_score_differences() {
        let data: Vec<f64> = (0..60)
            .map(|i| ((i * 53) % 29) as f64 * 0.2 - 2.8)
            .collect();
        let obs = Observations::new(&data).unwrap();
        for (family, conc) in [(BaseFamily::Vm, 1.7), (BaseFamily::Wc, 0.55)] {
            for m in [0, 1, 3] {
                for lambda in [-0.7, 0.0, 0.4] {
                    let model = EssModel::from_family(family, 0.2, conc, lambda, m).unwrap();
                    let info = observed_information(&model, &obs).unwrap();
                    let p = [0.2, conc, lambda];
                    let h = 1e-5;
                    for k in 0..3 {
                        let (mut up, mut down) = (p, p);
                        up[k] += h;
                        down[k] -= h;
                        let su = mean_score(&obs, family, up, model.skewing()).unwrap();
                        let sd = mean_score(&obs, family, down, model.skewing()).unwrap();
                        for a in 0..3 {
                            let fd = -(su[a] - sd[a]) / (2.0 * h);
                            assert!(
                                (info.j[a][k] - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                                "{family} m={m} l={lambda} ({a},{k}): {} vs {fd}",
                                info.j[a][k]
                            );
                        }
                    }
                }
            }
        }
    }
}
