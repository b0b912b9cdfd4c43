//! Maximum-likelihood fitting of ESS models with AIC/TIC and Wald standard
//! errors.
//!
//! The likelihood is maximized over the box `mu x concentration x lambda`
//! by Nelder–Mead in unconstrained coordinates:
//!
//! * `mu` is free and wrapped onto `[-pi, pi)`;
//! * `kappa` uses a logistic map on the log scale between its bounds, `rho`
//!   a logistic map between its bounds;
//! * `lambda = (1 - delta_lambda) tanh(t)`.
//!
//! Criteria use the total log-likelihood `sum_i log f(theta_i)`.

mod information;
pub mod simplex;

use std::f64::consts::{FRAC_PI_4, LN_2};

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::bases::{approx_kappa_from_mrl, BaseFamily, BaseModel, CircularBase};
use crate::error::{EssError, Result};
use crate::ess::EssModel;
use crate::skewing::SkewingPolynomial;
use crate::wrap_angle;

pub use information::{
    information_criteria, observation_score, observed_information, score_central_difference,
    score_richardson, wald_standard_errors, InformationEstimate, WaldErrors, SINGULAR_CONDITION,
};
use simplex::{minimize_from, SimplexOptions};

/// Number of free parameters `(mu, concentration, lambda)`.
pub const N_PARAMS: usize = 3;

/// `|lambda_hat|` above this counts as a boundary solution.
pub const BOUNDARY_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub m: usize,
    pub family: BaseFamily,
    /// `lambda` is restricted to `[-1 + delta_lambda, 1 - delta_lambda]`.
    pub delta_lambda: f64,
    pub kappa_bounds: (f64, f64),
    pub rho_bounds: (f64, f64),
    /// How many points of the 3 x 3 start design to use.
    pub starts: usize,
    pub tol: f64,
}

impl FitConfig {
    pub fn new(family: BaseFamily, m: usize) -> Self {
        Self {
            m,
            family,
            delta_lambda: 0.0,
            kappa_bounds: (1e-4, 500.0),
            rho_bounds: (1e-4, 1.0 - 1e-6),
            starts: 9,
            tol: 1e-9,
        }
    }

    pub fn with_delta_lambda(mut self, delta: f64) -> Self {
        self.delta_lambda = delta;
        self
    }

    pub fn concentration_bounds(&self) -> (f64, f64) {
        match self.family {
            BaseFamily::Vm => self.kappa_bounds,
            BaseFamily::Wc => self.rho_bounds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(EssError::InvalidConfig(msg));
        let (klo, khi) = self.kappa_bounds;
        if !(klo > 0.0 && klo < khi && khi.is_finite()) {
            return bad(format!(
                "kappa bounds {klo}..{khi} must satisfy 0 < lo < hi"
            ));
        }
        let (rlo, rhi) = self.rho_bounds;
        if !(rlo > 0.0 && rlo < rhi && rhi < 1.0) {
            return bad(format!(
                "rho bounds {rlo}..{rhi} must satisfy 0 < lo < hi < 1"
            ));
        }
        if !(0.0..1.0).contains(&self.delta_lambda) {
            return bad(format!(
                "delta_lambda {} must lie in [0, 1)",
                self.delta_lambda
            ));
        }
        if self.starts == 0 {
            return bad("starts must be at least 1".into());
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive".into());
        }
        SkewingPolynomial::new(self.m)?;
        Ok(())
    }
}

/// Angles with their cosines and sines cached for repeated likelihood
/// evaluation.
#[derive(Debug, Clone)]
pub struct Observations {
    theta: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Observations {
    pub fn new(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(EssError::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(bad) = data.iter().find(|t| !t.is_finite()) {
            return Err(EssError::InvalidParameter {
                name: "theta",
                value: *bad,
                reason: "observations must be finite",
            });
        }
        let theta: Vec<f64> = data.iter().map(|&t| wrap_angle(t)).collect();
        let (sin, cos) = theta.iter().map(|t| t.sin_cos()).unzip();
        Ok(Self { theta, cos, sin })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    /// `(cos, sin)` of `theta_i - mu` for every observation.
    pub(crate) fn centered(&self, mu: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (sm, cm) = mu.sin_cos();
        self.cos
            .iter()
            .zip(&self.sin)
            .map(move |(&c, &s)| (c * cm + s * sm, s * cm - c * sm))
    }

    /// Total log-likelihood `sum_i log f(theta_i)`.
    pub fn log_likelihood(&self, model: &EssModel<BaseModel>) -> f64 {
        self.log_likelihood_parts(model.mu(), model.base(), model.lambda(), model.skewing())
    }

    pub(crate) fn log_likelihood_parts(
        &self,
        mu: f64,
        base: &BaseModel,
        lambda: f64,
        skew: &SkewingPolynomial,
    ) -> f64 {
        self.centered(mu)
            .map(|(c, s)| base.log_density_from_cos(c) + skew.log_cdf_clamped(lambda * s))
            .sum::<f64>()
            + LN_2 * self.len() as f64
    }

    /// Sample mean direction and mean resultant length.
    pub fn mean_direction_and_length(&self) -> (f64, f64) {
        let n = self.len() as f64;
        let c: f64 = self.cos.iter().sum();
        let s: f64 = self.sin.iter().sum();
        (s.atan2(c), c.hypot(s) / n)
    }
}

/// Total log-likelihood of `data` under `model`; floored logs keep it finite.
pub fn log_likelihood<B: CircularBase>(model: &EssModel<B>, data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(EssError::InsufficientData { needed: 1, got: 0 });
    }
    Ok(data.iter().map(|&t| model.log_density(t)).sum())
}

/// Maps between the natural parameters and the unconstrained optimizer
/// coordinates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ParamMap {
    family: BaseFamily,
    lo: f64,
    hi: f64,
    lambda_max: f64,
}

impl ParamMap {
    pub(crate) fn new(config: &FitConfig) -> Self {
        let (lo, hi) = config.concentration_bounds();
        Self {
            family: config.family,
            lo,
            hi,
            lambda_max: 1.0 - config.delta_lambda,
        }
    }

    pub(crate) fn to_natural(self, t: &[f64; 3]) -> (f64, f64, f64) {
        let sig = 1.0 / (1.0 + (-t[1]).exp());
        let conc = match self.family {
            BaseFamily::Vm => (self.lo.ln() + (self.hi / self.lo).ln() * sig).exp(),
            BaseFamily::Wc => self.lo + (self.hi - self.lo) * sig,
        };
        (
            wrap_angle(t[0]),
            conc.clamp(self.lo, self.hi),
            self.lambda_max * t[2].tanh(),
        )
    }

    pub(crate) fn to_unconstrained(self, mu: f64, conc: f64, lambda: f64) -> [f64; 3] {
        let frac = match self.family {
            BaseFamily::Vm => (conc.ln() - self.lo.ln()) / (self.hi / self.lo).ln(),
            BaseFamily::Wc => (conc - self.lo) / (self.hi - self.lo),
        };
        let frac = frac.clamp(1e-9, 1.0 - 1e-9);
        let l = (lambda / self.lambda_max).clamp(-1.0 + 1e-12, 1.0 - 1e-12);
        [mu, (frac / (1.0 - frac)).ln(), l.atanh()]
    }
}

/// Everything reported about one maximum-likelihood fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub family: BaseFamily,
    pub m: usize,
    pub n: usize,
    pub mu: f64,
    /// `kappa` for von Mises, `rho` for wrapped Cauchy.
    pub concentration: f64,
    pub lambda: f64,
    /// `sum_i log f(theta_i)` at the estimate.
    pub loglik_total: f64,
    pub aic: f64,
    /// `None` when the observed information is singular.
    pub tic: Option<f64>,
    /// `tr(J^-1 I)`.
    pub tic_penalty: Option<f64>,
    /// `J^-1 / n` in `(mu, concentration, lambda)` order.
    pub cov: Option<[[f64; 3]; 3]>,
    pub se: Option<WaldErrors>,
    /// Why `se` is missing, when it is.
    pub se_note: Option<String>,
    pub boundary: bool,
    pub singular_information: bool,
    pub condition_number: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub information: InformationEstimate,
}

impl FitReport {
    pub fn model(&self) -> Result<EssModel<BaseModel>> {
        EssModel::from_family(
            self.family,
            self.mu,
            self.concentration,
            self.lambda,
            self.m,
        )
    }

    pub fn estimates(&self) -> [f64; 3] {
        [self.mu, self.concentration, self.lambda]
    }
}

/// The deterministic start design: `mu` at the sample mean direction and
/// `+-pi/4` from it, concentration from the base's moment inversion, and
/// `lambda` in `{-0.5, 0, 0.5}`.
pub fn start_design(obs: &Observations, config: &FitConfig) -> Vec<(f64, f64, f64)> {
    let (md, r) = obs.mean_direction_and_length();
    let (lo, hi) = config.concentration_bounds();
    let conc = match config.family {
        BaseFamily::Vm => approx_kappa_from_mrl(r),
        BaseFamily::Wc => r,
    }
    .clamp(lo, hi);
    let mut design = Vec::with_capacity(9);
    for &dmu in &[0.0, -FRAC_PI_4, FRAC_PI_4] {
        for &lambda in &[0.0, -0.5, 0.5] {
            design.push((
                wrap_angle(md + dmu),
                conc,
                lambda * (1.0 - config.delta_lambda),
            ));
        }
    }
    design.truncate(config.starts.min(9));
    design
}

/// Maximum-likelihood fit of an ESS model of fixed order.
pub fn fit_mle(data: &[f64], config: &FitConfig) -> Result<FitReport> {
    config.validate()?;
    if data.len() < N_PARAMS + 1 {
        return Err(EssError::InsufficientData {
            needed: N_PARAMS + 1,
            got: data.len(),
        });
    }
    let obs = Observations::new(data)?;
    fit_observations(&obs, config)
}

/// Regular tetrahedron centred on `x0` (scaled per axis by `steps`) that is
/// mapped onto itself by `(mu, c, lambda) -> (-mu, c, -lambda)`. Reflecting
/// the data reflects the whole simplex run, so mirrored samples reach
/// mirrored optima.
fn mirror_symmetric_simplex(x0: [f64; 3], steps: [f64; 3]) -> Vec<[f64; 3]> {
    const CORNERS: [[f64; 3]; 4] = [
        [1.0, 1.0, 1.0],
        [-1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    CORNERS
        .iter()
        .map(|v| std::array::from_fn(|k| x0[k] + 0.5 * steps[k] * v[k]))
        .collect()
}

/// A few safeguarded Newton steps on the analytic score and Hessian. The
/// simplex stops around `1e-8` in the parameters; this takes optima to
/// rounding level. When the full step would leave the `lambda` range the
/// step is taken in `(mu, c)` only, with `lambda` held at its boundary value.
/// A step is kept only if it stays inside the bounds, the (reduced) Hessian
/// is negative definite, and the log-likelihood does not drop.
fn newton_polish(
    model: EssModel<BaseModel>,
    obs: &Observations,
    config: &FitConfig,
) -> EssModel<BaseModel> {
    let (lo, hi) = config.concentration_bounds();
    let lambda_max = 1.0 - config.delta_lambda;
    let mut current = model;
    let mut ll = obs.log_likelihood(&current);
    for _ in 0..8 {
        let d = information::derivatives(&current, obs);
        let full = Matrix3::from_fn(|r, c| -d.hessian[r][c])
            .cholesky()
            .map(|ch| ch.solve(&Vector3::from(d.score)))
            .filter(|st| (current.lambda() + st[2]).abs() < lambda_max);
        let step = match full {
            Some(st) => st,
            None => {
                let h2 = Matrix2::from_fn(|r, c| -d.hessian[r][c]);
                let Some(ch) = h2.cholesky() else { break };
                let st = ch.solve(&Vector2::new(d.score[0], d.score[1]));
                Vector3::new(st[0], st[1], 0.0)
            }
        };
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        let mu = wrap_angle(current.mu() + step[0]);
        let conc = current.concentration() + step[1];
        let lambda = current.lambda() + step[2];
        if !(conc > lo && conc < hi) {
            break;
        }
        let Ok(next) = BaseModel::from_family(config.family, conc)
            .and_then(|b| EssModel::with_skewing(mu, b, lambda, current.skewing().clone()))
        else {
            break;
        };
        let next_ll = obs.log_likelihood(&next);
        if !(next_ll >= ll - 1e-12 * ll.abs().max(1.0)) {
            break;
        }
        let small = step.amax() < 1e-14;
        current = next;
        ll = next_ll;
        if small {
            break;
        }
    }
    current
}

pub(crate) fn fit_observations(obs: &Observations, config: &FitConfig) -> Result<FitReport> {
    let skew = SkewingPolynomial::new(config.m)?;
    let map = ParamMap::new(config);
    let family = config.family;
    let objective = |t: &[f64; 3]| -> f64 {
        let (mu, conc, lambda) = map.to_natural(t);
        match BaseModel::from_family(family, conc) {
            Ok(base) => -obs.log_likelihood_parts(mu, &base, lambda, &skew),
            Err(_) => f64::INFINITY,
        }
    };
    let steps = [0.3, 0.5, 0.5];
    let scale = obs.len() as f64;
    let coarse = SimplexOptions {
        f_tol: 1e-6 * scale.max(1.0),
        x_tol: 1e-4,
        max_evals: 800,
    };
    let fine = SimplexOptions {
        f_tol: config.tol,
        x_tol: 1e-9,
        max_evals: 4000,
    };

    let mut evaluations = 0;
    let mut best: Option<simplex::SimplexResult<3>> = None;
    for (mu0, c0, l0) in start_design(obs, config) {
        let r = minimize_from(
            objective,
            mirror_symmetric_simplex(map.to_unconstrained(mu0, c0, l0), steps),
            coarse,
        );
        evaluations += r.evals;
        if best.as_ref().is_none_or(|b| r.f < b.f) {
            best = Some(r);
        }
    }
    let mut best = best.expect("start design is never empty");

    // Polish, restarting the simplex until a restart stops improving.
    let mut converged = false;
    for _ in 0..6 {
        let r = minimize_from(
            objective,
            mirror_symmetric_simplex(best.x, [0.05, 0.1, 0.1]),
            fine,
        );
        evaluations += r.evals;
        let improvement = best.f - r.f;
        let done = r.converged && improvement <= config.tol.max(1e-12 * r.f.abs());
        if r.f <= best.f {
            best = r;
        }
        if done {
            converged = true;
            break;
        }
    }

    let (mu, conc, lambda) = map.to_natural(&best.x);
    let model = EssModel::with_skewing(mu, BaseModel::from_family(family, conc)?, lambda, skew)?;
    let model = newton_polish(model, obs, config);
    let (mu, conc, lambda) = (model.mu(), model.concentration(), model.lambda());
    let loglik_total = obs.log_likelihood(&model);
    let info = observed_information(&model, obs)?;
    let (aic, tic) = information_criteria(loglik_total, &info);
    let boundary = lambda.abs() > BOUNDARY_THRESHOLD;

    let mut report = FitReport {
        family,
        m: config.m,
        n: obs.len(),
        mu,
        concentration: conc,
        lambda,
        loglik_total,
        aic,
        tic,
        tic_penalty: info.penalty,
        cov: info
            .j_inverse
            .map(|ji| ji.map(|row| row.map(|v| v / obs.len() as f64))),
        se: None,
        se_note: None,
        boundary,
        singular_information: info.singular,
        condition_number: info.condition_number,
        converged,
        evaluations,
        information: info,
    };
    match wald_standard_errors(&report) {
        Ok(se) => report.se = Some(se),
        Err(e) => report.se_note = Some(e.to_string()),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn param_map_round_trip() {
        for family in [BaseFamily::Vm, BaseFamily::Wc] {
            let map = ParamMap::new(&FitConfig::new(family, 1));
            let conc = if family == BaseFamily::Vm { 3.7 } else { 0.61 };
            let t = map.to_unconstrained(0.4, conc, -0.3);
            let (mu, c, l) = map.to_natural(&t);
            assert!((mu - 0.4).abs() < 1e-12);
            assert!((c - conc).abs() < 1e-10);
            assert!((l + 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_lambda_limits_range() {
        let config = FitConfig::new(BaseFamily::Wc, 0).with_delta_lambda(0.05);
        let map = ParamMap::new(&config);
        let (_, _, l) = map.to_natural(&[0.0, 0.0, 50.0]);
        assert!((l - 0.95).abs() < 1e-12);
    }

    #[test]
    fn single_datum_log_likelihood() {
        let model = EssModel::from_family(BaseFamily::Wc, 0.3, 0.8, 0.7, 2).unwrap();
        let ll = log_likelihood(&model, &[0.3]).unwrap();
        let want = (0.36 / (2.0 * PI * 0.04f64)).ln();
        assert!((ll - want).abs() < 1e-12);
        let obs = Observations::new(&[0.3]).unwrap();
        assert!((obs.log_likelihood(&model) - want).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_paths_agree_and_permute() {
        let model = EssModel::from_family(BaseFamily::Vm, -0.5, 2.0, -0.6, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut data = model.sample(200, &mut rng);
        let a = log_likelihood(&model, &data).unwrap();
        let b = Observations::new(&data).unwrap().log_likelihood(&model);
        assert!((a - b).abs() < 1e-9);
        data.reverse();
        let c = log_likelihood(&model, &data).unwrap();
        assert!((a - c).abs() < 1e-9);
    }

    #[test]
    fn empty_and_short_data() {
        let model = EssModel::from_family(BaseFamily::Vm, 0.0, 2.0, 0.0, 0).unwrap();
        assert!(log_likelihood(&model, &[]).is_err());
        let config = FitConfig::new(BaseFamily::Vm, 0);
        assert!(matches!(
            fit_mle(&[0.1, 0.2, 0.3], &config),
            Err(EssError::InsufficientData { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let mut c = FitConfig::new(BaseFamily::Wc, 1);
        assert!(c.validate().is_ok());
        c.starts = 0;
        assert!(c.validate().is_err());
        let mut c = FitConfig::new(BaseFamily::Wc, 1);
        c.rho_bounds = (0.5, 0.2);
        assert!(c.validate().is_err());
        let c = FitConfig::new(BaseFamily::Wc, 99);
        assert!(c.validate().is_err());
    }

    #[test]
    fn start_design_layout() {
        let obs = Observations::new(&[0.1, 0.2, -0.1, 0.05, 0.3]).unwrap();
        let design = start_design(&obs, &FitConfig::new(BaseFamily::Wc, 0));
        assert_eq!(design.len(), 9);
        let mut c = FitConfig::new(BaseFamily::Wc, 0);
        c.starts = 4;
        assert_eq!(start_design(&obs, &c).len(), 4);
    }

    #[test]
    fn recovers_parameters() {
        let truth = EssModel::from_family(BaseFamily::Wc, 0.5, 0.8, 0.5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = truth.sample(3000, &mut rng);
        let fit = fit_mle(&data, &FitConfig::new(BaseFamily::Wc, 2)).unwrap();
        assert!(fit.converged);
        assert!((fit.mu - 0.5).abs() < 0.05, "{fit:?}");
        assert!((fit.concentration - 0.8).abs() < 0.03);
        assert!((fit.lambda - 0.5).abs() < 0.15);
        assert!((fit.aic - (-2.0 * fit.loglik_total + 6.0)).abs() < 1e-9);
    }
}
