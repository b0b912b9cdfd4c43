//! Monte Carlo campaigns: estimator bias and RMSE at the true order, order
//! selection by log-likelihood and TIC, boundary rates and TIC penalties.
//!
//! Replicate `r` of cell `c` draws from a ChaCha8 stream keyed by
//! `(master_seed, c, r)`, so results do not depend on the worker count and
//! any single cell can be rerun on its own.

mod export;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::BaseFamily;
use crate::error::{EssError, Result};
use crate::ess::EssModel;
use crate::inference::{fit_observations, FitConfig, FitReport, Observations};
use crate::wrap_angle;

pub use export::{export_tables, render_text};

fn default_name() -> String {
    "campaign".into()
}
fn default_n_grid() -> Vec<usize> {
    vec![100, 200, 500]
}
fn default_replicates() -> usize {
    1000
}
fn default_m_grid() -> Vec<usize> {
    vec![0, 1, 2, 3, 4]
}
fn default_true() -> bool {
    true
}

/// A campaign as read from its TOML configuration.
///
/// ```toml
/// family = "wc"
/// concentration = 0.8
/// lambdas = [0.2, 0.5, 0.8]
/// m = 3
/// n_grid = [100, 200, 500]
/// replicates = 1000
/// master_seed = 20240101
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimCampaign {
    #[serde(default = "default_name")]
    pub name: String,
    pub family: BaseFamily,
    #[serde(default)]
    pub mu: f64,
    pub concentration: f64,
    /// True skewness values; one cell per `(lambda, n)` pair.
    pub lambdas: Vec<f64>,
    /// True order.
    pub m: usize,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_m_grid")]
    pub m_grid: Vec<usize>,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker count used when the caller does not give one.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub delta_lambda: f64,
    /// Also fit every order in `m_grid` (selection, boundary and penalty
    /// statistics).
    #[serde(default = "default_true")]
    pub selection: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSpec {
    pub index: usize,
    pub lambda: f64,
    pub n: usize,
}

impl SimCampaign {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| EssError::InvalidConfig(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| EssError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(EssError::InvalidConfig(m.into()));
        if self.lambdas.is_empty() || self.n_grid.is_empty() {
            return bad("lambdas and n_grid must be non-empty");
        }
        if self.replicates == 0 {
            return bad("replicates must be positive");
        }
        if self.selection && self.m_grid.is_empty() {
            return bad("m_grid must be non-empty when selection is enabled");
        }
        if self.n_grid.iter().any(|&n| n < 4) {
            return bad("every sample size must be at least 4");
        }
        if self.replicates > u32::MAX as usize || self.cells().len() > u32::MAX as usize {
            return bad("too many cells or replicates");
        }
        for &l in &self.lambdas {
            self.truth(l)?;
        }
        for &m in &self.m_grid {
            self.fit_config(m).validate()?;
        }
        self.fit_config(self.m).validate()
    }

    pub fn cells(&self) -> Vec<CellSpec> {
        let mut out = Vec::with_capacity(self.lambdas.len() * self.n_grid.len());
        for &lambda in &self.lambdas {
            for &n in &self.n_grid {
                out.push(CellSpec {
                    index: out.len(),
                    lambda,
                    n,
                });
            }
        }
        out
    }

    pub fn truth(&self, lambda: f64) -> Result<EssModel> {
        EssModel::from_family(self.family, self.mu, self.concentration, lambda, self.m)
    }

    fn fit_config(&self, m: usize) -> FitConfig {
        FitConfig::new(self.family, m).with_delta_lambda(self.delta_lambda)
    }

    /// Orders that each replicate is fitted at: the true one first, then the
    /// selection grid.
    fn fitted_orders(&self) -> Vec<usize> {
        let mut orders = vec![self.m];
        if self.selection {
            orders.extend(self.m_grid.iter().filter(|&&m| m != self.m));
        }
        orders
    }
}

/// The random stream for replicate `rep` of cell `cell`.
pub fn replicate_rng(master_seed: u64, cell: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((cell as u64) << 32) | rep as u64);
    rng
}

/// What one fit contributes to the summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOutcome {
    pub estimates: [f64; 3],
    pub loglik: f64,
    pub tic: Option<f64>,
    pub penalty: Option<f64>,
    pub boundary: bool,
}

impl From<&FitReport> for FitOutcome {
    fn from(r: &FitReport) -> Self {
        Self {
            estimates: r.estimates(),
            loglik: r.loglik_total,
            tic: r.tic,
            penalty: r.tic_penalty,
            boundary: r.boundary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub at_true_m: Option<FitOutcome>,
    /// One entry per `m_grid` order; empty without selection.
    pub grid: Vec<Option<FitOutcome>>,
}

/// Draws and fits one replicate.
pub fn run_replicate(
    campaign: &SimCampaign,
    cell: &CellSpec,
    rep: usize,
) -> Result<ReplicateOutcome> {
    let truth = campaign.truth(cell.lambda)?;
    let mut rng = replicate_rng(campaign.master_seed, cell.index, rep);
    let data = truth.sample(cell.n, &mut rng);
    let obs = Observations::new(&data)?;
    let fits: Vec<(usize, Option<FitOutcome>)> = campaign
        .fitted_orders()
        .into_iter()
        .map(|m| {
            let fit = fit_observations(&obs, &campaign.fit_config(m)).ok();
            (m, fit.as_ref().map(FitOutcome::from))
        })
        .collect();
    let lookup = |m: usize| fits.iter().find(|(k, _)| *k == m).and_then(|(_, f)| *f);
    Ok(ReplicateOutcome {
        at_true_m: lookup(campaign.m),
        grid: if campaign.selection {
            campaign.m_grid.iter().map(|&m| lookup(m)).collect()
        } else {
            Vec::new()
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStats {
    pub m: usize,
    /// Successful fits.
    pub fits: usize,
    pub failures: usize,
    /// Fraction of successful fits with `|lambda_hat| > 0.99`.
    pub boundary_rate: f64,
    pub penalty_mean: f64,
    pub penalty_sd: f64,
    /// Fits without a penalty (singular information).
    pub penalty_excluded: usize,
    /// Penalty over fits with `lambda_hat` inside the boundary, where the
    /// penalty is a valid bias estimate.
    pub interior_penalty_mean: f64,
    pub interior_penalty_sd: f64,
    pub interior_penalty_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: CellSpec,
    pub family: BaseFamily,
    pub m: usize,
    pub replicates: usize,
    /// True `(mu, concentration, lambda)`.
    pub truth: [f64; 3],
    /// Means of the true-order estimates; `mu` is averaged as a wrapped
    /// offset from the true value.
    pub mean: [f64; 3],
    pub rmse: [f64; 3],
    /// Standard errors of the means.
    pub se: [f64; 3],
    /// Fit statistics at the true order.
    pub at_true_m: OrderStats,
    pub m_grid: Vec<usize>,
    /// Counts of the log-likelihood (equivalently AIC) choice, per `m_grid`.
    pub selected_mll: Vec<usize>,
    pub selected_tic: Vec<usize>,
    /// Replicates where a selector had no admissible fit.
    pub unselected_mll: usize,
    pub unselected_tic: usize,
    pub per_order: Vec<OrderStats>,
}

fn order_stats(m: usize, outcomes: &[Option<FitOutcome>]) -> OrderStats {
    let ok: Vec<&FitOutcome> = outcomes.iter().flatten().collect();
    let pens: Vec<f64> = ok.iter().filter_map(|f| f.penalty).collect();
    let (penalty_mean, penalty_sd) = mean_sd(&pens);
    let interior: Vec<f64> = ok
        .iter()
        .filter(|f| !f.boundary)
        .filter_map(|f| f.penalty)
        .collect();
    let (interior_penalty_mean, interior_penalty_sd) = mean_sd(&interior);
    OrderStats {
        m,
        fits: ok.len(),
        failures: outcomes.len() - ok.len(),
        boundary_rate: if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().filter(|f| f.boundary).count() as f64 / ok.len() as f64
        },
        penalty_mean,
        penalty_sd,
        penalty_excluded: ok.len() - pens.len(),
        interior_penalty_mean,
        interior_penalty_sd,
        interior_penalty_used: interior.len(),
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Aggregates the replicates of one cell, in replicate order.
pub fn summarize_cell(
    campaign: &SimCampaign,
    cell: CellSpec,
    outcomes: &[ReplicateOutcome],
) -> CellSummary {
    let truth = [campaign.mu, campaign.concentration, cell.lambda];
    let ests: Vec<[f64; 3]> = outcomes
        .iter()
        .filter_map(|o| o.at_true_m.map(|f| f.estimates))
        .collect();
    let mut mean = [f64::NAN; 3];
    let mut rmse = [f64::NAN; 3];
    let mut se = [f64::NAN; 3];
    for k in 0..3 {
        let errs: Vec<f64> = ests
            .iter()
            .map(|e| {
                if k == 0 {
                    wrap_angle(e[0] - truth[0])
                } else {
                    e[k] - truth[k]
                }
            })
            .collect();
        if errs.is_empty() {
            continue;
        }
        let (m, sd) = mean_sd(&errs);
        mean[k] = truth[k] + m;
        rmse[k] = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
        se[k] = sd / (errs.len() as f64).sqrt();
    }

    let true_outcomes: Vec<Option<FitOutcome>> = outcomes.iter().map(|o| o.at_true_m).collect();
    let grid = if campaign.selection {
        campaign.m_grid.clone()
    } else {
        Vec::new()
    };
    let mut selected_mll = vec![0; grid.len()];
    let mut selected_tic = vec![0; grid.len()];
    let (mut unselected_mll, mut unselected_tic) = (0, 0);
    for o in outcomes {
        let argmin = |key: &dyn Fn(&FitOutcome) -> Option<f64>| {
            let mut best: Option<(usize, f64)> = None;
            for (i, f) in o.grid.iter().enumerate() {
                if let Some(v) = f.as_ref().and_then(key) {
                    if best.is_none_or(|(_, b)| v < b) {
                        best = Some((i, v));
                    }
                }
            }
            best.map(|(i, _)| i)
        };
        match argmin(&|f| Some(-f.loglik)) {
            Some(i) => selected_mll[i] += 1,
            None => unselected_mll += 1,
        }
        match argmin(&|f| f.tic) {
            Some(i) => selected_tic[i] += 1,
            None => unselected_tic += 1,
        }
    }
    if grid.is_empty() {
        unselected_mll = 0;
        unselected_tic = 0;
    }
    let per_order = grid
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let col: Vec<Option<FitOutcome>> = outcomes.iter().map(|o| o.grid[i]).collect();
            order_stats(m, &col)
        })
        .collect();

    CellSummary {
        cell,
        family: campaign.family,
        m: campaign.m,
        replicates: outcomes.len(),
        truth,
        mean,
        rmse,
        se,
        at_true_m: order_stats(campaign.m, &true_outcomes),
        m_grid: grid,
        selected_mll,
        selected_tic,
        unselected_mll,
        unselected_tic,
        per_order,
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EssError::InvalidConfig(format!("cannot start {workers} workers: {e}")))
}

/// Runs the listed cells with `workers` threads (0 = one per core).
pub fn run_cells(
    campaign: &SimCampaign,
    cells: &[usize],
    workers: usize,
) -> Result<Vec<CellSummary>> {
    campaign.validate()?;
    let all = campaign.cells();
    let specs: Vec<CellSpec> = cells
        .iter()
        .map(|&c| {
            all.get(c).copied().ok_or_else(|| {
                EssError::InvalidConfig(format!(
                    "cell {c} out of range (campaign has {})",
                    all.len()
                ))
            })
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|i| (0..campaign.replicates).map(move |r| (i, r)))
        .collect();
    let outcomes: Vec<Result<ReplicateOutcome>> = pool(workers)?.install(|| {
        jobs.par_iter()
            .map(|&(i, r)| run_replicate(campaign, &specs[i], r))
            .collect()
    });
    let mut outcomes = outcomes.into_iter();
    specs
        .iter()
        .map(|&spec| {
            let chunk: Vec<ReplicateOutcome> = outcomes
                .by_ref()
                .take(campaign.replicates)
                .collect::<Result<_>>()?;
            Ok(summarize_cell(campaign, spec, &chunk))
        })
        .collect()
}

/// Runs every cell of the campaign.
pub fn run_campaign(campaign: &SimCampaign, workers: usize) -> Result<Vec<CellSummary>> {
    let all: Vec<usize> = (0..campaign.cells().len()).collect();
    run_cells(campaign, &all, workers)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyPoint {
    pub m: usize,
    pub mean: f64,
    pub sd: f64,
    pub used: usize,
    pub excluded: usize,
    /// As above over non-boundary fits only.
    pub interior_mean: f64,
    pub interior_sd: f64,
    pub interior_used: usize,
}

/// Mean and SD of `tr(J^-1 I)` per fitted order in a completed cell.
pub fn penalty_curve(cell: &CellSummary) -> Result<Vec<PenaltyPoint>> {
    let points: Vec<PenaltyPoint> = cell
        .per_order
        .iter()
        .filter(|o| o.fits > o.penalty_excluded)
        .map(|o| PenaltyPoint {
            m: o.m,
            mean: o.penalty_mean,
            sd: o.penalty_sd,
            used: o.fits - o.penalty_excluded,
            excluded: o.penalty_excluded,
            interior_mean: o.interior_penalty_mean,
            interior_sd: o.interior_penalty_sd,
            interior_used: o.interior_penalty_used,
        })
        .collect();
    if points.is_empty() {
        return Err(EssError::InsufficientData { needed: 1, got: 0 });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimCampaign {
        SimCampaign::from_toml_str(
            r#"
            family = "wc"
            concentration = 0.8
            lambdas = [0.5]
            m = 1
            n_grid = [60]
            replicates = 6
            m_grid = [0, 1]
            master_seed = 5
            "#,
        )
        .unwrap()
    }

    #[test]
    fn config_defaults_and_errors() {
        let c = small();
        assert_eq!(c.cells().len(), 1);
        assert!(c.selection);
        assert!(SimCampaign::from_toml_str(
            "family = \"wc\"\nconcentration = 0.8\nlambdas = []\nm = 1"
        )
        .is_err());
        assert!(SimCampaign::from_toml_str(
            "family = \"xx\"\nconcentration = 0.8\nlambdas = [0.1]\nm = 1"
        )
        .is_err());
        assert!(SimCampaign::from_toml_str(
            "family = \"wc\"\nconcentration = 0.8\nlambdas = [0.1]\nm = 1\nbogus = 3"
        )
        .is_err());
        let d = SimCampaign::from_toml_str(
            "family = \"vm\"\nconcentration = 2\nlambdas = [0.1]\nm = 2",
        )
        .unwrap();
        assert_eq!(d.n_grid, vec![100, 200, 500]);
        assert_eq!(d.replicates, 1000);
        assert_eq!(d.m_grid, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let c = small();
        let a = run_campaign(&c, 1).unwrap();
        let b = run_campaign(&c, 3).unwrap();
        assert_eq!(a, b);
        let s = &a[0];
        assert_eq!(s.selected_mll.iter().sum::<usize>() + s.unselected_mll, 6);
        assert_eq!(s.selected_tic.iter().sum::<usize>() + s.unselected_tic, 6);
        assert!((0.0..=1.0).contains(&s.at_true_m.boundary_rate));
    }

    #[test]
    fn streams_are_distinct() {
        use rand::Rng;
        let a: u64 = replicate_rng(1, 0, 0).random();
        let b: u64 = replicate_rng(1, 0, 1).random();
        let c: u64 = replicate_rng(1, 1, 0).random();
        assert!(a != b && a != c && b != c);
        assert_eq!(a, replicate_rng(1, 0, 0).random::<u64>());
    }

    #[test]
    fn empty_penalty_curve_errors() {
        let mut c = small();
        c.selection = false;
        let s = run_campaign(&c, 1).unwrap();
        assert!(penalty_curve(&s[0]).is_err());
    }
}
