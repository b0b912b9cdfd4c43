use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use esscirc::dataset::Provenance;
use esscirc::experiments::{export_tables, render_text};
use esscirc::{
    circular_skewness, fit_mle, ingest, moments, run_campaign, sample_circular_stats,
    select_order_with, skewness_range, symmetry_test, AngleDataset, AngleUnit, BaseFamily,
    EssModel, FitConfig, SampleStats, SimCampaign,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "esscirc",
    version,
    about = "Extended sine-skewed circular distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density on an equispaced grid over [-pi, pi), as CSV.
    Density {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 361)]
        grid: usize,
    },
    /// Trigonometric moment of order p, mean direction, mean resultant
    /// length and circular skewness, as JSON.
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        p: i64,
    },
    /// Attainable skewness range at order m (von Mises base only).
    SkewRange {
        #[arg(long, default_value = "vm")]
        family: BaseFamily,
        #[arg(long)]
        m: usize,
    },
    /// Random draws, one angle per line, in radians.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Maximum-likelihood fit at a fixed order, as JSON.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        family: BaseFamily,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.0)]
        delta_lambda: f64,
    },
    /// Fits every order on a grid and reports the AIC and TIC choices.
    Select {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        family: BaseFamily,
        /// `a..b` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "0..4")]
        m_grid: String,
        #[arg(long, default_value_t = 0.0)]
        delta_lambda: f64,
        #[arg(long)]
        json: bool,
    },
    /// Size, post-transform SHA-256 and circular summary of an angle file,
    /// as JSON. Use it to confirm a dataset was placed and read correctly.
    Inspect {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Large-sample test of reflective symmetry, as JSON.
    Symmetry {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Runs a Monte Carlo campaign and writes its tables.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; 0 uses one per core.
        #[arg(long, env = "ESS_WORKERS")]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    family: BaseFamily,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu: f64,
    /// kappa for von Mises, rho for wrapped Cauchy.
    #[arg(long)]
    conc: f64,
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    m: usize,
}

impl ModelArgs {
    fn model(&self) -> Result<EssModel> {
        Ok(EssModel::from_family(
            self.family,
            self.mu,
            self.conc,
            self.lambda,
            self.m,
        )?)
    }
}

#[derive(Args)]
struct DataArgs {
    /// File of angles: whitespace, comma or semicolon separated, `#` comments.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "radians")]
    unit: AngleUnit,
    /// Added after unit conversion; defaults to -pi for degrees, 0 for radians.
    #[arg(long, allow_negative_numbers = true)]
    shift: Option<f64>,
}

impl DataArgs {
    fn dataset(&self) -> Result<AngleDataset> {
        ingest(&self.data, self.unit, self.shift)
            .with_context(|| format!("reading {}", self.data.display()))
    }

    fn angles(&self) -> Result<Vec<f64>> {
        Ok(self.dataset()?.angles)
    }
}

fn parse_grid(s: &str) -> Result<Vec<usize>> {
    let grid: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty order range {s}");
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse())
            .collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        bail!("empty order grid");
    }
    Ok(grid)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct InspectOut {
    name: String,
    n: usize,
    sha256: String,
    provenance: Provenance,
    sample_stats: SampleStats,
}

#[derive(Serialize)]
struct MomentsOut {
    p: i64,
    alpha: f64,
    beta: f64,
    mean_direction: f64,
    mean_resultant_length: f64,
    skewness: Option<f64>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Density { model, grid } => {
            if grid == 0 {
                bail!("--grid must be positive");
            }
            let model = model.model()?;
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(["theta", "density"])?;
            for i in 0..grid {
                let t = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / grid as f64;
                w.write_record([t.to_string(), model.density(t).to_string()])?;
            }
            w.flush()?;
        }
        Command::Moments { model, p } => {
            let model = model.model()?;
            let tm = moments(&model, p)?;
            print_json(&MomentsOut {
                p,
                alpha: tm.alpha,
                beta: tm.beta,
                mean_direction: tm.md,
                mean_resultant_length: tm.mrl,
                skewness: circular_skewness(&model).ok(),
            })?;
        }
        Command::SkewRange { family, m } => {
            let r = skewness_range(family, m)?;
            println!("m\ts_min\ts_max\tkappa\tlambda");
            println!(
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}",
                r.m, r.s_min, r.s_max, r.argmax_concentration, r.argmax_lambda
            );
        }
        Command::Sample { model, n, seed } => {
            let model = model.model()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = BufWriter::new(io::stdout().lock());
            for t in model.sample(n, &mut rng) {
                writeln!(out, "{t}")?;
            }
            out.flush()?;
        }
        Command::Fit {
            data,
            family,
            m,
            delta_lambda,
        } => {
            let config = FitConfig::new(family, m).with_delta_lambda(delta_lambda);
            print_json(&fit_mle(&data.angles()?, &config)?)?;
        }
        Command::Select {
            data,
            family,
            m_grid,
            delta_lambda,
            json,
        } => {
            let grid = parse_grid(&m_grid)?;
            let template = FitConfig::new(family, 0).with_delta_lambda(delta_lambda);
            let sel = select_order_with(&data.angles()?, &template, &grid)?;
            if json {
                print_json(&sel)?;
            } else {
                let conc = family.concentration_name();
                println!("family {family}");
                println!("m\tmu\t{conc}\tlambda\tloglik\tAIC\tTIC\tpenalty");
                for f in &sel.fits {
                    match &f.report {
                        Some(r) => {
                            let mark = |on: bool| if on { "*" } else { "" };
                            let opt = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.6}"));
                            println!(
                                "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}{}\t{}{}\t{}",
                                f.m,
                                r.mu,
                                r.concentration,
                                r.lambda,
                                r.loglik_total,
                                r.aic,
                                mark(sel.m_mll == Some(f.m)),
                                opt(r.tic),
                                mark(sel.m_tic == Some(f.m)),
                                opt(r.tic_penalty),
                            );
                        }
                        None => println!("{}\tfailed: {}", f.m, f.error.as_deref().unwrap_or("")),
                    }
                }
                let show = |m: Option<usize>| m.map_or("none".into(), |m| m.to_string());
                println!("AIC selects m = {}", show(sel.m_mll));
                println!("TIC selects m = {}", show(sel.m_tic));
            }
        }
        Command::Inspect { data } => {
            let ds = data.dataset()?;
            print_json(&InspectOut {
                sample_stats: sample_circular_stats(&ds.angles)?,
                n: ds.len(),
                sha256: ds.checksum(),
                name: ds.name,
                provenance: ds.provenance,
            })?;
        }
        Command::Symmetry { data } => print_json(&symmetry_test(&data.angles()?)?)?,
        Command::Simulate {
            config,
            workers,
            out,
        } => {
            let campaign = SimCampaign::from_file(&config)?;
            let workers = workers.or(campaign.workers).unwrap_or(0);
            let summaries = run_campaign(&campaign, workers)?;
            let files = export_tables(&summaries, &out)?;
            print!("{}", render_text(&summaries));
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}
