use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{penalty_curve, CellSummary};
use crate::error::{EssError, Result};

fn csv_err(e: csv::Error) -> EssError {
    EssError::Io(e.to_string())
}

fn num(v: f64) -> String {
    v.to_string()
}

/// Distinct values in first-seen order.
fn distinct<T: PartialEq + Copy>(it: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for v in it {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes into `dir`:
///
/// * `estimates.csv`: one `mean` and one `rmse` row per true `lambda`,
///   three parameter columns per sample size;
/// * `selection.csv`: per cell and criterion, counts per order plus the
///   replicates without an admissible fit;
/// * `boundary.csv`: per cell, boundary rate per fitted order;
/// * `penalty.csv`: plot data `(m, mean, sd)` of the TIC penalty per cell,
///   over all fits and over non-boundary fits;
/// * `summary.txt` and `cells.json`.
///
/// Output depends only on `summaries`, so equal runs give identical files.
pub fn export_tables(summaries: &[CellSummary], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    if summaries.is_empty() {
        return Err(EssError::InsufficientData { needed: 1, got: 0 });
    }
    let conc = summaries[0].family.concentration_name();
    let lambdas = distinct(summaries.iter().map(|s| s.cell.lambda));
    let ns = distinct(summaries.iter().map(|s| s.cell.n));
    let grid = summaries[0].m_grid.clone();
    let mut written = Vec::new();

    let mut header = vec!["lambda".to_string(), "stat".to_string()];
    for n in &ns {
        for p in ["mu", conc, "lambda"] {
            header.push(format!("n{n}_{p}"));
        }
    }
    let mut rows = Vec::new();
    for &l in &lambdas {
        for stat in ["mean", "rmse"] {
            let mut row = vec![num(l), stat.to_string()];
            for &n in &ns {
                let cell = summaries
                    .iter()
                    .find(|s| s.cell.lambda == l && s.cell.n == n);
                for k in 0..3 {
                    row.push(cell.map_or(String::new(), |s| {
                        num(if stat == "mean" { s.mean[k] } else { s.rmse[k] })
                    }));
                }
            }
            rows.push(row);
        }
    }
    let path = dir.join("estimates.csv");
    write_csv(&path, &header, &rows)?;
    written.push(path);

    let mut header = vec!["lambda".into(), "n".into(), "criterion".into()];
    header.extend(grid.iter().map(|m| format!("m{m}")));
    header.push("none".into());
    let mut rows = Vec::new();
    for s in summaries {
        for (crit, counts, none) in [
            ("mll", &s.selected_mll, s.unselected_mll),
            ("tic", &s.selected_tic, s.unselected_tic),
        ] {
            let mut row = vec![num(s.cell.lambda), s.cell.n.to_string(), crit.to_string()];
            row.extend(counts.iter().map(|c| c.to_string()));
            row.push(none.to_string());
            rows.push(row);
        }
    }
    let path = dir.join("selection.csv");
    write_csv(&path, &header, &rows)?;
    written.push(path);

    let mut header = vec!["lambda".into(), "n".into()];
    header.extend(grid.iter().map(|m| format!("m{m}")));
    let rows: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| {
            let mut row = vec![num(s.cell.lambda), s.cell.n.to_string()];
            row.extend(s.per_order.iter().map(|o| num(o.boundary_rate)));
            row
        })
        .collect();
    let path = dir.join("boundary.csv");
    write_csv(&path, &header, &rows)?;
    written.push(path);

    let header: Vec<String> = [
        "lambda",
        "n",
        "m",
        "mean",
        "sd",
        "used",
        "excluded",
        "interior_mean",
        "interior_sd",
        "interior_used",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::new();
    for s in summaries {
        for p in penalty_curve(s).unwrap_or_default() {
            rows.push(vec![
                num(s.cell.lambda),
                s.cell.n.to_string(),
                p.m.to_string(),
                num(p.mean),
                num(p.sd),
                p.used.to_string(),
                p.excluded.to_string(),
                num(p.interior_mean),
                num(p.interior_sd),
                p.interior_used.to_string(),
            ]);
        }
    }
    let path = dir.join("penalty.csv");
    write_csv(&path, &header, &rows)?;
    written.push(path);

    let path = dir.join("summary.txt");
    std::fs::write(&path, render_text(summaries))?;
    written.push(path);

    let path = dir.join("cells.json");
    let json = serde_json::to_string_pretty(summaries).map_err(|e| EssError::Io(e.to_string()))?;
    std::fs::write(&path, json + "\n")?;
    written.push(path);

    Ok(written)
}

/// Plain-text tables for reading in a terminal.
pub fn render_text(summaries: &[CellSummary]) -> String {
    let mut out = String::new();
    let Some(first) = summaries.first() else {
        return out;
    };
    let conc = first.family.concentration_name();
    let _ = writeln!(
        out,
        "ESS-{} m={}  truth mu={} {}={}",
        first.family.to_string().to_uppercase(),
        first.m,
        first.truth[0],
        conc,
        first.truth[1]
    );
    let _ = writeln!(out, "\nEstimates at the true order");
    let _ = writeln!(
        out,
        "{:>8} {:>6} {:>5} | {:>10} {:>10} {:>10} | {:>10} {:>10} {:>10}",
        "lambda",
        "n",
        "fits",
        "mean mu",
        format!("mean {conc}"),
        "mean lam",
        "rmse mu",
        format!("rmse {conc}"),
        "rmse lam"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:>8.4} {:>6} {:>5} | {:>10.6} {:>10.6} {:>10.6} | {:>10.6} {:>10.6} {:>10.6}",
            s.cell.lambda,
            s.cell.n,
            s.at_true_m.fits,
            s.mean[0],
            s.mean[1],
            s.mean[2],
            s.rmse[0],
            s.rmse[1],
            s.rmse[2]
        );
    }
    if first.m_grid.is_empty() {
        return out;
    }
    let cols: String = first
        .m_grid
        .iter()
        .map(|m| format!(" {:>7}", format!("m={m}")))
        .collect();
    for (title, pick) in [
        ("Selected order (max log-likelihood / AIC)", 0),
        ("Selected order (TIC)", 1),
        ("Boundary rate |lambda_hat| > 0.99", 2),
        ("TIC penalty mean (sd)", 3),
    ] {
        let _ = writeln!(out, "\n{title}");
        let _ = writeln!(out, "{:>8} {:>6} |{cols}", "lambda", "n");
        for s in summaries {
            let cells: String = match pick {
                0 => s.selected_mll.iter().map(|c| format!(" {c:>7}")).collect(),
                1 => s.selected_tic.iter().map(|c| format!(" {c:>7}")).collect(),
                2 => s
                    .per_order
                    .iter()
                    .map(|o| format!(" {:>7.3}", o.boundary_rate))
                    .collect(),
                _ => s
                    .per_order
                    .iter()
                    .map(|o| format!(" {:>5.2}({:.2})", o.penalty_mean, o.penalty_sd))
                    .collect(),
            };
            let _ = writeln!(out, "{:>8.4} {:>6} |{cells}", s.cell.lambda, s.cell.n);
        }
    }
    out
}
