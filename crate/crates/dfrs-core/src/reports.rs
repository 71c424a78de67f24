//! Deterministic CSV artifact writers.
//!
//! All real numbers are written with 17 significant digits, `.` decimal
//! separator, no locale dependence, so byte-identical inputs produce
//! byte-identical files and artifact hashes are reproducible. Coordinate
//! vectors written into a single `x_coords` column are space-joined;
//! schemas with per-axis columns name them `x_1..x_d`.

use crate::analysis::{pointwise_mse_bound, ExperimentResult, ScalingTable};
use crate::error::Error;
use crate::fields::FieldModel;
use crate::geometry::{Deployment, SanovBound};
use crate::reconstruction::FieldEstimate;
use crate::sensing::EquivalenceReport;
use crate::Result;
use std::io::Write;
use std::path::Path;

/// 17 significant digits, sign-stable, locale-free.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn coords(x: &[f64]) -> String {
    x.iter().map(|v| real(*v)).collect::<Vec<_>>().join(" ")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut buf = String::new();
    for line in lines {
        buf.push_str(line);
        buf.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    f.write_all(buf.as_bytes()).map_err(io_err(path))?;
    Ok(())
}

/// Per-point Monte Carlo results.
pub fn write_results_csv(
    path: &Path,
    experiment_id: &str,
    result: &ExperimentResult,
) -> Result<()> {
    let mut lines = vec![
        "experiment_id,t,x_coords,trials,mse,mse_stderr,bias,var,bound_local,bound_global"
            .to_string(),
    ];
    for p in &result.points {
        lines.push(format!(
            "{},{},{},{},{},{},{},{},{},{}",
            experiment_id,
            p.t,
            coords(&p.x),
            result.trials,
            real(p.mse),
            real(p.mse_stderr),
            real(p.bias),
            real(p.var),
            real(p.bound_local),
            real(p.bound_global),
        ));
    }
    write_lines(path, &lines)
}

/// Scaling sweep rows.
pub fn write_scaling_csv(path: &Path, table: &ScalingTable) -> Result<()> {
    let mut lines = vec!["N,L,M,worst_mse,bound,slope_running".to_string()];
    for row in &table.rows {
        lines.push(format!(
            "{},{},{},{},{},{}",
            row.n_total,
            row.l_count,
            row.m_count,
            real(row.worst_mse),
            real(row.bound),
            real(row.slope_running),
        ));
    }
    write_lines(path, &lines)
}

/// Sensor positions and their cells; 1-based sensor ids to match the
/// 1-based cell labels.
pub fn write_deployment_csv(path: &Path, deployment: &Deployment) -> Result<()> {
    let d = deployment.partition().d();
    let mut header = String::from("sensor_id");
    for axis in 1..=d {
        header.push_str(&format!(",x_{axis}"));
    }
    header.push_str(",supercell,subcell");
    let mut lines = vec![header];
    for i in 0..deployment.sensor_count() {
        let (j, k) = deployment.cell_of(i);
        let mut line = format!("{}", i + 1);
        for v in deployment.position(i) {
            line.push(',');
            line.push_str(&real(*v));
        }
        line.push_str(&format!(",{j},{k}"));
        lines.push(line);
    }
    write_lines(path, &lines)
}

/// The round-robin subcell schedule.
pub fn write_schedule_csv(path: &Path, m_count: usize, t_count: usize) -> Result<()> {
    let mut lines = vec!["t,active_subcell".to_string()];
    for t in 1..=t_count {
        lines.push(format!("{},{}", t, crate::coding::active_subcell(t, m_count)));
    }
    write_lines(path, &lines)
}

/// A reconstructed field, one row per `(t, supercell)`.
pub fn write_estimate_csv(path: &Path, estimate: &FieldEstimate) -> Result<()> {
    let l_count = estimate.partition().supercell_count();
    let mut lines = vec!["t,supercell_j,s_hat".to_string()];
    for t in 1..=estimate.snapshots() {
        for j in 1..=l_count {
            lines.push(format!("{},{},{}", t, j, real(estimate.value(t, j))));
        }
    }
    write_lines(path, &lines)
}

/// True field vs reconstruction over an evaluation grid.
pub fn write_grid_eval_csv(
    path: &Path,
    field: &FieldModel,
    estimate: &FieldEstimate,
    grid: &[Vec<f64>],
    snapshots: &[usize],
) -> Result<()> {
    let d = field.d();
    let mut header = String::from("t");
    for axis in 1..=d {
        header.push_str(&format!(",x_{axis}"));
    }
    header.push_str(",s_true,s_hat,abs_err");
    let mut lines = vec![header];
    for &t in snapshots {
        for x in grid {
            let s_true = field.evaluate(x, t)?;
            let s_hat = estimate.evaluate(x, t)?;
            let mut line = format!("{t}");
            for v in x {
                line.push(',');
                line.push_str(&real(*v));
            }
            line.push_str(&format!(
                ",{},{},{}",
                real(s_true),
                real(s_hat),
                real((s_hat - s_true).abs())
            ));
            lines.push(line);
        }
    }
    write_lines(path, &lines)
}

/// Quantizer-equivalence sweep, one row per probe value, with the shared
/// tolerance and per-row worst deviation.
pub fn write_equivalence_csv(path: &Path, report: &EquivalenceReport) -> Result<()> {
    let mut lines =
        vec!["y,expected,threshold_mean,expansion_mean,deviation,tolerance,pass".to_string()];
    for (i, &y) in report.y_grid.iter().enumerate() {
        let expected = report.expected[i];
        let thr = report.threshold_means[i];
        let exp = report.expansion_means[i];
        let dev = (thr - expected)
            .abs()
            .max((exp - expected).abs())
            .max((thr - exp).abs());
        lines.push(format!(
            "{},{},{},{},{},{},{}",
            real(y),
            real(expected),
            real(thr),
            real(exp),
            real(dev),
            real(report.tolerance),
            dev < report.tolerance,
        ));
    }
    write_lines(path, &lines)
}

/// Near-uniformity failure rate against the large-deviations bound.
pub fn write_sanov_csv(
    path: &Path,
    n_total: usize,
    cells: usize,
    delta: f64,
    trials: usize,
    empirical_failure_rate: f64,
    bound: &SanovBound,
) -> Result<()> {
    let lines = vec![
        "N,cells,delta,trials,empirical_failure_rate,bound,divergence,degenerate".to_string(),
        format!(
            "{},{},{},{},{},{},{},{}",
            n_total,
            cells,
            real(delta),
            trials,
            real(empirical_failure_rate),
            real(bound.probability),
            real(bound.divergence),
            bound.degenerate,
        ),
    ];
    write_lines(path, &lines)
}

/// Analytic bound tabulation over a grid; the variance term is listed
/// separately so constant-field rows expose `L M c^2 / N` directly.
pub fn write_bounds_csv(
    path: &Path,
    field: &FieldModel,
    l_count: usize,
    m_count: usize,
    n_total: usize,
    c: f64,
    grid: &[Vec<f64>],
    snapshots: &[usize],
) -> Result<()> {
    let var_term = (l_count * m_count) as f64 * c * c / n_total as f64;
    let mut lines = vec!["t,x_coords,var_term,bound_local,bound_global".to_string()];
    for &t in snapshots {
        for x in grid {
            let (local, global) = pointwise_mse_bound(field, l_count, m_count, n_total, c, x, t)?;
            lines.push(format!(
                "{},{},{},{},{}",
                t,
                coords(x),
                real(var_term),
                real(local),
                real(global),
            ));
        }
    }
    write_lines(path, &lines)
}
