//! Config-driven experiment runner.
//!
//! Subcommands: `simulate`, `scaling`, `equivalence`, `deploy`, `bounds`.
//! Each reads a flat `section.key = value` config file, writes CSV
//! artifacts plus a `manifest.json` with content hashes into the output
//! directory, and prints a one-line summary.
//!
//! Exit codes: 0 success, 2 config error, 3 model-consistency error,
//! 4 runtime numerical or I/O error. Output bytes are identical for any
//! `--workers` value and fixed seed.

use clap::{Args, Parser, Subcommand};
use dfrs_core::analysis::{mse_monte_carlo, scaling_experiment};
use dfrs_core::config::{
    build_bounds, build_deploy, build_equivalence, build_experiment, build_scaling, resolve_seed,
    RawConfig,
};
use dfrs_core::error::Error;
use dfrs_core::geometry::{deploy_iid_uniform, sanov_bound, DeploymentMode};
use dfrs_core::manifest::RunManifest;
use dfrs_core::reconstruction::full_pipeline;
use dfrs_core::reports;
use dfrs_core::seeds::{child_seed, DOMAIN_TRIAL};
use dfrs_core::sensing::equivalence_test;
use dfrs_core::Result;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "dfrs",
    about = "Simulator for field reconstruction from one-bit randomized-threshold sensor networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (flat `section.key = value` text).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $DFRS_OUT, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel trials (default: all cores). Outputs
    /// are bit-identical for every value.
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed; overrides the config's `seed` key.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the end-to-end pipeline once, then Monte Carlo the MSE.
    Simulate(RunArgs),
    /// Sweep the sensor count and fit the log-log MSE slope.
    Scaling(RunArgs),
    /// Compare the two one-bit quantizer constructions head to head.
    Equivalence(RunArgs),
    /// Export a deployment; optionally measure near-uniformity failures.
    Deploy(RunArgs),
    /// Tabulate the analytic MSE bound over a grid.
    Bounds(RunArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let code = if e.is_config_error() {
            2
        } else if e.is_model_error() {
            3
        } else {
            4
        };
        std::process::exit(code);
    }
}

fn out_dir(args: &RunArgs) -> Result<PathBuf> {
    let dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os("DFRS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    Ok(dir)
}

fn run(cli: Cli) -> Result<()> {
    let args = match &cli.command {
        Command::Simulate(a)
        | Command::Scaling(a)
        | Command::Equivalence(a)
        | Command::Deploy(a)
        | Command::Bounds(a) => a,
    };
    if let Some(k) = args.workers {
        // Ignore the error from an already-built pool: the pool can only
        // be installed once per process, and outputs do not depend on it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global();
    }
    let dir = out_dir(args)?;
    let mut raw = RawConfig::from_file(&args.config)?;
    let (seed, generated) = resolve_seed(&mut raw, args.seed)?;
    let name = match &cli.command {
        Command::Simulate(_) => "simulate",
        Command::Scaling(_) => "scaling",
        Command::Equivalence(_) => "equivalence",
        Command::Deploy(_) => "deploy",
        Command::Bounds(_) => "bounds",
    };
    let mut manifest = RunManifest::new(
        name,
        &args.config.display().to_string(),
        &dir.display().to_string(),
        seed,
        generated,
    );
    match &cli.command {
        Command::Simulate(_) => cmd_simulate(&mut raw, seed, &dir, &mut manifest, &args.config)?,
        Command::Scaling(_) => cmd_scaling(&mut raw, seed, &dir, &mut manifest)?,
        Command::Equivalence(_) => cmd_equivalence(&mut raw, seed, &dir, &mut manifest)?,
        Command::Deploy(_) => cmd_deploy(&mut raw, seed, &dir, &mut manifest)?,
        Command::Bounds(_) => cmd_bounds(&mut raw, &dir, &mut manifest)?,
    }
    let manifest_path = dir.join("manifest.json");
    manifest.write(&manifest_path)?;
    println!("manifest: {}", manifest_path.display());
    Ok(())
}

fn add(manifest: &mut RunManifest, path: &Path) -> Result<()> {
    manifest.push_artifact(path)
}

fn cmd_simulate(
    raw: &mut RawConfig,
    seed: u64,
    dir: &Path,
    manifest: &mut RunManifest,
    config_path: &Path,
) -> Result<()> {
    let cfg = build_experiment(raw, seed)?;
    raw.finish()?;
    manifest.sensor_count = Some(cfg.deployment.sensor_count());

    // One full end-to-end pass through the wire format, using the same
    // seed as Monte Carlo trial 0 so the demo estimate is one of the
    // measured trials.
    let (estimate, batch) = full_pipeline(
        &cfg.field,
        &cfg.deployment,
        &cfg.noise,
        &cfg.threshold,
        child_seed(seed, DOMAIN_TRIAL, 0),
    )?;
    let messages = dir.join("messages.bin");
    std::fs::write(&messages, &batch).map_err(|source| Error::Io {
        path: messages.display().to_string(),
        source,
    })?;
    let estimate_csv = dir.join("estimate.csv");
    reports::write_estimate_csv(&estimate_csv, &estimate)?;
    let grid_eval = dir.join("grid_eval.csv");
    reports::write_grid_eval_csv(
        &grid_eval,
        &cfg.field,
        &estimate,
        &cfg.grid,
        &cfg.eval_snapshots,
    )?;
    let schedule = dir.join("schedule.csv");
    reports::write_schedule_csv(
        &schedule,
        cfg.deployment.partition().subcell_count(),
        cfg.field.snapshots(),
    )?;

    let result = mse_monte_carlo(&cfg)?;
    let results_csv = dir.join("results.csv");
    let experiment_id = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".to_string());
    reports::write_results_csv(&results_csv, &experiment_id, &result)?;

    for p in [&results_csv, &estimate_csv, &grid_eval, &schedule, &messages] {
        add(manifest, p)?;
    }
    let worst = result.points.iter().map(|p| p.mse).fold(0.0, f64::max);
    println!(
        "simulate: N={} trials={} points={} worst_mse={:.6e} wall={:.2}s",
        cfg.deployment.sensor_count(),
        result.trials,
        result.points.len(),
        worst,
        result.wall_secs,
    );
    Ok(())
}

fn cmd_scaling(
    raw: &mut RawConfig,
    seed: u64,
    dir: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let (n_list, rule, tpl) = build_scaling(raw, seed)?;
    raw.finish()?;
    let table = scaling_experiment(&n_list, rule, &tpl)?;
    let path = dir.join("scaling.csv");
    reports::write_scaling_csv(&path, &table)?;
    add(manifest, &path)?;
    println!(
        "scaling: rows={} slope={:.4} (log2 MSE vs log2 N)",
        table.rows.len(),
        table.slope
    );
    Ok(())
}

fn cmd_equivalence(
    raw: &mut RawConfig,
    seed: u64,
    dir: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let spec = build_equivalence(raw)?;
    raw.finish()?;
    let report = equivalence_test(spec.c, spec.points, spec.trials, seed)?;
    let path = dir.join("equivalence.csv");
    reports::write_equivalence_csv(&path, &report)?;
    add(manifest, &path)?;
    println!(
        "equivalence: points={} trials={} max_dev={:.3e} tolerance={:.3e} pass={}",
        spec.points,
        spec.trials,
        report
            .max_dev_threshold
            .max(report.max_dev_expansion)
            .max(report.max_dev_cross),
        report.tolerance,
        report.pass,
    );
    Ok(())
}

fn cmd_deploy(
    raw: &mut RawConfig,
    seed: u64,
    dir: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let spec = build_deploy(raw, seed)?;
    raw.finish()?;
    manifest.sensor_count = Some(spec.deployment.sensor_count());
    let dep_csv = dir.join("deployment.csv");
    reports::write_deployment_csv(&dep_csv, &spec.deployment)?;
    add(manifest, &dep_csv)?;
    let n_total = spec.deployment.sensor_count();
    let mut summary = format!(
        "deploy: N={} cells={}",
        n_total,
        spec.partition.cell_count()
    );
    if let Some(delta) = spec.delta {
        if !matches!(spec.deployment.mode(), DeploymentMode::IidUniform { .. }) {
            return Err(Error::InvalidParameter {
                name: "deploy.delta",
                reason: "near-uniformity failure rates need deployment.mode = iid_uniform".into(),
            });
        }
        let bound = sanov_bound(
            n_total,
            spec.partition.supercell_count(),
            spec.partition.subcell_count(),
            delta,
        )?;
        let mut failures = 0usize;
        for trial in 0..spec.trials {
            let d = deploy_iid_uniform(
                &spec.partition,
                n_total,
                child_seed(seed, DOMAIN_TRIAL, trial as u64),
            )?;
            if !d.check_near_uniform(1.0 - delta)? {
                failures += 1;
            }
        }
        let rate = failures as f64 / spec.trials as f64;
        let sanov_csv = dir.join("sanov.csv");
        reports::write_sanov_csv(
            &sanov_csv,
            n_total,
            spec.partition.cell_count(),
            delta,
            spec.trials,
            rate,
            &bound,
        )?;
        add(manifest, &sanov_csv)?;
        summary.push_str(&format!(
            " delta={} failure_rate={:.4e} bound={:.4e}",
            delta, rate, bound.probability
        ));
    }
    println!("{summary}");
    Ok(())
}

fn cmd_bounds(raw: &mut RawConfig, dir: &Path, manifest: &mut RunManifest) -> Result<()> {
    let spec = build_bounds(raw)?;
    raw.finish()?;
    manifest.sensor_count = Some(spec.n_total);
    let path = dir.join("bounds.csv");
    reports::write_bounds_csv(
        &path,
        &spec.field,
        spec.partition.supercell_count(),
        spec.partition.subcell_count(),
        spec.n_total,
        spec.c,
        &spec.grid,
        &spec.snapshots,
    )?;
    add(manifest, &path)?;
    println!(
        "bounds: N={} L={} M={} rows={}",
        spec.n_total,
        spec.partition.supercell_count(),
        spec.partition.subcell_count(),
        spec.grid.len() * spec.snapshots.len()
    );
    Ok(())
}
