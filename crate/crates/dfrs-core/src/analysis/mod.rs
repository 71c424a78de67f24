//! Monte Carlo verification engine.
//!
//! Empirically measures the reconstruction's pointwise MSE, bias, and
//! variance and compares them against the analytic bound
//!
//! ```text
//! MSE(x, t) <= omega_t(sqrt(d) / L^(1/d), x)^2 + L M c^2 / N
//! ```
//!
//! plus the scaling laws that follow from it, the CLT of the normalized
//! errors, the Cramer-Rao lower bound computed by quadrature, and the
//! almost-sure convergence trend along nested sample paths.
//!
//! Determinism: every trial derives its RNG streams from (master seed,
//! trial index), results are collected in trial order, and reductions use
//! pairwise summation, so outputs are bit-identical for a fixed seed and
//! trial count regardless of worker count or scheduling.

use crate::coding::active_subcell;
use crate::error::Error;
use crate::fields::FieldModel;
use crate::geometry::{deploy_grid, per_subcell_count, CellPartition, Deployment};
use crate::reconstruction::estimate_direct;
use crate::seeds::{child_rng, child_seed, DOMAIN_AUX, DOMAIN_DEPLOYMENT, DOMAIN_TRIAL};
use crate::sensing::{NoiseModel, ThresholdModel};
use crate::Result;
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::ContinuousCDF;

/// Deterministic pairwise (cascade) summation.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

/// Ordinary least squares slope of `ys` against `xs`.
fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    sxy / sxx
}

/// The analytic MSE bound at `(x, t)`: returns `(local, global)` where
/// local uses the local modulus at `x` and global the global modulus, both
/// at radius `sqrt(d) / L^(1/d)`, plus the common variance term
/// `L M c^2 / N`.
///
/// The grid-oracle moduli carry small numerical error; the global value is
/// floored at the local one, which only tightens it toward the true
/// `omega_tilde >= omega(x)`.
pub fn pointwise_mse_bound(
    field: &FieldModel,
    l_count: usize,
    m_count: usize,
    n_total: usize,
    c: f64,
    x: &[f64],
    t: usize,
) -> Result<(f64, f64)> {
    if l_count == 0 || m_count == 0 || n_total == 0 {
        return Err(Error::InvalidParameter {
            name: "pointwise_mse_bound",
            reason: "L, M, N must all be positive".into(),
        });
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c",
            reason: format!("must be positive, got {c}"),
        });
    }
    let d = field.d();
    let delta = (d as f64).sqrt() / (l_count as f64).powf(1.0 / d as f64);
    let var_term = (l_count * m_count) as f64 * c * c / n_total as f64;
    let w_local = field.local_modulus(delta, x, t)?;
    let w_global = field.global_modulus(delta, t)?;
    let local = w_local * w_local + var_term;
    let global = (w_global * w_global + var_term).max(local);
    Ok((local, global))
}

/// Everything one Monte Carlo experiment needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub field: FieldModel,
    pub deployment: Deployment,
    pub noise: NoiseModel,
    pub threshold: ThresholdModel,
    /// Spatial evaluation points, each of length `d`.
    pub grid: Vec<Vec<f64>>,
    /// 1-based snapshots to evaluate at.
    pub eval_snapshots: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Per-subcell sensor count after checking the run is well-formed.
    fn validate(&self) -> Result<usize> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                reason: "need at least one trial".into(),
            });
        }
        if self.grid.is_empty() || self.eval_snapshots.is_empty() {
            return Err(Error::InvalidParameter {
                name: "grid/eval_snapshots",
                reason: "need at least one evaluation point and snapshot".into(),
            });
        }
        let p = self.deployment.partition();
        if self.field.d() != p.d() {
            return Err(Error::DimensionMismatch {
                what: "field vs deployment dimension",
                got: p.d(),
                expected: self.field.d(),
            });
        }
        for x in &self.grid {
            // Index lookup performs the cube and dimension checks.
            p.supercell_index(x)?;
        }
        for &t in &self.eval_snapshots {
            if t == 0 || t > self.field.snapshots() {
                return Err(Error::BadSnapshot {
                    t,
                    t_count: self.field.snapshots(),
                });
            }
        }
        if self.threshold.c() + 1e-9 < self.field.range() + self.noise.bound() {
            return Err(Error::InvalidParameter {
                name: "c",
                reason: format!(
                    "threshold half-range {} below a + b = {}",
                    self.threshold.c(),
                    self.field.range() + self.noise.bound()
                ),
            });
        }
        self.deployment.uniform_n().ok_or(Error::InvalidParameter {
            name: "deployment",
            reason: "Monte Carlo experiments need an exactly uniform deployment".into(),
        })
    }
}

/// Statistics at one `(x, t)` evaluation slot.
#[derive(Debug, Clone)]
pub struct PointStat {
    pub x: Vec<f64>,
    pub t: usize,
    pub s_true: f64,
    pub mse: f64,
    pub mse_stderr: f64,
    pub bias: f64,
    pub var: f64,
    pub bound_local: f64,
    pub bound_global: f64,
}

/// Result of one Monte Carlo experiment.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub points: Vec<PointStat>,
    pub trials: usize,
    pub seed: u64,
    pub wall_secs: f64,
}

/// Per-trial reconstruction values at the given `(grid index, snapshot)`
/// slots, trial-major, parallel over trials, deterministic in trial order.
fn per_trial_values(
    cfg: &ExperimentConfig,
    slots: &[(usize, usize)],
    trials: usize,
) -> Result<Vec<Vec<f64>>> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = child_seed(cfg.seed, DOMAIN_TRIAL, trial as u64);
            let est = estimate_direct(
                &cfg.field,
                &cfg.deployment,
                &cfg.noise,
                &cfg.threshold,
                trial_seed,
            )?;
            slots
                .iter()
                .map(|&(gi, t)| est.evaluate(&cfg.grid[gi], t))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Estimate pointwise MSE, bias, and variance by Monte Carlo over
/// independent trials, with the analytic bounds attached per point.
pub fn mse_monte_carlo(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let start = std::time::Instant::now();
    cfg.validate()?;
    let slots: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|gi| cfg.eval_snapshots.iter().map(move |&t| (gi, t)))
        .collect();
    let values = per_trial_values(cfg, &slots, cfg.trials)?;

    let p = cfg.deployment.partition();
    let (l_count, m_count) = (p.supercell_count(), p.subcell_count());
    let n_total = cfg.deployment.sensor_count();
    let c = cfg.threshold.c();
    let trials_f = cfg.trials as f64;

    let mut points = Vec::with_capacity(slots.len());
    let mut column = vec![0.0f64; cfg.trials];
    let mut scratch = vec![0.0f64; cfg.trials];
    for (slot, &(gi, t)) in slots.iter().enumerate() {
        let x = &cfg.grid[gi];
        let s_true = cfg.field.evaluate(x, t)?;
        for (trial, row) in values.iter().enumerate() {
            column[trial] = row[slot];
        }
        let mean = pairwise_sum(&column) / trials_f;
        let bias = mean - s_true;
        for (dst, &v) in scratch.iter_mut().zip(&column) {
            *dst = (v - s_true) * (v - s_true);
        }
        let mse = pairwise_sum(&scratch) / trials_f;
        for (dst, &v) in scratch.iter_mut().zip(&column) {
            *dst = (v - mean) * (v - mean);
        }
        let var = pairwise_sum(&scratch) / trials_f;
        for (dst, &v) in scratch.iter_mut().zip(&column) {
            *dst = ((v - s_true) * (v - s_true) - mse).powi(2);
        }
        let mse_stderr = (pairwise_sum(&scratch) / trials_f).sqrt() / trials_f.sqrt();
        let (bound_local, bound_global) =
            pointwise_mse_bound(&cfg.field, l_count, m_count, n_total, c, x, t)?;
        points.push(PointStat {
            x: x.clone(),
            t,
            s_true,
            mse,
            mse_stderr,
            bias,
            var,
            bound_local,
            bound_global,
        });
    }
    Ok(ExperimentResult {
        points,
        trials: cfg.trials,
        seed: cfg.seed,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

/// How the supercell count follows the sensor count in a scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LRule {
    /// Fixed per-axis supercell count.
    Fixed(usize),
    /// Per-axis `l = max(1, round(N^exponent))`.
    RoundPow(f64),
}

impl LRule {
    fn per_axis(&self, n_total: usize) -> usize {
        match *self {
            LRule::Fixed(l) => l,
            LRule::RoundPow(e) => ((n_total as f64).powf(e).round() as usize).max(1),
        }
    }
}

/// Shared configuration of a scaling sweep; the partition is rebuilt per
/// sensor count from the rule.
#[derive(Debug, Clone)]
pub struct ScalingTemplate {
    pub field: FieldModel,
    /// Subcells per axis.
    pub m: usize,
    pub noise: NoiseModel,
    pub threshold: ThresholdModel,
    pub grid: Vec<Vec<f64>>,
    pub eval_snapshots: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

/// One row of the scaling table.
#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub n_total: usize,
    pub l_count: usize,
    pub m_count: usize,
    /// Max empirical MSE over the evaluation grid.
    pub worst_mse: f64,
    /// Max global analytic bound over the evaluation grid.
    pub bound: f64,
    /// OLS slope of log2 MSE vs log2 N over the rows so far (NaN on the
    /// first row).
    pub slope_running: f64,
}

/// A scaling sweep with its final fitted slope.
#[derive(Debug, Clone)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    /// OLS slope over all rows.
    pub slope: f64,
}

/// Sweep the sensor count, measuring worst-grid MSE and fitting the
/// log-log slope against `N`.
pub fn scaling_experiment(
    n_list: &[usize],
    rule: LRule,
    tpl: &ScalingTemplate,
) -> Result<ScalingTable> {
    if n_list.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "n_list",
            reason: "need at least two sensor counts to fit a slope".into(),
        });
    }
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(n_list.len());
    let mut log_n = Vec::with_capacity(n_list.len());
    let mut log_mse = Vec::with_capacity(n_list.len());
    for (row_idx, &n_total) in n_list.iter().enumerate() {
        let l = rule.per_axis(n_total);
        let partition = CellPartition::new(tpl.field.d(), l, tpl.m)?;
        let n_per = per_subcell_count(n_total, &partition)?;
        let deployment = deploy_grid(&partition, n_per)?;
        let cfg = ExperimentConfig {
            field: tpl.field.clone(),
            deployment,
            noise: tpl.noise,
            threshold: tpl.threshold,
            grid: tpl.grid.clone(),
            eval_snapshots: tpl.eval_snapshots.clone(),
            trials: tpl.trials,
            seed: child_seed(tpl.seed, DOMAIN_AUX, row_idx as u64),
        };
        let result = mse_monte_carlo(&cfg)?;
        let worst_mse = result.points.iter().map(|p| p.mse).fold(0.0, f64::max);
        let bound = result
            .points
            .iter()
            .map(|p| p.bound_global)
            .fold(0.0, f64::max);
        log_n.push((n_total as f64).log2());
        log_mse.push(worst_mse.max(f64::MIN_POSITIVE).log2());
        let slope_running = if rows.is_empty() {
            f64::NAN
        } else {
            ols_slope(&log_n, &log_mse)
        };
        rows.push(ScalingRow {
            n_total,
            l_count: partition.supercell_count(),
            m_count: partition.subcell_count(),
            worst_mse,
            bound,
            slope_running,
        });
    }
    let slope = ols_slope(&log_n, &log_mse);
    Ok(ScalingTable { rows, slope })
}

/// Supercell count balancing the bias and variance terms of the bound.
///
/// For a field with closed-form modulus `omega(delta) = K delta^gamma`, the
/// per-axis count solves `K^2 (sqrt(d)/l)^(2 gamma) = l^d M c^2 / N`
/// numerically; the returned `L = l^d` uses whichever neighboring integer
/// gives the smaller bound. Constant fields yield `L = 1`.
pub fn optimal_l(n_total: usize, field: &FieldModel, m_count: usize, c: f64) -> Result<usize> {
    if n_total == 0 || m_count == 0 || !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "optimal_l",
            reason: "N, M must be positive and c a positive real".into(),
        });
    }
    let (k_norm, gamma) = field.modulus_form()?;
    if k_norm == 0.0 {
        return Ok(1);
    }
    let d = field.d() as f64;
    let sqrt_d = d.sqrt();
    let var_coeff = m_count as f64 * c * c / n_total as f64;
    let bias2 = |l: f64| (k_norm * (sqrt_d / l).powf(gamma)).powi(2);
    let var = |l: f64| l.powf(d) * var_coeff;
    let balance = |l: f64| bias2(l) - var(l);
    let l_real = if balance(1.0) <= 0.0 {
        1.0
    } else {
        let mut hi = 2.0;
        while balance(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut lo = hi / 2.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if balance(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let bound = |l: f64| bias2(l) + var(l);
    let lo = (l_real.floor() as usize).max(1);
    let hi = l_real.ceil() as usize;
    let l_int = if bound(lo as f64) <= bound(hi as f64) {
        lo
    } else {
        hi
    };
    Ok(l_int.pow(field.d() as u32))
}

/// Kolmogorov-Smirnov check of the normalized errors against the standard
/// normal.
#[derive(Debug, Clone, Copy)]
pub struct CltReport {
    pub ks: f64,
    pub pass: bool,
    pub trials: usize,
}

/// Normalize per-trial errors at `(x, t)` by their empirical standard
/// deviation and measure the KS distance to the standard normal; pass
/// means KS < 0.05.
pub fn clt_check(
    cfg: &ExperimentConfig,
    x: &[f64],
    t: usize,
    trials: usize,
) -> Result<CltReport> {
    cfg.validate()?;
    let gi = cfg
        .grid
        .iter()
        .position(|g| g == x)
        .ok_or(Error::InvalidParameter {
            name: "x",
            reason: "evaluation point must be one of the config grid points".into(),
        })?;
    let values = per_trial_values(cfg, &[(gi, t)], trials)?;
    let s_true = cfg.field.evaluate(x, t)?;
    let errors: Vec<f64> = values.iter().map(|row| row[0] - s_true).collect();
    let n = errors.len() as f64;
    let mean = pairwise_sum(&errors) / n;
    let sq: Vec<f64> = errors.iter().map(|e| (e - mean) * (e - mean)).collect();
    let std = (pairwise_sum(&sq) / n).sqrt();
    if std == 0.0 {
        // Point mass cannot look normal.
        return Ok(CltReport {
            ks: 0.5,
            pass: false,
            trials,
        });
    }
    let mut z: Vec<f64> = errors.iter().map(|e| e / std).collect();
    z.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
    let mut ks = 0.0f64;
    for (i, &zi) in z.iter().enumerate() {
        let phi = normal.cdf(zi);
        ks = ks
            .max((phi - i as f64 / n).abs())
            .max((phi - (i + 1) as f64 / n).abs());
    }
    Ok(CltReport {
        ks,
        pass: ks < 0.05,
        trials,
    })
}

/// Fisher information of a location family with the given density,
/// `I = int (p'(z))^2 / p(z) dz`, by refining quadrature over `[lo, hi]`.
///
/// The integrand is evaluated only where the density is positive, with
/// one-sided derivative stencils at the ends of each positive run so no
/// stencil crosses a support boundary. Support edges interior to the
/// window are located by bisection; if the density does not vanish
/// approaching an edge (a jump, as at the endpoints of the uniform or a
/// truncated density), the location family is non-regular and
/// `NonRegularPdf` is reported. Failure of the refinements to settle is
/// also reported as `NonRegularPdf` rather than returning an unconverged
/// number.
pub fn fisher_information<F: Fn(f64) -> f64>(pdf: F, lo: f64, hi: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter {
            name: "support",
            reason: format!("need finite lo < hi, got [{lo}, {hi}]"),
        });
    }
    const P_FLOOR: f64 = 1e-300;
    let width = hi - lo;
    // Locate the support boundary inside (z_out, z_in) where the density
    // turns positive, to within ~1e-14 of the window width.
    let edge = |mut z_out: f64, mut z_in: f64| -> f64 {
        for _ in 0..60 {
            let mid = 0.5 * (z_out + z_in);
            if pdf(mid) > P_FLOOR {
                z_in = mid;
            } else {
                z_out = mid;
            }
        }
        z_in
    };
    let mut prev: Option<f64> = None;
    let mut close_streak = 0u32;
    let mut grow_streak = 0u32;
    for level in 0..=12u32 {
        let n = (1usize << (9 + level)) + 1;
        let h = width / (n - 1) as f64;
        let z = |i: usize| lo + i as f64 * h;
        let p: Vec<f64> = (0..n).map(|i| pdf(z(i))).collect();
        let p_max = p.iter().cloned().fold(0.0, f64::max);
        if p_max <= P_FLOOR {
            return Err(Error::InvalidParameter {
                name: "pdf",
                reason: "density is zero over the whole integration window".into(),
            });
        }
        // g(i) with a derivative stencil confined to [i0, i1].
        let g = |i: usize, i0: usize, i1: usize, p: &[f64]| -> f64 {
            let dp = if i > i0 && i < i1 {
                (p[i + 1] - p[i - 1]) / (2.0 * h)
            } else if i == i0 {
                (-3.0 * p[i] + 4.0 * p[i + 1] - p[i + 2]) / (2.0 * h)
            } else {
                (3.0 * p[i] - 4.0 * p[i - 1] + p[i - 2]) / (2.0 * h)
            };
            dp * dp / p[i]
        };
        let mut integral = 0.0f64;
        let mut i = 0usize;
        while i < n {
            if p[i] <= P_FLOOR {
                i += 1;
                continue;
            }
            let i0 = i;
            while i + 1 < n && p[i + 1] > P_FLOOR {
                i += 1;
            }
            let i1 = i;
            i += 1;
            if i1 - i0 < 3 {
                // A run this short cannot host the 3-point stencils; its
                // width vanishes with h, so skipping it is consistent.
                continue;
            }
            let mut run = 0.5 * (g(i0, i0, i1, &p) + g(i1, i0, i1, &p));
            for k in i0 + 1..i1 {
                run += g(k, i0, i1, &p);
            }
            integral += run * h;
            // Support edges strictly inside the window: locate them, test
            // for a density jump, and add the sliver the grid missed.
            if i0 > 0 {
                let e = edge(z(i0 - 1), z(i0));
                if pdf(e + 1e-9 * width) > 1e-3 * p_max {
                    return Err(Error::NonRegularPdf);
                }
                integral += g(i0, i0, i1, &p) * (z(i0) - e);
            }
            if i1 < n - 1 {
                let e = edge(z(i1 + 1), z(i1));
                if pdf(e - 1e-9 * width) > 1e-3 * p_max {
                    return Err(Error::NonRegularPdf);
                }
                integral += g(i1, i0, i1, &p) * (e - z(i1));
            }
        }
        if let Some(last) = prev {
            let rel = (integral - last).abs() / integral.abs().max(1e-300);
            if rel < 1e-7 {
                close_streak += 1;
                if close_streak >= 2 {
                    if integral <= 0.0 {
                        return Err(Error::NonRegularPdf);
                    }
                    return Ok(integral);
                }
            } else {
                close_streak = 0;
            }
            if integral > 1.5 * last {
                grow_streak += 1;
                if grow_streak >= 2 {
                    return Err(Error::NonRegularPdf);
                }
            } else {
                grow_streak = 0;
            }
        }
        prev = Some(integral);
    }
    Err(Error::NonRegularPdf)
}

/// Cramer-Rao lower bound `1 / (N I)` for `n_obs` real-valued
/// observations through the given noise density.
pub fn cramer_rao_bound<F: Fn(f64) -> f64>(
    pdf: F,
    lo: f64,
    hi: f64,
    n_obs: usize,
) -> Result<f64> {
    if n_obs == 0 {
        return Err(Error::InvalidParameter {
            name: "n_obs",
            reason: "need at least one observation".into(),
        });
    }
    let info = fisher_information(pdf, lo, hi)?;
    Ok(1.0 / (n_obs as f64 * info))
}

/// Cramer-Rao bound for one of the built-in noise models. Discrete
/// families have no density and are non-regular by definition.
pub fn cramer_rao_for_noise(noise: &NoiseModel, n_obs: usize) -> Result<f64> {
    let b = noise.bound();
    // Integrate past the support edge so density jumps are visible to the
    // quadrature.
    let pad = 0.1 * b.max(1.0);
    let pdf = move |z: f64| noise.pdf(z).unwrap_or(0.0);
    match noise.pdf(0.0) {
        Err(Error::NoClosedForm { .. }) => Err(Error::NonRegularPdf),
        Err(e) => Err(e),
        Ok(_) => cramer_rao_bound(pdf, -b - pad, b + pad, n_obs),
    }
}

/// One checkpoint of an almost-sure convergence path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendPoint {
    pub n_total: usize,
    pub abs_err: f64,
}

/// Deviation envelope `2 c sqrt(ln n / n)` for an estimate fused from `n`
/// bits; by Hoeffding each checkpoint exceeds it with probability at most
/// `2 / n^2`.
pub fn convergence_envelope(c: f64, n_bits: usize) -> f64 {
    let n = n_bits.max(2) as f64;
    2.0 * c * (n.ln() / n).sqrt()
}

/// Absolute reconstruction error at `(x, t)` along one nested sample path.
///
/// Sensors are drawn one at a time into the subcell active at `t` inside
/// the supercell containing `x`, each with its own seeded substreams, so
/// the draws for a smaller sensor count are a prefix of those for a larger
/// one (common random numbers across the sequence).
pub fn as_convergence_trend(
    cfg: &ExperimentConfig,
    x: &[f64],
    t: usize,
    n_sequence: &[usize],
) -> Result<Vec<TrendPoint>> {
    if n_sequence.is_empty() || n_sequence.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "n_sequence",
            reason: "sensor counts must be strictly increasing and nonempty".into(),
        });
    }
    let partition = cfg.deployment.partition();
    let checkpoints: Vec<usize> = n_sequence
        .iter()
        .map(|&n| per_subcell_count(n, partition))
        .collect::<Result<Vec<usize>>>()?;
    if t == 0 || t > cfg.field.snapshots() {
        return Err(Error::BadSnapshot {
            t,
            t_count: cfg.field.snapshots(),
        });
    }
    let s_true = cfg.field.evaluate(x, t)?;
    let j = partition.supercell_index(x)?;
    let k = active_subcell(t, partition.subcell_count());
    let (box_lo, box_hi) = partition.subcell_box(j, k);
    let c = cfg.threshold.c();

    let mut points = Vec::with_capacity(n_sequence.len());
    let mut ones = 0u64;
    let mut pos = vec![0.0f64; partition.d()];
    let mut z_buf = Vec::new();
    let mut r_buf = Vec::new();
    let mut next_checkpoint = 0usize;
    let n_max = *checkpoints.last().expect("nonempty");
    for i in 0..n_max {
        let mut rng = child_rng(cfg.seed, DOMAIN_DEPLOYMENT, i as u64);
        for (p, (&lo, &hi)) in pos.iter_mut().zip(box_lo.iter().zip(&box_hi)) {
            *p = lo + (hi - lo) * rng.gen::<f64>();
        }
        cfg.noise.series_for_sensor_into(cfg.seed, i as u64, t, &mut z_buf);
        cfg.threshold
            .series_for_sensor_into(cfg.seed, i as u64, t, &mut r_buf);
        let y = cfg.field.evaluate(&pos, t)? + z_buf[t - 1];
        ones += u64::from(y > r_buf[t - 1]);
        while next_checkpoint < checkpoints.len() && i + 1 == checkpoints[next_checkpoint] {
            let est = 2.0 * c * ones as f64 / (i + 1) as f64 - c;
            points.push(TrendPoint {
                n_total: n_sequence[next_checkpoint],
                abs_err: (est - s_true).abs(),
            });
            next_checkpoint += 1;
        }
    }
    Ok(points)
}
