//! Flat key/value experiment configuration.
//!
//! Format: one `section.key = value` assignment per line; `#` starts a
//! comment; blank lines are ignored. Scalar values are single tokens,
//! lists are space-separated, and lists of points separate points with
//! `;` (coordinates within a point are space-separated).
//!
//! Every parse or validation failure carries the file path and line
//! number. Keys that are present but consumed by no builder are rejected,
//! so typos fail loudly instead of silently running a default.

use crate::analysis::{ExperimentConfig, LRule, ScalingTemplate};
use crate::error::Error;
use crate::fields::{FieldKind, FieldModel};
use crate::geometry::{deploy_grid, deploy_iid_uniform, CellPartition, Deployment};
use crate::seeds::{child_seed, DOMAIN_DEPLOYMENT};
use crate::sensing::{CorrelationMode, NoiseFamily, NoiseModel, ThresholdModel};
use crate::Result;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

/// A parsed config file: raw key/value pairs with their line numbers.
#[derive(Debug, Clone)]
pub struct RawConfig {
    path: String,
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    /// Parse from a file on disk.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_str_named(&text, &path.display().to_string())
    }

    /// Parse from text, labeling errors with the given path.
    pub fn from_str_named(text: &str, path: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if stripped.is_empty() {
                continue;
            }
            let Some((key, value)) = stripped.split_once('=') else {
                return Err(Error::Config {
                    path: path.to_string(),
                    line,
                    reason: format!("expected `key = value`, got `{stripped}`"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config {
                    path: path.to_string(),
                    line,
                    reason: "empty key".into(),
                });
            }
            if let Some(prev) = entries.get(&key) {
                let Entry { line: first, .. } = prev;
                return Err(Error::Config {
                    path: path.to_string(),
                    line,
                    reason: format!("duplicate key `{key}` (first set on line {first})"),
                });
            }
            entries.insert(
                key,
                Entry {
                    value,
                    line,
                    used: false,
                },
            );
        }
        Ok(RawConfig {
            path: path.to_string(),
            entries,
        })
    }

    fn fail(&self, line: usize, reason: String) -> Error {
        Error::Config {
            path: self.path.clone(),
            line,
            reason,
        }
    }

    /// Wrap a model-construction error as a config error at `line`, so
    /// bad values in a file are reported with their location.
    fn localize(&self, line: usize, err: Error) -> Error {
        match err {
            e @ Error::Config { .. } => e,
            e => self.fail(line, e.to_string()),
        }
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        let entry = self.entries.get_mut(key)?;
        entry.used = true;
        Some((entry.value.clone(), entry.line))
    }

    fn require(&mut self, key: &str) -> Result<(String, usize)> {
        self.take(key).ok_or_else(|| {
            self.fail(0, format!("missing required key `{key}`"))
        })
    }

    fn parse_one<T: std::str::FromStr>(&self, token: &str, line: usize, key: &str) -> Result<T> {
        token.parse().map_err(|_| {
            self.fail(
                line,
                format!(
                    "cannot parse `{token}` as {} for key `{key}`",
                    std::any::type_name::<T>()
                ),
            )
        })
    }

    fn parse_list<T: std::str::FromStr>(
        &self,
        value: &str,
        line: usize,
        key: &str,
    ) -> Result<Vec<T>> {
        value
            .split_whitespace()
            .map(|tok| self.parse_one(tok, line, key))
            .collect()
    }

    pub fn take_string(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|(v, _)| v)
    }

    pub fn require_string(&mut self, key: &str) -> Result<(String, usize)> {
        self.require(key)
    }

    pub fn require_f64(&mut self, key: &str) -> Result<f64> {
        let (v, line) = self.require(key)?;
        self.parse_one(&v, line, key)
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => Ok(Some(self.parse_one(&v, line, key)?)),
        }
    }

    pub fn require_usize(&mut self, key: &str) -> Result<usize> {
        let (v, line) = self.require(key)?;
        self.parse_one(&v, line, key)
    }

    pub fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => Ok(Some(self.parse_one(&v, line, key)?)),
        }
    }

    pub fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => Ok(Some(self.parse_one(&v, line, key)?)),
        }
    }

    pub fn require_floats(&mut self, key: &str) -> Result<Vec<f64>> {
        let (v, line) = self.require(key)?;
        self.parse_list(&v, line, key)
    }

    pub fn require_usizes(&mut self, key: &str) -> Result<Vec<usize>> {
        let (v, line) = self.require(key)?;
        self.parse_list(&v, line, key)
    }

    /// A `;`-separated list of space-separated coordinate vectors.
    pub fn require_points(&mut self, key: &str) -> Result<Vec<Vec<f64>>> {
        let (v, line) = self.require(key)?;
        let points = v
            .split(';')
            .map(|chunk| self.parse_list(chunk, line, key))
            .collect::<Result<Vec<Vec<f64>>>>()?;
        if points.iter().any(|p| p.is_empty()) {
            return Err(self.fail(line, format!("empty point in `{key}`")));
        }
        Ok(points)
    }

    /// Error on the first key no builder consumed (typo protection).
    pub fn finish(&self) -> Result<()> {
        let mut unused: Vec<(&String, &Entry)> =
            self.entries.iter().filter(|(_, e)| !e.used).collect();
        unused.sort_by_key(|(_, e)| e.line);
        match unused.first() {
            None => Ok(()),
            Some((key, entry)) => Err(self.fail(
                entry.line,
                format!("unknown or unused key `{key}` for this subcommand"),
            )),
        }
    }
}

fn parse_correlation(raw: &RawConfig, value: &str, line: usize) -> Result<CorrelationMode> {
    match value {
        "iid" | "iid_per_snapshot" => Ok(CorrelationMode::IidPerSnapshot),
        "fixed" | "fixed_per_sensor" => Ok(CorrelationMode::FixedPerSensor),
        "antithetic" | "antithetic_pair" => Ok(CorrelationMode::AntitheticPair),
        other => Err(raw.fail(
            line,
            format!(
                "unknown correlation `{other}` (expected iid, fixed, or antithetic)"
            ),
        )),
    }
}

/// Build the cell partition from `partition.{d,l,m}`.
pub fn build_partition(raw: &mut RawConfig) -> Result<CellPartition> {
    let (d_str, line) = raw.require_string("partition.d")?;
    let d: usize = raw.parse_one(&d_str, line, "partition.d")?;
    let l = raw.require_usize("partition.l")?;
    let m = raw.require_usize("partition.m")?;
    CellPartition::new(d, l, m).map_err(|e| raw.localize(line, e))
}

/// Build the field from `field.kind` plus kind-specific keys.
pub fn build_field(raw: &mut RawConfig, d: usize) -> Result<FieldModel> {
    let (kind_str, line) = raw.require_string("field.kind")?;
    let a = raw.require_f64("field.range")?;
    let t_count = raw.require_usize("field.snapshots")?;
    let kind = match kind_str.as_str() {
        "constant" => FieldKind::Constant {
            values: raw.require_floats("field.values")?,
        },
        "linear" => FieldKind::LipschitzLinear {
            slopes: raw.require_floats("field.slopes")?,
            offsets: raw.require_floats("field.offsets")?,
        },
        "sinusoidal" => FieldKind::Sinusoidal {
            amplitude: raw.require_f64("field.amplitude")?,
            frequencies: raw.require_floats("field.frequencies")?,
            phases: raw.require_floats("field.phases")?,
        },
        "step" => FieldKind::PiecewiseStep {
            normal: raw.require_floats("field.normal")?,
            offset: raw.require_f64("field.offset")?,
            level_low: raw.require_f64("field.low")?,
            level_high: raw.require_f64("field.high")?,
        },
        other => {
            return Err(raw.fail(
                line,
                format!(
                    "unknown field.kind `{other}` (expected constant, linear, sinusoidal, or step)"
                ),
            ))
        }
    };
    FieldModel::new(d, t_count, a, kind).map_err(|e| raw.localize(line, e))
}

/// Build the noise model from `noise.{family, b, params, correlation}`.
pub fn build_noise(raw: &mut RawConfig) -> Result<NoiseModel> {
    let (family_str, line) = raw.require_string("noise.family")?;
    let b = raw.require_f64("noise.b")?;
    let params = match raw.take("noise.params") {
        Some((v, pl)) => raw.parse_list::<f64>(&v, pl, "noise.params")?,
        None => Vec::new(),
    };
    let expect_params = |raw: &RawConfig, n: usize, what: &str| -> Result<()> {
        if params.len() != n {
            return Err(raw.fail(
                line,
                format!(
                    "noise.family {family_str} needs noise.params = {what} ({n} values, got {})",
                    params.len()
                ),
            ));
        }
        Ok(())
    };
    let family = match family_str.as_str() {
        "zero" => {
            expect_params(raw, 0, "")?;
            NoiseFamily::Zero
        }
        "uniform" => {
            expect_params(raw, 0, "")?;
            NoiseFamily::Uniform
        }
        "rademacher" => {
            expect_params(raw, 0, "")?;
            NoiseFamily::Rademacher
        }
        "asymmetric_two_point" => {
            expect_params(raw, 2, "<up> <down>")?;
            NoiseFamily::AsymmetricTwoPoint {
                up: params[0],
                down: params[1],
            }
        }
        "truncated_gaussian" => {
            expect_params(raw, 1, "<sigma>")?;
            NoiseFamily::TruncatedGaussian { sigma: params[0] }
        }
        "raised_cosine" => {
            expect_params(raw, 0, "")?;
            NoiseFamily::RaisedCosine
        }
        other => {
            return Err(raw.fail(line, format!("unknown noise.family `{other}`")));
        }
    };
    let correlation = match raw.take("noise.correlation") {
        Some((v, cl)) => parse_correlation(raw, &v, cl)?,
        None => CorrelationMode::IidPerSnapshot,
    };
    NoiseModel::new(family, b, correlation).map_err(|e| raw.localize(line, e))
}

/// Build the threshold model; `threshold.c` defaults to `a + b`.
pub fn build_threshold(raw: &mut RawConfig, a: f64, b: f64) -> Result<ThresholdModel> {
    let (c, line) = match raw.take("threshold.c") {
        Some((v, line)) => (raw.parse_one::<f64>(&v, line, "threshold.c")?, line),
        None => (a + b, 0),
    };
    if c + 1e-9 < a + b {
        return Err(raw.fail(
            line,
            format!("threshold.c = {c} is below field.range + noise.b = {}", a + b),
        ));
    }
    let correlation = match raw.take("threshold.correlation") {
        Some((v, cl)) => parse_correlation(raw, &v, cl)?,
        None => CorrelationMode::IidPerSnapshot,
    };
    ThresholdModel::new(c, correlation).map_err(|e| raw.localize(line, e))
}

/// Build the deployment from `deployment.{mode, n|N, seed}`.
///
/// `deployment.n` is the per-subcell count for grid mode;
/// `deployment.N` is the total count for iid_uniform mode, whose seed
/// defaults to a child of the master seed.
pub fn build_deployment(
    raw: &mut RawConfig,
    partition: &CellPartition,
    master_seed: u64,
) -> Result<Deployment> {
    let (mode, line) = raw.require_string("deployment.mode")?;
    match mode.as_str() {
        "grid" => {
            let n = raw.require_usize("deployment.n")?;
            deploy_grid(partition, n).map_err(|e| raw.localize(line, e))
        }
        "iid_uniform" => {
            let n_total = raw.require_usize("deployment.N")?;
            let seed = raw
                .take_u64("deployment.seed")?
                .unwrap_or_else(|| child_seed(master_seed, DOMAIN_DEPLOYMENT, 0));
            deploy_iid_uniform(partition, n_total, seed).map_err(|e| raw.localize(line, e))
        }
        other => Err(raw.fail(
            line,
            format!("unknown deployment.mode `{other}` (expected grid or iid_uniform)"),
        )),
    }
}

/// Resolve the master seed: CLI flag, else config `seed`, else OS
/// entropy. Returns the seed and whether it was freshly generated.
pub fn resolve_seed(raw: &mut RawConfig, cli_seed: Option<u64>) -> Result<(u64, bool)> {
    if let Some(s) = cli_seed {
        // Still consume the config key so it does not trip `finish`.
        let _ = raw.take_u64("seed")?;
        return Ok((s, false));
    }
    match raw.take_u64("seed")? {
        Some(s) => Ok((s, false)),
        None => Ok((rand::random::<u64>(), true)),
    }
}

/// Build a full Monte Carlo experiment description.
pub fn build_experiment(raw: &mut RawConfig, seed: u64) -> Result<ExperimentConfig> {
    let partition = build_partition(raw)?;
    let field = build_field(raw, partition.d())?;
    let noise = build_noise(raw)?;
    let threshold = build_threshold(raw, field.range(), noise.bound())?;
    let deployment = build_deployment(raw, &partition, seed)?;
    let grid = raw.require_points("experiment.grid")?;
    let eval_snapshots = raw.require_usizes("experiment.snapshots")?;
    let trials = raw.require_usize("experiment.trials")?;
    Ok(ExperimentConfig {
        field,
        deployment,
        noise,
        threshold,
        grid,
        eval_snapshots,
        trials,
        seed,
    })
}

/// Build a scaling sweep: the sensor counts, the L rule, and the shared
/// template. The partition is rebuilt per row, so only `partition.{d,m}`
/// are read here.
pub fn build_scaling(
    raw: &mut RawConfig,
    seed: u64,
) -> Result<(Vec<usize>, LRule, ScalingTemplate)> {
    let (d_str, dline) = raw.require_string("partition.d")?;
    let d: usize = raw.parse_one(&d_str, dline, "partition.d")?;
    let m = raw.require_usize("partition.m")?;
    let field = build_field(raw, d)?;
    let noise = build_noise(raw)?;
    let threshold = build_threshold(raw, field.range(), noise.bound())?;
    let n_list = raw.require_usizes("scaling.n_list")?;
    let (rule_str, rline) = raw.require_string("scaling.rule")?;
    let rule = match rule_str.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["fixed", l] => LRule::Fixed(raw.parse_one(l, rline, "scaling.rule")?),
        ["pow", e] => LRule::RoundPow(raw.parse_one(e, rline, "scaling.rule")?),
        _ => {
            return Err(raw.fail(
                rline,
                format!("scaling.rule must be `fixed <l>` or `pow <exponent>`, got `{rule_str}`"),
            ))
        }
    };
    let grid = raw.require_points("experiment.grid")?;
    let eval_snapshots = raw.require_usizes("experiment.snapshots")?;
    let trials = raw.require_usize("experiment.trials")?;
    Ok((
        n_list,
        rule,
        ScalingTemplate {
            field,
            m,
            noise,
            threshold,
            grid,
            eval_snapshots,
            trials,
            seed,
        },
    ))
}

/// Quantizer-equivalence run description.
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceSpec {
    pub c: f64,
    pub points: usize,
    pub trials: usize,
}

pub fn build_equivalence(raw: &mut RawConfig) -> Result<EquivalenceSpec> {
    Ok(EquivalenceSpec {
        c: raw.require_f64("equivalence.c")?,
        points: raw.require_usize("equivalence.points")?,
        trials: raw.require_usize("equivalence.trials")?,
    })
}

/// Deployment-export run description, with an optional near-uniformity
/// failure-rate experiment against the large-deviations bound.
#[derive(Debug, Clone)]
pub struct DeploySpec {
    pub partition: CellPartition,
    pub deployment: Deployment,
    /// When set (iid mode only): measure how often fresh deployments
    /// violate `count >= (1 - delta) N / (LM)` per cell.
    pub delta: Option<f64>,
    pub trials: usize,
}

pub fn build_deploy(raw: &mut RawConfig, master_seed: u64) -> Result<DeploySpec> {
    let partition = build_partition(raw)?;
    let deployment = build_deployment(raw, &partition, master_seed)?;
    let delta = raw.take_f64("deploy.delta")?;
    let trials = raw.take_usize("deploy.trials")?.unwrap_or(10_000);
    Ok(DeploySpec {
        partition,
        deployment,
        delta,
        trials,
    })
}

/// Analytic-bound tabulation description. The sensor count is taken from
/// the deployment keys without materializing positions.
#[derive(Debug, Clone)]
pub struct BoundsSpec {
    pub field: FieldModel,
    pub partition: CellPartition,
    pub c: f64,
    pub n_total: usize,
    pub grid: Vec<Vec<f64>>,
    pub snapshots: Vec<usize>,
}

pub fn build_bounds(raw: &mut RawConfig) -> Result<BoundsSpec> {
    let partition = build_partition(raw)?;
    let field = build_field(raw, partition.d())?;
    let noise_b = raw.take_f64("noise.b")?.unwrap_or(0.0);
    let c = match raw.take_f64("threshold.c")? {
        Some(c) => c,
        None => field.range() + noise_b,
    };
    let (mode, line) = raw.require_string("deployment.mode")?;
    let n_total = match mode.as_str() {
        "grid" => {
            let n = raw.require_usize("deployment.n")?;
            n * partition.supercell_count() * partition.subcell_count()
        }
        "iid_uniform" => raw.require_usize("deployment.N")?,
        other => {
            return Err(raw.fail(line, format!("unknown deployment.mode `{other}`")));
        }
    };
    if n_total == 0 {
        return Err(raw.fail(line, "deployment must contain at least one sensor".into()));
    }
    let grid = raw.require_points("experiment.grid")?;
    let snapshots = raw.require_usizes("experiment.snapshots")?;
    Ok(BoundsSpec {
        field,
        partition,
        c,
        n_total,
        grid,
        snapshots,
    })
}
