//! Noise models, one-bit quantizers, and observation generation.
//!
//! Each sensor at position `x` sees `Y_t = s(x, t) + Z_t` with zero-mean
//! noise bounded by `b`, and emits one bit per snapshot. The threshold
//! quantizer compares against a fresh uniform threshold `R ~ Unif[-c, c)`
//! with `c >= a + b`:
//!
//! ```text
//! B = 1(Y > R),   E[B | Y] = (Y + c) / (2c)
//! ```
//!
//! so the bit mean is an affine function of the field value regardless of
//! the noise law. The bit-expansion quantizer reaches the same conditional
//! mean a different way: normalize `Ytilde = (Y + c) / (2c)` into `[0, 1]`,
//! draw a geometric index `alpha` with `P(alpha = i) = 2^-i`, and send the
//! `alpha`-th binary digit of `Ytilde`. Both produce `Bernoulli((y+c)/2c)`
//! bits conditional on `Y = y`; `equivalence_test` checks that empirically.

use crate::error::Error;
use crate::fields::FieldModel;
use crate::geometry::Deployment;
use crate::seeds::{child_rng, DOMAIN_AUX, DOMAIN_NOISE, DOMAIN_THRESHOLD};
use crate::Result;
use rand::Rng;
use rand_distr::StandardNormal;

const RANGE_TOL: f64 = 1e-9;

/// Zero-mean noise law bounded by `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseFamily {
    /// No noise at all.
    Zero,
    /// Uniform on `[-b, b]`.
    Uniform,
    /// `+b` or `-b` with equal probability.
    Rademacher,
    /// `+up` with probability `down/(up+down)`, else `-down`; zero mean by
    /// construction.
    AsymmetricTwoPoint { up: f64, down: f64 },
    /// Gaussian with the given sigma, rejection-sampled into `[-b, b]`.
    TruncatedGaussian { sigma: f64 },
    /// Density `(1 + cos(pi z / b)) / (2b)` on `[-b, b]`.
    RaisedCosine,
}

impl NoiseFamily {
    /// Stable name used by configs and reports.
    pub fn name(&self) -> &'static str {
        match self {
            NoiseFamily::Zero => "zero",
            NoiseFamily::Uniform => "uniform",
            NoiseFamily::Rademacher => "rademacher",
            NoiseFamily::AsymmetricTwoPoint { .. } => "asymmetric_two_point",
            NoiseFamily::TruncatedGaussian { .. } => "truncated_gaussian",
            NoiseFamily::RaisedCosine => "raised_cosine",
        }
    }
}

/// How draws repeat across snapshots within one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMode {
    /// Fresh draw every snapshot.
    IidPerSnapshot,
    /// One draw reused for every snapshot.
    FixedPerSensor,
    /// Fresh draw at odd snapshots, negated at the following even one.
    AntitheticPair,
}

impl CorrelationMode {
    /// Stable name used by configs and reports.
    pub fn name(&self) -> &'static str {
        match self {
            CorrelationMode::IidPerSnapshot => "iid_per_snapshot",
            CorrelationMode::FixedPerSensor => "fixed_per_sensor",
            CorrelationMode::AntitheticPair => "antithetic_pair",
        }
    }
}

/// A noise family with its bound and temporal correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    family: NoiseFamily,
    b: f64,
    correlation: CorrelationMode,
}

impl NoiseModel {
    pub fn new(family: NoiseFamily, b: f64, correlation: CorrelationMode) -> Result<Self> {
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "b",
                reason: format!("noise bound must be finite and nonnegative, got {b}"),
            });
        }
        match family {
            NoiseFamily::Zero => {}
            NoiseFamily::AsymmetricTwoPoint { up, down } => {
                if !(up.is_finite() && down.is_finite() && up > 0.0 && down > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "up/down",
                        reason: "two-point jumps must be positive and finite".into(),
                    });
                }
                if up > b + RANGE_TOL || down > b + RANGE_TOL {
                    return Err(Error::InvalidParameter {
                        name: "up/down",
                        reason: format!("jumps ({up}, {down}) exceed the noise bound {b}"),
                    });
                }
            }
            NoiseFamily::TruncatedGaussian { sigma } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "sigma",
                        reason: format!("must be positive and finite, got {sigma}"),
                    });
                }
                if b <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "b",
                        reason: "truncated gaussian needs a positive bound".into(),
                    });
                }
            }
            _ => {
                if b <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "b",
                        reason: format!("{} noise needs a positive bound", family.name()),
                    });
                }
            }
        }
        Ok(NoiseModel {
            family,
            b,
            correlation,
        })
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    /// The noise bound `b`.
    pub fn bound(&self) -> f64 {
        self.b
    }

    pub fn correlation(&self) -> CorrelationMode {
        self.correlation
    }

    /// One draw from the family.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.family {
            NoiseFamily::Zero => 0.0,
            NoiseFamily::Uniform => rng.gen_range(-self.b..=self.b),
            NoiseFamily::Rademacher => {
                if rng.gen::<bool>() {
                    self.b
                } else {
                    -self.b
                }
            }
            NoiseFamily::AsymmetricTwoPoint { up, down } => {
                if rng.gen::<f64>() < down / (up + down) {
                    up
                } else {
                    -down
                }
            }
            NoiseFamily::TruncatedGaussian { sigma } => loop {
                let z: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
                if z.abs() <= self.b {
                    break z;
                }
            },
            NoiseFamily::RaisedCosine => loop {
                let z = rng.gen_range(-self.b..=self.b);
                let accept = (1.0 + (std::f64::consts::PI * z / self.b).cos()) / 2.0;
                if rng.gen::<f64>() < accept {
                    break z;
                }
            },
        }
    }

    /// Density at `z`, for families that have one.
    pub fn pdf(&self, z: f64) -> Result<f64> {
        match self.family {
            NoiseFamily::Uniform => Ok(if z.abs() <= self.b {
                1.0 / (2.0 * self.b)
            } else {
                0.0
            }),
            NoiseFamily::TruncatedGaussian { sigma } => {
                if z.abs() > self.b {
                    return Ok(0.0);
                }
                let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
                use statrs::distribution::{Continuous, ContinuousCDF};
                let mass = normal.cdf(self.b / sigma) - normal.cdf(-self.b / sigma);
                Ok(normal.pdf(z / sigma) / sigma / mass)
            }
            NoiseFamily::RaisedCosine => Ok(if z.abs() <= self.b {
                (1.0 + (std::f64::consts::PI * z / self.b).cos()) / (2.0 * self.b)
            } else {
                0.0
            }),
            _ => Err(Error::NoClosedForm {
                kind: "density of a discrete noise family",
            }),
        }
    }

    /// Noise values for one sensor across `t_count` snapshots, honoring the
    /// correlation mode. Seeded per sensor so observation generation and
    /// the streaming pipeline reproduce identical draws.
    pub fn series_for_sensor(&self, seed: u64, sensor: u64, t_count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(t_count);
        self.series_for_sensor_into(seed, sensor, t_count, &mut out);
        out
    }

    /// As `series_for_sensor` but filling a reusable buffer.
    pub fn series_for_sensor_into(
        &self,
        seed: u64,
        sensor: u64,
        t_count: usize,
        out: &mut Vec<f64>,
    ) {
        if matches!(self.family, NoiseFamily::Zero) {
            // The zero family never consumes randomness, so skipping the
            // stream setup leaves every other draw untouched.
            out.clear();
            out.resize(t_count, 0.0);
            return;
        }
        let mut rng = child_rng(seed, DOMAIN_NOISE, sensor);
        out.clear();
        match self.correlation {
            CorrelationMode::IidPerSnapshot => {
                for _ in 0..t_count {
                    out.push(self.sample(&mut rng));
                }
            }
            CorrelationMode::FixedPerSensor => {
                let z = self.sample(&mut rng);
                out.resize(t_count, z);
            }
            CorrelationMode::AntitheticPair => {
                while out.len() < t_count {
                    let z = self.sample(&mut rng);
                    out.push(z);
                    if out.len() < t_count {
                        out.push(-z);
                    }
                }
            }
        }
    }
}

/// Uniform threshold `R ~ Unif[-c, c)` with its temporal correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdModel {
    c: f64,
    correlation: CorrelationMode,
}

impl ThresholdModel {
    pub fn new(c: f64, correlation: CorrelationMode) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter {
                name: "c",
                reason: format!("threshold half-range must be positive, got {c}"),
            });
        }
        if correlation == CorrelationMode::AntitheticPair {
            return Err(Error::InvalidParameter {
                name: "threshold.correlation",
                reason: "thresholds support iid_per_snapshot or fixed_per_sensor".into(),
            });
        }
        Ok(ThresholdModel { c, correlation })
    }

    /// The half-range `c`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn correlation(&self) -> CorrelationMode {
        self.correlation
    }

    /// Threshold values for one sensor across `t_count` snapshots.
    ///
    /// The draw is half-open, `[-c, c)`, so `y = c` always yields bit 1 and
    /// `y = -c` always yields bit 0.
    pub fn series_for_sensor(&self, seed: u64, sensor: u64, t_count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(t_count);
        self.series_for_sensor_into(seed, sensor, t_count, &mut out);
        out
    }

    /// As `series_for_sensor` but filling a reusable buffer.
    pub fn series_for_sensor_into(
        &self,
        seed: u64,
        sensor: u64,
        t_count: usize,
        out: &mut Vec<f64>,
    ) {
        let mut rng = child_rng(seed, DOMAIN_THRESHOLD, sensor);
        out.clear();
        match self.correlation {
            CorrelationMode::IidPerSnapshot => {
                for _ in 0..t_count {
                    out.push(rng.gen_range(-self.c..self.c));
                }
            }
            CorrelationMode::FixedPerSensor => {
                let r = rng.gen_range(-self.c..self.c);
                out.resize(t_count, r);
            }
            CorrelationMode::AntitheticPair => unreachable!("rejected at construction"),
        }
    }
}

/// Threshold quantizer: `B = 1(y > r)`.
pub fn quantize_threshold(y: f64, r: f64) -> u8 {
    u8::from(y > r)
}

/// `P(B = 1 | Y = y)` for either quantizer: `(y + c) / (2c)`.
pub fn conditional_prob(y: f64, c: f64) -> Result<f64> {
    if !(y.is_finite() && y.abs() <= c + RANGE_TOL) {
        return Err(Error::OutOfRange {
            what: "observation",
            value: y,
            lo: -c,
            hi: c,
        });
    }
    Ok(((y + c) / (2.0 * c)).clamp(0.0, 1.0))
}

/// The `alpha`-th binary digit of `y_tilde in [0, 1)`, 1-indexed.
///
/// Scaling by a power of two is exact in floating point, so the digit is
/// the exact digit of the stored value.
pub(crate) fn expansion_digit(y_tilde: f64, alpha: u32) -> u8 {
    let frac = (y_tilde * (alpha as f64 - 1.0).exp2()).fract();
    u8::from(frac >= 0.5)
}

/// Bit-expansion quantizer: send the `alpha`-th binary digit of the
/// normalized observation, with `alpha` geometric (`P(alpha=i) = 2^-i`).
///
/// `y_tilde = 1` is treated as the all-ones expansion `0.111...`, so the
/// bit is 1 for every digit index and the conditional mean stays exact at
/// the top of the range.
pub fn quantize_bit_expansion<R: Rng>(y: f64, c: f64, rng: &mut R) -> Result<u8> {
    if !(y.is_finite() && y.abs() <= c + RANGE_TOL) {
        return Err(Error::OutOfRange {
            what: "observation",
            value: y,
            lo: -c,
            hi: c,
        });
    }
    let y_tilde = ((y + c) / (2.0 * c)).clamp(0.0, 1.0);
    // Geometric via leading zeros of a uniform word; the 2^-64 atom at
    // u = 0 merges into alpha = 64.
    let alpha = (rng.gen::<u64>().leading_zeros() + 1).min(64);
    if y_tilde >= 1.0 {
        return Ok(1);
    }
    Ok(expansion_digit(y_tilde, alpha))
}

/// One bit per sensor per snapshot, sensor-major.
#[derive(Debug, Clone)]
pub struct ObservationBatch {
    sensor_count: usize,
    t_count: usize,
    bits: Vec<u8>,
}

impl ObservationBatch {
    pub fn sensor_count(&self) -> usize {
        self.sensor_count
    }

    pub fn snapshots(&self) -> usize {
        self.t_count
    }

    /// Bit of sensor `i` (0-based) at snapshot `t` (1-based).
    pub fn bit(&self, sensor: usize, t: usize) -> u8 {
        self.bits[sensor * self.t_count + (t - 1)]
    }

    /// All bits of sensor `i` in snapshot order.
    pub fn sensor_bits(&self, sensor: usize) -> &[u8] {
        &self.bits[sensor * self.t_count..(sensor + 1) * self.t_count]
    }
}

/// Reusable buffers for the per-sensor sensing loop, so hot Monte Carlo
/// paths avoid per-sensor allocation.
#[derive(Debug, Default, Clone)]
pub struct SensorScratch {
    z: Vec<f64>,
    r: Vec<f64>,
    /// Bits of the most recently sensed sensor, snapshot order.
    pub bits: Vec<u8>,
}

/// Bits of a single sensor across all snapshots: evaluate the field at its
/// position, add its noise series, compare against its threshold series.
/// The result lands in `scratch.bits`.
pub fn sense_sensor_into(
    field: &FieldModel,
    position: &[f64],
    noise: &NoiseModel,
    threshold: &ThresholdModel,
    seed: u64,
    sensor: u64,
    scratch: &mut SensorScratch,
) -> Result<()> {
    crate::fields::check_unit_cube(position, field.d())?;
    sense_sensor_into_trusted(field, position, noise, threshold, seed, sensor, scratch);
    Ok(())
}

/// Hot-path variant for positions a `Deployment` already validated; skips
/// the per-call unit-cube check but produces identical draws and bits.
pub(crate) fn sense_sensor_into_trusted(
    field: &FieldModel,
    position: &[f64],
    noise: &NoiseModel,
    threshold: &ThresholdModel,
    seed: u64,
    sensor: u64,
    scratch: &mut SensorScratch,
) {
    let t_count = field.snapshots();
    noise.series_for_sensor_into(seed, sensor, t_count, &mut scratch.z);
    threshold.series_for_sensor_into(seed, sensor, t_count, &mut scratch.r);
    scratch.bits.clear();
    for t in 1..=t_count {
        let y = field.eval_unchecked(position, t) + scratch.z[t - 1];
        scratch.bits.push(quantize_threshold(y, scratch.r[t - 1]));
    }
}

/// As `sense_sensor_into`, returning freshly allocated bits.
pub fn sense_sensor(
    field: &FieldModel,
    position: &[f64],
    noise: &NoiseModel,
    threshold: &ThresholdModel,
    seed: u64,
    sensor: u64,
) -> Result<Vec<u8>> {
    let mut scratch = SensorScratch::default();
    sense_sensor_into(field, position, noise, threshold, seed, sensor, &mut scratch)?;
    Ok(scratch.bits)
}

/// Observe every sensor at every snapshot.
pub fn observe(
    field: &FieldModel,
    deployment: &Deployment,
    noise: &NoiseModel,
    threshold: &ThresholdModel,
    seed: u64,
) -> Result<ObservationBatch> {
    if field.d() != deployment.partition().d() {
        return Err(Error::DimensionMismatch {
            what: "field vs deployment dimension",
            got: deployment.partition().d(),
            expected: field.d(),
        });
    }
    if threshold.c() + RANGE_TOL < field.range() + noise.bound() {
        return Err(Error::InvalidParameter {
            name: "c",
            reason: format!(
                "threshold half-range {} below a + b = {}",
                threshold.c(),
                field.range() + noise.bound()
            ),
        });
    }
    let t_count = field.snapshots();
    let mut bits = Vec::with_capacity(deployment.sensor_count() * t_count);
    for i in 0..deployment.sensor_count() {
        bits.extend(sense_sensor(
            field,
            deployment.position(i),
            noise,
            threshold,
            seed,
            i as u64,
        )?);
    }
    Ok(ObservationBatch {
        sensor_count: deployment.sensor_count(),
        t_count,
        bits,
    })
}

/// Empirical comparison of the two quantizers against the common
/// conditional mean `(y + c) / (2c)`.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub y_grid: Vec<f64>,
    pub threshold_means: Vec<f64>,
    pub expansion_means: Vec<f64>,
    pub expected: Vec<f64>,
    /// Worst `|threshold mean - expected|` over the grid.
    pub max_dev_threshold: f64,
    /// Worst `|expansion mean - expected|` over the grid.
    pub max_dev_expansion: f64,
    /// Worst `|threshold mean - expansion mean|` over the grid.
    pub max_dev_cross: f64,
    /// Four sigma at the worst-case variance: `4 sqrt(0.25 / trials)`.
    pub tolerance: f64,
    /// Both quantizers within tolerance of the conditional mean.
    pub pass: bool,
}

/// Fix `Y = y` on an even grid over `[-c, c]` and compare both quantizers'
/// empirical bit means against `(y + c) / (2c)`.
pub fn equivalence_test(
    c: f64,
    points: usize,
    trials: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c",
            reason: format!("must be positive, got {c}"),
        });
    }
    if points < 2 || trials == 0 {
        return Err(Error::InvalidParameter {
            name: "points/trials",
            reason: "need at least 2 grid points and 1 trial".into(),
        });
    }
    let mut y_grid = Vec::with_capacity(points);
    let mut threshold_means = Vec::with_capacity(points);
    let mut expansion_means = Vec::with_capacity(points);
    let mut expected = Vec::with_capacity(points);
    let mut max_dev_threshold = 0.0f64;
    let mut max_dev_expansion = 0.0f64;
    let mut max_dev_cross = 0.0f64;
    for i in 0..points {
        let y = -c + 2.0 * c * i as f64 / (points - 1) as f64;
        let p = conditional_prob(y, c)?;
        let mut rng_thr = child_rng(seed, DOMAIN_AUX, 2 * i as u64);
        let mut rng_exp = child_rng(seed, DOMAIN_AUX, 2 * i as u64 + 1);
        let mut ones_thr = 0u64;
        let mut ones_exp = 0u64;
        for _ in 0..trials {
            ones_thr += u64::from(quantize_threshold(y, rng_thr.gen_range(-c..c)));
            ones_exp += u64::from(quantize_bit_expansion(y, c, &mut rng_exp)?);
        }
        let mean_thr = ones_thr as f64 / trials as f64;
        let mean_exp = ones_exp as f64 / trials as f64;
        max_dev_threshold = max_dev_threshold.max((mean_thr - p).abs());
        max_dev_expansion = max_dev_expansion.max((mean_exp - p).abs());
        max_dev_cross = max_dev_cross.max((mean_thr - mean_exp).abs());
        y_grid.push(y);
        threshold_means.push(mean_thr);
        expansion_means.push(mean_exp);
        expected.push(p);
    }
    let tolerance = 4.0 * (0.25 / trials as f64).sqrt();
    let pass = max_dev_threshold < tolerance && max_dev_expansion < tolerance;
    Ok(EquivalenceReport {
        y_grid,
        threshold_means,
        expansion_means,
        expected,
        max_dev_threshold,
        max_dev_expansion,
        max_dev_cross,
        tolerance,
        pass,
    })
}
