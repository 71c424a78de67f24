//! Fusion-center reconstruction from one-bit reports.
//!
//! At snapshot `t` the fusion center holds `n` bits per supercell, all from
//! sensors in the active subcell. Since `E[B] = (s + c) / (2c)` pointwise,
//! the supercell estimate inverts the affine map at the empirical mean:
//!
//! ```text
//! s_hat = 2c * mean(bits) - c
//! ```
//!
//! The reconstruction is piecewise constant: `s_hat(x, t)` is the estimate
//! of the supercell containing `x`. Fusion accumulates integer bit counts
//! per `(t, supercell)`, so the result does not depend on message arrival
//! order.
//!
//! When thresholds are known at the fusion center rather than merely
//! uniform, the bit mean equals `h(s) = 1 - F(-s)` with `F` the dither
//! cdf, and reconstruction inverts `h` numerically; for the uniform dither
//! this reduces to the affine estimator exactly.

use crate::coding::{transmission_snapshots, WireFormat};
use crate::error::Error;
use crate::fields::FieldModel;
use crate::geometry::{CellPartition, Deployment};
use crate::sensing::{sense_sensor_into, NoiseModel, SensorScratch, ThresholdModel};
use crate::Result;

/// Estimate one supercell's value from its `n` bits at one snapshot.
pub fn estimate_supercell(bits: &[u8], c: f64, expected_n: usize) -> Result<f64> {
    if bits.len() != expected_n {
        return Err(Error::WrongCount {
            expected: expected_n,
            got: bits.len(),
        });
    }
    let ones: u64 = bits.iter().map(|&b| u64::from(b)).sum();
    Ok(2.0 * c * ones as f64 / expected_n as f64 - c)
}

/// Piecewise-constant reconstruction over supercells and snapshots.
#[derive(Debug, Clone)]
pub struct FieldEstimate {
    partition: CellPartition,
    t_count: usize,
    /// Row-major `(t - 1) * L + (j - 1)`.
    values: Vec<f64>,
}

impl FieldEstimate {
    pub fn partition(&self) -> &CellPartition {
        &self.partition
    }

    pub fn snapshots(&self) -> usize {
        self.t_count
    }

    /// Estimate of supercell `j` (1-based) at snapshot `t` (1-based).
    pub fn value(&self, t: usize, j: usize) -> f64 {
        self.values[(t - 1) * self.partition.supercell_count() + (j - 1)]
    }

    /// Evaluate the reconstruction at a point.
    pub fn evaluate(&self, x: &[f64], t: usize) -> Result<f64> {
        if t == 0 || t > self.t_count {
            return Err(Error::BadSnapshot {
                t,
                t_count: self.t_count,
            });
        }
        let j = self.partition.supercell_index(x)?;
        Ok(self.value(t, j))
    }

    /// Clamp every value into `[-a, a]`; never hurts when the true field
    /// is known to be bounded by `a`.
    pub fn clamp_to(&mut self, a: f64) {
        for v in &mut self.values {
            *v = v.clamp(-a, a);
        }
    }
}

/// Order-independent bit fusion: integer `(ones, received)` tallies per
/// `(snapshot, supercell)`.
#[derive(Debug, Clone)]
pub struct FusionAccumulator {
    partition: CellPartition,
    wire: WireFormat,
    expected_n: usize,
    ones: Vec<u32>,
    received: Vec<u32>,
}

impl FusionAccumulator {
    /// Expect `expected_n` bits per supercell per snapshot.
    pub fn new(partition: &CellPartition, wire: &WireFormat, expected_n: usize) -> Result<Self> {
        if wire.l_count() != partition.supercell_count()
            || wire.m_count() != partition.subcell_count()
        {
            return Err(Error::DimensionMismatch {
                what: "wire format vs partition cells",
                got: wire.l_count() * wire.m_count(),
                expected: partition.cell_count(),
            });
        }
        if expected_n == 0 {
            return Err(Error::InvalidParameter {
                name: "expected_n",
                reason: "need at least one bit per supercell per snapshot".into(),
            });
        }
        let slots = wire.t_count() * partition.supercell_count();
        Ok(FusionAccumulator {
            partition: *partition,
            wire: *wire,
            expected_n,
            ones: vec![0; slots],
            received: vec![0; slots],
        })
    }

    /// Fold in one decoded message.
    pub fn ingest(&mut self, supercell: usize, subcell: usize, bits: &[u8]) -> Result<()> {
        if bits.len() != self.wire.payload_len() {
            return Err(Error::WrongPayloadLength {
                got: bits.len(),
                expected: self.wire.payload_len(),
            });
        }
        if !(1..=self.partition.supercell_count()).contains(&supercell)
            || !(1..=self.partition.subcell_count()).contains(&subcell)
        {
            return Err(Error::MalformedHeader {
                reason: format!("labels ({supercell}, {subcell}) outside the partition"),
            });
        }
        let l_count = self.partition.supercell_count();
        for (i, &b) in bits.iter().enumerate() {
            let t = subcell + i * self.wire.m_count();
            let idx = (t - 1) * l_count + (supercell - 1);
            self.ones[idx] += u32::from(b != 0);
            self.received[idx] += 1;
        }
        Ok(())
    }

    /// Hot-path tally for labels a `Deployment` produced and a full
    /// `t_count`-length bit series straight from the sensor model; selects
    /// the scheduled snapshots itself. Same tallies as `ingest`.
    pub(crate) fn ingest_scheduled_trusted(&mut self, supercell: usize, subcell: usize, bits: &[u8]) {
        let l_count = self.partition.supercell_count();
        let m_count = self.wire.m_count();
        let mut t = subcell;
        while t <= self.wire.t_count() {
            let idx = (t - 1) * l_count + (supercell - 1);
            self.ones[idx] += u32::from(bits[t - 1] != 0);
            self.received[idx] += 1;
            t += m_count;
        }
    }

    /// Fold in a whole encoded batch.
    pub fn ingest_batch(&mut self, bytes: &[u8]) -> Result<()> {
        let wire = self.wire;
        wire.visit_batch(bytes, |j, k, bits| self.ingest(j, k, bits))
    }

    /// Check completeness and produce the estimate.
    pub fn finish(self, c: f64) -> Result<FieldEstimate> {
        for (idx, &r) in self.received.iter().enumerate() {
            if r as usize != self.expected_n {
                return Err(Error::WrongCount {
                    expected: self.expected_n,
                    got: r as usize,
                });
            }
            debug_assert!(self.ones[idx] <= r);
        }
        let n = self.expected_n as f64;
        let values = self
            .ones
            .iter()
            .map(|&o| 2.0 * c * o as f64 / n - c)
            .collect();
        Ok(FieldEstimate {
            partition: self.partition,
            t_count: self.wire.t_count(),
            values,
        })
    }
}

/// End-to-end run: sense every sensor, encode its scheduled bits, decode
/// the batch, fuse, and estimate. Requires an exactly uniform deployment
/// (the grid mode) so every supercell receives `n` bits per snapshot.
///
/// Returns the estimate together with the encoded batch.
pub fn full_pipeline(
    field: &FieldModel,
    deployment: &Deployment,
    noise: &NoiseModel,
    threshold: &ThresholdModel,
    seed: u64,
) -> Result<(FieldEstimate, Vec<u8>)> {
    let wire = WireFormat::for_partition(deployment.partition(), field.snapshots())?;
    let n = deployment.uniform_n().ok_or(Error::InvalidParameter {
        name: "deployment",
        reason: "pipeline reconstruction needs an exactly uniform deployment".into(),
    })?;
    let mut batch = Vec::with_capacity(deployment.sensor_count() * (4 + wire.message_len()));
    let mut payload = Vec::with_capacity(wire.payload_len());
    let mut scratch = SensorScratch::default();
    for i in 0..deployment.sensor_count() {
        sense_sensor_into(
            field,
            deployment.position(i),
            noise,
            threshold,
            seed,
            i as u64,
            &mut scratch,
        )?;
        let (j, k) = deployment.cell_of(i);
        payload.clear();
        payload.extend(
            transmission_snapshots(k, wire.m_count(), wire.t_count()).map(|t| scratch.bits[t - 1]),
        );
        wire.append_to_batch(j, k, &payload, &mut batch)?;
    }
    let mut acc = FusionAccumulator::new(deployment.partition(), &wire, n)?;
    acc.ingest_batch(&batch)?;
    Ok((acc.finish(threshold.c())?, batch))
}

/// As `full_pipeline`, but fusing each sensor's scheduled bits directly
/// without going through the wire encoding. Produces bit-identical
/// estimates (same draws, same integer tallies); the wire round trip is
/// exercised separately.
pub fn estimate_direct(
    field: &FieldModel,
    deployment: &Deployment,
    noise: &NoiseModel,
    threshold: &ThresholdModel,
    seed: u64,
) -> Result<FieldEstimate> {
    let wire = WireFormat::for_partition(deployment.partition(), field.snapshots())?;
    let n = deployment.uniform_n().ok_or(Error::InvalidParameter {
        name: "deployment",
        reason: "pipeline reconstruction needs an exactly uniform deployment".into(),
    })?;
    let mut acc = FusionAccumulator::new(deployment.partition(), &wire, n)?;
    let mut scratch = SensorScratch::default();
    for i in 0..deployment.sensor_count() {
        crate::sensing::sense_sensor_into_trusted(
            field,
            deployment.position(i),
            noise,
            threshold,
            seed,
            i as u64,
            &mut scratch,
        );
        let (j, k) = deployment.cell_of(i);
        acc.ingest_scheduled_trusted(j, k, &scratch.bits);
    }
    acc.finish(threshold.c())
}

/// A dither law known exactly at the fusion center.
///
/// Holds the cdf `F` of the dither added before the sign comparison; the
/// bit mean at signal `s` is `h(s) = 1 - F(-s)`, which must be strictly
/// increasing over the signal range `[-a', a']`.
pub struct DitherCdf {
    cdf: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    a_prime: f64,
}

impl DitherCdf {
    pub fn new<F>(cdf: F, a_prime: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(a_prime.is_finite() && a_prime > 0.0) {
            return Err(Error::InvalidParameter {
                name: "a_prime",
                reason: format!("signal range must be positive, got {a_prime}"),
            });
        }
        let d = DitherCdf {
            cdf: Box::new(cdf),
            a_prime,
        };
        // h must strictly increase across the signal range; probe densely.
        let probes = 256;
        let mut prev = d.mean_at(-a_prime);
        for i in 1..=probes {
            let s = -a_prime + 2.0 * a_prime * i as f64 / probes as f64;
            let cur = d.mean_at(s);
            if !(cur > prev) {
                return Err(Error::NonMonotoneDither {
                    lo: s - 2.0 * a_prime / probes as f64,
                    hi: s,
                });
            }
            prev = cur;
        }
        Ok(d)
    }

    /// Uniform dither on `[-c, c]`, invertible over the full range.
    pub fn uniform(c: f64) -> Result<Self> {
        DitherCdf::new(
            move |x: f64| ((x + c) / (2.0 * c)).clamp(0.0, 1.0),
            c,
        )
    }

    /// Signal range over which the inversion operates.
    pub fn a_prime(&self) -> f64 {
        self.a_prime
    }

    /// Expected bit mean at signal value `s`: `1 - F(-s)`.
    pub fn mean_at(&self, s: f64) -> f64 {
        1.0 - (self.cdf)(-s)
    }
}

/// Invert the known-dither bit mean: find `s` in `[-a', a']` with
/// `h(s) = p_bar`. Means outside the achievable interval return 0, the
/// neutral value.
pub fn reconstruct_known_dither(p_bar: f64, dither: &DitherCdf) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_bar) {
        return Err(Error::OutOfRange {
            what: "bit mean",
            value: p_bar,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let a = dither.a_prime();
    let (h_lo, h_hi) = (dither.mean_at(-a), dither.mean_at(a));
    if p_bar < h_lo || p_bar > h_hi {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-a, a);
    // Bisection on a strictly increasing function; 100 halvings take the
    // bracket far below any tolerance of interest.
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if dither.mean_at(mid) < p_bar {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldKind;
    use crate::geometry::{deploy_grid, deploy_iid_uniform};
    use crate::sensing::{CorrelationMode, NoiseFamily};
    use crate::seeds::{child_rng, DOMAIN_AUX};
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn estimate_matches_worked_example() {
        // Bits (1, 1, 0, 1), c = 2: mean 3/4, estimate 2*2*0.75 - 2 = 1.
        assert_eq!(estimate_supercell(&[1, 1, 0, 1], 2.0, 4).unwrap(), 1.0);
    }

    #[test]
    fn estimate_levels_are_the_expected_lattice() {
        // n = 6 gives the 7 levels -c + 2c k / 6.
        let c = 1.5;
        for k in 0..=6usize {
            let mut bits = vec![0u8; 6];
            bits[..k].fill(1);
            let est = estimate_supercell(&bits, c, 6).unwrap();
            let expect = -c + 2.0 * c * k as f64 / 6.0;
            assert!((est - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn estimate_rejects_wrong_count() {
        assert!(matches!(
            estimate_supercell(&[1, 0], 1.0, 3),
            Err(Error::WrongCount { .. })
        ));
    }

    fn pipeline_setup() -> (FieldModel, Deployment, NoiseModel, ThresholdModel) {
        let field = FieldModel::new(
            2,
            8,
            1.0,
            FieldKind::Sinusoidal {
                amplitude: 0.8,
                frequencies: vec![1.0, 2.0],
                phases: vec![0.3, 0.9, 1.4, 2.0, 2.7, 3.1, 3.8, 4.4],
            },
        )
        .unwrap();
        let partition = CellPartition::new(2, 2, 2).unwrap();
        let deployment = deploy_grid(&partition, 5).unwrap();
        let noise = NoiseModel::new(
            NoiseFamily::Uniform,
            0.4,
            CorrelationMode::IidPerSnapshot,
        )
        .unwrap();
        let threshold = ThresholdModel::new(1.4, CorrelationMode::IidPerSnapshot).unwrap();
        (field, deployment, noise, threshold)
    }

    #[test]
    fn pipeline_equals_direct_fusion() {
        let (field, dep, noise, thr) = pipeline_setup();
        let (est_pipe, batch) = full_pipeline(&field, &dep, &noise, &thr, 31).unwrap();
        let est_direct = estimate_direct(&field, &dep, &noise, &thr, 31).unwrap();
        assert_eq!(est_pipe.values, est_direct.values);
        assert!(!batch.is_empty());
        // 4 supercells * 8 snapshots.
        assert_eq!(est_pipe.values.len(), 32);
    }

    #[test]
    fn fusion_is_ingest_order_invariant() {
        let (field, dep, noise, thr) = pipeline_setup();
        let wire = WireFormat::for_partition(dep.partition(), field.snapshots()).unwrap();
        let (_, batch) = full_pipeline(&field, &dep, &noise, &thr, 7).unwrap();
        let msgs = wire.read_batch(&batch).unwrap();

        let mut in_order = FusionAccumulator::new(dep.partition(), &wire, 5).unwrap();
        for m in &msgs {
            in_order.ingest(m.supercell, m.subcell, &m.bits).unwrap();
        }
        let a = in_order.finish(thr.c()).unwrap();

        let mut shuffled_msgs = msgs.clone();
        shuffled_msgs.shuffle(&mut child_rng(99, DOMAIN_AUX, 0));
        let mut shuffled = FusionAccumulator::new(dep.partition(), &wire, 5).unwrap();
        for m in &shuffled_msgs {
            shuffled.ingest(m.supercell, m.subcell, &m.bits).unwrap();
        }
        let b = shuffled.finish(thr.c()).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn fusion_rejects_missing_or_extra_messages() {
        let (field, dep, noise, thr) = pipeline_setup();
        let wire = WireFormat::for_partition(dep.partition(), field.snapshots()).unwrap();
        let (_, batch) = full_pipeline(&field, &dep, &noise, &thr, 7).unwrap();
        let msgs = wire.read_batch(&batch).unwrap();

        let mut acc = FusionAccumulator::new(dep.partition(), &wire, 5).unwrap();
        for m in &msgs[..msgs.len() - 1] {
            acc.ingest(m.supercell, m.subcell, &m.bits).unwrap();
        }
        assert!(matches!(acc.finish(thr.c()), Err(Error::WrongCount { .. })));

        let mut acc = FusionAccumulator::new(dep.partition(), &wire, 5).unwrap();
        for m in &msgs {
            acc.ingest(m.supercell, m.subcell, &m.bits).unwrap();
        }
        let last = msgs.last().unwrap();
        acc.ingest(last.supercell, last.subcell, &last.bits).unwrap();
        assert!(matches!(acc.finish(thr.c()), Err(Error::WrongCount { .. })));
    }

    #[test]
    fn pipeline_needs_uniform_deployment() {
        let (field, _, noise, thr) = pipeline_setup();
        let partition = CellPartition::new(2, 2, 2).unwrap();
        // 97 sensors over 16 cells cannot be uniform.
        let dep = deploy_iid_uniform(&partition, 97, 5).unwrap();
        assert!(full_pipeline(&field, &dep, &noise, &thr, 1).is_err());
    }

    #[test]
    fn estimate_evaluates_piecewise_constant() {
        let (field, dep, noise, thr) = pipeline_setup();
        let (est, _) = full_pipeline(&field, &dep, &noise, &thr, 13).unwrap();
        // Two points in the same supercell see the same value.
        let a = est.evaluate(&[0.1, 0.1], 3).unwrap();
        let b = est.evaluate(&[0.4, 0.4], 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, est.value(3, 1));
        // Snapshot out of range.
        assert!(est.evaluate(&[0.1, 0.1], 9).is_err());
    }

    #[test]
    fn estimates_concentrate_on_a_constant_field() {
        // One supercell, one subcell, no noise spread beyond uniform: the
        // estimate of s = 0.4 from n = 4000 bits lands within 4 sigma of
        // the truth, where var = (c^2 - s^2) / n.
        let field =
            FieldModel::new(1, 1, 1.0, FieldKind::Constant { values: vec![0.4] }).unwrap();
        let partition = CellPartition::new(1, 1, 1).unwrap();
        let dep = deploy_grid(&partition, 4000).unwrap();
        let noise = NoiseModel::new(
            NoiseFamily::Uniform,
            0.5,
            CorrelationMode::IidPerSnapshot,
        )
        .unwrap();
        let thr = ThresholdModel::new(1.5, CorrelationMode::IidPerSnapshot).unwrap();
        let (est, _) = full_pipeline(&field, &dep, &noise, &thr, 21).unwrap();
        let c = thr.c();
        let sigma = ((c * c - 0.16) / 4000.0f64).sqrt();
        assert!((est.value(1, 1) - 0.4).abs() <= 4.0 * sigma);
    }

    #[test]
    fn clamping_pulls_values_into_range() {
        let (field, dep, noise, thr) = pipeline_setup();
        let (mut est, _) = full_pipeline(&field, &dep, &noise, &thr, 3).unwrap();
        est.clamp_to(0.05);
        assert!(est.values.iter().all(|&v| v.abs() <= 0.05));
    }

    // ---- known dither

    #[test]
    fn uniform_dither_inversion_matches_affine_estimator() {
        let c = 2.0;
        let dither = DitherCdf::uniform(c).unwrap();
        let mut rng = child_rng(17, DOMAIN_AUX, 1);
        for _ in 0..200 {
            let p_bar: f64 = rng.gen();
            let inverted = reconstruct_known_dither(p_bar, &dither).unwrap();
            let affine = 2.0 * c * p_bar - c;
            assert!((inverted - affine).abs() < 1e-9, "{inverted} vs {affine}");
        }
        assert!((reconstruct_known_dither(0.0, &dither).unwrap() + c).abs() < 1e-9);
        assert!((reconstruct_known_dither(1.0, &dither).unwrap() - c).abs() < 1e-9);
    }

    #[test]
    fn nonuniform_dither_round_trips_through_its_mean() {
        // Dither with cdf F(x) = ((x/c + 1) / 2)^2 on [-c, c]: h is
        // strictly increasing, so inversion recovers s from h(s).
        let c = 1.5;
        let dither = DitherCdf::new(
            move |x: f64| (((x / c + 1.0) / 2.0).clamp(0.0, 1.0)).powi(2),
            c,
        )
        .unwrap();
        // Interior grid: at the exact endpoints 1 - F(-s) rounds into 1.0
        // a few ulps early for cdfs with quadratic tangency.
        for i in 0..=20 {
            let s = 0.9 * (-c + 2.0 * c * i as f64 / 20.0);
            let p = dither.mean_at(s);
            let back = reconstruct_known_dither(p, &dither).unwrap();
            assert!((back - s).abs() < 1e-9, "s={s} back={back}");
        }
    }

    #[test]
    fn saturated_means_return_neutral_zero() {
        // Inversion range narrower than the dither support: unreachable
        // means collapse to 0.
        let dither = DitherCdf::new(move |x: f64| ((x + 2.0) / 4.0).clamp(0.0, 1.0), 1.0).unwrap();
        assert_eq!(reconstruct_known_dither(0.05, &dither).unwrap(), 0.0);
        assert_eq!(reconstruct_known_dither(0.95, &dither).unwrap(), 0.0);
        // Inside the achievable band inversion still works.
        let s = reconstruct_known_dither(dither.mean_at(0.5), &dither).unwrap();
        assert!((s - 0.5).abs() < 1e-9);
    }

    #[test]
    fn flat_dither_is_rejected() {
        assert!(matches!(
            DitherCdf::new(|_| 0.5, 1.0),
            Err(Error::NonMonotoneDither { .. })
        ));
        assert!(matches!(
            reconstruct_known_dither(1.5, &DitherCdf::uniform(1.0).unwrap()),
            Err(Error::OutOfRange { .. })
        ));
    }
}
