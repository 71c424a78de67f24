//! Cube partitioning and sensor deployment.
//!
//! The unit cube splits into `L = l^d` congruent supercells of side `1/l`,
//! and each supercell into `M = m^d` subcells of side `1/(lm)`. Cell indices
//! are 1-based and row-major with axis 0 least significant:
//!
//! ```text
//! j = 1 + sum_k min(floor(x_k * l), l - 1) * l^k
//! ```
//!
//! and the subcell index applies the same rule to supercell-local
//! coordinates. Points on the upper boundary clamp into the last cell, so
//! every point of the closed cube belongs to exactly one cell.
//!
//! Deployments place `N` sensors: the grid mode puts exactly `n` per subcell
//! at interior lattice points, the iid mode draws positions uniformly. The
//! occupancy of an iid deployment concentrates around uniform; the
//! method-of-types bound
//!
//! ```text
//! P(type outside U^delta) <= (N+1)^(LM) * 2^(-N * D(P* || U))
//! ```
//!
//! quantifies that, where `P*` is the divergence minimizer outside the
//! neighborhood: one cell pinned to `(1 +- delta)/(LM)`, the rest uniform.

use crate::error::Error;
use crate::fields::check_unit_cube;
use crate::seeds::{child_rng, DOMAIN_DEPLOYMENT};
use crate::Result;
use rand::Rng;

/// Supercell/subcell partition of the unit cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellPartition {
    d: usize,
    l: usize,
    m: usize,
}

impl CellPartition {
    /// Build a partition with `l` supercells and `m` subcells per axis.
    pub fn new(d: usize, l: usize, m: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "dimension must be at least 1".into(),
            });
        }
        if l == 0 || m == 0 {
            return Err(Error::InvalidParameter {
                name: "l",
                reason: "cells per axis must be at least 1".into(),
            });
        }
        let total = (l as u128 * m as u128).checked_pow(d as u32);
        match total {
            Some(v) if v <= usize::MAX as u128 => {}
            _ => {
                return Err(Error::InvalidParameter {
                    name: "partition",
                    reason: format!("(l*m)^d overflows with l={l}, m={m}, d={d}"),
                })
            }
        }
        Ok(CellPartition { d, l, m })
    }

    // ---- accessors

    /// Spatial dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Supercells per axis.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Subcells per axis within a supercell.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total supercell count `L = l^d`.
    pub fn supercell_count(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    /// Subcells per supercell `M = m^d`.
    pub fn subcell_count(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    /// Total subcell count `L * M`.
    pub fn cell_count(&self) -> usize {
        self.supercell_count() * self.subcell_count()
    }

    // ---- point location

    /// 1-based supercell index of a cube point.
    pub fn supercell_index(&self, x: &[f64]) -> Result<usize> {
        check_unit_cube(x, self.d)?;
        let mut j = 0usize;
        let mut stride = 1usize;
        for &v in x {
            let cell = ((v * self.l as f64).floor() as usize).min(self.l - 1);
            j += cell * stride;
            stride *= self.l;
        }
        Ok(j + 1)
    }

    /// 1-based (supercell, subcell) pair of a cube point.
    pub fn subcell_index(&self, x: &[f64]) -> Result<(usize, usize)> {
        check_unit_cube(x, self.d)?;
        let mut j = 0usize;
        let mut k = 0usize;
        let mut jstride = 1usize;
        let mut kstride = 1usize;
        for &v in x {
            let cell = ((v * self.l as f64).floor() as usize).min(self.l - 1);
            let local = v * self.l as f64 - cell as f64;
            let sub = ((local * self.m as f64).floor() as usize).min(self.m - 1);
            j += cell * jstride;
            k += sub * kstride;
            jstride *= self.l;
            kstride *= self.m;
        }
        Ok((j + 1, k + 1))
    }

    /// Flat 0-based index of subcell `k` of supercell `j` (both 1-based).
    pub fn flat_cell(&self, j: usize, k: usize) -> usize {
        (j - 1) * self.subcell_count() + (k - 1)
    }

    /// Axis-aligned box of subcell `k` of supercell `j` (both 1-based).
    pub fn subcell_box(&self, j: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
        let lo = self.subcell_corner(j, k);
        let side = 1.0 / (self.l * self.m) as f64;
        let hi = lo.iter().map(|&v| v + side).collect();
        (lo, hi)
    }

    /// Lower corner of subcell `k` of supercell `j` (both 1-based).
    fn subcell_corner(&self, j: usize, k: usize) -> Vec<f64> {
        let mut corner = vec![0.0; self.d];
        let mut jd = j - 1;
        let mut kd = k - 1;
        let side = 1.0 / (self.l * self.m) as f64;
        for c in corner.iter_mut() {
            let cj = jd % self.l;
            jd /= self.l;
            let ck = kd % self.m;
            kd /= self.m;
            *c = cj as f64 / self.l as f64 + ck as f64 * side;
        }
        corner
    }
}

/// Per-subcell sensor count `n = N / (L M)`, erroring unless it divides.
pub fn per_subcell_count(total: usize, partition: &CellPartition) -> Result<usize> {
    let cells = partition.cell_count();
    if total == 0 || total % cells != 0 {
        return Err(Error::Divisibility {
            what: "sensor count N",
            value: total,
            by: cells,
        });
    }
    Ok(total / cells)
}

/// How a deployment was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeploymentMode {
    /// Exactly `n` sensors per subcell at interior lattice points.
    Grid { n: usize },
    /// Positions drawn iid uniformly over the cube.
    IidUniform { seed: u64 },
}

/// Sensor positions plus their cell memberships under a partition.
#[derive(Debug, Clone)]
pub struct Deployment {
    partition: CellPartition,
    mode: DeploymentMode,
    /// Flat row-major positions, `d` coordinates per sensor.
    positions: Vec<f64>,
    /// Per sensor: 1-based (supercell, subcell).
    cells: Vec<(u32, u32)>,
    /// Per flat cell index: sensor count.
    counts: Vec<usize>,
}

impl Deployment {
    fn from_positions(
        partition: CellPartition,
        mode: DeploymentMode,
        positions: Vec<f64>,
    ) -> Result<Self> {
        let d = partition.d();
        let n_sensors = positions.len() / d;
        let mut cells = Vec::with_capacity(n_sensors);
        let mut counts = vec![0usize; partition.cell_count()];
        for i in 0..n_sensors {
            let x = &positions[i * d..(i + 1) * d];
            let (j, k) = partition.subcell_index(x)?;
            cells.push((j as u32, k as u32));
            counts[partition.flat_cell(j, k)] += 1;
        }
        Ok(Deployment {
            partition,
            mode,
            positions,
            cells,
            counts,
        })
    }

    // ---- accessors

    /// The partition the deployment lives on.
    pub fn partition(&self) -> &CellPartition {
        &self.partition
    }

    /// How the deployment was generated.
    pub fn mode(&self) -> DeploymentMode {
        self.mode
    }

    /// Total sensor count.
    pub fn sensor_count(&self) -> usize {
        self.cells.len()
    }

    /// Position of sensor `i` (0-based).
    pub fn position(&self, i: usize) -> &[f64] {
        let d = self.partition.d();
        &self.positions[i * d..(i + 1) * d]
    }

    /// 1-based (supercell, subcell) of sensor `i` (0-based).
    pub fn cell_of(&self, i: usize) -> (usize, usize) {
        let (j, k) = self.cells[i];
        (j as usize, k as usize)
    }

    /// Per-subcell sensor counts, flat-indexed.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// The common per-subcell count when occupancy is exactly uniform.
    pub fn uniform_n(&self) -> Option<usize> {
        let first = *self.counts.first()?;
        if self.counts.iter().all(|&c| c == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Occupancy counts per subcell together with the total.
    pub fn empirical_type(&self) -> EmpiricalType {
        EmpiricalType {
            counts: self.counts.clone(),
            total: self.sensor_count(),
        }
    }

    /// True when every subcell holds at least `gamma * N/(LM)` sensors.
    pub fn check_near_uniform(&self, gamma: f64) -> Result<bool> {
        if !(gamma.is_finite() && 0.0 < gamma && gamma <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must lie in (0, 1], got {gamma}"),
            });
        }
        let n = self.sensor_count() as f64 / self.partition.cell_count() as f64;
        // Tiny slack so gamma = 1 accepts an exactly uniform deployment.
        let floor = gamma * n - 1e-9;
        Ok(self.counts.iter().all(|&c| c as f64 >= floor))
    }
}

/// Deploy exactly `n` sensors in every subcell, at the first `n` points of
/// a centered lattice inside the subcell. Sensor order is subcell-major:
/// all of supercell 1 subcell 1, then subcell 2, and so on.
pub fn deploy_grid(partition: &CellPartition, n: usize) -> Result<Deployment> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least one sensor per subcell".into(),
        });
    }
    let d = partition.d();
    let q = (n as f64).powf(1.0 / d as f64).ceil() as usize;
    let q = q.max(1);
    // q^d >= n lattice slots; floating-point roundoff in powf could
    // undershoot by one.
    let q = if q.pow(d as u32) < n { q + 1 } else { q };
    let side = 1.0 / (partition.l() * partition.m()) as f64;
    let total = n * partition.cell_count();
    let mut positions = Vec::with_capacity(total * d);
    for j in 1..=partition.supercell_count() {
        for k in 1..=partition.subcell_count() {
            let corner = partition.subcell_corner(j, k);
            for slot in 0..n {
                let mut rem = slot;
                for c in corner.iter().take(d) {
                    let idx = rem % q;
                    rem /= q;
                    positions.push(c + side * (idx as f64 + 0.5) / q as f64);
                }
            }
        }
    }
    Deployment::from_positions(*partition, DeploymentMode::Grid { n }, positions)
}

/// Deploy `total` sensors iid uniformly over the cube, seeded.
pub fn deploy_iid_uniform(
    partition: &CellPartition,
    total: usize,
    seed: u64,
) -> Result<Deployment> {
    if total == 0 {
        return Err(Error::InvalidParameter {
            name: "total",
            reason: "need at least one sensor".into(),
        });
    }
    let d = partition.d();
    let mut rng = child_rng(seed, DOMAIN_DEPLOYMENT, 0);
    let mut positions = Vec::with_capacity(total * d);
    for _ in 0..total * d {
        positions.push(rng.gen::<f64>());
    }
    Deployment::from_positions(*partition, DeploymentMode::IidUniform { seed }, positions)
}

/// Subcell occupancy counts of a deployment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalType {
    counts: Vec<usize>,
    total: usize,
}

impl EmpiricalType {
    /// Counts per flat cell index.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Total sensor count.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Counts normalized to frequencies.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }
}

/// Result of the occupancy large-deviation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SanovBound {
    /// `min(1, (N+1)^(LM) 2^(-N D))`; zero when degenerate.
    pub probability: f64,
    /// The divergence exponent `D(P* || U)` in bits.
    pub divergence: f64,
    /// True when the neighborhood covers the whole simplex, so the bounded
    /// event is empty and the probability is exactly zero.
    pub degenerate: bool,
}

/// Bound the probability that the empirical type of `total` iid-uniform
/// sensors over `L * M` subcells leaves the `delta`-neighborhood
/// `[(1-delta)/(LM), (1+delta)/(LM)]` in some coordinate.
///
/// The divergence minimizer outside the neighborhood pins one coordinate to
/// a boundary value and spreads the rest uniformly; both boundaries are
/// evaluated and the smaller divergence wins.
pub fn sanov_bound(total: usize, l_count: usize, m_count: usize, delta: f64) -> Result<SanovBound> {
    if total == 0 || l_count == 0 || m_count == 0 {
        return Err(Error::InvalidParameter {
            name: "sanov_bound",
            reason: "N, L, M must all be positive".into(),
        });
    }
    if !(delta.is_finite() && 0.0 < delta && delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("must lie in (0, 1), got {delta}"),
        });
    }
    let cells = l_count
        .checked_mul(m_count)
        .ok_or_else(|| Error::InvalidParameter {
            name: "sanov_bound",
            reason: "L * M overflows".into(),
        })?;
    if cells < 2 {
        // One cell: the type simplex is the single point 1, which always
        // lies inside [1 - delta, 1 + delta].
        return Ok(SanovBound {
            probability: 0.0,
            divergence: 0.0,
            degenerate: true,
        });
    }
    let k = cells as f64;
    let divergence_for = |pinned: f64| -> f64 {
        let rest = (1.0 - pinned) / (k - 1.0);
        let term = |p: f64| if p > 0.0 { p * (p * k).log2() } else { 0.0 };
        term(pinned) + (k - 1.0) * term(rest)
    };
    let divergence = divergence_for((1.0 - delta) / k).min(divergence_for((1.0 + delta) / k));
    let n = total as f64;
    let log2_bound = k * (n + 1.0).log2() - n * divergence;
    let probability = log2_bound.exp2().min(1.0);
    Ok(SanovBound {
        probability,
        divergence,
        degenerate: false,
    })
}
