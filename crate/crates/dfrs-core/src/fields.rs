//! Field models on the unit cube and their moduli of continuity.
//!
//! A field is a family of scalar maps `s_t : [0,1]^d -> [-a, a]`, one per
//! snapshot `t = 1..T`. The reconstruction error bounds are driven by two
//! smoothness functionals:
//!
//! * the local modulus `omega_t(delta, x) = sup { |s_t(x) - s_t(x')| :
//!   x' in G, |x - x'| <= delta }`, and
//! * the global modulus `omega~_t(delta) = sup_x omega_t(delta, x)`,
//!
//! both over the Euclidean norm and always intersected with the cube.
//! Constant, linear and step fields have exact moduli; the sinusoidal kind
//! falls back to a dense grid search (at least 1e3 points per axis inside
//! the delta-ball, refined once around the argmax).

use crate::error::Error;
use crate::Result;

/// Absolute slack for validating `sup |s| <= a` against rounding.
const RANGE_TOL: f64 = 1e-12;

/// Shape of a field model; parameters are validated by [`FieldModel::new`].
#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    /// Spatially constant, one value per snapshot.
    Constant { values: Vec<f64> },
    /// Affine in space: `s_t(x) = slopes . x + offsets[t-1]`.
    LipschitzLinear { slopes: Vec<f64>, offsets: Vec<f64> },
    /// `s_t(x) = amplitude * sin(2 pi frequencies . x + phases[t-1])`.
    Sinusoidal {
        amplitude: f64,
        frequencies: Vec<f64>,
        phases: Vec<f64>,
    },
    /// Two levels split by the hyperplane `normal . x = offset`; the side
    /// with `normal . x >= offset` takes `level_high`. Constant over time.
    PiecewiseStep {
        normal: Vec<f64>,
        offset: f64,
        level_low: f64,
        level_high: f64,
    },
}

impl FieldKind {
    fn name(&self) -> &'static str {
        match self {
            FieldKind::Constant { .. } => "constant",
            FieldKind::LipschitzLinear { .. } => "lipschitz_linear",
            FieldKind::Sinusoidal { .. } => "sinusoidal",
            FieldKind::PiecewiseStep { .. } => "piecewise_step",
        }
    }
}

/// A validated field model: dimension, snapshot count, dynamic range `a`
/// with `sup_t sup_x |s_t(x)| <= a`, and the shape itself.
#[derive(Debug, Clone)]
pub struct FieldModel {
    d: usize,
    t_count: usize,
    range: f64,
    kind: FieldKind,
}

impl FieldModel {
    /// Build a field model, checking dimensions and that the field stays
    /// inside `[-range, range]` everywhere.
    pub fn new(d: usize, t_count: usize, range: f64, kind: FieldKind) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "dimension must be at least 1".into(),
            });
        }
        if t_count == 0 {
            return Err(Error::InvalidParameter {
                name: "t_count",
                reason: "need at least one snapshot".into(),
            });
        }
        if !(range.is_finite() && range >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "range",
                reason: format!("dynamic range must be finite and nonnegative, got {range}"),
            });
        }
        let model = FieldModel {
            d,
            t_count,
            range,
            kind,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let expect_len = |name: &'static str, got: usize, expected: usize| -> Result<()> {
            if got != expected {
                return Err(Error::DimensionMismatch {
                    what: name,
                    got,
                    expected,
                });
            }
            Ok(())
        };
        let finite = |name: &'static str, xs: &[f64]| -> Result<()> {
            if xs.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "contains a non-finite value".into(),
                });
            }
            Ok(())
        };
        let in_range = |lo: f64, hi: f64| -> Result<()> {
            let worst = lo.abs().max(hi.abs());
            if worst > self.range + RANGE_TOL {
                return Err(Error::OutOfRange {
                    what: "field value",
                    value: if hi.abs() >= lo.abs() { hi } else { lo },
                    lo: -self.range,
                    hi: self.range,
                });
            }
            Ok(())
        };
        match &self.kind {
            FieldKind::Constant { values } => {
                expect_len("values", values.len(), self.t_count)?;
                finite("values", values)?;
                for &v in values {
                    in_range(v, v)?;
                }
            }
            FieldKind::LipschitzLinear { slopes, offsets } => {
                expect_len("slopes", slopes.len(), self.d)?;
                expect_len("offsets", offsets.len(), self.t_count)?;
                finite("slopes", slopes)?;
                finite("offsets", offsets)?;
                // Extrema of an affine map over the cube are at coordinate
                // bounds: hi = off + sum max(g_k, 0), lo = off + sum min(g_k, 0).
                let pos: f64 = slopes.iter().map(|g| g.max(0.0)).sum();
                let neg: f64 = slopes.iter().map(|g| g.min(0.0)).sum();
                for &off in offsets {
                    in_range(off + neg, off + pos)?;
                }
            }
            FieldKind::Sinusoidal {
                amplitude,
                frequencies,
                phases,
            } => {
                expect_len("frequencies", frequencies.len(), self.d)?;
                expect_len("phases", phases.len(), self.t_count)?;
                finite("frequencies", frequencies)?;
                finite("phases", phases)?;
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "amplitude",
                        reason: format!("must be finite and nonnegative, got {amplitude}"),
                    });
                }
                in_range(-amplitude, *amplitude)?;
            }
            FieldKind::PiecewiseStep {
                normal,
                offset,
                level_low,
                level_high,
            } => {
                expect_len("normal", normal.len(), self.d)?;
                finite("normal", normal)?;
                if normal.iter().all(|&v| v == 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "normal",
                        reason: "must be a nonzero vector".into(),
                    });
                }
                if !offset.is_finite() || !level_low.is_finite() || !level_high.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "piecewise_step",
                        reason: "offset and levels must be finite".into(),
                    });
                }
                in_range(*level_low, *level_low)?;
                in_range(*level_high, *level_high)?;
            }
        }
        Ok(())
    }

    // ---- accessors

    /// Spatial dimension `d`.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of snapshots `T`.
    pub fn snapshots(&self) -> usize {
        self.t_count
    }

    /// Dynamic range bound `a`.
    pub fn range(&self) -> f64 {
        self.range
    }

    /// The underlying shape.
    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    /// Power-law form `omega~(delta) ~= coeff * delta^gamma` when one exists
    /// in closed form: `(0, 1)` for constant fields, `(|slopes|_2, 1)` for
    /// linear ones. Kinds served by the grid oracle have none.
    pub fn modulus_form(&self) -> Result<(f64, f64)> {
        match &self.kind {
            FieldKind::Constant { .. } => Ok((0.0, 1.0)),
            FieldKind::LipschitzLinear { slopes, .. } => Ok((norm2(slopes), 1.0)),
            k => Err(Error::NoClosedForm { kind: k.name() }),
        }
    }

    // ---- evaluation

    /// Field value at `x` (inside the closed unit cube) and snapshot `t`
    /// (1-based).
    pub fn evaluate(&self, x: &[f64], t: usize) -> Result<f64> {
        check_unit_cube(x, self.d)?;
        check_snapshot(t, self.t_count)?;
        Ok(self.eval_unchecked(x, t))
    }

    /// Evaluation without domain checks; callers guarantee `x` and `t`.
    pub(crate) fn eval_unchecked(&self, x: &[f64], t: usize) -> f64 {
        match &self.kind {
            FieldKind::Constant { values } => values[t - 1],
            FieldKind::LipschitzLinear { slopes, offsets } => {
                dot(slopes, x) + offsets[t - 1]
            }
            FieldKind::Sinusoidal {
                amplitude,
                frequencies,
                phases,
            } => {
                amplitude
                    * (2.0 * std::f64::consts::PI * dot(frequencies, x) + phases[t - 1]).sin()
            }
            FieldKind::PiecewiseStep {
                normal,
                offset,
                level_low,
                level_high,
            } => {
                if dot(normal, x) >= *offset {
                    *level_high
                } else {
                    *level_low
                }
            }
        }
    }

    // ---- moduli of continuity

    /// Local modulus `omega_t(delta, x)`: largest change of `s_t` between
    /// `x` and any cube point within Euclidean distance `delta`.
    pub fn local_modulus(&self, delta: f64, x: &[f64], t: usize) -> Result<f64> {
        check_unit_cube(x, self.d)?;
        check_snapshot(t, self.t_count)?;
        check_delta(delta)?;
        if delta == 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.kind {
            FieldKind::Constant { .. } => 0.0,
            FieldKind::LipschitzLinear { slopes, .. } => {
                // Feasible displacements keep x + u in the cube.
                let lo: Vec<f64> = x.iter().map(|&v| -v).collect();
                let hi: Vec<f64> = x.iter().map(|&v| 1.0 - v).collect();
                let up = max_linear_in_box_ball(slopes, &lo, &hi, delta);
                let neg: Vec<f64> = slopes.iter().map(|&g| -g).collect();
                let down = max_linear_in_box_ball(&neg, &lo, &hi, delta);
                up.max(down)
            }
            FieldKind::PiecewiseStep {
                normal,
                offset,
                level_low,
                level_high,
            } => self.step_local_modulus(normal, *offset, *level_low, *level_high, delta, x),
            FieldKind::Sinusoidal { .. } => self.local_modulus_grid(delta, x, t),
        })
    }

    /// Global modulus `omega~_t(delta) = sup_x omega_t(delta, x)`.
    pub fn global_modulus(&self, delta: f64, t: usize) -> Result<f64> {
        check_snapshot(t, self.t_count)?;
        check_delta(delta)?;
        if delta == 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.kind {
            FieldKind::Constant { .. } => 0.0,
            FieldKind::LipschitzLinear { slopes, .. } => {
                // Pair differences x - x' range over [-1, 1]^d; by symmetry
                // maximize sum |g_k| v_k over v in [0,1]^d within the ball.
                let g: Vec<f64> = slopes.iter().map(|v| v.abs()).collect();
                let lo = vec![0.0; self.d];
                let hi = vec![1.0; self.d];
                max_linear_in_box_ball(&g, &lo, &hi, delta)
            }
            FieldKind::PiecewiseStep {
                normal,
                offset,
                level_low,
                level_high,
            } => {
                // The jump is realized for every delta > 0 as soon as both
                // levels occur somewhere in the cube.
                let hi: f64 = normal.iter().map(|&v| v.max(0.0)).sum();
                let lo: f64 = normal.iter().map(|&v| v.min(0.0)).sum();
                if lo < *offset && hi >= *offset {
                    (level_high - level_low).abs()
                } else {
                    0.0
                }
            }
            FieldKind::Sinusoidal { .. } => self.global_modulus_grid(delta, t),
        })
    }

    /// Exact local modulus of a two-level field: the jump if the other side
    /// of the hyperplane is reachable inside the cube within `delta`.
    fn step_local_modulus(
        &self,
        normal: &[f64],
        offset: f64,
        level_low: f64,
        level_high: f64,
        delta: f64,
        x: &[f64],
    ) -> f64 {
        let jump = (level_high - level_low).abs();
        if jump == 0.0 {
            return 0.0;
        }
        let on_high_side = dot(normal, x) >= offset;
        if on_high_side {
            // The low side is open; it must be reached strictly.
            match cube_halfspace_distance(x, normal, offset, false) {
                Some((dist, attains_strictly)) if attains_strictly && dist < delta => jump,
                _ => 0.0,
            }
        } else {
            // The high side is closed; touching the hyperplane suffices.
            match cube_halfspace_distance(x, normal, offset, true) {
                Some((dist, _)) if dist <= delta => jump,
                _ => 0.0,
            }
        }
    }

    /// Grid-search local modulus: a lattice over the bounding box of the
    /// delta-ball clipped to the cube, filtered to the ball, then one
    /// refinement pass around the argmax.
    fn local_modulus_grid(&self, delta: f64, x: &[f64], t: usize) -> f64 {
        let s0 = self.eval_unchecked(x, t);
        let lo: Vec<f64> = x.iter().map(|&v| (v - delta).max(0.0)).collect();
        let hi: Vec<f64> = x.iter().map(|&v| (v + delta).min(1.0)).collect();
        let per_axis = oracle_points_per_axis(self.d);
        let objective = |p: &[f64]| (self.eval_unchecked(p, t) - s0).abs();

        let (best, best_p, step) = grid_search_ball(&lo, &hi, x, delta, per_axis, &objective);
        // One refinement around the argmax at the previous resolution.
        let rlo: Vec<f64> = best_p
            .iter()
            .zip(&lo)
            .zip(&hi)
            .map(|((&p, &l), &h)| (p - step).max(l).min(h))
            .collect();
        let rhi: Vec<f64> = best_p
            .iter()
            .zip(&lo)
            .zip(&hi)
            .map(|((&p, &l), &h)| (p + step).max(l).min(h))
            .collect();
        let (refined, _, _) = grid_search_ball(&rlo, &rhi, x, delta, 41, &objective);
        best.max(refined)
    }

    /// Grid-search global modulus: coarse search over pairs (x, x + u) with
    /// `|u| <= delta`, one joint refinement, then the full-resolution local
    /// oracle at the best base point so the result dominates it.
    fn global_modulus_grid(&self, delta: f64, t: usize) -> f64 {
        let pairs_per_axis = match self.d {
            1 => 1501,
            2 => 61,
            _ => 13,
        };
        let (mut best, best_x, best_u, hx, hu) =
            self.pair_search(&vec![0.0; self.d], &vec![1.0; self.d], None, delta, pairs_per_axis, t);

        // Joint refinement around the best pair.
        let rlo: Vec<f64> = best_x.iter().map(|&v| (v - hx).max(0.0)).collect();
        let rhi: Vec<f64> = best_x.iter().map(|&v| (v + hx).min(1.0)).collect();
        let (refined, refined_x, _, _, _) =
            self.pair_search(&rlo, &rhi, Some((&best_u, hu)), delta, 21, t);
        let mut best_base = best_x;
        if refined > best {
            best = refined;
            best_base = refined_x;
        }
        best.max(self.local_modulus_grid(delta, &best_base, t))
    }

    /// Search pairs (x, x + u), x on a lattice over [xlo, xhi], u on a
    /// lattice over the delta-ball box (or around a given center at radius
    /// `hu`). Returns (best value, best x, best u, x spacing, u spacing).
    fn pair_search(
        &self,
        xlo: &[f64],
        xhi: &[f64],
        u_window: Option<(&[f64], f64)>,
        delta: f64,
        per_axis: usize,
        t: usize,
    ) -> (f64, Vec<f64>, Vec<f64>, f64, f64) {
        let d = self.d;
        let (ulo, uhi): (Vec<f64>, Vec<f64>) = match u_window {
            Some((center, radius)) => (
                center.iter().map(|&v| (v - radius).max(-delta)).collect(),
                center.iter().map(|&v| (v + radius).min(delta)).collect(),
            ),
            None => (vec![-delta; d], vec![delta; d]),
        };
        let xsteps: Vec<f64> = xlo
            .iter()
            .zip(xhi)
            .map(|(&l, &h)| (h - l) / (per_axis.max(2) - 1) as f64)
            .collect();
        let usteps: Vec<f64> = ulo
            .iter()
            .zip(&uhi)
            .map(|(&l, &h)| (h - l) / (per_axis.max(2) - 1) as f64)
            .collect();

        let mut best = 0.0;
        let mut best_x = xlo.to_vec();
        let mut best_u = vec![0.0; d];
        let mut xpoint = vec![0.0; d];
        let mut upoint = vec![0.0; d];
        let mut ypoint = vec![0.0; d];
        let total_x = per_axis.pow(d as u32);
        let total_u = per_axis.pow(d as u32);
        for xi in 0..total_x {
            lattice_point(xi, per_axis, xlo, &xsteps, &mut xpoint);
            let sx = self.eval_unchecked(&xpoint, t);
            for ui in 0..total_u {
                lattice_point(ui, per_axis, &ulo, &usteps, &mut upoint);
                if norm2(&upoint) > delta {
                    continue;
                }
                let mut inside = true;
                for k in 0..d {
                    let y = xpoint[k] + upoint[k];
                    if !(0.0..=1.0).contains(&y) {
                        inside = false;
                        break;
                    }
                    ypoint[k] = y;
                }
                if !inside {
                    continue;
                }
                let v = (self.eval_unchecked(&ypoint, t) - sx).abs();
                if v > best {
                    best = v;
                    best_x.copy_from_slice(&xpoint);
                    best_u.copy_from_slice(&upoint);
                }
            }
        }
        let hx = xsteps.iter().cloned().fold(0.0f64, f64::max);
        let hu = usteps.iter().cloned().fold(0.0f64, f64::max);
        (best, best_x, best_u, hx, hu)
    }
}

// ---- shared validation helpers

/// Check `x` is a d-vector inside the closed unit cube.
pub(crate) fn check_unit_cube(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            what: "point",
            got: x.len(),
            expected: d,
        });
    }
    for (axis, &v) in x.iter().enumerate() {
        if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
            return Err(Error::OutOfDomain { axis, value: v });
        }
    }
    Ok(())
}

/// Check a 1-based snapshot index.
pub(crate) fn check_snapshot(t: usize, t_count: usize) -> Result<()> {
    if t == 0 || t > t_count {
        return Err(Error::BadSnapshot { t, t_count });
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("must be finite and nonnegative, got {delta}"),
        });
    }
    Ok(())
}

// ---- small vector helpers

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Grid resolution per axis for the modulus oracle: 1001 up to d = 2, then
/// capped so total work stays near 1e6 points.
fn oracle_points_per_axis(d: usize) -> usize {
    match d {
        1 | 2 => 1001,
        _ => (1e6_f64.powf(1.0 / d as f64).ceil() as usize).max(5),
    }
}

/// Write lattice point `index` (mixed-radix, axis 0 fastest) into `out`.
fn lattice_point(mut index: usize, per_axis: usize, lo: &[f64], steps: &[f64], out: &mut [f64]) {
    for k in 0..out.len() {
        let i = index % per_axis;
        index /= per_axis;
        out[k] = lo[k] + steps[k] * i as f64;
    }
}

/// Dense lattice search of `objective` over the box `[lo, hi]` restricted to
/// the ball `|p - center| <= delta`. Returns (best value, argmax, max step).
fn grid_search_ball(
    lo: &[f64],
    hi: &[f64],
    center: &[f64],
    delta: f64,
    per_axis: usize,
    objective: &dyn Fn(&[f64]) -> f64,
) -> (f64, Vec<f64>, f64) {
    let d = lo.len();
    let steps: Vec<f64> = lo
        .iter()
        .zip(hi)
        .map(|(&l, &h)| (h - l) / (per_axis.max(2) - 1) as f64)
        .collect();
    let mut best = 0.0;
    let mut best_p = center.to_vec();
    let mut p = vec![0.0; d];
    let total = per_axis.pow(d as u32);
    for i in 0..total {
        lattice_point(i, per_axis, lo, &steps, &mut p);
        let mut dist2 = 0.0;
        for k in 0..d {
            let dv = p[k] - center[k];
            dist2 += dv * dv;
        }
        if dist2 > delta * delta {
            continue;
        }
        let v = objective(&p);
        if v > best {
            best = v;
            best_p.copy_from_slice(&p);
        }
    }
    (best, best_p, steps.iter().cloned().fold(0.0f64, f64::max))
}

/// Maximum of `g . u` over `{ lo <= u <= hi, |u|_2 <= delta }`, assuming the
/// box contains the origin. The maximizer has the form
/// `u_k = clamp(lambda g_k, lo_k, hi_k)`; `lambda` is found by bisection on
/// the monotone map `lambda -> |u(lambda)|`.
fn max_linear_in_box_ball(g: &[f64], lo: &[f64], hi: &[f64], delta: f64) -> f64 {
    let d = g.len();
    let gnorm = norm2(g);
    if gnorm == 0.0 || delta <= 0.0 {
        return 0.0;
    }
    // Fast path: unconstrained ball optimum already inside the box.
    let scale = delta / gnorm;
    if (0..d).all(|k| {
        let u = scale * g[k];
        u >= lo[k] - 1e-15 && u <= hi[k] + 1e-15
    }) {
        return delta * gnorm;
    }
    let clamped = |lambda: f64, k: usize| (lambda * g[k]).clamp(lo[k], hi[k]);
    let norm_at = |lambda: f64| -> f64 {
        (0..d)
            .map(|k| {
                let u = clamped(lambda, k);
                u * u
            })
            .sum::<f64>()
            .sqrt()
    };
    // Box-saturated value; if even that stays inside the ball, take it.
    let saturated_norm = norm_at(f64::INFINITY);
    if saturated_norm <= delta {
        return (0..d).map(|k| g[k] * clamped(f64::INFINITY, k)).sum();
    }
    let mut lam_hi = scale;
    while norm_at(lam_hi) < delta {
        lam_hi *= 2.0;
    }
    let mut lam_lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lam_lo + lam_hi);
        if norm_at(mid) < delta {
            lam_lo = mid;
        } else {
            lam_hi = mid;
        }
    }
    let lambda = 0.5 * (lam_lo + lam_hi);
    (0..d).map(|k| g[k] * clamped(lambda, k)).sum()
}

/// Euclidean distance from `x` to the set `{ p in [0,1]^d : n . p >= c }`
/// (or `<= c` when `upper` is false), together with whether the target open
/// side is attainable strictly inside the cube. `None` when the closed set
/// itself is empty.
fn cube_halfspace_distance(
    x: &[f64],
    normal: &[f64],
    c: f64,
    upper: bool,
) -> Option<(f64, bool)> {
    let d = x.len();
    // Work with the ">= c" form; flip sign for the lower side.
    let (n, target): (Vec<f64>, f64) = if upper {
        (normal.to_vec(), c)
    } else {
        (normal.iter().map(|&v| -v).collect(), -c)
    };
    let proj = |mu: f64| -> Vec<f64> {
        (0..d).map(|k| (x[k] + mu * n[k]).clamp(0.0, 1.0)).collect()
    };
    let value = |p: &[f64]| dot(&n, p);
    if value(&proj(0.0)) >= target {
        // Already on the target side (x is in the cube, so proj(0) = x).
        return Some((0.0, value(&proj(f64::INFINITY)) > target));
    }
    let sup = value(&proj(f64::INFINITY));
    if sup < target {
        return None;
    }
    // value(proj(mu)) is nondecreasing in mu; bisect for the crossing.
    let mut mu_hi = 1.0;
    while value(&proj(mu_hi)) < target {
        mu_hi *= 2.0;
    }
    let mut mu_lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (mu_lo + mu_hi);
        if value(&proj(mid)) < target {
            mu_lo = mid;
        } else {
            mu_hi = mid;
        }
    }
    let p = proj(mu_hi);
    let dist = (0..d)
        .map(|k| (p[k] - x[k]).powi(2))
        .sum::<f64>()
        .sqrt();
    Some((dist, sup > target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_1d(slope: f64, offset: f64, range: f64) -> FieldModel {
        FieldModel::new(
            1,
            1,
            range,
            FieldKind::LipschitzLinear {
                slopes: vec![slope],
                offsets: vec![offset],
            },
        )
        .unwrap()
    }

    fn sine_1d() -> FieldModel {
        FieldModel::new(
            1,
            1,
            1.0,
            FieldKind::Sinusoidal {
                amplitude: 1.0,
                frequencies: vec![1.0],
                phases: vec![0.0],
            },
        )
        .unwrap()
    }

    fn step_1d() -> FieldModel {
        FieldModel::new(
            1,
            1,
            0.5,
            FieldKind::PiecewiseStep {
                normal: vec![1.0],
                offset: 0.5,
                level_low: -0.5,
                level_high: 0.5,
            },
        )
        .unwrap()
    }

    // ---- evaluation

    #[test]
    fn constant_field_returns_snapshot_value() {
        let f = FieldModel::new(
            2,
            3,
            1.0,
            FieldKind::Constant {
                values: vec![0.1, -0.4, 0.9],
            },
        )
        .unwrap();
        assert_eq!(f.evaluate(&[0.3, 0.7], 2).unwrap(), -0.4);
        assert_eq!(f.evaluate(&[1.0, 1.0], 3).unwrap(), 0.9);
    }

    #[test]
    fn linear_field_evaluates() {
        let f = linear_1d(1.0, -0.5, 0.5);
        assert!((f.evaluate(&[0.25], 1).unwrap() - (-0.25)).abs() < 1e-15);
    }

    #[test]
    fn sinusoidal_peak_value() {
        let f = sine_1d();
        assert!((f.evaluate(&[0.25], 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_field_sides() {
        let f = step_1d();
        assert_eq!(f.evaluate(&[0.2], 1).unwrap(), -0.5);
        assert_eq!(f.evaluate(&[0.5], 1).unwrap(), 0.5);
        assert_eq!(f.evaluate(&[0.9], 1).unwrap(), 0.5);
    }

    #[test]
    fn boundary_points_are_inside_the_domain() {
        let f = linear_1d(1.0, -0.5, 0.5);
        assert!(f.evaluate(&[1.0], 1).is_ok());
        assert!(f.evaluate(&[0.0], 1).is_ok());
    }

    #[test]
    fn out_of_domain_and_bad_snapshot_are_rejected() {
        let f = linear_1d(1.0, -0.5, 0.5);
        assert!(matches!(
            f.evaluate(&[1.0 + 1e-9], 1),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            f.evaluate(&[-0.1], 1),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            f.evaluate(&[0.5], 2),
            Err(Error::BadSnapshot { .. })
        ));
        assert!(matches!(
            f.evaluate(&[0.5, 0.5], 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn range_violations_are_rejected_at_construction() {
        // Linear reaching 0.7 at x = 1 while claiming range 0.5.
        let err = FieldModel::new(
            1,
            1,
            0.5,
            FieldKind::LipschitzLinear {
                slopes: vec![1.0],
                offsets: vec![-0.3],
            },
        );
        assert!(matches!(err, Err(Error::OutOfRange { .. })));
        let err = FieldModel::new(
            1,
            1,
            0.5,
            FieldKind::Constant { values: vec![0.6] },
        );
        assert!(matches!(err, Err(Error::OutOfRange { .. })));
    }

    // ---- local modulus, closed forms

    #[test]
    fn linear_interior_local_modulus_is_exact() {
        let f = linear_1d(1.0, -0.5, 0.5);
        let w = f.local_modulus(0.1, &[0.5], 1).unwrap();
        assert_eq!(w, 0.1);
    }

    #[test]
    fn linear_local_modulus_at_boundary_uses_the_available_side() {
        let f = linear_1d(1.0, -0.5, 0.5);
        // At x = 1 only the left side remains; the change is still delta.
        let w = f.local_modulus(0.1, &[1.0], 1).unwrap();
        assert!((w - 0.1).abs() < 1e-12);
    }

    #[test]
    fn linear_local_modulus_2d_edge_is_box_limited() {
        let f = FieldModel::new(
            2,
            1,
            2.0,
            FieldKind::LipschitzLinear {
                slopes: vec![1.0, 1.0],
                offsets: vec![0.0],
            },
        )
        .unwrap();
        let interior = f.local_modulus(0.1, &[0.5, 0.5], 1).unwrap();
        assert!((interior - 0.1 * 2f64.sqrt()).abs() < 1e-12);
        // At the corner (1, 0) moves along +x1 are blocked and the two slopes
        // fight each other: best is a full step along a single free axis.
        let corner = f.local_modulus(0.1, &[1.0, 0.0], 1).unwrap();
        assert!((corner - 0.1).abs() < 1e-10, "got {corner}");
    }

    #[test]
    fn constant_modulus_is_zero() {
        let f = FieldModel::new(1, 1, 1.0, FieldKind::Constant { values: vec![0.3] }).unwrap();
        assert_eq!(f.local_modulus(0.4, &[0.2], 1).unwrap(), 0.0);
        assert_eq!(f.global_modulus(0.4, 1).unwrap(), 0.0);
    }

    // ---- local modulus, step fields

    #[test]
    fn step_local_modulus_reaches_the_jump_exactly_when_the_plane_is_near() {
        let f = step_1d();
        // x = 0.2 (low side): plane at distance 0.3. Exact equality of dist
        // and delta is not meaningful in floats, so probe both sides of it.
        assert_eq!(f.local_modulus(0.2, &[0.2], 1).unwrap(), 0.0);
        assert_eq!(f.local_modulus(0.3 - 1e-9, &[0.2], 1).unwrap(), 0.0);
        assert_eq!(f.local_modulus(0.3 + 1e-9, &[0.2], 1).unwrap(), 1.0);
        assert_eq!(f.local_modulus(0.31, &[0.2], 1).unwrap(), 1.0);
        // x = 0.6 (high side): the open low side needs strict crossing.
        assert_eq!(f.local_modulus(0.1 - 1e-9, &[0.6], 1).unwrap(), 0.0);
        assert_eq!(f.local_modulus(0.1 + 1e-9, &[0.6], 1).unwrap(), 1.0);
        // A point on the plane sees the low side immediately.
        assert_eq!(f.local_modulus(0.01, &[0.5], 1).unwrap(), 1.0);
    }

    #[test]
    fn step_global_modulus_is_the_jump_for_any_positive_delta() {
        let f = step_1d();
        assert_eq!(f.global_modulus(1e-6, 1).unwrap(), 1.0);
        assert_eq!(f.global_modulus(0.5, 1).unwrap(), 1.0);
        assert_eq!(f.global_modulus(0.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn step_with_plane_outside_cube_is_flat() {
        let f = FieldModel::new(
            1,
            1,
            0.5,
            FieldKind::PiecewiseStep {
                normal: vec![1.0],
                offset: 1.5,
                level_low: -0.5,
                level_high: 0.5,
            },
        )
        .unwrap();
        assert_eq!(f.global_modulus(0.3, 1).unwrap(), 0.0);
        assert_eq!(f.local_modulus(0.3, &[0.9], 1).unwrap(), 0.0);
    }

    // ---- local modulus, grid oracle

    /// Independent oracle: plain dense sweep, no refinement, separate code
    /// path from the implementation.
    fn brute_force_local_modulus_1d(
        f: &FieldModel,
        delta: f64,
        x: f64,
        t: usize,
        points: usize,
    ) -> f64 {
        let s0 = f.evaluate(&[x], t).unwrap();
        let lo = (x - delta).max(0.0);
        let hi = (x + delta).min(1.0);
        let mut best = 0.0f64;
        for i in 0..points {
            let p = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            if (p - x).abs() <= delta {
                best = best.max((f.evaluate(&[p], t).unwrap() - s0).abs());
            }
        }
        best
    }

    #[test]
    fn sinusoidal_local_modulus_matches_brute_force() {
        let f = sine_1d();
        let w = f.local_modulus(0.05, &[0.25], 1).unwrap();
        let oracle = brute_force_local_modulus_1d(&f, 0.05, 0.25, 1, 10_000);
        // Analytic value at the peak: 1 - sin(2 pi 0.3).
        let exact = 1.0 - (2.0 * std::f64::consts::PI * 0.3).sin();
        assert!((exact - 0.048_943_483_704_846_45).abs() < 1e-15);
        assert!((w - exact).abs() < 1e-6, "impl {w} vs exact {exact}");
        assert!(w + 1e-9 >= oracle, "impl {w} below oracle {oracle}");
    }

    #[test]
    fn sinusoidal_global_modulus_near_closed_form_values() {
        let f = sine_1d();
        // Pairs a quarter period apart around a zero crossing: 2 sin(pi/4).
        let w = f.global_modulus(0.25, 1).unwrap();
        assert!((w - 2f64.sqrt()).abs() < 2e-4, "got {w}");
        // Half a period reaches peak-to-trough.
        let w2 = f.global_modulus(0.5, 1).unwrap();
        assert!((w2 - 2.0).abs() < 2e-4, "got {w2}");
        assert!(w2 <= 2.0 * f.range() + 1e-12);
    }

    #[test]
    fn grid_oracle_stays_at_or_under_closed_form_on_linear_fields() {
        // Run the oracle path directly on a linear field where the closed
        // form is exact; the lattice can only undershoot the supremum.
        let f = linear_1d(1.0, -0.5, 0.5);
        for &(delta, x) in &[(0.05, 0.3), (0.2, 0.5), (0.1, 0.95)] {
            let closed = f.local_modulus(delta, &[x], 1).unwrap();
            let grid = f.local_modulus_grid(delta, &[x], 1);
            assert!(
                grid <= closed + 1e-12,
                "grid {grid} exceeds closed form {closed}"
            );
            // Resolution slack: step size times the Lipschitz constant.
            let slack = delta / 500.0;
            assert!(
                grid >= closed - slack,
                "grid {grid} far below closed form {closed}"
            );
        }
    }

    // ---- modulus ordering and monotonicity

    #[test]
    fn moduli_are_monotone_and_ordered() {
        let fields = vec![
            linear_1d(1.0, -0.5, 0.5),
            sine_1d(),
            step_1d(),
            FieldModel::new(1, 1, 1.0, FieldKind::Constant { values: vec![0.7] }).unwrap(),
        ];
        let deltas = [0.0, 0.05, 0.1, 0.3, 0.7];
        let points = [0.0, 0.25, 0.5, 0.9, 1.0];
        for f in &fields {
            let mut prev_global = 0.0;
            for &delta in &deltas {
                let global = f.global_modulus(delta, 1).unwrap();
                assert!(global + 1e-9 >= prev_global, "global not monotone");
                assert!(global <= 2.0 * f.range() + 1e-9);
                for &x in &points {
                    let local = f.local_modulus(delta, &[x], 1).unwrap();
                    assert!(local >= 0.0);
                    assert!(
                        local <= global + 1e-3,
                        "local {local} above global {global} (delta {delta}, x {x})"
                    );
                }
                prev_global = global;
            }
        }
    }

    #[test]
    fn modulus_form_exists_only_in_closed_form_kinds() {
        assert_eq!(linear_1d(2.0, 0.0, 2.0).modulus_form().unwrap(), (2.0, 1.0));
        assert!(matches!(
            sine_1d().modulus_form(),
            Err(Error::NoClosedForm { .. })
        ));
        assert!(matches!(
            step_1d().modulus_form(),
            Err(Error::NoClosedForm { .. })
        ));
    }
}
