//! Minimax MSE of the non-separable projections via interval-length
//! distributions.
//!
//! For a far-off piecewise-constant signal, the risk decomposes over the
//! constant intervals, so the least favorable signal is described by a
//! distribution π over interval lengths (and boundary types, for TV) with
//! mean constraint Σ ℓ·π_ℓ = 1/ε. A maximization of a linear functional
//! under one mean constraint has a ≤ 2-atom optimum, which is exactly the
//! upper concave envelope of the risk-vs-length point set evaluated at 1/ε.

use super::MinimaxCurvePoint;
use crate::denoise::{BoundaryType, Denoiser};
use crate::error::{Error, Result};
use crate::risk::{risk_tv_zero, MonoRiskTable, TvRiskTable};
use serde::{Deserialize, Serialize};

/// Weighted atom of an interval-length distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalAtom {
    pub len: usize,
    pub boundary: Option<BoundaryType>,
    pub weight: f64,
}

/// Distribution over constant-interval lengths (optionally typed by the
/// signs of the adjacent jumps).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalDistribution {
    pub entries: Vec<IntervalAtom>,
}

impl IntervalDistribution {
    pub fn mean_length(&self) -> f64 {
        self.entries.iter().map(|a| a.len as f64 * a.weight).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|a| a.weight).sum()
    }

    pub fn validate(&self, epsilon: Option<f64>) -> Result<()> {
        if self.entries.iter().any(|a| a.weight < -1e-12 || a.len == 0) {
            return Err(Error::invalid("interval weights must be >= 0 with positive lengths"));
        }
        if (self.total_weight() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("interval weights must sum to 1"));
        }
        if let Some(eps) = epsilon {
            if (self.mean_length() - 1.0 / eps).abs() > 1e-6 / eps {
                return Err(Error::invalid(format!(
                    "mean interval length {} does not match 1/epsilon = {}",
                    self.mean_length(),
                    1.0 / eps
                )));
            }
        }
        Ok(())
    }

    /// Geometric length law of independent change points,
    /// π_ℓ = ε(1−ε)^{ℓ−1}, truncated once the residual weight drops below
    /// `residual_cut` and renormalized.
    pub fn geometric(epsilon: f64, boundary: Option<BoundaryType>, residual_cut: f64) -> Self {
        let mut entries = Vec::new();
        let mut w = epsilon;
        let mut total = 0.0;
        let mut len = 1usize;
        while 1.0 - total > residual_cut && len < 100_000 {
            entries.push(IntervalAtom { len, boundary, weight: w });
            total += w;
            w *= 1.0 - epsilon;
            len += 1;
        }
        let norm = entries.iter().map(|a| a.weight).sum::<f64>();
        for a in entries.iter_mut() {
            a.weight /= norm;
        }
        IntervalDistribution { entries }
    }
}

/// Upper concave envelope (least concave majorant) of a point set, returned
/// as its hull vertices in increasing x. Input need not be sorted.
pub fn concave_envelope(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.partial_cmp(&a.1).unwrap()));
    pts.dedup_by(|a, b| {
        if a.0 == b.0 {
            // keep the higher value at duplicate abscissas
            b.1 = b.1.max(a.1);
            true
        } else {
            false
        }
    });
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        hull.push(p);
        while hull.len() >= 3 {
            let (x1, y1) = hull[hull.len() - 3];
            let (x2, y2) = hull[hull.len() - 2];
            let (x3, y3) = hull[hull.len() - 1];
            // drop the middle point if it is on or below the chord
            if (y2 - y1) * (x3 - x1) <= (y3 - y1) * (x2 - x1) + 1e-15 {
                hull.remove(hull.len() - 2);
            } else {
                break;
            }
        }
    }
    hull
}

/// Envelope value at `q` plus the bracketing vertex indices.
fn envelope_eval(hull: &[(f64, f64)], q: f64) -> Result<(f64, usize, usize)> {
    if hull.is_empty() {
        return Err(Error::invalid("empty envelope"));
    }
    if q < hull[0].0 - 1e-12 || q > hull[hull.len() - 1].0 + 1e-12 {
        return Err(Error::invalid(format!(
            "query {q} outside tabulated range [{}, {}]",
            hull[0].0,
            hull[hull.len() - 1].0
        )));
    }
    let mut i = 0;
    while i + 1 < hull.len() && hull[i + 1].0 < q {
        i += 1;
    }
    if i + 1 == hull.len() {
        return Ok((hull[i].1, i, i));
    }
    let (x1, y1) = hull[i];
    let (x2, y2) = hull[i + 1];
    if (q - x1).abs() < 1e-12 {
        return Ok((y1, i, i));
    }
    if (q - x2).abs() < 1e-12 {
        return Ok((y2, i + 1, i + 1));
    }
    let t = (q - x1) / (x2 - x1);
    Ok((y1 + t * (y2 - y1), i, i + 1))
}

/// Two-atom distribution on the bracketing lengths solving the mean
/// constraint Σ ℓπ_ℓ = q.
fn bracket_distribution(
    hull: &[(f64, f64)],
    q: f64,
    i: usize,
    j: usize,
    boundary_of: impl Fn(usize) -> Option<BoundaryType>,
) -> IntervalDistribution {
    if i == j {
        let len = hull[i].0.round() as usize;
        return IntervalDistribution {
            entries: vec![IntervalAtom { len, boundary: boundary_of(i), weight: 1.0 }],
        };
    }
    let (l1, l2) = (hull[i].0, hull[j].0);
    let w2 = (q - l1) / (l2 - l1);
    IntervalDistribution {
        entries: vec![
            IntervalAtom {
                len: l1.round() as usize,
                boundary: boundary_of(i),
                weight: 1.0 - w2,
            },
            IntervalAtom { len: l2.round() as usize, boundary: boundary_of(j), weight: w2 },
        ],
    }
}

/// Minimax MSE of monotone regression over ε-simple monotone signals:
/// M = ε · envelope{(ℓ, r(ℓ))}(1/ε), with the optimal π on the bracketing
/// envelope vertices.
pub fn mse_monotone(
    epsilon: f64,
    table: &MonoRiskTable,
) -> Result<(MinimaxCurvePoint, IntervalDistribution)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon must lie in (0,1)"));
    }
    let q = 1.0 / epsilon;
    let pts: Vec<(f64, f64)> =
        table.lens.iter().zip(&table.r).map(|(&l, &r)| (l as f64, r)).collect();
    let hull = concave_envelope(&pts);
    let (val, i, j) = envelope_eval(&hull, q)?;
    let dist = bracket_distribution(&hull, q, i, j, |_| None);
    let point = MinimaxCurvePoint::new(epsilon, epsilon * val, Denoiser::Monotone, f64::INFINITY);
    Ok((point, dist))
}

/// Inner TV maximization at one τ: envelope of the merged (ℓ, r_s) point
/// sets over both boundary types.
fn tv_inner(
    table: &TvRiskTable,
    ti: usize,
    q: f64,
) -> Result<(f64, IntervalDistribution)> {
    let mut pts: Vec<(f64, f64, BoundaryType)> = Vec::new();
    for (li, &len) in table.lens.iter().enumerate() {
        pts.push((len as f64, table.pp[ti][li], BoundaryType::PlusPlus));
        pts.push((len as f64, table.pm[ti][li], BoundaryType::PlusMinus));
    }
    let flat: Vec<(f64, f64)> = pts.iter().map(|&(x, y, _)| (x, y)).collect();
    let hull = concave_envelope(&flat);
    let (val, i, j) = envelope_eval(&hull, q)?;
    let boundary_of = |idx: usize| {
        let (x, y) = hull[idx];
        pts.iter()
            .find(|&&(px, py, _)| px == x && (py - y).abs() < 1e-12)
            .map(|&(_, _, b)| b)
    };
    Ok((val, bracket_distribution(&hull, q, i, j, boundary_of)))
}

/// Minimax MSE of the TV denoiser over ε-simple piecewise-constant signals
/// with interval lengths capped by the table range: inf over τ (grid plus
/// local refinement) of the inner envelope maximum.
pub fn mse_tv(
    epsilon: f64,
    table: &TvRiskTable,
) -> Result<(MinimaxCurvePoint, IntervalDistribution)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon must lie in (0,1)"));
    }
    let q = 1.0 / epsilon;
    let mut best: Option<(f64, usize)> = None;
    for ti in 0..table.taus.len() {
        let (val, _) = tv_inner(table, ti, q)?;
        if best.map_or(true, |(v, _)| val < v) {
            best = Some((val, ti));
        }
    }
    let (coarse_val, ti) = best.ok_or_else(|| Error::invalid("empty tau grid"))?;
    // τ = 0 (identity) always achieves inner value exactly 1/ε; when the
    // tabulated grid cannot beat it the curve caps at M = 1.
    if coarse_val >= q {
        log::warn!("tv minimax: no tabulated tau beats the identity at eps = {epsilon}");
        let dist = IntervalDistribution {
            entries: vec![IntervalAtom {
                len: q.round().max(1.0) as usize,
                boundary: Some(BoundaryType::PlusPlus),
                weight: 1.0,
            }],
        };
        let point = MinimaxCurvePoint::new(epsilon, 1.0, Denoiser::tv(0.0)?, f64::INFINITY);
        return Ok((point, dist));
    }
    if ti == 0 || ti + 1 == table.taus.len() {
        log::warn!(
            "tv minimax: optimum at tau-grid boundary (tau = {}); widen the grid",
            table.taus[ti]
        );
    }
    // Local refinement between the neighbors of the incumbent, with fresh
    // Monte Carlo risk evaluations at the refined τ values.
    let lo = if ti == 0 { table.taus[0] } else { table.taus[ti - 1] };
    let hi = if ti + 1 == table.taus.len() { table.taus[ti] } else { table.taus[ti + 1] };
    let mut best_tau = table.taus[ti];
    let mut best_val = coarse_val;
    let mut best_dist = tv_inner(table, ti, q)?.1;
    for step in 0..2 {
        let (a, b) = if step == 0 {
            (lo, hi)
        } else {
            ((best_tau - (hi - lo) / 8.0).max(lo), (best_tau + (hi - lo) / 8.0).min(hi))
        };
        for r in 1..8 {
            let tau = a + (b - a) * r as f64 / 8.0;
            if table.taus.iter().any(|&t| (t - tau).abs() < 1e-12) {
                continue;
            }
            let fresh = refined_inner(table, tau, q)?;
            if fresh.0 < best_val {
                best_val = fresh.0;
                best_tau = tau;
                best_dist = fresh.1;
            }
        }
    }
    let m = epsilon * best_val;
    let point = MinimaxCurvePoint::new(epsilon, m, Denoiser::tv(best_tau)?, f64::INFINITY);
    Ok((point, best_dist))
}

fn refined_inner(
    table: &TvRiskTable,
    tau: f64,
    q: f64,
) -> Result<(f64, IntervalDistribution)> {
    let mut pts: Vec<(f64, f64, BoundaryType)> = Vec::new();
    for &len in &table.lens {
        for b in [BoundaryType::PlusPlus, BoundaryType::PlusMinus] {
            let seed = table.seed ^ (len as u64).rotate_left(17) ^ tau.to_bits();
            let (r, _) = risk_tv_zero(len, b, tau, table.n_mc, seed);
            pts.push((len as f64, r, b));
        }
    }
    let flat: Vec<(f64, f64)> = pts.iter().map(|&(x, y, _)| (x, y)).collect();
    let hull = concave_envelope(&flat);
    let (val, i, j) = envelope_eval(&hull, q)?;
    let boundary_of = |idx: usize| {
        let (x, y) = hull[idx];
        pts.iter()
            .find(|&&(px, py, _)| px == x && (py - y).abs() < 1e-12)
            .map(|&(_, _, b)| b)
    };
    Ok((val, bracket_distribution(&hull, q, i, j, boundary_of)))
}

/// Random-changepoint TV minimax: inf over τ of ε Σ_ℓ π_ℓ r_{++}(ℓ; τ)
/// with the geometric π of independent change points. Lengths missing from
/// the table are filled by linear interpolation/extrapolation in ℓ.
pub fn mse_tv_random(epsilon: f64, table: &TvRiskTable) -> Result<MinimaxCurvePoint> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon must lie in (0,1)"));
    }
    let dist = IntervalDistribution::geometric(epsilon, Some(BoundaryType::PlusPlus), 1e-9);
    let value_at = |ti: usize| -> f64 {
        let r_of = |len: usize| interp_len(&table.lens, &table.pp[ti], len);
        epsilon * dist.entries.iter().map(|a| a.weight * r_of(a.len)).sum::<f64>()
    };
    let mut best = (f64::INFINITY, 0usize);
    for ti in 0..table.taus.len() {
        let v = value_at(ti);
        if v < best.0 {
            best = (v, ti);
        }
    }
    let (m, ti) = best;
    // the identity (τ = 0) achieves exactly ε·Σπℓ = 1, capping the curve
    if m >= 1.0 {
        log::warn!("tv random minimax: identity optimal at eps = {epsilon}");
        return Ok(MinimaxCurvePoint::new(epsilon, 1.0, Denoiser::tv(0.0)?, f64::INFINITY));
    }
    if ti == 0 || ti + 1 == table.taus.len() {
        log::warn!("tv random minimax: optimum at tau-grid boundary (tau = {})", table.taus[ti]);
    }
    Ok(MinimaxCurvePoint::new(epsilon, m, Denoiser::tv(table.taus[ti])?, f64::INFINITY))
}

fn interp_len(lens: &[usize], r: &[f64], len: usize) -> f64 {
    match lens.binary_search(&len) {
        Ok(i) => r[i],
        Err(pos) => {
            if pos == 0 {
                r[0]
            } else if pos == lens.len() {
                // linear extrapolation from the last two entries
                let (l1, l2) = (lens[lens.len() - 2] as f64, lens[lens.len() - 1] as f64);
                let (r1, r2) = (r[lens.len() - 2], r[lens.len() - 1]);
                r2 + (len as f64 - l2) * (r2 - r1) / (l2 - l1)
            } else {
                let (l1, l2) = (lens[pos - 1] as f64, lens[pos] as f64);
                let (r1, r2) = (r[pos - 1], r[pos]);
                r1 + (len as f64 - l1) * (r2 - r1) / (l2 - l1)
            }
        }
    }
}
