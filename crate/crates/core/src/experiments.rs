//! Monte Carlo phase-transition experiments.
//!
//! Signal generators for every structured class, the success-fraction grid
//! over the undersampling ratio, logistic-regression location of the
//! empirical transition, and the finite-size scaling fits for offsets and
//! slopes.

use crate::amp::{amp_run, gaussian_matrix, SensingProblem, SuccessCriterion};
use crate::denoise::{BoundaryType, Denoiser};
use crate::error::{Error, Result};
use crate::minimax::IntervalDistribution;
use crate::rng::{stream_rng, trial_stream};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Structured signal classes paired with their reconstruction denoisers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SignalClass {
    /// iid coordinates: ±μ with probability ε/2 each, else 0.
    SimpleSparse { mu: f64 },
    /// iid coordinates: μ with probability ε, else 0.
    PositiveSparse { mu: f64 },
    /// iid coordinates: interior value ½ w.p. ε, else 0 or 1 fairly.
    Box,
    /// Blocks of length B: norm-μ random direction w.p. ε, else zero.
    BlockSparse { mu: f64, block: usize },
    /// Nondecreasing staircase with equal jumps and interval lengths drawn
    /// from the supplied law; starts at the jump height.
    MonotoneLf { jump: f64, dist: IntervalDistribution },
    /// Piecewise constant walk: each position is independently an up or down
    /// jump with probability ε/2 each.
    TvRandom { jump: f64 },
    /// Piecewise constant with typed interval lengths from the supplied law;
    /// jump signs realize the requested boundary types.
    TvLf { jump: f64, dist: IntervalDistribution },
}

impl SignalClass {
    fn needs_epsilon(&self) -> bool {
        matches!(
            self,
            SignalClass::SimpleSparse { .. }
                | SignalClass::PositiveSparse { .. }
                | SignalClass::Box
                | SignalClass::BlockSparse { .. }
                | SignalClass::TvRandom { .. }
        )
    }
}

fn draw_interval_len(dist: &IntervalDistribution, rng: &mut ChaCha8Rng) -> (usize, Option<BoundaryType>) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for a in &dist.entries {
        acc += a.weight;
        if u <= acc {
            return (a.len, a.boundary);
        }
    }
    let last = dist.entries.last().expect("nonempty interval distribution");
    (last.len, last.boundary)
}

/// Draws one signal of dimension `n_dim` at sparsity `epsilon`.
pub fn sample_signal(
    class: &SignalClass,
    n_dim: usize,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    match class {
        SignalClass::SimpleSparse { mu } => (0..n_dim)
            .map(|_| {
                if rng.random::<f64>() < epsilon {
                    if rng.random::<bool>() {
                        *mu
                    } else {
                        -*mu
                    }
                } else {
                    0.0
                }
            })
            .collect(),
        SignalClass::PositiveSparse { mu } => (0..n_dim)
            .map(|_| if rng.random::<f64>() < epsilon { *mu } else { 0.0 })
            .collect(),
        SignalClass::Box => (0..n_dim)
            .map(|_| {
                if rng.random::<f64>() < epsilon {
                    0.5
                } else if rng.random::<bool>() {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
        SignalClass::BlockSparse { mu, block } => {
            let mut x = vec![0.0; n_dim];
            for blk in x.chunks_exact_mut(*block) {
                if rng.random::<f64>() < epsilon {
                    let dir: Vec<f64> =
                        (0..*block).map(|_| StandardNormal.sample(rng)).collect();
                    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                    for (b, d) in blk.iter_mut().zip(dir) {
                        *b = mu * d / norm;
                    }
                }
            }
            x
        }
        SignalClass::MonotoneLf { jump, dist } => {
            let mut x = vec![0.0; n_dim];
            let mut level = *jump;
            let mut i = 0;
            while i < n_dim {
                let (len, _) = draw_interval_len(dist, rng);
                let end = (i + len).min(n_dim);
                x[i..end].fill(level);
                level += jump;
                i = end;
            }
            x
        }
        SignalClass::TvRandom { jump } => {
            let mut x = vec![0.0; n_dim];
            let mut level = 0.0;
            for (i, xi) in x.iter_mut().enumerate() {
                if i > 0 {
                    let u: f64 = rng.random();
                    if u < epsilon / 2.0 {
                        level += jump;
                    } else if u < epsilon {
                        level -= jump;
                    }
                }
                *xi = level;
            }
            x
        }
        SignalClass::TvLf { jump, dist } => {
            let mut x = vec![0.0; n_dim];
            let mut level = 0.0;
            let mut up = rng.random::<bool>();
            let mut i = 0;
            while i < n_dim {
                let (len, boundary) = draw_interval_len(dist, rng);
                let end = (i + len).min(n_dim);
                x[i..end].fill(level);
                // The segment type fixes whether the adjacent jumps agree:
                // +- segments sit between same-direction jumps, ++ between
                // opposite ones.
                match boundary {
                    Some(BoundaryType::PlusMinus) | None => {}
                    Some(BoundaryType::PlusPlus) => up = !up,
                }
                level += if up { *jump } else { -*jump };
                i = end;
            }
            x
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PtRow {
    pub delta: f64,
    pub n_success: usize,
    pub n_trials: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PtGridResult {
    pub epsilon: f64,
    pub n_dim: usize,
    pub seed: u64,
    pub rows: Vec<PtRow>,
}

impl PtGridResult {
    pub fn to_csv<W: std::io::Write>(&self, kind: &str, mut w: W) -> Result<()> {
        writeln!(w, "kind,epsilon,N,delta,n_success,n_trials,seed")?;
        for r in &self.rows {
            writeln!(
                w,
                "{kind},{},{},{},{},{},{}",
                self.epsilon, self.n_dim, r.delta, r.n_success, r.n_trials, self.seed
            )?;
        }
        Ok(())
    }

    /// Success fractions should be nondecreasing in δ up to binomial noise;
    /// returns the largest downward violation in standard-error units after
    /// an isotonic fit.
    pub fn monotonicity_violation(&self) -> f64 {
        let p: Vec<f64> =
            self.rows.iter().map(|r| r.n_success as f64 / r.n_trials as f64).collect();
        let fit = crate::denoise::project_monotone(&p);
        let mut worst = 0.0f64;
        for (i, r) in self.rows.iter().enumerate() {
            let se =
                (fit[i].max(0.02) * (1.0 - fit[i]).max(0.02) / r.n_trials as f64).sqrt();
            worst = worst.max((p[i] - fit[i]).abs() / se);
        }
        worst
    }
}

/// Runs the success-fraction grid: fresh matrix and signal per trial,
/// deterministic in (seed, grid index, trial index), trials in parallel.
/// Numeric failures count as failures and are logged.
#[allow(clippy::too_many_arguments)]
pub fn run_pt_grid(
    epsilon: f64,
    denoiser: &Denoiser,
    class: &SignalClass,
    n_dim: usize,
    delta_grid: &[f64],
    n_trials: usize,
    seed: u64,
    criterion: SuccessCriterion,
    t_max: usize,
) -> Result<PtGridResult> {
    if n_trials == 0 {
        return Err(Error::invalid("n_trials must be positive"));
    }
    if delta_grid.is_empty() {
        return Err(Error::invalid("empty delta grid"));
    }
    if class.needs_epsilon() && !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon must lie in [0,1]"));
    }
    let mut rows = Vec::with_capacity(delta_grid.len());
    for (di, &delta) in delta_grid.iter().enumerate() {
        let n = ((delta * n_dim as f64).round() as usize).clamp(1, n_dim);
        let n_success = (0..n_trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = stream_rng(seed, trial_stream(di, trial));
                let x0 = sample_signal(class, n_dim, epsilon, &mut rng);
                let a = gaussian_matrix(n, n_dim, seed ^ trial_stream(di, trial).rotate_left(17));
                let problem = match SensingProblem::from_signal(a, x0) {
                    Ok(p) => p,
                    Err(e) => {
                        log::warn!("trial setup failed (delta={delta}, trial={trial}): {e}");
                        return 0usize;
                    }
                };
                match amp_run(&problem, denoiser, t_max, Some(criterion)) {
                    Ok(run) => {
                        if run.diverged {
                            log::warn!("run diverged (delta={delta}, trial={trial})");
                        }
                        usize::from(run.success)
                    }
                    Err(e) => {
                        log::warn!("run failed (delta={delta}, trial={trial}): {e}");
                        0
                    }
                }
            })
            .sum();
        rows.push(PtRow { delta, n_success, n_trials });
    }
    Ok(PtGridResult { epsilon, n_dim, seed, rows })
}

/// Binomial logistic fit of log(p/(1−p)) = α + β(δ − δ_pred).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticFit {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// Empirical transition minus prediction, −α̂/β̂.
    pub offset: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub delta_pred: f64,
    /// Set when the data are completely separated; the offset then comes
    /// from the midpoint of the gap and the slope is reported infinite.
    pub separated: bool,
}

/// Maximum-likelihood logistic fit by iteratively reweighted least squares,
/// with a Wald 95% interval for the offset via the delta method.
pub fn fit_logistic(result: &PtGridResult, delta_pred: f64) -> Result<LogisticFit> {
    let rows = &result.rows;
    let mixed = {
        let mut ds: Vec<f64> = rows
            .iter()
            .filter(|r| r.n_success > 0 && r.n_success < r.n_trials)
            .map(|r| r.delta)
            .collect();
        ds.sort_by(f64::total_cmp);
        ds.dedup();
        ds.len()
    };
    // Complete separation: some threshold splits all-failure from
    // all-success exactly.
    let max_fail = rows
        .iter()
        .filter(|r| r.n_success == 0)
        .map(|r| r.delta)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_succ = rows
        .iter()
        .filter(|r| r.n_success == r.n_trials)
        .map(|r| r.delta)
        .fold(f64::INFINITY, f64::min);
    if mixed == 0 {
        if max_fail.is_finite() && min_succ.is_finite() && max_fail < min_succ {
            let mid = 0.5 * (max_fail + min_succ) - delta_pred;
            return Ok(LogisticFit {
                alpha_hat: f64::NAN,
                beta_hat: f64::INFINITY,
                offset: mid,
                ci_lo: max_fail - delta_pred,
                ci_hi: min_succ - delta_pred,
                delta_pred,
                separated: true,
            });
        }
        return Err(Error::invalid(
            "logistic fit needs mixed outcomes at three or more grid points",
        ));
    }
    if mixed < 3 && max_fail < min_succ {
        log::warn!("logistic fit running on only {mixed} mixed grid points");
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.delta - delta_pred).collect();
    let (mut alpha, mut beta) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mut score = [0.0f64; 2];
        let mut info = [[0.0f64; 2]; 2];
        for (r, &x) in rows.iter().zip(&xs) {
            let eta = (alpha + beta * x).clamp(-30.0, 30.0);
            let p = 1.0 / (1.0 + (-eta).exp());
            let w = r.n_trials as f64 * p * (1.0 - p);
            let resid = r.n_success as f64 - r.n_trials as f64 * p;
            score[0] += resid;
            score[1] += resid * x;
            info[0][0] += w;
            info[0][1] += w * x;
            info[1][1] += w * x * x;
        }
        info[1][0] = info[0][1];
        let det = info[0][0] * info[1][1] - info[0][1] * info[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let da = (info[1][1] * score[0] - info[0][1] * score[1]) / det;
        let db = (-info[1][0] * score[0] + info[0][0] * score[1]) / det;
        alpha += da;
        beta += db;
        if da.abs() < 1e-12 && db.abs() < 1e-12 {
            break;
        }
        if !alpha.is_finite() || !beta.is_finite() || beta.abs() > 1e8 {
            // drifting toward separation; fall back to the bracket report
            let mid = 0.5 * (max_fail.max(xs[0] + delta_pred) + min_succ) - delta_pred;
            return Ok(LogisticFit {
                alpha_hat: f64::NAN,
                beta_hat: f64::INFINITY,
                offset: mid,
                ci_lo: max_fail - delta_pred,
                ci_hi: min_succ - delta_pred,
                delta_pred,
                separated: true,
            });
        }
    }
    // observed information at the optimum for the Wald interval
    let mut info = [[0.0f64; 2]; 2];
    for (r, &x) in rows.iter().zip(&xs) {
        let eta = (alpha + beta * x).clamp(-30.0, 30.0);
        let p = 1.0 / (1.0 + (-eta).exp());
        let w = r.n_trials as f64 * p * (1.0 - p);
        info[0][0] += w;
        info[0][1] += w * x;
        info[1][1] += w * x * x;
    }
    info[1][0] = info[0][1];
    let det = info[0][0] * info[1][1] - info[0][1] * info[1][0];
    if det <= 0.0 {
        return Err(Error::numeric("singular information matrix in logistic fit"));
    }
    let cov = [
        [info[1][1] / det, -info[0][1] / det],
        [-info[1][0] / det, info[0][0] / det],
    ];
    let offset = -alpha / beta;
    // delta method: g = -alpha/beta, ∇g = (-1/β, α/β²)
    let ga = -1.0 / beta;
    let gb = alpha / (beta * beta);
    let var = ga * ga * cov[0][0] + 2.0 * ga * gb * cov[0][1] + gb * gb * cov[1][1];
    let half = 1.959963984540054 * var.max(0.0).sqrt();
    Ok(LogisticFit {
        alpha_hat: alpha,
        beta_hat: beta,
        offset,
        ci_lo: offset - half,
        ci_hi: offset + half,
        delta_pred,
        separated: false,
    })
}

/// One (N, value, standard error) series for the finite-size scaling fits,
/// labeled by its (ε, denoiser) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingSeries {
    pub label: String,
    /// (N, value, standard error); SE may be zero for unweighted fits.
    pub points: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaFit {
    pub gamma: f64,
    pub r_squared: f64,
}

fn scaling_fit(series: &[ScalingSeries], gammas: &[f64], sign: f64) -> Result<Vec<GammaFit>> {
    if series.is_empty() {
        return Err(Error::invalid("no series to fit"));
    }
    for s in series {
        if s.points.len() < 2 {
            return Err(Error::invalid(format!(
                "series '{}' needs at least two dimensions",
                s.label
            )));
        }
    }
    let mut out = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let mut ss_res = 0.0;
        let mut wsum = 0.0;
        let mut wy = 0.0;
        let mut pts: Vec<(f64, f64, f64)> = Vec::new();
        for s in series {
            let mut num = 0.0;
            let mut den = 0.0;
            for &(n, y, se) in &s.points {
                let w = if se > 0.0 { 1.0 / (se * se) } else { 1.0 };
                let x = (n as f64).powf(sign * gamma);
                num += w * y * x;
                den += w * x * x;
                pts.push((x, y, w));
            }
            let c = num / den;
            for &(n, y, se) in &s.points {
                let w = if se > 0.0 { 1.0 / (se * se) } else { 1.0 };
                let x = (n as f64).powf(sign * gamma);
                ss_res += w * (y - c * x) * (y - c * x);
            }
        }
        for &(_, y, w) in &pts {
            wsum += w;
            wy += w * y;
        }
        let ybar = wy / wsum;
        let ss_tot: f64 = pts.iter().map(|&(_, y, w)| w * (y - ybar) * (y - ybar)).sum();
        out.push(GammaFit { gamma, r_squared: 1.0 - ss_res / ss_tot });
    }
    Ok(out)
}

/// Weighted least squares of transition offsets against c·N^{−γ}, pooled R²
/// per exponent.
pub fn fit_offset_scaling(series: &[ScalingSeries], gammas: &[f64]) -> Result<Vec<GammaFit>> {
    scaling_fit(series, gammas, -1.0)
}

/// Least squares of logistic slopes against c·N^{+γ}.
pub fn fit_slope_scaling(series: &[ScalingSeries], gammas: &[f64]) -> Result<Vec<GammaFit>> {
    scaling_fit(series, gammas, 1.0)
}
