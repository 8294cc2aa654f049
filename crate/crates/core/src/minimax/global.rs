//! Globally minimax scalar shrinkage.
//!
//! The minimax MSE over all measurable scalar rules is 1 − min_ν I(γ⋆ν),
//! with I the Fisher information and the minimum over ε-sparse priors. The
//! minimizer is approximated inside a symmetric atomic family: K free atom
//! pairs plus an equispaced geometric tail. Fitting runs in three stages:
//!
//!   1. a coarse scan of the pure two-parameter (spacing, decay) family,
//!   2. coordinate descent on all 2K + 3 parameters for the Fisher objective,
//!   3. coordinate descent on the worst-case MSE of the fitted score rule,
//!      constrained to stay within 2e−4 of the stage-2 Fisher optimum.
//!
//! Stage 3 matters: the Fisher objective alone is nearly flat in the tail
//! parameters once the tail mass is small, but the worst-case risk of the
//! resulting rule is not, and both bound M from opposite sides. The reported
//! value is the Fisher lower bound 1 − I⁺; the bracket partner is the
//! worst-case MSE of the fitted rule over two-point priors.

use super::MinimaxCurvePoint;
use crate::denoise::{Denoiser, ScoreTable};
use crate::error::{Error, Result};
use crate::risk::{risk_two_point, TwoPointPrior};
use crate::stats::SQRT_2PI;
use serde::{Deserialize, Serialize};

const LAM_BOX: (f64, f64) = (0.05, 0.92);
const C1_BOX: (f64, f64) = (0.5, 4.0);
const TF_BOX: (f64, f64) = (0.005, 0.6);
const GRID_PER_UNIT: f64 = 100.0;
const GRID_CAP: f64 = 46.0;
const TABLE_STEP: f64 = 1.0 / 120.0;
const FISHER_SLACK: f64 = 3e-4;
const DENSITY_FLOOR: f64 = 1e-300;

/// Fitted near-least-favorable prior with its Fisher-information bracket.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimaxPriorFit {
    /// Symmetric free part: (0, 1−ε) plus (±μ_i, w_i/2) pairs.
    pub atoms: Vec<(f64, f64)>,
    pub tail_spacing: f64,
    /// Total mass of the geometric tail.
    pub tail_weight: f64,
    pub tail_decay: f64,
    /// Fisher information of the fitted mixture; M ≥ 1 − I_upper.
    pub i_upper: f64,
    /// 1 − (worst-case MSE of the fitted rule); M ≤ 1 − I_lower.
    pub i_lower: f64,
    /// Free atom-pair count.
    pub k: usize,
}

impl MinimaxPriorFit {
    /// Total prior mass including the tail; 1 up to tail truncation.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, w)| w).sum::<f64>() * 1.0 + self.tail_weight
    }
}

#[derive(Clone)]
struct Theta {
    mus: Vec<f64>,
    als: Vec<f64>,
    tail_frac: f64,
    tail_spacing: f64,
    tail_decay: f64,
}

impl Theta {
    fn dim(&self) -> usize {
        2 * self.mus.len() + 3
    }

    fn get(&self, i: usize) -> f64 {
        let k = self.mus.len();
        match i {
            _ if i < k => self.mus[i],
            _ if i < 2 * k => self.als[i - k],
            _ if i == 2 * k => self.tail_frac,
            _ if i == 2 * k + 1 => self.tail_spacing,
            _ => self.tail_decay,
        }
    }

    fn set(&mut self, i: usize, v: f64) {
        let k = self.mus.len();
        match i {
            _ if i < k => self.mus[i] = v,
            _ if i < 2 * k => self.als[i - k] = v,
            _ if i == 2 * k => self.tail_frac = v.clamp(TF_BOX.0, TF_BOX.1),
            _ if i == 2 * k + 1 => self.tail_spacing = v.clamp(C1_BOX.0, C1_BOX.1),
            _ => self.tail_decay = v.clamp(LAM_BOX.0, LAM_BOX.1),
        }
    }

    fn feasible(&self) -> bool {
        self.mus.iter().all(|&m| m > 0.0)
            && self.mus.windows(2).all(|w| w[1] > w[0])
            && self.als.iter().all(|&a| a > 0.0)
    }

    fn tail_shift(&self) -> f64 {
        (1.0 / self.tail_decay).ln() / self.tail_spacing
    }

    /// Materializes the symmetric atom list out to `depth`.
    fn atoms(&self, epsilon: f64, depth: f64) -> Mixture {
        let mut locs = vec![0.0];
        let mut ws = vec![1.0 - epsilon];
        let total: f64 = self.als.iter().sum();
        for (&m, &a) in self.mus.iter().zip(&self.als) {
            let w = epsilon * (1.0 - self.tail_frac) * a / total;
            locs.push(m);
            ws.push(0.5 * w);
            locs.push(-m);
            ws.push(0.5 * w);
        }
        let geo = epsilon * self.tail_frac * (1.0 - self.tail_decay);
        let base = *self.mus.last().unwrap();
        let mut k = 1usize;
        let mut w = geo;
        loop {
            let loc = base + self.tail_spacing * k as f64;
            if loc > depth || k > 400 {
                break;
            }
            locs.push(loc);
            ws.push(0.5 * w);
            locs.push(-loc);
            ws.push(0.5 * w);
            w *= self.tail_decay;
            k += 1;
        }
        Mixture { locs, ws }
    }
}

struct Mixture {
    locs: Vec<f64>,
    ws: Vec<f64>,
}

impl Mixture {
    fn max_loc(&self) -> f64 {
        self.locs.iter().fold(0.0, |a, &l| a.max(l.abs()))
    }

    /// Density and first derivative of the Gaussian convolution on a uniform
    /// grid, accumulated per atom with an 8.5σ window.
    fn density_on_grid(&self, lo: f64, step: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut f = vec![0.0; n];
        let mut fp = vec![0.0; n];
        for (&loc, &w) in self.locs.iter().zip(&self.ws) {
            let from = (((loc - 8.5 - lo) / step).floor().max(0.0)) as usize;
            let to = ((((loc + 8.5 - lo) / step).ceil()).max(0.0) as usize).min(n - 1);
            for i in from..=to.min(n - 1) {
                let d = lo + i as f64 * step - loc;
                let g = w * (-0.5 * d * d).exp() / SQRT_2PI;
                f[i] += g;
                fp[i] += -d * g;
            }
        }
        (f, fp)
    }

    /// I(f) = ∫ (f′)²/f by trapezoid on a symmetric grid.
    fn fisher_info(&self) -> f64 {
        let l = (self.max_loc() + 6.0).min(GRID_CAP);
        let n = (2.0 * l * GRID_PER_UNIT) as usize + 1;
        let step = 2.0 * l / (n - 1) as f64;
        let (f, fp) = self.density_on_grid(-l, step, n);
        let mut acc = 0.0;
        for i in 0..n {
            let v = fp[i] * fp[i] / f[i].max(DENSITY_FLOOR);
            acc += if i == 0 || i == n - 1 { 0.5 * v } else { v };
        }
        acc * step
    }

    /// Score table ψ = −f′/f on [0, y_max].
    fn score_table(&self, y_max: f64, tail_shift: f64, epsilon: f64) -> Result<ScoreTable> {
        let n = (y_max / TABLE_STEP).ceil() as usize + 1;
        let (f, fp) = self.density_on_grid(0.0, TABLE_STEP, n);
        let score: Vec<f64> =
            f.iter().zip(&fp).map(|(&fv, &fpv)| -fpv / fv.max(DENSITY_FLOOR)).collect();
        ScoreTable::new(TABLE_STEP, score, tail_shift, epsilon)
    }
}

fn mallows_fisher(epsilon: f64, spacing: f64, decay: f64) -> f64 {
    let mut locs = vec![0.0];
    let mut ws = vec![1.0 - epsilon];
    let mut w = epsilon * (1.0 - decay);
    for k in 1..=400usize {
        if w < 1e-11 {
            break;
        }
        locs.push(spacing * k as f64);
        ws.push(0.5 * w);
        locs.push(-spacing * k as f64);
        ws.push(0.5 * w);
        w *= decay;
    }
    Mixture { locs, ws }.fisher_info()
}

/// Stage 1: best (spacing, decay) in the pure geometric family.
fn stage1(epsilon: f64) -> (f64, f64, f64) {
    let lams = [0.05, 0.1, 0.2, 0.35, 0.5, 0.65, 0.8];
    let mut best = (f64::INFINITY, 2.0, 0.2);
    for i in 0..10 {
        let c = 1.4 + 1.8 * i as f64 / 9.0;
        for &lam in &lams {
            let v = mallows_fisher(epsilon, c, lam);
            if v < best.0 {
                best = (v, c, lam);
            }
        }
    }
    for _ in 0..3 {
        let (c0, l0) = (best.1, best.2);
        for i in 0..=6 {
            let c = c0 - 0.15 + 0.3 * i as f64 / 6.0;
            for j in 0..=6 {
                let lam = ((l0 * 0.6).max(LAM_BOX.0)
                    * ((l0 * 1.6).min(0.9) / (l0 * 0.6).max(LAM_BOX.0))
                        .powf(j as f64 / 6.0))
                .clamp(LAM_BOX.0, 0.9);
                let v = mallows_fisher(epsilon, c, lam);
                if v < best.0 {
                    best = (v, c, lam);
                }
            }
        }
    }
    best
}

fn fisher_of(epsilon: f64, th: &Theta) -> f64 {
    if !th.feasible() {
        return f64::INFINITY;
    }
    let depth = th.mus.last().unwrap() + 6.0 + th.tail_spacing * 12.0;
    th.atoms(epsilon, depth).fisher_info()
}

/// Table rule for the current parameters plus its worst two-point risk.
fn fit_rule(epsilon: f64, th: &Theta) -> Result<(ScoreTable, f64, f64)> {
    let y_max = (th.mus.last().unwrap() + 4.0).max(14.0);
    let mixture = th.atoms(epsilon, y_max + 10.0);
    let table = mixture.score_table(y_max, th.tail_shift(), epsilon)?;
    let d = Denoiser::MinimaxScalar { table };
    let eval = |mu: f64| -> f64 {
        risk_two_point(&d, &TwoPointPrior { epsilon, mu, symmetric: false }).unwrap()
    };
    let mut best = (eval(0.0), 0.0);
    for i in 1..=125 {
        let mu = 20.0 * i as f64 / 125.0;
        let v = eval(mu);
        if v > best.0 {
            best = (v, mu);
        }
    }
    let mut width = 0.16;
    for _ in 0..2 {
        let c = best.1;
        for i in 0..=20 {
            let mu = (c - width + 2.0 * width * i as f64 / 20.0).max(0.0);
            let v = eval(mu);
            if v > best.0 {
                best = (v, mu);
            }
        }
        width /= 10.0;
    }
    let mu_star = best.1;
    let at_inf = eval(f64::INFINITY);
    let wc = best.0.max(at_inf);
    let table = match d {
        Denoiser::MinimaxScalar { table } => table,
        _ => unreachable!(),
    };
    Ok((table, wc, mu_star))
}

fn coordinate_descent(
    th0: Theta,
    rounds: usize,
    sweeps: usize,
    scale0: f64,
    mut objective: impl FnMut(&Theta) -> f64,
) -> (f64, Theta) {
    let mut th = th0;
    let mut best = objective(&th);
    let mut scale: Vec<f64> =
        (0..th.dim()).map(|i| (scale0 * th.get(i).abs()).max(0.04)).collect();
    for _ in 0..rounds {
        for _ in 0..sweeps {
            for i in 0..th.dim() {
                let center = th.get(i);
                for g in -4i32..=4 {
                    if g == 0 {
                        continue;
                    }
                    let cand = center + scale[i] * g as f64 / 4.0;
                    let mut t2 = th.clone();
                    t2.set(i, cand);
                    let v = objective(&t2);
                    if v < best {
                        best = v;
                        th = t2;
                    }
                }
            }
        }
        for s in scale.iter_mut() {
            *s /= 4.0;
        }
    }
    (best, th)
}

/// Minimax MSE over all measurable scalar rules at sparsity `epsilon`, with
/// `k` free atom pairs in the prior family (the reference computation used
/// k = 2 below ε = 0.2 and k = 4 at 0.2–0.25).
///
/// Returns the curve point (M = 1 − I⁺), the fitted prior with its bracket,
/// and the score table of the fitted rule. Fails if the bracket ends up
/// wider than 5e−3.
pub fn mse_minimax_scalar(
    epsilon: f64,
    k: usize,
) -> Result<(MinimaxCurvePoint, MinimaxPriorFit, ScoreTable)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon must lie in (0,1)"));
    }
    if k < 2 {
        return Err(Error::invalid("need at least two free atom pairs"));
    }
    let (_, c, lam) = stage1(epsilon);
    let lam = lam.clamp(LAM_BOX.0, LAM_BOX.1);
    let th0 = Theta {
        mus: (1..=k).map(|i| c * i as f64).collect(),
        als: (0..k).map(|i| lam.powi(i as i32)).collect(),
        tail_frac: lam.powi(k as i32).clamp(TF_BOX.0, TF_BOX.1),
        tail_spacing: c.clamp(C1_BOX.0, C1_BOX.1),
        tail_decay: lam,
    };
    // Stage 2: Fisher objective.
    let (i_opt, th) = coordinate_descent(th0, 4, 3, 0.25, |t| fisher_of(epsilon, t));
    // Stage 3: close the bracket without giving up Fisher optimality. The
    // Fisher surface is nearly flat in the tail once the tail mass is small,
    // but the worst-case risk of the fitted rule is not, so the tail is
    // re-searched globally under the Fisher constraint before a local polish.
    let constrained_wc = |t: &Theta| -> f64 {
        if fisher_of(epsilon, t) > i_opt + FISHER_SLACK {
            return f64::INFINITY;
        }
        match fit_rule(epsilon, t) {
            Ok((_, wc, _)) => wc,
            Err(_) => f64::INFINITY,
        }
    };
    let mut best_wc = constrained_wc(&th);
    let mut th_best = th.clone();
    for tf in [0.005, 0.02, 0.05, 0.12, 0.3] {
        for c1 in [0.6, 1.0, 1.5, 2.2, 3.0] {
            for lam in [0.08, 0.15, 0.25, 0.4, 0.6, 0.8] {
                let mut cand = th.clone();
                cand.tail_frac = tf;
                cand.tail_spacing = c1;
                cand.tail_decay = lam;
                let wc = constrained_wc(&cand);
                if wc < best_wc {
                    best_wc = wc;
                    th_best = cand;
                }
            }
        }
    }
    let (_, th) = coordinate_descent(th_best, 3, 2, 0.15, constrained_wc);
    let i_final = fisher_of(epsilon, &th);
    let (table, wc, mu_star) = fit_rule(epsilon, &th)?;
    let m = 1.0 - i_final;
    // at the saddle the two bounds meet; a grid-sampled sup can land a hair
    // below the Fisher bound, which just means the bracket has closed
    let wc = wc.max(m);
    let bracket = wc - m;
    if bracket > 5e-3 {
        return Err(Error::numeric(format!(
            "minimax bracket too wide at eps={epsilon}: [{m}, {wc}] (width {bracket:.2e})"
        )));
    }
    let total: f64 = th.als.iter().sum();
    let mut atoms = vec![(0.0, 1.0 - epsilon)];
    for (&mu, &a) in th.mus.iter().zip(&th.als) {
        let w = epsilon * (1.0 - th.tail_frac) * a / total;
        atoms.push((mu, 0.5 * w));
        atoms.push((-mu, 0.5 * w));
    }
    let fit = MinimaxPriorFit {
        atoms,
        tail_spacing: th.tail_spacing,
        tail_weight: epsilon * th.tail_frac,
        tail_decay: th.tail_decay,
        i_upper: i_final,
        i_lower: 1.0 - wc,
        k,
    };
    let mut point = MinimaxCurvePoint::new(
        epsilon,
        m,
        Denoiser::MinimaxScalar { table: table.clone() },
        mu_star,
    );
    point.extras.insert("I_upper".into(), fit.i_upper);
    point.extras.insert("I_lower".into(), fit.i_lower);
    point.extras.insert("worst_case_mse".into(), wc);
    Ok((point, fit, table))
}
