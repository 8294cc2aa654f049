//! Shrinkage and projection denoisers η(·; τ, σ).
//!
//! Every denoiser obeys the scale covariance η(y; τ, σ) = σ·η(y/σ; τ, 1), so
//! each implementation only hard-codes the σ = 1 rule and thresholds are
//! scaled in place. Alongside the forward map, each kind carries an exact
//! divergence evaluator (the memory coefficient of the reconstruction loop is
//! div η / n) and, where the map is invertible, an implied-penalty extractor.

mod blocks;
mod monotone;
mod penalty;
mod scalar;
mod score;
mod tv;

pub use monotone::project_monotone;
pub use penalty::{implied_penalty, PenaltyTable};
pub use score::ScoreTable;
pub use tv::{tv_prox, tv_prox_typed, tv_stationarity_residual, BoundaryType};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A denoiser with its tuning parameters. Construct through the checked
/// constructors; preconditions are validated once, not on every apply.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Denoiser {
    /// Coordinatewise soft thresholding sgn(y)(|y| − τ)₊.
    Soft { tau: f64 },
    /// One-sided soft thresholding (y − τ)₊.
    SoftPos { tau: f64 },
    /// Clamp to the interval [0, σ] (box signals); parameter-free.
    Cap,
    /// Keep-or-kill thresholding y·1{|y| > τ}.
    Hard { tau: f64 },
    /// Continuous interpolation between soft (τ₂ → ∞) and hard (τ₂ ↓ τ₁).
    Firm { tau1: f64, tau2: f64 },
    /// Tabulated scalar rule η(y) = y − ψ(y) from a fitted score function.
    MinimaxScalar { table: ScoreTable },
    /// Blockwise soft thresholding (1 − τ/‖block‖)₊ · block.
    BlockSoft { tau: f64, block: usize },
    /// Positive-part James-Stein shrinkage (1 − (B−2)/‖block‖²)₊ · block.
    JamesStein { block: usize },
    /// Euclidean projection onto nondecreasing sequences.
    Monotone,
    /// Total-variation penalized least squares (fused-lasso prox).
    Tv { tau: f64 },
}

impl Denoiser {
    pub fn soft(tau: f64) -> Result<Self> {
        ensure_nonneg(tau, "soft threshold")?;
        Ok(Denoiser::Soft { tau })
    }

    pub fn soft_pos(tau: f64) -> Result<Self> {
        ensure_nonneg(tau, "positive soft threshold")?;
        Ok(Denoiser::SoftPos { tau })
    }

    pub fn hard(tau: f64) -> Result<Self> {
        ensure_nonneg(tau, "hard threshold")?;
        Ok(Denoiser::Hard { tau })
    }

    pub fn firm(tau1: f64, tau2: f64) -> Result<Self> {
        ensure_nonneg(tau1, "lower firm threshold")?;
        if !(tau2 > tau1) || !tau2.is_finite() {
            return Err(Error::invalid(format!(
                "firm thresholds need 0 <= tau1 < tau2 < inf, got ({tau1}, {tau2})"
            )));
        }
        Ok(Denoiser::Firm { tau1, tau2 })
    }

    pub fn minimax_scalar(table: ScoreTable) -> Result<Self> {
        table.validate()?;
        Ok(Denoiser::MinimaxScalar { table })
    }

    pub fn block_soft(tau: f64, block: usize) -> Result<Self> {
        ensure_nonneg(tau, "block soft threshold")?;
        if block == 0 {
            return Err(Error::invalid("block size must be >= 1"));
        }
        Ok(Denoiser::BlockSoft { tau, block })
    }

    pub fn james_stein(block: usize) -> Result<Self> {
        if block <= 2 {
            return Err(Error::invalid(format!(
                "James-Stein requires block size > 2, got {block}"
            )));
        }
        Ok(Denoiser::JamesStein { block })
    }

    pub fn tv(tau: f64) -> Result<Self> {
        ensure_nonneg(tau, "tv penalty")?;
        Ok(Denoiser::Tv { tau })
    }

    /// Block length for block-separable kinds.
    pub fn block_size(&self) -> Option<usize> {
        match self {
            Denoiser::BlockSoft { block, .. } | Denoiser::JamesStein { block } => Some(*block),
            _ => None,
        }
    }

    pub fn is_separable(&self) -> bool {
        !matches!(self, Denoiser::Monotone | Denoiser::Tv { .. })
    }

    /// Applies the denoiser at noise scale `sigma`.
    pub fn apply(&self, y: &[f64], sigma: f64) -> Result<Vec<f64>> {
        if !(sigma > 0.0) {
            return Err(Error::invalid(format!("noise scale must be > 0, got {sigma}")));
        }
        self.check_len(y.len())?;
        let mut out = vec![0.0; y.len()];
        self.apply_into(y, sigma, &mut out);
        Ok(out)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if let Some(b) = self.block_size() {
            if n % b != 0 {
                return Err(Error::invalid(format!(
                    "input length {n} is not divisible by block size {b}"
                )));
            }
        }
        Ok(())
    }

    /// Infallible apply for validated inputs; `out` must match `y` in length.
    pub(crate) fn apply_into(&self, y: &[f64], sigma: f64, out: &mut [f64]) {
        match self {
            Denoiser::Soft { tau } => {
                let t = tau * sigma;
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = scalar::soft(v, t);
                }
            }
            Denoiser::SoftPos { tau } => {
                let t = tau * sigma;
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = scalar::soft_pos(v, t);
                }
            }
            Denoiser::Cap => {
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = scalar::cap(v, sigma);
                }
            }
            Denoiser::Hard { tau } => {
                let t = tau * sigma;
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = scalar::hard(v, t);
                }
            }
            Denoiser::Firm { tau1, tau2 } => {
                let slope = tau2 / (tau2 - tau1);
                let (t1, t2) = (tau1 * sigma, tau2 * sigma);
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = scalar::firm(v, t1, t2, slope);
                }
            }
            Denoiser::MinimaxScalar { table } => {
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = sigma * table.apply(v / sigma);
                }
            }
            Denoiser::BlockSoft { tau, block } => {
                blocks::block_soft(y, tau * sigma, *block, out);
            }
            Denoiser::JamesStein { block } => {
                blocks::james_stein(y, sigma, *block, out);
            }
            Denoiser::Monotone => {
                monotone::project_monotone_into(y, out);
            }
            Denoiser::Tv { tau } => {
                tv::tv_prox_into(y, tau * sigma, out);
            }
        }
    }

    /// Divergence div η(y; τ, σ) — the trace of the Jacobian, not yet divided
    /// by the number of measurements. `xhat` must be `apply(y, sigma)`.
    ///
    /// Hard thresholding has no weak derivative at its jump; the count of
    /// surviving coordinates is returned as a documented heuristic.
    pub fn divergence_with_output(&self, y: &[f64], sigma: f64, xhat: &[f64]) -> f64 {
        match self {
            Denoiser::Soft { tau } => {
                let t = tau * sigma;
                y.iter().filter(|v| v.abs() > t).count() as f64
            }
            Denoiser::SoftPos { tau } => {
                let t = tau * sigma;
                y.iter().filter(|&&v| v > t).count() as f64
            }
            Denoiser::Cap => y.iter().filter(|&&v| v > 0.0 && v < sigma).count() as f64,
            Denoiser::Hard { tau } => {
                let t = tau * sigma;
                y.iter().filter(|v| v.abs() > t).count() as f64
            }
            Denoiser::Firm { tau1, tau2 } => {
                let slope = tau2 / (tau2 - tau1);
                let (t1, t2) = (tau1 * sigma, tau2 * sigma);
                let mut acc = 0.0;
                for &v in y {
                    let a = v.abs();
                    // Knots resolved one-sided: the ramp owns (t1, t2).
                    if a > t2 {
                        acc += 1.0;
                    } else if a > t1 {
                        acc += slope;
                    }
                }
                acc
            }
            Denoiser::MinimaxScalar { table } => {
                y.iter().map(|&v| table.slope(v / sigma)).sum()
            }
            Denoiser::BlockSoft { tau, block } => {
                let b = *block as f64;
                let t = tau * sigma;
                let mut acc = 0.0;
                for blk in y.chunks_exact(*block) {
                    let s = norm2(blk);
                    if s > t {
                        acc += b - (b - 1.0) * t / s;
                    }
                }
                acc
            }
            Denoiser::JamesStein { block } => {
                let b = *block as f64;
                let a = (b - 2.0) * sigma * sigma;
                let mut acc = 0.0;
                for blk in y.chunks_exact(*block) {
                    let s2 = blk.iter().map(|v| v * v).sum::<f64>();
                    if s2 > a {
                        acc += b - (b - 2.0) * a / s2;
                    }
                }
                acc
            }
            // Increase points of the fit, plus one for the global mean shift.
            Denoiser::Monotone => count_increases(xhat) as f64 + 1.0,
            // Number of constant segments of the fit.
            Denoiser::Tv { .. } => count_changes(xhat) as f64 + 1.0,
        }
    }

    /// Convenience wrapper recomputing the denoised output first.
    pub fn divergence(&self, y: &[f64], sigma: f64) -> Result<f64> {
        let xhat = self.apply(y, sigma)?;
        Ok(self.divergence_with_output(y, sigma, &xhat))
    }
}

fn ensure_nonneg(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite and >= 0, got {v}")))
    }
}

pub(crate) fn norm2(xs: &[f64]) -> f64 {
    xs.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Number of strict increases x[i+1] > x[i]. Pooled blocks produced by the
/// monotone projection share bitwise-equal values, so no tolerance is needed.
pub fn count_increases(x: &[f64]) -> usize {
    x.windows(2).filter(|w| w[1] > w[0]).count()
}

/// Number of change points x[i+1] != x[i].
pub fn count_changes(x: &[f64]) -> usize {
    x.windows(2).filter(|w| w[1] != w[0]).count()
}
