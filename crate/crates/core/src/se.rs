//! Scalar state evolution m_{t+1} = Ψ(m_t).
//!
//! Ψ(m) is the per-coordinate MSE of the denoiser at noise level σ² = m/δ.
//! For scale-covariant denoisers and two-point priors this collapses to
//! Ψ(m) = (m/δ)·R(μ·√(δ/m)) with R the unit-noise risk, so evaluating Ψ
//! means rescaling the prior magnitude. Exact recovery is predicted exactly
//! when the highest fixed point sup{m : Ψ(m) ≥ m} is zero.

use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::minimax;
use crate::risk::{
    risk_block_soft_sure, risk_js_sure, risk_js_zero, risk_two_point, TwoPointPrior,
};
use serde::Serialize;
use std::sync::Arc;

/// Per-coordinate unit-noise risk as a function of the prior's magnitude
/// scaling. Implementations must be monotone-bounded enough to saturate at
/// large scalings (the closed forms used here all are).
#[derive(Clone)]
pub enum ScaleRisk {
    /// Scalar denoiser against a two/three-point prior.
    Scalar { denoiser: Denoiser, prior: TwoPointPrior },
    /// Blockwise two-point prior: a fraction ε of blocks at norm `mu_norm`.
    BlockSoft { tau: f64, block: usize, epsilon: f64, mu_norm: f64 },
    JamesStein { block: usize, epsilon: f64, mu_norm: f64 },
    /// Arbitrary risk curve (used for non-separable priors and test rigs).
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl ScaleRisk {
    /// Unit-noise per-coordinate risk with all prior magnitudes times `scale`.
    pub fn risk_at_scale(&self, scale: f64) -> f64 {
        match self {
            ScaleRisk::Scalar { denoiser, prior } => {
                let scaled = TwoPointPrior {
                    epsilon: prior.epsilon,
                    mu: prior.mu * scale,
                    symmetric: prior.symmetric,
                };
                risk_two_point(denoiser, &scaled).expect("scalar risk")
            }
            ScaleRisk::BlockSoft { tau, block, epsilon, mu_norm } => {
                let b = *block as f64;
                let mu = mu_norm * scale;
                // The SURE mixture saturates at B + τ² well before this.
                let r_mu = if !mu.is_finite() || mu > tau + b.sqrt() + 40.0 {
                    b + tau * tau
                } else {
                    risk_block_soft_sure(mu, *tau, *block)
                };
                ((1.0 - epsilon) * risk_block_soft_sure(0.0, *tau, *block) + epsilon * r_mu) / b
            }
            ScaleRisk::JamesStein { block, epsilon, mu_norm } => {
                let b = *block as f64;
                let mu = mu_norm * scale;
                let r_mu = if !mu.is_finite() || mu > 2.0 * b.sqrt() + 40.0 {
                    b
                } else {
                    risk_js_sure(mu, *block)
                };
                ((1.0 - epsilon) * risk_js_zero(*block) + epsilon * r_mu) / b
            }
            ScaleRisk::Custom(f) => f(scale),
        }
    }
}

/// The state-evolution map at undersampling δ for a fixed prior and tuning.
#[derive(Clone)]
pub struct SeMap {
    pub delta: f64,
    pub risk: ScaleRisk,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeTrace {
    pub states: Vec<f64>,
    pub converged: bool,
    pub hfp: f64,
}

impl SeMap {
    pub fn new(delta: f64, risk: ScaleRisk) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0,1], got {delta}")));
        }
        Ok(SeMap { delta, risk })
    }

    /// Ψ(m): per-coordinate MSE at noise level σ² = m/δ; Ψ(0) = 0.
    pub fn psi(&self, m: f64) -> f64 {
        if m <= 0.0 {
            return 0.0;
        }
        let scale = (self.delta / m).sqrt();
        (m / self.delta) * self.risk.risk_at_scale(scale)
    }

    /// Iterates from `m0` for at most `t_max` steps, stopping early once the
    /// state drops below `tol`.
    pub fn iterate(&self, m0: f64, t_max: usize, tol: f64) -> SeTrace {
        let mut states = vec![m0];
        let mut m = m0;
        let mut converged = m < tol;
        for _ in 0..t_max {
            if converged {
                break;
            }
            m = self.psi(m);
            states.push(m);
            if m < tol {
                converged = true;
            }
        }
        SeTrace { states, converged, hfp: f64::NAN }
    }

    /// Highest fixed point sup{m : Ψ(m) ≥ m}: a 400-node log scan over
    /// (0, m_max] followed by bisection of the highest sign change, to 1e−10
    /// relative. Returns 0 when Ψ < id everywhere on the scan.
    pub fn hfp(&self, m_max: f64) -> f64 {
        assert!(m_max > 0.0);
        let n = 400;
        let lo_exp = (1e-12f64 * m_max).ln();
        let hi_exp = m_max.ln();
        let node = |i: usize| (lo_exp + (hi_exp - lo_exp) * i as f64 / (n - 1) as f64).exp();
        let mut highest: Option<usize> = None;
        for i in 0..n {
            let m = node(i);
            if self.psi(m) >= m {
                highest = Some(i);
            }
        }
        let Some(i) = highest else { return 0.0 };
        if i == n - 1 {
            log::warn!("hfp: sign change at the scan boundary m_max = {m_max}");
            return m_max;
        }
        let (mut lo, mut hi) = (node(i), node(i + 1));
        while (hi - lo) > 1e-10 * hi {
            let mid = 0.5 * (lo + hi);
            if self.psi(mid) >= mid {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Trace plus fixed-point summary, the payload of the CLI `se` command.
    pub fn analyze(&self, m0: f64, t_max: usize, tol: f64, m_max: f64) -> SeTrace {
        let mut trace = self.iterate(m0, t_max, tol);
        trace.hfp = self.hfp(m_max);
        trace
    }
}

/// Denoiser families whose state-evolution transition is computed against
/// the minimax tuning and least-favorable two-point priors.
#[derive(Debug, Clone, Copy)]
pub enum SeFamily {
    Soft,
    SoftPos,
    Hard,
    Firm,
    MinimaxScalar { k: usize },
    BlockSoft { block: usize },
    JamesStein { block: usize },
}

/// δ_SE(ε): the smallest δ at which the worst-prior highest fixed point
/// vanishes, located by bisection to `tol`. The inner sup runs over a μ grid
/// plus the μ = ∞ sentinel.
pub fn delta_se(epsilon: f64, family: SeFamily, tol: f64) -> Result<f64> {
    let tuned = tuned_denoiser(epsilon, family)?;
    let hfp_positive = |delta: f64| -> bool {
        for risk in prior_sweep(epsilon, family, &tuned) {
            let map = SeMap { delta, risk };
            // m_max = 10·m0 with m0 the δ-scaled per-coordinate power; the
            // sentinel prior has unbounded power, so scan a wide window.
            let m_max = 10.0f64.max(10.0 / delta);
            if map.hfp(m_max) > 0.0 {
                return true;
            }
        }
        false
    };
    let (mut lo, mut hi) = (tol.max(1e-3), 1.0);
    if hfp_positive(hi) {
        return Err(Error::numeric(format!(
            "delta_se bisection bracket failure at eps={epsilon}: HFP still positive at delta=1"
        )));
    }
    if !hfp_positive(lo) {
        return Ok(lo);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if hfp_positive(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn tuned_denoiser(epsilon: f64, family: SeFamily) -> Result<Denoiser> {
    Ok(match family {
        SeFamily::Soft => minimax::mse_soft(epsilon)?.denoiser,
        SeFamily::SoftPos => minimax::mse_softpos(epsilon)?.denoiser,
        SeFamily::Hard => minimax::mse_hard(epsilon)?.denoiser,
        SeFamily::Firm => minimax::mse_firm(epsilon)?.denoiser,
        SeFamily::MinimaxScalar { k } => minimax::mse_minimax_scalar(epsilon, k)?.0.denoiser,
        SeFamily::BlockSoft { block } => minimax::mse_block_soft(epsilon, block)?.denoiser,
        SeFamily::JamesStein { block } => minimax::mse_james_stein(epsilon, block)?.denoiser,
    })
}

fn prior_sweep(epsilon: f64, family: SeFamily, tuned: &Denoiser) -> Vec<ScaleRisk> {
    let mut mus: Vec<f64> = (1..=60).map(|i| 0.25 * i as f64).collect();
    mus.push(f64::INFINITY);
    match family {
        SeFamily::BlockSoft { block } => {
            let tau = match tuned {
                Denoiser::BlockSoft { tau, .. } => *tau,
                _ => unreachable!(),
            };
            mus.iter()
                .map(|&mu| ScaleRisk::BlockSoft { tau, block, epsilon, mu_norm: mu })
                .collect()
        }
        SeFamily::JamesStein { block } => mus
            .iter()
            .map(|&mu| ScaleRisk::JamesStein { block, epsilon, mu_norm: mu })
            .collect(),
        _ => {
            let symmetric = !matches!(family, SeFamily::SoftPos);
            mus.iter()
                .map(|&mu| ScaleRisk::Scalar {
                    denoiser: tuned.clone(),
                    prior: TwoPointPrior { epsilon, mu, symmetric },
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StarshapedReport {
    pub passed: bool,
    /// (m, ratio) pairs where Ψ(m)/m increased beyond tolerance.
    pub violations: Vec<(f64, f64)>,
}

/// Verifies that m ↦ Ψ(m)/m is nonincreasing on the grid.
pub fn check_starshaped(map: &SeMap, m_grid: &[f64], rel_tol: f64) -> StarshapedReport {
    let mut violations = Vec::new();
    let mut prev: Option<f64> = None;
    for &m in m_grid {
        if m <= 0.0 {
            continue;
        }
        let ratio = map.psi(m) / m;
        if let Some(p) = prev {
            if ratio > p * (1.0 + rel_tol) + 1e-14 {
                violations.push((m, ratio));
            }
        }
        prev = Some(ratio);
    }
    StarshapedReport { passed: violations.is_empty(), violations }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperquadraticReport {
    pub passed: bool,
    pub mu_star: f64,
    pub risk_at_mu_star: f64,
    /// Most negative slack of R(μ) − (μ/μ*)²·R(μ*) over the grid.
    pub worst_margin: f64,
}

impl SuperquadraticReport {
    /// Certified stuck state for a prior at magnitude `mu`: state evolution
    /// started at or above this level cannot fall below it.
    pub fn m_fp(&self, mu: f64) -> f64 {
        (mu / self.mu_star).powi(2)
    }
}

/// Checks the two-point risk R(μ) = (1−ε)R(0) + εR(μ) against the quadratic
/// minorant anchored at μ*: R(μ) ≥ (μ/μ*)²·R(μ*) on [0, μ*).
pub fn check_superquadratic(
    denoiser: &Denoiser,
    epsilon: f64,
    mu_star: f64,
    grid_n: usize,
) -> Result<SuperquadraticReport> {
    if !(mu_star > 0.0) || !mu_star.is_finite() {
        return Err(Error::invalid("mu_star must be positive and finite"));
    }
    let two_point = |mu: f64| -> Result<f64> {
        risk_two_point(denoiser, &TwoPointPrior { epsilon, mu, symmetric: true })
    };
    let r_star = two_point(mu_star)?;
    let mut worst: f64 = f64::INFINITY;
    for i in 0..grid_n {
        let mu = mu_star * i as f64 / grid_n as f64;
        let margin = two_point(mu)? - (mu / mu_star).powi(2) * r_star;
        worst = worst.min(margin);
    }
    Ok(SuperquadraticReport {
        passed: worst >= -1e-9,
        mu_star,
        risk_at_mu_star: r_star,
        worst_margin: worst,
    })
}
