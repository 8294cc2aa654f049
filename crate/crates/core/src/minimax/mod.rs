//! Minimax MSE curves M(ε | η): the optimal tuning and least-favorable
//! signal for every denoiser family, and with them the predicted phase
//! transitions δ = M(ε | η).

mod blocks;
mod global;
mod interval;
mod scalar;

pub use blocks::{mse_block_soft, mse_james_stein};
pub use global::{mse_minimax_scalar, MinimaxPriorFit};
pub use interval::{
    concave_envelope, mse_monotone, mse_tv, mse_tv_random, IntervalAtom, IntervalDistribution,
};
pub use scalar::{mse_cap, mse_firm, mse_hard, mse_pos, mse_soft, mse_softpos};

use crate::denoise::Denoiser;
use crate::error::Result;
use std::collections::BTreeMap;

/// One point of a minimax curve: the value M(ε), the minimax-tuned rule, and
/// the least favorable signal magnitude (∞ when the extremal prior walks off).
#[derive(Debug, Clone)]
pub struct MinimaxCurvePoint {
    pub epsilon: f64,
    pub m: f64,
    pub denoiser: Denoiser,
    pub mu_star: f64,
    /// Auxiliary scalars, e.g. Fisher-information bounds.
    pub extras: BTreeMap<String, f64>,
}

impl MinimaxCurvePoint {
    pub fn new(epsilon: f64, m: f64, denoiser: Denoiser, mu_star: f64) -> Self {
        MinimaxCurvePoint { epsilon, m, denoiser, mu_star, extras: BTreeMap::new() }
    }

    fn tau_pair(&self) -> (Option<f64>, Option<f64>) {
        match &self.denoiser {
            Denoiser::Soft { tau }
            | Denoiser::SoftPos { tau }
            | Denoiser::Hard { tau }
            | Denoiser::BlockSoft { tau, .. }
            | Denoiser::Tv { tau } => (Some(*tau), None),
            Denoiser::Firm { tau1, tau2 } => (Some(*tau1), Some(*tau2)),
            _ => (None, None),
        }
    }
}

/// Curve CSV with the fixed column order
/// `denoiser,epsilon,M,tau1,tau2,mu_star,B,I_upper,I_lower`.
pub fn write_curve_csv<W: std::io::Write>(
    label: &str,
    points: &[MinimaxCurvePoint],
    mut w: W,
) -> Result<()> {
    writeln!(w, "denoiser,epsilon,M,tau1,tau2,mu_star,B,I_upper,I_lower")?;
    for p in points {
        let (t1, t2) = p.tau_pair();
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            label,
            p.epsilon,
            p.m,
            fmt(t1),
            fmt(t2),
            p.mu_star,
            p.denoiser.block_size().map_or(String::new(), |b| b.to_string()),
            fmt(p.extras.get("I_upper").copied()),
            fmt(p.extras.get("I_lower").copied()),
        )?;
    }
    Ok(())
}
