//! Minimax curves for the block-separable shrinkers.

use super::MinimaxCurvePoint;
use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::risk::{chi_trunc_moment, risk_js_zero};

/// Minimax MSE of block soft thresholding over ε-block-sparse signals.
///
/// The parametric pair in the threshold, with e_k = E[(√X_B − τ)^k]₊ under
/// X_B ~ χ²_B, is ε = e₁/(e₁ + τ) and M = ((B + τ²)e₁ + τe₂)/(B(e₁ + τ));
/// ε(τ) is strictly decreasing and is inverted by bisection.
pub fn mse_block_soft(epsilon: f64, block: usize) -> Result<MinimaxCurvePoint> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon must lie in (0,1)"));
    }
    if block == 0 {
        return Err(Error::invalid("block size must be >= 1"));
    }
    let b = block as f64;
    let eps_of = |tau: f64| {
        let e1 = chi_trunc_moment(tau, b, 1);
        e1 / (e1 + tau)
    };
    let (mut lo, mut hi) = (0.0, b.sqrt() + 12.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eps_of(mid) > epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let tau = 0.5 * (lo + hi);
    let e1 = chi_trunc_moment(tau, b, 1);
    let e2 = chi_trunc_moment(tau, b, 2);
    let m = ((b + tau * tau) * e1 + tau * e2) / (b * (e1 + tau));
    Ok(MinimaxCurvePoint::new(epsilon, m, Denoiser::block_soft(tau, block)?, f64::INFINITY))
}

/// Minimax MSE of positive-part James-Stein: (1−ε)·R(0)/B + ε, with R(0)
/// the per-block risk at zero. There is no tuning parameter.
pub fn mse_james_stein(epsilon: f64, block: usize) -> Result<MinimaxCurvePoint> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon must lie in [0,1]"));
    }
    let d = Denoiser::james_stein(block)?;
    let b = block as f64;
    let m = (1.0 - epsilon) * risk_js_zero(block) / b + epsilon;
    Ok(MinimaxCurvePoint::new(epsilon, m, d, f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimax::mse_soft;

    #[test]
    fn block_one_reduces_to_scalar_soft() {
        for eps in [0.05, 0.25, 0.6] {
            let blk = mse_block_soft(eps, 1).unwrap();
            let soft = mse_soft(eps).unwrap();
            assert!((blk.m - soft.m).abs() < 1e-6, "eps={eps}: {} vs {}", blk.m, soft.m);
        }
    }

    #[test]
    fn large_block_limit() {
        for eps in [0.1, 0.3, 0.5] {
            let p = mse_block_soft(eps, 200).unwrap();
            assert!((p.m - (2.0 * eps - eps * eps)).abs() <= 0.01);
            let tau = match p.denoiser {
                Denoiser::BlockSoft { tau, .. } => tau,
                _ => unreachable!(),
            };
            assert!((tau / (200f64).sqrt() - (1.0 - eps)).abs() <= 0.02);
        }
    }

    #[test]
    fn james_stein_bounds() {
        assert_eq!(mse_james_stein(1.0, 5).unwrap().m, 1.0);
        for (eps, b) in [(0.1, 5), (0.3, 20), (0.5, 100)] {
            let p = mse_james_stein(eps, b).unwrap();
            assert!(p.m <= eps + 2.0 / b as f64);
            // below the large-block block-soft limit for moderate B
            if b >= 20 {
                assert!(p.m < 2.0 * eps - eps * eps);
            }
        }
        assert!(mse_james_stein(0.1, 2).is_err());
    }
}
