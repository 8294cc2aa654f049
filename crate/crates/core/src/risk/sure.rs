//! Stein-unbiased-risk evaluations for the block shrinkers.
//!
//! With S² = ‖μ + Z‖² ~ χ²_B(ξ), ξ = ‖μ‖², the risk is E U(S) for the
//! kind-specific U below. Expectations decompose over the Poisson mixture
//! of central chi-squares χ²_{B+2j}, each handled in closed form with
//! incomplete-gamma CDFs; components are truncated once their Poisson
//! weight drops below 1e−12.

use crate::stats::{chi2_cdf, chi_pdf, integrate, poisson_weights};
use statrs::function::gamma::ln_gamma;

const WEIGHT_CUT: f64 = 1e-12;

/// Per-block risk of block soft thresholding at signal norm `mu_norm`:
/// U(S) = S² − B for S < τ and B + τ² − 2(B−1)τ/S for S ≥ τ.
pub fn risk_block_soft_sure(mu_norm: f64, tau: f64, b: usize) -> f64 {
    assert!(b >= 1, "block size must be >= 1");
    assert!(tau >= 0.0 && mu_norm >= 0.0);
    let bf = b as f64;
    let t = tau * tau;
    let xi = mu_norm * mu_norm;
    let mut total = 0.0;
    let (j0, weights) = poisson_weights(0.5 * xi, WEIGHT_CUT);
    for (idx, w) in weights.into_iter().enumerate() {
        if w < WEIGHT_CUT {
            continue;
        }
        let m = bf + 2.0 * (j0 + idx) as f64;
        let below = m * chi2_cdf(m + 2.0, t) - bf * chi2_cdf(m, t);
        let mut above = (bf + tau * tau) * (1.0 - chi2_cdf(m, t));
        if b > 1 && tau > 0.0 {
            // E[1/S; S ≥ τ] under χ²_m via w^{-1/2} f_m = c·f_{m-1}.
            let c = (ln_gamma(0.5 * (m - 1.0)) - ln_gamma(0.5 * m)).exp()
                / std::f64::consts::SQRT_2;
            above -= 2.0 * (bf - 1.0) * tau * c * (1.0 - chi2_cdf(m - 1.0, t));
        }
        total += w * (below + above);
    }
    total
}

/// Per-block risk of positive-part James-Stein at signal norm `mu_norm`:
/// U(S) = S² − B for S² < B−2 and B − (B−2)²/S² for S² ≥ B−2.
pub fn risk_js_sure(mu_norm: f64, b: usize) -> f64 {
    assert!(b > 2, "James-Stein requires block size > 2");
    let bf = b as f64;
    let d = bf - 2.0;
    let xi = mu_norm * mu_norm;
    let mut total = 0.0;
    let (j0, weights) = poisson_weights(0.5 * xi, WEIGHT_CUT);
    for (idx, w) in weights.into_iter().enumerate() {
        if w < WEIGHT_CUT {
            continue;
        }
        let m = bf + 2.0 * (j0 + idx) as f64;
        let below = m * chi2_cdf(m + 2.0, d) - bf * chi2_cdf(m, d);
        // E[1/S²; S² ≥ D] under χ²_m via w^{-1} f_m = f_{m-2}/(m-2).
        let above = bf * (1.0 - chi2_cdf(m, d)) - d * d * (1.0 - chi2_cdf(m - 2.0, d)) / (m - 2.0);
        total += w * (below + above);
    }
    total
}

/// Exact per-block James-Stein risk at zero signal,
/// R(0) = D⁻¹ E(χ²_D − D)₊² with D = B − 2.
pub fn risk_js_zero(b: usize) -> f64 {
    assert!(b > 2, "James-Stein requires block size > 2");
    let d = b as f64 - 2.0;
    (d + 2.0) * (1.0 - chi2_cdf(d + 4.0, d)) - 2.0 * d * (1.0 - chi2_cdf(d + 2.0, d))
        + d * (1.0 - chi2_cdf(d, d))
}

/// E[(√X_B − τ)^k ; X_B ≥ τ²] for X_B ~ χ²_B, integrated in s = √w space
/// where the chi density is smooth.
pub fn chi_trunc_moment(tau: f64, b: f64, k: i32) -> f64 {
    let hi = (b.sqrt() + 14.0).max(tau + 14.0);
    if tau >= hi {
        return 0.0;
    }
    integrate(|s| (s - tau).powi(k) * chi_pdf(s, b), tau, hi, 64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn block_soft_limits() {
        // τ = 0: identity on the block, risk = B
        assert_relative_eq!(risk_block_soft_sure(0.0, 0.0, 5), 5.0, epsilon = 1e-9);
        assert_relative_eq!(risk_block_soft_sure(3.0, 0.0, 5), 5.0, epsilon = 1e-9);
        // μ → ∞: B + τ², approached like 2(B−1)τ/μ from below
        let r = |mu: f64| risk_block_soft_sure(mu, 3.0, 5);
        assert!((r(6000.0) - 14.0).abs() < 5e-3, "r(6e3) = {}", r(6000.0));
        assert!(r(60.0) < r(600.0) && r(600.0) < r(6000.0));
    }

    #[test]
    fn block_soft_reference_value() {
        // cross-checked against an independent Monte Carlo oracle
        assert_relative_eq!(risk_block_soft_sure(2.0, 3.0, 5), 3.4327, epsilon = 2e-4);
    }

    #[test]
    fn js_reference_values() {
        assert_relative_eq!(risk_js_sure(3.0, 10), 5.8574, epsilon = 2e-4);
        // risk at zero agrees with the dedicated formula
        assert_relative_eq!(risk_js_sure(0.0, 5), risk_js_zero(5), epsilon = 1e-9);
        // sup over mu is B (minimaxity): far signal approaches it from below
        assert_relative_eq!(risk_js_sure(80.0, 10), 10.0, epsilon = 1e-2);
        assert!(risk_js_sure(3.0, 10) < 10.0);
    }

    #[test]
    fn js_zero_matches_monte_carlo_small_block() {
        use crate::rng::stream_rng;
        use rand_distr::{Distribution, StandardNormal};
        let b = 5;
        let mut rng = stream_rng(987, 0);
        let n_mc = 200_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n_mc {
            let z: Vec<f64> = (0..b).map(|_| StandardNormal.sample(&mut rng)).collect();
            let s2: f64 = z.iter().map(|v| v * v).sum();
            let f = (1.0 - 3.0 / s2).max(0.0);
            let err: f64 = z.iter().map(|v| (f * v) * (f * v)).sum();
            sum += err;
            sum2 += err * err;
        }
        let mean = sum / n_mc as f64;
        let se = ((sum2 / n_mc as f64 - mean * mean) / n_mc as f64).sqrt();
        assert!(
            (mean - risk_js_zero(b)).abs() <= 3.0 * se,
            "mc {mean} ± {se} vs exact {}",
            risk_js_zero(b)
        );
    }

    #[test]
    fn js_zero_large_block_expansion() {
        assert_relative_eq!(risk_js_zero(5), 1.4000, epsilon = 1e-3);
        assert!((risk_js_zero(50) - (1.0 + 0.752 / 48f64.sqrt())).abs() < 0.01);
        // B → ∞ tends to 1
        assert!((risk_js_zero(100_000) - 1.0).abs() < 0.01);
    }

    #[test]
    fn chi_moment_small_cases() {
        // B=1: E(|Z|-tau)_+ = 2(phi(tau) - tau*Phi(-tau))
        use crate::stats::{norm_cdf, phi};
        for tau in [0.2, 1.0, 2.5] {
            let want = 2.0 * (phi(tau) - tau * norm_cdf(-tau));
            assert_relative_eq!(chi_trunc_moment(tau, 1.0, 1), want, epsilon = 1e-10);
        }
    }
}
