//! Scalar-family minimax curves.
//!
//! Soft and positive-soft have parametric closed forms in the threshold that
//! are inverted by bisection; capping and the positive-part rule are exact;
//! firm and hard go through a nested grid search for the saddle point of the
//! three-point-prior objective.

use super::MinimaxCurvePoint;
use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::risk::{risk_at_infinity, risk_scalar};
use crate::stats::{norm_cdf, phi};

fn check_eps_open(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("epsilon must lie in (0,1), got {epsilon}")))
    }
}

fn soft_parametric(tau: f64) -> (f64, f64) {
    let denom = tau + 2.0 * phi(tau) - 2.0 * tau * norm_cdf(-tau);
    let eps = (2.0 * phi(tau) - 2.0 * tau * norm_cdf(-tau)) / denom;
    let m = 2.0 * phi(tau) / denom;
    (eps, m)
}

fn softpos_parametric(tau: f64) -> (f64, f64) {
    let denom = tau + phi(tau) - tau * norm_cdf(-tau);
    let eps = (phi(tau) - tau * norm_cdf(-tau)) / denom;
    let m = phi(tau) / denom;
    (eps, m)
}

/// Inverts a strictly decreasing ε(τ) by bisection on [0, hi].
fn invert_eps(f: impl Fn(f64) -> f64, epsilon: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Minimax MSE of soft thresholding over ε-sparse scalars. The least
/// favorable two-point magnitude is infinite.
pub fn mse_soft(epsilon: f64) -> Result<MinimaxCurvePoint> {
    check_eps_open(epsilon)?;
    let tau = invert_eps(|t| soft_parametric(t).0, epsilon, 40.0);
    let m = soft_parametric(tau).1;
    Ok(MinimaxCurvePoint::new(epsilon, m, Denoiser::soft(tau)?, f64::INFINITY))
}

/// Minimax MSE of positive soft thresholding over nonnegative sparse scalars.
pub fn mse_softpos(epsilon: f64) -> Result<MinimaxCurvePoint> {
    check_eps_open(epsilon)?;
    let tau = invert_eps(|t| softpos_parametric(t).0, epsilon, 40.0);
    let m = softpos_parametric(tau).1;
    Ok(MinimaxCurvePoint::new(epsilon, m, Denoiser::soft_pos(tau)?, f64::INFINITY))
}

/// M(ε | Cap) = (1 + ε)/2, exactly.
pub fn mse_cap(epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon must lie in [0,1]"));
    }
    Ok(0.5 * (1.0 + epsilon))
}

/// M(ε | Pos) = (1 + ε)/2, exactly.
pub fn mse_pos(epsilon: f64) -> Result<f64> {
    mse_cap(epsilon)
}

/// Worst-case three-point-mixture risk of `d` over μ ∈ [0, ∞]:
/// sup_μ (1−ε)·R(0) + ε·R(μ), with a grid-plus-refinement search and the
/// μ = ∞ sentinel. Returns (value, argmax).
pub fn worst_case_two_point(d: &Denoiser, epsilon: f64) -> Result<(f64, f64)> {
    let r0 = risk_scalar(d, 0.0)?;
    let mix = |rmu: f64| (1.0 - epsilon) * r0 + epsilon * rmu;
    let eval = |mu: f64| -> Result<f64> { Ok(mix(risk_scalar(d, mu)?)) };
    let (n, hi) = (200usize, 20.0);
    let mut best = (eval(0.0)?, 0.0);
    for i in 1..=n {
        let mu = hi * i as f64 / n as f64;
        let v = eval(mu)?;
        if v > best.0 {
            best = (v, mu);
        }
    }
    let mut width = hi / n as f64;
    for _ in 0..3 {
        let center = best.1;
        for i in 0..=40 {
            let mu = (center - width + 2.0 * width * i as f64 / 40.0).max(0.0);
            let v = eval(mu)?;
            if v > best.0 {
                best = (v, mu);
            }
        }
        width /= 10.0;
    }
    let at_inf = mix(risk_at_infinity(d)?);
    if at_inf > best.0 {
        return Ok((at_inf, f64::INFINITY));
    }
    Ok(best)
}

/// Minimax MSE of hard thresholding by a τ grid search with refinement.
pub fn mse_hard(epsilon: f64) -> Result<MinimaxCurvePoint> {
    check_eps_open(epsilon)?;
    let sup = |tau: f64| worst_case_two_point(&Denoiser::hard(tau).unwrap(), epsilon);
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=100 {
        let tau = 0.05 + 4.95 * i as f64 / 100.0;
        let v = sup(tau)?.0;
        if v < best.0 {
            best = (v, tau);
        }
    }
    let mut width = 4.95 / 100.0;
    for _ in 0..3 {
        let center = best.1;
        for i in 0..=20 {
            let tau = (center - width + 2.0 * width * i as f64 / 20.0).max(1e-4);
            let v = sup(tau)?.0;
            if v < best.0 {
                best = (v, tau);
            }
        }
        width /= 5.0;
    }
    let (m, tau) = (best.0, best.1);
    let mu_star = sup(tau)?.1;
    Ok(MinimaxCurvePoint::new(epsilon, m.min(1.0), Denoiser::hard(tau)?, mu_star))
}

/// Minimax MSE of firm shrinkage: nested grid search over (τ₁, τ₂ − τ₁)
/// against the worst symmetric three-point prior, with recursive refinement.
pub fn mse_firm(epsilon: f64) -> Result<MinimaxCurvePoint> {
    check_eps_open(epsilon)?;
    let sup = |t1: f64, gap: f64| -> Result<f64> {
        Ok(worst_case_two_point(&Denoiser::firm(t1, t1 + gap)?, epsilon)?.0)
    };
    // Coarse 30x30 scan: τ₁ linear, gap geometric (the optimum gap grows
    // quickly as ε increases).
    let mut best = (f64::INFINITY, 0.4, 1.0);
    for i in 0..30 {
        let t1 = 0.05 + 2.95 * i as f64 / 29.0;
        for j in 0..30 {
            let gap = 0.05 * (60.0f64 / 0.05).powf(j as f64 / 29.0);
            let v = sup(t1, gap)?;
            if v < best.0 {
                best = (v, t1, gap);
            }
        }
    }
    let (mut wt, mut wg) = (0.11, 0.4);
    let mut last_round_gain = 0.0;
    for _ in 0..4 {
        let before = best.0;
        let (t1c, gapc) = (best.1, best.2);
        for i in 0..=12 {
            let t1 = (t1c - wt + 2.0 * wt * i as f64 / 12.0).max(1e-3);
            for j in 0..=12 {
                let lo = (gapc * (1.0 - wg)).max(1e-3);
                let hi = gapc * (1.0 + wg);
                let gap = lo * (hi / lo).powf(j as f64 / 12.0);
                let v = sup(t1, gap)?;
                if v < best.0 {
                    best = (v, t1, gap);
                }
            }
        }
        wt /= 4.0;
        wg /= 3.0;
        last_round_gain = before - best.0;
    }
    if last_round_gain > 1e-4 {
        log::warn!(
            "firm saddle at eps={epsilon}: final refinement round still moved M by {last_round_gain:.2e}"
        );
    }
    let d = Denoiser::firm(best.1, best.1 + best.2)?;
    let mu_star = worst_case_two_point(&d, epsilon)?.1;
    Ok(MinimaxCurvePoint::new(epsilon, best.0.min(1.0), d, mu_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_reference_points() {
        assert!((mse_soft(0.05).unwrap().m - 0.2039).abs() < 1e-4);
        assert!((mse_soft(0.25).unwrap().m - 0.5829).abs() < 1e-4);
        // epsilon -> 1 drives M -> 1
        assert!(mse_soft(0.9999).unwrap().m > 0.99);
        assert!(mse_soft(0.0).is_err());
        assert!(mse_soft(1.0).is_err());
    }

    #[test]
    fn softpos_endpoints() {
        assert!(mse_softpos(1e-4).unwrap().m < 5e-3);
        assert!(mse_softpos(0.9999).unwrap().m > 0.99);
    }

    #[test]
    fn cap_and_pos_are_exact() {
        assert_eq!(mse_cap(0.2).unwrap(), 0.6);
        assert_eq!(mse_cap(0.0).unwrap(), 0.5);
        assert_eq!(mse_cap(1.0).unwrap(), 1.0);
        assert_eq!(mse_pos(0.2).unwrap(), 0.6);
    }

    #[test]
    fn hard_reference_points() {
        assert!((mse_hard(0.01).unwrap().m - 0.0729).abs() < 1.5e-3);
    }

    #[test]
    fn hard_saturates_near_mid_sparsity() {
        // the hard curve hits 1 close to eps ≈ 0.45, where the threshold
        // collapses to zero
        let p = mse_hard(0.47).unwrap();
        assert!(p.m > 0.995, "M = {}", p.m);
        let tau = match p.denoiser {
            Denoiser::Hard { tau } => tau,
            _ => unreachable!(),
        };
        assert!(tau < 0.2, "tau = {tau}");
        assert!(mse_hard(0.40).unwrap().m < 0.99);
    }

    #[test]
    fn softpos_parametric_matches_direct_saddle() {
        // independent route: grid the threshold, take the worst one-sided
        // two-point prior each time, and keep the best threshold
        let eps = 0.05;
        let mut best = f64::INFINITY;
        let mut tau = 0.3;
        while tau < 3.0 {
            let d = Denoiser::soft_pos(tau).unwrap();
            best = best.min(worst_case_two_point(&d, eps).unwrap().0);
            tau += 0.002;
        }
        let parametric = mse_softpos(eps).unwrap().m;
        assert!((best - parametric).abs() < 5e-4, "saddle {best} vs parametric {parametric}");
    }

    #[test]
    fn firm_beats_soft_and_hits_reference() {
        let p = mse_firm(0.10).unwrap();
        assert!((p.m - 0.3165).abs() < 1.5e-3);
        assert!(p.m < mse_soft(0.10).unwrap().m);
    }

    #[test]
    fn firm_saddle_is_stable_under_small_perturbations() {
        let p = mse_firm(0.05).unwrap();
        let (t1, t2) = match p.denoiser {
            Denoiser::Firm { tau1, tau2 } => (tau1, tau2),
            _ => unreachable!(),
        };
        // perturbing the thresholds by 1% cannot lower the worst-case risk
        for f in [0.99, 1.01] {
            let d = Denoiser::firm(t1 * f, t2).unwrap();
            assert!(worst_case_two_point(&d, 0.05).unwrap().0 >= p.m - 5e-4);
            let d = Denoiser::firm(t1, t2 * f).unwrap();
            assert!(worst_case_two_point(&d, 0.05).unwrap().0 >= p.m - 5e-4);
        }
        // perturbing μ away from μ* cannot raise the objective
        let obj = |mu: f64| {
            0.95 * risk_scalar(&p.denoiser, 0.0).unwrap()
                + 0.05 * risk_scalar(&p.denoiser, mu).unwrap()
        };
        assert!(obj(p.mu_star * 0.99) <= p.m + 5e-4);
        assert!(obj(p.mu_star * 1.01) <= p.m + 5e-4);
    }
}
