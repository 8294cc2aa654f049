//! Risk functions R(μ; η) = E‖η(μ + Z) − μ‖² under unit Gaussian noise.
//!
//! Scalar kinds have piecewise closed forms built from truncated Gaussian
//! moments (exact to round-off, which the saddle searches lean on heavily);
//! block kinds go through Stein unbiased risk formulas over non-central
//! chi-square mixtures; the non-separable projections are estimated by
//! seeded Monte Carlo.

mod mc;
mod sure;
mod table;

pub use mc::{risk_mono_zero, risk_tv_zero};
pub use sure::{chi_trunc_moment, risk_block_soft_sure, risk_js_sure, risk_js_zero};
pub use table::{
    length_ladder, mono_risk_table, tv_risk_table, write_risk_csv, MonoRiskTable, RiskRow,
    TvRiskTable,
};

use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::stats::{gauss_sq_linear, integrate, m0, m2, phi};
use serde::{Deserialize, Serialize};

const INF: f64 = f64::INFINITY;

/// Extremal sparse prior (1−ε)δ₀ + ε·δ_μ, optionally symmetrized to
/// (ε/2)δ_μ + (1−ε)δ₀ + (ε/2)δ_{−μ}. `mu = f64::INFINITY` is the
/// least-favorable-at-infinity sentinel.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TwoPointPrior {
    pub epsilon: f64,
    pub mu: f64,
    pub symmetric: bool,
}

impl TwoPointPrior {
    pub fn new(epsilon: f64, mu: f64, symmetric: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::invalid(format!("epsilon must be in [0,1], got {epsilon}")));
        }
        if mu < 0.0 || mu.is_nan() {
            return Err(Error::invalid(format!("mu must be >= 0, got {mu}")));
        }
        Ok(TwoPointPrior { epsilon, mu, symmetric })
    }

    /// Per-coordinate second moment εμ² (infinite for the sentinel).
    pub fn signal_power(&self) -> f64 {
        self.epsilon * self.mu * self.mu
    }
}

/// E[(η(μ + Z) − μ)²] for a scalar rule at unit noise, by closed form.
/// `mu` may be negative; `mu = ±∞` gives the large-signal limit.
pub fn risk_scalar(d: &Denoiser, mu: f64) -> Result<f64> {
    if mu.is_infinite() {
        return risk_at_infinity(d);
    }
    match d {
        Denoiser::Soft { tau } => Ok(risk_soft(mu, *tau)),
        Denoiser::SoftPos { tau } => Ok(risk_soft_pos(mu, *tau)),
        Denoiser::Cap => Ok(risk_cap(mu)),
        Denoiser::Hard { tau } => Ok(risk_hard(mu, *tau)),
        Denoiser::Firm { tau1, tau2 } => Ok(risk_firm(mu, *tau1, *tau2)),
        Denoiser::MinimaxScalar { table } => Ok(risk_score_table(table, mu)),
        _ => Err(Error::invalid("risk_scalar expects a scalar denoiser")),
    }
}

/// lim_{μ→∞} E[(η(μ+Z) − μ)²] for scalar rules.
pub fn risk_at_infinity(d: &Denoiser) -> Result<f64> {
    match d {
        Denoiser::Soft { tau } | Denoiser::SoftPos { tau } => Ok(1.0 + tau * tau),
        Denoiser::Hard { .. } | Denoiser::Firm { .. } => Ok(1.0),
        Denoiser::MinimaxScalar { table } => Ok(table.risk_at_infinity()),
        // The box class caps signal magnitudes; an unbounded μ leaves it.
        Denoiser::Cap => Ok(INF),
        _ => Err(Error::invalid("risk_at_infinity expects a scalar denoiser")),
    }
}

/// Two/three-point mixture risk (1−ε)·R(0) + ε·R(±μ).
pub fn risk_two_point(d: &Denoiser, prior: &TwoPointPrior) -> Result<f64> {
    let r0 = risk_scalar(d, 0.0)?;
    let r_mu = if prior.symmetric {
        0.5 * (risk_scalar(d, prior.mu)? + risk_scalar(d, -prior.mu)?)
    } else {
        risk_scalar(d, prior.mu)?
    };
    Ok((1.0 - prior.epsilon) * r0 + prior.epsilon * r_mu)
}

fn risk_soft(mu: f64, tau: f64) -> f64 {
    let a = -tau - mu;
    let b = tau - mu;
    gauss_sq_linear(f64::NEG_INFINITY, a, 1.0, tau)
        + mu * mu * m0(a, b)
        + gauss_sq_linear(b, INF, 1.0, -tau)
}

fn risk_soft_pos(mu: f64, tau: f64) -> f64 {
    let b = tau - mu;
    mu * mu * m0(f64::NEG_INFINITY, b) + gauss_sq_linear(b, INF, 1.0, -tau)
}

fn risk_cap(mu: f64) -> f64 {
    // clamp(y, 0, 1): error is -mu below 0, z inside, 1-mu above 1.
    mu * mu * m0(f64::NEG_INFINITY, -mu)
        + m2(-mu, 1.0 - mu)
        + (1.0 - mu) * (1.0 - mu) * m0(1.0 - mu, INF)
}

fn risk_hard(mu: f64, tau: f64) -> f64 {
    let a = -tau - mu;
    let b = tau - mu;
    m2(f64::NEG_INFINITY, a) + mu * mu * m0(a, b) + m2(b, INF)
}

fn risk_firm(mu: f64, tau1: f64, tau2: f64) -> f64 {
    let k = tau2 / (tau2 - tau1);
    let (a1, a2) = (-tau2 - mu, -tau1 - mu);
    let (b1, b2) = (tau1 - mu, tau2 - mu);
    gauss_sq_linear(f64::NEG_INFINITY, a1, 1.0, 0.0)
        + gauss_sq_linear(a1, a2, k, (k - 1.0) * mu + k * tau1)
        + gauss_sq_linear(a2, b1, 0.0, -mu)
        + gauss_sq_linear(b1, b2, k, (k - 1.0) * mu - k * tau1)
        + gauss_sq_linear(b2, INF, 1.0, 0.0)
}

/// Exact risk of the piecewise-linear tabulated rule: each grid cell
/// contributes a linear-error Gaussian moment; the tails use the constant
/// shift. Cells further than 9 noise sds from μ are skipped.
fn risk_score_table(table: &crate::denoise::ScoreTable, mu: f64) -> f64 {
    let y_max = table.y_max();
    let c = table.tail_shift();
    let mut total = gauss_sq_linear(f64::NEG_INFINITY, -y_max - mu, 1.0, c)
        + gauss_sq_linear(y_max - mu, INF, 1.0, -c);
    // cells cover [-y_max, y_max]
    let nodes: Vec<(f64, f64)> = table.grid().collect();
    let mut push_cell = |yl: f64, yr: f64| {
        let zl = yl - mu;
        let zr = yr - mu;
        if zl > 9.0 || zr < -9.0 {
            return;
        }
        let eta_l = yl - psi_at(&nodes, c, yl);
        let eta_r = yr - psi_at(&nodes, c, yr);
        let slope = (eta_r - eta_l) / (yr - yl);
        // error(z) = eta(yl) - mu + slope * (z - zl)
        let offset = eta_l - mu - slope * zl;
        total += gauss_sq_linear(zl, zr, slope, offset);
    };
    for i in 0..nodes.len() - 1 {
        // negative-side mirror cell
        push_cell(-nodes[i + 1].0, -nodes[i].0);
    }
    for i in 0..nodes.len() - 1 {
        push_cell(nodes[i].0, nodes[i + 1].0);
    }
    total
}

fn psi_at(nodes: &[(f64, f64)], tail: f64, y: f64) -> f64 {
    let a = y.abs();
    let step = nodes[1].0 - nodes[0].0;
    let pos = a / step;
    let i = pos as usize;
    let mag = if i >= nodes.len() - 1 {
        tail
    } else {
        let t = pos - i as f64;
        nodes[i].1 + t * (nodes[i + 1].1 - nodes[i].1)
    };
    mag * y.signum()
}

/// Brute quadrature cross-check of `risk_scalar`; slow, test oracle only.
/// Splits the z-domain at the rule's knots so jump discontinuities (hard
/// thresholding) land on panel boundaries.
pub fn risk_quadrature(d: &Denoiser, mu: f64) -> f64 {
    let lo = -12.0 - mu.abs().min(30.0);
    let hi = 12.0 + mu.abs().min(30.0);
    let mut cuts: Vec<f64> = match d {
        Denoiser::Soft { tau } | Denoiser::SoftPos { tau } | Denoiser::Hard { tau } => {
            vec![-tau - mu, tau - mu]
        }
        Denoiser::Firm { tau1, tau2 } => {
            vec![-tau2 - mu, -tau1 - mu, tau1 - mu, tau2 - mu]
        }
        Denoiser::Cap => vec![-mu, 1.0 - mu],
        _ => vec![],
    };
    cuts.retain(|c| *c > lo && *c < hi);
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    let f = |z: f64| {
        let x = d.apply(&[mu + z], 1.0).unwrap()[0];
        (x - mu) * (x - mu) * phi(z)
    };
    cuts.windows(2)
        .map(|w| {
            let panels = (((w[1] - w[0]) / (hi - lo)) * 400.0).ceil().max(8.0) as usize;
            integrate(f, w[0], w[1], panels)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::ScoreTable;
    use crate::stats::norm_cdf;
    use approx::assert_relative_eq;

    #[test]
    fn identity_denoiser_has_unit_risk() {
        let d = Denoiser::soft(0.0).unwrap();
        for mu in [0.0, 1.0, 7.0] {
            assert_relative_eq!(risk_scalar(&d, mu).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn soft_risk_at_zero_closed_form() {
        for tau in [0.3, 1.3, 2.6] {
            let want = 2.0 * (1.0 + tau * tau) * norm_cdf(-tau) - 2.0 * tau * phi(tau);
            let d = Denoiser::soft(tau).unwrap();
            assert_relative_eq!(risk_scalar(&d, 0.0).unwrap(), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let table = ScoreTable::three_point_fit(0.1, 3.0, 12.0, 1.0 / 120.0);
        let kinds = [
            Denoiser::soft(0.9).unwrap(),
            Denoiser::soft_pos(0.9).unwrap(),
            Denoiser::Cap,
            Denoiser::hard(1.2).unwrap(),
            Denoiser::firm(0.7, 2.1).unwrap(),
            Denoiser::minimax_scalar(table).unwrap(),
        ];
        for d in &kinds {
            // the quadrature oracle itself carries ~1e-7 error at the kinks
            for mu in [0.0, 0.4, 2.0, 5.5] {
                let exact = risk_scalar(d, mu).unwrap();
                let quad = risk_quadrature(d, mu);
                assert_relative_eq!(exact, quad, epsilon = 2e-6, max_relative = 2e-6);
            }
        }
    }

    #[test]
    fn hard_risk_vanishes_for_huge_threshold_at_zero() {
        let d = Denoiser::hard(40.0).unwrap();
        assert!(risk_scalar(&d, 0.0).unwrap() < 1e-12);
    }

    #[test]
    fn two_point_endpoints() {
        let d = Denoiser::soft(1.0).unwrap();
        let p0 = TwoPointPrior::new(0.0, 3.0, false).unwrap();
        assert_relative_eq!(
            risk_two_point(&d, &p0).unwrap(),
            risk_scalar(&d, 0.0).unwrap(),
            epsilon = 1e-14
        );
        let p1 = TwoPointPrior::new(1.0, 3.0, false).unwrap();
        assert_relative_eq!(
            risk_two_point(&d, &p1).unwrap(),
            risk_scalar(&d, 3.0).unwrap(),
            epsilon = 1e-14
        );
        // infinite-μ sentinel for soft: (1-ε)r(0) + ε(1+τ²)
        let pinf = TwoPointPrior::new(0.3, f64::INFINITY, false).unwrap();
        let want = 0.7 * risk_scalar(&d, 0.0).unwrap() + 0.3 * 2.0;
        assert_relative_eq!(risk_two_point(&d, &pinf).unwrap(), want, epsilon = 1e-12);
    }

    #[test]
    fn risk_is_even_for_odd_rules() {
        let d = Denoiser::firm(0.8, 2.0).unwrap();
        assert_relative_eq!(
            risk_scalar(&d, 1.7).unwrap(),
            risk_scalar(&d, -1.7).unwrap(),
            epsilon = 1e-12
        );
    }
}
