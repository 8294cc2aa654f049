//! Implied penalties of invertible shrinkers.
//!
//! A scalar (or radial) rule η is the prox of J when J′(η(y)) = y − η(y), so
//! J(x) = ∫₀ˣ Δ(η⁻¹(u)) du with Δ(y) = y − η(y). The inverse is found by
//! bisection on the monotone profile; the integral by cumulative trapezoid.

use super::Denoiser;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PenaltyTable {
    pub denoiser: String,
    pub x: Vec<f64>,
    pub j: Vec<f64>,
}

impl PenaltyTable {
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,J")?;
        for (x, j) in self.x.iter().zip(&self.j) {
            writeln!(w, "{x},{j}")?;
        }
        Ok(())
    }
}

/// Scalar (or radial, for rotation-covariant blocks) profile of η at σ = 1
/// on the nonnegative axis.
fn profile(d: &Denoiser) -> Result<Box<dyn Fn(f64) -> f64 + '_>> {
    match d {
        Denoiser::Soft { tau } => {
            let t = *tau;
            Ok(Box::new(move |y| (y - t).max(0.0)))
        }
        Denoiser::SoftPos { tau } => {
            let t = *tau;
            Ok(Box::new(move |y| (y - t).max(0.0)))
        }
        Denoiser::Firm { tau1, tau2 } => {
            let (t1, t2) = (*tau1, *tau2);
            let slope = t2 / (t2 - t1);
            Ok(Box::new(move |y| super::scalar::firm(y, t1, t2, slope)))
        }
        Denoiser::MinimaxScalar { table } => Ok(Box::new(move |y| table.apply(y))),
        // Block soft radial profile: s ↦ (s − τ)₊.
        Denoiser::BlockSoft { tau, .. } => {
            let t = *tau;
            Ok(Box::new(move |s| (s - t).max(0.0)))
        }
        // James-Stein radial profile.
        Denoiser::JamesStein { block } => {
            let a = *block as f64 - 2.0;
            Ok(Box::new(move |s| if s * s > a { s - a / s } else { 0.0 }))
        }
        Denoiser::Hard { .. } => Err(Error::invalid(
            "hard thresholding has no single-valued inverse at the jump; no implied penalty",
        )),
        Denoiser::Cap => Err(Error::invalid(
            "capping is flat outside [0, 1]; its inverse is not defined there",
        )),
        Denoiser::Monotone | Denoiser::Tv { .. } => Err(Error::invalid(
            "implied penalties are only extracted for scalar or radial block rules",
        )),
    }
}

/// Smallest y ≥ 0 with η(y) ≥ u, to 1e−10.
fn invert(eta: &dyn Fn(f64) -> f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let mut hi = u + 1.0;
    while eta(hi) < u {
        hi = hi * 2.0 + 1.0;
        if hi > 1e12 {
            return hi;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if eta(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Penalty table J at the requested nonnegative abscissas.
pub fn implied_penalty(d: &Denoiser, x_grid: &[f64]) -> Result<PenaltyTable> {
    if x_grid.is_empty() {
        return Err(Error::invalid("empty penalty grid"));
    }
    if x_grid[0] < 0.0 || x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("penalty grid must be nonnegative and increasing"));
    }
    let eta = profile(d)?;
    let x_max = *x_grid.last().unwrap();
    // Fine internal grid for the cumulative integral.
    let n = 2000.max(4 * x_grid.len());
    let h = x_max / n as f64;
    let mut us = Vec::with_capacity(n + 1);
    let mut cum = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    // Integrand at 0⁺ is the dead-zone edge shift, not 0.
    let mut prev = {
        let y = invert(eta.as_ref(), 1e-9 * (1.0 + x_max));
        y - eta(y)
    };
    us.push(0.0);
    cum.push(0.0);
    for i in 1..=n {
        let u = i as f64 * h;
        let y = invert(eta.as_ref(), u);
        let delta = y - eta(y);
        acc += 0.5 * (prev + delta) * h;
        prev = delta;
        us.push(u);
        cum.push(acc);
    }
    let j = x_grid
        .iter()
        .map(|&x| {
            let pos = (x / h).min(n as f64);
            let i = (pos as usize).min(n - 1);
            let t = pos - i as f64;
            cum[i] + t * (cum[i + 1] - cum[i])
        })
        .collect();
    Ok(PenaltyTable { denoiser: format!("{d:?}"), x: x_grid.to_vec(), j })
}
