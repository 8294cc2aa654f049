//! Pointwise scalar rules at explicit (already σ-scaled) thresholds.

#[inline]
pub fn soft(y: f64, t: f64) -> f64 {
    y.signum() * (y.abs() - t).max(0.0)
}

#[inline]
pub fn soft_pos(y: f64, t: f64) -> f64 {
    (y - t).max(0.0)
}

#[inline]
pub fn cap(y: f64, hi: f64) -> f64 {
    y.clamp(0.0, hi)
}

#[inline]
pub fn hard(y: f64, t: f64) -> f64 {
    if y.abs() > t {
        y
    } else {
        0.0
    }
}

/// Firm rule with precomputed ramp slope τ₂/(τ₂−τ₁); continuous at both
/// knots, with the dead zone owning |y| = t1 and the identity |y| >= t2.
#[inline]
pub fn firm(y: f64, t1: f64, t2: f64, slope: f64) -> f64 {
    let a = y.abs();
    if a <= t1 {
        0.0
    } else if a < t2 {
        y.signum() * (a - t1) * slope
    } else {
        y
    }
}
