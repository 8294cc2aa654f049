//! Exact 1-D total-variation proximal operator.
//!
//! Direct single-pass algorithm (Condat-style tube tracking): maintains
//! candidate lower/upper segment values and jumps when the tube constraint
//! breaks. Exactness is certified by the stationarity residual below, which
//! is what the tests check.

use serde::{Deserialize, Serialize};

/// Sign pattern (s₁, s₂) of the boundary linear term τ(s₁x₁ + s₂x_N) used by
/// the boundary-typed prox. `PlusPlus` is the peak/valley type, `PlusMinus`
/// the staircase type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryType {
    PlusPlus,
    PlusMinus,
}

impl BoundaryType {
    pub fn signs(self) -> (f64, f64) {
        match self {
            BoundaryType::PlusPlus => (1.0, 1.0),
            BoundaryType::PlusMinus => (1.0, -1.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BoundaryType::PlusPlus => "++",
            BoundaryType::PlusMinus => "+-",
        }
    }
}

/// argmin_x ½‖y − x‖² + λ Σ|x_{i+1} − x_i|.
pub fn tv_prox(y: &[f64], lambda: f64) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    tv_prox_into(y, lambda, &mut out);
    out
}

pub(crate) fn tv_prox_into(y: &[f64], lambda: f64, x: &mut [f64]) {
    let n = y.len();
    if n == 0 {
        return;
    }
    if lambda <= 0.0 || n == 1 {
        x.copy_from_slice(y);
        return;
    }
    let (mut k, mut k0, mut km, mut kp) = (0usize, 0usize, 0usize, 0usize);
    let mut vmin = y[0] - lambda;
    let mut vmax = y[0] + lambda;
    let mut umin = lambda;
    let mut umax = -lambda;
    loop {
        while k == n - 1 {
            if umin < 0.0 {
                // Negative jump: freeze the lower segment.
                x[k0..=km].fill(vmin);
                km += 1;
                k = km;
                k0 = km;
                kp = km;
                vmin = y[k];
                umin = lambda;
                umax = y[k] + lambda - vmax;
            } else if umax > 0.0 {
                // Positive jump: freeze the upper segment.
                x[k0..=kp].fill(vmax);
                kp += 1;
                k = kp;
                k0 = kp;
                km = kp;
                vmax = y[k];
                umax = -lambda;
                umin = y[k] - lambda - vmin;
            } else {
                x[k0..].fill(vmin + umin / (k - k0 + 1) as f64);
                return;
            }
        }
        if y[k + 1] + umin < vmin - lambda {
            x[k0..=km].fill(vmin);
            km += 1;
            k = km;
            k0 = km;
            kp = km;
            vmin = y[k];
            vmax = y[k] + 2.0 * lambda;
            umin = lambda;
            umax = -lambda;
        } else if y[k + 1] + umax > vmax + lambda {
            x[k0..=kp].fill(vmax);
            kp += 1;
            k = kp;
            k0 = kp;
            km = kp;
            vmin = y[k] - 2.0 * lambda;
            vmax = y[k];
            umin = lambda;
            umax = -lambda;
        } else {
            k += 1;
            umin += y[k] - vmin;
            umax += y[k] - vmax;
            if umin >= lambda {
                vmin += (umin - lambda) / (k - k0 + 1) as f64;
                umin = lambda;
                km = k;
            }
            if umax <= -lambda {
                vmax += (umax + lambda) / (k - k0 + 1) as f64;
                umax = -lambda;
                kp = k;
            }
        }
    }
}

/// Boundary-typed prox: argmin ½‖y − x‖² + λ TV(x) + λ(s₁x₁ + s₂x_N).
/// The linear term is absorbed by shifting the endpoint data.
pub fn tv_prox_typed(y: &[f64], lambda: f64, boundary: BoundaryType) -> Vec<f64> {
    let (s1, s2) = boundary.signs();
    let mut shifted = y.to_vec();
    if let Some(first) = shifted.first_mut() {
        *first -= lambda * s1;
    }
    if shifted.len() > 1 {
        let last = shifted.len() - 1;
        shifted[last] -= lambda * s2;
    } else if let Some(first) = shifted.first_mut() {
        *first -= lambda * s2;
    }
    tv_prox(&shifted, lambda)
}

/// Max violation of the subgradient stationarity system for the TV prox:
/// there must exist v with v₀ = v_N = 0, x_i − y_i = λ(v_i − v_{i−1}),
/// |v_i| ≤ 1, and v_i = sgn(x_{i+1} − x_i) at the jumps. Returns the largest
/// deviation; a genuine minimizer gives round-off-size values.
pub fn tv_stationarity_residual(y: &[f64], x: &[f64], lambda: f64) -> f64 {
    assert_eq!(y.len(), x.len());
    let n = y.len();
    if n == 0 || lambda <= 0.0 {
        return 0.0;
    }
    let mut v = 0.0;
    let mut worst = 0.0f64;
    for i in 0..n {
        v += (x[i] - y[i]) / lambda;
        if i + 1 < n {
            if x[i + 1] > x[i] {
                worst = worst.max((v - 1.0).abs());
            } else if x[i + 1] < x[i] {
                worst = worst.max((v + 1.0).abs());
            } else {
                worst = worst.max((v.abs() - 1.0).max(0.0));
            }
        }
    }
    worst.max(v.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn constant_input_unchanged() {
        let y = vec![0.7; 9];
        assert_eq!(tv_prox(&y, 2.0), y);
    }

    #[test]
    fn two_point_example() {
        let out = tv_prox(&[1.0, 0.0], 0.25);
        assert_relative_eq!(out[0], 0.75, epsilon = 1e-12);
        assert_relative_eq!(out[1], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn zero_penalty_is_identity() {
        let y = [1.0, -2.0, 0.5];
        assert_eq!(tv_prox(&y, 0.0), y.to_vec());
    }

    #[test]
    fn stationarity_on_random_instances() {
        let mut rng = stream_rng(424242, 0);
        for trial in 0..200 {
            let n = 1 + (trial % 37);
            let y: Vec<f64> = (0..n).map(|_| 2.5 * rng.sample::<f64, _>(StandardNormal)).collect();
            let lambda = 0.05 + rng.random::<f64>() * 2.0;
            let x = tv_prox(&y, lambda);
            assert!(tv_stationarity_residual(&y, &x, lambda) < 1e-10);
        }
    }

    #[test]
    fn typed_prox_biases_match_segment_rule() {
        // A single constant segment of the ++ problem sits at mean(y) - 2λ/N.
        let y = vec![0.0; 8];
        let lam = 0.5;
        let x = tv_prox_typed(&y, lam, BoundaryType::PlusPlus);
        for &v in &x {
            assert_relative_eq!(v, -2.0 * lam / 8.0, epsilon = 1e-12);
        }
        // The +- problem has no constant-segment bias.
        let x = tv_prox_typed(&y, lam, BoundaryType::PlusMinus);
        for &v in &x {
            assert_relative_eq!(v, 0.0, epsilon = 1e-12);
        }
    }
}
