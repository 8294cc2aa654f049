//! Gaussian and chi-square primitives shared by the risk and minimax engines.
//!
//! Everything here is deterministic scalar math: normal density/CDF, truncated
//! Gaussian moments (the building blocks of the piecewise closed-form risks),
//! chi/chi-square integrals, and a composite Gauss–Legendre rule for the few
//! integrands without closed forms.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::{gamma_lr, ln_gamma};

pub const SQRT_2PI: f64 = 2.5066282746310002;

/// Φ⁻¹(0.75), the normalizer of the median-absolute-deviation scale estimate.
pub const PROBIT_75: f64 = 0.6744897501960817;

/// Standard normal density φ(x); zero at ±∞.
pub fn phi(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal CDF Φ(x).
pub fn norm_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile Φ⁻¹(p).
pub fn norm_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

fn xphi(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        x * phi(x)
    }
}

/// ∫_a^b φ(z) dz.
pub fn m0(a: f64, b: f64) -> f64 {
    norm_cdf(b) - norm_cdf(a)
}

/// ∫_a^b z φ(z) dz.
pub fn m1(a: f64, b: f64) -> f64 {
    phi(a) - phi(b)
}

/// ∫_a^b z² φ(z) dz.
pub fn m2(a: f64, b: f64) -> f64 {
    m0(a, b) + xphi(a) - xphi(b)
}

/// ∫_a^b (s·z + c)² φ(z) dz — the Gaussian moment of a linear segment.
pub fn gauss_sq_linear(a: f64, b: f64, slope: f64, offset: f64) -> f64 {
    slope * slope * m2(a, b) + 2.0 * slope * offset * m1(a, b) + offset * offset * m0(a, b)
}

/// CDF of the chi-square distribution with (possibly non-integer) `k` d.o.f.
pub fn chi2_cdf(k: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_lr(0.5 * k, 0.5 * x)
}

/// Density of √X for X ~ χ²_B (the chi distribution), in log space for
/// stability at large B.
pub fn chi_pdf(s: f64, b: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let ln = (1.0 - 0.5 * b) * std::f64::consts::LN_2 - ln_gamma(0.5 * b)
        + (b - 1.0) * s.ln()
        - 0.5 * s * s;
    ln.exp()
}

/// Composite Gauss–Legendre quadrature of `f` over [a, b] with `panels`
/// sub-intervals of a fixed 16-node rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    // 16-point Gauss-Legendre nodes/weights on [-1, 1].
    const X: [f64; 8] = [
        0.0950125098376374,
        0.2816035507792589,
        0.4580167776572274,
        0.6178762444026438,
        0.7554044083550030,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    const W: [f64; 8] = [
        0.1894506104550685,
        0.1826034150449236,
        0.1691565193950025,
        0.1495959888165767,
        0.1246289712555339,
        0.0951585116824928,
        0.0622535239386479,
        0.0271524594117541,
    ];
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for i in 0..8 {
            acc += W[i] * (f(mid + half * X[i]) + f(mid - half * X[i]));
        }
        total += acc * half;
    }
    total
}

/// Poisson probabilities around the bulk of the distribution: the starting
/// index j₀ and the weights for j = j₀, j₀+1, …, truncated on both flanks
/// once the weight falls below `cut`. Works in log space from the mode so
/// huge rates cost O(√λ) memory, not O(λ).
pub fn poisson_weights(lambda: f64, cut: f64) -> (usize, Vec<f64>) {
    if lambda <= 0.0 {
        return (0, vec![1.0]);
    }
    let mode = lambda.floor();
    let pmode = (mode * lambda.ln() - lambda - ln_gamma(mode + 1.0)).exp();
    let m = mode as usize;
    let mut below: Vec<f64> = Vec::new();
    let mut p = pmode;
    let mut j = m;
    while j > 0 {
        p *= j as f64 / lambda;
        j -= 1;
        if p < cut {
            break;
        }
        below.push(p);
    }
    let j0 = m - below.len();
    let mut out: Vec<f64> = below.into_iter().rev().collect();
    out.push(pmode);
    let mut p = pmode;
    let mut j = m;
    while j < m + 1_000_000 {
        j += 1;
        p *= lambda / j as f64;
        if p < cut && j as f64 > lambda {
            break;
        }
        out.push(p);
    }
    (j0, out)
}

/// Streaming mean and variance (Welford); merges support shard-parallel
/// Monte Carlo.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(mut self, other: RunningMoments) -> RunningMoments {
        if other.n == 0 {
            return self;
        }
        if self.n == 0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let nf = n as f64;
        self.mean += d * other.n as f64 / nf;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / nf;
        self.n = n;
        self
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.n as f64 - 1.0) / self.n as f64).sqrt()
    }
}

pub fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Empirical quantile by linear interpolation on sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moments_against_whole_line() {
        assert_relative_eq!(m0(f64::NEG_INFINITY, f64::INFINITY), 1.0, epsilon = 1e-14);
        assert_relative_eq!(m1(f64::NEG_INFINITY, f64::INFINITY), 0.0, epsilon = 1e-14);
        assert_relative_eq!(m2(f64::NEG_INFINITY, f64::INFINITY), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn quadrature_recovers_gaussian_mass() {
        let v = integrate(phi, -10.0, 10.0, 20);
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chi2_cdf_matches_known_point() {
        // chi^2_2 is Exp(1/2): F(x) = 1 - exp(-x/2)
        assert_relative_eq!(chi2_cdf(2.0, 3.0), 1.0 - (-1.5f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn chi_pdf_integrates_to_one() {
        for b in [1.0f64, 5.0, 200.0] {
            let v = integrate(|s| chi_pdf(s, b), 1e-9, b.sqrt() + 20.0, 60);
            assert_relative_eq!(v, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn poisson_weights_sum_to_one() {
        for lam in [0.3f64, 4.0, 50.0, 2e7] {
            let (_, w) = poisson_weights(lam, 1e-14);
            let s: f64 = w.iter().sum();
            // log-space cancellation limits accuracy at huge rates
            let tol = if lam > 1e6 { 1e-6 } else { 1e-10 };
            assert_relative_eq!(s, 1.0, epsilon = tol);
        }
        let (j0, w) = poisson_weights(4.0, 1e-14);
        // index bookkeeping: the mode carries the largest weight
        let arg = j0 + w.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(arg, 4);
    }

    #[test]
    fn running_moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.77).sin()).collect();
        let mut a = RunningMoments::default();
        for &x in &xs {
            a.push(x);
        }
        let mut b = RunningMoments::default();
        let mut c = RunningMoments::default();
        for &x in &xs[..37] {
            b.push(x);
        }
        for &x in &xs[37..] {
            c.push(x);
        }
        let m = b.merge(c);
        assert_relative_eq!(a.mean(), m.mean(), epsilon = 1e-13);
        assert_relative_eq!(a.std_error(), m.std_error(), epsilon = 1e-13);
    }
}
