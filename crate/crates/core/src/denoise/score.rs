//! Tabulated odd scalar denoisers η(y) = y − ψ(y).
//!
//! The score ψ is sampled on a uniform grid over [0, y_max] and extended by
//! odd symmetry; past the grid the shift is the constant `tail_shift`, so
//! η(y) = y − sgn(y)·c out there. This is the interchange format for the
//! globally minimax scalar rule, whose score has no closed form.

use crate::error::{Error, Result};
use crate::stats::SQRT_2PI;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreTable {
    /// Grid spacing; node i sits at i·step.
    step: f64,
    /// ψ at the grid nodes, starting from ψ(0) = 0.
    score: Vec<f64>,
    /// Constant shift beyond the last node.
    tail_shift: f64,
    /// Sparsity level the table was fitted for.
    epsilon: f64,
}

impl ScoreTable {
    pub fn new(step: f64, score: Vec<f64>, tail_shift: f64, epsilon: f64) -> Result<Self> {
        let t = ScoreTable { step, score, tail_shift, epsilon };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.score.len() < 2 {
            return Err(Error::invalid("score table needs at least two nodes"));
        }
        if !(self.step > 0.0) || !self.tail_shift.is_finite() {
            return Err(Error::invalid("score table step/tail_shift invalid"));
        }
        if self.score[0].abs() > 1e-9 {
            return Err(Error::invalid("odd symmetry requires psi(0) = 0"));
        }
        for w in self.score.windows(2) {
            // eta(y) = y - psi(y) must be nondecreasing node to node.
            if self.step - (w[1] - w[0]) < -1e-8 {
                return Err(Error::invalid("tabulated denoiser is decreasing somewhere"));
            }
        }
        Ok(())
    }

    pub fn y_max(&self) -> f64 {
        (self.score.len() - 1) as f64 * self.step
    }

    pub fn tail_shift(&self) -> f64 {
        self.tail_shift
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn grid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.score.iter().enumerate().map(|(i, &s)| (i as f64 * self.step, s))
    }

    /// ψ(y), odd-extended and constant past the grid.
    pub fn psi(&self, y: f64) -> f64 {
        let a = y.abs();
        let last = self.score.len() - 1;
        let pos = a / self.step;
        let i = pos as usize;
        let mag = if i >= last {
            self.tail_shift
        } else {
            let t = pos - i as f64;
            self.score[i] + t * (self.score[i + 1] - self.score[i])
        };
        mag * y.signum()
    }

    /// η(y) = y − ψ(y).
    pub fn apply(&self, y: f64) -> f64 {
        y - self.psi(y)
    }

    /// Piecewise slope η′ of the interpolated rule; 1 outside the grid.
    pub fn slope(&self, y: f64) -> f64 {
        let a = y.abs();
        let last = self.score.len() - 1;
        let i = (a / self.step) as usize;
        if i >= last {
            1.0
        } else {
            1.0 - (self.score[i + 1] - self.score[i]) / self.step
        }
    }

    /// Risk shift at infinity: lim E[(η(μ+Z) − μ)²] = 1 + c².
    pub fn risk_at_infinity(&self) -> f64 {
        1.0 + self.tail_shift * self.tail_shift
    }

    /// Posterior-mean score table for the symmetric three-point prior
    /// (1−ε)δ₀ + (ε/2)(δ_μ + δ_{−μ}). Handy as a reference rule in tests.
    pub fn three_point_fit(epsilon: f64, mu: f64, y_max: f64, step: f64) -> ScoreTable {
        let locs = [0.0, mu, -mu];
        let ws = [1.0 - epsilon, epsilon / 2.0, epsilon / 2.0];
        let n = (y_max / step).ceil() as usize + 1;
        let score: Vec<f64> = (0..n)
            .map(|i| {
                let y = i as f64 * step;
                let mut f = 0.0;
                let mut fp = 0.0;
                for (&a, &w) in locs.iter().zip(&ws) {
                    let d = y - a;
                    let g = w * (-0.5 * d * d).exp() / SQRT_2PI;
                    f += g;
                    fp += -d * g;
                }
                -fp / f.max(1e-300)
            })
            .collect();
        let tail = *score.last().unwrap();
        ScoreTable { step, score, tail_shift: tail, epsilon }
    }

    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "y,psi")?;
        for (y, s) in self.grid() {
            writeln!(w, "{y},{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_is_fixed_point_and_tail_rule_applies() {
        let t = ScoreTable::three_point_fit(0.1, 3.0, 10.0, 0.01);
        assert_eq!(t.apply(0.0), 0.0);
        let c = t.tail_shift();
        assert_relative_eq!(t.apply(25.0), 25.0 - c, epsilon = 1e-12);
        assert_relative_eq!(t.apply(-25.0), -25.0 + c, epsilon = 1e-12);
    }

    #[test]
    fn node_values_are_exact() {
        let t = ScoreTable::new(0.5, vec![0.0, 0.3, 0.5, 0.6], 0.6, 0.1).unwrap();
        assert_relative_eq!(t.apply(1.0), 1.0 - 0.5);
        assert_relative_eq!(t.apply(-1.0), -0.5);
        // midpoint interpolates
        assert_relative_eq!(t.apply(0.25), 0.25 - 0.15);
    }

    #[test]
    fn rejects_decreasing_rule() {
        // jump in psi bigger than the step makes eta decrease
        assert!(ScoreTable::new(0.1, vec![0.0, 0.5], 0.5, 0.1).is_err());
    }
}
