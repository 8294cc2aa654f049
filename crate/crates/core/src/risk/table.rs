//! Risk tables over segment lengths for the interval-distribution minimax
//! problems, plus the flat CSV row format shared by the CLI.

use super::mc::{risk_mono_zero, risk_tv_zero};
use crate::denoise::BoundaryType;
use crate::error::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One tabulated risk evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskRow {
    pub kind: String,
    pub block: Option<usize>,
    pub tau: Option<f64>,
    pub mu_or_len: f64,
    pub boundary: Option<String>,
    pub estimate: f64,
    pub std_error: f64,
    pub n_mc: Option<usize>,
    pub seed: Option<u64>,
}

pub fn write_risk_csv<W: std::io::Write>(rows: &[RiskRow], mut w: W) -> Result<()> {
    writeln!(w, "kind,B,tau,mu_or_len,boundary,estimate,std_error,n_mc,seed")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.kind,
            r.block.map_or(String::new(), |b| b.to_string()),
            r.tau.map_or(String::new(), |t| t.to_string()),
            r.mu_or_len,
            r.boundary.clone().unwrap_or_default(),
            r.estimate,
            r.std_error,
            r.n_mc.map_or(String::new(), |n| n.to_string()),
            r.seed.map_or(String::new(), |s| s.to_string()),
        )?;
    }
    Ok(())
}

/// Monotone-regression risk at zero over a set of segment lengths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonoRiskTable {
    pub lens: Vec<usize>,
    pub r: Vec<f64>,
    pub se: Vec<f64>,
    pub n_mc: usize,
    pub seed: u64,
}

impl MonoRiskTable {
    pub fn lookup(&self, len: usize) -> Option<(f64, f64)> {
        self.lens.iter().position(|&l| l == len).map(|i| (self.r[i], self.se[i]))
    }

    /// Limit risk Σ_k r(|J_k|) of a far-off monotone staircase with the given
    /// constant-interval lengths; missing lengths are estimated on demand.
    pub fn risk_at_infinity(&self, interval_lengths: &[usize]) -> f64 {
        interval_lengths
            .iter()
            .map(|&l| {
                self.lookup(l)
                    .map(|(r, _)| r)
                    .unwrap_or_else(|| risk_mono_zero(l, self.n_mc, self.seed ^ l as u64).0)
            })
            .sum()
    }
}

/// Default length ladder: every length up to 64, then powers of two.
pub fn length_ladder(max_len: usize) -> Vec<usize> {
    let mut lens: Vec<usize> = (1..=64.min(max_len)).collect();
    let mut p = 128;
    while p <= max_len {
        lens.push(p);
        p *= 2;
    }
    lens
}

/// Builds the monotone risk table in parallel over lengths.
pub fn mono_risk_table(lens: &[usize], n_mc: usize, seed: u64) -> MonoRiskTable {
    let results: Vec<(f64, f64)> = lens
        .par_iter()
        .map(|&l| risk_mono_zero(l, n_mc, seed ^ (l as u64).wrapping_mul(0x9e3779b97f4a7c15)))
        .collect();
    let (r, se) = results.into_iter().unzip();
    MonoRiskTable { lens: lens.to_vec(), r, se, n_mc, seed }
}

/// Boundary-typed TV risks r_s(ℓ; τ) on a (τ, ℓ) grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TvRiskTable {
    pub taus: Vec<f64>,
    pub lens: Vec<usize>,
    /// Indexed [tau][len]; `pp` is the ++ (peak) type, `pm` the +- type.
    pub pp: Vec<Vec<f64>>,
    pub pm: Vec<Vec<f64>>,
    pub pp_se: Vec<Vec<f64>>,
    pub pm_se: Vec<Vec<f64>>,
    pub n_mc: usize,
    pub seed: u64,
}

pub fn tv_risk_table(taus: &[f64], lens: &[usize], n_mc: usize, seed: u64) -> TvRiskTable {
    let cells: Vec<((usize, usize, BoundaryType), (f64, f64))> = taus
        .iter()
        .enumerate()
        .flat_map(|(ti, &tau)| {
            lens.iter().enumerate().flat_map(move |(li, &len)| {
                [BoundaryType::PlusPlus, BoundaryType::PlusMinus]
                    .into_iter()
                    .map(move |b| (ti, li, len, tau, b))
            })
        })
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(ti, li, len, tau, b)| {
            let cell_seed = seed
                ^ (ti as u64).wrapping_mul(0x9e3779b97f4a7c15)
                ^ (li as u64).wrapping_mul(0xc2b2ae3d27d4eb4f)
                ^ match b {
                    BoundaryType::PlusPlus => 0,
                    BoundaryType::PlusMinus => 1,
                };
            ((ti, li, b), risk_tv_zero(len, b, tau, n_mc, cell_seed))
        })
        .collect();
    let mut table = TvRiskTable {
        taus: taus.to_vec(),
        lens: lens.to_vec(),
        pp: vec![vec![0.0; lens.len()]; taus.len()],
        pm: vec![vec![0.0; lens.len()]; taus.len()],
        pp_se: vec![vec![0.0; lens.len()]; taus.len()],
        pm_se: vec![vec![0.0; lens.len()]; taus.len()],
        n_mc,
        seed,
    };
    for ((ti, li, b), (r, se)) in cells {
        match b {
            BoundaryType::PlusPlus => {
                table.pp[ti][li] = r;
                table.pp_se[ti][li] = se;
            }
            BoundaryType::PlusMinus => {
                table.pm[ti][li] = r;
                table.pm_se[ti][li] = se;
            }
        }
    }
    table
}

impl TvRiskTable {
    pub fn rows(&self) -> Vec<RiskRow> {
        let mut out = Vec::new();
        for (ti, &tau) in self.taus.iter().enumerate() {
            for (li, &len) in self.lens.iter().enumerate() {
                for (b, r, se) in [
                    ("++", self.pp[ti][li], self.pp_se[ti][li]),
                    ("+-", self.pm[ti][li], self.pm_se[ti][li]),
                ] {
                    out.push(RiskRow {
                        kind: "tv".into(),
                        block: None,
                        tau: Some(tau),
                        mu_or_len: len as f64,
                        boundary: Some(b.into()),
                        estimate: r,
                        std_error: se,
                        n_mc: Some(self.n_mc),
                        seed: Some(self.seed),
                    });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_shape() {
        assert_eq!(length_ladder(5), vec![1, 2, 3, 4, 5]);
        let l = length_ladder(300);
        assert!(l.contains(&64) && l.contains(&128) && l.contains(&256) && !l.contains(&512));
    }

    #[test]
    fn mono_table_parallel_matches_rerun() {
        let a = mono_risk_table(&[1, 2, 3, 5], 4000, 9);
        let b = mono_risk_table(&[1, 2, 3, 5], 4000, 9);
        assert_eq!(a.r, b.r);
        assert_eq!(a.lookup(1), Some((1.0, 0.0)));
    }
}
