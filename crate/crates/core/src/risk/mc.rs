//! Seeded Monte Carlo risks for the non-separable projections.
//!
//! Draws are sharded into fixed-size batches mapped in parallel and merged
//! in index order, so estimates are bit-identical across reruns regardless
//! of thread scheduling.

use crate::denoise::{project_monotone, tv_prox_typed, BoundaryType};
use crate::rng::stream_rng;
use crate::stats::RunningMoments;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

const SHARD: usize = 2048;

fn mc_norm_sq<F>(len: usize, n_mc: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let shards = n_mc.div_ceil(SHARD);
    let moments: Vec<RunningMoments> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = stream_rng(seed, shard as u64);
            let mut m = RunningMoments::default();
            let draws = SHARD.min(n_mc - shard * SHARD);
            let mut z = vec![0.0; len];
            for _ in 0..draws {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                let x = f(&z);
                m.push(x.iter().map(|v| v * v).sum());
            }
            m
        })
        .collect();
    let merged = moments.into_iter().fold(RunningMoments::default(), RunningMoments::merge);
    (merged.mean(), merged.std_error())
}

/// Monte Carlo estimate (with standard error) of r(ℓ) = E‖Π_mono(Z)‖².
/// r(1) = 1 holds exactly and is returned without sampling.
pub fn risk_mono_zero(len: usize, n_mc: usize, seed: u64) -> (f64, f64) {
    assert!(len >= 1);
    if len == 1 {
        return (1.0, 0.0);
    }
    mc_norm_sq(len, n_mc, seed, |z| project_monotone(z))
}

/// Monte Carlo estimate of the boundary-typed TV risk at zero,
/// r_s(ℓ; τ) = E‖η_s(Z; τ)‖². τ = 0 is the identity with risk exactly ℓ.
pub fn risk_tv_zero(
    len: usize,
    boundary: BoundaryType,
    tau: f64,
    n_mc: usize,
    seed: u64,
) -> (f64, f64) {
    assert!(len >= 1);
    assert!(tau >= 0.0);
    if tau == 0.0 {
        return (len as f64, 0.0);
    }
    mc_norm_sq(len, n_mc, seed, |z| tv_prox_typed(z, tau, boundary))
}
