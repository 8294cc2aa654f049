//! Block-separable shrinkers acting on contiguous blocks of fixed length.

use super::norm2;

/// (1 − t/‖block‖)₊ · block, with `t` the already σ-scaled threshold.
pub fn block_soft(y: &[f64], t: f64, block: usize, out: &mut [f64]) {
    for (blk, o) in y.chunks_exact(block).zip(out.chunks_exact_mut(block)) {
        let s = norm2(blk);
        let factor = if s > t { 1.0 - t / s } else { 0.0 };
        for (oi, &v) in o.iter_mut().zip(blk) {
            *oi = factor * v;
        }
    }
}

/// Positive-part James-Stein at noise scale σ: (1 − (B−2)σ²/‖block‖²)₊ · block.
pub fn james_stein(y: &[f64], sigma: f64, block: usize, out: &mut [f64]) {
    let a = (block as f64 - 2.0) * sigma * sigma;
    for (blk, o) in y.chunks_exact(block).zip(out.chunks_exact_mut(block)) {
        let s2: f64 = blk.iter().map(|v| v * v).sum();
        let factor = if s2 > a { 1.0 - a / s2 } else { 0.0 };
        for (oi, &v) in o.iter_mut().zip(blk) {
            *oi = factor * v;
        }
    }
}
