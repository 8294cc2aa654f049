//! The reconstruction loop: matched filtering, denoising, and the
//! memory-corrected residual update
//!
//!   yᵗ   = xᵗ + Aᵀzᵗ
//!   xᵗ⁺¹ = η(yᵗ; τ, σ̂ₜ)
//!   zᵗ⁺¹ = y − Axᵗ⁺¹ + bₜ₊₁ zᵗ,   bₜ₊₁ = div η(yᵗ; τ, σ̂ₜ)/n
//!
//! with the noise scale σ̂ₜ re-estimated every iteration from the working
//! residual by the robust median rule.

use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::stats::{median, quantile, PROBIT_75};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Dense row-major matrix with the two products the loop needs.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> crate::Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid("matrix data length mismatch"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        DenseMatrix { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// A·x.
    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Aᵀ·z, accumulated row-wise to stay cache friendly.
    pub fn mul_t(&self, z: &[f64], out: &mut [f64]) {
        assert_eq!(z.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (r, &zr) in z.iter().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * zr;
            }
        }
    }
}

/// Gaussian sensing matrix with iid N(0, 1/n) entries, so columns have unit
/// expected norm. Deterministic in the seed.
pub fn gaussian_matrix(n: usize, n_cols: usize, seed: u64) -> DenseMatrix {
    assert!(n >= 1 && n_cols >= n, "need 0 < n <= N");
    let mut rng = stream_rng(seed, 0);
    let scale = 1.0 / (n as f64).sqrt();
    let data = (0..n * n_cols)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            scale * g
        })
        .collect();
    DenseMatrix { rows: n, cols: n_cols, data }
}

/// The undersampled measurement setup y = A·x₀.
#[derive(Debug, Clone)]
pub struct SensingProblem {
    pub a: DenseMatrix,
    pub y: Vec<f64>,
    pub x0: Option<Vec<f64>>,
}

impl SensingProblem {
    /// Noiseless problem from a ground-truth signal.
    pub fn from_signal(a: DenseMatrix, x0: Vec<f64>) -> Result<Self> {
        if a.cols() != x0.len() {
            return Err(Error::invalid("matrix/signal dimension mismatch"));
        }
        let mut y = vec![0.0; a.rows()];
        a.mul(&x0, &mut y);
        Ok(SensingProblem { a, y, x0: Some(x0) })
    }

    pub fn delta(&self) -> f64 {
        self.a.rows() as f64 / self.a.cols() as f64
    }
}

/// Per-iteration loop state.
#[derive(Debug, Clone, Serialize)]
pub struct AmpState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub sigma_hat: f64,
    pub onsager: f64,
    pub t: usize,
}

impl AmpState {
    /// x⁰ = 0, z⁰ = y, σ̂ from the initial residual.
    pub fn init(problem: &SensingProblem) -> AmpState {
        AmpState {
            x: vec![0.0; problem.a.cols()],
            z: problem.y.clone(),
            sigma_hat: estimate_sigma(&problem.y),
            onsager: 0.0,
            t: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().all(|v| v.is_finite()) && self.z.iter().all(|v| v.is_finite())
    }
}

/// Robust noise-scale estimate median(|z|)/Φ⁻¹(0.75); 0 for an all-zero
/// residual, which signals convergence.
pub fn estimate_sigma(z: &[f64]) -> f64 {
    assert!(!z.is_empty());
    let mut abs: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    median(&mut abs) / PROBIT_75
}

/// One full iteration. Returns `None` when the residual has vanished (exact
/// fixed point) and the state should be kept as is.
pub fn amp_step(
    problem: &SensingProblem,
    state: &AmpState,
    denoiser: &Denoiser,
) -> Result<Option<AmpState>> {
    amp_step_configured(problem, state, denoiser, true)
}

/// `amp_step` with the memory term optionally disabled (plain iterative
/// thresholding) — a negative control, not a recommended mode.
pub fn amp_step_configured(
    problem: &SensingProblem,
    state: &AmpState,
    denoiser: &Denoiser,
    with_onsager: bool,
) -> Result<Option<AmpState>> {
    let n = problem.a.rows();
    let sigma = estimate_sigma(&state.z);
    if sigma == 0.0 {
        return Ok(None);
    }
    // pseudo-data yᵗ = xᵗ + Aᵀ zᵗ
    let mut pseudo = vec![0.0; problem.a.cols()];
    problem.a.mul_t(&state.z, &mut pseudo);
    for (p, &xi) in pseudo.iter_mut().zip(&state.x) {
        *p += xi;
    }
    let x_next = denoiser.apply(&pseudo, sigma)?;
    let onsager = if with_onsager {
        denoiser.divergence_with_output(&pseudo, sigma, &x_next) / n as f64
    } else {
        0.0
    };
    let mut z_next = vec![0.0; n];
    problem.a.mul(&x_next, &mut z_next);
    for ((zi, &yi), &zprev) in z_next.iter_mut().zip(&problem.y).zip(&state.z) {
        *zi = yi - *zi + onsager * zprev;
    }
    Ok(Some(AmpState { x: x_next, z: z_next, sigma_hat: sigma, onsager, t: state.t + 1 }))
}

/// Success rules used by the experiment harnesses.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum SuccessCriterion {
    /// ‖x̂ − x₀‖²/‖x₀‖² < γ at any iteration (strict, ties fail).
    RelMse { gamma: f64 },
    /// Fraction (per measurement, not per coordinate) of entries off by ≥ α
    /// is at most β.
    Hamming { alpha: f64, beta: f64 },
    /// Relative MSE at a fixed iteration count only.
    RelMseAtT { gamma: f64, t: usize },
}

/// ‖x̂ − x₀‖²/‖x₀‖² < γ, strict. A zero signal counts as recovered only if
/// the estimate is numerically zero too.
pub fn success_mse(x_hat: &[f64], x0: &[f64], gamma: f64) -> bool {
    let err: f64 = x_hat.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
    let nrm: f64 = x0.iter().map(|v| v * v).sum();
    if nrm == 0.0 {
        return err == 0.0;
    }
    err / nrm < gamma
}

/// H_α(x̂, x₀) = #{i : |x̂_i − x₀_i| ≥ α}/n ≤ β, normalized by the number of
/// measurements n (not the signal dimension).
pub fn success_hamming(x_hat: &[f64], x0: &[f64], alpha: f64, beta: f64, n: usize) -> bool {
    let count = x_hat.iter().zip(x0).filter(|(a, b)| (**a - **b).abs() >= alpha).count();
    count as f64 / n as f64 <= beta
}

#[derive(Debug, Clone, Serialize)]
pub struct AmpRun {
    pub state: AmpState,
    /// Relative squared error per iteration (present when x₀ is known).
    pub mse_trace: Vec<f64>,
    pub success: bool,
    pub iterations: usize,
    /// Set when the state left the finite range.
    pub diverged: bool,
}

fn rel_mse(x_hat: &[f64], x0: &[f64]) -> f64 {
    let err: f64 = x_hat.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
    let nrm: f64 = x0.iter().map(|v| v * v).sum();
    if nrm == 0.0 {
        if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        err / nrm
    }
}

fn criterion_met(c: &SuccessCriterion, x_hat: &[f64], x0: &[f64], n: usize, t: usize) -> bool {
    match c {
        SuccessCriterion::RelMse { gamma } => success_mse(x_hat, x0, *gamma),
        SuccessCriterion::Hamming { alpha, beta } => {
            success_hamming(x_hat, x0, *alpha, *beta, n)
        }
        SuccessCriterion::RelMseAtT { gamma, t: t_check } => {
            t == *t_check && success_mse(x_hat, x0, *gamma)
        }
    }
}

/// Runs the loop until the criterion fires or `t_max` iterations elapse.
/// Ground truth is required when a success criterion is supplied.
pub fn amp_run(
    problem: &SensingProblem,
    denoiser: &Denoiser,
    t_max: usize,
    criterion: Option<SuccessCriterion>,
) -> Result<AmpRun> {
    amp_run_configured(problem, denoiser, t_max, criterion, true)
}

/// `amp_run` with the memory term optionally disabled.
pub fn amp_run_configured(
    problem: &SensingProblem,
    denoiser: &Denoiser,
    t_max: usize,
    criterion: Option<SuccessCriterion>,
    with_onsager: bool,
) -> Result<AmpRun> {
    if criterion.is_some() && problem.x0.is_none() {
        return Err(Error::invalid("success evaluation needs the ground-truth signal"));
    }
    let n = problem.a.rows();
    let mut state = AmpState::init(problem);
    let mut mse_trace = Vec::new();
    let mut success = false;
    if let Some(x0) = &problem.x0 {
        mse_trace.push(rel_mse(&state.x, x0));
        if let Some(c) = &criterion {
            success = criterion_met(c, &state.x, x0, n, 0);
        }
    }
    let hard_stop = matches!(criterion, Some(SuccessCriterion::RelMseAtT { .. }));
    while state.t < t_max && (!success || hard_stop) {
        match amp_step_configured(problem, &state, denoiser, with_onsager)? {
            Some(next) => state = next,
            None => break,
        }
        if !state.is_finite() {
            return Ok(AmpRun {
                iterations: state.t,
                state,
                mse_trace,
                success: false,
                diverged: true,
            });
        }
        if let Some(x0) = &problem.x0 {
            mse_trace.push(rel_mse(&state.x, x0));
            if let Some(c) = &criterion {
                if criterion_met(c, &state.x, x0, n, state.t) {
                    success = true;
                }
            }
        }
    }
    Ok(AmpRun { iterations: state.t, state, mse_trace, success, diverged: false })
}

/// Median and quartile relative-MSE curves across independent replicates,
/// run to the full horizon (no early stopping).
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceProfile {
    pub median: Vec<f64>,
    pub q25: Vec<f64>,
    pub q75: Vec<f64>,
    pub replicates: usize,
}

pub fn convergence_profile(
    n: usize,
    n_cols: usize,
    denoiser: &Denoiser,
    make_signal: impl Fn(&mut rand_chacha::ChaCha8Rng) -> Vec<f64> + Sync,
    replicates: usize,
    t_max: usize,
    seed: u64,
) -> Result<ConvergenceProfile> {
    if replicates < 20 {
        return Err(Error::invalid("convergence profiles need at least 20 replicates"));
    }
    let traces: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(seed, rep as u64);
            let x0 = make_signal(&mut rng);
            let a = gaussian_matrix(n, n_cols, seed ^ (rep as u64).wrapping_mul(0x9e37));
            let problem = SensingProblem::from_signal(a, x0)?;
            let run = amp_run(&problem, denoiser, t_max, None)?;
            Ok(run.mse_trace)
        })
        .collect::<Result<_>>()?;
    let t_len = traces.iter().map(Vec::len).min().unwrap_or(0);
    let mut median_v = Vec::with_capacity(t_len);
    let mut q25 = Vec::with_capacity(t_len);
    let mut q75 = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut col: Vec<f64> = traces.iter().map(|tr| tr[t]).collect();
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        q25.push(quantile(&col, 0.25));
        median_v.push(quantile(&col, 0.5));
        q75.push(quantile(&col, 0.75));
    }
    Ok(ConvergenceProfile { median: median_v, q25, q75, replicates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn matrix_column_norms_concentrate() {
        let a = gaussian_matrix(1000, 1200, 7);
        let mut total = 0.0;
        for c in 0..a.cols() {
            let mut s = 0.0;
            for r in 0..a.rows() {
                let v = a.data[r * a.cols + c];
                s += v * v;
            }
            total += s;
        }
        let mean = total / a.cols() as f64;
        assert!(mean > 0.95 && mean < 1.05, "mean column norm^2 = {mean}");
        // determinism
        let b = gaussian_matrix(1000, 1200, 7);
        assert_eq!(a.data, b.data);
        let c = gaussian_matrix(1000, 1200, 8);
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn sigma_estimator_properties() {
        let mut rng = stream_rng(11, 0);
        let z: Vec<f64> = (0..100_000)
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                2.0 * g
            })
            .collect();
        let s = estimate_sigma(&z);
        assert!((s - 2.0).abs() / 2.0 < 0.02, "sigma = {s}");
        // equivariance
        let z3: Vec<f64> = z.iter().map(|v| 3.0 * v).collect();
        assert_relative_eq!(estimate_sigma(&z3), 3.0 * s, epsilon = 1e-12);
        // robustness: 5% gross outliers move the estimate < 10%
        let mut zc = z.clone();
        for i in 0..zc.len() / 20 {
            zc[i * 20] = 1e6;
        }
        assert!((estimate_sigma(&zc) - s).abs() / s < 0.10);
    }

    #[test]
    fn first_pseudo_data_is_matched_filter() {
        let a = gaussian_matrix(6, 10, 3);
        let mut x0 = vec![0.0; 10];
        x0[2] = 5.0;
        let problem = SensingProblem::from_signal(a, x0).unwrap();
        let state = AmpState::init(&problem);
        assert_eq!(state.z, problem.y);
        assert_eq!(state.t, 0);
        assert_eq!(state.onsager, 0.0);
        // with x⁰ = 0 the pseudo-data is Aᵀy by construction of the step
        let mut want = vec![0.0; 10];
        problem.a.mul_t(&problem.y, &mut want);
        let next = amp_step(&problem, &state, &Denoiser::soft(0.0).unwrap())
            .unwrap()
            .unwrap();
        // the denoiser is the identity at tau=0, so x¹ = Aᵀy exactly
        for (a, b) in next.x.iter().zip(&want) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn success_rules() {
        let x0 = vec![1.0, 0.0, 2.0];
        assert!(success_mse(&x0, &x0, 0.01));
        let off = vec![1.1, 0.0, 2.0];
        assert!(!success_mse(&off, &x0, 0.001));
        // boundary is strict
        let x = vec![1.0, 0.0, 0.0];
        let x0b = vec![0.0, 0.0, 0.0];
        assert!(!success_mse(&x, &x0b, 0.5));
        // one coordinate off by 2α in a 100-measurement problem: H = 0.01
        let mut xh = vec![0.0; 300];
        let x0h = vec![0.0; 300];
        xh[0] = 0.02;
        assert!(success_hamming(&xh, &x0h, 0.01, 0.01, 100));
        xh[1] = 0.02;
        assert!(!success_hamming(&xh, &x0h, 0.01, 0.01, 100));
    }

    #[test]
    fn identity_problem_recovers_in_one_step() {
        // A = I with the identity denoiser: the first pseudo-data is the
        // signal itself, so recovery is immediate and exact.
        let x0 = vec![3.0, -1.0, 0.0, 7.5];
        let problem = SensingProblem::from_signal(DenseMatrix::identity(4), x0).unwrap();
        let d = Denoiser::soft(0.0).unwrap();
        let run = amp_run(
            &problem,
            &d,
            10,
            Some(SuccessCriterion::RelMse { gamma: 1e-20 }),
        )
        .unwrap();
        assert!(run.success);
        assert!(run.iterations <= 2, "took {} iterations", run.iterations);
    }

    #[test]
    fn zero_signal_succeeds_immediately_under_hamming() {
        let a = gaussian_matrix(10, 30, 1);
        let problem = SensingProblem::from_signal(a, vec![0.0; 30]).unwrap();
        let d = Denoiser::soft(1.0).unwrap();
        let run = amp_run(
            &problem,
            &d,
            50,
            Some(SuccessCriterion::Hamming { alpha: 0.01, beta: 0.01 }),
        )
        .unwrap();
        assert!(run.success);
        assert_eq!(run.iterations, 0);
    }

    #[test]
    fn recovers_sparse_signal_above_transition() {
        // ε = 0.05 at δ = 0.30, comfortably above M(ε|soft) ≈ 0.204
        let n_cols = 600;
        let n = 180;
        let mut rng = stream_rng(99, 0);
        let x0: Vec<f64> = (0..n_cols)
            .map(|_| {
                if rng.random::<f64>() < 0.05 {
                    if rng.random::<bool>() {
                        30.0
                    } else {
                        -30.0
                    }
                } else {
                    0.0
                }
            })
            .collect();
        let a = gaussian_matrix(n, n_cols, 5);
        let problem = SensingProblem::from_signal(a, x0).unwrap();
        let d = Denoiser::soft(1.3984).unwrap();
        let run = amp_run(
            &problem,
            &d,
            300,
            Some(SuccessCriterion::RelMse { gamma: 0.01 }),
        )
        .unwrap();
        assert!(run.success, "final mse {:?}", run.mse_trace.last());
        assert!(run.iterations < 300);
    }
}
