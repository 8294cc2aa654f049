//! Batch front end: every engine behind flat CSV/JSON outputs.
//!
//! Each run writes a manifest (`<out>.manifest.json`) holding the effective
//! argument vector, seed, and output paths; `ampcs replay` re-executes a
//! manifest and reproduces its outputs byte for byte.
//!
//! Exit codes: 0 success, 2 validation error, 3 numeric failure.

mod manifest;

use ampcs::amp::SuccessCriterion;
use ampcs::denoise::{implied_penalty, BoundaryType, Denoiser};
use ampcs::experiments::{
    fit_logistic, fit_offset_scaling, fit_slope_scaling, run_pt_grid, ScalingSeries, SignalClass,
};
use ampcs::minimax::{self, MinimaxCurvePoint};
use ampcs::risk::{self, RiskRow};
use ampcs::se::{ScaleRisk, SeMap};
use ampcs::{Error as CoreError, Result as CoreResult};
use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use manifest::RunManifest;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "ampcs", version, about = "Sparse reconstruction phase-transition toolkit")]
struct Cli {
    /// Plain key=value configuration file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimax MSE curve M(ε) for one denoiser family.
    Minimax(MinimaxArgs),
    /// Risk tables R(μ; η) / r(ℓ) over a query grid.
    Risk(RiskArgs),
    /// State-evolution trace and highest fixed point.
    Se(SeArgs),
    /// Single reconstruction with a full run record.
    Run(RunArgs),
    /// Monte Carlo phase-transition grid plus logistic fit.
    Pt(PtArgs),
    /// Finite-size scaling fits of offsets or slopes.
    Scaling(ScalingArgs),
    /// Implied penalty J(x) of an invertible shrinker.
    Penalty(PenaltyArgs),
    /// Re-run a recorded manifest.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct MinimaxArgs {
    /// soft | softpos | cap | pos | hard | firm | minimax | block-soft |
    /// james-stein | monotone | tv | tv-random
    #[arg(long)]
    denoiser: String,
    /// Comma-separated sparsity levels.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long)]
    block: Option<usize>,
    /// Free atom pairs for the global minimax fit.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Largest tabulated interval length for monotone/tv.
    #[arg(long, default_value_t = 1024)]
    max_len: usize,
    /// Monte Carlo draws per risk-table entry.
    #[arg(long, default_value_t = 100_000)]
    n_mc: usize,
    /// τ grid for the tv families, as lo:hi:count (log-spaced).
    #[arg(long, default_value = "0.3:5.0:16")]
    tau_grid: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RiskArgs {
    /// soft | softpos | cap | hard | firm | minimax-table | block-soft |
    /// james-stein | mono | tv
    #[arg(long)]
    kind: String,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    tau2: Option<f64>,
    #[arg(long)]
    block: Option<usize>,
    /// Signal magnitudes (scalar/block kinds).
    #[arg(long, value_delimiter = ',')]
    mu: Vec<f64>,
    /// Interval lengths (mono/tv kinds).
    #[arg(long, value_delimiter = ',')]
    len: Vec<usize>,
    /// ++ or +- boundary type for tv.
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    n_mc: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeArgs {
    /// soft | softpos | hard | firm | block-soft | james-stein
    #[arg(long)]
    kind: String,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    block: Option<usize>,
    /// Prior magnitude; "inf" for the sentinel. Defaults to the least
    /// favorable μ*(ε) (finite) or 100 when μ* is infinite.
    #[arg(long)]
    mu: Option<String>,
    #[arg(long, default_value_t = 200)]
    t_max: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Same families as `pt`.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    block: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 300)]
    t_max: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 20_000)]
    n_mc: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PtArgs {
    /// soft | softpos | firm | hard | minimax | block-soft | james-stein |
    /// monotone | tv-random | tv-lf
    #[arg(long)]
    kind: String,
    #[arg(long)]
    epsilon: f64,
    /// Signal dimension N.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    block: Option<usize>,
    /// Explicit δ grid; default is 11 points spanning M(ε) ± 0.05.
    #[arg(long, value_delimiter = ',')]
    delta_grid: Vec<f64>,
    /// Signal amplitude override (default: least favorable, or 100 for ∞).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 300)]
    t_max: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 20_000)]
    n_mc: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScalingArgs {
    /// offset | slope
    #[arg(long)]
    mode: String,
    /// CSV with columns label,N,value,se.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0/3.0, 0.5, 2.0/3.0, 0.75, 1.0])]
    gammas: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PenaltyArgs {
    /// soft | softpos | firm | block-soft | james-stein
    #[arg(long)]
    kind: String,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    tau2: Option<f64>,
    #[arg(long)]
    block: Option<usize>,
    #[arg(long, default_value_t = 6.0)]
    x_max: f64,
    #[arg(long, default_value_t = 600)]
    x_nodes: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

fn main() {
    env_logger::init();
    let argv = merge_config(std::env::args().collect());
    let cli = Cli::parse_from(&argv);
    let started = std::time::Instant::now();
    let outcome = match &cli.command {
        Command::Minimax(a) => cmd_minimax(a).map(|o| (o, argv.clone(), a.out.clone())),
        Command::Risk(a) => cmd_risk(a).map(|o| (o, argv.clone(), a.out.clone())),
        Command::Se(a) => cmd_se(a).map(|o| (o, argv.clone(), a.out.clone())),
        Command::Pt(a) => cmd_pt(a).map(|o| (o, argv.clone(), a.out.clone())),
        Command::Scaling(a) => cmd_scaling(a).map(|o| (o, argv.clone(), a.out.clone())),
        Command::Penalty(a) => cmd_penalty(a).map(|o| (o, argv.clone(), a.out.clone())),
        Command::Replay(a) => match replay(a) {
            Ok(code) => std::process::exit(code),
            Err(e) => {
                eprintln!("error: {e:#}");
                std::process::exit(2)
            }
        },
    };
    match outcome {
        Ok((outputs, argv, primary)) => {
            let manifest = RunManifest::new(argv, outputs, started.elapsed().as_secs_f64());
            if let Err(e) = manifest.write_next_to(&primary) {
                eprintln!("error writing manifest: {e:#}");
                std::process::exit(3);
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(exit_code(&e));
        }
    }
}

/// Fills flags from a key=value config file; explicit flags win.
fn merge_config(mut argv: Vec<String>) -> Vec<String> {
    let Some(pos) = argv.iter().position(|a| a == "--config") else {
        return argv;
    };
    let Some(path) = argv.get(pos + 1).cloned() else {
        return argv;
    };
    let Ok(text) = fs::read_to_string(&path) else {
        return argv; // clap will surface the bad path on parse
    };
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            let flag = format!("--{}", k.trim());
            if !argv.iter().any(|a| *a == flag) {
                argv.push(flag);
                argv.push(v.trim().to_string());
            }
        }
    }
    argv
}

fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<CoreError>() {
        Some(CoreError::Numeric(_)) => 3,
        _ => 2,
    }
}

fn parse_tau_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("tau grid must be lo:hi:count");
    }
    let lo: f64 = parts[0].parse()?;
    let hi: f64 = parts[1].parse()?;
    let count: usize = parts[2].parse()?;
    if !(lo > 0.0 && hi > lo && count >= 2) {
        bail!("tau grid needs 0 < lo < hi and count >= 2");
    }
    Ok((0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect())
}

fn curve_to_file(label: &str, points: &[MinimaxCurvePoint], out: &Path) -> CoreResult<()> {
    let mut buf = Vec::new();
    minimax::write_curve_csv(label, points, &mut buf)?;
    fs::write(out, buf)?;
    Ok(())
}

fn cmd_minimax(a: &MinimaxArgs) -> anyhow::Result<Vec<PathBuf>> {
    if a.eps.is_empty() {
        bail!("need at least one epsilon");
    }
    let mut outputs = vec![a.out.clone()];
    let mut points = Vec::new();
    match a.denoiser.as_str() {
        "soft" => {
            for &e in &a.eps {
                points.push(minimax::mse_soft(e)?);
            }
        }
        "softpos" => {
            for &e in &a.eps {
                points.push(minimax::mse_softpos(e)?);
            }
        }
        "cap" | "pos" => {
            for &e in &a.eps {
                let m = minimax::mse_cap(e)?;
                points.push(MinimaxCurvePoint::new(e, m, Denoiser::Cap, 1.0));
            }
        }
        "hard" => {
            for &e in &a.eps {
                points.push(minimax::mse_hard(e)?);
            }
        }
        "firm" => {
            for &e in &a.eps {
                points.push(minimax::mse_firm(e)?);
            }
        }
        "minimax" => {
            for &e in &a.eps {
                let (point, fit, table) = minimax::mse_minimax_scalar(e, a.k)?;
                let score_path = sidecar(&a.out, &format!("score_eps{e}"), "csv");
                let mut buf = Vec::new();
                table.to_csv(&mut buf)?;
                fs::write(&score_path, buf)?;
                let prior_path = sidecar(&a.out, &format!("prior_eps{e}"), "json");
                fs::write(&prior_path, serde_json::to_vec_pretty(&fit)?)?;
                outputs.push(score_path);
                outputs.push(prior_path);
                points.push(point);
            }
        }
        "block-soft" => {
            let b = a.block.ok_or_else(|| anyhow!("--block required"))?;
            for &e in &a.eps {
                points.push(minimax::mse_block_soft(e, b)?);
            }
        }
        "james-stein" => {
            let b = a.block.ok_or_else(|| anyhow!("--block required"))?;
            for &e in &a.eps {
                points.push(minimax::mse_james_stein(e, b)?);
            }
        }
        "monotone" => {
            let lens = risk::length_ladder(a.max_len);
            let table = risk::mono_risk_table(&lens, a.n_mc, a.seed);
            for &e in &a.eps {
                let (point, dist) = minimax::mse_monotone(e, &table)?;
                let dist_path = sidecar(&a.out, &format!("pi_eps{e}"), "json");
                fs::write(&dist_path, serde_json::to_vec_pretty(&dist)?)?;
                outputs.push(dist_path);
                points.push(point);
            }
        }
        "tv" | "tv-random" => {
            let taus = parse_tau_grid(&a.tau_grid)?;
            let lens = risk::length_ladder(a.max_len);
            let table = risk::tv_risk_table(&taus, &lens, a.n_mc, a.seed);
            for &e in &a.eps {
                if a.denoiser == "tv" {
                    let (point, dist) = minimax::mse_tv(e, &table)?;
                    let dist_path = sidecar(&a.out, &format!("pi_eps{e}"), "json");
                    fs::write(&dist_path, serde_json::to_vec_pretty(&dist)?)?;
                    outputs.push(dist_path);
                    points.push(point);
                } else {
                    points.push(minimax::mse_tv_random(e, &table)?);
                }
            }
        }
        other => bail!(
            "unknown denoiser '{other}'; expected one of soft, softpos, cap, pos, hard, \
             firm, minimax, block-soft, james-stein, monotone, tv, tv-random"
        ),
    }
    curve_to_file(&a.denoiser, &points, &a.out)?;
    Ok(outputs)
}

fn cmd_risk(a: &RiskArgs) -> anyhow::Result<Vec<PathBuf>> {
    let mut rows: Vec<RiskRow> = Vec::new();
    let need_tau = || a.tau.ok_or_else(|| anyhow!("--tau required for kind {}", a.kind));
    match a.kind.as_str() {
        "soft" | "softpos" | "cap" | "hard" | "firm" => {
            let d = match a.kind.as_str() {
                "soft" => Denoiser::soft(need_tau()?)?,
                "softpos" => Denoiser::soft_pos(need_tau()?)?,
                "cap" => Denoiser::Cap,
                "hard" => Denoiser::hard(need_tau()?)?,
                _ => Denoiser::firm(
                    need_tau()?,
                    a.tau2.ok_or_else(|| anyhow!("--tau2 required for firm"))?,
                )?,
            };
            for &mu in &a.mu {
                rows.push(RiskRow {
                    kind: a.kind.clone(),
                    block: None,
                    tau: a.tau,
                    mu_or_len: mu,
                    boundary: None,
                    estimate: risk::risk_scalar(&d, mu)?,
                    std_error: 0.0,
                    n_mc: None,
                    seed: None,
                });
            }
        }
        "block-soft" => {
            let b = a.block.ok_or_else(|| anyhow!("--block required"))?;
            let tau = need_tau()?;
            for &mu in &a.mu {
                rows.push(RiskRow {
                    kind: a.kind.clone(),
                    block: Some(b),
                    tau: Some(tau),
                    mu_or_len: mu,
                    boundary: None,
                    estimate: risk::risk_block_soft_sure(mu, tau, b),
                    std_error: 0.0,
                    n_mc: None,
                    seed: None,
                });
            }
        }
        "james-stein" => {
            let b = a.block.ok_or_else(|| anyhow!("--block required"))?;
            for &mu in &a.mu {
                let est = if mu == 0.0 {
                    risk::risk_js_zero(b)
                } else {
                    risk::risk_js_sure(mu, b)
                };
                rows.push(RiskRow {
                    kind: a.kind.clone(),
                    block: Some(b),
                    tau: None,
                    mu_or_len: mu,
                    boundary: None,
                    estimate: est,
                    std_error: 0.0,
                    n_mc: None,
                    seed: None,
                });
            }
        }
        "mono" => {
            for &len in &a.len {
                let (est, se) = risk::risk_mono_zero(len, a.n_mc, a.seed);
                rows.push(RiskRow {
                    kind: a.kind.clone(),
                    block: None,
                    tau: None,
                    mu_or_len: len as f64,
                    boundary: None,
                    estimate: est,
                    std_error: se,
                    n_mc: Some(a.n_mc),
                    seed: Some(a.seed),
                });
            }
        }
        "tv" => {
            let tau = need_tau()?;
            let boundary = match a.boundary.as_deref() {
                Some("++") => BoundaryType::PlusPlus,
                Some("+-") => BoundaryType::PlusMinus,
                _ => bail!("--boundary must be ++ or +-"),
            };
            for &len in &a.len {
                let (est, se) = risk::risk_tv_zero(len, boundary, tau, a.n_mc, a.seed);
                rows.push(RiskRow {
                    kind: a.kind.clone(),
                    block: None,
                    tau: Some(tau),
                    mu_or_len: len as f64,
                    boundary: Some(boundary.label().into()),
                    estimate: est,
                    std_error: se,
                    n_mc: Some(a.n_mc),
                    seed: Some(a.seed),
                });
            }
        }
        other => bail!("unknown risk kind '{other}'"),
    }
    if rows.is_empty() {
        bail!("empty query grid: pass --mu or --len values");
    }
    let mut buf = Vec::new();
    risk::write_risk_csv(&rows, &mut buf)?;
    fs::write(&a.out, buf)?;
    Ok(vec![a.out.clone()])
}

fn cmd_se(a: &SeArgs) -> anyhow::Result<Vec<PathBuf>> {
    use ampcs::risk::TwoPointPrior;
    let (tuned, block): (Denoiser, Option<usize>) = match a.kind.as_str() {
        "soft" => (minimax::mse_soft(a.epsilon)?.denoiser, None),
        "softpos" => (minimax::mse_softpos(a.epsilon)?.denoiser, None),
        "hard" => (minimax::mse_hard(a.epsilon)?.denoiser, None),
        "firm" => (minimax::mse_firm(a.epsilon)?.denoiser, None),
        "block-soft" => {
            let b = a.block.ok_or_else(|| anyhow!("--block required"))?;
            (minimax::mse_block_soft(a.epsilon, b)?.denoiser, Some(b))
        }
        "james-stein" => {
            let b = a.block.ok_or_else(|| anyhow!("--block required"))?;
            (minimax::mse_james_stein(a.epsilon, b)?.denoiser, Some(b))
        }
        other => bail!("unknown se kind '{other}'"),
    };
    let mu = match a.mu.as_deref() {
        Some("inf") | Some("INF") => f64::INFINITY,
        Some(s) => s.parse::<f64>().context("bad --mu")?,
        None => 100.0,
    };
    let risk = match (&tuned, block) {
        (Denoiser::BlockSoft { tau, .. }, Some(b)) => ScaleRisk::BlockSoft {
            tau: *tau,
            block: b,
            epsilon: a.epsilon,
            mu_norm: mu,
        },
        (Denoiser::JamesStein { .. }, Some(b)) => {
            ScaleRisk::JamesStein { block: b, epsilon: a.epsilon, mu_norm: mu }
        }
        (d, _) => ScaleRisk::Scalar {
            denoiser: d.clone(),
            prior: TwoPointPrior {
                epsilon: a.epsilon,
                mu,
                symmetric: a.kind != "softpos",
            },
        },
    };
    let map = SeMap::new(a.delta, risk)?;
    let m0 = if mu.is_finite() {
        a.epsilon * mu * mu / a.delta / block.map_or(1.0, |b| b as f64)
    } else {
        1.0
    };
    let trace = map.analyze(m0, a.t_max, a.tol, 10.0 * m0.max(1.0));
    let mut buf = String::from("t,m\n");
    for (t, m) in trace.states.iter().enumerate() {
        buf.push_str(&format!("{t},{m}\n"));
    }
    fs::write(&a.out, buf)?;
    let summary = sidecar(&a.out, "summary", "json");
    fs::write(&summary, serde_json::to_vec_pretty(&trace)?)?;
    Ok(vec![a.out.clone(), summary])
}

struct PtSetup {
    denoiser: Denoiser,
    class: SignalClass,
    criterion: SuccessCriterion,
    pred: f64,
}

fn pt_setup(a: &PtArgs) -> anyhow::Result<PtSetup> {
    let rel_mse = SuccessCriterion::RelMse { gamma: 0.01 };
    let hamming = SuccessCriterion::Hamming { alpha: 0.01, beta: 0.01 };
    let finite_mu = |p: &MinimaxCurvePoint| {
        a.mu.unwrap_or(if p.mu_star.is_finite() { p.mu_star } else { 100.0 })
    };
    Ok(match a.kind.as_str() {
        "soft" => {
            let p = minimax::mse_soft(a.epsilon)?;
            let mu = finite_mu(&p);
            PtSetup {
                denoiser: p.denoiser,
                class: SignalClass::SimpleSparse { mu },
                criterion: rel_mse,
                pred: p.m,
            }
        }
        "softpos" => {
            let p = minimax::mse_softpos(a.epsilon)?;
            let mu = finite_mu(&p);
            PtSetup {
                denoiser: p.denoiser,
                class: SignalClass::PositiveSparse { mu },
                criterion: rel_mse,
                pred: p.m,
            }
        }
        "firm" => {
            let p = minimax::mse_firm(a.epsilon)?;
            let mu = finite_mu(&p);
            PtSetup {
                denoiser: p.denoiser,
                class: SignalClass::SimpleSparse { mu },
                criterion: rel_mse,
                pred: p.m,
            }
        }
        "hard" => {
            let p = minimax::mse_hard(a.epsilon)?;
            let mu = finite_mu(&p);
            PtSetup {
                denoiser: p.denoiser,
                class: SignalClass::SimpleSparse { mu },
                criterion: rel_mse,
                pred: p.m,
            }
        }
        "minimax" => {
            let (p, _, _) = minimax::mse_minimax_scalar(a.epsilon, a.k)?;
            let mu = finite_mu(&p);
            PtSetup {
                denoiser: p.denoiser,
                class: SignalClass::SimpleSparse { mu },
                criterion: rel_mse,
                pred: p.m,
            }
        }
        "block-soft" => {
            let b = a.block.ok_or_else(|| anyhow!("--block required"))?;
            let p = minimax::mse_block_soft(a.epsilon, b)?;
            let mu = finite_mu(&p);
            PtSetup {
                denoiser: p.denoiser,
                class: SignalClass::BlockSparse { mu, block: b },
                criterion: rel_mse,
                pred: p.m,
            }
        }
        "james-stein" => {
            let b = a.block.ok_or_else(|| anyhow!("--block required"))?;
            let p = minimax::mse_james_stein(a.epsilon, b)?;
            let mu = finite_mu(&p);
            PtSetup {
                denoiser: p.denoiser,
                class: SignalClass::BlockSparse { mu, block: b },
                criterion: rel_mse,
                pred: p.m,
            }
        }
        "monotone" => {
            let lens = risk::length_ladder(((2.0 / a.epsilon) as usize).max(64));
            let table = risk::mono_risk_table(&lens, a.n_mc, a.seed ^ 0xd1f);
            let (p, dist) = minimax::mse_monotone(a.epsilon, &table)?;
            PtSetup {
                denoiser: Denoiser::Monotone,
                class: SignalClass::MonotoneLf { jump: a.mu.unwrap_or(10.0), dist },
                criterion: hamming,
                pred: p.m,
            }
        }
        "tv-random" => {
            let taus = parse_tau_grid("0.3:5.0:16")?;
            let lens = risk::length_ladder(((4.0 / a.epsilon) as usize).max(64));
            let table = risk::tv_risk_table(&taus, &lens, a.n_mc, a.seed ^ 0xd2f);
            let p = minimax::mse_tv_random(a.epsilon, &table)?;
            PtSetup {
                denoiser: p.denoiser,
                class: SignalClass::TvRandom { jump: a.mu.unwrap_or(10.0) },
                criterion: hamming,
                pred: p.m,
            }
        }
        "tv-lf" => {
            let taus = parse_tau_grid("0.3:5.0:16")?;
            let lens = risk::length_ladder(((2.0 / a.epsilon) as usize).max(64));
            let table = risk::tv_risk_table(&taus, &lens, a.n_mc, a.seed ^ 0xd3f);
            let (p, dist) = minimax::mse_tv(a.epsilon, &table)?;
            PtSetup {
                denoiser: p.denoiser.clone(),
                class: SignalClass::TvLf { jump: a.mu.unwrap_or(10.0), dist },
                criterion: SuccessCriterion::RelMseAtT { gamma: 1e-3, t: 5 },
                pred: p.m,
            }
        }
        other => bail!("unknown pt kind '{other}'"),
    })
}

fn cmd_pt(a: &PtArgs) -> anyhow::Result<Vec<PathBuf>> {
    let setup = pt_setup(a)?;
    let grid: Vec<f64> = if a.delta_grid.is_empty() {
        (0..11).map(|i| (setup.pred - 0.05 + 0.01 * i as f64).clamp(0.01, 0.999)).collect()
    } else {
        a.delta_grid.clone()
    };
    let t_max = if matches!(setup.criterion, SuccessCriterion::RelMseAtT { .. }) {
        5
    } else {
        a.t_max
    };
    let result = run_pt_grid(
        a.epsilon,
        &setup.denoiser,
        &setup.class,
        a.n,
        &grid,
        a.trials,
        a.seed,
        setup.criterion,
        t_max,
    )?;
    let mut buf = Vec::new();
    result.to_csv(&a.kind, &mut buf)?;
    fs::write(&a.out, buf)?;
    let fit_path = sidecar(&a.out, "fit", "json");
    match fit_logistic(&result, setup.pred) {
        Ok(fit) => {
            #[derive(serde::Serialize)]
            struct FitReport<'a> {
                pred: f64,
                n_dim: usize,
                epsilon: f64,
                #[serde(flatten)]
                fit: &'a ampcs::experiments::LogisticFit,
            }
            let report =
                FitReport { pred: setup.pred, n_dim: a.n, epsilon: a.epsilon, fit: &fit };
            fs::write(&fit_path, serde_json::to_vec_pretty(&report)?)?;
        }
        Err(e) => {
            eprintln!("warning: logistic fit unavailable: {e}");
            fs::write(&fit_path, serde_json::to_vec_pretty(&serde_json::json!({
                "pred": setup.pred,
                "error": e.to_string(),
            }))?)?;
        }
    }
    Ok(vec![a.out.clone(), fit_path])
}

fn cmd_scaling(a: &ScalingArgs) -> anyhow::Result<Vec<PathBuf>> {
    let text = fs::read_to_string(&a.input).context("reading scaling input")?;
    let mut series: Vec<ScalingSeries> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("label")) {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() < 3 {
            bail!("scaling input line {} needs label,N,value[,se]", i + 1);
        }
        let label = parts[0].to_string();
        let n: usize = parts[1].trim().parse()?;
        let value: f64 = parts[2].trim().parse()?;
        let se: f64 = parts.get(3).map_or(Ok(0.0), |s| s.trim().parse())?;
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((n, value, se)),
            None => series.push(ScalingSeries { label, points: vec![(n, value, se)] }),
        }
    }
    let fits = match a.mode.as_str() {
        "offset" => fit_offset_scaling(&series, &a.gammas)?,
        "slope" => fit_slope_scaling(&series, &a.gammas)?,
        other => bail!("unknown scaling mode '{other}' (offset | slope)"),
    };
    let mut buf = String::from("gamma,r_squared\n");
    for f in &fits {
        buf.push_str(&format!("{},{}\n", f.gamma, f.r_squared));
    }
    fs::write(&a.out, buf)?;
    Ok(vec![a.out.clone()])
}

fn cmd_penalty(a: &PenaltyArgs) -> anyhow::Result<Vec<PathBuf>> {
    let d = match a.kind.as_str() {
        "soft" => Denoiser::soft(a.tau.ok_or_else(|| anyhow!("--tau required"))?)?,
        "softpos" => Denoiser::soft_pos(a.tau.ok_or_else(|| anyhow!("--tau required"))?)?,
        "firm" => Denoiser::firm(
            a.tau.ok_or_else(|| anyhow!("--tau required"))?,
            a.tau2.ok_or_else(|| anyhow!("--tau2 required"))?,
        )?,
        "hard" => Denoiser::hard(a.tau.ok_or_else(|| anyhow!("--tau required"))?)?,
        "block-soft" => Denoiser::block_soft(
            a.tau.ok_or_else(|| anyhow!("--tau required"))?,
            a.block.ok_or_else(|| anyhow!("--block required"))?,
        )?,
        "james-stein" => {
            Denoiser::james_stein(a.block.ok_or_else(|| anyhow!("--block required"))?)?
        }
        other => bail!("unknown penalty kind '{other}'"),
    };
    let grid: Vec<f64> =
        (0..=a.x_nodes).map(|i| a.x_max * i as f64 / a.x_nodes as f64).collect();
    let table = implied_penalty(&d, &grid)?;
    let mut buf = Vec::new();
    table.to_csv(&mut buf)?;
    fs::write(&a.out, buf)?;
    Ok(vec![a.out.clone()])
}

fn replay(a: &ReplayArgs) -> anyhow::Result<i32> {
    let manifest = RunManifest::read(&a.manifest)?;
    let argv = manifest.argv.clone();
    let exe = std::env::current_exe()?;
    let status = std::process::Command::new(exe).args(&argv[1..]).status()?;
    Ok(status.code().unwrap_or(3))
}

fn sidecar(primary: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = primary.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    primary.with_file_name(format!("{stem}.{tag}.{ext}"))
}
