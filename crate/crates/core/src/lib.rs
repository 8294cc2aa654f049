//! Compressed-sensing reconstruction by approximate message passing with
//! pluggable structured denoisers, the minimax-MSE curves that predict its
//! phase transitions, scalar state evolution, and the Monte Carlo harness
//! that measures empirical transitions against the predictions.
//!
//! The central identity exercised throughout: the undersampling threshold of
//! the reconstruction loop equals the minimax denoising MSE of the plugged-in
//! shrinker, δ = M(ε | η).

pub mod amp;
pub mod denoise;
pub mod error;
pub mod experiments;
pub mod minimax;
pub mod risk;
pub mod rng;
pub mod se;
pub mod stats;

pub use denoise::Denoiser;
pub use error::{Error, Result};
