//! Simulator for multi-agent search on endogenously-changing fitness
//! landscapes.
//!
//! Firms (agents) adapt on an NK-style binary landscape extended with a
//! globally shared *shape policy*: some firms ("shapers") may mutate the
//! shape policy and thereby restructure the landscape for everyone. Three
//! adaptation models are provided:
//!
//! * [`standard`] — myopic single-bit hill climbing; shapers choose between
//!   a search move and a shape move each turn.
//! * [`stealth`] — stealthy global learning: per-firm guiding vectors pulled
//!   toward the global best firm, guided multi-bit resampling, and a bounded
//!   memory of elite policies exploited on an epsilon schedule.
//! * [`coop`] — structured cooperation: the stealth mechanics scoped to
//!   fixed collaboration groups, with search mutation restricted to the
//!   single highest-flip-probability bit.
//!
//! The [`engine`] module runs seeded, reproducible replications of any model
//! and aggregates per-iteration metrics with t-based confidence intervals.
//! [`oracle`] re-derives fitness values from first principles and is used by
//! the verification harness.

pub mod bits;
pub mod coop;
pub mod engine;
pub mod landscape;
pub mod oracle;
pub mod population;
pub mod standard;
pub mod stats;
pub mod stealth;

pub use bits::BitString;
pub use engine::{Model, SimulationConfig};
pub use landscape::{Landscape, LandscapeConfig};
pub use population::{Firm, Population, Role};

use thiserror::Error;

/// Rejected configuration, naming the violated bound.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("N must be at least 1")]
    ZeroLoci,
    #[error("K must be <= N-1 (K={k}, N={n})")]
    KTooLarge { k: usize, n: usize },
    #[error("E must be <= Z (E={e}, Z={z})")]
    ETooLarge { e: usize, z: usize },
    #[error("K+1+E must be <= 63 to fit a contribution row index (got {bits})")]
    RowIndexTooWide { bits: usize },
    #[error("M must be at least 1")]
    EmptyPopulation,
    #[error("beta must lie in [0, 1] (got {0})")]
    BetaOutOfRange(f64),
    #[error("alpha must lie in [0, 1] (got {0})")]
    AlphaOutOfRange(f64),
    #[error("theta must be at least 1")]
    ZeroMemoryCapacity,
    #[error("epsilon0 must lie in [0, 1] (got {0})")]
    EpsilonOutOfRange(f64),
    #[error("gamma must lie in (0, 1) (got {0})")]
    GammaOutOfRange(f64),
    #[error("omega_max must be at least 1")]
    ZeroGroupSize,
    #[error("iterations must be at least 1")]
    ZeroIterations,
    #[error("runs must be at least 1")]
    ZeroRuns,
    #[error("group sizes must sum to M (sum={sum}, M={m})")]
    CompositionSumMismatch { sum: usize, m: usize },
    #[error("group size must lie in 1..=omega_max (size={size}, omega_max={omega_max})")]
    CompositionSizeOutOfRange { size: usize, omega_max: usize },
    #[error("group shaper count must be <= group size (shapers={shapers}, size={size})")]
    CompositionShapersOutOfRange { shapers: usize, size: usize },
    #[error("balanced grouping needs runs divisible by {blocks} (runs={runs})")]
    UnbalancedRuns { runs: usize, blocks: usize },
    #[error(
        "balanced grouping impossible: composition sizes sum to {sum}, not a multiple of M={m}"
    )]
    UnbalancedCompositions { sum: usize, m: usize },
    #[error("group schemes only apply to the structured cooperation model")]
    GroupsWithoutCooperation,
}

/// Exhaustive enumeration refused because the search space is too large.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("exhaustive enumeration is limited to N <= {max} (N={n})")]
pub struct EnumerationTooLarge {
    pub n: usize,
    pub max: usize,
}
