//! Simulation and statistical-verification lab for repeated 2x2 competitive
//! games under mean-based no-regret learning.
//!
//! The crate is organized in layers:
//!
//! - [`games`]: payoff matrices, the competitive classification, and the
//!   closed-form completely mixed equilibrium.
//! - [`strategies`]: the mean-based strategy maps (Hedge, log-barrier,
//!   recency-biased and adaptive variants) and their descriptors.
//! - [`dynamics`]: seeded repeated-play loops under realization or
//!   telepathic feedback, with checkpointing and parallel ensembles.
//! - [`probes`]: statistical experiments (regret audits, sensitivity scans,
//!   oscillation frequency, time-average convergence, normality checks).
//! - [`pmf`]: exact probability-mass-function machinery for realization
//!   counts (Poisson-binomial, shifted/mixture binomials, ratio bounds).
//! - [`acceptance`]: the runnable acceptance suite tying all of the above to
//!   pinned tolerances.
//!
//! The math kernels in [`games`], [`strategies`], and [`pmf`] are generic
//! over the scalar type via [`Real`]; the simulation layers are `f64`.

pub mod acceptance;
pub mod dynamics;
pub mod games;
mod numeric;
pub mod pmf;
pub mod probes;
mod scalar;
pub mod strategies;

pub use scalar::Real;

/// Repo-wide float emission policy: 17 significant digits, scientific
/// notation, enough to round-trip any f64 bit pattern.
pub fn format_float17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Concrete `f64` aliases for the scalar-generic types.
pub type Game2x2 = games::Game2x2<f64>;
pub type Equilibrium = games::Equilibrium<f64>;
pub type Pmf = pmf::Pmf<f64>;

/// `f32` variants, mainly exercised by tests to keep the kernels honest
/// about genericity.
pub type Game2x2F32 = games::Game2x2<f32>;
pub type EquilibriumF32 = games::Equilibrium<f32>;
pub type PmfF32 = pmf::Pmf<f32>;
