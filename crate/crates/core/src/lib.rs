//! Relative divergence of grading functions on linearly ordered sets.
//!
//! A grading function is a strictly order-preserving real function on a
//! linearly ordered set. The relative divergence of `F` from `G` weighs the
//! log-rate `ln(ΔG/ΔF)` by the grade change `ΔF`:
//!
//! * finite sets: `D(F‖G) = Σ_k ln(Δ_k G / Δ_k F) Δ_k F` ([`divergence_discrete`]);
//! * interval images: `D(F‖G) = ∫ f ln(g/f) dx` ([`divergence_continuous`]).
//!
//! Shannon entropy, relative entropy and partition entropy are special cases
//! with a c.d.f. grading and either another c.d.f. or the position function
//! `G(w_k) = k` as reference. Capacities (monotone set functions that need
//! not be additive) get an entropy as the minimum divergence over the
//! maximal chains of the subset lattice ([`capacity_entropy`]).
//!
//! All values are in nats.

pub mod capacity;
pub mod continuous;
pub mod discrete;
pub mod error;
pub mod family;
pub mod ordered;
pub mod quadrature;

pub use capacity::{
    capacity_entropy, capacity_entropy_with_limit, chain_divergence, enumerate_chains,
    enumerate_chains_with_limit, Capacity, CapacityEntropyReport, Chains, MaximalChain, Method,
    DEFAULT_EXHAUSTIVE_LIMIT, MAX_EXHAUSTIVE_LIMIT,
};
pub use continuous::{
    classical_entropy, corrected_entropy, divergence_continuous, riemann_divergence,
    symmetric_divergence,
};
pub use discrete::{
    divergence_discrete, partition_entropy, relative_entropy, shannon_entropy, DivergenceResult,
    Flag, ProbabilityVector,
};
pub use error::{Error, Result};
pub use family::{invert_cdf, ContinuousGrading, Family};
pub use ordered::{increments, rate_h, GradingSample, IncrementPair};
pub use quadrature::{integrate, Integral, QuadratureSpec};
