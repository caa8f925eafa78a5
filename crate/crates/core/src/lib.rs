//! Influence maximization under the heat-conduction (HC) diffusion model.
//!
//! The HC model is non-progressive: every step, each node re-decides whether
//! it is active, choosing a neighbor-weighted average of the current states
//! plus a bias term. Seeds stay active forever. Adding a bias node turns the
//! dynamics into an absorbing Markov chain whose fundamental matrix gives the
//! steady-state spread in closed form, and the same matrix drives a greedy
//! seed selector that needs no simulation at all.
//!
//! Modules, bottom up:
//!
//! - [`graph`]: networks, the bias augmentation, seed-conditioned transition systems.
//! - [`generators`]: stochastic Kronecker and forest-fire networks, effective diameter.
//! - [`spread`]: fundamental matrices (dense and truncated series), absorption,
//!   steady states, spread.
//! - [`simulate`]: Monte Carlo and deterministic transient oracles, model reductions.
//! - [`maximize`]: closed-form greedy, simulation greedy variants, brute force,
//!   baselines, bounds.
//! - [`experiment`]: JSON-configured experiment runs with CSV output.

pub mod error;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod maximize;
pub mod simulate;
pub mod sparse;
pub mod spread;

pub use error::{Error, Result};
pub use graph::{
    augment_with_bias, build_transition_system, load_edge_list, AugmentedNetwork, Edge, Network,
    SeedSet, TransitionSystem, Weighting,
};
pub use spread::Backend;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/spread.md")]
    mod spread {}
    #[doc = include_str!("../../../book/src/greedy.md")]
    mod greedy {}
    #[doc = include_str!("../../../book/src/neumann.md")]
    mod neumann {}
    #[doc = include_str!("../../../book/src/unification.md")]
    mod unification {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
