//! Simulator for randomized (Δ+1)-list coloring in the congested clique,
//! low-memory MPC and local computation (LCA) models.

pub mod bidding;
pub mod cli;
pub mod clique;
pub mod error;
pub mod graph;
pub mod kwise;
pub mod lca;
pub mod mpc;
pub mod partition;
pub mod rng;
pub mod shattering;

pub use error::{Error, Result};
