//! Noisy graph-state simulation and spatially resolved entanglement-witness
//! estimation on bipartite 2D lattices.
//!
//! The pipeline: build a lattice ([`lattice`]), attach spatial noise fields
//! ([`noise`]), then evaluate region witnesses three independent ways —
//! exact Heisenberg-picture analytics ([`analytic`]), Monte Carlo
//! measurement sampling plus shot post-processing ([`sampler`],
//! [`estimator`]), and a dense density-matrix reference for small patches
//! ([`oracle`]). Witness maps render to PPM heatmaps ([`render`]) and
//! threshold scans to CSV ([`scan`]).

pub mod analytic;
pub mod config;
pub mod error;
pub mod estimator;
pub mod graphstate;
pub mod lattice;
pub mod noise;
pub mod oracle;
pub mod pauli;
pub mod render;
pub mod sampler;
pub mod scan;
pub mod shotfile;

pub use error::{Error, Result};
