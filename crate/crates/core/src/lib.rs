//! Causal discovery on discrete data with stochastic complexity.
//!
//! - [`nml`]: exact multinomial NML regret and (conditional) stochastic complexity.
//! - [`ci`]: the SCI independence test plus G² and CMI baselines.
//! - [`blanket`]: parents-and-children search, the parent/child partition
//!   score and CLIMB, which returns a target's Markov blanket split into
//!   parents, children and spouses.
//! - [`graph`]: partially directed graphs, stable PC, CLIMB-based orientation
//!   of undirected edges, d-separation and evaluation metrics.
//! - [`data`]: BIF networks, forward sampling, CSV tables.
//! - [`bench`]: the experiment harness.

pub mod bench;
pub mod blanket;
pub mod ci;
pub mod data;
pub mod error;
pub mod graph;
pub mod nml;
pub mod table;

pub use error::{Error, Result};
pub use table::{CategoricalTable, Grouping};
