//! Multilayer transmission-and-distribution (T&D) network analytics.
//!
//! The crate assembles an integrated graph from a transmission layer and
//! replicated distribution feeders, then ranks vertices with cross-layer
//! closeness and betweenness centralities. Per-source work can be executed
//! in-process or through a shard-per-source worker pool whose CSV shards
//! merge back bit-for-bit into the in-process result.

pub mod centrality;
pub mod error;
pub mod graph;
pub mod model;
pub mod runner;
pub mod scenarios;
pub mod stats;

pub use centrality::{CentralityTable, Metric, WeightedSourceSet};
pub use error::{Error, Result};
pub use graph::{LayerId, LayerKind, MultilayerGraph, SsspResult, VertexId};
pub use model::{AttachmentPlan, VertexKind, VertexMeta};
