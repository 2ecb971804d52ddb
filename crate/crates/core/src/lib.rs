//! Algorithmic core of a self-supervised entity resolution pipeline.
//!
//! Everything here is pure computation over in-memory datasets: tuple
//! serialization, hashed n-gram embeddings, top-k blocking, automatic
//! positive/negative label generation, multi-relational graph construction,
//! graph and pair-classifier training with hand-written gradients, metrics
//! and cross-source anomaly detection. File formats, parallelism and the CLI
//! live in the `erpipe` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod anomaly;
pub mod blocking;
pub mod collab;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod gnn;
pub mod graph;
pub mod labels;
pub mod linalg;
pub mod optim;
pub mod synthetic;
pub mod text;

pub use error::{Error, Result};
