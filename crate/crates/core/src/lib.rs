//! Transductive multi-view zero-shot learning.
//!
//! Target instances are described in several views (low-level features and
//! semantic projections such as attributes and word vectors). The views are
//! aligned in a common space by multi-view CCA, cross-view hypergraphs are
//! built over instances and class prototypes, and labels are propagated from
//! the prototypes and/or a few labelled instances by a random walk over all
//! graphs.

pub mod annotation;
pub mod data;
pub mod error;
pub mod graphs;
pub mod harness;
pub mod linalg;
pub mod mvcca;
pub mod projection;
pub mod propagation;

pub use error::{Error, Result};
