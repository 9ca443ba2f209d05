//! Universal-array tag set design and pooled primer multiplexing.
//!
//! * [`seq`]: DNA strings, 2-4 rule weights, complements, counting functions.
//! * [`tokens`]: c-token extraction and classification, upper bounds.
//! * [`tagset`]: greedy generation and verification of feasible tag sets.
//! * [`hybrid`]: primer/tag hybridization graph and the assignability test.
//! * [`multiplex`]: iterative primer deletion and multi-array scheduling.
//! * [`io`], [`experiment`]: file formats and the seeded experiment harness.

pub mod error;
pub mod experiment;
pub mod hybrid;
pub mod io;
pub mod multiplex;
pub mod seq;
pub mod tagset;
pub mod tokens;

pub use error::{Error, Result};
pub use seq::{Base, DnaSeq};
