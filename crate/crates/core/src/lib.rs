//! Hybrid classical-quantum rainbow table toolkit.
//!
//! The pipeline has three classical stages and one quantum stage:
//!
//! 1. [`dictgen`] defines a *smart dictionary* (generator word lists, a
//!    composition pattern, transform rules) and realizes the bijection from
//!    chain indices to candidate plaintexts.
//! 2. [`rainbow`] builds hash/reduce chains over that index space, persists
//!    the endpoint table, and drives lookups.
//! 3. [`buckets`] groups the k-bit endpoint hashes into fixed-size buckets so
//!    each lookup probe becomes a size-k membership search.
//! 4. [`grover`] + [`qsim`] answer those membership probes with the
//!    Distributed Exact Grover Algorithm (DEGA) simulated on a dense state
//!    vector, or with density matrices when depolarizing noise is modelled.
//!
//! The [`cli`] module wires the stages into the `qrainbow` binary.

pub mod buckets;
pub mod cli;
pub mod dictgen;
pub mod grover;
pub mod qsim;
pub mod rainbow;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Dictionary definition or dictionary file problems.
    #[error("dictionary: {0}")]
    Dict(String),
    /// An index, variant, or offset fell outside its valid range.
    #[error("range: {what} = {value} out of range (limit {limit})")]
    Range {
        what: &'static str,
        value: u64,
        limit: u64,
    },
    /// Invalid or inconsistent configuration parameters.
    #[error("config: {0}")]
    Config(String),
    /// Dimension or target mismatch in the quantum simulator.
    #[error("shape: {0}")]
    Shape(String),
    /// Malformed table or bucket file.
    #[error("table: {0}")]
    Table(String),
    /// Loaded artifacts disagree with each other or with the dictionary.
    #[error("mismatch: {0}")]
    Mismatch(String),
    /// The quantum engine failed on a malformed search space. Distinct from
    /// a not-found outcome.
    #[error("engine: {0}")]
    Engine(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
