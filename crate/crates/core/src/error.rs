// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: expected {expected} bits, got {actual}")]
    InputWidth { expected: usize, actual: usize },

    #[error("circuit construction: {0}")]
    Construction(String),

    #[error("circuit parse error at gate {gate}: {reason}")]
    CircuitParse { gate: usize, reason: String },

    #[error("malformed circuit file: {0}")]
    CircuitFormat(String),

    #[error("formula parse error at line {line}: {reason}")]
    FormulaParse { line: usize, reason: String },

    #[error("assignment {index} out of range for {vars} variables")]
    AssignmentRange { index: u64, vars: usize },

    #[error("gamma validation: {0}")]
    Gamma(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("instance constants: {0}")]
    Constants(String),

    #[error("uniformity: total {total} is not a power of {q}")]
    NotUniform { total: String, q: u32 },

    #[error("out-degree violation at vertex {vertex}: degree {degree} (contributing copies: {contributors})")]
    OutDegree {
        vertex: usize,
        degree: usize,
        contributors: String,
    },

    #[error("size bound exceeded: {what} is {actual}, bound is {bound}")]
    Bound {
        what: &'static str,
        actual: String,
        bound: String,
    },

    #[error("MSO: {0}")]
    Mso(String),

    #[error("MSO budget exceeded: estimated cost {estimated} > budget {budget}")]
    MsoBudget { estimated: u128, budget: u128 },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
