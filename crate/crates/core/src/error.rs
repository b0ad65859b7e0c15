use thiserror::Error;

use crate::net::{NodeId, NodeSet};

/// A single structural problem found while validating a network description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetworkViolation {
    SelfLoop(NodeId),
    DuplicateEdge(NodeId, NodeId),
    BadGainVariant(NodeId, NodeId),
    SourceEqualsDestination,
    NodeOutOfRange(NodeId),
    /// Shift level outside `0..=k`.
    BadShiftLevel(NodeId, NodeId),
    /// Field matrix with the wrong shape or an unreduced entry.
    BadFieldMatrix(NodeId, NodeId),
    /// Non-finite real or complex gain.
    NonFiniteGain(NodeId, NodeId),
    /// Field characteristic is not a prime.
    NotPrime(u64),
    TooManyNodes(usize),
}

impl std::fmt::Display for NetworkViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::SelfLoop(v) => write!(f, "self-loop at node {v}"),
            Self::DuplicateEdge(u, v) => write!(f, "duplicate edge {u}->{v}"),
            Self::BadGainVariant(u, v) => write!(f, "gain on {u}->{v} does not match the channel model"),
            Self::SourceEqualsDestination => write!(f, "source equals destination"),
            Self::NodeOutOfRange(v) => write!(f, "node {v} out of range"),
            Self::BadShiftLevel(u, v) => write!(f, "shift level on {u}->{v} outside 0..=k"),
            Self::BadFieldMatrix(u, v) => write!(f, "field matrix on {u}->{v} has wrong shape or unreduced entries"),
            Self::NonFiniteGain(u, v) => write!(f, "non-finite gain on {u}->{v}"),
            Self::NotPrime(p) => write!(f, "field size {p} is not prime"),
            Self::TooManyNodes(n) => write!(f, "{n} nodes exceeds the 64-node limit"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidNetwork(Vec<NetworkViolation>),

    #[error("bad layer widths: {0}")]
    BadWidths(String),

    #[error("bad network size: {0}")]
    BadSize(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("channel model mismatch: expected {expected}")]
    ModelMismatch { expected: &'static str },

    #[error("cut {cut:?}: component {component:?} is not contained in any group")]
    ComponentNotCovered { cut: NodeSet, component: NodeSet },

    #[error("ground set of {size} relays exceeds the cap of {cap}")]
    GroundSetTooLarge { size: usize, cap: usize },

    #[error("min-norm-point did not converge after {iterations} major cycles (gap {best_gap:e})")]
    ConvergenceFailure { iterations: usize, best_gap: f64 },

    #[error("local distributions disagree on an overlap by {max_discrepancy:e}")]
    InconsistentMarginals { max_discrepancy: f64 },

    #[error("internal verification failed: {0}")]
    InternalVerificationFailure(String),

    #[error("network with {nodes} nodes exceeds the dense-schedule cap of {cap}")]
    NetworkTooLarge { nodes: usize, cap: usize },

    #[error("problem is infeasible")]
    Infeasible,

    #[error("grouping is not valid for this network: {0}")]
    GroupingInvalid(String),

    #[error("LP solver hit numerical trouble: {0}")]
    NumericalInstability(String),

    #[error("LP is unbounded")]
    Unbounded,

    #[error("network is not layered")]
    NotLayered,

    #[error("relay layer {layer} has width {width}; at least 2 required")]
    LayerTooThin { layer: usize, width: usize },

    #[error("full-duplex cut-set bound is zero")]
    ZeroFullDuplex,
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
