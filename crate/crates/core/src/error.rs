use std::fmt;

use thiserror::Error;

use crate::morse_data::{ComponentId, PointId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures of the calculus. Variants are grouped by the module that raises
/// them; the CLI maps all move and driver failures to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} is not allowed for a {kind} critical point with n = {n}")]
    InvalidIndexKind {
        kind: crate::morse_data::Kind,
        index: u32,
        n: u32,
    },
    #[error("configuration assigns no value to point {0}")]
    PartialConfiguration(PointId),
    #[error("unknown critical point {0}")]
    UnknownId(PointId),
    #[error("trajectory graph has a cycle through point {0}")]
    CycleDetected(PointId),

    #[error("invalid component effect at {at}: {reason}")]
    InvalidEffect { at: PointId, reason: String },
    #[error("level {0} is a critical value")]
    CriticalLevel(String),
    #[error("malformed TSA level pattern: {0}")]
    BadLevels(String),
    #[error("cannot reorder the slice complex: effects of {lower} and {upper} do not commute")]
    SliceConflict { lower: PointId, upper: PointId },

    #[error("a flow line or broken trajectory runs from {0} up to {1}")]
    Blocked(PointId, PointId),
    #[error("edge {from} -> {to} would not be strictly increasing")]
    EdgeOrderViolation { from: PointId, to: PointId },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("configuration is not admissible: {0}")]
    Inadmissible(String),
    #[error("swap of {0} and {1} is obstructed by a flow line")]
    SwapBlocked(PointId, PointId),
    #[error("points {0} and {1} are of different types")]
    KindMismatch(PointId, PointId),
    #[error("index of {1} is not one more than the index of {0}")]
    IndexMismatch(PointId, PointId),
    #[error("{0} and {1} are not joined by a single trajectory")]
    NotSingleTrajectory(PointId, PointId),
    #[error("a broken trajectory from {0} to {1} passes through {2}")]
    BrokenTrajectoryExists(PointId, PointId, PointId),
    #[error("trajectory {0} -> {1} lies in the wrong stratum for this pair")]
    LocusViolation(PointId, PointId),
    #[error("{0} is not an interior critical point")]
    NotInterior(PointId),
    #[error("{0} has extremal index and cannot be split")]
    ExtremalIndex(PointId),
    #[error("{0} cannot be joined to the boundary inside its level set")]
    NotJoinable(PointId),
    #[error("edge {0} -> {1} is ruled out by transversality")]
    GenericityViolation(PointId, PointId),

    #[error("no interior critical point at level {level} can be joined to the boundary")]
    StuckNoJoinablePoint { level: String },
    #[error("pipeline blocked at {stage} ({step}): {reason}")]
    PipelineBlocked {
        stage: Stage,
        step: String,
        reason: Box<Error>,
    },

    #[error("generator spec is infeasible: {0}")]
    InfeasibleSpec(String),
    #[error("search exceeded the bound of {0} states")]
    BoundExceeded(usize),
    #[error("datum is invalid: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("{0}")]
    Parse(#[from] crate::io::ParseError),
    #[error("component {0} does not exist in this slice")]
    UnknownComponent(ComponentId),
}

/// Stages of the normal-form pipeline, reported in [`Error::PipelineBlocked`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Schedule,
    Tsa,
    Joinable,
    Split,
    FinalOrder,
    Decompose,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Schedule => "schedule",
            Stage::Tsa => "tsa",
            Stage::Joinable => "joinable",
            Stage::Split => "split",
            Stage::FinalOrder => "final-order",
            Stage::Decompose => "decompose",
        };
        f.write_str(s)
    }
}

impl Error {
    /// True for failures of a move or driver precondition (CLI exit code 2),
    /// false for malformed or invalid input (exit code 1).
    pub fn is_move_failure(&self) -> bool {
        !matches!(
            self,
            Error::Validation(_) | Error::Parse(_) | Error::InfeasibleSpec(_) | Error::InvalidIndexKind { .. }
        )
    }
}
