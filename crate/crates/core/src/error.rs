use thiserror::Error;

use crate::netlist::{BlockId, Violation};

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("invalid block identifier {0:?}")]
    BadIdentifier(String),
    #[error("duplicate block id {0}")]
    DuplicateBlock(BlockId),
    #[error("duplicate program {0}")]
    DuplicateProgram(String),
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("bad or missing parameter in {0:?}")]
    BadParameter(String),
    #[error("programmable interface needs i >= 1 and o >= 1, got {i}/{o}")]
    BadIface { i: usize, o: usize },
    #[error("design contains a cycle")]
    Cyclic,
    #[error("invalid design: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Parse failure with a 1-based source location.
#[derive(Debug, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum BehaviorError {
    #[error("{tag} expects {expected} inputs, got {got}")]
    Arity {
        tag: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0} is sequential and cannot be evaluated combinationally")]
    NotCombinational(&'static str),
    #[error("{0} is combinational and has no sequential state")]
    NotSequential(&'static str),
    #[error("sequential state used before initialization")]
    Uninitialized,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("stimulus refers to {0}, which is not a sensor of the design")]
    NotASensor(String),
    #[error("expectation refers to unknown port {0}")]
    UnknownPort(String),
    #[error("horizon {horizon} is before the last event at {last}")]
    HorizonBeforeEvent { horizon: u64, last: u64 },
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("{0} is not an inner block of the design")]
    NotInner(BlockId),
    #[error("{0} is not a border block of the partition")]
    NotBorder(BlockId),
    #[error("empty partition")]
    Empty,
}

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("partition {{{0}}} is not convex: a path leaves and re-enters it, so merged evaluation would read stale values")]
    NonConvex(String),
    #[error("partition {{{members}}} needs {indegree} inputs and {outdegree} outputs, interface offers {i}/{o}")]
    DoesNotFit {
        members: String,
        indegree: usize,
        outdegree: usize,
        i: usize,
        o: usize,
    },
    #[error("{0} is already programmable; nested programs are not merged")]
    NestedProgram(BlockId),
    #[error("partition must have at least two members")]
    TooSmall,
    #[error("{programs} programs supplied for {partitions} partitions")]
    Mismatch { programs: usize, partitions: usize },
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("n_inner must be at least 1")]
    NoInner,
    #[error("kind weights must be non-negative and not all zero")]
    BadWeights,
    #[error("at least one sensor is required to drive the first inner block")]
    NoSensors,
}
