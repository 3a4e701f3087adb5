//! Direct semantics of linear bounded automata, deterministic Turing
//! machines and nondeterministic Turing machines.

mod config;
mod run;
mod spec;

pub use config::{check_machine_config, initial_machine_config, machine_step, MachineConfig, StepResult, Tape};
pub use run::{
    expand_run_tree, explore, run_from, run_machine, CapReached, Exploration, ExploredNode, RunEdge, RunNode,
    RunOutcome, RunTree, Verdict,
};
pub use spec::{Machine, MachineKind, MachineSpec, Move, Transition};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("machine has no states")]
    NoStates,
    #[error("symbols and state names must be non-empty")]
    EmptySymbol,
    #[error("state {0} is declared twice")]
    DuplicateState(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("symbol {0} is not in the tape alphabet")]
    UnknownSymbol(String),
    #[error("reserved symbol {0} appears in the input alphabet")]
    ReservedInInput(String),
    #[error("endmarkers must differ from each other and from the blank")]
    MarkerClash,
    #[error("an LBA needs left_marker and right_marker")]
    MissingMarkers,
    #[error("endmarkers are only allowed for LBAs, not {0}")]
    UnexpectedMarkers(MachineKind),
    #[error("final state {0} has outgoing transitions")]
    TransitionFromFinal(String),
    #[error("move {mv} is not allowed for kind {kind}")]
    BadMove { mv: i8, kind: MachineKind },
    #[error("transition {0:?} overwrites an endmarker or moves past it")]
    EndmarkerViolation(Transition),
    #[error("deterministic TM has several transitions for ({state}, {symbol})")]
    NondeterministicDelta { state: String, symbol: String },
    #[error("deterministic TM has no transition for ({state}, {symbol})")]
    PartialDelta { state: String, symbol: String },
    #[error("no transition applies in state {state} reading {symbol}")]
    StuckConfiguration { state: String, symbol: String },
    #[error("malformed configuration: {0}")]
    MalformedConfig(String),
    #[error("input symbol {symbol} at position {pos} is not in the input alphabet")]
    InputNotInAlphabet { symbol: String, pos: usize },
    #[error("input of length {len} does not fit an LBA tape of length {n}")]
    InputTooLong { len: usize, n: usize },
    #[error("an LBA run needs a positive tape length")]
    TapeLengthRequired,
    #[error("node budget of {cap} exceeded")]
    BudgetExceeded { cap: usize },
}

impl From<CapReached> for MachineError {
    fn from(c: CapReached) -> Self {
        MachineError::BudgetExceeded { cap: c.0 }
    }
}
