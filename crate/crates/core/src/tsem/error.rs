use thiserror::Error;

use super::value::{Value, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TsemError {
    #[error("unknown variable {0}")]
    UnknownVariable(VarId),
    #[error("configuration lacks a value for {0}")]
    MissingValue(VarId),
    #[error("evaluating {target}: no value for domain variable {missing}")]
    MissingDomainValue { target: VarId, missing: VarId },
    #[error("value {value} is outside the range of {var}")]
    OutOfRangeValue { var: VarId, value: Value },
    #[error("no equation row for {var} at {row:?}")]
    MissingRow { var: VarId, row: Vec<Value> },
    #[error("step {step} is beyond the tree depth {depth}")]
    StepBeyondDepth { step: usize, depth: usize },
    #[error("node budget of {cap} exceeded")]
    BudgetExceeded { cap: usize },
}
