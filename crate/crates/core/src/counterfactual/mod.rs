//! Interventions, structure interventions, and but-for causes over
//! computation trees.

mod cause;
mod intervention;
mod structure;

pub use cause::{is_cause, CauseOptions, CauseQuery, CauseVerdict, CauseWitness, FailingCondition};
pub use intervention::{apply_intervention, InterventionSpec};
pub use structure::{apply_structure_intervention, dynamic_rewrites, StructureAtom, StructureInterventionSpec};

use thiserror::Error;

use crate::tsem::{TsemError, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CounterfactualError {
    #[error(transparent)]
    Tsem(#[from] TsemError),
    #[error("duplicate intervention atom on {var} at step {step}")]
    DuplicateAtom { var: VarId, step: usize },
    #[error("structure intervention row for {var} does not assign exactly its domain")]
    RowDomainMismatch { var: VarId },
    #[error("cause query needs a non-empty {0}")]
    EmptyQuery(&'static str),
    #[error("alternative search space of {size} exceeds the limit {limit}")]
    SearchTooLarge { size: u128, limit: u128 },
}
