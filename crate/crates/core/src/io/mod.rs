//! File formats: machine JSON, model JSON, tree JSON and the text syntax of
//! interventions.

mod model_file;
mod syntax;
mod tree_json;

pub use model_file::{
    model_from_json, model_to_json, model_to_string, parse_model, parse_var, value_from_json, value_to_json,
    LoadedModel,
};
pub use syntax::{
    format_atoms, format_structure_atom, format_structure_atoms, parse_assignments, parse_atoms, parse_outcome,
    parse_steps, parse_structure_atoms, parse_var_patterns, OutcomeSpec, SyntaxError, VarPattern,
};
pub use tree_json::{run_tree_to_json, tree_from_json, tree_to_json};

use std::path::Path;

use thiserror::Error;

use crate::compile::CompileError;
use crate::machines::{Machine, MachineError, MachineSpec};
use crate::tsem::{Defect, TsemError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{context}: {source}")]
    Json { context: String, source: serde_json::Error },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Tsem(#[from] TsemError),
    #[error("invalid model: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))]
    Invalid(Vec<Defect>),
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

/// Parse and validate a machine document. Unknown keys are rejected.
pub fn parse_machine(text: &str) -> Result<Machine, IoError> {
    let spec: MachineSpec = serde_json::from_str(text).map_err(|source| IoError::Json {
        context: "machine".into(),
        source,
    })?;
    Ok(Machine::new(spec)?)
}

pub fn machine_to_string(machine: &Machine) -> String {
    let mut s = serde_json::to_string_pretty(machine.spec()).expect("machine specs always serialize");
    s.push('\n');
    s
}

pub fn load_machine(path: &Path) -> Result<Machine, IoError> {
    parse_machine(&read_text(path)?).map_err(|e| match e {
        IoError::Json { source, .. } => IoError::Json {
            context: path.display().to_string(),
            source,
        },
        e => e,
    })
}

pub fn load_model(path: &Path) -> Result<LoadedModel, IoError> {
    parse_model(&read_text(path)?).map_err(|e| match e {
        IoError::Json { source, .. } => IoError::Json {
            context: path.display().to_string(),
            source,
        },
        e => e,
    })
}
