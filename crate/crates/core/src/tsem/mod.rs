//! Temporal structural equation models with nondeterministic equations:
//! signatures, equations, configurations, the one-step successor relation,
//! and bounded computation trees.

mod config;
mod error;
mod model;
mod signature;
mod tree;
mod value;

pub use config::Configuration;
pub use error::TsemError;
pub use model::{
    validate_model, Defect, EdgeLabeler, Equation, Model, RowOverrides, Rule, Table, TableModelBuilder,
    ValidationReport,
};
pub use signature::{FamilyDecl, IndexRange, Signature, VarDecl};
pub(crate) use tree::expand_with;
pub use tree::{
    check_config, expand_tree, expand_tree_partial, holds_at, some_branch_satisfies, BranchMode, ComputationTree,
    HoldsReport, TimedAtom, TreeNode, DEFAULT_NODE_CAP,
};
pub use value::{tok, Range, Token, Value, VarId};
