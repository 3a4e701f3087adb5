//! Fault-injection sweep: flip one (or two) timed atoms at a time and see
//! whether an outcome survives.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::compile::CalculatorModel;
use crate::counterfactual::{apply_intervention, CounterfactualError, InterventionSpec};
use crate::io::{OutcomeSpec, VarPattern};
use crate::tsem::{
    expand_tree, some_branch_satisfies, ComputationTree, Configuration, IndexRange, Model, TimedAtom, TsemError, Value,
    VarId,
};

/// Largest number of alternative values tried for one variable.
pub const MAX_ALTERNATIVES: u128 = 1 << 16;
/// Largest number of rows a sweep may generate.
pub const MAX_ROWS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SweepError {
    #[error("pattern {0} matches no variable")]
    NoMatch(String),
    #[error("pattern {0} needs an index range: its family is unbounded")]
    UnboundedPattern(String),
    #[error("--k-faults must be 1 or 2, got {0}")]
    KFaults(usize),
    #[error("the accept@T outcome needs a compiled calculator model")]
    AcceptNeedsCalculator,
    #[error("{var} has {size} alternative values, more than the sweep limit")]
    RangeTooLarge { var: VarId, size: u128 },
    #[error("sweep would generate more than {MAX_ROWS} rows")]
    TooManyRows,
    #[error(transparent)]
    Counterfactual(#[from] CounterfactualError),
}

impl From<TsemError> for SweepError {
    fn from(e: TsemError) -> Self {
        SweepError::Counterfactual(e.into())
    }
}

impl SweepError {
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            SweepError::Counterfactual(CounterfactualError::Tsem(TsemError::BudgetExceeded { .. }))
        )
    }
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub steps: RangeInclusive<usize>,
    pub patterns: Vec<VarPattern>,
    pub outcome: OutcomeSpec,
    pub k_faults: usize,
    pub node_cap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub faults: Vec<TimedAtom>,
    pub original: bool,
    pub intervened: bool,
}

impl SweepRow {
    /// A row is critical iff the intervention changes the outcome verdict.
    pub fn critical(&self) -> bool {
        self.original != self.intervened
    }
}

/// Per timed variable: critical iff some alternative value is critical.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellSummary {
    pub var: String,
    pub step: usize,
    pub critical: bool,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepReport {
    pub outcome: String,
    pub original: bool,
    pub k_faults: usize,
    pub rows: Vec<SweepRow>,
    pub cells: Vec<CellSummary>,
    /// Set when the node budget stopped the sweep; `rows` holds the prefix
    /// evaluated before the first failing row.
    pub truncated: bool,
}

impl SweepReport {
    pub fn critical(&self) -> usize {
        self.rows.iter().filter(|r| r.critical()).count()
    }

    pub fn inert(&self) -> usize {
        self.rows.len() - self.critical()
    }

    pub fn cell(&self, var: &VarId, step: usize) -> Option<&CellSummary> {
        let name = var.to_string();
        self.cells.iter().find(|c| c.var == name && c.step == step)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "outcome": self.outcome,
            "original": self.original,
            "k_faults": self.k_faults,
            "truncated": self.truncated,
            "summary": {"rows": self.rows.len(), "critical": self.critical(), "inert": self.inert()},
            "rows": self.rows.iter().map(|r| json!({
                "faults": r.faults.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "original": r.original,
                "intervened": r.intervened,
                "classification": if r.critical() { "critical" } else { "inert" },
            })).collect::<Vec<_>>(),
            "cells": self.cells,
        })
    }
}

/// Whether `outcome` holds on some branch of `tree`.
pub fn outcome_holds(
    outcome: &OutcomeSpec,
    calc: Option<&CalculatorModel>,
    tree: &ComputationTree,
) -> Result<bool, SweepError> {
    match outcome {
        OutcomeSpec::Atoms(atoms) => Ok(some_branch_satisfies(tree, atoms)),
        OutcomeSpec::Accept { step } => {
            let calc = calc.ok_or(SweepError::AcceptNeedsCalculator)?;
            Ok(tree
                .nodes
                .iter()
                .any(|n| n.depth == *step && calc.is_accepting(&n.config)))
        }
    }
}

fn matched_vars(model: &Model, patterns: &[VarPattern]) -> Result<Vec<VarId>, SweepError> {
    let mut out = BTreeSet::new();
    for p in patterns {
        let decl = model
            .signature
            .decl(&p.name)
            .ok_or_else(|| SweepError::NoMatch(p.to_string()))?;
        let before = out.len();
        match (&decl.family, p.indices) {
            (None, None) => {
                out.insert(VarId::single(&p.name));
            }
            (None, Some(_)) => {}
            (Some(f), idx) => {
                let (lo, hi) = match (f.indices, idx) {
                    (_, Some((lo, hi))) => (lo, hi),
                    (IndexRange::Bounded { lo, hi }, None) => (lo, hi),
                    (IndexRange::Unbounded, None) => return Err(SweepError::UnboundedPattern(p.to_string())),
                };
                out.extend(
                    (lo..=hi)
                        .map(|i| VarId::member(&p.name, i))
                        .filter(|v| model.signature.contains(v)),
                );
            }
        }
        if out.len() == before && !out.iter().any(|v| p.matches(v)) {
            return Err(SweepError::NoMatch(p.to_string()));
        }
    }
    Ok(out.into_iter().collect())
}

/// Values of `var` at `step` that differ from what the actual tree holds on
/// at least one branch.
fn alternatives(model: &Model, actual: &ComputationTree, var: &VarId, step: usize) -> Result<Vec<Value>, SweepError> {
    let range = model
        .signature
        .range(var)
        .ok_or_else(|| TsemError::UnknownVariable(var.clone()))?;
    if range.size() > MAX_ALTERNATIVES {
        return Err(SweepError::RangeTooLarge {
            var: var.clone(),
            size: range.size(),
        });
    }
    let held: Vec<&Value> = (0..actual.len())
        .filter(|&n| actual.nodes[n].depth == step)
        .filter_map(|n| actual.value(n, var))
        .collect();
    Ok(range
        .iter()
        .filter(|v| held.is_empty() || held.iter().any(|h| *h != v))
        .collect())
}

/// Run the sweep. Rows are ordered by variable, step and value (pairs in the
/// order of their first fault); evaluation is parallel.
pub fn sweep(
    model: &Model,
    calc: Option<&CalculatorModel>,
    v0: &Configuration,
    opts: &SweepOptions,
) -> Result<SweepReport, SweepError> {
    if !(1..=2).contains(&opts.k_faults) {
        return Err(SweepError::KFaults(opts.k_faults));
    }
    if matches!(opts.outcome, OutcomeSpec::Accept { .. }) && calc.is_none() {
        return Err(SweepError::AcceptNeedsCalculator);
    }
    let vars = matched_vars(model, &opts.patterns)?;
    let depth = opts.outcome.step().max(*opts.steps.end());
    let actual = expand_tree(model, v0, depth, opts.node_cap)?;
    let original = outcome_holds(&opts.outcome, calc, &actual)?;

    let mut singles = Vec::new();
    for var in &vars {
        for step in opts.steps.clone() {
            for v in alternatives(model, &actual, var, step)? {
                singles.push(TimedAtom::new(var.clone(), step, v));
            }
        }
    }
    let faults: Vec<Vec<TimedAtom>> = if opts.k_faults == 1 {
        singles.iter().map(|a| vec![a.clone()]).collect()
    } else {
        let n = singles.len();
        if n.saturating_mul(n) / 2 > MAX_ROWS {
            return Err(SweepError::TooManyRows);
        }
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&singles[i], &singles[j]);
                if (&a.var, a.step) != (&b.var, b.step) {
                    out.push(vec![a.clone(), b.clone()]);
                }
            }
        }
        out
    };
    if faults.len() > MAX_ROWS {
        return Err(SweepError::TooManyRows);
    }

    let results: Vec<Result<SweepRow, SweepError>> = faults
        .into_par_iter()
        .map(|f| {
            let spec = InterventionSpec::new(f.clone())?;
            let tree = apply_intervention(model, v0, &spec, depth, opts.node_cap)?;
            Ok(SweepRow {
                intervened: outcome_holds(&opts.outcome, calc, &tree)?,
                faults: f,
                original,
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut truncated = false;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) if e.is_budget() => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let mut cells: Vec<CellSummary> = Vec::new();
    if opts.k_faults == 1 {
        for r in &rows {
            let a = &r.faults[0];
            let name = a.var.to_string();
            match cells.last_mut() {
                Some(c) if c.var == name && c.step == a.step => {
                    c.critical |= r.critical();
                    c.rows += 1;
                }
                _ => cells.push(CellSummary {
                    var: name,
                    step: a.step,
                    critical: r.critical(),
                    rows: 1,
                }),
            }
        }
    }
    Ok(SweepReport {
        outcome: opts.outcome.to_string(),
        original,
        k_faults: opts.k_faults,
        rows,
        cells,
        truncated,
    })
}
