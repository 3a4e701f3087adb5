use std::collections::{BTreeMap, BTreeSet};

use super::CounterfactualError;
use crate::tsem::{
    check_config, expand_with, ComputationTree, Configuration, Model, TimedAtom, TsemError, Value, VarId,
};

/// A vector of atomic interventions `do(Y^n <- y)`; at most one atom per
/// (variable, step).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InterventionSpec {
    atoms: Vec<TimedAtom>,
}

impl InterventionSpec {
    pub fn new(atoms: Vec<TimedAtom>) -> Result<Self, CounterfactualError> {
        let mut seen = BTreeSet::new();
        for a in &atoms {
            if !seen.insert((a.var.clone(), a.step)) {
                return Err(CounterfactualError::DuplicateAtom {
                    var: a.var.clone(),
                    step: a.step,
                });
            }
        }
        Ok(InterventionSpec { atoms })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn atoms(&self) -> &[TimedAtom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn max_step(&self) -> Option<usize> {
        self.atoms.iter().map(|a| a.step).max()
    }

    fn by_step(&self) -> BTreeMap<usize, BTreeMap<VarId, Value>> {
        let mut out: BTreeMap<usize, BTreeMap<VarId, Value>> = BTreeMap::new();
        for a in &self.atoms {
            out.entry(a.step).or_default().insert(a.var.clone(), a.value.clone());
        }
        out
    }
}

pub(crate) fn check_atoms(model: &Model, atoms: &[TimedAtom], depth: usize) -> Result<(), TsemError> {
    for a in atoms {
        let range = model
            .signature
            .range(&a.var)
            .ok_or_else(|| TsemError::UnknownVariable(a.var.clone()))?;
        if !range.contains(&a.value) {
            return Err(TsemError::OutOfRangeValue {
                var: a.var.clone(),
                value: a.value.clone(),
            });
        }
        if a.step > depth {
            return Err(TsemError::StepBeyondDepth { step: a.step, depth });
        }
    }
    Ok(())
}

/// The updated computation tree: the root is `v0` overridden by the step-0
/// atoms; at every later step the intervened variables take their pinned
/// value on every branch and all others follow their equations applied to
/// the parent configuration.
pub fn apply_intervention(
    model: &Model,
    v0: &Configuration,
    spec: &InterventionSpec,
    depth: usize,
    node_cap: usize,
) -> Result<ComputationTree, CounterfactualError> {
    check_config(model, v0)?;
    check_atoms(model, spec.atoms(), depth)?;
    let pins = spec.by_step();
    let root = match pins.get(&0) {
        None => v0.clone(),
        Some(p) => Configuration::new(
            &model.signature,
            v0.assignments()
                .map(|(k, v)| (k.clone(), v.clone()))
                .chain(p.iter().map(|(k, v)| (k.clone(), v.clone()))),
        )?,
    };
    let none = BTreeMap::new();
    let tree = expand_with(model, root, depth, node_cap, |step, parent| {
        model.successors_with(parent, pins.get(&step).unwrap_or(&none), None)
    })?;
    if tree.truncated {
        return Err(TsemError::BudgetExceeded { cap: node_cap }.into());
    }
    Ok(tree)
}
