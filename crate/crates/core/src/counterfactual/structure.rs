use std::collections::{BTreeMap, BTreeSet};

use super::CounterfactualError;
use crate::tsem::{
    check_config, expand_with, ComputationTree, Configuration, Model, RowOverrides, TsemError, Value, VarId,
};

/// `do(Y^n(D = row) <- value)`: from step `n` on, the equation of `var`
/// returns `value` on `row`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureAtom {
    pub var: VarId,
    pub step: usize,
    pub row: BTreeMap<VarId, Value>,
    pub value: Value,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructureInterventionSpec {
    atoms: Vec<StructureAtom>,
}

impl StructureInterventionSpec {
    pub fn new(atoms: Vec<StructureAtom>) -> Result<Self, CounterfactualError> {
        let mut seen = BTreeSet::new();
        for a in &atoms {
            if !seen.insert((a.var.clone(), a.step, a.row.clone())) {
                return Err(CounterfactualError::DuplicateAtom {
                    var: a.var.clone(),
                    step: a.step,
                });
            }
        }
        Ok(StructureInterventionSpec { atoms })
    }

    pub fn atoms(&self) -> &[StructureAtom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

fn resolve(model: &Model, atom: &StructureAtom) -> Result<Vec<Value>, CounterfactualError> {
    let sig = &model.signature;
    let target_range = sig
        .range(&atom.var)
        .ok_or_else(|| TsemError::UnknownVariable(atom.var.clone()))?;
    if !target_range.contains(&atom.value) {
        return Err(TsemError::OutOfRangeValue {
            var: atom.var.clone(),
            value: atom.value.clone(),
        }
        .into());
    }
    let domain = model.domain(&atom.var)?;
    let keys: BTreeSet<&VarId> = atom.row.keys().collect();
    if keys != domain.iter().collect::<BTreeSet<_>>() {
        return Err(CounterfactualError::RowDomainMismatch { var: atom.var.clone() });
    }
    domain
        .iter()
        .map(|d| {
            let v = &atom.row[d];
            match sig.range(d) {
                Some(r) if r.contains(v) => Ok(v.clone()),
                _ => Err(TsemError::OutOfRangeValue {
                    var: d.clone(),
                    value: v.clone(),
                }
                .into()),
            }
        })
        .collect()
}

/// The row rewrites in force in the dynamic equations of step `step`: every
/// atom with step <= `step`, later steps overriding earlier ones.
pub fn dynamic_rewrites(
    model: &Model,
    spec: &StructureInterventionSpec,
    step: usize,
) -> Result<RowOverrides, CounterfactualError> {
    let mut atoms: Vec<&StructureAtom> = spec.atoms.iter().filter(|a| a.step <= step).collect();
    atoms.sort_by_key(|a| a.step);
    let mut out: RowOverrides = BTreeMap::new();
    for a in atoms {
        let row = resolve(model, a)?;
        out.entry(a.var.clone())
            .or_default()
            .insert(row, [a.value.clone()].into_iter().collect());
    }
    Ok(out)
}

/// Tree under dynamic equations: step `i > 0` is computed from step `i-1`
/// with the equations in force at `i-1`. The root is `v0` unchanged.
pub fn apply_structure_intervention(
    model: &Model,
    v0: &Configuration,
    spec: &StructureInterventionSpec,
    depth: usize,
    node_cap: usize,
) -> Result<ComputationTree, CounterfactualError> {
    check_config(model, v0)?;
    for a in &spec.atoms {
        resolve(model, a)?;
    }
    let per_step: Vec<RowOverrides> = (0..depth)
        .map(|i| dynamic_rewrites(model, spec, i))
        .collect::<Result<_, _>>()?;
    let tree = expand_with(model, v0.clone(), depth, node_cap, |step, parent| {
        model.successors_with(parent, &BTreeMap::new(), Some(&per_step[step - 1]))
    })?;
    if tree.truncated {
        return Err(TsemError::BudgetExceeded { cap: node_cap }.into());
    }
    Ok(tree)
}
