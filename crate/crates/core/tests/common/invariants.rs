//! Invariant checks shared by the property suites and the acceptance
//! harness. Each returns the first violation as a message.

use std::collections::BTreeSet;

use causal_calc::compile::{decode_config, reference_equation, CalcKind, CalculatorModel, DecodeContext};
use causal_calc::io::{model_to_string, parse_model, tree_from_json, tree_to_json};
use causal_calc::machines::Tape;
use causal_calc::tsem::{expand_tree, ComputationTree, Configuration, Model, Value};

use super::PlainTsem;

pub type Check = Result<(), String>;

fn labels(tree: &ComputationTree, node: usize) -> DecodeContext {
    DecodeContext::new(tree.labels_to(node).into_iter().flatten().collect())
}

/// Every edge respects the equations: each active variable of the parent
/// takes, in the child, a value its equation allows on the parent.
pub fn soundness(model: &Model, tree: &ComputationTree) -> Check {
    for node in &tree.nodes {
        for &c in &node.children {
            let child = &tree.nodes[c].config;
            for x in model.active_variables(&node.config) {
                let allowed = model.eval_equation(&x, &node.config).map_err(|e| e.to_string())?;
                let v = child
                    .value(&model.signature, &x)
                    .ok_or(format!("{x} missing in {child}"))?;
                if !allowed.contains(v) {
                    return Err(format!("{} -> {child}: {x}={v} not in {allowed:?}", node.config));
                }
            }
        }
    }
    Ok(())
}

/// `successors` equals brute-force filtering over every configuration.
pub fn completeness(t: &PlainTsem) -> Check {
    let model = t.to_model();
    for c in t.all_configs() {
        let got: BTreeSet<Vec<String>> = model
            .successors(&t.to_config(&model, &c))
            .map_err(|e| e.to_string())?
            .iter()
            .map(|s| t.read_config(&model, s))
            .collect();
        let want = t.successors(&c, &Default::default());
        if got != want {
            return Err(format!("successors of {c:?}: got {got:?}, want {want:?}"));
        }
    }
    Ok(())
}

/// Singleton outputs everywhere give exactly one successor everywhere.
pub fn determinism(t: &PlainTsem) -> Check {
    if t.tables.iter().any(|tab| tab.values().any(|o| o.len() != 1)) {
        return Ok(());
    }
    let model = t.to_model();
    for c in t.all_configs() {
        let n = model
            .successors(&t.to_config(&model, &c))
            .map_err(|e| e.to_string())?
            .len();
        if n != 1 {
            return Err(format!("{c:?} has {n} successors"));
        }
    }
    Ok(())
}

/// Expanding twice gives byte-identical JSON, and the JSON reads back to
/// the same tree.
pub fn canonical_tree(model: &Model, v0: &Configuration, depth: usize) -> Check {
    let a = expand_tree(model, v0, depth, 1_000_000).map_err(|e| e.to_string())?;
    let b = expand_tree(model, v0, depth, 1_000_000).map_err(|e| e.to_string())?;
    let (ja, jb) = (tree_to_json(&a).to_string(), tree_to_json(&b).to_string());
    if ja != jb {
        return Err("two expansions serialise differently".into());
    }
    let back = tree_from_json(&model.signature, &tree_to_json(&a)).map_err(|e| e.to_string())?;
    if back != a || tree_to_json(&back) != tree_to_json(&a) {
        return Err("tree JSON does not round-trip".into());
    }
    Ok(())
}

/// Model JSON reads back to a model that writes the same bytes and has the
/// same successors on `probe`.
pub fn model_round_trip(model: &Model, probe: &[Configuration]) -> Check {
    let text = model_to_string(model);
    let back = parse_model(&text).map_err(|e| e.to_string())?.model;
    if model_to_string(&back) != text {
        return Err("model JSON does not round-trip".into());
    }
    for c in probe {
        if model.successors(c).ok() != back.successors(c).ok() {
            return Err(format!("reloaded model differs on {c}"));
        }
    }
    Ok(())
}

/// Every stored member of the cell family sits within one index of the
/// parent's support (which always counts index 0).
pub fn window_growth(tree: &ComputationTree) -> Check {
    let cell = CalculatorModel::cell_var(0).name;
    for node in &tree.nodes {
        let idx: Vec<i64> = node.config.support_indices(&cell).chain([0]).collect();
        let (lo, hi) = (idx.iter().min().unwrap() - 1, idx.iter().max().unwrap() + 1);
        for &c in &node.children {
            if let Some(i) = tree.nodes[c].config.support_indices(&cell).find(|i| *i < lo || *i > hi) {
                return Err(format!(
                    "{} -> {}: index {i} outside [{lo}, {hi}]",
                    node.config, tree.nodes[c].config
                ));
            }
        }
    }
    Ok(())
}

/// Compiled equations agree with the case-by-case reference on every
/// active variable of every node.
pub fn fidelity(calc: &CalculatorModel, tree: &ComputationTree) -> Check {
    for node in &tree.nodes {
        for x in calc.model.active_variables(&node.config) {
            let got = calc.model.eval_equation(&x, &node.config).map_err(|e| e.to_string())?;
            let want = reference_equation(calc, &x, &node.config).map_err(|e| e.to_string())?;
            if got != want {
                return Err(format!("{x} on {}: {got:?} vs reference {want:?}", node.config));
            }
        }
    }
    Ok(())
}

/// A final-state configuration has exactly one successor. For the TM and
/// monolithic kinds, and for tape kinds whose last move was 0, that
/// successor is the configuration itself; otherwise it is a fixpoint one
/// step later.
pub fn final_freezing(calc: &CalculatorModel, tree: &ComputationTree) -> Check {
    for node in tree.nodes.iter().filter(|n| calc.is_accepting(&n.config)) {
        let c = &node.config;
        let succ = calc.model.successors(c).map_err(|e| e.to_string())?;
        let [s] = succ.iter().collect::<Vec<_>>()[..] else {
            return Err(format!("final {c} has {} successors", succ.len()));
        };
        let still = match calc.kind {
            CalcKind::Tm | CalcKind::Monolithic => true,
            CalcKind::Lba | CalcKind::Ntm => c
                .explicit(&CalculatorModel::cell_var(0))
                .and_then(|v| v.component(2))
                .is_some_and(|d| &**d == "0"),
        };
        if still && s != c {
            return Err(format!("final {c} moves to {s}"));
        }
        let again = calc.model.successors(s).map_err(|e| e.to_string())?;
        if again.len() != 1 || !again.contains(s) {
            return Err(format!("final {s} is not a fixpoint"));
        }
    }
    Ok(())
}

/// Tape kinds: exactly one tuple value, held by `X_0`, and the decoded
/// configuration is well formed (endmarkers in place for bounded tapes).
pub fn one_head(calc: &CalculatorModel, tree: &ComputationTree) -> Check {
    if !matches!(calc.kind, CalcKind::Lba | CalcKind::Ntm) {
        return Ok(());
    }
    let x0 = CalculatorModel::cell_var(0);
    for (id, node) in tree.nodes.iter().enumerate() {
        let heads: Vec<_> = node
            .config
            .assignments()
            .filter(|(_, v)| matches!(v, Value::Tuple(_)))
            .map(|(k, _)| k.clone())
            .collect();
        if heads != [x0.clone()] {
            return Err(format!("{}: tuple values on {heads:?}", node.config));
        }
        let mc = decode_config(calc, &node.config, &labels(tree, id)).map_err(|e| e.to_string())?;
        if let (Tape::Bounded { cells, .. }, Some((l, r))) = (&mc.tape, calc.machine.markers()) {
            if cells.first() != Some(l) || cells.last() != Some(r) || cells.len() != calc.n.unwrap() + 2 {
                return Err(format!("decoded {mc} lost its endmarkers"));
            }
            if cells[1..cells.len() - 1].iter().any(|s| s == l || s == r) {
                return Err(format!("decoded {mc} has an endmarker inside"));
            }
        }
    }
    Ok(())
}

/// All compile-side checks on one tree.
pub fn compiled(calc: &CalculatorModel, tree: &ComputationTree) -> Check {
    soundness(&calc.model, tree)?;
    fidelity(calc, tree)?;
    final_freezing(calc, tree)?;
    one_head(calc, tree)?;
    if matches!(calc.kind, CalcKind::Tm | CalcKind::Ntm) {
        window_growth(tree)?;
    }
    Ok(())
}
