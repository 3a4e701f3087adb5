use std::collections::{BTreeMap, BTreeSet};

use super::config::Configuration;
use super::error::TsemError;
use super::model::Model;
use super::signature::Signature;
use super::value::{Token, Value, VarId};

pub const DEFAULT_NODE_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub config: Configuration,
    pub depth: usize,
    pub parent: Option<usize>,
    pub label: Option<i8>,
    pub children: Vec<usize>,
}

/// A computation tree in breadth-first node order. Node 0 is the root;
/// children of a node are distinct and sorted by configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputationTree {
    pub nodes: Vec<TreeNode>,
    pub depth: usize,
    /// Set when expansion stopped at the node cap.
    pub truncated: bool,
    pub(crate) defaults: BTreeMap<Token, Value>,
}

impl ComputationTree {
    /// Assemble a tree from stored nodes, taking family defaults from `sig`.
    pub fn from_nodes(sig: &Signature, nodes: Vec<TreeNode>, depth: usize, truncated: bool) -> Self {
        ComputationTree {
            nodes,
            depth,
            truncated,
            defaults: sig
                .decls()
                .filter_map(|d| d.family.as_ref().map(|f| (d.name.clone(), f.default.clone())))
                .collect(),
        }
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Value of `var` at `node`, including family defaults.
    pub fn value(&self, node: usize, var: &VarId) -> Option<&Value> {
        self.nodes[node]
            .config
            .explicit(var)
            .or_else(|| var.index.and(self.defaults.get(&var.name)))
    }

    /// Node ids from the root to `node`, inclusive.
    pub fn path_to(&self, node: usize) -> Vec<usize> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Edge labels along the path from the root to `node`.
    pub fn labels_to(&self, node: usize) -> Vec<Option<i8>> {
        self.path_to(node)
            .iter()
            .skip(1)
            .map(|&i| self.nodes[i].label)
            .collect()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }

    /// Node count per depth level.
    pub fn level_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.depth + 1];
        for n in &self.nodes {
            counts[n.depth] += 1;
        }
        counts
    }

    /// Configurations at `step`, deduplicated.
    pub fn configs_at(&self, step: usize) -> BTreeSet<&Configuration> {
        self.nodes
            .iter()
            .filter(|n| n.depth == step)
            .map(|n| &n.config)
            .collect()
    }
}

pub(crate) fn defaults_of(model: &Model) -> BTreeMap<Token, Value> {
    ComputationTree::from_nodes(&model.signature, Vec::new(), 0, false).defaults
}

/// Check that every stored value of `config` is in range and every single
/// variable is assigned.
pub fn check_config(model: &Model, config: &Configuration) -> Result<(), TsemError> {
    Configuration::new(
        &model.signature,
        config.assignments().map(|(k, v)| (k.clone(), v.clone())),
    )
    .map(|_| ())
}

/// Breadth-first expansion where `step(i, parent)` yields the configurations
/// at step `i` below `parent`. Stops with `truncated` once `cap` nodes exist.
pub(crate) fn expand_with<F>(
    model: &Model,
    root: Configuration,
    depth: usize,
    cap: usize,
    mut step: F,
) -> Result<ComputationTree, TsemError>
where
    F: FnMut(usize, &Configuration) -> Result<BTreeSet<Configuration>, TsemError>,
{
    let mut tree = ComputationTree {
        nodes: vec![TreeNode {
            config: root,
            depth: 0,
            parent: None,
            label: None,
            children: Vec::new(),
        }],
        depth,
        truncated: false,
        defaults: defaults_of(model),
    };
    let mut frontier = vec![0usize];
    for level in 1..=depth {
        let mut next = Vec::new();
        for &p in &frontier {
            let succ = step(level, &tree.nodes[p].config)?;
            for child in succ {
                if tree.nodes.len() >= cap {
                    tree.truncated = true;
                    return Ok(tree);
                }
                let label = model.label(&tree.nodes[p].config, &child);
                let id = tree.nodes.len();
                tree.nodes.push(TreeNode {
                    config: child,
                    depth: level,
                    parent: Some(p),
                    label,
                    children: Vec::new(),
                });
                tree.nodes[p].children.push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    Ok(tree)
}

/// Expand the computation tree of `model` from `v0` to exactly `depth` steps.
pub fn expand_tree(
    model: &Model,
    v0: &Configuration,
    depth: usize,
    node_cap: usize,
) -> Result<ComputationTree, TsemError> {
    let tree = expand_tree_partial(model, v0, depth, node_cap)?;
    if tree.truncated {
        return Err(TsemError::BudgetExceeded { cap: node_cap });
    }
    Ok(tree)
}

/// Like [`expand_tree`] but returns the partial tree (flagged `truncated`)
/// when the node cap is hit.
pub fn expand_tree_partial(
    model: &Model,
    v0: &Configuration,
    depth: usize,
    node_cap: usize,
) -> Result<ComputationTree, TsemError> {
    check_config(model, v0)?;
    expand_with(model, v0.clone(), depth, node_cap, |_, c| model.successors(c))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TimedAtom {
    pub var: VarId,
    pub step: usize,
    pub value: Value,
}

impl TimedAtom {
    pub fn new(var: VarId, step: usize, value: Value) -> Self {
        TimedAtom { var, step, value }
    }
}

impl std::fmt::Display for TimedAtom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}@{}={}", self.var, self.step, self.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchMode {
    Some,
    All,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoldsReport {
    pub holds: bool,
    /// Root-to-leaf node paths: satisfying branches for `Some`, violating
    /// branches for `All`.
    pub witnesses: Vec<Vec<usize>>,
}

/// Branches are maximal root-to-leaf paths. An atom at step `s` holds on a
/// branch iff the branch has a node at depth `s` carrying the value; a branch
/// that ends earlier (stuck configuration) does not satisfy it.
pub fn holds_at(tree: &ComputationTree, atoms: &[TimedAtom], mode: BranchMode) -> Result<HoldsReport, TsemError> {
    for a in atoms {
        if a.step > tree.depth {
            return Err(TsemError::StepBeyondDepth {
                step: a.step,
                depth: tree.depth,
            });
        }
    }
    let mut witnesses = Vec::new();
    for leaf in tree.leaves() {
        let path = tree.path_to(leaf);
        let ok = branch_satisfies(tree, &path, atoms);
        match mode {
            BranchMode::Some if ok => witnesses.push(path),
            BranchMode::All if !ok => witnesses.push(path),
            _ => {}
        }
    }
    let holds = match mode {
        BranchMode::Some => !witnesses.is_empty(),
        BranchMode::All => witnesses.is_empty(),
    };
    Ok(HoldsReport { holds, witnesses })
}

fn branch_satisfies(tree: &ComputationTree, path: &[usize], atoms: &[TimedAtom]) -> bool {
    atoms.iter().all(|a| {
        path.get(a.step)
            .is_some_and(|&n| tree.value(n, &a.var) == Some(&a.value))
    })
}

/// Whether some branch satisfies every atom. Prunes as soon as a prefix fails.
pub fn some_branch_satisfies(tree: &ComputationTree, atoms: &[TimedAtom]) -> bool {
    let mut by_step: BTreeMap<usize, Vec<&TimedAtom>> = BTreeMap::new();
    for a in atoms {
        by_step.entry(a.step).or_default().push(a);
    }
    let last = by_step.keys().next_back().copied().unwrap_or(0);
    let mut stack = vec![0usize];
    while let Some(n) = stack.pop() {
        let node = &tree.nodes[n];
        let ok = by_step
            .get(&node.depth)
            .is_none_or(|atoms| atoms.iter().all(|a| tree.value(n, &a.var) == Some(&a.value)));
        if !ok {
            continue;
        }
        if node.depth >= last {
            return true;
        }
        stack.extend(node.children.iter().copied());
    }
    false
}
