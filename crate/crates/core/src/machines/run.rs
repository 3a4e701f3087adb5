use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::config::{initial_machine_config, machine_step, MachineConfig, StepResult};
use super::spec::{Machine, Move};
use super::MachineError;
use crate::tsem::Token;

/// Three-valued acceptance under a step budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// An accepting configuration occurs at depth `step` (the smallest such).
    Accept {
        step: usize,
    },
    /// Every branch ended in a stuck configuration or a repeat of an
    /// ancestor within the budget, without acceptance.
    RejectExhausted,
    NoAcceptWithinBudget,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Accept { .. } => "ACCEPT",
            Verdict::RejectExhausted => "REJECT_EXHAUSTED",
            Verdict::NoAcceptWithinBudget => "NO_ACCEPT_WITHIN_BUDGET",
        }
    }

    pub fn accepts(&self) -> bool {
        matches!(self, Verdict::Accept { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept { step } => write!(f, "ACCEPT (step {step})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Signals that an exploration hit its node cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CapReached(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExploredNode<C, P> {
    pub config: C,
    pub depth: usize,
    pub parent: Option<usize>,
    pub label: Option<i8>,
    pub payload: Option<P>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exploration<C, P> {
    pub verdict: Verdict,
    pub nodes: Vec<ExploredNode<C, P>>,
}

/// Breadth-first acceptance search with sibling deduplication and
/// per-branch loop closure. A node is closed when its `(config, incoming
/// label)` pair already occurs on the path from the root; `succ` returning
/// no children makes a leaf. Used for both machines and calculators so
/// verdicts are computed by one rule.
pub fn explore<C, P, E, S, A>(
    root: C,
    budget: usize,
    cap: usize,
    mut succ: S,
    accepting: A,
) -> Result<Exploration<C, P>, E>
where
    C: Clone + Ord,
    P: Clone,
    E: From<CapReached>,
    S: FnMut(&C) -> Result<Vec<(C, i8, P)>, E>,
    A: Fn(&C) -> bool,
{
    let mut nodes = vec![ExploredNode {
        config: root,
        depth: 0,
        parent: None,
        label: None,
        payload: None,
    }];
    let mut frontier = vec![0usize];
    for level in 0..=budget {
        if frontier.iter().any(|&i| accepting(&nodes[i].config)) {
            return Ok(Exploration {
                verdict: Verdict::Accept { step: level },
                nodes,
            });
        }
        if frontier.is_empty() {
            return Ok(Exploration {
                verdict: Verdict::RejectExhausted,
                nodes,
            });
        }
        if level == budget {
            break;
        }
        let mut next = Vec::new();
        for &p in &frontier {
            let mut children: BTreeMap<(C, i8), P> = BTreeMap::new();
            for (c, l, payload) in succ(&nodes[p].config)? {
                children.entry((c, l)).or_insert(payload);
            }
            for ((config, label), payload) in children {
                if closes_loop(&nodes, p, &config, label) {
                    continue;
                }
                if nodes.len() >= cap {
                    return Err(CapReached(cap).into());
                }
                nodes.push(ExploredNode {
                    config,
                    depth: level + 1,
                    parent: Some(p),
                    label: Some(label),
                    payload: Some(payload),
                });
                next.push(nodes.len() - 1);
            }
        }
        frontier = next;
    }
    Ok(Exploration {
        verdict: Verdict::NoAcceptWithinBudget,
        nodes,
    })
}

fn closes_loop<C: Eq, P>(nodes: &[ExploredNode<C, P>], parent: usize, config: &C, label: i8) -> bool {
    let mut cur = Some(parent);
    while let Some(i) = cur {
        let n = &nodes[i];
        if n.label == Some(label) && &n.config == config {
            return true;
        }
        cur = n.parent;
    }
    false
}

/// The transition used on a run-tree edge: `(from, read) -> mv`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunEdge {
    pub from: Token,
    pub read: Token,
    pub mv: Move,
}

impl RunEdge {
    pub fn label(&self) -> i8 {
        self.mv.d
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunNode {
    pub config: MachineConfig,
    pub depth: usize,
    pub parent: Option<usize>,
    pub edge: Option<RunEdge>,
    pub children: Vec<usize>,
}

/// A machine run tree: breadth-first, siblings deduplicated on
/// (configuration, move), children in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunTree {
    pub nodes: Vec<RunNode>,
    pub depth: usize,
    pub truncated: bool,
}

impl RunTree {
    pub fn root(&self) -> &RunNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn level_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.depth + 1];
        for n in &self.nodes {
            counts[n.depth] += 1;
        }
        counts
    }

    pub fn labels_to(&self, node: usize) -> Vec<i8> {
        let mut out = Vec::new();
        let mut cur = node;
        while let Some(e) = &self.nodes[cur].edge {
            out.push(e.label());
            cur = self.nodes[cur].parent.expect("edges have parents");
        }
        out.reverse();
        out
    }
}

fn successors(machine: &Machine, config: &MachineConfig) -> Result<Vec<StepResult>, MachineError> {
    match machine_step(machine, config) {
        Err(MachineError::StuckConfiguration { .. }) => Ok(Vec::new()),
        other => other,
    }
}

/// Expand the run tree from `root` to exactly `depth` steps. Stuck
/// configurations are leaves. Stops with `truncated` at `cap` nodes.
pub fn expand_run_tree(
    machine: &Machine,
    root: &MachineConfig,
    depth: usize,
    cap: usize,
) -> Result<RunTree, MachineError> {
    let mut tree = RunTree {
        nodes: vec![RunNode {
            config: root.clone(),
            depth: 0,
            parent: None,
            edge: None,
            children: Vec::new(),
        }],
        depth,
        truncated: false,
    };
    let mut frontier = vec![0usize];
    for level in 1..=depth {
        let mut next = Vec::new();
        for &p in &frontier {
            let steps = successors(machine, &tree.nodes[p].config)?;
            for s in steps {
                if tree.nodes.len() >= cap {
                    tree.truncated = true;
                    return Ok(tree);
                }
                let edge = RunEdge {
                    from: tree.nodes[p].config.state.clone(),
                    read: s.read,
                    mv: s.mv,
                };
                tree.nodes.push(RunNode {
                    config: s.config,
                    depth: level,
                    parent: Some(p),
                    edge: Some(edge),
                    children: Vec::new(),
                });
                let id = tree.nodes.len() - 1;
                tree.nodes[p].children.push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    Ok(tree)
}

/// Outcome of [`run_machine`]: the verdict and the explored run tree
/// (branches cut where they repeat an ancestor, search stopped at the first
/// accepting level).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub tree: RunTree,
}

/// Run `machine` on `input` for at most `budget` steps.
pub fn run_machine(
    machine: &Machine,
    input: &[Token],
    tape_len: Option<usize>,
    budget: usize,
    cap: usize,
) -> Result<RunOutcome, MachineError> {
    let root = initial_machine_config(machine, input, tape_len)?;
    run_from(machine, root, budget, cap)
}

/// As [`run_machine`] from an arbitrary configuration.
pub fn run_from(machine: &Machine, root: MachineConfig, budget: usize, cap: usize) -> Result<RunOutcome, MachineError> {
    let ex = explore(
        root,
        budget,
        cap,
        |c: &MachineConfig| -> Result<Vec<(MachineConfig, i8, RunEdge)>, MachineError> {
            Ok(successors(machine, c)?
                .into_iter()
                .map(|s| {
                    let edge = RunEdge {
                        from: c.state.clone(),
                        read: s.read,
                        mv: s.mv,
                    };
                    (s.config, edge.label(), edge)
                })
                .collect())
        },
        |c| machine.is_final(&c.state),
    )?;
    let depth = ex.nodes.iter().map(|n| n.depth).max().unwrap_or(0);
    let mut nodes: Vec<RunNode> = ex
        .nodes
        .into_iter()
        .map(|n| RunNode {
            config: n.config,
            depth: n.depth,
            parent: n.parent,
            edge: n.payload,
            children: Vec::new(),
        })
        .collect();
    for i in 1..nodes.len() {
        let p = nodes[i].parent.expect("non-root nodes have parents");
        nodes[p].children.push(i);
    }
    Ok(RunOutcome {
        verdict: ex.verdict,
        tree: RunTree {
            nodes,
            depth,
            truncated: false,
        },
    })
}
