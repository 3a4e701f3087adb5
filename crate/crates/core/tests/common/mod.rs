//! Shared fixtures and brute-force oracles for the integration suites and
//! the acceptance harness. Nothing here calls the tree, intervention or
//! cause code of the library; the oracles work on plain tables.

#![allow(dead_code)]

pub mod invariants;
pub mod scenarios;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use causal_calc::compile::{reference_successors, CalculatorModel};
use causal_calc::counterfactual::{CauseVerdict, CauseWitness, FailingCondition};
use causal_calc::io::{load_machine, load_model, LoadedModel};
use causal_calc::machines::{machine_step, Machine, MachineConfig, MachineKind, MachineSpec, Tape, Transition};
use causal_calc::tsem::{Configuration, Model, Range, TableModelBuilder, TimedAtom, Token, Value, VarId};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn machine_path(name: &str) -> PathBuf {
    repo_root().join("machines").join(format!("{name}.json"))
}

pub fn model_path(name: &str) -> PathBuf {
    repo_root().join("models").join(format!("{name}.json"))
}

pub fn machine(name: &str) -> Machine {
    load_machine(&machine_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn model(name: &str) -> LoadedModel {
    load_model(&model_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn input(m: &Machine, w: &str) -> Vec<Token> {
    m.parse_input(w).unwrap()
}

/// Every word over `alphabet` with length in `lens`, shortest first.
pub fn words(alphabet: &[&str], lens: std::ops::RangeInclusive<usize>) -> Vec<String> {
    let mut out = Vec::new();
    let mut level = vec![String::new()];
    for len in 0..=*lens.end() {
        if lens.contains(&len) {
            out.extend(level.iter().cloned());
        }
        level = level
            .iter()
            .flat_map(|w| alphabet.iter().map(move |a| format!("{w}{a}")))
            .collect();
    }
    out
}

// ---------------------------------------------------------------------------
// Random table TSEMs

/// A finite TSEM as plain data: variables are indices, values are strings,
/// tables map domain rows (in domain order) to output lists.
#[derive(Clone, Debug)]
pub struct PlainTsem {
    pub names: Vec<String>,
    pub ranges: Vec<Vec<String>>,
    pub domains: Vec<Vec<usize>>,
    pub tables: Vec<BTreeMap<Vec<String>, BTreeSet<String>>>,
}

pub type Cfg = Vec<String>;

/// A timed atom over a plain TSEM: (variable index, step, value).
pub type PlainAtom = (usize, usize, String);

fn product(ranges: &[&Vec<String>]) -> Vec<Vec<String>> {
    let mut out = vec![vec![]];
    for r in ranges {
        out = out
            .into_iter()
            .flat_map(|p: Vec<String>| {
                r.iter().map(move |v| {
                    let mut p = p.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    out
}

impl PlainTsem {
    /// Up to `max_vars` variables with ranges of up to `max_range` values.
    /// Output sets are singletons two times out of three.
    pub fn random(rng: &mut impl Rng, max_vars: usize, max_range: usize) -> Self {
        let n = rng.gen_range(1..=max_vars);
        let names: Vec<String> = ["A", "B", "C", "D"][..n].iter().map(|s| s.to_string()).collect();
        let ranges: Vec<Vec<String>> = (0..n)
            .map(|_| (0..rng.gen_range(1..=max_range)).map(|v| v.to_string()).collect())
            .collect();
        let domains: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let d: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
                if d.is_empty() {
                    vec![rng.gen_range(0..n)]
                } else {
                    d
                }
            })
            .collect();
        let tables = (0..n)
            .map(|x| {
                let rs: Vec<&Vec<String>> = domains[x].iter().map(|&d| &ranges[d]).collect();
                product(&rs)
                    .into_iter()
                    .map(|row| {
                        let range = &ranges[x];
                        let out: BTreeSet<String> = if rng.gen_bool(2.0 / 3.0) {
                            [range.choose(rng).unwrap().clone()].into()
                        } else {
                            let k = rng.gen_range(1..=range.len());
                            range.choose_multiple(rng, k).cloned().collect()
                        };
                        (row, out)
                    })
                    .collect()
            })
            .collect();
        PlainTsem {
            names,
            ranges,
            domains,
            tables,
        }
    }

    pub fn to_model(&self) -> Model {
        let mut b = TableModelBuilder::new();
        for (x, name) in self.names.iter().enumerate() {
            b = b.variable(name, Range::atoms(&self.ranges[x]));
            let dom: Vec<&str> = self.domains[x].iter().map(|&d| self.names[d].as_str()).collect();
            b = b.domain(name, &dom);
            for (row, out) in &self.tables[x] {
                b = b.row(
                    name,
                    row.iter().map(|v| Value::atom(v)).collect(),
                    out.iter().map(|v| Value::atom(v)),
                );
            }
        }
        b.build()
    }

    pub fn var(&self, x: usize) -> VarId {
        VarId::single(&self.names[x])
    }

    pub fn to_config(&self, model: &Model, c: &Cfg) -> Configuration {
        Configuration::new(
            &model.signature,
            c.iter().enumerate().map(|(x, v)| (self.var(x), Value::atom(v))),
        )
        .unwrap()
    }

    pub fn read_config(&self, model: &Model, c: &Configuration) -> Cfg {
        (0..self.names.len())
            .map(|x| {
                c.value(&model.signature, &self.var(x))
                    .unwrap()
                    .as_atom()
                    .unwrap()
                    .to_string()
            })
            .collect()
    }

    pub fn to_atoms(&self, atoms: &[PlainAtom]) -> Vec<TimedAtom> {
        atoms
            .iter()
            .map(|(x, t, v)| TimedAtom::new(self.var(*x), *t, Value::atom(v)))
            .collect()
    }

    pub fn all_configs(&self) -> Vec<Cfg> {
        product(&self.ranges.iter().collect::<Vec<_>>())
    }

    pub fn random_config(&self, rng: &mut impl Rng) -> Cfg {
        self.ranges.iter().map(|r| r.choose(rng).unwrap().clone()).collect()
    }

    pub fn outputs(&self, x: usize, c: &Cfg) -> &BTreeSet<String> {
        let row: Vec<String> = self.domains[x].iter().map(|&d| c[d].clone()).collect();
        &self.tables[x][&row]
    }

    /// Successors by filtering every configuration of the signature: `c2`
    /// follows `c` iff each variable either takes its pinned value or a
    /// value its equation allows on `c`.
    pub fn successors(&self, c: &Cfg, pins: &BTreeMap<usize, String>) -> BTreeSet<Cfg> {
        self.all_configs()
            .into_iter()
            .filter(|c2| {
                (0..self.names.len()).all(|x| match pins.get(&x) {
                    Some(p) => &c2[x] == p,
                    None => self.outputs(x, c).contains(&c2[x]),
                })
            })
            .collect()
    }

    /// Whether some branch of the intervened computation (pins applied, the
    /// step-0 pins overriding the root) satisfies all of `constraints`.
    /// Successors only depend on the previous configuration, so a forward
    /// reachable-set sweep decides it without enumerating branches.
    pub fn some_branch(&self, v0: &Cfg, pins: &[PlainAtom], constraints: &[PlainAtom], horizon: usize) -> bool {
        let pins_at = |t: usize| -> BTreeMap<usize, String> {
            pins.iter().filter(|a| a.1 == t).map(|a| (a.0, a.2.clone())).collect()
        };
        let ok = |c: &Cfg, t: usize| constraints.iter().filter(|a| a.1 == t).all(|a| c[a.0] == a.2);
        let mut root = v0.clone();
        for (x, v) in pins_at(0) {
            root[x] = v;
        }
        let mut frontier: BTreeSet<Cfg> = [root].into_iter().filter(|c| ok(c, 0)).collect();
        for t in 1..=horizon {
            let p = pins_at(t);
            frontier = frontier
                .iter()
                .flat_map(|c| self.successors(c, &p))
                .filter(|c| ok(c, t))
                .collect();
        }
        !frontier.is_empty()
    }

    /// A random walk of `horizon` steps from `v0`.
    pub fn random_branch(&self, rng: &mut impl Rng, v0: &Cfg, horizon: usize) -> Vec<Cfg> {
        let mut out = vec![v0.clone()];
        for _ in 0..horizon {
            let next: Vec<Cfg> = self
                .successors(out.last().unwrap(), &BTreeMap::new())
                .into_iter()
                .collect();
            out.push(next.choose(rng).unwrap().clone());
        }
        out
    }
}

/// Verdict in a form comparable across the library and the oracle:
/// (is_cause, failing condition, subset, prevention).
pub type PlainVerdict = (bool, Option<u8>, Option<Vec<PlainAtom>>, Option<Vec<PlainAtom>>);

/// Brute-force but-for cause: (1) candidate and outcome on one branch;
/// (2) the first alternative vector, lexicographic over the ranges with the
/// first atom most significant, under which no branch reaches the outcome;
/// (3) no proper subset, tried by size then position, admits such a vector.
pub fn oracle_cause(t: &PlainTsem, v0: &Cfg, candidate: &[PlainAtom], outcome: &[PlainAtom]) -> PlainVerdict {
    let horizon = candidate.iter().chain(outcome).map(|a| a.1).max().unwrap_or(0);
    let both: Vec<PlainAtom> = candidate.iter().chain(outcome).cloned().collect();
    if !t.some_branch(v0, &[], &both, horizon) {
        return (false, Some(1), None, None);
    }
    let prevent = |atoms: &[PlainAtom]| -> Option<Vec<PlainAtom>> {
        let rs: Vec<&Vec<String>> = atoms.iter().map(|a| &t.ranges[a.0]).collect();
        product(&rs).into_iter().find_map(|alt| {
            if alt.iter().zip(atoms).all(|(v, a)| *v == a.2) {
                return None;
            }
            let pins: Vec<PlainAtom> = atoms.iter().zip(alt).map(|(a, v)| (a.0, a.1, v)).collect();
            (!t.some_branch(v0, &pins, outcome, horizon)).then_some(pins)
        })
    };
    let Some(p) = prevent(candidate) else {
        return (false, Some(2), None, None);
    };
    let n = candidate.len();
    for size in 1..n {
        for mask in subsets_in_order(n, size) {
            let sub: Vec<PlainAtom> = mask.iter().map(|&i| candidate[i].clone()).collect();
            if let Some(q) = prevent(&sub) {
                return (false, Some(3), Some(sub), Some(q));
            }
        }
    }
    (true, None, None, Some(p))
}

/// Index sets of size `k` drawn from `0..n`, lexicographically.
fn subsets_in_order(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect();
    all.sort();
    all
}

pub fn plain_verdict(t: &PlainTsem, v: &CauseVerdict) -> PlainVerdict {
    let plain = |atoms: &[TimedAtom]| -> Vec<PlainAtom> {
        atoms
            .iter()
            .map(|a| {
                let x = t.names.iter().position(|n| **n == *a.var.name).unwrap();
                (x, a.step, a.value.as_atom().unwrap().to_string())
            })
            .collect()
    };
    let cond = v.failing_condition.map(|c| match c {
        FailingCondition::Occurrence => 1,
        FailingCondition::Prevention => 2,
        FailingCondition::Minimality => 3,
    });
    match &v.witness {
        None => (v.is_cause, cond, None, None),
        Some(CauseWitness::Prevention(p)) => (v.is_cause, cond, None, Some(plain(p))),
        Some(CauseWitness::SmallerCandidate { subset, prevention }) => {
            (v.is_cause, cond, Some(plain(subset)), Some(plain(prevention)))
        }
    }
}

/// A random query: atoms mostly read off a random actual branch so that
/// condition (1) is met often enough to exercise (2) and (3).
pub fn random_query(t: &PlainTsem, rng: &mut impl Rng, v0: &Cfg) -> (Vec<PlainAtom>, Vec<PlainAtom>) {
    let horizon = rng.gen_range(0..=4);
    let branch = t.random_branch(rng, v0, horizon);
    let mut slots: Vec<(usize, usize)> = (0..t.names.len())
        .flat_map(|x| (0..=horizon).map(move |s| (x, s)))
        .collect();
    slots.shuffle(rng);
    fn pick(t: &PlainTsem, branch: &[Cfg], rng: &mut impl Rng, (x, s): (usize, usize)) -> PlainAtom {
        let v = if rng.gen_bool(0.8) {
            branch[s][x].clone()
        } else {
            t.ranges[x].choose(rng).unwrap().clone()
        };
        (x, s, v)
    }
    let nc = rng.gen_range(1..=3usize).min(slots.len());
    let candidate: Vec<PlainAtom> = slots[..nc].iter().map(|&s| pick(t, &branch, rng, s)).collect();
    let rest = &slots[nc..];
    let outcome: Vec<PlainAtom> = if rest.is_empty() {
        vec![pick(t, &branch, rng, slots[0])]
    } else {
        let no = rng.gen_range(1..=2usize).min(rest.len());
        rest[..no].iter().map(|&s| pick(t, &branch, rng, s)).collect()
    };
    (candidate, outcome)
}

// ---------------------------------------------------------------------------
// Machines

/// A TM configuration with `cells` written from head-relative index 0.
pub fn tm_config(m: &Machine, cells: &[(i64, Token)]) -> MachineConfig {
    let blank = m.blank().clone();
    MachineConfig {
        state: m.initial().clone(),
        tape: Tape::Relative {
            cells: cells.iter().filter(|(_, s)| *s != blank).cloned().collect(),
            blank,
        },
    }
}

/// The state of a deterministic machine after exactly `steps` moves, or
/// `None` when it gets stuck earlier.
pub fn state_after(m: &Machine, mut c: MachineConfig, steps: usize) -> Option<Token> {
    for _ in 0..steps {
        let next = machine_step(m, &c).unwrap();
        assert!(next.len() <= 1, "machine is not deterministic");
        c = next.into_iter().next()?.config;
    }
    Some(c.state)
}

/// Every path of configurations from `root` of length up to `depth` edges
/// under `succ`. Two successor relations describe the same reachable
/// behaviour to `depth` iff their path sets coincide.
pub fn path_set(
    root: &Configuration,
    depth: usize,
    succ: impl Fn(&Configuration) -> BTreeSet<Configuration>,
) -> BTreeSet<Vec<Configuration>> {
    let mut out = BTreeSet::new();
    let mut level = vec![vec![root.clone()]];
    out.insert(vec![root.clone()]);
    for _ in 0..depth {
        let mut next = Vec::new();
        for p in &level {
            for c in succ(p.last().unwrap()) {
                let mut q = p.clone();
                q.push(c);
                out.insert(q.clone());
                next.push(q);
            }
        }
        level = next;
    }
    out
}

/// Whether the mutant's successors produce the same paths as the reference
/// interpreter of the unmutated calculator.
pub fn behaviour_changed(original: &CalculatorModel, mutant: &Model, root: &Configuration, depth: usize) -> bool {
    let reference = path_set(root, depth, |c| reference_successors(original, c).unwrap_or_default());
    let actual = path_set(root, depth, |c| mutant.successors(c).unwrap_or_default());
    reference != actual
}

/// A small random machine over {a, b}: three working states plus the
/// accepting `qa`. TMs are total and deterministic; the other kinds get up
/// to two moves per (state, symbol), respecting the endmarkers for LBAs.
pub fn random_machine(rng: &mut impl Rng, kind: MachineKind) -> Machine {
    let work = ["q0", "q1", "q2"];
    let mut gamma = vec!["a", "b", "#"];
    if kind == MachineKind::Lba {
        gamma.extend([">", "<"]);
    }
    let mut transitions = Vec::new();
    for q in work {
        for &g in &gamma {
            let k = match kind {
                MachineKind::Tm => 1,
                _ => rng.gen_range(0..=2),
            };
            for _ in 0..k {
                let to = *["q0", "q1", "q2", "qa"].choose(rng).unwrap();
                let (write, moves): (&str, &[i8]) = match (kind, g) {
                    (_, ">") => (">", &[0, 1]),
                    (_, "<") => ("<", &[-1, 0]),
                    (MachineKind::Tm, _) => (*["a", "b", "#"].choose(rng).unwrap(), &[-1, 1]),
                    _ => (*["a", "b", "#"].choose(rng).unwrap(), &[-1, 0, 1]),
                };
                transitions.push(Transition {
                    from: q.into(),
                    read: g.into(),
                    to: to.into(),
                    write: write.into(),
                    mv: *moves.choose(rng).unwrap(),
                });
            }
        }
    }
    let lba = kind == MachineKind::Lba;
    Machine::new(MachineSpec {
        kind,
        states: ["q0", "q1", "q2", "qa"].iter().map(|s| s.to_string()).collect(),
        initial: "q0".into(),
        finals: vec!["qa".into()],
        input_alphabet: vec!["a".into(), "b".into()],
        blank: "#".into(),
        left_marker: lba.then(|| ">".into()),
        right_marker: lba.then(|| "<".into()),
        transitions,
    })
    .unwrap()
}

// ---------------------------------------------------------------------------
// Mutation campaigns

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MutationStats {
    pub mutants: usize,
    /// Mutants whose reachable behaviour differs from the reference.
    pub changed: usize,
    /// Behaviour-changing mutants reported with a counterexample.
    pub detected: usize,
    /// Unchanged mutants wrongly reported as inequivalent.
    pub false_alarms: usize,
    pub longest_path: usize,
}

/// Corrupt one evaluated row at a time: pick a configuration reachable
/// within `depth + 1` steps, one of its active variables and that
/// variable's row there, and replace the output set with a different
/// non-empty one. Each mutant is judged by the reference interpreter and
/// then checked at `depth` without reverification.
pub fn mutation_campaign(
    m: &Machine,
    calc: &CalculatorModel,
    input: &[Token],
    depth: usize,
    count: usize,
    seed: u64,
) -> MutationStats {
    use causal_calc::equiv::{check_equivalence, EquivOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root = causal_calc::compile::initial_calc_config(calc, input).unwrap();
    let tree = causal_calc::tsem::expand_tree(&calc.model, &root, depth + 1, 1_000_000).unwrap();
    let mut stats = MutationStats::default();
    while stats.mutants < count {
        let node = &tree.nodes[rng.gen_range(0..tree.nodes.len())].config;
        let vars = calc.model.active_variables(node);
        let var = vars.choose(&mut rng).unwrap().clone();
        let row = calc.model.row_of(&var, node).unwrap();
        let old = calc.model.eval_row(&var, &row, None).unwrap();
        let range = calc.model.signature.range(&var).unwrap();
        let fresh = range.nth(rng.gen_range(0..range.size())).unwrap();
        if old.contains(&fresh) {
            continue;
        }
        let new: BTreeSet<Value> = if rng.gen_bool(0.5) {
            [fresh].into()
        } else {
            old.iter().cloned().chain([fresh]).collect()
        };
        let mutant = calc.model.with_row_override(var, row, new);
        let changed = behaviour_changed(calc, &mutant, &root, depth);
        let mut mcalc = calc.clone();
        mcalc.model = mutant;
        let opts = EquivOptions {
            reverify_fraction: 0.0,
            seed,
            node_cap: 1_000_000,
        };
        let report = check_equivalence(m, &mcalc, input, depth, &opts).unwrap();
        stats.mutants += 1;
        if changed {
            stats.changed += 1;
            if let Some(cx) = &report.counterexample {
                stats.detected += 1;
                stats.longest_path = stats.longest_path.max(cx.labels.len());
            }
        } else if !report.equivalent {
            stats.false_alarms += 1;
        }
    }
    stats
}

/// (fixture, kind, tape length, input) for every compiled calculator the
/// mutation campaigns cover.
pub fn mutation_targets() -> Vec<(
    &'static str,
    causal_calc::compile::CalcKind,
    Option<usize>,
    &'static str,
)> {
    use causal_calc::compile::CalcKind::*;
    vec![
        ("sweep_lba", Lba, Some(2), "ab"),
        ("parity_lba", Lba, Some(3), "101"),
        ("anbncn_lba", Lba, Some(3), "abc"),
        ("parity_lba", Monolithic, Some(3), "11"),
        ("alt_tm", Tm, None, "0101"),
        ("ends_with_one_ntm", Ntm, None, "101"),
        ("contains_11_ntm", Ntm, None, "0110"),
    ]
}
