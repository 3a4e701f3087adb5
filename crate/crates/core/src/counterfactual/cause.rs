use rayon::prelude::*;

use super::intervention::{apply_intervention, check_atoms, InterventionSpec};
use super::CounterfactualError;
use crate::tsem::{expand_tree, some_branch_satisfies, Configuration, Model, TimedAtom, Value, DEFAULT_NODE_CAP};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CauseQuery {
    pub candidate: Vec<TimedAtom>,
    pub outcome: Vec<TimedAtom>,
}

impl CauseQuery {
    pub fn horizon(&self) -> usize {
        self.candidate
            .iter()
            .chain(&self.outcome)
            .map(|a| a.step)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CauseOptions {
    /// Condition (1) requires candidate and outcome on one common branch.
    /// When false they may hold on different branches.
    pub same_branch: bool,
    pub node_cap: usize,
    /// Upper bound on alternative vectors tried for a single candidate set.
    pub max_alternatives: u128,
}

impl Default for CauseOptions {
    fn default() -> Self {
        CauseOptions {
            same_branch: true,
            node_cap: DEFAULT_NODE_CAP,
            max_alternatives: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailingCondition {
    /// Candidate and outcome do not both hold in the actual tree.
    Occurrence = 1,
    /// No alternative value vector prevents the outcome on every branch.
    Prevention = 2,
    /// A proper sub-assignment already prevents the outcome.
    Minimality = 3,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CauseWitness {
    /// The alternative assignment whose intervention removes the outcome
    /// from every branch.
    Prevention(Vec<TimedAtom>),
    /// A proper subset of the candidate that satisfies prevention on its
    /// own, with its preventing alternative.
    SmallerCandidate {
        subset: Vec<TimedAtom>,
        prevention: Vec<TimedAtom>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CauseVerdict {
    pub is_cause: bool,
    pub failing_condition: Option<FailingCondition>,
    pub witness: Option<CauseWitness>,
}

/// Decide whether `query.candidate` is a but-for cause of `query.outcome` in
/// the computation tree of `model` from `v0`.
///
/// Witnesses are the first found in canonical order: alternative vectors
/// lexicographically over the candidate's ranges, subsets by size and then
/// by position.
pub fn is_cause(
    model: &Model,
    v0: &Configuration,
    query: &CauseQuery,
    opts: &CauseOptions,
) -> Result<CauseVerdict, CounterfactualError> {
    if query.candidate.is_empty() {
        return Err(CounterfactualError::EmptyQuery("candidate"));
    }
    if query.outcome.is_empty() {
        return Err(CounterfactualError::EmptyQuery("outcome"));
    }
    // rejects duplicate (var, step) pairs in the candidate
    InterventionSpec::new(query.candidate.clone())?;
    let horizon = query.horizon();
    check_atoms(model, &query.candidate, horizon)?;
    check_atoms(model, &query.outcome, horizon)?;

    let actual = expand_tree(model, v0, horizon, opts.node_cap)?;
    let occurs = if opts.same_branch {
        let both: Vec<TimedAtom> = query.candidate.iter().chain(&query.outcome).cloned().collect();
        some_branch_satisfies(&actual, &both)
    } else {
        some_branch_satisfies(&actual, &query.candidate) && some_branch_satisfies(&actual, &query.outcome)
    };
    if !occurs {
        return Ok(CauseVerdict {
            is_cause: false,
            failing_condition: Some(FailingCondition::Occurrence),
            witness: None,
        });
    }

    let Some(prevention) = find_prevention(model, v0, &query.candidate, &query.outcome, horizon, opts)? else {
        return Ok(CauseVerdict {
            is_cause: false,
            failing_condition: Some(FailingCondition::Prevention),
            witness: None,
        });
    };

    let n = query.candidate.len();
    for size in 1..n {
        for subset in combinations(n, size) {
            let atoms: Vec<TimedAtom> = subset.iter().map(|&i| query.candidate[i].clone()).collect();
            if let Some(p) = find_prevention(model, v0, &atoms, &query.outcome, horizon, opts)? {
                return Ok(CauseVerdict {
                    is_cause: false,
                    failing_condition: Some(FailingCondition::Minimality),
                    witness: Some(CauseWitness::SmallerCandidate {
                        subset: atoms,
                        prevention: p,
                    }),
                });
            }
        }
    }

    Ok(CauseVerdict {
        is_cause: true,
        failing_condition: None,
        witness: Some(CauseWitness::Prevention(prevention)),
    })
}

/// First alternative vector (differing from the candidate in at least one
/// coordinate) whose updated tree has no branch satisfying the outcome.
fn find_prevention(
    model: &Model,
    v0: &Configuration,
    candidate: &[TimedAtom],
    outcome: &[TimedAtom],
    horizon: usize,
    opts: &CauseOptions,
) -> Result<Option<Vec<TimedAtom>>, CounterfactualError> {
    let ranges: Vec<Vec<Value>> = candidate
        .iter()
        .map(|a| {
            model
                .signature
                .range(&a.var)
                .map(|r| r.iter().collect())
                .unwrap_or_default()
        })
        .collect();
    let size = ranges.iter().fold(1u128, |acc, r| acc.saturating_mul(r.len() as u128));
    if size > opts.max_alternatives {
        return Err(CounterfactualError::SearchTooLarge {
            size,
            limit: opts.max_alternatives,
        });
    }
    let original: Vec<&Value> = candidate.iter().map(|a| &a.value).collect();
    let mut alternatives: Vec<Vec<Value>> = vec![vec![]];
    for r in &ranges {
        alternatives = alternatives
            .into_iter()
            .flat_map(|prefix| {
                r.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    alternatives.retain(|alt| alt.iter().zip(&original).any(|(a, o)| a != *o));

    let found = alternatives
        .par_iter()
        .map(|alt| -> Result<Option<Vec<TimedAtom>>, CounterfactualError> {
            let atoms: Vec<TimedAtom> = candidate
                .iter()
                .zip(alt)
                .map(|(a, v)| TimedAtom::new(a.var.clone(), a.step, v.clone()))
                .collect();
            let spec = InterventionSpec::new(atoms.clone())?;
            let tree = apply_intervention(model, v0, &spec, horizon, opts.node_cap)?;
            Ok((!some_branch_satisfies(&tree, outcome)).then_some(atoms))
        })
        .find_first(|r| !matches!(r, Ok(None)));
    match found {
        None => Ok(None),
        Some(r) => r,
    }
}

/// k-subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsem::{Range, TableModelBuilder, VarId};

    fn counter_with_noise() -> Model {
        let digits: Vec<String> = (0..10).map(|i| i.to_string()).collect();
        TableModelBuilder::new()
            .variable("X", Range::atoms(&digits))
            .variable("Y", Range::atoms(["a", "b"]))
            .domain("X", &["X"])
            .domain("Y", &["Y"])
            .fill("X", |row| {
                let x: u32 = row[0].as_atom().unwrap().parse().unwrap();
                if x == 9 {
                    vec![Value::atom("9")]
                } else {
                    vec![Value::atom("0"), Value::atom(&(x + 1).to_string())]
                }
            })
            .fill("Y", |_| vec![Value::atom("a")])
            .build()
    }

    fn at(var: &str, step: usize, v: &str) -> TimedAtom {
        TimedAtom::new(VarId::single(var), step, Value::atom(v))
    }

    fn start(m: &Model) -> Configuration {
        Configuration::new(
            &m.signature,
            [
                (VarId::single("X"), Value::atom("8")),
                (VarId::single("Y"), Value::atom("a")),
            ],
        )
        .unwrap()
    }

    #[test]
    fn eight_causes_nine() {
        let m = counter_with_noise();
        let q = CauseQuery {
            candidate: vec![at("X", 0, "8")],
            outcome: vec![at("X", 1, "9")],
        };
        let v = is_cause(&m, &start(&m), &q, &CauseOptions::default()).unwrap();
        assert!(v.is_cause);
        assert_eq!(v.failing_condition, None);
        assert_eq!(v.witness, Some(CauseWitness::Prevention(vec![at("X", 0, "0")])));
    }

    #[test]
    fn padded_candidate_fails_minimality() {
        let m = counter_with_noise();
        let q = CauseQuery {
            candidate: vec![at("X", 0, "8"), at("Y", 0, "a")],
            outcome: vec![at("X", 1, "9")],
        };
        let v = is_cause(&m, &start(&m), &q, &CauseOptions::default()).unwrap();
        assert!(!v.is_cause);
        assert_eq!(v.failing_condition, Some(FailingCondition::Minimality));
        match v.witness {
            Some(CauseWitness::SmallerCandidate { subset, .. }) => assert_eq!(subset, vec![at("X", 0, "8")]),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn constant_outcome_is_unpreventable() {
        let m = TableModelBuilder::new()
            .variable("X", Range::atoms(["0", "1"]))
            .domain("X", &["X"])
            .fill("X", |_| vec![Value::atom("1")])
            .build();
        let v0 = Configuration::new(&m.signature, [(VarId::single("X"), Value::atom("1"))]).unwrap();
        let q = CauseQuery {
            candidate: vec![at("X", 0, "1")],
            outcome: vec![at("X", 2, "1")],
        };
        let v = is_cause(&m, &v0, &q, &CauseOptions::default()).unwrap();
        assert!(!v.is_cause);
        assert_eq!(v.failing_condition, Some(FailingCondition::Prevention));
    }

    #[test]
    fn outcome_that_never_holds_fails_occurrence() {
        let m = counter_with_noise();
        let q = CauseQuery {
            candidate: vec![at("X", 0, "8")],
            outcome: vec![at("X", 1, "5")],
        };
        let v = is_cause(&m, &start(&m), &q, &CauseOptions::default()).unwrap();
        assert_eq!(v.failing_condition, Some(FailingCondition::Occurrence));
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert!(combinations(2, 0) == vec![Vec::<usize>::new()]);
    }
}
