//! Bounded-depth equivalence between machine run trees and calculator
//! computation trees, matched along label paths.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::compile::{
    calc_accepts, decode_config, encode_tm_config, initial_calc_config, reference_successors, CalcKind,
    CalculatorModel, CompileError, DecodeContext,
};
use crate::machines::{
    initial_machine_config, machine_step, run_machine, Machine, MachineConfig, MachineError, MachineKind, Tape, Verdict,
};
use crate::tsem::{Configuration, Token, DEFAULT_NODE_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("calculator of kind {calc} was not compiled from a {machine} machine")]
    KindMismatch { machine: MachineKind, calc: CalcKind },
    #[error("calculator was compiled from a different machine")]
    HashMismatch,
    #[error("node budget of {cap} exceeded")]
    BudgetExceeded { cap: usize },
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

impl EquivError {
    pub fn is_budget(&self) -> bool {
        match self {
            EquivError::BudgetExceeded { .. } | EquivError::Machine(MachineError::BudgetExceeded { .. }) => true,
            EquivError::Compile(e) => e.is_budget(),
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EquivOptions {
    /// Fraction of node pairs whose calculator successors are re-derived with
    /// the reference interpreter.
    pub reverify_fraction: f64,
    pub seed: u64,
    pub node_cap: usize,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions {
            reverify_fraction: 0.1,
            seed: 0,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Labels from the root, rendered `d1.d2...`.
    pub path: String,
    pub labels: Vec<i8>,
    pub machine: Option<String>,
    pub calculator: Option<String>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivReport {
    pub equivalent: bool,
    pub depth: usize,
    pub counterexample: Option<Counterexample>,
    pub machine_levels: Vec<usize>,
    pub calc_levels: Vec<usize>,
    pub pairs_checked: usize,
    pub reverified: usize,
}

pub fn render_path(labels: &[i8]) -> String {
    labels.iter().map(i8::to_string).collect::<Vec<_>>().join(".")
}

fn expected_kind(kind: CalcKind) -> MachineKind {
    match kind {
        CalcKind::Lba | CalcKind::Monolithic => MachineKind::Lba,
        CalcKind::Tm => MachineKind::Tm,
        CalcKind::Ntm => MachineKind::Ntm,
    }
}

fn check_pairing(machine: &Machine, calc: &CalculatorModel) -> Result<(), EquivError> {
    if expected_kind(calc.kind) != machine.kind() {
        return Err(EquivError::KindMismatch {
            machine: machine.kind(),
            calc: calc.kind,
        });
    }
    if calc.machine.hash() != machine.hash() {
        return Err(EquivError::HashMismatch);
    }
    Ok(())
}

/// First difference between two machine configurations, if any.
fn difference(a: &MachineConfig, b: &MachineConfig) -> Option<String> {
    if a.state != b.state {
        return Some(format!("state differs: machine {}, calculator {}", a.state, b.state));
    }
    let cells = |c: &MachineConfig| -> Vec<i64> {
        match &c.tape {
            Tape::Bounded { cells, .. } => (0..cells.len() as i64).collect(),
            Tape::Relative { cells, .. } => cells.keys().copied().chain([0]).collect(),
        }
    };
    let keys: BTreeSet<i64> = cells(a).into_iter().chain(cells(b)).collect();
    for k in keys {
        if a.cell(k) != b.cell(k) {
            let show = |t: Option<&Token>| t.map_or("-".to_string(), |t| t.to_string());
            return Some(format!(
                "cell {k} differs: machine {}, calculator {}",
                show(a.cell(k)),
                show(b.cell(k))
            ));
        }
    }
    if a.head() != b.head() {
        return Some(format!(
            "head differs: machine {:?}, calculator {:?}",
            a.head(),
            b.head()
        ));
    }
    None
}

fn machine_children(machine: &Machine, c: &MachineConfig) -> Result<Vec<(i8, MachineConfig)>, MachineError> {
    match machine_step(machine, c) {
        Ok(steps) => Ok(steps.into_iter().map(|s| (s.label(), s.config)).collect()),
        Err(MachineError::StuckConfiguration { .. }) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// Check that the run tree of `machine` on `input` and the computation tree
/// of `calc` from the corresponding root agree to `depth`: at every pair of
/// nodes reached by the same label path the states and all cells agree
/// (reading the calculator through [`decode_config`]), and the labelled
/// successors match one to one.
pub fn check_equivalence(
    machine: &Machine,
    calc: &CalculatorModel,
    input: &[Token],
    depth: usize,
    opts: &EquivOptions,
) -> Result<EquivReport, EquivError> {
    check_pairing(machine, calc)?;
    let mroot = initial_machine_config(machine, input, calc.n)?;
    let croot = initial_calc_config(calc, input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = EquivReport {
        equivalent: true,
        depth,
        counterexample: None,
        machine_levels: Vec::new(),
        calc_levels: Vec::new(),
        pairs_checked: 0,
        reverified: 0,
    };
    let fail =
        |report: &mut EquivReport, labels: &[i8], m: Option<&MachineConfig>, c: Option<String>, reason: String| {
            report.equivalent = false;
            report.counterexample = Some(Counterexample {
                path: render_path(labels),
                labels: labels.to_vec(),
                machine: m.map(ToString::to_string),
                calculator: c,
                reason,
            });
        };

    let mut frontier: Vec<(MachineConfig, Configuration, DecodeContext)> =
        vec![(mroot, croot, DecodeContext::default())];
    report.machine_levels.push(1);
    report.calc_levels.push(1);
    for t in 0..=depth {
        let mut next = Vec::new();
        let (mut mcount, mut ccount) = (0usize, 0usize);
        for (mc, cc, ctx) in frontier {
            report.pairs_checked += 1;
            if report.pairs_checked > opts.node_cap {
                return Err(EquivError::BudgetExceeded { cap: opts.node_cap });
            }
            let decoded = match decode_config(calc, &cc, &ctx) {
                Ok(d) => d,
                Err(e) => {
                    fail(&mut report, &ctx.labels, Some(&mc), Some(cc.to_string()), e.to_string());
                    return Ok(report);
                }
            };
            if let Some(reason) = difference(&mc, &decoded) {
                fail(&mut report, &ctx.labels, Some(&mc), Some(decoded.to_string()), reason);
                return Ok(report);
            }
            if t == depth {
                continue;
            }
            let mkids = machine_children(machine, &mc)?;
            let csucc = calc.model.successors(&cc).map_err(CompileError::from)?;
            if opts.reverify_fraction > 0.0 && rng.gen_bool(opts.reverify_fraction.min(1.0)) {
                report.reverified += 1;
                let expected = reference_successors(calc, &cc)?;
                if expected != csucc {
                    fail(
                        &mut report,
                        &ctx.labels,
                        Some(&mc),
                        Some(cc.to_string()),
                        "successors differ from the reference construction".into(),
                    );
                    return Ok(report);
                }
            }
            mcount += mkids.len();
            ccount += csucc.len();
            let mut ckids = Vec::with_capacity(csucc.len());
            for child in csucc {
                let l = calc.model.label(&cc, &child).unwrap_or(0);
                let cctx = ctx.child(l);
                match decode_config(calc, &child, &cctx) {
                    Ok(d) => ckids.push((l, d, child)),
                    Err(e) => {
                        fail(&mut report, &cctx.labels, None, Some(child.to_string()), e.to_string());
                        return Ok(report);
                    }
                }
            }
            for (l, m) in &mkids {
                if !ckids.iter().any(|(cl, d, _)| cl == l && d == m) {
                    let cctx = ctx.child(*l);
                    fail(
                        &mut report,
                        &cctx.labels,
                        Some(m),
                        None,
                        "machine transition has no calculator counterpart".into(),
                    );
                    return Ok(report);
                }
            }
            for (l, d, _) in &ckids {
                if !mkids.iter().any(|(ml, m)| ml == l && m == d) {
                    let cctx = ctx.child(*l);
                    fail(
                        &mut report,
                        &cctx.labels,
                        None,
                        Some(d.to_string()),
                        "calculator transition has no machine counterpart".into(),
                    );
                    return Ok(report);
                }
            }
            if mkids.len() != ckids.len() {
                fail(
                    &mut report,
                    &ctx.labels,
                    Some(&mc),
                    Some(cc.to_string()),
                    format!(
                        "{} machine successors, {} calculator successors",
                        mkids.len(),
                        ckids.len()
                    ),
                );
                return Ok(report);
            }
            for (l, m) in mkids {
                let (_, _, child) = ckids
                    .iter()
                    .find(|(cl, d, _)| *cl == l && *d == m)
                    .expect("matched above");
                next.push((m, child.clone(), ctx.child(l)));
            }
        }
        if t < depth {
            report.machine_levels.push(mcount);
            report.calc_levels.push(ccount);
        }
        frontier = next;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatrixRow {
    pub input: String,
    pub machine: Verdict,
    pub calculator: Verdict,
    pub agree: bool,
}

/// Verdicts of the machine and the calculator on each input under the same
/// budget.
pub fn check_acceptance_matrix(
    machine: &Machine,
    calc: &CalculatorModel,
    inputs: &[Vec<Token>],
    budget: usize,
    node_cap: usize,
) -> Result<Vec<MatrixRow>, EquivError> {
    check_pairing(machine, calc)?;
    inputs
        .iter()
        .map(|input| {
            let direct = run_machine(machine, input, calc.n, budget, node_cap)?.verdict;
            let via = calc_accepts(calc, input, budget, node_cap)?;
            Ok(MatrixRow {
                input: input.iter().map(|t| t.to_string()).collect(),
                machine: direct,
                calculator: via,
                agree: direct == via,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepwiseReport {
    pub steps_checked: usize,
    /// First step at which the calculator differs from the translated
    /// machine configuration.
    pub first_mismatch: Option<usize>,
}

/// Deterministic TM check: the calculator path equals the translation of
/// the machine run at every step up to `steps`.
pub fn check_tm_stepwise(
    machine: &Machine,
    calc: &CalculatorModel,
    input: &[Token],
    steps: usize,
) -> Result<StepwiseReport, EquivError> {
    check_pairing(machine, calc)?;
    if calc.kind != CalcKind::Tm {
        return Err(EquivError::KindMismatch {
            machine: machine.kind(),
            calc: calc.kind,
        });
    }
    let mut mc = initial_machine_config(machine, input, None)?;
    let mut cc = initial_calc_config(calc, input)?;
    for t in 0..=steps {
        if encode_tm_config(calc, &mc)? != cc {
            return Ok(StepwiseReport {
                steps_checked: t,
                first_mismatch: Some(t),
            });
        }
        if t == steps {
            break;
        }
        let mut mnext = machine_step(machine, &mc)?;
        let cnext = calc.model.successors(&cc).map_err(CompileError::from)?;
        if mnext.len() != 1 || cnext.len() != 1 {
            return Ok(StepwiseReport {
                steps_checked: t + 1,
                first_mismatch: Some(t + 1),
            });
        }
        mc = mnext.remove(0).config;
        cc = cnext.into_iter().next().expect("one successor");
    }
    Ok(StepwiseReport {
        steps_checked: steps + 1,
        first_mismatch: None,
    })
}
