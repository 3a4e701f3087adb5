//! Compilers from machines into causal calculator models, the maps between
//! machine and calculator configurations, and calculator acceptance.

mod decode;
mod reference;
mod rules;

pub use decode::{decode_config, encode_config, encode_tm_config, DecodeContext};
pub use reference::{reference_equation, reference_successors};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::machines::{explore, initial_machine_config, CapReached, Machine, MachineError, MachineKind, Verdict};
use crate::tsem::{tok, Configuration, Equation, IndexRange, Model, Range, Signature, Token, TsemError, Value, VarId};
use rules::{
    dir_token, head_tuple, unpack_whole, HeadLabeler, MonolithicLabeler, MonolithicRule, ShiftRule, TmLabeler, TmRule,
    CELL, STATE, WHOLE,
};

/// Largest range allowed for the single-variable LBA encoding.
pub const MONOLITHIC_RANGE_CAP: u128 = 1 << 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalcKind {
    Lba,
    Tm,
    Ntm,
    Monolithic,
}

impl fmt::Display for CalcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CalcKind::Lba => "lba",
            CalcKind::Tm => "tm",
            CalcKind::Ntm => "ntm",
            CalcKind::Monolithic => "monolithic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("{found} machine cannot be compiled as {expected}")]
    InvalidMachineKind { expected: CalcKind, found: MachineKind },
    #[error("LBA calculators need a tape length of at least 1")]
    TapeLength,
    #[error("range of {size} values exceeds the cap {cap}")]
    RangeTooLarge { size: u128, cap: u128 },
    #[error("configuration cannot be decoded: {0}")]
    UndecodableConfig(String),
    #[error("model metadata does not describe a calculator: {0}")]
    BadMeta(String),
    #[error("node budget of {cap} exceeded")]
    BudgetExceeded { cap: usize },
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Tsem(#[from] TsemError),
}

impl From<CapReached> for CompileError {
    fn from(c: CapReached) -> Self {
        CompileError::BudgetExceeded { cap: c.0 }
    }
}

impl CompileError {
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            CompileError::BudgetExceeded { .. }
                | CompileError::Tsem(TsemError::BudgetExceeded { .. })
                | CompileError::Machine(MachineError::BudgetExceeded { .. })
        )
    }
}

/// A compiled model together with the machine it simulates.
#[derive(Clone, Debug, PartialEq)]
pub struct CalculatorModel {
    pub model: Model,
    pub machine: Arc<Machine>,
    pub kind: CalcKind,
    /// Tape length of LBA-based calculators.
    pub n: Option<usize>,
}

impl CalculatorModel {
    /// The tape variable `X_i`.
    pub fn cell_var(i: i64) -> VarId {
        VarId::member(CELL, i)
    }

    /// The state variable `S` of the TM calculator.
    pub fn state_var() -> VarId {
        VarId::single(STATE)
    }

    /// The single variable `V` of the monolithic encoding.
    pub fn whole_var() -> VarId {
        VarId::single(WHOLE)
    }

    /// Machine state carried by `config`.
    pub fn state_of(&self, config: &Configuration) -> Option<Token> {
        match self.kind {
            CalcKind::Lba | CalcKind::Ntm => config
                .explicit(&Self::cell_var(0))
                .and_then(head_tuple)
                .map(|(q, _, _)| q.clone()),
            CalcKind::Tm => config.explicit(&Self::state_var()).and_then(Value::as_atom).cloned(),
            CalcKind::Monolithic => config
                .explicit(&Self::whole_var())
                .and_then(|v| unpack_whole(v, self.n.unwrap_or(0)))
                .map(|(q, _, _)| q.clone()),
        }
    }

    /// Accepting configurations are those whose state is final.
    pub fn is_accepting(&self, config: &Configuration) -> bool {
        self.state_of(config).is_some_and(|q| self.machine.is_final(&q))
    }

    /// Metadata recorded in the model: kind, tape length, variable window,
    /// source hash and the source machine itself.
    pub fn meta_json(&self) -> serde_json::Value {
        let window = match (self.kind, self.n) {
            (CalcKind::Lba, Some(n)) => json!([-(n as i64 + 1), n as i64 + 1]),
            (CalcKind::Monolithic, _) => json!([]),
            _ => json!("unbounded"),
        };
        json!({
            "kind": self.kind,
            "n": self.n,
            "window": window,
            "source_hash": self.machine.hash(),
            "machine": self.machine.spec(),
        })
    }

    fn finish(mut model: Model, machine: Arc<Machine>, kind: CalcKind, n: Option<usize>) -> Self {
        let mut calc = CalculatorModel {
            model: Model::new(Signature::new()),
            machine,
            kind,
            n,
        };
        model.meta = calc.meta_json();
        calc.model = model;
        calc
    }

    /// Rebuild a calculator from a model carrying calculator metadata,
    /// keeping the model's row patches.
    pub fn from_model(model: &Model) -> Result<Self, CompileError> {
        let meta = &model.meta;
        let kind: CalcKind =
            serde_json::from_value(meta["kind"].clone()).map_err(|e| CompileError::BadMeta(format!("kind: {e}")))?;
        let spec = serde_json::from_value(meta["machine"].clone())
            .map_err(|e| CompileError::BadMeta(format!("machine: {e}")))?;
        let machine = Machine::new(spec)?;
        if meta["source_hash"].as_str() != Some(machine.hash()) {
            return Err(CompileError::BadMeta("source_hash does not match the machine".into()));
        }
        let n = meta["n"].as_u64().map(|n| n as usize);
        let mut calc = compile(&machine, kind, n)?;
        for (var, rows) in model.patches() {
            for (row, out) in rows {
                calc.model = calc.model.with_row_override(var.clone(), row.clone(), out.clone());
            }
        }
        if calc.model.signature != model.signature {
            return Err(CompileError::BadMeta("signature differs from the compiled one".into()));
        }
        Ok(calc)
    }
}

fn require(machine: &Machine, expected: CalcKind, allowed: MachineKind) -> Result<(), CompileError> {
    if machine.kind() != allowed {
        return Err(CompileError::InvalidMachineKind {
            expected,
            found: machine.kind(),
        });
    }
    Ok(())
}

fn gamma_range(machine: &Machine) -> Range {
    Range::Set(machine.tape_alphabet().iter().cloned().map(Value::Atom).collect())
}

fn head_range(machine: &Machine) -> Range {
    Range::Product(vec![
        machine.states().clone(),
        machine.tape_alphabet().clone(),
        [-1, 0, 1].into_iter().map(dir_token).collect(),
    ])
}

/// Compile with the constructor selected by `kind`.
pub fn compile(machine: &Machine, kind: CalcKind, n: Option<usize>) -> Result<CalculatorModel, CompileError> {
    match kind {
        CalcKind::Lba => compile_lba(machine, n.ok_or(CompileError::TapeLength)?),
        CalcKind::Tm => compile_tm(machine),
        CalcKind::Ntm => compile_ntm(machine),
        CalcKind::Monolithic => compile_lba_monolithic(machine, n.ok_or(CompileError::TapeLength)?),
    }
}

/// LBA calculator over `X_{-(n+1)} .. X_{n+1}`.
pub fn compile_lba(machine: &Machine, n: usize) -> Result<CalculatorModel, CompileError> {
    require(machine, CalcKind::Lba, MachineKind::Lba)?;
    if n == 0 {
        return Err(CompileError::TapeLength);
    }
    let b = n as i64 + 1;
    let machine = Arc::new(machine.clone());
    let mut sig = Signature::new();
    sig.add_family(
        CELL,
        IndexRange::Bounded { lo: -b, hi: b },
        gamma_range(&machine),
        Value::Atom(machine.blank().clone()),
    );
    sig.set_index_range(CELL, 0, head_range(&machine));
    let mut model = Model::new(sig);
    model.set_equation(
        CELL,
        Equation::Rule(Arc::new(ShiftRule {
            machine: machine.clone(),
            bound: Some(b),
        })),
    );
    model.set_labeler(Arc::new(HeadLabeler));
    Ok(CalculatorModel::finish(model, machine, CalcKind::Lba, Some(n)))
}

/// TM calculator over `S` and the unbounded family `X_i`.
pub fn compile_tm(machine: &Machine) -> Result<CalculatorModel, CompileError> {
    require(machine, CalcKind::Tm, MachineKind::Tm)?;
    let machine = Arc::new(machine.clone());
    let mut sig = Signature::new();
    sig.add_single(
        STATE,
        Range::Set(machine.states().iter().cloned().map(Value::Atom).collect()),
    );
    sig.add_family(
        CELL,
        IndexRange::Unbounded,
        gamma_range(&machine),
        Value::Atom(machine.blank().clone()),
    );
    let rule = Arc::new(TmRule {
        machine: machine.clone(),
    });
    let mut model = Model::new(sig);
    model.set_equation(STATE, Equation::Rule(rule.clone()));
    model.set_equation(CELL, Equation::Rule(rule));
    model.set_labeler(Arc::new(TmLabeler {
        machine: machine.clone(),
    }));
    Ok(CalculatorModel::finish(model, machine, CalcKind::Tm, None))
}

/// NTM calculator: the LBA construction without tape bounds.
pub fn compile_ntm(machine: &Machine) -> Result<CalculatorModel, CompileError> {
    require(machine, CalcKind::Ntm, MachineKind::Ntm)?;
    let machine = Arc::new(machine.clone());
    let mut sig = Signature::new();
    sig.add_family(
        CELL,
        IndexRange::Unbounded,
        gamma_range(&machine),
        Value::Atom(machine.blank().clone()),
    );
    sig.set_index_range(CELL, 0, head_range(&machine));
    let mut model = Model::new(sig);
    model.set_equation(
        CELL,
        Equation::Rule(Arc::new(ShiftRule {
            machine: machine.clone(),
            bound: None,
        })),
    );
    model.set_labeler(Arc::new(HeadLabeler));
    Ok(CalculatorModel::finish(model, machine, CalcKind::Ntm, None))
}

/// Single-variable LBA encoding whose values are whole configurations.
pub fn compile_lba_monolithic(machine: &Machine, n: usize) -> Result<CalculatorModel, CompileError> {
    require(machine, CalcKind::Monolithic, MachineKind::Lba)?;
    if n == 0 {
        return Err(CompileError::TapeLength);
    }
    let (l, r) = machine.markers().expect("validated LBA has markers");
    let mut parts: Vec<BTreeSet<Token>> = vec![
        machine.states().clone(),
        (0..=n + 1).map(|j| tok(&j.to_string())).collect(),
        [l.clone()].into_iter().collect(),
    ];
    parts.extend(std::iter::repeat_n(machine.tape_alphabet().clone(), n));
    parts.push([r.clone()].into_iter().collect());
    let range = Range::Product(parts);
    let size = range.size();
    if size > MONOLITHIC_RANGE_CAP {
        return Err(CompileError::RangeTooLarge {
            size,
            cap: MONOLITHIC_RANGE_CAP,
        });
    }
    let machine = Arc::new(machine.clone());
    let mut sig = Signature::new();
    sig.add_single(WHOLE, range);
    let mut model = Model::new(sig);
    model.set_equation(
        WHOLE,
        Equation::Rule(Arc::new(MonolithicRule {
            machine: machine.clone(),
            n,
        })),
    );
    model.set_labeler(Arc::new(MonolithicLabeler { n }));
    Ok(CalculatorModel::finish(model, machine, CalcKind::Monolithic, Some(n)))
}

/// The calculator configuration corresponding to the machine's initial
/// configuration on `input`.
pub fn initial_calc_config(calc: &CalculatorModel, input: &[Token]) -> Result<Configuration, CompileError> {
    let mc = initial_machine_config(&calc.machine, input, calc.n)?;
    encode_config(calc, &mc, 0)
}

/// Acceptance of `input` by the calculator, decided by the same bounded
/// search as the machine verdicts.
pub fn calc_accepts(
    calc: &CalculatorModel,
    input: &[Token],
    budget: usize,
    cap: usize,
) -> Result<Verdict, CompileError> {
    let root = initial_calc_config(calc, input)?;
    calc_accepts_from(calc, root, budget, cap)
}

/// As [`calc_accepts`] from an arbitrary root configuration.
pub fn calc_accepts_from(
    calc: &CalculatorModel,
    root: Configuration,
    budget: usize,
    cap: usize,
) -> Result<Verdict, CompileError> {
    let model = &calc.model;
    let ex = explore(
        root,
        budget,
        cap,
        |c: &Configuration| -> Result<Vec<(Configuration, i8, ())>, CompileError> {
            Ok(model
                .successors(c)?
                .into_iter()
                .map(|child| {
                    let l = model.label(c, &child).unwrap_or(0);
                    (child, l, ())
                })
                .collect())
        },
        |c| calc.is_accepting(c),
    )?;
    Ok(ex.verdict)
}
