use std::collections::BTreeMap;

use super::rules::{head_tuple, head_value, pack_whole, unpack_whole};
use super::{CalcKind, CalculatorModel, CompileError};
use crate::machines::{MachineConfig, Tape};
use crate::tsem::{Configuration, Token, Value};

/// The edge labels `d_1 .. d_t` on the path from the root to a node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecodeContext {
    pub labels: Vec<i8>,
}

impl DecodeContext {
    pub fn new(labels: Vec<i8>) -> Self {
        DecodeContext { labels }
    }

    /// Head position `j`: the sum of all labels.
    pub fn head(&self) -> i64 {
        self.labels.iter().map(|&d| d as i64).sum()
    }

    /// The last label `d_t`, 0 on the empty path.
    pub fn last(&self) -> i8 {
        self.labels.last().copied().unwrap_or(0)
    }

    /// Offset `o_t`: the head position before the last move.
    pub fn offset(&self) -> i64 {
        self.head() - self.last() as i64
    }

    pub fn child(&self, label: i8) -> Self {
        let mut labels = self.labels.clone();
        labels.push(label);
        DecodeContext { labels }
    }
}

fn undecodable(msg: impl Into<String>) -> CompileError {
    CompileError::UndecodableConfig(msg.into())
}

fn atom_at(calc: &CalculatorModel, config: &Configuration, i: i64) -> Result<Token, CompileError> {
    let var = CalculatorModel::cell_var(i);
    config
        .value(&calc.model.signature, &var)
        .and_then(Value::as_atom)
        .cloned()
        .ok_or_else(|| undecodable(format!("{var} holds no tape symbol")))
}

/// Machine configuration represented by `config` at the end of the path
/// `ctx`. LBA cell `C_k` is read from `X_{k - o_t}`, NTM cell `C_k` from
/// `X_{k + d_t}` (the symbol component when that variable is `X_0`); TM
/// cells are head-relative and the monolithic value is unpacked.
pub fn decode_config(
    calc: &CalculatorModel,
    config: &Configuration,
    ctx: &DecodeContext,
) -> Result<MachineConfig, CompileError> {
    let machine = &calc.machine;
    let check_state = |q: &Token| {
        if machine.states().contains(q) {
            Ok(())
        } else {
            Err(undecodable(format!("unknown state {q}")))
        }
    };
    match calc.kind {
        CalcKind::Lba => {
            let n = calc.n.expect("LBA calculators have a tape length") as i64;
            let (q, g, d) = config
                .explicit(&CalculatorModel::cell_var(0))
                .and_then(head_tuple)
                .ok_or_else(|| undecodable("X[0] is not a head tuple"))?;
            check_state(q)?;
            if d != ctx.last() {
                return Err(undecodable(format!(
                    "head tuple move {d} disagrees with label {}",
                    ctx.last()
                )));
            }
            let head = ctx.head();
            if !(0..=n + 1).contains(&head) {
                return Err(undecodable(format!("head position {head} off the tape")));
            }
            let o = ctx.offset();
            let mut cells = Vec::with_capacity(n as usize + 2);
            for k in 0..=n + 1 {
                let i = k - o;
                if i.abs() > n + 1 {
                    return Err(undecodable(format!("cell {k} maps outside the variables")));
                }
                cells.push(if i == 0 { g.clone() } else { atom_at(calc, config, i)? });
            }
            let (l, r) = machine.markers().expect("validated LBA has markers");
            if &cells[0] != l || &cells[n as usize + 1] != r {
                return Err(undecodable("endmarkers out of place"));
            }
            // variables beyond the endmarkers carry nothing and must stay default
            for (var, v) in config.assignments() {
                let off_tape = var.index.is_some_and(|i| !(0..=n + 1).contains(&(i + o)));
                if off_tape && Some(v) != calc.model.signature.default_of(var) {
                    return Err(undecodable(format!("{var} = {v} lies off the tape")));
                }
            }
            Ok(MachineConfig {
                state: q.clone(),
                tape: Tape::Bounded {
                    cells,
                    head: head as usize,
                },
            })
        }
        CalcKind::Ntm => {
            let (q, g, d) = config
                .explicit(&CalculatorModel::cell_var(0))
                .and_then(head_tuple)
                .ok_or_else(|| undecodable("X[0] is not a head tuple"))?;
            check_state(q)?;
            if d != ctx.last() {
                return Err(undecodable(format!(
                    "head tuple move {d} disagrees with label {}",
                    ctx.last()
                )));
            }
            let blank = machine.blank();
            let mut cells = BTreeMap::new();
            for (var, v) in config.assignments() {
                let i = var
                    .index
                    .ok_or_else(|| undecodable(format!("unexpected variable {var}")))?;
                let sym = if i == 0 {
                    g.clone()
                } else {
                    v.as_atom()
                        .cloned()
                        .ok_or_else(|| undecodable(format!("{var} holds no tape symbol")))?
                };
                if &sym != blank {
                    cells.insert(i - d as i64, sym);
                }
            }
            Ok(MachineConfig {
                state: q.clone(),
                tape: Tape::Relative {
                    cells,
                    blank: blank.clone(),
                },
            })
        }
        CalcKind::Tm => {
            let q = config
                .explicit(&CalculatorModel::state_var())
                .and_then(Value::as_atom)
                .ok_or_else(|| undecodable("S is unassigned"))?;
            check_state(q)?;
            let mut cells = BTreeMap::new();
            for (var, v) in config.assignments() {
                if let Some(i) = var.index {
                    let sym = v
                        .as_atom()
                        .ok_or_else(|| undecodable(format!("{var} holds no tape symbol")))?;
                    cells.insert(i, sym.clone());
                }
            }
            Ok(MachineConfig {
                state: q.clone(),
                tape: Tape::Relative {
                    cells,
                    blank: machine.blank().clone(),
                },
            })
        }
        CalcKind::Monolithic => {
            let n = calc.n.expect("monolithic calculators have a tape length");
            let (q, j, cells) = config
                .explicit(&CalculatorModel::whole_var())
                .and_then(|v| unpack_whole(v, n))
                .ok_or_else(|| undecodable("V is not a configuration tuple"))?;
            check_state(q)?;
            Ok(MachineConfig {
                state: q.clone(),
                tape: Tape::Bounded {
                    cells: cells.to_vec(),
                    head: j,
                },
            })
        }
    }
}

/// Calculator configuration for machine configuration `mc` reached by a
/// last move `last_d` (0 at the root). TM and monolithic encodings ignore
/// `last_d`.
pub fn encode_config(calc: &CalculatorModel, mc: &MachineConfig, last_d: i8) -> Result<Configuration, CompileError> {
    let sig = &calc.model.signature;
    let blank = calc.machine.blank();
    let mismatch = || undecodable("tape shape does not match the calculator kind");
    let assignments: Vec<_> = match (calc.kind, &mc.tape) {
        (CalcKind::Lba, Tape::Bounded { cells, head }) => {
            let b = cells.len() as i64 - 1;
            let p = *head as i64 - last_d as i64;
            if !(0..=b).contains(&p) {
                return Err(undecodable(format!("previous head position {p} off the tape")));
            }
            let mut out = vec![(
                CalculatorModel::cell_var(0),
                head_value(&mc.state, &cells[p as usize], last_d),
            )];
            for i in -b..=b {
                let a = p + i;
                if i != 0 && (0..=b).contains(&a) {
                    out.push((CalculatorModel::cell_var(i), Value::Atom(cells[a as usize].clone())));
                }
            }
            out
        }
        (CalcKind::Ntm, Tape::Relative { cells, .. }) => {
            let d = last_d as i64;
            let under = cells.get(&(-d)).unwrap_or(blank);
            let mut out = vec![(CalculatorModel::cell_var(0), head_value(&mc.state, under, last_d))];
            for (&k, s) in cells {
                if k + d != 0 {
                    out.push((CalculatorModel::cell_var(k + d), Value::Atom(s.clone())));
                }
            }
            out
        }
        (CalcKind::Tm, Tape::Relative { cells, .. }) => {
            std::iter::once((CalculatorModel::state_var(), Value::Atom(mc.state.clone())))
                .chain(
                    cells
                        .iter()
                        .map(|(&k, s)| (CalculatorModel::cell_var(k), Value::Atom(s.clone()))),
                )
                .collect()
        }
        (CalcKind::Monolithic, Tape::Bounded { cells, head }) => {
            vec![(CalculatorModel::whole_var(), pack_whole(&mc.state, *head, cells))]
        }
        _ => return Err(mismatch()),
    };
    Ok(Configuration::new(sig, assignments)?)
}

/// The translation of a TM configuration into a TM calculator configuration.
pub fn encode_tm_config(calc: &CalculatorModel, mc: &MachineConfig) -> Result<Configuration, CompileError> {
    if calc.kind != CalcKind::Tm {
        return Err(undecodable("not a TM calculator"));
    }
    encode_config(calc, mc, 0)
}
