//! A second, deliberately plain reading of the calculator equations. It
//! does not go through the model's rules or successor relation, so it can be
//! used to cross-check them.

use std::collections::BTreeSet;

use super::rules::{head_tuple, head_value, pack_whole, unpack_whole};
use super::{CalcKind, CalculatorModel, CompileError};
use crate::tsem::{Configuration, Token, Value, VarId};

fn read_cell(calc: &CalculatorModel, config: &Configuration, i: i64) -> Option<Value> {
    if let (CalcKind::Lba, Some(n)) = (calc.kind, calc.n) {
        if i.abs() > n as i64 + 1 {
            return Some(Value::Atom(calc.machine.blank().clone()));
        }
    }
    Some(
        config
            .explicit(&CalculatorModel::cell_var(i))
            .cloned()
            .unwrap_or_else(|| Value::Atom(calc.machine.blank().clone())),
    )
}

fn symbol_at(calc: &CalculatorModel, config: &Configuration, i: i64, g: &Token) -> Option<Token> {
    if i == 0 {
        return Some(g.clone());
    }
    read_cell(calc, config, i)?.as_atom().cloned()
}

fn index_window(calc: &CalculatorModel, config: &Configuration) -> Vec<i64> {
    match (calc.kind, calc.n) {
        (CalcKind::Lba, Some(n)) => {
            let b = n as i64 + 1;
            (-b..=b).collect()
        }
        _ => {
            let idx: Vec<i64> = config.assignments().filter_map(|(v, _)| v.index).collect();
            let lo = idx.iter().copied().min().unwrap_or(0).min(0);
            let hi = idx.iter().copied().max().unwrap_or(0).max(0);
            (lo - 1..=hi + 1).collect()
        }
    }
}

/// The equation of `var` evaluated by direct case analysis on `config`.
pub fn reference_equation(
    calc: &CalculatorModel,
    var: &VarId,
    config: &Configuration,
) -> Result<BTreeSet<Value>, CompileError> {
    let m = &calc.machine;
    let bad = || CompileError::UndecodableConfig(format!("no reference reading of {var} in {config}"));
    let out: BTreeSet<Value> = match calc.kind {
        CalcKind::Lba | CalcKind::Ntm => {
            let (q, g, d) = config
                .explicit(&CalculatorModel::cell_var(0))
                .and_then(head_tuple)
                .ok_or_else(bad)?;
            let i = var.index.ok_or_else(bad)?;
            if i == 0 {
                // the symbol under the head sits in X_d, or in the tuple when d = 0
                let under = symbol_at(calc, config, d as i64, g).ok_or_else(bad)?;
                m.delta_f(q, &under)
                    .into_iter()
                    .map(|mv| head_value(&mv.to, &mv.write, mv.d))
                    .collect()
            } else {
                let src = i + d as i64;
                let v = symbol_at(calc, config, src, g).ok_or_else(bad)?;
                [Value::Atom(v)].into_iter().collect()
            }
        }
        CalcKind::Tm => {
            let q = config
                .explicit(&CalculatorModel::state_var())
                .and_then(Value::as_atom)
                .ok_or_else(bad)?;
            let cell = |k: i64| read_cell(calc, config, k).and_then(|v| v.as_atom().cloned());
            let alpha = cell(0).ok_or_else(bad)?;
            if m.is_final(q) {
                let same = match var.index {
                    None => q.clone(),
                    Some(i) => cell(i).ok_or_else(bad)?,
                };
                return Ok([Value::Atom(same)].into_iter().collect());
            }
            let Some(t) = m.delta(q, &alpha).first() else {
                return Ok(BTreeSet::new());
            };
            let v = match (var.index, t.d) {
                (None, _) => t.to.clone(),
                (Some(1), -1) => t.write.clone(),
                (Some(-1), 1) => t.write.clone(),
                (Some(i), -1) => cell(i - 1).ok_or_else(bad)?,
                (Some(i), 1) => cell(i + 1).ok_or_else(bad)?,
                _ => return Err(bad()),
            };
            [Value::Atom(v)].into_iter().collect()
        }
        CalcKind::Monolithic => {
            let n = calc.n.ok_or_else(bad)?;
            let (q, j, cells) = config
                .explicit(&CalculatorModel::whole_var())
                .and_then(|v| unpack_whole(v, n))
                .ok_or_else(bad)?;
            m.delta_f(q, &cells[j])
                .into_iter()
                .filter(|mv| (0..=n as i64 + 1).contains(&(j as i64 + mv.d as i64)))
                .map(|mv| {
                    let mut c = cells.to_vec();
                    c[j] = mv.write.clone();
                    pack_whole(&mv.to, (j as i64 + mv.d as i64) as usize, &c)
                })
                .collect()
        }
    };
    Ok(out)
}

/// Successors of `config` built one machine transition at a time: every
/// transition of the current state and symbol yields exactly one child.
pub fn reference_successors(
    calc: &CalculatorModel,
    config: &Configuration,
) -> Result<BTreeSet<Configuration>, CompileError> {
    let sig = &calc.model.signature;
    let m = &calc.machine;
    let bad = || CompileError::UndecodableConfig(format!("no reference reading of {config}"));
    let mut out = BTreeSet::new();
    match calc.kind {
        CalcKind::Lba | CalcKind::Ntm => {
            let (q, g, d) = config
                .explicit(&CalculatorModel::cell_var(0))
                .and_then(head_tuple)
                .ok_or_else(bad)?;
            let under = symbol_at(calc, config, d as i64, g).ok_or_else(bad)?;
            let window = index_window(calc, config);
            for mv in m.delta_f(q, &under) {
                let mut assign = vec![(CalculatorModel::cell_var(0), head_value(&mv.to, &mv.write, mv.d))];
                for &i in &window {
                    if i != 0 {
                        let s = symbol_at(calc, config, i + d as i64, g).ok_or_else(bad)?;
                        assign.push((CalculatorModel::cell_var(i), Value::Atom(s)));
                    }
                }
                out.insert(Configuration::new(sig, assign)?);
            }
        }
        CalcKind::Tm => {
            let q = config
                .explicit(&CalculatorModel::state_var())
                .and_then(Value::as_atom)
                .ok_or_else(bad)?;
            if m.is_final(q) {
                out.insert(config.clone());
                return Ok(out);
            }
            let alpha = read_cell(calc, config, 0)
                .and_then(|v| v.as_atom().cloned())
                .ok_or_else(bad)?;
            for t in m.delta(q, &alpha) {
                let mut assign = vec![(CalculatorModel::state_var(), Value::Atom(t.to.clone()))];
                for i in index_window(calc, config) {
                    let v = if (i == 1 && t.d == -1) || (i == -1 && t.d == 1) {
                        Value::Atom(t.write.clone())
                    } else {
                        read_cell(calc, config, i + t.d as i64).ok_or_else(bad)?
                    };
                    assign.push((CalculatorModel::cell_var(i), v));
                }
                out.insert(Configuration::new(sig, assign)?);
            }
        }
        CalcKind::Monolithic => {
            for v in reference_equation(calc, &CalculatorModel::whole_var(), config)? {
                out.insert(Configuration::new(sig, [(CalculatorModel::whole_var(), v)])?);
            }
        }
    }
    Ok(out)
}
