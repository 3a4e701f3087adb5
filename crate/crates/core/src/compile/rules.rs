use std::collections::BTreeSet;
use std::sync::Arc;

use serde_json::json;

use crate::machines::Machine;
use crate::tsem::{tok, Configuration, EdgeLabeler, Rule, Token, Value, VarId};

pub(crate) const CELL: &str = "X";
pub(crate) const STATE: &str = "S";
pub(crate) const WHOLE: &str = "V";

pub(crate) fn dir_token(d: i8) -> Token {
    tok(&d.to_string())
}

pub(crate) fn parse_dir(t: &str) -> Option<i8> {
    match t {
        "-1" => Some(-1),
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    }
}

/// `(state, symbol, direction)` of a head tuple.
pub(crate) fn head_tuple(v: &Value) -> Option<(&Token, &Token, i8)> {
    match v.as_tuple()? {
        [q, g, d] => Some((q, g, parse_dir(d)?)),
        _ => None,
    }
}

pub(crate) fn head_value(q: &Token, g: &Token, d: i8) -> Value {
    Value::from_tokens(vec![q.clone(), g.clone(), dir_token(d)])
}

/// The shifted-tape equations shared by the LBA calculator (bounded by
/// `bound`) and the NTM calculator (unbounded). `X_0` carries
/// `(state, last written symbol, last move)`; every other `X_i` copies
/// `X_{i+d}`, reading the tuple's symbol when that is `X_0` and the blank
/// beyond the bound.
#[derive(Debug)]
pub(crate) struct ShiftRule {
    pub machine: Arc<Machine>,
    pub bound: Option<i64>,
}

impl ShiftRule {
    fn in_bounds(&self, j: i64) -> bool {
        self.bound.is_none_or(|b| (-b..=b).contains(&j))
    }
}

impl Rule for ShiftRule {
    fn kind(&self) -> &str {
        if self.bound.is_some() {
            "lba_calculator"
        } else {
            "ntm_calculator"
        }
    }

    fn domain(&self, var: &VarId) -> Vec<VarId> {
        let i = var.index.unwrap_or(0);
        let idx: BTreeSet<i64> = [0, i - 1, i, i + 1]
            .into_iter()
            .filter(|&j| self.in_bounds(j))
            .collect();
        idx.into_iter().map(|j| VarId::member(CELL, j)).collect()
    }

    fn eval(&self, var: &VarId, inputs: &[Value]) -> BTreeSet<Value> {
        let i = var.index.unwrap_or(0);
        let dom = self.domain(var);
        let at = |j: i64| dom.iter().position(|v| v.index == Some(j)).map(|p| &inputs[p]);
        let Some((q, g, d)) = at(0).and_then(head_tuple) else {
            return BTreeSet::new();
        };
        if i == 0 {
            let read = if d == 0 {
                g.clone()
            } else {
                match at(d as i64).and_then(Value::as_atom) {
                    Some(s) => s.clone(),
                    None => return BTreeSet::new(),
                }
            };
            return self
                .machine
                .delta_f(q, &read)
                .into_iter()
                .map(|m| head_value(&m.to, &m.write, m.d))
                .collect();
        }
        let j = i + d as i64;
        let v = if j == 0 {
            Value::Atom(g.clone())
        } else if !self.in_bounds(j) {
            Value::Atom(self.machine.blank().clone())
        } else {
            match at(j) {
                Some(v) => v.clone(),
                None => return BTreeSet::new(),
            }
        };
        [v].into_iter().collect()
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "rule": self.kind(),
            "bound": self.bound,
            "source_hash": self.machine.hash(),
        })
    }
}

/// Edge label of the shifted-tape calculators: the move recorded in the
/// child's head tuple.
#[derive(Debug)]
pub(crate) struct HeadLabeler;

impl EdgeLabeler for HeadLabeler {
    fn label(&self, _parent: &Configuration, child: &Configuration) -> Option<i8> {
        child
            .explicit(&VarId::member(CELL, 0))
            .and_then(head_tuple)
            .map(|(_, _, d)| d)
    }
}

/// The deterministic TM calculator: `S` follows `Out`, cells shift against
/// the head move, and `X_{-1}` / `X_1` receive the written symbol.
#[derive(Debug)]
pub(crate) struct TmRule {
    pub machine: Arc<Machine>,
}

impl Rule for TmRule {
    fn kind(&self) -> &str {
        "tm_calculator"
    }

    fn domain(&self, var: &VarId) -> Vec<VarId> {
        match var.index {
            None => vec![VarId::single(STATE), VarId::member(CELL, 0)],
            Some(i) => {
                let idx: BTreeSet<i64> = [0, i - 1, i, i + 1].into_iter().collect();
                std::iter::once(VarId::single(STATE))
                    .chain(idx.into_iter().map(|j| VarId::member(CELL, j)))
                    .collect()
            }
        }
    }

    fn eval(&self, var: &VarId, inputs: &[Value]) -> BTreeSet<Value> {
        let dom = self.domain(var);
        let get = |v: &VarId| dom.iter().position(|d| d == v).and_then(|p| inputs[p].as_atom());
        let (Some(q), Some(alpha)) = (get(&VarId::single(STATE)), get(&VarId::member(CELL, 0))) else {
            return BTreeSet::new();
        };
        let frozen = self.machine.is_final(q);
        let step = self.machine.delta_f(q, alpha).into_iter().next();
        let out = match var.index {
            None => match (&step, frozen) {
                (_, true) => q.clone(),
                (Some(m), false) => m.to.clone(),
                (None, false) => return BTreeSet::new(),
            },
            Some(i) => {
                let own = get(&VarId::member(CELL, i));
                let result = if frozen {
                    own
                } else {
                    match &step {
                        None => None,
                        Some(m) if m.d == -1 && i == 1 => Some(&m.write),
                        Some(m) if m.d == 1 && i == -1 => Some(&m.write),
                        Some(m) if m.d == -1 => get(&VarId::member(CELL, i - 1)),
                        Some(m) if m.d == 1 => get(&VarId::member(CELL, i + 1)),
                        Some(_) => None,
                    }
                };
                match result {
                    Some(t) => t.clone(),
                    None => return BTreeSet::new(),
                }
            }
        };
        [Value::Atom(out)].into_iter().collect()
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "rule": "tm_calculator",
            "source_hash": self.machine.hash(),
        })
    }
}

/// TM calculator edge label: the move the parent's transition makes, 0 in
/// a final state.
#[derive(Debug)]
pub(crate) struct TmLabeler {
    pub machine: Arc<Machine>,
}

impl EdgeLabeler for TmLabeler {
    fn label(&self, parent: &Configuration, _child: &Configuration) -> Option<i8> {
        let q = parent.explicit(&VarId::single(STATE))?.as_atom()?;
        let alpha = parent
            .explicit(&VarId::member(CELL, 0))
            .and_then(Value::as_atom)
            .unwrap_or(self.machine.blank());
        self.machine.delta_f(q, alpha).first().map(|m| m.d)
    }
}

/// Single-variable LBA encoding: `V = (q, j, C_0, .., C_{n+1})`.
#[derive(Debug)]
pub(crate) struct MonolithicRule {
    pub machine: Arc<Machine>,
    pub n: usize,
}

/// `(state, head, cells)` of a monolithic value.
pub(crate) fn unpack_whole(v: &Value, n: usize) -> Option<(&Token, usize, &[Token])> {
    let t = v.as_tuple()?;
    if t.len() != n + 4 {
        return None;
    }
    let j: usize = t[1].parse().ok()?;
    if j > n + 1 {
        return None;
    }
    Some((&t[0], j, &t[2..]))
}

pub(crate) fn pack_whole(q: &Token, j: usize, cells: &[Token]) -> Value {
    let mut parts = Vec::with_capacity(cells.len() + 2);
    parts.push(q.clone());
    parts.push(tok(&j.to_string()));
    parts.extend(cells.iter().cloned());
    Value::from_tokens(parts)
}

impl Rule for MonolithicRule {
    fn kind(&self) -> &str {
        "monolithic_lba"
    }

    fn domain(&self, _var: &VarId) -> Vec<VarId> {
        vec![VarId::single(WHOLE)]
    }

    fn eval(&self, _var: &VarId, inputs: &[Value]) -> BTreeSet<Value> {
        let Some((q, j, cells)) = inputs.first().and_then(|v| unpack_whole(v, self.n)) else {
            return BTreeSet::new();
        };
        self.machine
            .delta_f(q, &cells[j])
            .into_iter()
            .filter_map(|m| {
                let next = j as i64 + m.d as i64;
                if next < 0 || next > self.n as i64 + 1 {
                    return None;
                }
                let mut c = cells.to_vec();
                c[j] = m.write.clone();
                Some(pack_whole(&m.to, next as usize, &c))
            })
            .collect()
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "rule": "monolithic_lba",
            "n": self.n,
            "source_hash": self.machine.hash(),
        })
    }
}

#[derive(Debug)]
pub(crate) struct MonolithicLabeler {
    pub n: usize,
}

impl EdgeLabeler for MonolithicLabeler {
    fn label(&self, parent: &Configuration, child: &Configuration) -> Option<i8> {
        let v = VarId::single(WHOLE);
        let (_, a, _) = unpack_whole(parent.explicit(&v)?, self.n)?;
        let (_, b, _) = unpack_whole(child.explicit(&v)?, self.n)?;
        i8::try_from(b as i64 - a as i64).ok()
    }
}
