//! Text syntax for timed atoms, structure atoms, initial assignments,
//! variable patterns and step ranges.
//!
//! ```text
//! atom           := VAR "@" NAT "=" VALUE
//! structure atom := VAR "@" NAT "(" VAR "=" VALUE {"," VAR "=" VALUE} ")" "=" VALUE
//! VAR            := NAME ["[" INT "]"]
//! VALUE          := TOKEN | "(" TOKEN {"," TOKEN} ")"
//! ```
//!
//! Lists are comma-separated. Positions in errors are byte offsets.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::counterfactual::StructureAtom;
use crate::tsem::{tok, TimedAtom, Value, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {pos} in `{input}`: {msg}")]
pub struct SyntaxError {
    pub input: String,
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    s: &'a str,
    pos: usize,
}

fn is_token_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, ',' | '(' | ')' | '=' | '@' | '[' | ']')
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser { s, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            input: self.s.to_string(),
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.s[self.pos..].chars().next()
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.s.len()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(f) => self.err(format!("expected `{c}`, found `{f}`")),
                None => self.err(format!("expected `{c}`, found end of input")),
            }
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.s[start..self.pos]
    }

    fn name(&mut self) -> Result<&'a str, SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_alphabetic() || c == '_' => Ok(self.take_while(|c| c.is_alphanumeric() || c == '_')),
            _ => self.err("expected a variable name"),
        }
    }

    fn int(&mut self) -> Result<i64, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        let digits = self.take_while(|c| c.is_ascii_digit());
        if digits.is_empty() {
            self.pos = start;
            return self.err("expected an integer");
        }
        self.s[start..self.pos].parse().or_else(|_| {
            self.pos = start;
            self.err("integer out of range")
        })
    }

    fn nat(&mut self) -> Result<usize, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        if digits.is_empty() {
            return self.err("expected a step number");
        }
        digits.parse().or_else(|_| {
            self.pos = start;
            self.err("step out of range")
        })
    }

    fn var(&mut self) -> Result<VarId, SyntaxError> {
        let name = self.name()?;
        if self.eat('[') {
            let i = self.int()?;
            self.expect(']')?;
            Ok(VarId::member(name, i))
        } else {
            Ok(VarId::single(name))
        }
    }

    fn token(&mut self) -> Result<&'a str, SyntaxError> {
        self.skip_ws();
        let t = self.take_while(is_token_char);
        if t.is_empty() {
            return self.err("expected a value");
        }
        Ok(t)
    }

    fn value(&mut self) -> Result<Value, SyntaxError> {
        if self.eat('(') {
            let mut parts = vec![tok(self.token()?)];
            while self.eat(',') {
                parts.push(tok(self.token()?));
            }
            self.expect(')')?;
            Ok(Value::from_tokens(parts))
        } else {
            Ok(Value::Atom(tok(self.token()?)))
        }
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, SyntaxError>) -> Result<Vec<T>, SyntaxError> {
        let mut out = vec![item(self)?];
        while self.eat(',') {
            out.push(item(self)?);
        }
        if !self.at_end() {
            return self.err("expected `,` or end of input");
        }
        Ok(out)
    }
}

/// `X@1=5,Y[2]@0=(q,a,1)`.
pub fn parse_atoms(s: &str) -> Result<Vec<TimedAtom>, SyntaxError> {
    Parser::new(s).list(|p| {
        let var = p.var()?;
        p.expect('@')?;
        let step = p.nat()?;
        p.expect('=')?;
        Ok(TimedAtom::new(var, step, p.value()?))
    })
}

/// `X@2(X=0)=1,X@2(X=1)=1`.
pub fn parse_structure_atoms(s: &str) -> Result<Vec<StructureAtom>, SyntaxError> {
    Parser::new(s).list(|p| {
        let var = p.var()?;
        p.expect('@')?;
        let step = p.nat()?;
        p.expect('(')?;
        let mut row = BTreeMap::new();
        loop {
            let at = p.pos;
            let d = p.var()?;
            p.expect('=')?;
            let v = p.value()?;
            if row.insert(d.clone(), v).is_some() {
                p.pos = at;
                return p.err(format!("{d} appears twice in the row"));
            }
            if !p.eat(',') {
                break;
            }
        }
        p.expect(')')?;
        p.expect('=')?;
        Ok(StructureAtom {
            var,
            step,
            row,
            value: p.value()?,
        })
    })
}

/// `X=8,Y=0`.
pub fn parse_assignments(s: &str) -> Result<Vec<(VarId, Value)>, SyntaxError> {
    Parser::new(s).list(|p| {
        let var = p.var()?;
        p.expect('=')?;
        Ok((var, p.value()?))
    })
}

/// A variable selector: `X` (all members, or the single variable), `X[3]`
/// or `X[-2..5]` (inclusive).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarPattern {
    pub name: String,
    pub indices: Option<(i64, i64)>,
}

impl VarPattern {
    pub fn matches(&self, var: &VarId) -> bool {
        if *var.name != *self.name {
            return false;
        }
        match (self.indices, var.index) {
            (None, _) => true,
            (Some((lo, hi)), Some(i)) => lo <= i && i <= hi,
            (Some(_), None) => false,
        }
    }
}

impl fmt::Display for VarPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.indices {
            None => f.write_str(&self.name),
            Some((lo, hi)) if lo == hi => write!(f, "{}[{lo}]", self.name),
            Some((lo, hi)) => write!(f, "{}[{lo}..{hi}]", self.name),
        }
    }
}

pub fn parse_var_patterns(s: &str) -> Result<Vec<VarPattern>, SyntaxError> {
    Parser::new(s).list(|p| {
        let name = p.name()?.to_string();
        if !p.eat('[') {
            return Ok(VarPattern { name, indices: None });
        }
        let lo = p.int()?;
        let hi = if p.s[p.pos..].starts_with("..") {
            p.pos += 2;
            p.int()?
        } else {
            lo
        };
        if hi < lo {
            return p.err("empty index range");
        }
        p.expect(']')?;
        Ok(VarPattern {
            name,
            indices: Some((lo, hi)),
        })
    })
}

/// `T` or `A..B`, both inclusive.
pub fn parse_steps(s: &str) -> Result<RangeInclusive<usize>, SyntaxError> {
    let mut p = Parser::new(s);
    let a = p.nat()?;
    let b = if p.s[p.pos..].starts_with("..") {
        p.pos += 2;
        p.nat()?
    } else {
        a
    };
    if !p.at_end() {
        return p.err("expected end of input");
    }
    if b < a {
        return p.err("empty step range");
    }
    Ok(a..=b)
}

/// The outcome of a sweep or cause query: a conjunction of timed atoms, or
/// `accept@T`, acceptance of a compiled calculator at step `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutcomeSpec {
    Atoms(Vec<TimedAtom>),
    Accept { step: usize },
}

impl OutcomeSpec {
    pub fn step(&self) -> usize {
        match self {
            OutcomeSpec::Atoms(a) => a.iter().map(|a| a.step).max().unwrap_or(0),
            OutcomeSpec::Accept { step } => *step,
        }
    }
}

impl fmt::Display for OutcomeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeSpec::Atoms(a) => f.write_str(&format_atoms(a)),
            OutcomeSpec::Accept { step } => write!(f, "accept@{step}"),
        }
    }
}

pub fn parse_outcome(s: &str) -> Result<OutcomeSpec, SyntaxError> {
    let t = s.trim_start();
    if let Some(rest) = t.strip_prefix("accept@") {
        let offset = s.len() - rest.len();
        let mut p = Parser::new(s);
        p.pos = offset;
        let step = p.nat()?;
        if !p.at_end() {
            return p.err("expected end of input");
        }
        return Ok(OutcomeSpec::Accept { step });
    }
    parse_atoms(s).map(OutcomeSpec::Atoms)
}

pub fn format_atoms(atoms: &[TimedAtom]) -> String {
    atoms.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub fn format_structure_atom(a: &StructureAtom) -> String {
    let row: Vec<String> = a.row.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{}@{}({})={}", a.var, a.step, row.join(","), a.value)
}

pub fn format_structure_atoms(atoms: &[StructureAtom]) -> String {
    atoms.iter().map(format_structure_atom).collect::<Vec<_>>().join(",")
}
