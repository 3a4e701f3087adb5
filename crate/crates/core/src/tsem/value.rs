//! Tokens, values, variable identifiers and ranges.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// An interned symbol. Cheap to clone, ordered by its string content.
pub type Token = Arc<str>;

pub fn tok(s: &str) -> Token {
    Arc::from(s)
}

/// A value held by a variable: a single token or a fixed-arity tuple of tokens.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Atom(Token),
    Tuple(Arc<[Token]>),
}

impl Value {
    pub fn atom(s: &str) -> Self {
        Value::Atom(tok(s))
    }

    pub fn tuple<I, S>(parts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Value::Tuple(parts.into_iter().map(|p| tok(p.as_ref())).collect())
    }

    pub fn from_tokens(parts: Vec<Token>) -> Self {
        Value::Tuple(parts.into())
    }

    pub fn as_atom(&self) -> Option<&Token> {
        match self {
            Value::Atom(t) => Some(t),
            Value::Tuple(_) => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Token]> {
        match self {
            Value::Tuple(t) => Some(t),
            Value::Atom(_) => None,
        }
    }

    /// Component `pos` of a tuple value.
    pub fn component(&self, pos: usize) -> Option<&Token> {
        self.as_tuple().and_then(|t| t.get(pos))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(t) => f.write_str(t),
            Value::Tuple(parts) => {
                f.write_str("(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(p)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Variable identifier. `index` is present iff the variable belongs to an
/// indexed family, e.g. `X[-2]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId {
    pub name: Token,
    pub index: Option<i64>,
}

impl VarId {
    pub fn single(name: &str) -> Self {
        VarId {
            name: tok(name),
            index: None,
        }
    }

    pub fn member(name: &str, index: i64) -> Self {
        VarId {
            name: tok(name),
            index: Some(index),
        }
    }

    pub fn with_index(name: &Token, index: i64) -> Self {
        VarId {
            name: name.clone(),
            index: Some(index),
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            None => f.write_str(&self.name),
            Some(i) => write!(f, "{}[{}]", self.name, i),
        }
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The finite set of values a variable may take.
///
/// `Product` describes flat tuples whose i-th component ranges over the i-th
/// set; it is never materialised, so very large configuration ranges (the
/// single-variable LBA encoding) stay cheap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Range {
    Set(BTreeSet<Value>),
    Product(Vec<BTreeSet<Token>>),
}

impl Range {
    pub fn atoms<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Range::Set(items.into_iter().map(|s| Value::atom(s.as_ref())).collect())
    }

    pub fn contains(&self, v: &Value) -> bool {
        match self {
            Range::Set(s) => s.contains(v),
            Range::Product(parts) => match v.as_tuple() {
                Some(t) => t.len() == parts.len() && t.iter().zip(parts).all(|(c, p)| p.contains(c)),
                None => false,
            },
        }
    }

    /// Number of values, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        match self {
            Range::Set(s) => s.len() as u128,
            Range::Product(parts) => parts.iter().fold(1u128, |acc, p| acc.saturating_mul(p.len() as u128)),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// Values in canonical (sorted) order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = Value> + '_> {
        match self {
            Range::Set(s) => Box::new(s.iter().cloned()),
            Range::Product(parts) => Box::new(ProductIter::new(parts)),
        }
    }

    /// The `k`-th value in canonical order.
    pub fn nth(&self, k: u128) -> Option<Value> {
        match self {
            Range::Set(s) => s.iter().nth(usize::try_from(k).ok()?).cloned(),
            Range::Product(parts) => {
                if k >= self.size() {
                    return None;
                }
                let mut rem = k;
                let mut out: Vec<Token> = vec![tok(""); parts.len()];
                for (i, p) in parts.iter().enumerate().rev() {
                    let len = p.len() as u128;
                    let pick = (rem % len) as usize;
                    rem /= len;
                    out[i] = p.iter().nth(pick).cloned()?;
                }
                Some(Value::from_tokens(out))
            }
        }
    }
}

struct ProductIter<'a> {
    parts: Vec<Vec<&'a Token>>,
    idx: Vec<usize>,
    done: bool,
}

impl<'a> ProductIter<'a> {
    fn new(parts: &'a [BTreeSet<Token>]) -> Self {
        let parts: Vec<Vec<&Token>> = parts.iter().map(|p| p.iter().collect()).collect();
        let done = parts.iter().any(|p| p.is_empty());
        ProductIter {
            idx: vec![0; parts.len()],
            parts,
            done,
        }
    }
}

impl Iterator for ProductIter<'_> {
    type Item = Value;

    fn next(&mut self) -> Option<Value> {
        if self.done {
            return None;
        }
        let v = Value::from_tokens(self.idx.iter().zip(&self.parts).map(|(&i, p)| p[i].clone()).collect());
        // odometer, last component fastest
        let mut pos = self.parts.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.idx[pos] += 1;
            if self.idx[pos] < self.parts[pos].len() {
                break;
            }
            self.idx[pos] = 0;
        }
        Some(v)
    }
}
