use std::collections::BTreeMap;

use super::value::{Range, Token, Value, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexRange {
    Bounded { lo: i64, hi: i64 },
    Unbounded,
}

impl IndexRange {
    pub fn contains(&self, i: i64) -> bool {
        match *self {
            IndexRange::Bounded { lo, hi } => lo <= i && i <= hi,
            IndexRange::Unbounded => true,
        }
    }
}

/// An indexed family `X[i]`. Members not listed in a configuration hold
/// `default`. `index_ranges` overrides the shared range for specific indices
/// (the head variable `X[0]` of the calculators ranges over tuples).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyDecl {
    pub indices: IndexRange,
    pub default: Value,
    pub index_ranges: BTreeMap<i64, Range>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: Token,
    pub range: Range,
    pub family: Option<FamilyDecl>,
}

/// Variables, their ranges, and the explicit domains of table-driven
/// variables. Rule-driven variables compute their domains from the rule.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    decls: BTreeMap<Token, VarDecl>,
    domains: BTreeMap<VarId, Vec<VarId>>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_single(&mut self, name: &str, range: Range) -> VarId {
        let id = VarId::single(name);
        self.decls.insert(
            id.name.clone(),
            VarDecl {
                name: id.name.clone(),
                range,
                family: None,
            },
        );
        id
    }

    pub fn add_family(&mut self, name: &str, indices: IndexRange, range: Range, default: Value) {
        let name: Token = name.into();
        self.decls.insert(
            name.clone(),
            VarDecl {
                name,
                range,
                family: Some(FamilyDecl {
                    indices,
                    default,
                    index_ranges: BTreeMap::new(),
                }),
            },
        );
    }

    /// Give member `index` of family `name` its own range. No-op for singles.
    pub fn set_index_range(&mut self, name: &str, index: i64, range: Range) {
        if let Some(fam) = self.decls.get_mut(name).and_then(|d| d.family.as_mut()) {
            fam.index_ranges.insert(index, range);
        }
    }

    pub fn set_domain(&mut self, var: VarId, domain: Vec<VarId>) {
        self.domains.insert(var, domain);
    }

    pub fn explicit_domain(&self, var: &VarId) -> Option<&[VarId]> {
        self.domains.get(var).map(Vec::as_slice)
    }

    pub fn explicit_domains(&self) -> &BTreeMap<VarId, Vec<VarId>> {
        &self.domains
    }

    pub fn decl(&self, name: &str) -> Option<&VarDecl> {
        self.decls.get(name)
    }

    pub fn decls(&self) -> impl Iterator<Item = &VarDecl> {
        self.decls.values()
    }

    pub fn contains(&self, var: &VarId) -> bool {
        match (self.decls.get(&var.name), var.index) {
            (Some(d), None) => d.family.is_none(),
            (Some(d), Some(i)) => d.family.as_ref().is_some_and(|f| f.indices.contains(i)),
            (None, _) => false,
        }
    }

    pub fn range(&self, var: &VarId) -> Option<&Range> {
        if !self.contains(var) {
            return None;
        }
        let d = &self.decls[&var.name];
        match (&d.family, var.index) {
            (Some(f), Some(i)) => Some(f.index_ranges.get(&i).unwrap_or(&d.range)),
            _ => Some(&d.range),
        }
    }

    /// Family default for a family member, `None` for single variables.
    pub fn default_of(&self, var: &VarId) -> Option<&Value> {
        var.index?;
        self.decls
            .get(&var.name)
            .and_then(|d| d.family.as_ref())
            .map(|f| &f.default)
    }

    /// Whether every variable set is finite (no unbounded family).
    pub fn is_finite(&self) -> bool {
        self.decls.values().all(|d| {
            !matches!(
                d.family,
                Some(FamilyDecl {
                    indices: IndexRange::Unbounded,
                    ..
                })
            )
        })
    }
}
