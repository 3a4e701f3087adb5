use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::config::Configuration;
use super::error::TsemError;
use super::signature::{IndexRange, Signature};
use super::value::{Range, Token, Value, VarId};

/// Row-level equation overrides: variable -> domain row -> output set.
pub type RowOverrides = BTreeMap<VarId, BTreeMap<Vec<Value>, BTreeSet<Value>>>;

/// A built-in parametric structural equation covering one or more variables
/// (typically a whole family). Inputs are passed in `domain(var)` order.
pub trait Rule: Send + Sync + fmt::Debug {
    fn kind(&self) -> &str;
    fn domain(&self, var: &VarId) -> Vec<VarId>;
    /// May return an empty set when the underlying transition relation is
    /// partial; such a configuration has no successors.
    fn eval(&self, var: &VarId, inputs: &[Value]) -> BTreeSet<Value>;
    fn describe(&self) -> serde_json::Value;
}

/// Assigns a direction label to a tree edge.
pub trait EdgeLabeler: Send + Sync + fmt::Debug {
    fn label(&self, parent: &Configuration, child: &Configuration) -> Option<i8>;
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub rows: BTreeMap<Vec<Value>, BTreeSet<Value>>,
}

#[derive(Clone, Debug)]
pub enum Equation {
    Table(Table),
    Rule(Arc<dyn Rule>),
}

impl PartialEq for Equation {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Equation::Table(a), Equation::Table(b)) => a == b,
            (Equation::Rule(a), Equation::Rule(b)) => a.describe() == b.describe(),
            _ => false,
        }
    }
}

/// A validation finding. Defects are reported as values, never as errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Defect {
    EmptyRange(VarId),
    DefaultNotInRange(Token),
    MissingEquation(Token),
    EquationForUnknown(Token),
    MissingDomain(VarId),
    UnknownDomainVariable { var: VarId, member: VarId },
    TableOnUnboundedFamily(Token),
    IncompleteTable { var: VarId, row: Vec<Value> },
    RowOutOfDomain { var: VarId, row: Vec<Value> },
    EmptyOutput { var: VarId, row: Vec<Value> },
    OutputOutOfRange { var: VarId, row: Vec<Value>, value: Value },
    TableTooLarge { var: VarId, rows: u128 },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::EmptyRange(v) => write!(f, "EmptyRange({v})"),
            Defect::DefaultNotInRange(n) => write!(f, "DefaultNotInRange({n})"),
            Defect::MissingEquation(n) => write!(f, "MissingEquation({n})"),
            Defect::EquationForUnknown(n) => write!(f, "EquationForUnknown({n})"),
            Defect::MissingDomain(v) => write!(f, "MissingDomain({v})"),
            Defect::UnknownDomainVariable { var, member } => {
                write!(f, "UnknownDomainVariable({var}, {member})")
            }
            Defect::TableOnUnboundedFamily(n) => write!(f, "TableOnUnboundedFamily({n})"),
            Defect::IncompleteTable { var, row } => write!(f, "IncompleteTable({var}, {})", fmt_row(row)),
            Defect::RowOutOfDomain { var, row } => write!(f, "RowOutOfDomain({var}, {})", fmt_row(row)),
            Defect::EmptyOutput { var, row } => write!(f, "EmptyOutput({var}, {})", fmt_row(row)),
            Defect::OutputOutOfRange { var, row, value } => {
                write!(f, "OutputOutOfRange({var}, {}, {value})", fmt_row(row))
            }
            Defect::TableTooLarge { var, rows } => write!(f, "TableTooLarge({var}, {rows})"),
        }
    }
}

fn fmt_row(row: &[Value]) -> String {
    let parts: Vec<String> = row.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(","))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub defects: Vec<Defect>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.defects.is_empty()
    }
}

const TABLE_ROW_LIMIT: u128 = 1 << 20;

/// A temporal structural equation model: a signature plus one equation per
/// declared variable (or family).
#[derive(Clone, Debug)]
pub struct Model {
    pub signature: Signature,
    equations: BTreeMap<Token, Equation>,
    patches: RowOverrides,
    labeler: Option<Arc<dyn EdgeLabeler>>,
    pub meta: serde_json::Value,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.equations == other.equations
            && self.patches == other.patches
            && self.meta == other.meta
    }
}

impl Model {
    pub fn new(signature: Signature) -> Self {
        Model {
            signature,
            equations: BTreeMap::new(),
            patches: BTreeMap::new(),
            labeler: None,
            meta: serde_json::Value::Null,
        }
    }

    pub fn set_equation(&mut self, name: &str, eq: Equation) {
        self.equations.insert(name.into(), eq);
    }

    pub fn equation(&self, name: &str) -> Option<&Equation> {
        self.equations.get(name)
    }

    pub fn equations(&self) -> &BTreeMap<Token, Equation> {
        &self.equations
    }

    pub fn set_labeler(&mut self, labeler: Arc<dyn EdgeLabeler>) {
        self.labeler = Some(labeler);
    }

    pub fn label(&self, parent: &Configuration, child: &Configuration) -> Option<i8> {
        self.labeler.as_ref().and_then(|l| l.label(parent, child))
    }

    pub fn patches(&self) -> &RowOverrides {
        &self.patches
    }

    /// A copy of this model whose equation for `var` returns `outputs` on `row`.
    pub fn with_row_override(&self, var: VarId, row: Vec<Value>, outputs: BTreeSet<Value>) -> Model {
        let mut m = self.clone();
        m.patches.entry(var).or_default().insert(row, outputs);
        m
    }

    pub fn is_deterministic_table(&self) -> bool {
        self.equations.values().all(|e| match e {
            Equation::Table(t) => t.rows.values().all(|o| o.len() == 1),
            Equation::Rule(_) => false,
        })
    }

    /// Domain of `var` in canonical order.
    pub fn domain(&self, var: &VarId) -> Result<Vec<VarId>, TsemError> {
        if !self.signature.contains(var) {
            return Err(TsemError::UnknownVariable(var.clone()));
        }
        match self.equations.get(&var.name) {
            Some(Equation::Rule(r)) => Ok(r.domain(var)),
            _ => self
                .signature
                .explicit_domain(var)
                .map(<[VarId]>::to_vec)
                .ok_or_else(|| TsemError::UnknownVariable(var.clone())),
        }
    }

    /// The domain row of `target` read from `config`.
    pub fn row_of(&self, target: &VarId, config: &Configuration) -> Result<Vec<Value>, TsemError> {
        self.domain(target)?
            .into_iter()
            .map(|d| {
                config
                    .value(&self.signature, &d)
                    .cloned()
                    .ok_or_else(|| TsemError::MissingDomainValue {
                        target: target.clone(),
                        missing: d,
                    })
            })
            .collect()
    }

    /// Evaluate the equation of `target` on an explicit domain row.
    pub fn eval_row(
        &self,
        target: &VarId,
        row: &[Value],
        rewrites: Option<&RowOverrides>,
    ) -> Result<BTreeSet<Value>, TsemError> {
        if let Some(out) = rewrites.and_then(|r| r.get(target)).and_then(|m| m.get(row)) {
            return Ok(out.clone());
        }
        if let Some(out) = self.patches.get(target).and_then(|m| m.get(row)) {
            return Ok(out.clone());
        }
        match self.equations.get(&target.name) {
            Some(Equation::Rule(r)) => Ok(r.eval(target, row)),
            Some(Equation::Table(t)) => t.rows.get(row).cloned().ok_or_else(|| TsemError::MissingRow {
                var: target.clone(),
                row: row.to_vec(),
            }),
            None => Err(TsemError::UnknownVariable(target.clone())),
        }
    }

    /// Apply the structural equation of `target` to `config` restricted to
    /// the domain of `target`.
    pub fn eval_equation(&self, target: &VarId, config: &Configuration) -> Result<BTreeSet<Value>, TsemError> {
        let row = self.row_of(target, config)?;
        self.eval_row(target, &row, None)
    }

    /// Variables whose next value must be computed for `config`: all single
    /// variables, every member of a bounded family, and for an unbounded
    /// family the window one index beyond the support (always covering
    /// index 0). Members outside the window keep the default.
    pub fn active_variables(&self, config: &Configuration) -> Vec<VarId> {
        let mut out = Vec::new();
        for d in self.signature.decls() {
            match &d.family {
                None => out.push(VarId {
                    name: d.name.clone(),
                    index: None,
                }),
                Some(f) => {
                    let (lo, hi) = match f.indices {
                        IndexRange::Bounded { lo, hi } => (lo, hi),
                        IndexRange::Unbounded => {
                            let (mut lo, mut hi) = (0i64, 0i64);
                            for i in config.support_indices(&d.name) {
                                lo = lo.min(i);
                                hi = hi.max(i);
                            }
                            (lo - 1, hi + 1)
                        }
                    };
                    out.extend((lo..=hi).map(|i| VarId::with_index(&d.name, i)));
                }
            }
        }
        out
    }

    /// All successors of `config` (the one-step relation).
    pub fn successors(&self, config: &Configuration) -> Result<BTreeSet<Configuration>, TsemError> {
        self.successors_with(config, &BTreeMap::new(), None)
    }

    /// Successors with some variables pinned to fixed values and optional
    /// row rewrites. Each variable picks one value from its own choice set,
    /// independently of the others.
    pub fn successors_with(
        &self,
        config: &Configuration,
        pins: &BTreeMap<VarId, Value>,
        rewrites: Option<&RowOverrides>,
    ) -> Result<BTreeSet<Configuration>, TsemError> {
        let mut vars = self.active_variables(config);
        for p in pins.keys() {
            if !vars.contains(p) {
                vars.push(p.clone());
            }
        }
        let mut choices: Vec<(VarId, Vec<Value>)> = Vec::with_capacity(vars.len());
        for v in vars {
            let opts: Vec<Value> = match pins.get(&v) {
                Some(p) => vec![p.clone()],
                None => {
                    let row = self.row_of(&v, config)?;
                    self.eval_row(&v, &row, rewrites)?.into_iter().collect()
                }
            };
            if opts.is_empty() {
                return Ok(BTreeSet::new());
            }
            choices.push((v, opts));
        }
        let mut out = BTreeSet::new();
        let mut idx = vec![0usize; choices.len()];
        loop {
            let assignment: BTreeMap<VarId, Value> = choices
                .iter()
                .zip(&idx)
                .map(|((v, opts), &i)| (v.clone(), opts[i].clone()))
                .collect();
            out.insert(Configuration::from_normalised(&self.signature, assignment));
            let mut pos = choices.len();
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < choices[pos].1.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

/// Check the side conditions of a model: non-empty finite ranges, one
/// equation per variable, domains over declared variables, and total tables
/// whose outputs are non-empty subsets of the target range.
pub fn validate_model(model: &Model) -> ValidationReport {
    let mut defects = Vec::new();
    let sig = &model.signature;
    for d in sig.decls() {
        let id = VarId {
            name: d.name.clone(),
            index: None,
        };
        if d.range.is_empty() {
            defects.push(Defect::EmptyRange(id.clone()));
        }
        if let Some(f) = &d.family {
            for (&i, r) in &f.index_ranges {
                if r.is_empty() {
                    defects.push(Defect::EmptyRange(VarId::with_index(&d.name, i)));
                }
            }
            if !d.range.contains(&f.default) {
                defects.push(Defect::DefaultNotInRange(d.name.clone()));
            }
        }
        match model.equations.get(&d.name) {
            None => defects.push(Defect::MissingEquation(d.name.clone())),
            Some(Equation::Rule(_)) => {}
            Some(Equation::Table(t)) => match &d.family {
                Some(f) => match f.indices {
                    IndexRange::Unbounded => defects.push(Defect::TableOnUnboundedFamily(d.name.clone())),
                    IndexRange::Bounded { lo, hi } => {
                        for i in lo..=hi {
                            check_table(model, &VarId::with_index(&d.name, i), t, &mut defects);
                        }
                    }
                },
                None => check_table(model, &id, t, &mut defects),
            },
        }
    }
    for name in model.equations.keys() {
        if sig.decl(name).is_none() {
            defects.push(Defect::EquationForUnknown(name.clone()));
        }
    }
    ValidationReport { defects }
}

fn check_table(model: &Model, var: &VarId, table: &Table, defects: &mut Vec<Defect>) {
    let sig = &model.signature;
    let Some(domain) = sig.explicit_domain(var) else {
        defects.push(Defect::MissingDomain(var.clone()));
        return;
    };
    let mut ranges: Vec<&Range> = Vec::new();
    for m in domain {
        match sig.range(m) {
            Some(r) => ranges.push(r),
            None => {
                defects.push(Defect::UnknownDomainVariable {
                    var: var.clone(),
                    member: m.clone(),
                });
                return;
            }
        }
    }
    let target_range = match sig.range(var) {
        Some(r) => r,
        None => return,
    };
    for (row, out) in &table.rows {
        if row.len() != ranges.len() || row.iter().zip(&ranges).any(|(v, r)| !r.contains(v)) {
            defects.push(Defect::RowOutOfDomain {
                var: var.clone(),
                row: row.clone(),
            });
        }
        if out.is_empty() {
            defects.push(Defect::EmptyOutput {
                var: var.clone(),
                row: row.clone(),
            });
        }
        for v in out {
            if !target_range.contains(v) {
                defects.push(Defect::OutputOutOfRange {
                    var: var.clone(),
                    row: row.clone(),
                    value: v.clone(),
                });
            }
        }
    }
    let total = ranges.iter().fold(1u128, |a, r| a.saturating_mul(r.size()));
    if total > TABLE_ROW_LIMIT {
        defects.push(Defect::TableTooLarge {
            var: var.clone(),
            rows: total,
        });
        return;
    }
    if ranges.iter().any(|r| r.is_empty()) {
        return;
    }
    let materialised: Vec<Vec<Value>> = ranges.iter().map(|r| r.iter().collect()).collect();
    let mut idx = vec![0usize; materialised.len()];
    loop {
        let row: Vec<Value> = idx.iter().zip(&materialised).map(|(&i, r)| r[i].clone()).collect();
        if !table.rows.contains_key(&row) {
            defects.push(Defect::IncompleteTable { var: var.clone(), row });
        }
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < materialised[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Convenience builder for table-driven models over single variables.
#[derive(Debug, Default)]
pub struct TableModelBuilder {
    sig: Signature,
    tables: BTreeMap<Token, Table>,
}

impl TableModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn variable(mut self, name: &str, range: Range) -> Self {
        self.sig.add_single(name, range);
        self.tables.entry(name.into()).or_default();
        self
    }

    pub fn domain(mut self, name: &str, domain: &[&str]) -> Self {
        self.sig
            .set_domain(VarId::single(name), domain.iter().map(|d| VarId::single(d)).collect());
        self
    }

    pub fn row(mut self, name: &str, row: Vec<Value>, out: impl IntoIterator<Item = Value>) -> Self {
        self.tables
            .entry(name.into())
            .or_default()
            .rows
            .insert(row, out.into_iter().collect());
        self
    }

    /// Fill every row of `name` with `f(row)`; the domain must be set first.
    pub fn fill(mut self, name: &str, f: impl Fn(&[Value]) -> Vec<Value>) -> Self {
        let var = VarId::single(name);
        let domain = self
            .sig
            .explicit_domain(&var)
            .map(<[VarId]>::to_vec)
            .unwrap_or_default();
        let ranges: Vec<Vec<Value>> = domain
            .iter()
            .map(|d| self.sig.range(d).map(|r| r.iter().collect()).unwrap_or_default())
            .collect();
        let mut rows: Vec<Vec<Value>> = vec![vec![]];
        for r in &ranges {
            rows = rows
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
        let table = self.tables.entry(name.into()).or_default();
        for row in rows {
            let out = f(&row);
            table.rows.insert(row, out.into_iter().collect());
        }
        self
    }

    pub fn build(self) -> Model {
        let mut m = Model::new(self.sig);
        for (name, t) in self.tables {
            m.set_equation(&name, Equation::Table(t));
        }
        m
    }
}
