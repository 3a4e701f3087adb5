use std::collections::BTreeMap;
use std::fmt;

use super::error::TsemError;
use super::signature::Signature;
use super::value::{Value, VarId};

/// A complete assignment of values to variables, stored with finite support:
/// family members equal to their family default are never stored, so two
/// configurations are equal iff they agree on every variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Configuration {
    values: BTreeMap<VarId, Value>,
}

impl Configuration {
    /// Build a configuration, checking membership and ranges and dropping
    /// family members that hold the default.
    pub fn new<I>(sig: &Signature, assignments: I) -> Result<Self, TsemError>
    where
        I: IntoIterator<Item = (VarId, Value)>,
    {
        let mut values = BTreeMap::new();
        for (var, value) in assignments {
            let range = sig.range(&var).ok_or_else(|| TsemError::UnknownVariable(var.clone()))?;
            if !range.contains(&value) {
                return Err(TsemError::OutOfRangeValue { var, value });
            }
            if sig.default_of(&var) == Some(&value) {
                values.remove(&var);
                continue;
            }
            values.insert(var, value);
        }
        let cfg = Configuration { values };
        cfg.check_complete(sig)?;
        Ok(cfg)
    }

    /// Normalise without range checks. Used on the hot path where values come
    /// straight out of equations.
    pub(crate) fn from_normalised(sig: &Signature, values: BTreeMap<VarId, Value>) -> Self {
        let values = values
            .into_iter()
            .filter(|(k, v)| sig.default_of(k) != Some(v))
            .collect();
        Configuration { values }
    }

    fn check_complete(&self, sig: &Signature) -> Result<(), TsemError> {
        for d in sig.decls() {
            if d.family.is_none() {
                let id = VarId {
                    name: d.name.clone(),
                    index: None,
                };
                if !self.values.contains_key(&id) {
                    return Err(TsemError::MissingValue(id));
                }
            } else if let Some(f) = &d.family {
                for (&i, r) in &f.index_ranges {
                    let id = VarId::with_index(&d.name, i);
                    if !r.contains(&f.default) && !self.values.contains_key(&id) {
                        return Err(TsemError::MissingValue(id));
                    }
                }
            }
        }
        Ok(())
    }

    /// Value of `var`, falling back to the family default.
    pub fn value<'a>(&'a self, sig: &'a Signature, var: &VarId) -> Option<&'a Value> {
        self.values.get(var).or_else(|| sig.default_of(var))
    }

    /// Explicitly stored value (the finite support plus single variables).
    pub fn explicit(&self, var: &VarId) -> Option<&Value> {
        self.values.get(var)
    }

    pub fn assignments(&self) -> impl Iterator<Item = (&VarId, &Value)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices of stored members of family `name`.
    pub fn support_indices<'a>(&'a self, name: &'a str) -> impl Iterator<Item = i64> + 'a {
        self.values
            .keys()
            .filter(move |k| &*k.name == name)
            .filter_map(|k| k.index)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
