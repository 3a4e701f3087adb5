use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::MachineError;
use crate::tsem::{tok, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MachineKind {
    Lba,
    Tm,
    Ntm,
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MachineKind::Lba => "lba",
            MachineKind::Tm => "tm",
            MachineKind::Ntm => "ntm",
        })
    }
}

/// One transition record `(from, read) -> (to, write, move)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub from: String,
    pub read: String,
    pub to: String,
    pub write: String,
    #[serde(rename = "move")]
    pub mv: i8,
}

/// Machine description as written in a machine file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpec {
    pub kind: MachineKind,
    pub states: Vec<String>,
    pub initial: String,
    pub finals: Vec<String>,
    pub input_alphabet: Vec<String>,
    #[serde(default = "default_blank")]
    pub blank: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_marker: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_marker: Option<String>,
    pub transitions: Vec<Transition>,
}

fn default_blank() -> String {
    "#".to_string()
}

/// The image tuple `(q', write, d)` of a transition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move {
    pub to: Token,
    pub write: Token,
    pub d: i8,
}

/// A validated machine with its transition relation indexed by
/// `(state, symbol)`.
#[derive(Clone, Debug)]
pub struct Machine {
    spec: MachineSpec,
    states: BTreeSet<Token>,
    initial: Token,
    finals: BTreeSet<Token>,
    sigma: BTreeSet<Token>,
    gamma: BTreeSet<Token>,
    blank: Token,
    markers: Option<(Token, Token)>,
    delta: BTreeMap<(Token, Token), Vec<Move>>,
    hash: String,
}

impl PartialEq for Machine {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Machine {}

impl Machine {
    pub fn new(spec: MachineSpec) -> Result<Self, MachineError> {
        let all_symbols = spec
            .states
            .iter()
            .chain([&spec.initial, &spec.blank])
            .chain(&spec.finals)
            .chain(&spec.input_alphabet)
            .chain(spec.left_marker.iter())
            .chain(spec.right_marker.iter());
        for s in all_symbols {
            if s.is_empty() {
                return Err(MachineError::EmptySymbol);
            }
        }
        let mut states = BTreeSet::new();
        for s in &spec.states {
            if !states.insert(tok(s)) {
                return Err(MachineError::DuplicateState(s.clone()));
            }
        }
        if states.is_empty() {
            return Err(MachineError::NoStates);
        }
        let known = |s: &str| -> Result<Token, MachineError> {
            let t = tok(s);
            if states.contains(&t) {
                Ok(t)
            } else {
                Err(MachineError::UnknownState(s.to_string()))
            }
        };
        let initial = known(&spec.initial)?;
        let finals: BTreeSet<Token> = spec.finals.iter().map(|s| known(s)).collect::<Result<_, _>>()?;
        let blank = tok(&spec.blank);
        let sigma: BTreeSet<Token> = spec.input_alphabet.iter().map(|s| tok(s)).collect();
        if sigma.contains(&blank) {
            return Err(MachineError::ReservedInInput(spec.blank.clone()));
        }
        let markers = match (spec.kind, &spec.left_marker, &spec.right_marker) {
            (MachineKind::Lba, Some(l), Some(r)) => {
                let (l, r) = (tok(l), tok(r));
                if l == r || l == blank || r == blank {
                    return Err(MachineError::MarkerClash);
                }
                for m in [&l, &r] {
                    if sigma.contains(m) {
                        return Err(MachineError::ReservedInInput(m.to_string()));
                    }
                }
                Some((l, r))
            }
            (MachineKind::Lba, _, _) => return Err(MachineError::MissingMarkers),
            (_, None, None) => None,
            (kind, _, _) => return Err(MachineError::UnexpectedMarkers(kind)),
        };
        let mut gamma = sigma.clone();
        gamma.insert(blank.clone());
        if let Some((l, r)) = &markers {
            gamma.insert(l.clone());
            gamma.insert(r.clone());
        }

        let mut delta: BTreeMap<(Token, Token), Vec<Move>> = BTreeMap::new();
        for t in &spec.transitions {
            let from = known(&t.from)?;
            let to = known(&t.to)?;
            for s in [&t.read, &t.write] {
                if !gamma.contains(s.as_str()) {
                    return Err(MachineError::UnknownSymbol(s.clone()));
                }
            }
            if finals.contains(&from) {
                return Err(MachineError::TransitionFromFinal(t.from.clone()));
            }
            let allowed: &[i8] = match spec.kind {
                MachineKind::Tm => &[-1, 1],
                _ => &[-1, 0, 1],
            };
            if !allowed.contains(&t.mv) {
                return Err(MachineError::BadMove {
                    mv: t.mv,
                    kind: spec.kind,
                });
            }
            if let Some((l, r)) = &markers {
                let read = t.read.as_str();
                if (read == &**l && (t.write != t.read || t.mv == -1))
                    || (read == &**r && (t.write != t.read || t.mv == 1))
                {
                    return Err(MachineError::EndmarkerViolation(t.clone()));
                }
            }
            let entry = delta.entry((from, tok(&t.read))).or_default();
            let mv = Move {
                to,
                write: tok(&t.write),
                d: t.mv,
            };
            if !entry.contains(&mv) {
                entry.push(mv);
            }
        }
        for moves in delta.values_mut() {
            moves.sort();
        }
        if spec.kind == MachineKind::Tm {
            for q in states.difference(&finals) {
                for g in &gamma {
                    match delta.get(&(q.clone(), g.clone())).map(Vec::len) {
                        Some(1) => {}
                        Some(_) => {
                            return Err(MachineError::NondeterministicDelta {
                                state: q.to_string(),
                                symbol: g.to_string(),
                            })
                        }
                        None => {
                            return Err(MachineError::PartialDelta {
                                state: q.to_string(),
                                symbol: g.to_string(),
                            })
                        }
                    }
                }
            }
        }
        let hash = spec_hash(&spec);
        Ok(Machine {
            spec,
            states,
            initial,
            finals,
            sigma,
            gamma,
            blank,
            markers,
            delta,
            hash,
        })
    }

    pub fn spec(&self) -> &MachineSpec {
        &self.spec
    }

    pub fn kind(&self) -> MachineKind {
        self.spec.kind
    }

    pub fn states(&self) -> &BTreeSet<Token> {
        &self.states
    }

    pub fn initial(&self) -> &Token {
        &self.initial
    }

    pub fn finals(&self) -> &BTreeSet<Token> {
        &self.finals
    }

    pub fn is_final(&self, q: &str) -> bool {
        self.finals.contains(q)
    }

    pub fn input_alphabet(&self) -> &BTreeSet<Token> {
        &self.sigma
    }

    /// Tape alphabet: input symbols, the blank and (LBA) both endmarkers.
    pub fn tape_alphabet(&self) -> &BTreeSet<Token> {
        &self.gamma
    }

    pub fn blank(&self) -> &Token {
        &self.blank
    }

    /// `(left, right)` endmarkers of an LBA.
    pub fn markers(&self) -> Option<(&Token, &Token)> {
        self.markers.as_ref().map(|(l, r)| (l, r))
    }

    /// Raw transition relation entries for `(q, gamma)`.
    pub fn delta(&self, q: &str, gamma: &str) -> &[Move] {
        self.delta.get(&(tok(q), tok(gamma))).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The transition relation closed under final-state self loops:
    /// `{(q, gamma, 0)}` for final `q`, the transitions of `(q, gamma)` otherwise.
    pub fn delta_f(&self, q: &Token, gamma: &Token) -> Vec<Move> {
        if self.finals.contains(q) {
            vec![Move {
                to: q.clone(),
                write: gamma.clone(),
                d: 0,
            }]
        } else {
            self.delta.get(&(q.clone(), gamma.clone())).cloned().unwrap_or_default()
        }
    }

    pub fn max_branching(&self) -> usize {
        self.delta.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Hex SHA-256 of the canonical JSON form of the spec.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// Split an input string into tape symbols: on commas or whitespace when
    /// present, otherwise one symbol per character.
    pub fn parse_input(&self, input: &str) -> Result<Vec<Token>, MachineError> {
        let parts: Vec<&str> = if input.contains([',', ' ', '\t']) {
            input.split([',', ' ', '\t']).filter(|s| !s.is_empty()).collect()
        } else {
            input.char_indices().map(|(i, c)| &input[i..i + c.len_utf8()]).collect()
        };
        parts
            .into_iter()
            .enumerate()
            .map(|(pos, s)| {
                let t = tok(s);
                if self.sigma.contains(&t) {
                    Ok(t)
                } else {
                    Err(MachineError::InputNotInAlphabet {
                        symbol: s.to_string(),
                        pos,
                    })
                }
            })
            .collect()
    }
}

fn spec_hash(spec: &MachineSpec) -> String {
    let bytes = serde_json::to_vec(spec).expect("machine spec serialises");
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(from: &str, read: &str, to: &str, write: &str, mv: i8) -> Transition {
        Transition {
            from: from.into(),
            read: read.into(),
            to: to.into(),
            write: write.into(),
            mv,
        }
    }

    fn lba(transitions: Vec<Transition>) -> MachineSpec {
        MachineSpec {
            kind: MachineKind::Lba,
            states: vec!["s".into(), "f".into()],
            initial: "s".into(),
            finals: vec!["f".into()],
            input_alphabet: vec!["a".into()],
            blank: "#".into(),
            left_marker: Some(">".into()),
            right_marker: Some("<".into()),
            transitions,
        }
    }

    #[test]
    fn endmarker_constraints() {
        assert!(Machine::new(lba(vec![t("s", ">", "s", ">", 1)])).is_ok());
        assert!(matches!(
            Machine::new(lba(vec![t("s", ">", "s", ">", -1)])),
            Err(MachineError::EndmarkerViolation(_))
        ));
        assert!(matches!(
            Machine::new(lba(vec![t("s", "<", "s", "a", -1)])),
            Err(MachineError::EndmarkerViolation(_))
        ));
        assert!(matches!(
            Machine::new(lba(vec![t("f", "a", "s", "a", 0)])),
            Err(MachineError::TransitionFromFinal(_))
        ));
    }

    #[test]
    fn tm_delta_must_be_total_function() {
        let mut spec = MachineSpec {
            kind: MachineKind::Tm,
            states: vec!["s".into(), "f".into()],
            initial: "s".into(),
            finals: vec!["f".into()],
            input_alphabet: vec!["1".into()],
            blank: "#".into(),
            left_marker: None,
            right_marker: None,
            transitions: vec![t("s", "1", "f", "1", 1)],
        };
        assert!(matches!(
            Machine::new(spec.clone()),
            Err(MachineError::PartialDelta { .. })
        ));
        spec.transitions.push(t("s", "#", "f", "#", 0));
        assert!(matches!(Machine::new(spec.clone()), Err(MachineError::BadMove { .. })));
        spec.transitions.pop();
        spec.transitions.push(t("s", "#", "f", "#", 1));
        spec.transitions.push(t("s", "#", "s", "#", 1));
        assert!(matches!(
            Machine::new(spec.clone()),
            Err(MachineError::NondeterministicDelta { .. })
        ));
        spec.transitions.pop();
        let m = Machine::new(spec).unwrap();
        assert_eq!(m.tape_alphabet().len(), 2);
        assert_eq!(m.hash().len(), 64);
    }

    #[test]
    fn delta_f_loops_on_finals() {
        let m = Machine::new(lba(vec![t("s", "a", "f", "a", 1), t("s", "a", "s", "#", 0)])).unwrap();
        assert_eq!(m.delta_f(&tok("s"), &tok("a")).len(), 2);
        assert_eq!(
            m.delta_f(&tok("f"), &tok("a")),
            vec![Move {
                to: tok("f"),
                write: tok("a"),
                d: 0
            }]
        );
        assert!(m.delta_f(&tok("s"), &tok("#")).is_empty());
    }

    #[test]
    fn input_parsing() {
        let m = Machine::new(lba(vec![])).unwrap();
        assert_eq!(m.parse_input("aa").unwrap().len(), 2);
        assert_eq!(m.parse_input("").unwrap().len(), 0);
        assert_eq!(m.parse_input("a, a").unwrap().len(), 2);
        assert_eq!(
            m.parse_input("ab"),
            Err(MachineError::InputNotInAlphabet {
                symbol: "b".into(),
                pos: 1
            })
        );
    }
}
