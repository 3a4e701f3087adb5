use std::collections::BTreeMap;
use std::fmt;

use super::spec::{Machine, MachineKind, Move};
use super::MachineError;
use crate::tsem::Token;

/// Tape contents of a machine configuration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tape {
    /// Cells `C_0 .. C_{n+1}` (endmarkers included) and the absolute head
    /// position.
    Bounded { cells: Vec<Token>, head: usize },
    /// Cells indexed relative to the head, which is always at index 0. Only
    /// non-blank cells are stored.
    Relative { cells: BTreeMap<i64, Token>, blank: Token },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MachineConfig {
    pub state: Token,
    pub tape: Tape,
}

impl MachineConfig {
    /// Symbol under the head.
    pub fn head_symbol(&self) -> &Token {
        match &self.tape {
            Tape::Bounded { cells, head } => &cells[*head],
            Tape::Relative { cells, blank } => cells.get(&0).unwrap_or(blank),
        }
    }

    /// Cell `k`: absolute for a bounded tape, head-relative otherwise.
    /// Outside a bounded tape there is no cell.
    pub fn cell(&self, k: i64) -> Option<&Token> {
        match &self.tape {
            Tape::Bounded { cells, .. } => usize::try_from(k).ok().and_then(|i| cells.get(i)),
            Tape::Relative { cells, blank } => Some(cells.get(&k).unwrap_or(blank)),
        }
    }

    /// Absolute head position of a bounded tape.
    pub fn head(&self) -> Option<usize> {
        match &self.tape {
            Tape::Bounded { head, .. } => Some(*head),
            Tape::Relative { .. } => None,
        }
    }

    /// Smallest and largest non-blank head-relative index (relative tapes),
    /// or the tape bounds.
    pub fn extent(&self) -> (i64, i64) {
        match &self.tape {
            Tape::Bounded { cells, .. } => (0, cells.len() as i64 - 1),
            Tape::Relative { cells, .. } => (
                cells.keys().next().copied().unwrap_or(0).min(0),
                cells.keys().next_back().copied().unwrap_or(0).max(0),
            ),
        }
    }

    /// The successor reached by `mv`. Relative tapes are re-centred so the
    /// head stays at index 0.
    pub fn apply(&self, mv: &Move) -> Result<MachineConfig, MachineError> {
        let tape = match &self.tape {
            Tape::Bounded { cells, head } => {
                let mut cells = cells.clone();
                cells[*head] = mv.write.clone();
                let next = *head as i64 + mv.d as i64;
                if next < 0 || next >= cells.len() as i64 {
                    return Err(MachineError::MalformedConfig(format!("head leaves the tape at {next}")));
                }
                Tape::Bounded {
                    cells,
                    head: next as usize,
                }
            }
            Tape::Relative { cells, blank } => {
                let mut written = cells.clone();
                if &mv.write == blank {
                    written.remove(&0);
                } else {
                    written.insert(0, mv.write.clone());
                }
                let d = mv.d as i64;
                Tape::Relative {
                    cells: written.into_iter().map(|(k, v)| (k - d, v)).collect(),
                    blank: blank.clone(),
                }
            }
        };
        Ok(MachineConfig {
            state: mv.to.clone(),
            tape,
        })
    }
}

impl fmt::Display for MachineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.tape {
            Tape::Bounded { cells, head } => {
                for (i, c) in cells.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    if i == *head {
                        write!(f, "[{}]", self.state)?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            Tape::Relative { .. } => {
                let (lo, hi) = self.extent();
                for k in lo..=hi {
                    if k > lo {
                        f.write_str(" ")?;
                    }
                    if k == 0 {
                        write!(f, "[{}]", self.state)?;
                    }
                    write!(f, "{}", self.cell(k).expect("relative tapes are total"))?;
                }
                Ok(())
            }
        }
    }
}

/// One application of the final-closed transition relation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepResult {
    pub config: MachineConfig,
    /// Symbol read by the transition.
    pub read: Token,
    pub mv: Move,
}

impl StepResult {
    pub fn label(&self) -> i8 {
        self.mv.d
    }
}

/// The initial configuration for `input`. LBAs need a tape length `n` with
/// `|input| <= n`; the head starts on the left endmarker. TM and NTM tapes
/// start with the head on the first input symbol.
pub fn initial_machine_config(
    machine: &Machine,
    input: &[Token],
    tape_len: Option<usize>,
) -> Result<MachineConfig, MachineError> {
    for (pos, s) in input.iter().enumerate() {
        if !machine.input_alphabet().contains(s) {
            return Err(MachineError::InputNotInAlphabet {
                symbol: s.to_string(),
                pos,
            });
        }
    }
    let tape = match machine.kind() {
        MachineKind::Lba => {
            let n = tape_len.ok_or(MachineError::TapeLengthRequired)?;
            if n == 0 {
                return Err(MachineError::TapeLengthRequired);
            }
            if input.len() > n {
                return Err(MachineError::InputTooLong { len: input.len(), n });
            }
            let (l, r) = machine.markers().expect("validated LBA has markers");
            let mut cells = Vec::with_capacity(n + 2);
            cells.push(l.clone());
            cells.extend(input.iter().cloned());
            cells.resize(n + 1, machine.blank().clone());
            cells.push(r.clone());
            Tape::Bounded { cells, head: 0 }
        }
        MachineKind::Tm | MachineKind::Ntm => Tape::Relative {
            cells: input.iter().enumerate().map(|(i, s)| (i as i64, s.clone())).collect(),
            blank: machine.blank().clone(),
        },
    };
    Ok(MachineConfig {
        state: machine.initial().clone(),
        tape,
    })
}

/// Check that `config` fits `machine`: known state, tape symbols in the
/// alphabet, endmarkers in place and the head on the tape.
pub fn check_machine_config(machine: &Machine, config: &MachineConfig) -> Result<(), MachineError> {
    if !machine.states().contains(&config.state) {
        return Err(MachineError::MalformedConfig(format!("unknown state {}", config.state)));
    }
    let gamma = machine.tape_alphabet();
    match (&config.tape, machine.kind()) {
        (Tape::Bounded { cells, head }, MachineKind::Lba) => {
            let (l, r) = machine.markers().expect("validated LBA has markers");
            if cells.len() < 3 || &cells[0] != l || cells.last() != Some(r) {
                return Err(MachineError::MalformedConfig("endmarkers out of place".into()));
            }
            if *head >= cells.len() {
                return Err(MachineError::MalformedConfig(format!("head {head} off the tape")));
            }
            if let Some(c) = cells.iter().find(|c| !gamma.contains(*c)) {
                return Err(MachineError::MalformedConfig(format!(
                    "symbol {c} not in the tape alphabet"
                )));
            }
        }
        (Tape::Relative { cells, blank }, MachineKind::Tm | MachineKind::Ntm) => {
            if blank != machine.blank() {
                return Err(MachineError::MalformedConfig("blank mismatch".into()));
            }
            if let Some(c) = cells.values().find(|c| !gamma.contains(*c) || *c == blank) {
                return Err(MachineError::MalformedConfig(format!(
                    "stored cell {c} is blank or unknown"
                )));
            }
        }
        _ => {
            return Err(MachineError::MalformedConfig(
                "tape shape does not match machine kind".into(),
            ))
        }
    }
    Ok(())
}

/// All successors of `config` under the final-closed transition relation,
/// in canonical order. Final states loop with move 0.
pub fn machine_step(machine: &Machine, config: &MachineConfig) -> Result<Vec<StepResult>, MachineError> {
    check_machine_config(machine, config)?;
    let read = config.head_symbol().clone();
    let moves = machine.delta_f(&config.state, &read);
    if moves.is_empty() {
        return Err(MachineError::StuckConfiguration {
            state: config.state.to_string(),
            symbol: read.to_string(),
        });
    }
    let mut out = moves
        .into_iter()
        .map(|mv| {
            Ok(StepResult {
                config: config.apply(&mv)?,
                read: read.clone(),
                mv,
            })
        })
        .collect::<Result<Vec<_>, MachineError>>()?;
    out.sort_by(|a, b| (a.mv.d, &a.config).cmp(&(b.mv.d, &b.config)));
    out.dedup_by(|a, b| a.mv.d == b.mv.d && a.config == b.config);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::{MachineSpec, Transition};
    use crate::tsem::tok;

    fn tr(from: &str, read: &str, to: &str, write: &str, mv: i8) -> Transition {
        Transition {
            from: from.into(),
            read: read.into(),
            to: to.into(),
            write: write.into(),
            mv,
        }
    }

    fn alternation_tm() -> Machine {
        let mut transitions = vec![
            tr("q_start", "0", "q_even", "0", 1),
            tr("q_start", "1", "q_odd", "1", 1),
            tr("q_start", "#", "q_rej", "#", 1),
            tr("q_even", "1", "q_odd", "1", 1),
            tr("q_even", "0", "q_rej", "0", 1),
            tr("q_even", "#", "q_acc", "#", -1),
            tr("q_odd", "0", "q_even", "0", 1),
            tr("q_odd", "1", "q_rej", "1", 1),
            tr("q_odd", "#", "q_acc", "#", -1),
        ];
        for g in ["0", "1", "#"] {
            transitions.push(tr("q_rej", g, "q_loop", g, 1));
            transitions.push(tr("q_loop", g, "q_rej", g, -1));
        }
        Machine::new(MachineSpec {
            kind: MachineKind::Tm,
            states: ["q_start", "q_even", "q_odd", "q_acc", "q_rej", "q_loop"]
                .map(String::from)
                .to_vec(),
            initial: "q_start".into(),
            finals: vec!["q_acc".into()],
            input_alphabet: vec!["0".into(), "1".into()],
            blank: "#".into(),
            left_marker: None,
            right_marker: None,
            transitions,
        })
        .unwrap()
    }

    #[test]
    fn lba_initial_layout() {
        let m = Machine::new(MachineSpec {
            kind: MachineKind::Lba,
            states: vec!["q0".into()],
            initial: "q0".into(),
            finals: vec![],
            input_alphabet: vec!["a".into(), "b".into()],
            blank: "#".into(),
            left_marker: Some(">".into()),
            right_marker: Some("<".into()),
            transitions: vec![],
        })
        .unwrap();
        let input = m.parse_input("ab").unwrap();
        let c = initial_machine_config(&m, &input, Some(4)).unwrap();
        assert_eq!(c.to_string(), "[q0]> a b # # <");
        assert_eq!(c.head(), Some(0));
        assert_eq!(
            initial_machine_config(&m, &input, Some(1)),
            Err(MachineError::InputTooLong { len: 2, n: 1 })
        );
        assert!(matches!(
            machine_step(&m, &c),
            Err(MachineError::StuckConfiguration { .. })
        ));
    }

    #[test]
    fn tm_step_recentres() {
        let m = alternation_tm();
        let c = initial_machine_config(&m, &m.parse_input("01").unwrap(), None).unwrap();
        let steps = machine_step(&m, &c).unwrap();
        assert_eq!(steps.len(), 1);
        let next = &steps[0].config;
        assert_eq!(next.state, tok("q_even"));
        assert_eq!(next.cell(-1), Some(&tok("0")));
        assert_eq!(next.head_symbol(), &tok("1"));
        assert_eq!(next.to_string(), "0 [q_even]1");
    }

    #[test]
    fn empty_tm_input_is_all_blank() {
        let m = alternation_tm();
        let c = initial_machine_config(&m, &[], None).unwrap();
        assert_eq!(c.head_symbol(), &tok("#"));
        assert_eq!(c.extent(), (0, 0));
    }

    #[test]
    fn final_configs_are_fixpoints() {
        let m = alternation_tm();
        let mut c = initial_machine_config(&m, &m.parse_input("0").unwrap(), None).unwrap();
        c.state = tok("q_acc");
        let steps = machine_step(&m, &c).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].config, c);
        assert_eq!(steps[0].label(), 0);
    }
}
