//! Compilation of flat programs to VASS reachability instances.
//!
//! One state per line, named `L<line>` with zero padding so that state order
//! is line order. Untested counters at the halt are drained by a chain of
//! extra states `L<halt>~<counter>`, each carrying one decrementing self-loop;
//! the target is the last state of the chain.

use num_bigint::BigInt;
use serde::Serialize;

use super::expand::{FlatCommand, FlatProgram};
use crate::vass::{Configuration, StateId, Transition, Vass, VassError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Drain {
    pub counter: usize,
    pub state: StateId,
    /// Zero transition into `state`.
    pub enter: usize,
    /// Self-loop decrementing `counter`.
    pub decrement: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compiled {
    pub vass: Vass,
    pub line_states: Vec<StateId>,
    pub halt_line: usize,
    /// Transition indices leaving each line: one per successor, in the order
    /// the command lists them (`goto a or b` gives `[a, b]`).
    pub line_moves: Vec<Vec<usize>>,
    pub drains: Vec<Drain>,
}

impl Compiled {
    pub fn halt_state(&self) -> &str {
        &self.line_states[self.halt_line]
    }

    pub fn line_of_state(&self, s: &str) -> Option<usize> {
        self.line_states.binary_search_by(|x| x.as_str().cmp(s)).ok()
    }
}

pub fn state_name(line: usize, lines: usize) -> StateId {
    let width = lines.to_string().len();
    format!("L{:0width$}", line + 1)
}

/// Compile a complete flat program. Panics on a malformed program, which
/// `expand` never produces.
pub fn compile(p: &FlatProgram) -> Result<Compiled, VassError> {
    let n = p.commands.len();
    let d = p.counters.len();
    let names: Vec<StateId> = (0..n).map(|i| state_name(i, n)).collect();
    let zero = vec![BigInt::from(0); d];
    let halt_line = n - 1;
    assert!(matches!(p.commands[halt_line], FlatCommand::Halt(_)));

    let mut raw_moves: Vec<Vec<Transition>> = Vec::with_capacity(n);
    for (i, c) in p.commands.iter().enumerate() {
        let moves = match c {
            FlatCommand::Init => vec![Transition::new(names[i].clone(), zero.clone(), names[i + 1].clone())],
            FlatCommand::Update(_) => {
                vec![Transition::new(names[i].clone(), p.delta(i), names[i + 1].clone())]
            }
            FlatCommand::Goto(a, b) => vec![
                Transition::new(names[i].clone(), zero.clone(), names[*a].clone()),
                Transition::new(names[i].clone(), zero.clone(), names[*b].clone()),
            ],
            FlatCommand::Halt(_) => vec![],
        };
        raw_moves.push(moves);
    }

    let mut states = names.clone();
    let mut drain_raw = Vec::new();
    let mut prev = names[halt_line].clone();
    for c in p.untested() {
        let s = format!("{}~{}", names[halt_line], p.counters[c]);
        let mut dec = zero.clone();
        dec[c] = BigInt::from(-1);
        let enter = Transition::new(prev.clone(), zero.clone(), s.clone());
        let loop_t = Transition::new(s.clone(), dec, s.clone());
        drain_raw.push((c, s.clone(), enter, loop_t));
        states.push(s.clone());
        prev = s;
    }

    let all = raw_moves
        .iter()
        .flatten()
        .cloned()
        .chain(drain_raw.iter().flat_map(|(_, _, a, b)| [a.clone(), b.clone()]));
    let vass = Vass::new(
        d,
        states,
        all.collect::<Vec<_>>(),
        Configuration::new(names[0].clone(), zero.clone()),
        Configuration::new(prev, zero),
    )?;
    let idx = |t: &Transition| vass.transition_index(t).expect("transition present");
    let line_moves = raw_moves
        .iter()
        .map(|ms| ms.iter().map(idx).collect())
        .collect();
    let drains = drain_raw
        .iter()
        .map(|(c, s, a, b)| Drain {
            counter: *c,
            state: s.clone(),
            enter: idx(a),
            decrement: idx(b),
        })
        .collect();
    Ok(Compiled {
        vass,
        line_states: names,
        halt_line,
        line_moves,
        drains,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{expand::expand, parser::parse};
    use super::*;
    use crate::vass::is_flat;

    fn build(src: &str) -> Compiled {
        compile(&expand(&parse(src).unwrap()).unwrap().program).unwrap()
    }

    #[test]
    fn init_halt() {
        let c = build("counters x\ninit\nhalt x");
        assert_eq!(c.vass.states, vec!["L1", "L2"]);
        assert_eq!(c.vass.transitions.len(), 1);
        assert_eq!(c.vass.source.state, "L1");
        assert_eq!(c.vass.target.state, "L2");
        assert!(c.drains.is_empty());
    }

    #[test]
    fn drain_chain() {
        let c = build("counters x y z\ninit\nx += 1  y += 2  x += 1\nhalt y");
        assert_eq!(c.vass.dimension, 3);
        assert_eq!(c.vass.states.len(), 3 + 2);
        assert_eq!(c.vass.target.state, "L3~z");
        let t = &c.vass.transitions[c.line_moves[1][0]];
        assert_eq!(t.delta, vec![2.into(), 2.into(), 0.into()]);
        let d = &c.vass.transitions[c.drains[0].decrement];
        assert_eq!((d.from.as_str(), d.to.as_str()), ("L3~x", "L3~x"));
        assert_eq!(d.delta[0], BigInt::from(-1));
        assert!(is_flat(&c.vass, 1000).unwrap().is_flat);
    }

    #[test]
    fn padded_names_sort_by_line() {
        let body = "x += 1\n".repeat(10);
        let c = build(&format!("counters x\ninit\n{body}halt"));
        assert_eq!(c.line_states[0], "L01");
        assert_eq!(c.line_states[11], "L12");
        assert_eq!(c.line_of_state("L07"), Some(6));
    }
}
