//! Macro expansion: unroll `for`, resolve `if`, desugar `loop` into gotos.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use super::ast::*;
use super::meta::{Env, MetaError};

pub const DEFAULT_MAX_LINES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("{pos}: {source}")]
    Meta { pos: Pos, source: MetaError },
    #[error("{pos}: amount {amount} must be positive")]
    NonPositive { pos: Pos, amount: BigInt },
    #[error("{pos}: empty command")]
    EmptyUpdate { pos: Pos },
    #[error("{pos}: unknown counter {name:?}")]
    UnknownCounter { pos: Pos, name: String },
    #[error("{pos}: label {label:?} defined twice")]
    DuplicateLabel { pos: Pos, label: String },
    #[error("{pos}: unresolved label {label:?}")]
    UnresolvedLabel { pos: Pos, label: String },
    #[error("label {0:?} is not followed by any command")]
    DanglingLabel(String),
    #[error("expansion exceeds the budget of {0} lines")]
    Budget(usize),
    #[error("program must start with init and end with halt")]
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundOp {
    pub counter: usize,
    pub kind: OpKind,
    pub amount: BigInt,
}

impl GroundOp {
    pub fn delta(&self) -> BigInt {
        match self.kind {
            OpKind::Add => self.amount.clone(),
            OpKind::Sub => -self.amount.clone(),
        }
    }
}

/// A macro-free command. Line numbers are 0-based indices into the program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlatCommand {
    Init,
    Halt(Vec<usize>),
    Update(Vec<GroundOp>),
    Goto(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatProgram {
    pub counters: Vec<String>,
    pub commands: Vec<FlatCommand>,
}

impl FlatProgram {
    /// Net effect of an update line on every counter.
    pub fn delta(&self, line: usize) -> Vec<BigInt> {
        let mut d = vec![BigInt::from(0); self.counters.len()];
        if let FlatCommand::Update(ops) = &self.commands[line] {
            for op in ops {
                d[op.counter] += op.delta();
            }
        }
        d
    }

    /// Counters not zero-tested by the final halt, in declaration order.
    pub fn untested(&self) -> Vec<usize> {
        let tested: &[usize] = match self.commands.last() {
            Some(FlatCommand::Halt(t)) => t,
            _ => &[],
        };
        (0..self.counters.len())
            .filter(|c| !tested.contains(c))
            .collect()
    }
}

/// Where a `loop` landed in the flat program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopSite {
    /// `goto exit or body`
    pub entry: usize,
    pub body: usize,
    /// `goto entry`
    pub back: usize,
    pub exit: usize,
    pub label: Option<String>,
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub program: FlatProgram,
    /// Expanded label text to line.
    pub labels: BTreeMap<String, usize>,
    /// Source point of every line.
    pub origins: Vec<ProgramPoint>,
    pub loops: Vec<LoopSite>,
}

impl Expansion {
    pub fn label_line(&self, name: &str) -> Option<usize> {
        self.labels.get(name).copied()
    }

    pub fn loop_named(&self, name: &str) -> Option<&LoopSite> {
        self.loops.iter().find(|l| l.label.as_deref() == Some(name))
    }

    /// Label attached to a line, if any (first in name order).
    pub fn line_label(&self, line: usize) -> Option<&str> {
        self.labels
            .iter()
            .find(|(_, &l)| l == line)
            .map(|(n, _)| n.as_str())
    }
}

struct Expander<'p> {
    prog: &'p CounterProgram,
    env: Env,
    lines: Vec<FlatCommand>,
    origins: Vec<ProgramPoint>,
    pending: Vec<(String, Pos)>,
    labels: BTreeMap<String, usize>,
    gotos: Vec<(usize, String, String, Pos)>,
    loops: Vec<LoopSite>,
    open_loops: Vec<usize>,
    path: Vec<PathStep>,
    max_lines: usize,
    work: usize,
}

impl Expander<'_> {
    fn meta<T>(&self, pos: Pos, r: Result<T, MetaError>) -> Result<T, ExpandError> {
        r.map_err(|source| ExpandError::Meta { pos, source })
    }

    fn tick(&mut self) -> Result<(), ExpandError> {
        self.work += 1;
        if self.work > self.max_lines.saturating_mul(4) {
            return Err(ExpandError::Budget(self.max_lines));
        }
        Ok(())
    }

    fn emit(&mut self, cmd: FlatCommand, role: Role) -> Result<usize, ExpandError> {
        if self.lines.len() >= self.max_lines {
            return Err(ExpandError::Budget(self.max_lines));
        }
        let line = self.lines.len();
        for (label, pos) in self.pending.drain(..) {
            if self.labels.insert(label.clone(), line).is_some() {
                return Err(ExpandError::DuplicateLabel { pos, label });
            }
        }
        self.origins.push(ProgramPoint {
            path: self.path.clone(),
            role,
        });
        self.lines.push(cmd);
        Ok(line)
    }

    fn block(&mut self, body: &[Node]) -> Result<(), ExpandError> {
        for (i, n) in body.iter().enumerate() {
            self.path.push(PathStep {
                index: i,
                iteration: None,
            });
            self.node(n)?;
            self.path.pop();
        }
        Ok(())
    }

    fn node(&mut self, n: &Node) -> Result<(), ExpandError> {
        self.tick()?;
        let mut own_label = None;
        if let Some(l) = &n.label {
            let name = self.meta(n.pos, self.env.label(l))?;
            own_label = Some(name.clone());
            self.pending.push((name, n.pos));
        }
        match &n.stmt {
            Stmt::Init => {
                self.emit(FlatCommand::Init, Role::Command)?;
            }
            Stmt::Halt(cs) => {
                let mut idx = Vec::new();
                for c in cs {
                    let i = self.counter(c, n.pos)?;
                    if !idx.contains(&i) {
                        idx.push(i);
                    }
                }
                idx.sort_unstable();
                self.emit(FlatCommand::Halt(idx), Role::Command)?;
            }
            Stmt::Update(ops) => {
                if ops.is_empty() {
                    return Err(ExpandError::EmptyUpdate { pos: n.pos });
                }
                let mut ground = Vec::new();
                for op in ops {
                    let amount = self.meta(n.pos, self.env.eval(&op.amount))?;
                    if !amount.is_positive() {
                        return Err(ExpandError::NonPositive { pos: n.pos, amount });
                    }
                    ground.push(GroundOp {
                        counter: self.counter(&op.counter, n.pos)?,
                        kind: op.kind,
                        amount,
                    });
                }
                self.emit(FlatCommand::Update(ground), Role::Command)?;
            }
            Stmt::Goto(a, b) => {
                let a = self.meta(n.pos, self.env.label(a))?;
                let b = self.meta(n.pos, self.env.label(b))?;
                let line = self.emit(FlatCommand::Goto(0, 0), Role::Command)?;
                self.gotos.push((line, a, b, n.pos));
            }
            Stmt::Loop(body) => {
                let entry = self.emit(FlatCommand::Goto(0, 0), Role::LoopEntry)?;
                let site = self.loops.len();
                self.loops.push(LoopSite {
                    entry,
                    body: entry + 1,
                    back: 0,
                    exit: 0,
                    label: own_label,
                    parent: self.open_loops.last().copied(),
                });
                self.open_loops.push(site);
                self.block(body)?;
                self.open_loops.pop();
                let back = self.emit(FlatCommand::Goto(entry, entry), Role::LoopBack)?;
                let exit = self.lines.len();
                self.lines[entry] = FlatCommand::Goto(exit, entry + 1);
                self.loops[site].back = back;
                self.loops[site].exit = exit;
            }
            Stmt::For {
                var,
                from,
                dir,
                to,
                body,
            } => {
                let lo = self.meta(n.pos, self.env.eval(from))?;
                let hi = self.meta(n.pos, self.env.eval(to))?;
                let span = match dir {
                    Direction::Up => &hi - &lo,
                    Direction::Down => &lo - &hi,
                };
                let count = if span.is_negative() {
                    0
                } else {
                    (span + 1u32)
                        .to_usize()
                        .filter(|&c| c <= self.max_lines.saturating_mul(4))
                        .ok_or(ExpandError::Budget(self.max_lines))?
                };
                for k in 0..count {
                    self.tick()?;
                    let v = match dir {
                        Direction::Up => &lo + k,
                        Direction::Down => &lo - k,
                    };
                    self.path.last_mut().expect("inside block").iteration = Some(v.clone());
                    self.env.push(var, v);
                    let r = self.block(body);
                    self.env.pop();
                    r?;
                }
                self.path.last_mut().expect("inside block").iteration = None;
            }
            Stmt::If { cond, body } => {
                if self.meta(n.pos, self.env.holds(cond))? {
                    self.block(body)?;
                }
            }
        }
        Ok(())
    }

    fn counter(&self, name: &str, pos: Pos) -> Result<usize, ExpandError> {
        self.prog
            .counter_index(name)
            .ok_or_else(|| ExpandError::UnknownCounter {
                pos,
                name: name.to_string(),
            })
    }
}

/// Expand a complete program.
pub fn expand(p: &CounterProgram) -> Result<Expansion, ExpandError> {
    expand_with_budget(p, DEFAULT_MAX_LINES)
}

pub fn expand_with_budget(p: &CounterProgram, max_lines: usize) -> Result<Expansion, ExpandError> {
    if !p.is_complete() {
        return Err(ExpandError::Incomplete);
    }
    let env = Env::from_consts(&p.consts).map_err(|source| ExpandError::Meta {
        pos: Pos::default(),
        source,
    })?;
    let mut ex = Expander {
        prog: p,
        env,
        lines: Vec::new(),
        origins: Vec::new(),
        pending: Vec::new(),
        labels: BTreeMap::new(),
        gotos: Vec::new(),
        loops: Vec::new(),
        open_loops: Vec::new(),
        path: Vec::new(),
        max_lines,
        work: 0,
    };
    ex.block(&p.body)?;
    if let Some((label, _)) = ex.pending.first() {
        return Err(ExpandError::DanglingLabel(label.clone()));
    }
    for (line, a, b, pos) in std::mem::take(&mut ex.gotos) {
        let resolve = |l: &String| {
            ex.labels
                .get(l)
                .copied()
                .ok_or_else(|| ExpandError::UnresolvedLabel {
                    pos,
                    label: l.clone(),
                })
        };
        ex.lines[line] = FlatCommand::Goto(resolve(&a)?, resolve(&b)?);
    }
    Ok(Expansion {
        program: FlatProgram {
            counters: p.counters.clone(),
            commands: ex.lines,
        },
        labels: ex.labels,
        origins: ex.origins,
        loops: ex.loops,
    })
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn flat(src: &str) -> FlatProgram {
        expand(&parse(src).unwrap()).unwrap().program
    }

    #[test]
    fn single_iteration_for() {
        let p = flat("counters x\ninit\nfor i := 0 to 0\n  x += 1\nendfor\nhalt x");
        assert_eq!(p.commands.len(), 3);
        assert!(matches!(&p.commands[1], FlatCommand::Update(ops) if ops.len() == 1));
    }

    #[test]
    fn false_bit_test_removes_body() {
        let p = flat("counters x\ninit\nif bit(6, 0) = 1 then\n  x += 1\nendif\nhalt x");
        assert_eq!(p.commands, vec![FlatCommand::Init, FlatCommand::Halt(vec![0])]);
        let p = flat("counters x\ninit\nif bit(6, 1) = 1 then\n  x += 1\nendif\nhalt x");
        assert_eq!(p.commands.len(), 3);
    }

    #[test]
    fn empty_ranges_and_direction() {
        let p = flat("counters x\ninit\nfor i := 1 to 0\n  x += 1\nendfor\nhalt");
        assert_eq!(p.commands.len(), 2);
        let p = flat("counters x\ninit\nfor i := 3 downto 1\n  x += i\nendfor\nhalt");
        let amounts: Vec<BigInt> = p.commands[1..4]
            .iter()
            .map(|c| match c {
                FlatCommand::Update(ops) => ops[0].amount.clone(),
                c => panic!("{c:?}"),
            })
            .collect();
        assert_eq!(amounts, vec![3.into(), 2.into(), 1.into()]);
    }

    #[test]
    fn loop_skeleton_and_sites() {
        let e = expand(&parse("counters x\ninit\nl: loop\n  x += 1\nendloop\nhalt").unwrap()).unwrap();
        assert_eq!(e.program.commands[1], FlatCommand::Goto(4, 2));
        assert_eq!(e.program.commands[3], FlatCommand::Goto(1, 1));
        let site = e.loop_named("l").unwrap();
        assert_eq!((site.entry, site.body, site.back, site.exit), (1, 2, 3, 4));
        assert_eq!(e.origins[1].role, Role::LoopEntry);
        assert_eq!(e.origins[3].role, Role::LoopBack);
    }

    #[test]
    fn templated_labels_resolve() {
        let src = "counters x\ninit\nfor i := 1 to 2\n  a{i}: x += i\nendfor\ngoto a1 or a2\nhalt";
        let p = flat(src);
        assert_eq!(p.commands[3], FlatCommand::Goto(1, 2));
        let bad = "counters x\ninit\nfor i := 1 to 2\n  a{i}: x += i\nendfor\ngoto a{3}\nhalt";
        assert!(matches!(
            expand(&parse(bad).unwrap()),
            Err(ExpandError::UnresolvedLabel { .. })
        ));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            expand(&parse("counters x\nx += 1").unwrap()),
            Err(ExpandError::Incomplete)
        ));
        assert!(matches!(
            expand(&parse("counters x\ninit\nx += 1 - 1\nhalt").unwrap()),
            Err(ExpandError::NonPositive { .. })
        ));
        assert!(matches!(
            expand(&parse("counters x\ninit\nx += q\nhalt").unwrap()),
            Err(ExpandError::Meta { .. })
        ));
        let big = parse("counters x\ninit\nfor i := 1 to 100\n  x += 1\nendfor\nhalt").unwrap();
        assert!(matches!(expand_with_budget(&big, 50), Err(ExpandError::Budget(50))));
    }
}
