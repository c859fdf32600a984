//! Direct interpreter over the structured AST, used as an oracle for
//! `expand` + `compile`. It never builds the flat program: `for` and `if`
//! are evaluated on the fly and `loop` is executed as a loop.
//!
//! Gotos into `for` bodies are not supported.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use super::ast::*;
use super::meta::{Env, MetaError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error(transparent)]
    Meta(#[from] MetaError),
    #[error("goto target {0:?} is not supported by the interpreter")]
    Unsupported(String),
    #[error("unresolved label {0:?}")]
    UnresolvedLabel(String),
    #[error("more than {0} configurations")]
    Budget(usize),
    #[error("program must start with init and end with halt")]
    Incomplete,
}

pub type State = (ProgramPoint, Vec<u64>);

pub struct Interpreter<'p> {
    prog: &'p CounterProgram,
    consts: Env,
    labels: HashMap<String, Vec<PathStep>>,
}

fn step(index: usize) -> PathStep {
    PathStep {
        index,
        iteration: None,
    }
}

impl<'p> Interpreter<'p> {
    pub fn new(prog: &'p CounterProgram) -> Result<Self, InterpError> {
        if !prog.is_complete() {
            return Err(InterpError::Incomplete);
        }
        let consts = Env::from_consts(&prog.consts)?;
        let mut it = Interpreter {
            prog,
            consts,
            labels: HashMap::new(),
        };
        let mut labels = HashMap::new();
        it.collect(&prog.body, &mut Vec::new(), &mut labels)?;
        it.labels = labels;
        Ok(it)
    }

    fn collect(
        &self,
        body: &[Node],
        path: &mut Vec<PathStep>,
        out: &mut HashMap<String, Vec<PathStep>>,
    ) -> Result<(), InterpError> {
        for (i, n) in body.iter().enumerate() {
            path.push(step(i));
            if let Some(l) = &n.label {
                out.insert(self.consts.label(l)?, path.clone());
            }
            match &n.stmt {
                Stmt::Loop(b) => self.collect(b, path, out)?,
                Stmt::If { cond, body } if self.consts.holds(cond)? => self.collect(body, path, out)?,
                _ => {}
            }
            path.pop();
        }
        Ok(())
    }

    /// The node at `path` and the environment in force there; `None` when
    /// the last step is past the end of its block.
    fn resolve(&self, path: &[PathStep]) -> (Option<&'p Node>, Env) {
        let mut env = self.consts.clone();
        let mut block: &'p [Node] = &self.prog.body;
        for (k, s) in path.iter().enumerate() {
            let Some(n) = block.get(s.index) else {
                return (None, env);
            };
            if k + 1 == path.len() {
                return (Some(n), env);
            }
            if let (Stmt::For { var, .. }, Some(v)) = (&n.stmt, &s.iteration) {
                env.push(var, v.clone());
            }
            block = n.stmt.children().unwrap_or(&[]);
        }
        (None, env)
    }

    /// Move forward from `path` to the next point that corresponds to a
    /// line. `None` means control fell off the end of the program.
    fn settle(&self, mut path: Vec<PathStep>) -> Result<Option<ProgramPoint>, InterpError> {
        loop {
            if path.is_empty() {
                return Ok(None);
            }
            let (node, env) = self.resolve(&path);
            let Some(node) = node else {
                path.pop();
                let Some(last) = path.last().cloned() else {
                    return Ok(None);
                };
                let (parent, penv) = self.resolve(&path);
                match &parent.expect("parent exists").stmt {
                    Stmt::Loop(_) => {
                        return Ok(Some(ProgramPoint {
                            path,
                            role: Role::LoopBack,
                        }))
                    }
                    Stmt::For { dir, to, .. } => {
                        let cur = last.iteration.expect("inside an iteration");
                        let hi = penv.eval(to)?;
                        let next = match dir {
                            Direction::Up => cur + BigInt::one(),
                            Direction::Down => cur - BigInt::one(),
                        };
                        let more = match dir {
                            Direction::Up => next <= hi,
                            Direction::Down => next >= hi,
                        };
                        let top = path.last_mut().expect("nonempty");
                        if more {
                            top.iteration = Some(next);
                            path.push(step(0));
                        } else {
                            top.iteration = None;
                            top.index += 1;
                        }
                    }
                    _ => path.last_mut().expect("nonempty").index += 1,
                }
                continue;
            };
            match &node.stmt {
                Stmt::Init | Stmt::Halt(_) | Stmt::Update(_) | Stmt::Goto(..) => {
                    return Ok(Some(ProgramPoint {
                        path,
                        role: Role::Command,
                    }))
                }
                Stmt::Loop(_) => {
                    return Ok(Some(ProgramPoint {
                        path,
                        role: Role::LoopEntry,
                    }))
                }
                Stmt::For { from, dir, to, .. } => {
                    let (lo, hi) = (env.eval(from)?, env.eval(to)?);
                    let nonempty = match dir {
                        Direction::Up => lo <= hi,
                        Direction::Down => lo >= hi,
                    };
                    let top = path.last_mut().expect("nonempty");
                    if nonempty {
                        top.iteration = Some(lo);
                        path.push(step(0));
                    } else {
                        top.index += 1;
                    }
                }
                Stmt::If { cond, .. } => {
                    if env.holds(cond)? {
                        path.push(step(0));
                    } else {
                        path.last_mut().expect("nonempty").index += 1;
                    }
                }
            }
        }
    }

    fn after(&self, path: &[PathStep]) -> Result<Option<ProgramPoint>, InterpError> {
        let mut p = path.to_vec();
        p.last_mut().expect("nonempty").index += 1;
        self.settle(p)
    }

    fn target(&self, env: &Env, l: &Label) -> Result<Option<ProgramPoint>, InterpError> {
        let name = env.label(l)?;
        match self.labels.get(&name) {
            Some(p) => self.settle(p.clone()),
            None if env.label(l).is_ok() && l.as_static().is_none() => {
                Err(InterpError::Unsupported(name))
            }
            None => Err(InterpError::UnresolvedLabel(name)),
        }
    }

    pub fn start(&self) -> Result<State, InterpError> {
        let p = self.settle(vec![step(0)])?.expect("init exists");
        Ok((p, vec![0; self.prog.counters.len()]))
    }

    /// Successor states, dropping any whose counters leave `0..=bound`.
    pub fn successors(&self, s: &State, bound: u64) -> Result<Vec<State>, InterpError> {
        let (pt, v) = s;
        let (node, env) = self.resolve(&pt.path);
        let node = node.expect("points name nodes");
        let mut out = Vec::new();
        let mut push = |p: Option<ProgramPoint>, v: Vec<u64>| {
            if let Some(p) = p {
                out.push((p, v));
            }
        };
        match (pt.role, &node.stmt) {
            (Role::LoopBack, _) => push(
                Some(ProgramPoint {
                    path: pt.path.clone(),
                    role: Role::LoopEntry,
                }),
                v.clone(),
            ),
            (Role::LoopEntry, _) => {
                push(self.after(&pt.path)?, v.clone());
                let mut inner = pt.path.clone();
                inner.push(step(0));
                push(self.settle(inner)?, v.clone());
            }
            (_, Stmt::Init) => push(self.after(&pt.path)?, v.clone()),
            (_, Stmt::Halt(_)) => {}
            (_, Stmt::Update(ops)) => {
                let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
                let mut ok = true;
                for op in ops {
                    let c = self.prog.counter_index(&op.counter).expect("declared");
                    let amount = env.eval(&op.amount)?;
                    let Some(a) = amount.to_i128().filter(|a| *a <= u64::MAX as i128) else {
                        ok = false;
                        break;
                    };
                    match op.kind {
                        OpKind::Add => w[c] += a,
                        OpKind::Sub => w[c] -= a,
                    }
                }
                if ok && w.iter().all(|&x| 0 <= x && x <= bound as i128) {
                    let w = w.into_iter().map(|x| x as u64).collect();
                    push(self.after(&pt.path)?, w);
                }
            }
            (_, Stmt::Goto(a, b)) => {
                let ta = self.target(&env, a)?;
                let tb = self.target(&env, b)?;
                push(ta, v.clone());
                push(tb, v.clone());
            }
            (_, Stmt::Loop(_) | Stmt::For { .. } | Stmt::If { .. }) => {
                unreachable!("settled points are commands")
            }
        }
        Ok(out)
    }

    /// Every state reachable from the start with all counters `<= bound`.
    pub fn reachable(&self, bound: u64, max_states: usize) -> Result<BTreeSet<State>, InterpError> {
        let start = self.start()?;
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start);
        while let Some(s) = queue.pop_front() {
            for t in self.successors(&s, bound)? {
                if !seen.contains(&t) {
                    if seen.len() >= max_states {
                        return Err(InterpError::Budget(max_states));
                    }
                    seen.insert(t.clone());
                    queue.push_back(t);
                }
            }
        }
        Ok(seen)
    }

    /// Meta-variable value of the innermost `for` step, for diagnostics.
    pub fn iteration(p: &ProgramPoint) -> Option<u64> {
        p.path
            .iter()
            .rev()
            .find_map(|s| s.iteration.as_ref())
            .and_then(|v| v.to_u64())
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    #[test]
    fn counts_a_loop() {
        let p = parse("counters x\ninit\nloop\n  x += 1\nendloop\nhalt x").unwrap();
        let it = Interpreter::new(&p).unwrap();
        let r = it.reachable(3, 1000).unwrap();
        let halts: BTreeSet<u64> = r
            .iter()
            .filter(|(pt, _)| pt.path == vec![step(2)])
            .map(|(_, v)| v[0])
            .collect();
        assert_eq!(halts, (0..=3).collect());
    }

    #[test]
    fn for_and_if_walk() {
        let src = "counters x\ninit\nfor i := 1 to 3\n  if not (i = 2) then\n    x += i\n  endif\nendfor\nhalt";
        let p = parse(src).unwrap();
        let it = Interpreter::new(&p).unwrap();
        let r = it.reachable(10, 1000).unwrap();
        // init, x+=1, x+=3, halt
        assert_eq!(r.len(), 4);
        assert!(r.iter().any(|(pt, v)| pt.path.len() == 1 && v[0] == 4));
    }
}
