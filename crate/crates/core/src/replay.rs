//! Replay of a fixed loop policy over a compiled program, producing a run of
//! the VASS together with the counter values observed at loop exits.
//!
//! The default policy iterates every loop while its watched counter is
//! positive: the first counter decremented by an update line directly in the
//! loop body. A schedule overrides this per loop label with an exact
//! iteration count. Straight-line loop bodies are fired as one repeated block
//! rather than step by step, so runs with astronomically many iterations of
//! such loops stay small.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lang::expand::{Expansion, FlatCommand, LoopSite};
use crate::lang::Artifact;
use crate::vass::{Configuration, Run};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("policy stuck at line {line}: {reason}")]
    PolicyStuck { line: usize, reason: String },
    #[error("loop at line {0} has no watched counter and no schedule")]
    Unbounded(usize),
    #[error("more than {0} unaccelerated steps")]
    Budget(u64),
    #[error("iteration count {0} does not fit in u64")]
    TooManyIterations(String),
}

#[derive(Debug, Clone, Default)]
pub struct Policy {
    /// Exact iteration counts by loop label.
    pub counts: BTreeMap<String, BigInt>,
    /// Targets for gotos outside loops, consumed in order: `false` takes the
    /// first target, `true` the second. Missing entries take the first.
    pub choices: Vec<bool>,
    pub max_steps: u64,
}

impl Policy {
    pub fn new() -> Self {
        Policy {
            counts: BTreeMap::new(),
            choices: Vec::new(),
            max_steps: 10_000_000,
        }
    }

    pub fn count(mut self, label: &str, n: impl Into<BigInt>) -> Self {
        self.counts.insert(label.to_string(), n.into());
        self
    }

    pub fn choices(mut self, c: Vec<bool>) -> Self {
        self.choices = c;
        self
    }
}

/// Observations at a loop exit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopExit {
    #[serde(with = "crate::arith::decimal")]
    pub iterations: BigInt,
    #[serde(with = "crate::arith::decimal::vec")]
    pub values: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayOutcome {
    pub run: Run,
    /// Loop exits keyed by label, or `L<entry line>` (1-based) if unlabelled.
    pub exits: BTreeMap<String, Vec<LoopExit>>,
    /// Counter values on reaching the halt line.
    #[serde(with = "crate::arith::decimal::vec")]
    pub at_halt: Vec<BigInt>,
    /// Every counter tested by the halt is zero, so the drains complete a
    /// halting run.
    pub halted: bool,
}

impl ReplayOutcome {
    pub fn exit(&self, key: &str) -> Option<&LoopExit> {
        self.exits.get(key).and_then(|v| v.first())
    }
}

fn loop_key(site: &LoopSite) -> String {
    site.label
        .clone()
        .unwrap_or_else(|| format!("L{}", site.entry + 1))
}

/// Counter watched by a loop: first one decremented by an update line that
/// sits directly in the body (not in a nested loop).
pub fn watched_counter(e: &Expansion, site: &LoopSite) -> Option<usize> {
    let mut line = site.body;
    while line < site.back {
        if let Some(inner) = e.loops.iter().find(|l| l.entry == line) {
            line = inner.exit;
            continue;
        }
        if let FlatCommand::Update(ops) = &e.program.commands[line] {
            let d = e.program.delta(line);
            if let Some(op) = ops.iter().find(|op| d[op.counter].is_negative()) {
                return Some(op.counter);
            }
        }
        line += 1;
    }
    None
}

fn straight_line(e: &Expansion, site: &LoopSite) -> bool {
    (site.body..site.back).all(|l| matches!(e.program.commands[l], FlatCommand::Update(_)))
}

struct Replayer<'a> {
    art: &'a Artifact,
    policy: &'a Policy,
    values: Vec<BigInt>,
    run: Run,
    exits: BTreeMap<String, Vec<LoopExit>>,
    choice: usize,
    steps: u64,
    by_entry: BTreeMap<usize, usize>,
    by_back: BTreeMap<usize, usize>,
}

impl<'a> Replayer<'a> {
    fn fire(&mut self, line: usize, which: usize) -> Result<(), ReplayError> {
        let t = self.art.compiled.line_moves[line][which];
        let delta = &self.art.compiled.vass.transitions[t].delta;
        for (v, d) in self.values.iter_mut().zip(delta) {
            *v += d;
            if v.is_negative() {
                return Err(ReplayError::PolicyStuck {
                    line,
                    reason: "a counter would go negative".into(),
                });
            }
        }
        self.steps += 1;
        if self.steps > self.policy.max_steps {
            return Err(ReplayError::Budget(self.policy.max_steps));
        }
        self.run.push(t);
        Ok(())
    }

    /// Number of iterations the policy asks of `site` at loop entry.
    fn planned(&self, site: &LoopSite) -> Option<BigInt> {
        site.label
            .as_ref()
            .and_then(|l| self.policy.counts.get(l))
            .cloned()
    }

    /// Fire a straight-line loop `times` times as one block.
    fn accelerate(&mut self, site: &LoopSite, times: &BigInt) -> Result<(), ReplayError> {
        let e = &self.art.expansion;
        let m = &self.art.compiled.line_moves;
        let mut block = vec![m[site.entry][1]];
        block.extend((site.body..site.back).map(|l| m[l][0]));
        block.push(m[site.back][0]);
        let times_u = times
            .to_u64()
            .ok_or_else(|| ReplayError::TooManyIterations(times.to_string()))?;
        if times_u == 0 {
            return Ok(());
        }
        // Prefix sums of one iteration; intermediate values are affine in
        // the iteration number, so the first and last iteration suffice.
        let d = e.program.counters.len();
        let mut prefix = vec![BigInt::zero(); d];
        let mut mins = vec![BigInt::zero(); d];
        for l in site.body..site.back {
            for (c, x) in e.program.delta(l).into_iter().enumerate() {
                prefix[c] += x;
                if prefix[c] < mins[c] {
                    mins[c] = prefix[c].clone();
                }
            }
        }
        let last = BigInt::from(times_u - 1);
        for c in 0..d {
            let first_ok = &self.values[c] + &mins[c] >= BigInt::zero();
            let last_ok = &self.values[c] + &prefix[c] * &last + &mins[c] >= BigInt::zero();
            if !(first_ok && last_ok) {
                return Err(ReplayError::PolicyStuck {
                    line: site.entry,
                    reason: format!("counter {} would go negative", e.program.counters[c]),
                });
            }
        }
        for (v, p) in self.values.iter_mut().zip(&prefix) {
            *v += p * times;
        }
        self.run.push_block(block, times_u);
        Ok(())
    }

    fn record_exit(&mut self, site: &LoopSite, iterations: BigInt) {
        self.exits.entry(loop_key(site)).or_default().push(LoopExit {
            iterations,
            values: self.values.clone(),
        });
    }

    fn go(&mut self) -> Result<usize, ReplayError> {
        let e = &self.art.expansion;
        let halt = self.art.compiled.halt_line;
        let mut line = 0;
        // Iterations so far of every loop currently entered, by site index.
        let mut active: BTreeMap<usize, BigInt> = BTreeMap::new();
        while line != halt {
            if let Some(&si) = self.by_entry.get(&line) {
                let site = &e.loops[si];
                let done = active.entry(si).or_insert_with(BigInt::zero).clone();
                let w = watched_counter(e, site);
                let planned = self.planned(site);
                if done.is_zero() && straight_line(e, site) {
                    let times = match &planned {
                        Some(n) => n.clone(),
                        None => {
                            let w = w.ok_or(ReplayError::Unbounded(line))?;
                            let dw = &e.program.net_delta(site.body..site.back)[w];
                            if !dw.is_negative() {
                                return Err(ReplayError::Unbounded(line));
                            }
                            let need = &self.values[w];
                            let step = -dw;
                            (need + &step - 1) / &step
                        }
                    };
                    self.accelerate(site, &times)?;
                    active.remove(&si);
                    self.fire(line, 0)?;
                    self.record_exit(site, times);
                    line = site.exit;
                    continue;
                }
                let again = match &planned {
                    Some(n) => done < *n,
                    None => {
                        let w = w.ok_or(ReplayError::Unbounded(line))?;
                        self.values[w].is_positive()
                    }
                };
                if again {
                    self.fire(line, 1)?;
                    line = site.body;
                } else {
                    active.remove(&si);
                    self.fire(line, 0)?;
                    self.record_exit(site, done);
                    line = site.exit;
                }
                continue;
            }
            if let Some(&si) = self.by_back.get(&line) {
                *active.get_mut(&si).expect("loop is active") += 1;
                self.fire(line, 0)?;
                line = e.loops[si].entry;
                continue;
            }
            match &e.program.commands[line] {
                FlatCommand::Init | FlatCommand::Update(_) => {
                    self.fire(line, 0)?;
                    line += 1;
                }
                FlatCommand::Goto(a, b) => {
                    let second = self.policy.choices.get(self.choice).copied().unwrap_or(false);
                    self.choice += 1;
                    self.fire(line, usize::from(second))?;
                    line = if second { *b } else { *a };
                }
                FlatCommand::Halt(_) => unreachable!("only the last line halts"),
            }
        }
        Ok(halt)
    }
}

trait DeltaRange {
    fn net_delta(&self, r: std::ops::Range<usize>) -> Vec<BigInt>;
}

impl DeltaRange for crate::lang::FlatProgram {
    fn net_delta(&self, r: std::ops::Range<usize>) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.counters.len()];
        for l in r {
            for (o, d) in out.iter_mut().zip(self.delta(l)) {
                *o += d;
            }
        }
        out
    }
}

/// Replay `policy` on `art`. Untested counters are drained at the halt.
pub fn replay(art: &Artifact, policy: &Policy) -> Result<ReplayOutcome, ReplayError> {
    let e = &art.expansion;
    let d = e.program.counters.len();
    let mut r = Replayer {
        art,
        policy,
        values: vec![BigInt::zero(); d],
        run: Run::new(Configuration::new(
            art.compiled.vass.source.state.clone(),
            vec![BigInt::zero(); d],
        )),
        exits: BTreeMap::new(),
        choice: 0,
        steps: 0,
        by_entry: e.loops.iter().enumerate().map(|(i, l)| (l.entry, i)).collect(),
        by_back: e.loops.iter().enumerate().map(|(i, l)| (l.back, i)).collect(),
    };
    let halt = r.go()?;
    let at_halt = r.values.clone();
    let tested: &[usize] = match &e.program.commands[halt] {
        FlatCommand::Halt(t) => t,
        _ => unreachable!(),
    };
    let halted = tested.iter().all(|&c| at_halt[c].is_zero());
    for dr in &art.compiled.drains {
        r.run.push(dr.enter);
        let n = r.values[dr.counter]
            .to_u64()
            .ok_or_else(|| ReplayError::TooManyIterations(r.values[dr.counter].to_string()))?;
        r.run.push_block(vec![dr.decrement], n);
        r.values[dr.counter] = BigInt::zero();
    }
    Ok(ReplayOutcome {
        run: r.run,
        exits: r.exits,
        at_halt,
        halted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{gen_2exp, gen_exp, gen_weak};
    use crate::lang::build;
    use crate::vass::validate_run;

    #[test]
    fn exp_canonical_run_halts() {
        let art = build(&gen_exp(2).unwrap()).unwrap();
        let out = replay(&art, &Policy::new().count("pump", 1)).unwrap();
        assert!(out.halted);
        let check = validate_run(&art.compiled.vass, &out.run);
        assert!(check.halting, "{:?}", check.failure);
        assert_eq!(out.exit("zx1").unwrap().values[0], BigInt::from(6));
        assert_eq!(out.exit("drain").unwrap().iterations, BigInt::from(2));
    }

    #[test]
    fn wrong_pump_does_not_halt() {
        let art = build(&gen_exp(2).unwrap()).unwrap();
        let out = replay(&art, &Policy::new().count("pump", 0));
        // x = 1 through zx2 needs z divisible by 2
        assert!(matches!(out, Err(ReplayError::PolicyStuck { .. })) || !out.unwrap().halted);
    }

    #[test]
    fn weak_maximal_computes_b() {
        for b in 1..20u64 {
            let art = build(&gen_weak(b).unwrap()).unwrap();
            let out = replay(&art, &Policy::new()).unwrap();
            assert_eq!(out.at_halt[0], BigInt::from(b));
            assert!(validate_run(&art.compiled.vass, &out.run).halting);
        }
    }

    #[test]
    fn two_exp_k1_canonical() {
        let (p, meta) = gen_2exp(1).unwrap();
        let art = build(&p).unwrap();
        let pol = Policy::new().count("pump", &meta.n_can - 1);
        let out = replay(&art, &pol).unwrap();
        assert!(out.halted);
        let check = validate_run(&art.compiled.vass, &out.run);
        assert!(check.halting, "{:?}", check.failure);
    }

    #[test]
    fn accelerated_blocks_keep_runs_small() {
        let (p, meta) = gen_2exp(2).unwrap();
        let art = build(&p).unwrap();
        let out = replay(&art, &Policy::new().count("pump", &meta.n_can - 1)).unwrap();
        assert!(out.halted);
        assert!(out.run.segments.len() < 200);
        assert!(out.run.len() > 18_939_904);
        assert!(validate_run(&art.compiled.vass, &out.run).halting);
    }
}
