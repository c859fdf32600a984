//! Vector addition systems with states.
//!
//! A [`Vass`] bundles the control graph with its source and target
//! configurations, so one value is one reachability instance. States and
//! transitions are kept sorted, which fixes transition indices and makes
//! serialization deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::decimal;

pub type StateId = String;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VassError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("transition {index} refers to unknown state {state:?}")]
    UnknownState { index: usize, state: StateId },
    #[error("{what} has length {len}, expected dimension {dim}")]
    DimensionMismatch { what: String, len: usize, dim: usize },
    #[error("{what} has a negative component")]
    NegativeVector { what: String },
    #[error("simple-cycle enumeration exceeded the budget of {0} cycles")]
    BudgetExceeded(usize),
    #[error("transition index {0} is out of range")]
    BadTransitionIndex(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("transition starts in {expected:?} but the configuration is in {actual:?}")]
    WrongState { expected: StateId, actual: StateId },
    #[error("counter {0} would become negative")]
    NegativeCounter(usize),
    #[error("vector length {got} does not match transition dimension {want}")]
    Dimension { got: usize, want: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub from: StateId,
    #[serde(with = "decimal::vec")]
    pub delta: Vec<BigInt>,
    pub to: StateId,
}

impl Transition {
    pub fn new(from: impl Into<StateId>, delta: Vec<BigInt>, to: impl Into<StateId>) -> Self {
        Self {
            from: from.into(),
            delta,
            to: to.into(),
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    pub state: StateId,
    #[serde(with = "decimal::vec")]
    pub vector: Vec<BigInt>,
}

impl Configuration {
    pub fn new(state: impl Into<StateId>, vector: Vec<BigInt>) -> Self {
        Self {
            state: state.into(),
            vector,
        }
    }

    pub fn zero(state: impl Into<StateId>, dim: usize) -> Self {
        Self::new(state, vec![BigInt::zero(); dim])
    }

    pub fn is_nonnegative(&self) -> bool {
        self.vector.iter().all(|v| !v.is_negative())
    }
}

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(", self.state)?;
        for (i, v) in self.vector.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Fire `t` from `c`.
pub fn step(c: &Configuration, t: &Transition) -> Result<Configuration, StepError> {
    if t.from != c.state {
        return Err(StepError::WrongState {
            expected: t.from.clone(),
            actual: c.state.clone(),
        });
    }
    if t.delta.len() != c.vector.len() {
        return Err(StepError::Dimension {
            got: c.vector.len(),
            want: t.delta.len(),
        });
    }
    let mut vector = Vec::with_capacity(c.vector.len());
    for (i, (v, w)) in c.vector.iter().zip(&t.delta).enumerate() {
        let next = v + w;
        if next.is_negative() {
            return Err(StepError::NegativeCounter(i));
        }
        vector.push(next);
    }
    Ok(Configuration {
        state: t.to.clone(),
        vector,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vass {
    pub dimension: usize,
    pub states: Vec<StateId>,
    pub transitions: Vec<Transition>,
    pub source: Configuration,
    pub target: Configuration,
}

#[derive(Deserialize)]
struct RawVass {
    dimension: usize,
    states: Vec<StateId>,
    transitions: Vec<Transition>,
    source: Configuration,
    target: Configuration,
}

impl<'de> Deserialize<'de> for Vass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawVass::deserialize(d)?;
        Vass::new(
            raw.dimension,
            raw.states,
            raw.transitions,
            raw.source,
            raw.target,
        )
        .map_err(serde::de::Error::custom)
    }
}

impl Vass {
    /// Validates and normalizes: states and transitions are sorted and
    /// deduplicated (T is a set).
    pub fn new(
        dimension: usize,
        states: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = Transition>,
        source: Configuration,
        target: Configuration,
    ) -> Result<Self, VassError> {
        if dimension == 0 {
            return Err(VassError::ZeroDimension);
        }
        let states: BTreeSet<StateId> = states.into_iter().collect();
        let transitions: BTreeSet<Transition> = transitions.into_iter().collect();
        let transitions: Vec<Transition> = transitions.into_iter().collect();
        for (index, t) in transitions.iter().enumerate() {
            for s in [&t.from, &t.to] {
                if !states.contains(s) {
                    return Err(VassError::UnknownState {
                        index,
                        state: s.clone(),
                    });
                }
            }
            if t.delta.len() != dimension {
                return Err(VassError::DimensionMismatch {
                    what: format!("transition {index}"),
                    len: t.delta.len(),
                    dim: dimension,
                });
            }
        }
        for (what, c) in [("source", &source), ("target", &target)] {
            if !states.contains(&c.state) {
                return Err(VassError::UnknownState {
                    index: usize::MAX,
                    state: c.state.clone(),
                });
            }
            if c.vector.len() != dimension {
                return Err(VassError::DimensionMismatch {
                    what: what.to_string(),
                    len: c.vector.len(),
                    dim: dimension,
                });
            }
            if !c.is_nonnegative() {
                return Err(VassError::NegativeVector {
                    what: what.to_string(),
                });
            }
        }
        Ok(Self {
            dimension,
            states: states.into_iter().collect(),
            transitions,
            source,
            target,
        })
    }

    pub fn transition_index(&self, t: &Transition) -> Option<usize> {
        self.transitions.binary_search(t).ok()
    }

    pub fn state_index(&self, s: &str) -> Option<usize> {
        self.states.binary_search_by(|x| x.as_str().cmp(s)).ok()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("Vass serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Consistent renaming of states.
    pub fn rename_states(&self, f: impl Fn(&str) -> StateId) -> Result<Self, VassError> {
        let map: HashMap<&str, StateId> = self.states.iter().map(|s| (s.as_str(), f(s))).collect();
        let r = |s: &StateId| map[s.as_str()].clone();
        Vass::new(
            self.dimension,
            self.states.iter().map(r),
            self.transitions
                .iter()
                .map(|t| Transition::new(r(&t.from), t.delta.clone(), r(&t.to))),
            Configuration::new(r(&self.source.state), self.source.vector.clone()),
            Configuration::new(r(&self.target.state), self.target.vector.clone()),
        )
    }
}

/// A maximal block of a run: `transitions` fired in order, `repeat` times.
///
/// Canonical runs of the doubly-exponential family are far too long to store
/// one transition at a time, so runs are kept as repeated blocks. Runs found
/// by search use `repeat == 1` throughout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub transitions: Vec<usize>,
    pub repeat: u64,
}

/// A run: an initial configuration followed by transition indices into the
/// owning [`Vass`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub initial: Configuration,
    pub segments: Vec<Segment>,
}

impl Run {
    pub fn new(initial: Configuration) -> Self {
        Self {
            initial,
            segments: Vec::new(),
        }
    }

    pub fn from_steps(initial: Configuration, steps: impl IntoIterator<Item = usize>) -> Self {
        let mut run = Self::new(initial);
        for s in steps {
            run.push(s);
        }
        run
    }

    pub fn push(&mut self, t: usize) {
        self.push_block(vec![t], 1);
    }

    /// Append `block` repeated `times` times; merges single-transition
    /// repeats of the same transition.
    pub fn push_block(&mut self, block: Vec<usize>, times: u64) {
        if times == 0 || block.is_empty() {
            return;
        }
        if let Some(last) = self.segments.last_mut() {
            if last.transitions == block {
                last.repeat += times;
                return;
            }
            if last.repeat == 1 && times == 1 && block.len() == 1 {
                last.transitions.push(block[0]);
                return;
            }
        }
        self.segments.push(Segment {
            transitions: block,
            repeat: times,
        });
    }

    /// Number of transitions fired.
    pub fn len(&self) -> u128 {
        self.segments
            .iter()
            .map(|s| s.transitions.len() as u128 * s.repeat as u128)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat transition-index sequence; only sensible for short runs.
    pub fn steps(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for s in &self.segments {
            for _ in 0..s.repeat {
                out.extend_from_slice(&s.transitions);
            }
        }
        out
    }

    /// All configurations `p_0(v_0) .. p_k(v_k)`; fails on the first illegal
    /// step. Only sensible for short runs.
    pub fn configurations(&self, vass: &Vass) -> Result<Vec<Configuration>, RunFailure> {
        let mut out = vec![self.initial.clone()];
        for (i, t) in self.steps().into_iter().enumerate() {
            let tr = vass.transitions.get(t).ok_or(RunFailure {
                index: i as u128,
                reason: FailureReason::UnknownTransition(t),
            })?;
            let next = step(out.last().unwrap(), tr).map_err(|e| RunFailure {
                index: i as u128,
                reason: FailureReason::Step(e),
            })?;
            out.push(next);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FailureReason {
    #[error("initial configuration differs from the source")]
    InitialMismatch,
    #[error("transition index {0} is not a transition of the VASS")]
    UnknownTransition(usize),
    #[error(transparent)]
    Step(StepError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {index}: {reason}")]
pub struct RunFailure {
    pub index: u128,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunCheck {
    /// First violation, if any.
    pub failure: Option<RunFailure>,
    /// Final configuration, when the run is valid.
    pub last: Option<Configuration>,
    /// Valid and ends in the target configuration.
    pub halting: bool,
}

impl RunCheck {
    pub fn valid(&self) -> bool {
        self.failure.is_none()
    }
}

/// Check that `r` starts at the source and fires only legal transitions.
///
/// Repeated blocks are checked without unrolling: the configuration before
/// iteration `j` is affine in `j`, so every intermediate component is
/// nonnegative throughout iff it is at the first and last iteration.
pub fn validate_run(v: &Vass, r: &Run) -> RunCheck {
    let fail = |index: u128, reason| RunCheck {
        failure: Some(RunFailure { index, reason }),
        last: None,
        halting: false,
    };
    if r.initial != v.source {
        return fail(0, FailureReason::InitialMismatch);
    }
    let mut cur = r.initial.clone();
    let mut index: u128 = 0;
    for seg in &r.segments {
        if seg.repeat == 0 {
            continue;
        }
        let mut trs = Vec::with_capacity(seg.transitions.len());
        for (k, &t) in seg.transitions.iter().enumerate() {
            match v.transitions.get(t) {
                Some(tr) => trs.push(tr),
                None => return fail(index + k as u128, FailureReason::UnknownTransition(t)),
            }
        }
        // First iteration, step by step.
        let start = cur.clone();
        for tr in &trs {
            match step(&cur, tr) {
                Ok(next) => cur = next,
                Err(e) => return fail(index, FailureReason::Step(e)),
            }
            index += 1;
        }
        if seg.repeat == 1 {
            continue;
        }
        if cur.state != start.state {
            // A repeated block must be a closed walk; the next iteration
            // starts in the wrong state.
            let e = StepError::WrongState {
                expected: trs[0].from.clone(),
                actual: cur.state.clone(),
            };
            return fail(index, FailureReason::Step(e));
        }
        let total: Vec<BigInt> = (0..v.dimension)
            .map(|i| &cur.vector[i] - &start.vector[i])
            .collect();
        let last_iter = BigInt::from(seg.repeat - 1);
        // Replay the last iteration from its start configuration.
        let mut probe = Configuration::new(
            start.state.clone(),
            (0..v.dimension)
                .map(|i| &start.vector[i] + &total[i] * &last_iter)
                .collect(),
        );
        if !probe.is_nonnegative() {
            return fail(
                index,
                FailureReason::Step(StepError::NegativeCounter(
                    probe.vector.iter().position(|x| x.is_negative()).unwrap(),
                )),
            );
        }
        let block_len = trs.len() as u128;
        for (k, tr) in trs.iter().enumerate() {
            match step(&probe, tr) {
                Ok(next) => probe = next,
                Err(e) => {
                    let at = index + block_len * (seg.repeat as u128 - 2) + k as u128;
                    return fail(at, FailureReason::Step(e));
                }
            }
        }
        index += block_len * (seg.repeat as u128 - 1);
        cur = probe;
    }
    let halting = cur == v.target;
    RunCheck {
        failure: None,
        last: Some(cur),
        halting,
    }
}

/// A simple cycle, as the transitions it traverses.
pub type Cycle = Vec<Transition>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlatnessReport {
    pub is_flat: bool,
    /// Two distinct simple cycles through a common state.
    pub witness: Option<(Cycle, Cycle)>,
    /// Simple cycles enumerated before deciding.
    pub cycles_seen: usize,
}

pub const DEFAULT_CYCLE_BUDGET: usize = 1_000_000;

/// Decide flatness by enumerating simple cycles (Johnson's algorithm over the
/// transition multigraph). Each elementary circuit is produced exactly once,
/// rooted at its least state, so rotations never count twice.
pub fn is_flat(v: &Vass, budget: usize) -> Result<FlatnessReport, VassError> {
    let n = v.states.len();
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (ti, t) in v.transitions.iter().enumerate() {
        let a = v.state_index(&t.from).unwrap();
        let b = v.state_index(&t.to).unwrap();
        out[a].push((b, ti));
    }
    let mut search = CycleSearch {
        out: &out,
        budget,
        seen: 0,
        first_cycle: vec![None; n],
        witness: None,
        blocked: vec![false; n],
        blocked_by: vec![BTreeSet::new(); n],
        stack: Vec::new(),
        in_scc: vec![false; n],
        root: 0,
    };
    for s in 0..n {
        let scc = scc_from(&out, s);
        if !scc.iter().any(|&u| out[u].iter().any(|&(w, _)| w >= s && scc.contains(&w))) {
            continue;
        }
        search.in_scc.iter_mut().for_each(|x| *x = false);
        for &u in &scc {
            search.in_scc[u] = true;
            search.blocked[u] = false;
            search.blocked_by[u].clear();
        }
        search.root = s;
        search.circuit(s)?;
        if search.witness.is_some() {
            break;
        }
    }
    let witness = search.witness.map(|(a, b)| {
        let to_cycle = |c: Vec<usize>| c.into_iter().map(|t| v.transitions[t].clone()).collect();
        (to_cycle(a), to_cycle(b))
    });
    Ok(FlatnessReport {
        is_flat: witness.is_none(),
        witness,
        cycles_seen: search.seen,
    })
}

/// Strongly connected component of `s` in the subgraph on states `>= s`.
fn scc_from(out: &[Vec<(usize, usize)>], s: usize) -> BTreeSet<usize> {
    let n = out.len();
    let mut fwd = vec![false; n];
    let mut queue = VecDeque::from([s]);
    fwd[s] = true;
    while let Some(u) = queue.pop_front() {
        for &(w, _) in &out[u] {
            if w >= s && !fwd[w] {
                fwd[w] = true;
                queue.push_back(w);
            }
        }
    }
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in s..n {
        if fwd[u] {
            for &(w, _) in &out[u] {
                if fwd[w] {
                    rev[w].push(u);
                }
            }
        }
    }
    let mut bwd = BTreeSet::from([s]);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &w in &rev[u] {
            if bwd.insert(w) {
                queue.push_back(w);
            }
        }
    }
    bwd
}

struct CycleSearch<'a> {
    out: &'a [Vec<(usize, usize)>],
    budget: usize,
    seen: usize,
    first_cycle: Vec<Option<Vec<usize>>>,
    witness: Option<(Vec<usize>, Vec<usize>)>,
    blocked: Vec<bool>,
    blocked_by: Vec<BTreeSet<usize>>,
    /// (state, transition used to leave it)
    stack: Vec<(usize, usize)>,
    in_scc: Vec<bool>,
    root: usize,
}

impl CycleSearch<'_> {
    fn circuit(&mut self, v: usize) -> Result<bool, VassError> {
        let mut found = false;
        self.blocked[v] = true;
        for &(w, t) in &self.out[v] {
            if self.witness.is_some() {
                return Ok(true);
            }
            if !self.in_scc[w] {
                continue;
            }
            if w == self.root {
                self.stack.push((v, t));
                self.record()?;
                self.stack.pop();
                found = true;
            } else if !self.blocked[w] {
                self.stack.push((v, t));
                if self.circuit(w)? {
                    found = true;
                }
                self.stack.pop();
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &(w, _) in &self.out[v] {
                if self.in_scc[w] {
                    self.blocked_by[w].insert(v);
                }
            }
        }
        Ok(found)
    }

    fn unblock(&mut self, u: usize) {
        let mut work = vec![u];
        while let Some(u) = work.pop() {
            if !self.blocked[u] {
                continue;
            }
            self.blocked[u] = false;
            work.extend(std::mem::take(&mut self.blocked_by[u]));
        }
    }

    fn record(&mut self) -> Result<(), VassError> {
        self.seen += 1;
        if self.seen > self.budget {
            return Err(VassError::BudgetExceeded(self.budget));
        }
        let cycle: Vec<usize> = self.stack.iter().map(|&(_, t)| t).collect();
        for &(state, _) in &self.stack {
            match &self.first_cycle[state] {
                None => self.first_cycle[state] = Some(cycle.clone()),
                Some(prev) => {
                    self.witness = Some((prev.clone(), cycle));
                    return Ok(());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Unary,
    Binary,
}

fn entry_size(x: &BigInt, enc: Encoding) -> BigUint {
    let m = x.magnitude();
    match enc {
        Encoding::Unary => m.clone(),
        Encoding::Binary => BigUint::from(m.bits().max(1)),
    }
}

/// `|Q| + |T| * s` with `s` the largest representation size of a transition
/// vector under `enc`.
pub fn vass_size(v: &Vass, enc: Encoding) -> BigUint {
    let s = v
        .transitions
        .iter()
        .map(|t| t.delta.iter().map(|x| entry_size(x, enc)).sum::<BigUint>())
        .max()
        .unwrap_or_default();
    BigUint::from(v.states.len()) + BigUint::from(v.transitions.len()) * s
}

/// Total effect of a cycle.
pub fn cycle_effect(c: &[Transition]) -> Vec<BigInt> {
    let dim = c.first().map_or(0, |t| t.delta.len());
    c.iter().fold(vec![BigInt::zero(); dim], |mut acc, t| {
        for (a, d) in acc.iter_mut().zip(&t.delta) {
            *a += d;
        }
        acc
    })
}

/// Per-state count of transitions, handy for quick structural summaries.
pub fn out_degrees(v: &Vass) -> BTreeMap<StateId, usize> {
    let mut m: BTreeMap<StateId, usize> = v.states.iter().map(|s| (s.clone(), 0)).collect();
    for t in &v.transitions {
        *m.get_mut(&t.from).unwrap() += 1;
    }
    m
}

/// Largest absolute transition entry, if it fits in `u64`.
pub fn max_abs_entry(v: &Vass) -> Option<u64> {
    v.transitions
        .iter()
        .flat_map(|t| t.delta.iter())
        .map(|x| x.abs().to_u64())
        .try_fold(0u64, |m, x| x.map(|x| m.max(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_of(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn conf(s: &str, xs: &[i64]) -> Configuration {
        Configuration::new(s, vec_of(xs))
    }

    fn tr(a: &str, d: &[i64], b: &str) -> Transition {
        Transition::new(a, vec_of(d), b)
    }

    fn vass(states: &[&str], ts: Vec<Transition>, src: Configuration, tgt: Configuration) -> Vass {
        let dim = src.vector.len();
        Vass::new(dim, states.iter().map(|s| s.to_string()), ts, src, tgt).unwrap()
    }

    #[test]
    fn step_examples() {
        assert_eq!(
            step(&conf("p", &[2, 0]), &tr("p", &[-1, 1], "q")).unwrap(),
            conf("q", &[1, 1])
        );
        assert_eq!(
            step(&conf("p", &[0, 0]), &tr("p", &[-1, 1], "q")),
            Err(StepError::NegativeCounter(0))
        );
        assert_eq!(
            step(&conf("p", &[4, 1]), &tr("p", &[3, -1], "p")).unwrap(),
            conf("p", &[7, 0])
        );
        assert!(matches!(
            step(&conf("q", &[4, 1]), &tr("p", &[3, -1], "p")),
            Err(StepError::WrongState { .. })
        ));
    }

    #[test]
    fn construction_validates() {
        let err = Vass::new(
            1,
            ["p".to_string()],
            [tr("p", &[1], "q")],
            conf("p", &[0]),
            conf("p", &[0]),
        );
        assert!(matches!(err, Err(VassError::UnknownState { .. })));
        let err = Vass::new(
            1,
            ["p".to_string()],
            [],
            conf("p", &[-1]),
            conf("p", &[0]),
        );
        assert!(matches!(err, Err(VassError::NegativeVector { .. })));
    }

    #[test]
    fn empty_run_at_target_halts() {
        let v = vass(&["p"], vec![], conf("p", &[0]), conf("p", &[0]));
        let check = validate_run(&v, &Run::new(v.source.clone()));
        assert!(check.valid() && check.halting);
    }

    #[test]
    fn foreign_transition_is_reported() {
        let v = vass(
            &["p", "q"],
            vec![tr("p", &[1], "q")],
            conf("p", &[0]),
            conf("q", &[1]),
        );
        let ok = validate_run(&v, &Run::from_steps(v.source.clone(), [0]));
        assert!(ok.valid() && ok.halting);
        let bad = validate_run(&v, &Run::from_steps(v.source.clone(), [0, 7]));
        assert_eq!(bad.failure.unwrap().index, 1);
        let wrong_start = validate_run(&v, &Run::new(conf("q", &[0])));
        assert_eq!(
            wrong_start.failure.unwrap().reason,
            FailureReason::InitialMismatch
        );
    }

    #[test]
    fn repeated_blocks_validate_like_unrolled_runs() {
        // p --(+1,-1)--> q --(0,0)--> p, repeated.
        let v = vass(
            &["p", "q"],
            vec![tr("p", &[1, -1], "q"), tr("q", &[0, 0], "p")],
            conf("p", &[0, 5]),
            conf("p", &[5, 0]),
        );
        let mut run = Run::new(v.source.clone());
        run.push_block(vec![0, 1], 5);
        let check = validate_run(&v, &run);
        assert!(check.halting, "{check:?}");
        assert_eq!(run.len(), 10);
        let mut too_long = Run::new(v.source.clone());
        too_long.push_block(vec![0, 1], 6);
        let check = validate_run(&v, &too_long);
        assert_eq!(check.failure.unwrap().index, 10);
        // Agrees with the unrolled replay.
        assert!(Run::from_steps(v.source.clone(), too_long.steps())
            .configurations(&v)
            .is_err());
    }

    #[test]
    fn self_loop_is_flat() {
        let v = vass(&["p"], vec![tr("p", &[1], "p")], conf("p", &[0]), conf("p", &[0]));
        let r = is_flat(&v, DEFAULT_CYCLE_BUDGET).unwrap();
        assert!(r.is_flat);
        assert_eq!(r.cycles_seen, 1);
    }

    #[test]
    fn two_loops_on_one_state_are_not_flat() {
        let v = vass(
            &["p", "q"],
            vec![tr("p", &[1], "p"), tr("p", &[0], "q"), tr("q", &[0], "p")],
            conf("p", &[0]),
            conf("p", &[0]),
        );
        let r = is_flat(&v, DEFAULT_CYCLE_BUDGET).unwrap();
        assert!(!r.is_flat);
        let (a, b) = r.witness.unwrap();
        assert_ne!(a, b);
        let states_a: BTreeSet<_> = a.iter().map(|t| &t.from).collect();
        let states_b: BTreeSet<_> = b.iter().map(|t| &t.from).collect();
        assert!(states_a.intersection(&states_b).next().is_some());
    }

    #[test]
    fn long_cycle_counts_once() {
        let v = vass(
            &["a", "b", "c"],
            vec![tr("a", &[0], "b"), tr("b", &[0], "c"), tr("c", &[0], "a")],
            conf("a", &[0]),
            conf("a", &[0]),
        );
        let r = is_flat(&v, DEFAULT_CYCLE_BUDGET).unwrap();
        assert!(r.is_flat);
        assert_eq!(r.cycles_seen, 1);
    }

    #[test]
    fn cycle_budget_is_enforced() {
        let v = vass(
            &["p"],
            vec![tr("p", &[1], "p"), tr("p", &[2], "p"), tr("p", &[3], "p")],
            conf("p", &[0]),
            conf("p", &[0]),
        );
        // Two cycles are enough to refute flatness before the budget bites.
        assert!(!is_flat(&v, 2).unwrap().is_flat);
        assert_eq!(is_flat(&v, 1), Err(VassError::BudgetExceeded(1)));
    }

    #[test]
    fn size_examples() {
        let v = vass(&["p", "q"], vec![], conf("p", &[0, 0]), conf("q", &[0, 0]));
        assert_eq!(vass_size(&v, Encoding::Unary), BigUint::from(2u32));
        let v = vass(
            &["p", "q"],
            vec![tr("p", &[2, -1], "q")],
            conf("p", &[0, 0]),
            conf("q", &[0, 0]),
        );
        assert_eq!(vass_size(&v, Encoding::Unary), BigUint::from(5u32));
        // bits(2) + bits(1) = 2 + 1
        assert_eq!(vass_size(&v, Encoding::Binary), BigUint::from(5u32));
        let v = vass(
            &["p"],
            vec![tr("p", &[0, 8], "p")],
            conf("p", &[0, 0]),
            conf("p", &[0, 0]),
        );
        // zero counts one bit, 8 needs four
        assert_eq!(vass_size(&v, Encoding::Binary), BigUint::from(6u32));
    }

    #[test]
    fn json_round_trip() {
        let v = vass(
            &["L1", "L2"],
            vec![tr("L1", &[-3, 12345678901234567], "L2")],
            conf("L1", &[0, 0]),
            conf("L2", &[0, 0]),
        );
        let text = v.to_json();
        assert!(text.contains("\"12345678901234567\""));
        let back = Vass::from_json(&text).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.to_json(), text);
        let broken = text.replace("\"to\": \"L2\"", "\"to\": \"L9\"");
        assert!(Vass::from_json(&broken).is_err());
    }
}
