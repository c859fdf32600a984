//! Bounded breadth-first exploration of VASS configuration spaces.
//!
//! Configurations with a component above the counter bound `B` are discarded
//! and counted in [`SearchStats::pruned`]. An exhaustive search with
//! `pruned == 0` has seen the whole reachability set, so its verdict holds
//! without the bound.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, ToPrimitive};
use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::arith::BigInt;
use crate::vass::{Configuration, Run, StateId, Vass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    pub counter_bound: u64,
    pub max_configs: usize,
    pub max_depth: Option<u64>,
}

impl SearchBudget {
    pub const DEFAULT_MAX_CONFIGS: usize = 5_000_000;

    pub fn new(counter_bound: u64) -> Self {
        SearchBudget {
            counter_bound,
            max_configs: Self::DEFAULT_MAX_CONFIGS,
            max_depth: None,
        }
    }

    pub fn with_max_configs(mut self, n: usize) -> Self {
        self.max_configs = n;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("configuration budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("counter bound {0} does not fit in 32 bits")]
    BoundTooLarge(u64),
    #[error("unknown state {0:?}")]
    UnknownState(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub expanded: u64,
    pub stored: u64,
    pub frontier_peak: u64,
    pub depth_reached: u64,
    /// Successors discarded for exceeding the counter bound or depth.
    pub pruned: u64,
}

impl SearchStats {
    /// The search saw every reachable configuration.
    pub fn is_complete(&self) -> bool {
        self.pruned == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Found(Run),
    ExhaustedWithinBound,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReachResult {
    pub verdict: Verdict,
    pub stats: SearchStats,
}

impl ReachResult {
    pub fn run(&self) -> Option<&Run> {
        match &self.verdict {
            Verdict::Found(r) => Some(r),
            _ => None,
        }
    }
}

/// Record the value of `counter` whenever `transition` fires; the recorded
/// value becomes part of the explored state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    pub transition: usize,
    pub counter: usize,
}

struct Move {
    t: u32,
    to: u32,
    delta: Box<[i64]>,
}

/// The VASS with states numbered and deltas as machine integers.
struct Compact {
    dim: usize,
    out: Vec<Vec<Move>>,
    source: Box<[u32]>,
    target: Box<[u32]>,
}

fn vector_u32(v: &[BigInt], bound: u64) -> Option<Vec<u32>> {
    v.iter()
        .map(|x| x.to_u64().filter(|&x| x <= bound).map(|x| x as u32))
        .collect()
}

impl Compact {
    fn new(v: &Vass, bound: u64) -> Result<Self, SearchError> {
        if bound > u32::MAX as u64 / 2 {
            return Err(SearchError::BoundTooLarge(bound));
        }
        let sid = |s: &str| v.state_index(s).expect("validated") as u32;
        let mut out: Vec<Vec<Move>> = (0..v.states.len()).map(|_| Vec::new()).collect();
        // Entries beyond the bound are clamped to bound + 1 in magnitude,
        // which blocks or prunes the move exactly as the true value would.
        let cap = bound as i64 + 1;
        for (i, t) in v.transitions.iter().enumerate() {
            let delta: Vec<i64> = t
                .delta
                .iter()
                .map(|x| x.to_i64().unwrap_or(if x.is_negative() { -cap } else { cap }).clamp(-cap, cap))
                .collect();
            out[sid(&t.from) as usize].push(Move {
                t: i as u32,
                to: sid(&t.to),
                delta: delta.into(),
            });
        }
        let key = |c: &Configuration| -> Box<[u32]> {
            let mut k = vec![sid(&c.state)];
            // Out-of-bound endpoints get an impossible marker.
            match vector_u32(&c.vector, bound) {
                Some(v) => k.extend(v),
                None => k.extend(std::iter::repeat_n(u32::MAX, c.vector.len())),
            }
            k.into()
        };
        Ok(Compact {
            dim: v.dimension,
            out,
            source: key(&v.source),
            target: key(&v.target),
        })
    }
}

/// The explored part of the configuration graph.
struct Space {
    keys: Vec<Box<[u32]>>,
    /// (parent node, transition) for every node but the root.
    parent: Vec<(u32, u32)>,
    depth: Vec<u32>,
    edges: Vec<(u32, u32)>,
    stats: SearchStats,
    found: Option<u32>,
    exceeded: bool,
}

struct Explorer<'a> {
    c: &'a Compact,
    budget: SearchBudget,
    probe: Option<Probe>,
    stop_at_target: bool,
    record_edges: bool,
}

const UNSET: u32 = u32::MAX;

impl Explorer<'_> {
    fn run(&self) -> Space {
        let c = self.c;
        let bound = self.budget.counter_bound as i64;
        let mut root = c.source.to_vec();
        if self.probe.is_some() {
            root.push(UNSET);
        }
        let root: Box<[u32]> = root.into();
        let mut sp = Space {
            keys: vec![root.clone()],
            parent: vec![(u32::MAX, u32::MAX)],
            depth: vec![0],
            edges: Vec::new(),
            stats: SearchStats::default(),
            found: None,
            exceeded: false,
        };
        let mut index: FxHashMap<Box<[u32]>, u32> = FxHashMap::default();
        index.insert(root, 0);
        sp.stats.stored = 1;
        let is_target = |k: &[u32]| k[..=c.dim] == c.target[..];
        if self.stop_at_target && is_target(&sp.keys[0]) {
            sp.found = Some(0);
            return sp;
        }
        let mut head = 0usize;
        let mut scratch = vec![0u32; sp.keys[0].len()];
        while head < sp.keys.len() {
            let frontier = (sp.keys.len() - head) as u64;
            sp.stats.frontier_peak = sp.stats.frontier_peak.max(frontier);
            let id = head as u32;
            head += 1;
            let d = sp.depth[id as usize];
            sp.stats.depth_reached = sp.stats.depth_reached.max(d as u64);
            if self.budget.max_depth.is_some_and(|m| d as u64 >= m) {
                if !c.out[sp.keys[id as usize][0] as usize].is_empty() {
                    sp.stats.pruned += 1;
                }
                continue;
            }
            sp.stats.expanded += 1;
            let state = sp.keys[id as usize][0] as usize;
            'moves: for m in &c.out[state] {
                let cur = &sp.keys[id as usize];
                scratch.copy_from_slice(cur);
                scratch[0] = m.to;
                let mut over = false;
                for (i, &dv) in m.delta.iter().enumerate() {
                    let x = cur[i + 1] as i64 + dv;
                    if x < 0 {
                        continue 'moves;
                    }
                    over |= x > bound;
                    scratch[i + 1] = x as u32;
                }
                if over {
                    sp.stats.pruned += 1;
                    continue;
                }
                if let Some(p) = self.probe {
                    if p.transition == m.t as usize {
                        scratch[c.dim + 1] = scratch[p.counter + 1];
                    }
                }
                let next = match index.get(&scratch[..]) {
                    Some(&n) => n,
                    None => {
                        if sp.keys.len() >= self.budget.max_configs {
                            sp.exceeded = true;
                            return sp;
                        }
                        let n = sp.keys.len() as u32;
                        let k: Box<[u32]> = scratch.clone().into();
                        index.insert(k.clone(), n);
                        sp.keys.push(k);
                        sp.parent.push((id, m.t));
                        sp.depth.push(d + 1);
                        sp.stats.stored += 1;
                        if self.stop_at_target && is_target(&scratch) {
                            sp.found = Some(n);
                            sp.stats.depth_reached = sp.stats.depth_reached.max(d as u64 + 1);
                            return sp;
                        }
                        n
                    }
                };
                if self.record_edges {
                    sp.edges.push((id, next));
                }
            }
        }
        sp
    }
}

impl Space {
    fn path_to(&self, mut n: u32) -> Vec<usize> {
        let mut steps = Vec::new();
        while n != 0 {
            let (p, t) = self.parent[n as usize];
            steps.push(t as usize);
            n = p;
        }
        steps.reverse();
        steps
    }
}

fn explore(
    v: &Vass,
    budget: &SearchBudget,
    probe: Option<Probe>,
    stop_at_target: bool,
    record_edges: bool,
) -> Result<(Compact, Space), SearchError> {
    let c = Compact::new(v, budget.counter_bound)?;
    let sp = Explorer {
        c: &c,
        budget: *budget,
        probe,
        stop_at_target,
        record_edges,
    }
    .run();
    Ok((c, sp))
}

/// A minimum-length halting run among runs whose counters stay within the
/// bound. Ties are broken by transition order.
pub fn shortest_halting(v: &Vass, budget: &SearchBudget) -> Result<ReachResult, SearchError> {
    let (_, sp) = explore(v, budget, None, true, false)?;
    let verdict = match sp.found {
        Some(n) => Verdict::Found(Run::from_steps(v.source.clone(), sp.path_to(n))),
        None if sp.exceeded => Verdict::BudgetExceeded,
        None => Verdict::ExhaustedWithinBound,
    };
    Ok(ReachResult {
        verdict,
        stats: sp.stats,
    })
}

/// The exhaustive part of a search: every configuration reached, plus
/// statistics.
#[derive(Debug, Clone)]
pub struct Reachable {
    pub configs: Vec<Configuration>,
    pub stats: SearchStats,
}

pub fn reachable(v: &Vass, budget: &SearchBudget) -> Result<Reachable, SearchError> {
    let (c, sp) = explore(v, budget, None, false, false)?;
    if sp.exceeded {
        return Err(SearchError::BudgetExceeded(budget.max_configs));
    }
    let configs = sp
        .keys
        .iter()
        .map(|k| {
            Configuration::new(
                v.states[k[0] as usize].clone(),
                k[1..=c.dim].iter().map(|&x| BigInt::from(x)).collect(),
            )
        })
        .collect();
    Ok(Reachable {
        configs,
        stats: sp.stats,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FinalValues {
    pub values: BTreeSet<u64>,
    pub stats: SearchStats,
}

/// Values of `counter` over all reachable configurations in `state`.
pub fn final_values(
    v: &Vass,
    state: &str,
    counter: usize,
    budget: &SearchBudget,
) -> Result<FinalValues, SearchError> {
    let sid = v
        .state_index(state)
        .ok_or_else(|| SearchError::UnknownState(state.to_string()))? as u32;
    let (_, sp) = explore(v, budget, None, false, false)?;
    if sp.exceeded {
        return Err(SearchError::BudgetExceeded(budget.max_configs));
    }
    let values = sp
        .keys
        .iter()
        .filter(|k| k[0] == sid)
        .map(|k| k[counter + 1] as u64)
        .collect();
    Ok(FinalValues {
        values,
        stats: sp.stats,
    })
}

/// Final vectors in `state`, each with the probe value recorded along the
/// way (`None` if the probed transition never fired).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbedFinals {
    pub finals: BTreeSet<(Vec<u64>, Option<u64>)>,
    pub stats: SearchStats,
}

pub fn probe_finals(
    v: &Vass,
    state: &str,
    probe: Probe,
    budget: &SearchBudget,
) -> Result<ProbedFinals, SearchError> {
    let sid = v
        .state_index(state)
        .ok_or_else(|| SearchError::UnknownState(state.to_string()))? as u32;
    let (c, sp) = explore(v, budget, Some(probe), false, false)?;
    if sp.exceeded {
        return Err(SearchError::BudgetExceeded(budget.max_configs));
    }
    let finals = sp
        .keys
        .iter()
        .filter(|k| k[0] == sid)
        .map(|k| {
            let vec = k[1..=c.dim].iter().map(|&x| x as u64).collect();
            let p = k[c.dim + 1];
            (vec, (p != UNSET).then_some(p as u64))
        })
        .collect();
    Ok(ProbedFinals {
        finals,
        stats: sp.stats,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunCount {
    /// Number of halting paths, capped at the cutoff.
    pub count: u64,
    /// True if the count hit the cutoff (including infinitely many paths).
    pub saturated: bool,
    pub stats: SearchStats,
}

/// Count halting paths within the bound. Paths are counted on the
/// configuration graph restricted to configurations that can still reach
/// the target; a cycle there means infinitely many halting paths.
pub fn count_halting_runs(
    v: &Vass,
    budget: &SearchBudget,
    cutoff: u64,
) -> Result<RunCount, SearchError> {
    let (c, sp) = explore(v, budget, None, false, true)?;
    if sp.exceeded {
        return Err(SearchError::BudgetExceeded(budget.max_configs));
    }
    let n = sp.keys.len();
    let Some(target) = sp.keys.iter().position(|k| k[..] == c.target[..]) else {
        return Ok(RunCount {
            count: 0,
            saturated: false,
            stats: sp.stats,
        });
    };
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(a, b) in &sp.edges {
        rev[b as usize].push(a);
    }
    let mut live = vec![false; n];
    live[target] = true;
    let mut stack = vec![target as u32];
    while let Some(x) = stack.pop() {
        for &p in &rev[x as usize] {
            if !live[p as usize] {
                live[p as usize] = true;
                stack.push(p);
            }
        }
    }
    // Kahn order over live nodes, counting paths from the source.
    let mut indeg = vec![0u32; n];
    let mut fwd: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(a, b) in &sp.edges {
        if live[a as usize] && live[b as usize] {
            indeg[b as usize] += 1;
            fwd[a as usize].push(b);
        }
    }
    let mut paths = vec![0u64; n];
    paths[0] = 1;
    let mut queue: Vec<u32> = (0..n as u32)
        .filter(|&x| live[x as usize] && indeg[x as usize] == 0)
        .collect();
    let mut done = 0usize;
    while let Some(x) = queue.pop() {
        done += 1;
        for &y in &fwd[x as usize] {
            paths[y as usize] = paths[y as usize]
                .saturating_add(paths[x as usize])
                .min(cutoff);
            indeg[y as usize] -= 1;
            if indeg[y as usize] == 0 {
                queue.push(y);
            }
        }
    }
    let live_count = live.iter().filter(|&&l| l).count();
    if done < live_count {
        return Ok(RunCount {
            count: cutoff,
            saturated: true,
            stats: sp.stats,
        });
    }
    let count = paths[target];
    Ok(RunCount {
        count,
        saturated: count >= cutoff,
        stats: sp.stats,
    })
}

/// Reachable configurations grouped by state, as plain integers.
pub fn reachable_by_state(
    v: &Vass,
    budget: &SearchBudget,
) -> Result<BTreeMap<StateId, BTreeSet<Vec<u64>>>, SearchError> {
    let r = reachable(v, budget)?;
    let mut out: BTreeMap<StateId, BTreeSet<Vec<u64>>> = BTreeMap::new();
    for c in r.configs {
        out.entry(c.state)
            .or_default()
            .insert(c.vector.iter().map(|x| x.to_u64().expect("bounded")).collect());
    }
    Ok(out)
}
