//! Property suites over the families, checked at small parameters by exact
//! arithmetic and exhaustive bounded search.
//!
//! Every property records how many cases it checked and the first
//! counterexample it met, as JSON.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{bits_of, compute_n, BitString, Fraction};
use crate::families::{
    fraction_sequence, gen_2exp, gen_2exp_fixed, gen_exp, gen_exp_fixed, gen_hp, gen_initializer,
    gen_np, gen_np_mutated, gen_weak, gen_weak_mult, harness, subset_sum_brute, NpInstance,
};
use crate::lang::interp::Interpreter;
use crate::lang::{build, Artifact, CounterProgram};
use crate::replay::{replay, Policy};
use crate::search::{
    count_halting_runs, final_values, probe_finals, reachable_by_state, shortest_halting, Probe,
    SearchBudget, Verdict,
};
use crate::vass::{is_flat, validate_run, vass_size, Encoding, DEFAULT_CYCLE_BUDGET};

pub const SUITES: &[&str] = &["arith", "weakmult", "weak", "exp", "np", "fractions", "hp", "2exp"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub max_configs: usize,
    /// Add the broken `gen_np` variant to the reduction corpus.
    pub np_mutant: bool,
    /// Largest Subset-Sum set size in the np corpus.
    pub np_max_k: usize,
}

impl VerifyConfig {
    /// Enough for the Subset-Sum instances with two elements.
    pub const DEFAULT_MAX_CONFIGS: usize = 20_000_000;
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_configs: Self::DEFAULT_MAX_CONFIGS,
            np_mutant: false,
            np_max_k: 2,
        }
    }
}

/// Accumulates cases for one property, keeping the first failure.
struct Tally {
    name: String,
    cases: u64,
    first: Option<Value>,
}

impl Tally {
    fn new(name: &str) -> Self {
        Tally {
            name: name.to_string(),
            cases: 0,
            first: None,
        }
    }

    fn case(&mut self, ok: bool, detail: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok && self.first.is_none() {
            self.first = Some(detail());
        }
    }

    fn fail(&mut self, detail: Value) {
        self.case(false, || detail);
    }

    fn done(self) -> PropertyResult {
        PropertyResult {
            name: self.name,
            passed: self.first.is_none(),
            cases: self.cases,
            counterexample: self.first,
        }
    }
}

fn built(p: &CounterProgram) -> Artifact {
    build(p).expect("generated programs build")
}

fn budget(bound: u64, cfg: &VerifyConfig) -> SearchBudget {
    SearchBudget::new(bound).with_max_configs(cfg.max_configs)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

fn to_u64(x: &BigInt) -> u64 {
    x.to_u64().expect("small value")
}

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Option<Vec<SuiteResult>> {
    let names: Vec<&str> = if name == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&name) {
        vec![name]
    } else {
        return None;
    };
    Some(
        names
            .into_iter()
            .map(|s| {
                let properties = match s {
                    "arith" => vec![n_oracle(100, 20), bits_round_trip(200)],
                    "fractions" => vec![fraction_identity(16), tower_product_bound(3)],
                    "weakmult" => vec![
                        weak_mult_bound(&[(2, 1), (3, 2), (5, 3), (7, 4)], 30, cfg),
                        semantics_weak_mult(&[(2, 1), (3, 2)], 6, 12, cfg),
                    ],
                    "weak" => vec![weak_computes(12, cfg), semantics_weak(6, 12, cfg)],
                    "exp" => vec![
                        exp_characterization(4, cfg),
                        exp_trend(3, cfg),
                        exp_flat(6),
                        exp_size(8),
                    ],
                    "np" => vec![
                        initializer_exact(4),
                        np_reduction(cfg.np_max_k, 3, cfg),
                        np_component_effects(cfg.np_max_k, 3, cfg),
                    ],
                    "hp" => vec![hp_grid(3, 2, 16, 3, cfg), semantics_hp(4, 2, 12, cfg)],
                    "2exp" => vec![
                        two_exp_k1(32, cfg),
                        two_exp_canonical(2),
                        two_exp_size(8),
                    ],
                    _ => unreachable!(),
                };
                SuiteResult {
                    suite: s.to_string(),
                    passed: properties.iter().all(|p| p.passed),
                    properties,
                }
            })
            .collect(),
    )
}

// ---------------------------------------------------------------- arith

/// `N(n)` from prime powers: the largest power of each prime `p <= n + 1`
/// that stays `<= n + 1`, divided by `n + 1`.
fn n_by_prime_powers(n: u64) -> BigInt {
    let top = n + 1;
    let mut l = BigInt::one();
    for p in 2..=top {
        if (2..p).take_while(|q| q * q <= p).any(|q| p % q == 0) {
            continue;
        }
        let mut pk = p;
        while pk * p <= top {
            pk *= p;
        }
        l *= pk;
    }
    l / BigInt::from(top)
}

pub fn n_oracle(max_n: u64, fact_n: u64) -> PropertyResult {
    let mut t = Tally::new("N(n) matches prime-power lcm and N(n) <= n!");
    let mut fact = BigInt::one();
    for n in 1..=max_n {
        let got = compute_n(n).expect("n >= 1");
        let want = n_by_prime_powers(n);
        t.case(got == want, || json!({"n": n, "got": got.to_string(), "want": want.to_string()}));
        fact *= n;
        if n <= fact_n {
            t.case(got <= fact, || json!({"n": n, "N": got.to_string(), "factorial": fact.to_string()}));
        }
    }
    t.done()
}

pub fn bits_round_trip(max: u64) -> PropertyResult {
    let mut t = Tally::new("bit strings round-trip and start with 1");
    for v in 1..=max {
        let b: BitString = bits_of(&BigInt::from(v)).expect("positive");
        let ok = b.value() == BigInt::from(v) && b.msb_first()[0] && b.top() + 1 == b.len();
        t.case(ok, || json!({ "value": v }));
    }
    t.done()
}

// ------------------------------------------------------------ fractions

pub fn fraction_identity(max_k: u32) -> PropertyResult {
    let mut t = Tally::new("fraction sequences: order, last term, product, size bounds");
    for k in 1..=max_k {
        let s = fraction_sequence(k).expect("k >= 1");
        let checked = s.check();
        t.case(checked.is_ok(), || json!({"k": k, "error": checked.clone().err()}));
        // Product recomputed on numerators and denominators separately.
        let (mut num, mut den) = (BigInt::one(), BigInt::one());
        for i in 1..=k as usize {
            num *= num_traits::pow(s.a(i).clone(), 1 << i);
            den *= num_traits::pow(s.b(i).clone(), 1 << i);
        }
        let ok = &num * s.f.denom() == &den * s.f.numer();
        t.case(ok, || json!({"k": k, "product": format!("{num}/{den}"), "f": s.f.to_string()}));
    }
    t.done()
}

/// Every `(n_1..n_k)` with `sum_{j>=i} n_j <= sum_{j>=i} 2^j` has
/// `prod f_j^{n_j} <= f`, with equality only at `n_j = 2^j`.
pub fn tower_product_bound(max_k: u32) -> PropertyResult {
    let mut t = Tally::new("tower products stay below f, equal only at n_j = 2^j");
    for k in 1..=max_k {
        let s = fraction_sequence(k).expect("k >= 1");
        let caps: Vec<u64> = (1..=k).map(|j| 1u64 << j).collect();
        let mut n = vec![0u64; k as usize];
        enumerate_suffix(&caps, k as usize, 0, &mut n, &mut |n| {
            let mut p = Fraction::one();
            for (j, &nj) in n.iter().enumerate() {
                p = &p * &s.f_list[j].pow(nj as u32);
            }
            let exact = n.iter().zip(&caps).all(|(a, b)| a == b);
            let ok = p <= s.f && ((p == s.f) == exact);
            t.case(ok, || json!({"k": k, "n": n, "product": p.to_string(), "f": s.f.to_string()}));
        });
    }
    t.done()
}

/// Visit vectors indexed from the last position down so each suffix sum
/// respects the caps.
fn enumerate_suffix(caps: &[u64], pos: usize, used: u64, n: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
    if pos == 0 {
        f(n);
        return;
    }
    let cap: u64 = caps[pos - 1..].iter().sum();
    for v in 0..=cap - used {
        n[pos - 1] = v;
        enumerate_suffix(caps, pos - 1, used + v, n, f);
    }
}

// ------------------------------------------------------------- weakmult

pub fn weak_mult_bound(pairs: &[(u64, u64)], max_sum: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new("weak multiplication: x1 + y1 <= (x0 + y0) c/d, equality iff x' = y1 = 0");
    for &(c, d) in pairs {
        let frag = gen_weak_mult(c, d).expect("c > d");
        for s in 0..=max_sum {
            for x0 in 0..=s {
                let y0 = s - x0;
                let art = built(&harness(&frag, &[x0, y0], &[]));
                let first = art.expansion.loop_named("first").expect("labelled");
                let probe = Probe {
                    transition: art.compiled.line_moves[first.entry][0],
                    counter: 0,
                };
                let bound = (s * c).div_ceil(d).max(1);
                let r = match probe_finals(
                    &art.compiled.vass,
                    art.compiled.halt_state(),
                    probe,
                    &budget(bound, cfg),
                ) {
                    Ok(r) => r,
                    Err(e) => {
                        t.fail(json!({"c": c, "d": d, "x0": x0, "y0": y0, "error": e.to_string()}));
                        continue;
                    }
                };
                if r.stats.pruned > 0 {
                    t.fail(json!({"c": c, "d": d, "x0": x0, "y0": y0, "error": "bound too small"}));
                }
                for (v, xp) in &r.finals {
                    let (x1, y1) = (v[0], v[1]);
                    let le = d * (x1 + y1) <= c * s;
                    let eq = d * x1 == c * s;
                    let probe_zero = *xp == Some(0) && y1 == 0;
                    t.case(le && (eq == probe_zero), || {
                        json!({"c": c, "d": d, "x0": x0, "y0": y0, "x1": x1, "y1": y1, "x_prime": xp})
                    });
                }
            }
        }
    }
    t.done()
}

/// Interpreter and compiled VASS reach the same (line, vector) pairs.
pub fn semantics_agree(p: &CounterProgram, bound: u64, max_configs: usize) -> Result<bool, String> {
    let art = build(p).map_err(|e| e.to_string())?;
    let it = Interpreter::new(p).map_err(|e| e.to_string())?;
    let direct: BTreeSet<_> = it
        .reachable(bound, max_configs)
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect();
    let by_state = reachable_by_state(
        &art.compiled.vass,
        &SearchBudget::new(bound).with_max_configs(max_configs),
    )
    .map_err(|e| e.to_string())?;
    let mut compiled = BTreeSet::new();
    for (state, vecs) in by_state {
        let Some(line) = art.compiled.line_of_state(&state) else {
            continue;
        };
        for v in vecs {
            compiled.insert((art.expansion.origins[line].clone(), v));
        }
    }
    Ok(direct == compiled)
}

fn semantics_case(t: &mut Tally, p: &CounterProgram, bound: u64, cfg: &VerifyConfig, what: Value) {
    match semantics_agree(p, bound, cfg.max_configs) {
        Ok(ok) => t.case(ok, || what),
        Err(e) => t.fail(json!({"case": what, "error": e})),
    }
}

pub fn semantics_weak_mult(pairs: &[(u64, u64)], max_sum: u64, bound: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new("interpreter and compiled VASS agree on weak multiplication");
    for &(c, d) in pairs {
        let frag = gen_weak_mult(c, d).expect("c > d");
        for x0 in 0..=max_sum {
            for y0 in 0..=max_sum - x0 {
                let p = harness(&frag, &[x0, y0], &["y"]);
                semantics_case(&mut t, &p, bound, cfg, json!({"c": c, "d": d, "x0": x0, "y0": y0}));
            }
        }
    }
    t.done()
}

// ----------------------------------------------------------------- weak

pub fn weak_computes(max_b: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new("weak(b): final x values have maximum exactly b");
    for b in 1..=max_b {
        let art = built(&gen_weak(b).expect("b >= 1"));
        match final_values(&art.compiled.vass, art.compiled.halt_state(), 0, &budget(2 * b, cfg)) {
            Ok(r) => {
                let max = r.values.iter().max().copied();
                t.case(max == Some(b) && r.stats.pruned == 0, || {
                    json!({"b": b, "max": max, "pruned": r.stats.pruned})
                });
            }
            Err(e) => t.fail(json!({"b": b, "error": e.to_string()})),
        }
    }
    t.done()
}

pub fn semantics_weak(max_b: u64, bound: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new("interpreter and compiled VASS agree on weak(b)");
    for b in 1..=max_b {
        semantics_case(&mut t, &gen_weak(b).expect("b >= 1"), bound, cfg, json!({ "b": b }));
    }
    t.done()
}

// ------------------------------------------------------------------ exp

pub fn exp_characterization(max_n: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new("P_n from x0 halts iff N(n) | x0, with at most one halting run");
    for n in 1..=max_n {
        let big_n = to_u64(&compute_n(n).expect("n >= 1"));
        for x0 in 1..=4 * big_n {
            let art = built(&gen_exp_fixed(n, x0).expect("positive"));
            let b = budget((n + 2) * x0, cfg);
            let halts = match shortest_halting(&art.compiled.vass, &b) {
                Ok(r) => match r.verdict {
                    Verdict::Found(_) => true,
                    Verdict::ExhaustedWithinBound => false,
                    Verdict::BudgetExceeded => {
                        t.fail(json!({"n": n, "x0": x0, "error": "budget exceeded"}));
                        continue;
                    }
                },
                Err(e) => {
                    t.fail(json!({"n": n, "x0": x0, "error": e.to_string()}));
                    continue;
                }
            };
            t.case(halts == (x0 % big_n == 0), || json!({"n": n, "x0": x0, "halts": halts}));
            match count_halting_runs(&art.compiled.vass, &b, 2) {
                Ok(c) => t.case(c.count <= 1, || json!({"n": n, "x0": x0, "runs": c.count})),
                Err(e) => t.fail(json!({"n": n, "x0": x0, "error": e.to_string()})),
            }
        }
    }
    t.done()
}

/// Length of the canonical run of `gen_exp(n)` with the pump at `N(n)`.
pub fn exp_canonical_length(n: u64) -> Option<u128> {
    let big_n = compute_n(n).ok()?;
    let art = built(&gen_exp(n).ok()?);
    let out = replay(&art, &Policy::new().count("pump", big_n - 1)).ok()?;
    let check = validate_run(&art.compiled.vass, &out.run);
    (out.halted && check.halting).then(|| out.run.len())
}

pub fn exp_shortest_length(n: u64, cfg: &VerifyConfig) -> Result<Option<u128>, String> {
    let big_n = to_u64(&compute_n(n).map_err(|e| e.to_string())?);
    let art = built(&gen_exp(n).map_err(|e| e.to_string())?);
    let r = shortest_halting(&art.compiled.vass, &budget(2 * (n + 1) * big_n, cfg))
        .map_err(|e| e.to_string())?;
    match r.verdict {
        Verdict::Found(run) => Ok(Some(run.len())),
        Verdict::ExhaustedWithinBound => Ok(None),
        Verdict::BudgetExceeded => Err("budget exceeded".into()),
    }
}

pub fn exp_trend(max_n: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new("P_n shortest lengths increase and equal the canonical run");
    let mut prev = 0u128;
    for n in 1..=max_n {
        let canonical = exp_canonical_length(n);
        match exp_shortest_length(n, cfg) {
            Ok(Some(len)) => {
                t.case(Some(len) == canonical && len > prev, || {
                    json!({"n": n, "shortest": len, "canonical": canonical, "previous": prev})
                });
                prev = len;
            }
            Ok(None) => t.fail(json!({"n": n, "error": "no halting run within bound"})),
            Err(e) => t.fail(json!({"n": n, "error": e})),
        }
    }
    t.done()
}

pub fn exp_flat(max_n: u64) -> PropertyResult {
    let mut t = Tally::new("P_n compiles to a flat 3-VASS");
    for n in 1..=max_n {
        let art = built(&gen_exp(n).expect("n >= 1"));
        let flat = is_flat(&art.compiled.vass, DEFAULT_CYCLE_BUDGET).map(|r| r.is_flat);
        t.case(flat == Ok(true) && art.compiled.vass.dimension == 3, || {
            json!({"n": n, "flat": flat.ok(), "dimension": art.compiled.vass.dimension})
        });
    }
    t.done()
}

/// `size(n) <= size(1) * n^2` for the unary size of `P_n`.
pub fn exp_size(max_n: u64) -> PropertyResult {
    let mut t = Tally::new("unary size of P_n is at most C n^2, C from n = 1");
    let size = |n: u64| vass_size(&built(&gen_exp(n).expect("n >= 1")).compiled.vass, Encoding::Unary);
    let c = size(1);
    for n in 1..=max_n {
        let s = size(n);
        let cap = &c * n * n;
        t.case(s <= cap, || json!({"n": n, "size": s.to_string(), "cap": cap.to_string()}));
    }
    t.done()
}

// ------------------------------------------------------------------- np

/// An instance whose `n` is exactly `n`, for `n` where `N` is increasing.
fn instance_for_n(n: u64) -> NpInstance {
    let s0 = to_u64(&compute_n(n).expect("n >= 1"));
    NpInstance::new(s0, vec![1]).expect("valid")
}

pub fn initializer_exact(max_n: u64) -> PropertyResult {
    let mut t = Tally::new("initializer ends with e = N, f = N(k+1), other counters 0");
    for n in 1..=max_n {
        let inst = instance_for_n(n);
        let art = built(&gen_initializer(&inst, true));
        let out = match replay(&art, &Policy::new()) {
            Ok(o) => o,
            Err(e) => {
                t.fail(json!({"n": n, "error": e.to_string()}));
                continue;
            }
        };
        let p = &art.expansion.program;
        let val = |name: &str| out.at_halt[p.counters.iter().position(|c| c == name).unwrap()].clone();
        let k1 = BigInt::from(inst.k() + 1);
        let ok = inst.n == n
            && out.halted
            && validate_run(&art.compiled.vass, &out.run).halting
            && val("e") == inst.big_n
            && val("f") == &inst.big_n * &k1
            && ["x", "x'", "y", "z", "u"].iter().all(|c| val(c).is_zero());
        t.case(ok, || {
            json!({"n": n, "values": out.at_halt.iter().map(|v| v.to_string()).collect::<Vec<_>>()})
        });
    }
    t.done()
}

/// Every instance with `k <= max_k` and values in `1..=max_v`.
pub fn np_corpus(max_k: usize, max_v: u64) -> Vec<(u64, Vec<u64>)> {
    let mut out = Vec::new();
    for k in 1..=max_k {
        let mut set = vec![1u64; k];
        loop {
            for s0 in 1..=max_v {
                out.push((s0, set.clone()));
            }
            let mut i = 0;
            while i < k && set[i] == max_v {
                set[i] = 1;
                i += 1;
            }
            if i == k {
                break;
            }
            set[i] += 1;
        }
    }
    out
}

pub fn np_bound(inst: &NpInstance) -> u64 {
    to_u64(&(&inst.big_n * 8u64 * (inst.k() as u64 + 1)))
}

/// Outcome of searching one reduction instance.
pub fn np_halts(inst: &NpInstance, mutant: bool, cfg: &VerifyConfig) -> Result<(bool, Artifact, Option<crate::vass::Run>), String> {
    let p = if mutant { gen_np_mutated(inst) } else { gen_np(inst) };
    let art = built(&p);
    let r = shortest_halting(&art.compiled.vass, &budget(np_bound(inst), cfg)).map_err(|e| e.to_string())?;
    match r.verdict {
        Verdict::Found(run) => Ok((true, art, Some(run))),
        Verdict::ExhaustedWithinBound => Ok((false, art, None)),
        Verdict::BudgetExceeded => Err(format!("budget exceeded after {} configurations", r.stats.stored)),
    }
}

pub fn np_reduction(max_k: usize, max_v: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new("reduction halts iff the Subset-Sum instance is positive; flat 7-VASS");
    let mut corpus: Vec<(u64, Vec<u64>, bool)> =
        np_corpus(max_k, max_v).into_iter().map(|(s0, s)| (s0, s, false)).collect();
    if cfg.np_mutant {
        corpus.insert(0, (3, vec![1], true));
    }
    for (s0, set, mutant) in corpus {
        let inst = NpInstance::new(s0, set.clone()).expect("valid");
        let want = subset_sum_brute(s0, &set).expect("small");
        match np_halts(&inst, mutant, cfg) {
            Ok((got, art, _)) => {
                let v = &art.compiled.vass;
                let flat = is_flat(v, DEFAULT_CYCLE_BUDGET).map(|r| r.is_flat);
                t.case(got == want && flat == Ok(true) && v.dimension == 7, || {
                    json!({"s0": s0, "set": set, "mutated": mutant, "halts": got, "oracle": want,
                           "flat": flat.ok(), "dimension": v.dimension})
                });
            }
            Err(e) => t.fail(json!({"s0": s0, "set": set, "mutated": mutant, "error": e})),
        }
    }
    t.done()
}

/// In every halting run found, each component lowers `f` by exactly `N`
/// and changes `u` by `+s0`, `-s_i` or 0 as its kind demands.
pub fn np_component_effects(max_k: usize, max_v: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new("components consume N from f and move u by their value");
    for (s0, set) in np_corpus(max_k, max_v) {
        if !subset_sum_brute(s0, &set).expect("small") {
            continue;
        }
        let inst = NpInstance::new(s0, set.clone()).expect("valid");
        let (art, run) = match np_halts(&inst, false, cfg) {
            Ok((true, art, Some(run))) => (art, run),
            Ok(_) => {
                t.fail(json!({"s0": s0, "set": set, "error": "no halting run"}));
                continue;
            }
            Err(e) => {
                t.fail(json!({"s0": s0, "set": set, "error": e}));
                continue;
            }
        };
        let confs = run.configurations(&art.compiled.vass).expect("found runs are valid");
        let ci = |n: &str| art.expansion.program.counters.iter().position(|c| c == n).unwrap();
        let (f, u) = (ci("f"), ci("u"));
        // (label, f, u) at every arrival at a component start or the halt.
        let marks: Vec<(String, BigInt, BigInt)> = confs
            .iter()
            .filter_map(|c| {
                let line = art.compiled.line_of_state(&c.state)?;
                let label = art.expansion.line_label(line).filter(|l| is_component_label(l))?;
                Some((label.to_string(), c.vector[f].clone(), c.vector[u].clone()))
            })
            .collect();
        let mut ok = marks.first().map(|m| m.0.as_str()) == Some("r0")
            && marks.last().map(|m| m.0.as_str()) == Some("h")
            && marks.len() == inst.k() + 2;
        for w in marks.windows(2) {
            let (label, f0, u0) = &w[0];
            let (_, f1, u1) = &w[1];
            let want_u = match label.as_bytes()[0] {
                b'r' => BigInt::from(s0),
                b't' => -BigInt::from(set[label[1..].parse::<usize>().unwrap() - 1]),
                _ => BigInt::zero(),
            };
            ok &= f0 - f1 == inst.big_n && u1 - u0 == want_u;
        }
        t.case(ok, || {
            json!({"s0": s0, "set": set, "marks": marks.iter()
                .map(|(l, f, u)| json!([l, f.to_string(), u.to_string()])).collect::<Vec<_>>()})
        });
    }
    t.done()
}

fn is_component_label(l: &str) -> bool {
    l == "r0"
        || l == "h"
        || (l.len() > 1 && (l.starts_with('f') || l.starts_with('t')) && l[1..].bytes().all(|b| b.is_ascii_digit()))
}

// ------------------------------------------------------------------- hp

/// `(c/d)^e` scaled: returns `(c^e, d^e)`.
fn powers(c: u64, d: u64, e: u64) -> (BigInt, BigInt) {
    (
        num_traits::pow(BigInt::from(c), e as usize),
        num_traits::pow(BigInt::from(d), e as usize),
    )
}

pub fn hp_grid(c: u64, d: u64, max_sum: u64, max_z: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new(
        "HP: x1 + y1 <= (x0 + y0)(c/d)^(z0 - z1); exact power reachable iff d^z0 | x0 + y0, then y1 = z1 = 0",
    );
    let frag = gen_hp(c, d).expect("irreducible");
    for z0 in 0..=max_z {
        for s in 0..=max_sum {
            for x0 in 0..=s {
                let y0 = s - x0;
                let art = built(&harness(&frag, &[x0, y0, z0], &[]));
                let (cz, dz) = powers(c, d, z0);
                let bound = to_u64(&ceil_div(&(&cz * s), &dz)).max(z0).max(1);
                let r = match reachable_by_state(&art.compiled.vass, &budget(bound, cfg)) {
                    Ok(r) => r,
                    Err(e) => {
                        t.fail(json!({"x0": x0, "y0": y0, "z0": z0, "error": e.to_string()}));
                        continue;
                    }
                };
                let finals = r.get(art.compiled.halt_state()).cloned().unwrap_or_default();
                let target = &cz * s;
                let mut exact = Vec::new();
                for v in &finals {
                    let (x1, y1, z1) = (v[0], v[1], v[2]);
                    let (ce, de) = powers(c, d, z0 - z1);
                    t.case(&de * (x1 + y1) <= &ce * s, || {
                        json!({"x0": x0, "y0": y0, "z0": z0, "final": v})
                    });
                    if &dz * x1 == target {
                        exact.push(v.clone());
                    }
                }
                let divides = (BigInt::from(s) % &dz).is_zero();
                let clean = exact.iter().all(|v| v[1] == 0 && v[2] == 0);
                t.case((!exact.is_empty()) == divides && clean, || {
                    json!({"x0": x0, "y0": y0, "z0": z0, "exact_finals": exact, "divisible": divides})
                });
            }
        }
    }
    t.done()
}

pub fn semantics_hp(max_sum: u64, max_z: u64, bound: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new("interpreter and compiled VASS agree on HP");
    let frag = gen_hp(3, 2).expect("irreducible");
    for z0 in 0..=max_z {
        for x0 in 0..=max_sum {
            let p = harness(&frag, &[x0, max_sum - x0, z0], &["z"]);
            semantics_case(&mut t, &p, bound, cfg, json!({"x0": x0, "y0": max_sum - x0, "z0": z0}));
        }
    }
    t.done()
}

// ----------------------------------------------------------------- 2exp

/// Halting with the pump fixed at `pump`, searched within `2 * pump`.
pub fn two_exp_fixed_halts(k: u32, pump: u64, cfg: &VerifyConfig) -> Result<Option<u128>, String> {
    let (p, meta) = gen_2exp_fixed(k, &BigInt::from(pump)).map_err(|e| e.to_string())?;
    let art = built(&p);
    let f = &meta.fractions.f;
    let bound = to_u64(&ceil_div(&(f.numer() * pump), f.denom())).max(1u64 << k) + 1;
    let r = shortest_halting(&art.compiled.vass, &budget(bound, cfg)).map_err(|e| e.to_string())?;
    match r.verdict {
        Verdict::Found(run) => Ok(Some(run.len())),
        Verdict::ExhaustedWithinBound => Ok(None),
        Verdict::BudgetExceeded => Err("budget exceeded".into()),
    }
}

/// Canonical run of `gen_2exp_fixed(k, pump)`: every loop maximal.
pub fn two_exp_fixed_canonical(k: u32, pump: &BigInt) -> Option<u128> {
    let (p, _) = gen_2exp_fixed(k, pump).ok()?;
    let art = built(&p);
    let out = replay(&art, &Policy::new()).ok()?;
    (out.halted && validate_run(&art.compiled.vass, &out.run).halting).then(|| out.run.len())
}

pub fn two_exp_k1(max_pump: u64, cfg: &VerifyConfig) -> PropertyResult {
    let mut t = Tally::new("V_1: not flat, halts, pump N halts iff 16 | N, canonical is shortest");
    let (p, meta) = gen_2exp(1).expect("k = 1");
    let art = built(&p);
    let flat = is_flat(&art.compiled.vass, DEFAULT_CYCLE_BUDGET).map(|r| r.is_flat);
    t.case(flat == Ok(false), || json!({ "flat": flat.ok() }));
    let halting = replay(&art, &Policy::new().count("pump", &meta.n_can - 1))
        .map(|o| o.halted && validate_run(&art.compiled.vass, &o.run).halting);
    t.case(halting == Ok(true), || json!({"canonical_halts": halting.ok()}));
    let m = to_u64(&meta.m);
    for pump in 1..=max_pump {
        match two_exp_fixed_halts(1, pump, cfg) {
            Ok(len) => {
                t.case(len.is_some() == (pump % m == 0), || json!({"pump": pump, "halts": len.is_some()}));
                if BigInt::from(pump) == meta.n_can {
                    let canon = two_exp_fixed_canonical(1, &meta.n_can);
                    t.case(len.is_some() && len == canon, || {
                        json!({"pump": pump, "shortest": len, "canonical": canon})
                    });
                }
            }
            Err(e) => t.fail(json!({"pump": pump, "error": e})),
        }
    }
    t.done()
}

/// Canonical run of `gen_2exp(k)` halts; after loop `hp{j}` exits,
/// `x = N_can * prod_{i>=j} (a_i/b_i)^(2^i)`.
pub fn two_exp_canonical(max_k: u32) -> PropertyResult {
    let mut t = Tally::new("V_k canonical run halts with x after hp{j} as the tower product predicts");
    for k in 1..=max_k {
        let (p, meta) = gen_2exp(k).expect("k >= 1");
        let art = built(&p);
        let out = match replay(&art, &Policy::new().count("pump", &meta.n_can - 1)) {
            Ok(o) => o,
            Err(e) => {
                t.fail(json!({"k": k, "error": e.to_string()}));
                continue;
            }
        };
        let valid = validate_run(&art.compiled.vass, &out.run).halting;
        t.case(out.halted && valid, || json!({"k": k, "halted": out.halted, "valid": valid}));
        let mut x = Fraction::integer(meta.n_can.clone()).expect("positive");
        for j in (1..=k as usize).rev() {
            x = &x * &meta.fractions.f_list[j - 1].pow(1 << j);
            let got = out.exit(&format!("hp{j}")).map(|e| e.values[1].clone());
            let want = x.scale_exact(&BigInt::one());
            t.case(got.is_some() && got == want, || {
                json!({"k": k, "j": j, "x": got.map(|g| g.to_string()), "predicted": x.to_string()})
            });
        }
    }
    t.done()
}

/// `size(k) <= size(1) * k^3` for the binary size of `V_k`.
pub fn two_exp_size(max_k: u32) -> PropertyResult {
    let mut t = Tally::new("binary size of V_k is at most C k^3, C from k = 1");
    let size = |k: u32| vass_size(&built(&gen_2exp(k).expect("k >= 1").0).compiled.vass, Encoding::Binary);
    let c = size(1);
    for k in 1..=max_k {
        let s = size(k);
        let cap = &c * k * k * k;
        t.case(s <= cap, || json!({"k": k, "size": s.to_string(), "cap": cap.to_string()}));
    }
    t.done()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_n_small() {
        let want = [1, 2, 3, 12, 10, 60, 105, 280];
        for (i, w) in want.iter().enumerate() {
            assert_eq!(n_by_prime_powers(i as u64 + 1), BigInt::from(*w));
        }
    }

    #[test]
    fn suffix_enumeration_counts() {
        let mut seen = 0;
        enumerate_suffix(&[2], 1, 0, &mut vec![0], &mut |_| seen += 1);
        assert_eq!(seen, 3);
        let mut seen = Vec::new();
        enumerate_suffix(&[2, 4], 2, 0, &mut vec![0, 0], &mut |n| seen.push(n.to_vec()));
        assert!(seen.iter().all(|n| n[1] <= 4 && n[0] + n[1] <= 6));
        assert_eq!(seen.len(), (0..=4).map(|b| 7 - b).sum::<usize>());
    }

    #[test]
    fn corpus_shape() {
        let c = np_corpus(2, 3);
        assert_eq!(c.len(), 3 * 3 + 9 * 3);
        assert!(c.contains(&(3, vec![1, 2])));
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", &VerifyConfig::default()).is_none());
    }

    #[test]
    fn small_properties_pass() {
        let cfg = VerifyConfig::default();
        assert!(n_oracle(30, 10).passed);
        assert!(fraction_identity(4).passed);
        assert!(weak_mult_bound(&[(3, 2)], 6, &cfg).passed);
        assert!(weak_computes(4, &cfg).passed);
        assert!(exp_characterization(2, &cfg).passed);
    }
}
