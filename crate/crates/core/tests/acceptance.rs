//! Acceptance suite: one PASS/FAIL line per criterion, each under a fixed
//! time limit. Oracles are recomputed here from first principles.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use vasskit::arith::compute_n;
use vasskit::families::{
    fraction_sequence, gen_2exp, gen_2exp_fixed, gen_exp, gen_exp_fixed, gen_hp, gen_np, gen_weak,
    gen_weak_mult, harness, NpInstance,
};
use vasskit::lang::interp::Interpreter;
use vasskit::lang::{build, Artifact, CounterProgram};
use vasskit::replay::{replay, Policy};
use vasskit::search::{
    count_halting_runs, final_values, probe_finals, reachable_by_state, shortest_halting, Probe,
    SearchBudget, Verdict,
};
use vasskit::vass::{is_flat, validate_run, vass_size, Encoding, DEFAULT_CYCLE_BUDGET};

type Outcome = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn art(p: &CounterProgram) -> Artifact {
    build(p).expect("builds")
}

fn lcm_fold(hi: u64) -> BigInt {
    (2..=hi).fold(BigInt::one(), |acc, i| {
        let i = BigInt::from(i);
        let g = acc.gcd(&i);
        acc * i / g
    })
}

fn n_of(n: u64) -> u64 {
    (lcm_fold(n + 1) / BigInt::from(n + 1)).to_u64().unwrap()
}

/// Halting within the bound: `Some(length)` or `None`; budget overruns are
/// failures.
fn shortest(a: &Artifact, bound: u64) -> Result<Option<u128>, String> {
    shortest_within(a, SearchBudget::new(bound))
}

fn shortest_within(a: &Artifact, budget: SearchBudget) -> Result<Option<u128>, String> {
    let r = shortest_halting(&a.compiled.vass, &budget).map_err(|e| e.to_string())?;
    match r.verdict {
        Verdict::Found(run) => Ok(Some(run.len())),
        Verdict::ExhaustedWithinBound => Ok(None),
        Verdict::BudgetExceeded => Err("search budget exceeded".into()),
    }
}

fn pow(b: u64, e: u64) -> BigInt {
    num_traits::pow(BigInt::from(b), e as usize)
}

fn fraction_identity() -> Outcome {
    for k in 1..=16u32 {
        let s = fraction_sequence(k).map_err(|e| e.to_string())?;
        let q = pow(4, k as u64);
        // r_i = (4^k + 2^(k-i)) / 4^k as raw numerator/denominator pairs.
        let r: Vec<(BigInt, BigInt)> = (1..=k as u64)
            .map(|i| (&q + pow(2, k as u64 - i), q.clone()))
            .collect();
        let mut tail = (BigInt::one(), BigInt::one());
        let mut f_raw = vec![(BigInt::zero(), BigInt::zero()); k as usize];
        for i in (0..k as usize).rev() {
            f_raw[i] = (&r[i].0 * &tail.1, &r[i].1 * &tail.0);
            tail = (&tail.0 * &r[i].0, &tail.1 * &r[i].1);
        }
        for (i, (n, d)) in f_raw.iter().enumerate() {
            let g = n.gcd(d);
            let (a, b) = (n / &g, d / &g);
            ensure(&a == s.a(i + 1) && &b == s.b(i + 1), || format!("k={k}: f_{} differs", i + 1))?;
            ensure(a > b, || format!("k={k}: f_{} <= 1", i + 1))?;
            if i > 0 {
                let (pa, pb) = (s.a(i), s.b(i));
                ensure(pa * &b < &a * pb, || format!("k={k}: not increasing at {}", i + 1))?;
            }
            let bound = pow(4, (k * k + k) as u64);
            ensure(a <= bound && b <= bound, || format!("k={k}: f_{} too large", i + 1))?;
        }
        ensure(*s.a(k as usize) == &q + 1 && *s.b(k as usize) == q, || format!("k={k}: f_k != 1 + 4^-k"))?;
        // f = (r_1 .. r_k)^2 and the tower product agree exactly.
        let (fa, fb) = (&tail.0 * &tail.0, &tail.1 * &tail.1);
        let (mut pa, mut pb) = (BigInt::one(), BigInt::one());
        for i in 1..=k as usize {
            pa *= num_traits::pow(s.a(i).clone(), 1 << i);
            pb *= num_traits::pow(s.b(i).clone(), 1 << i);
        }
        ensure(&pa * &fb == &pb * &fa, || format!("k={k}: product identity fails"))?;
        ensure(&pa * s.f.denom() == &pb * s.f.numer(), || format!("k={k}: stored f differs"))?;
        let big = pow(4, 2 * (k * k + k) as u64);
        ensure(*s.f.numer() <= big && *s.f.denom() <= big, || format!("k={k}: f too large"))?;
    }
    Ok(())
}

fn n_oracle() -> Outcome {
    let mut fact = BigInt::one();
    for n in 1..=100u64 {
        let want = lcm_fold(n + 1) / BigInt::from(n + 1);
        let got = compute_n(n).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("N({n}) = {got}, fold gives {want}"))?;
        fact *= n;
        if n <= 20 {
            ensure(got <= fact, || format!("N({n}) > {n}!"))?;
        }
    }
    Ok(())
}

fn weak_mult_bound() -> Outcome {
    for (c, d) in [(2u64, 1u64), (3, 2), (5, 3), (7, 4)] {
        let frag = gen_weak_mult(c, d).map_err(|e| e.to_string())?;
        for s in 0..=30u64 {
            for x0 in 0..=s {
                let a = art(&harness(&frag, &[x0, s - x0], &[]));
                let first = a.expansion.loop_named("first").ok_or("no loop 'first'")?;
                let probe = Probe {
                    transition: a.compiled.line_moves[first.entry][0],
                    counter: 0,
                };
                let bound = (s * c).div_ceil(d).max(1);
                let r = probe_finals(&a.compiled.vass, a.compiled.halt_state(), probe, &SearchBudget::new(bound))
                    .map_err(|e| e.to_string())?;
                ensure(r.stats.pruned == 0, || format!("({c},{d}) x0={x0}: bound {bound} pruned"))?;
                for (v, xp) in &r.finals {
                    let (x1, y1) = (v[0], v[1]);
                    let case = || format!("({c},{d}) x0={x0} y0={}: final ({x1},{y1}) x'={xp:?}", s - x0);
                    ensure(d * (x1 + y1) <= c * s, case)?;
                    ensure((d * x1 == c * s) == (*xp == Some(0) && y1 == 0), case)?;
                }
            }
        }
    }
    Ok(())
}

fn prop_weak() -> Outcome {
    for b in 1..=12u64 {
        let a = art(&gen_weak(b).map_err(|e| e.to_string())?);
        let r = final_values(&a.compiled.vass, a.compiled.halt_state(), 0, &SearchBudget::new(2 * b))
            .map_err(|e| e.to_string())?;
        ensure(r.stats.pruned == 0, || format!("b={b}: bound pruned"))?;
        let max = r.values.iter().max().copied();
        ensure(max == Some(b), || format!("b={b}: max final {max:?}"))?;
    }
    Ok(())
}

fn exp_halting() -> Outcome {
    for n in 1..=4u64 {
        let big_n = n_of(n);
        for x0 in 1..=4 * big_n {
            let a = art(&gen_exp_fixed(n, x0).map_err(|e| e.to_string())?);
            let bound = (n + 2) * x0;
            let halts = shortest(&a, bound)?.is_some();
            ensure(halts == (x0 % big_n == 0), || format!("n={n} x0={x0}: halts={halts}"))?;
            let c = count_halting_runs(&a.compiled.vass, &SearchBudget::new(bound), 2).map_err(|e| e.to_string())?;
            ensure(c.count <= 1, || format!("n={n} x0={x0}: {} halting runs", c.count))?;
        }
    }
    Ok(())
}

fn thm_exp_trend() -> Outcome {
    let mut prev = 0u128;
    for n in 1..=3u64 {
        let big_n = n_of(n);
        let a = art(&gen_exp(n).map_err(|e| e.to_string())?);
        let len = shortest(&a, 2 * (n + 1) * big_n)?.ok_or_else(|| format!("n={n}: no halting run"))?;
        let out = replay(&a, &Policy::new().count("pump", big_n - 1)).map_err(|e| e.to_string())?;
        ensure(out.halted && validate_run(&a.compiled.vass, &out.run).halting, || format!("n={n}: canonical run invalid"))?;
        // x_i = x_{n+1} (n+1) / i at the exit of zx{i}.
        for i in 1..=n {
            let x = &out.exit(&format!("zx{i}")).ok_or("missing probe")?.values[0];
            ensure(*x == BigInt::from(big_n * (n + 1) / i), || format!("n={n}: x_{i} = {x}"))?;
        }
        ensure(out.run.len() == len, || format!("n={n}: shortest {len}, canonical {}", out.run.len()))?;
        ensure(len > prev, || format!("n={n}: {len} does not exceed {prev}"))?;
        prev = len;
    }
    Ok(())
}

fn prop_hp() -> Outcome {
    let (c, d) = (3u64, 2u64);
    let frag = gen_hp(c, d).map_err(|e| e.to_string())?;
    for z0 in 0..=3u64 {
        for s in 0..=16u64 {
            for x0 in 0..=s {
                let y0 = s - x0;
                let a = art(&harness(&frag, &[x0, y0, z0], &[]));
                let bound = (pow(c, z0) * s).div_ceil(&pow(d, z0)).to_u64().unwrap().max(z0).max(1);
                let r = reachable_by_state(&a.compiled.vass, &SearchBudget::new(bound)).map_err(|e| e.to_string())?;
                let finals: BTreeSet<Vec<u64>> = r.get(a.compiled.halt_state()).cloned().unwrap_or_default();
                let mut exact = false;
                for v in &finals {
                    let (x1, y1, z1) = (v[0], v[1], v[2]);
                    let used = z0 - z1;
                    ensure(pow(d, used) * (x1 + y1) <= pow(c, used) * s, || {
                        format!("x0={x0} y0={y0} z0={z0}: final {v:?} too large")
                    })?;
                    if pow(d, z0) * x1 == pow(c, z0) * s {
                        ensure(y1 == 0 && z1 == 0, || format!("x0={x0} y0={y0} z0={z0}: exact final {v:?}"))?;
                        exact = true;
                    }
                }
                let divisible = s % (1u64 << z0) == 0;
                ensure(exact == divisible, || {
                    format!("x0={x0} y0={y0} z0={z0}: exact final {exact}, 2^z0 | x0+y0 {divisible}")
                })?;
            }
        }
    }
    Ok(())
}

fn subset_sum(target: u64, set: &[u64]) -> bool {
    match set.split_first() {
        None => target == 0,
        Some((&s, rest)) => subset_sum(target, rest) || (s <= target && subset_sum(target - s, rest)),
    }
}

fn thm_np() -> Outcome {
    let mut failures = Vec::new();
    let mut sets: Vec<Vec<u64>> = (1..=3).map(|a| vec![a]).collect();
    for a in 1..=3 {
        for b in 1..=3 {
            sets.push(vec![a, b]);
        }
    }
    for set in &sets {
        for s0 in 1..=3u64 {
            let inst = NpInstance::new(s0, set.clone()).map_err(|e| e.to_string())?;
            let a = art(&gen_np(&inst));
            let v = &a.compiled.vass;
            let flat = is_flat(v, DEFAULT_CYCLE_BUDGET).map_err(|e| e.to_string())?.is_flat;
            ensure(flat && v.dimension == 7, || format!("s0={s0} S={set:?}: flat={flat} dim={}", v.dimension))?;
            let bound = (&inst.big_n * 8u64 * (set.len() as u64 + 1)).to_u64().unwrap();
            // The k = 2 instances store about 5 million configurations.
            let halts = shortest_within(&a, SearchBudget::new(bound).with_max_configs(20_000_000))
                .map_err(|e| format!("s0={s0} S={set:?}: {e}"))?
                .is_some();
            if halts != subset_sum(s0, set) {
                failures.push(format!("s0={s0} S={set:?} halts={halts}"));
            }
        }
    }
    ensure(failures.is_empty(), || format!("{} mismatches: {}", failures.len(), failures.join("; ")))
}

fn thm_2exp() -> Outcome {
    let (p, meta) = gen_2exp(1).map_err(|e| e.to_string())?;
    let a = art(&p);
    let flat = is_flat(&a.compiled.vass, DEFAULT_CYCLE_BUDGET).map_err(|e| e.to_string())?.is_flat;
    ensure(!flat, || "V_1 is flat".into())?;
    let out = replay(&a, &Policy::new().count("pump", &meta.n_can - 1)).map_err(|e| e.to_string())?;
    ensure(out.halted && validate_run(&a.compiled.vass, &out.run).halting, || "no canonical halting run".into())?;
    // b_1 = 4, so halting needs 4^2 | N.
    let m = 16u64;
    for pump in 1..=32u64 {
        let (p, _) = gen_2exp_fixed(1, &BigInt::from(pump)).map_err(|e| e.to_string())?;
        let a = art(&p);
        // x + y never exceeds N (5/4)^2.
        let bound = (25 * pump).div_ceil(16).max(2);
        let len = shortest(&a, bound)?;
        ensure(len.is_some() == (pump % m == 0), || format!("N={pump}: halts={}", len.is_some()))?;
        if pump == 16 {
            let out = replay(&a, &Policy::new()).map_err(|e| e.to_string())?;
            ensure(out.halted && validate_run(&a.compiled.vass, &out.run).halting, || "N=16: canonical invalid".into())?;
            ensure(len == Some(out.run.len()), || format!("N=16: shortest {len:?}, canonical {}", out.run.len()))?;
        }
    }
    Ok(())
}

fn size_bounds() -> Outcome {
    let unary = |n: u64| vass_size(&art(&gen_exp(n).unwrap()).compiled.vass, Encoding::Unary);
    let c = unary(1);
    for n in 1..=8u64 {
        let s = unary(n);
        ensure(s <= &c * n * n, || format!("P_{n}: size {s} > {c}*{n}^2"))?;
    }
    let binary = |k: u32| vass_size(&art(&gen_2exp(k).unwrap().0).compiled.vass, Encoding::Binary);
    let c = binary(1);
    for k in 1..=8u32 {
        let s = binary(k);
        ensure(s <= &c * k * k * k, || format!("V_{k}: size {s} > {c}*{k}^3"))?;
    }
    Ok(())
}

fn same_reachable(p: &CounterProgram, bound: u64) -> Outcome {
    let a = art(p);
    let it = Interpreter::new(p).map_err(|e| e.to_string())?;
    let direct: BTreeSet<_> = it.reachable(bound, 1_000_000).map_err(|e| e.to_string())?;
    let mut compiled = BTreeSet::new();
    let by_state = reachable_by_state(&a.compiled.vass, &SearchBudget::new(bound)).map_err(|e| e.to_string())?;
    for (state, vecs) in by_state {
        if let Some(line) = a.compiled.line_of_state(&state) {
            for v in vecs {
                compiled.insert((a.expansion.origins[line].clone(), v));
            }
        }
    }
    ensure(direct == compiled, || {
        format!("{} interpreted vs {} compiled configurations", direct.len(), compiled.len())
    })
}

fn semantics() -> Outcome {
    for b in 1..=8 {
        same_reachable(&gen_weak(b).unwrap(), 20).map_err(|e| format!("weak({b}): {e}"))?;
    }
    for (c, d) in [(2, 1), (3, 2), (5, 3)] {
        let frag = gen_weak_mult(c, d).unwrap();
        for (x0, y0) in [(0, 0), (3, 1), (4, 4)] {
            same_reachable(&harness(&frag, &[x0, y0], &["y"]), 20)
                .map_err(|e| format!("weak_mult({c},{d}) from ({x0},{y0}): {e}"))?;
        }
    }
    let frag = gen_hp(3, 2).unwrap();
    for (x0, y0, z0) in [(4, 0, 2), (2, 1, 1), (0, 3, 3)] {
        same_reachable(&harness(&frag, &[x0, y0, z0], &["z"]), 20)
            .map_err(|e| format!("HP(3,2) from ({x0},{y0},{z0}): {e}"))?;
    }
    Ok(())
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("fraction identity k=1..16", 10, fraction_identity),
        ("N(n) oracle n<=100, N(n)<=n! n<=20", 5, n_oracle),
        ("weak multiplication grid, sums<=30", 60, weak_mult_bound),
        ("weak(b) computes b, b=1..12", 60, prop_weak),
        ("P_n halts iff N(n)|x0, at most one run, n<=4", 300, exp_halting),
        ("P_n shortest = canonical, increasing, n<=3", 300, thm_exp_trend),
        ("HP(3,2) grid, x0+y0<=16, z0<=3", 120, prop_hp),
        ("Subset-Sum reduction k<=2, values<=3", 600, thm_np),
        ("V_1 not flat, halts iff 16|N, canonical shortest", 600, thm_2exp),
        ("size O(n^2) unary P_n, O(k^3) binary V_k", 5, size_bounds),
        ("interpreter and compiled VASS reach the same configurations", 120, semantics),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = result.and_then(|()| {
            ensure(took <= Duration::from_secs(limit), || format!("took {took:.1?}, limit {limit}s"))
        });
        match result {
            Ok(()) => println!("PASS {name} ({took:.1?})"),
            Err(e) => {
                failed += 1;
                println!("FAIL {name} ({took:.1?}): {e}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
