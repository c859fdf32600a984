//! Generators for the program families: weak multiplication and weak
//! computation, the exponential family `P_n`, the Subset-Sum reduction, the
//! Hopcroft-Pansiot gadget and the doubly-exponential 4-VASS family.
//!
//! Generators emit `.cp` text and parse it, so the text form is always what
//! the tools see.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, bits_of, compute_n, min_n_for, BitString, Fraction};
use crate::lang::ast::{CounterOp, CounterProgram, MetaExpr, Node, OpKind, Stmt};
use crate::lang::parse;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Arith(#[from] arith::ArithError),
}

fn bad<T>(msg: impl Into<String>) -> Result<T, FamilyError> {
    Err(FamilyError::BadParameter(msg.into()))
}

fn parse_generated(text: &str) -> CounterProgram {
    match parse(text) {
        Ok(p) => p,
        Err(e) => panic!("generated program does not parse: {e}\n{text}"),
    }
}

/// Indent every nonempty line of `text` by `depth` levels.
fn indent(text: &str, depth: usize) -> String {
    let pad = "  ".repeat(depth);
    text.lines()
        .map(|l| {
            if l.is_empty() {
                String::new()
            } else {
                format!("{pad}{l}\n")
            }
        })
        .collect()
}

fn weak_mult_text(c: &str, d: &str) -> String {
    format!(
        "first: loop\n  x -= 1  y += 1\nendloop\nsecond: loop\n  x += {c}  y -= {d}\nendloop\n"
    )
}

/// Weak multiplication of `x + y` by `c/d`, over counters `x` and `y`.
/// The loops are labelled `first` and `second`.
pub fn gen_weak_mult(c: u64, d: u64) -> Result<CounterProgram, FamilyError> {
    if d < 1 || c <= d {
        return bad(format!("weak multiplication needs c > d >= 1, got {c}/{d}"));
    }
    Ok(parse_generated(&format!(
        "counters x y\n{}",
        weak_mult_text(&c.to_string(), &d.to_string())
    )))
}

/// Weak computation of `b` in `x`: one doubling step per bit, oldest first.
/// Nothing is zero-tested at the halt.
pub fn gen_weak(b: u64) -> Result<CounterProgram, FamilyError> {
    if b == 0 {
        return bad("weak(b) needs b >= 1");
    }
    let m = bits_of(&BigInt::from(b))?.top();
    Ok(parse_generated(&format!(
        "counters x y
const B = {b}
init
for i := {m} downto 0
  loop
    x -= 1  y += 1
  endloop
  loop
    x += 2  y -= 1
  endloop
  if bit(B, i) = 1 then
    x += 1
  endif
endfor
halt
"
    )))
}

fn exp_text(n: u64, start: &str) -> String {
    format!(
        "counters x y z
init
{start}for i := {n} downto 1
  xz{{i}}: loop
    x -= 1  z += 1
  endloop
  zx{{i}}: loop
    x += i + 1  z -= i
  endloop
endfor
drain: loop
  x -= {n1}  y -= 1
endloop
halt y
",
        n1 = n + 1
    )
}

/// The exponential family: a pump loop sets `x = y`, then `x` is weakly
/// multiplied by `(i+1)/i` for `i = n..1`, then `x` is drained against `y`.
/// Loops are labelled `pump`, `xz{i}`, `zx{i}` and `drain`.
pub fn gen_exp(n: u64) -> Result<CounterProgram, FamilyError> {
    if n == 0 {
        return bad("exp(n) needs n >= 1");
    }
    let start = "x += 1  y += 1\npump: loop\n  x += 1  y += 1\nendloop\n";
    Ok(parse_generated(&exp_text(n, start)))
}

/// Test-harness variant of [`gen_exp`] with the pump replaced by fixed
/// increments `x = y = x0`.
pub fn gen_exp_fixed(n: u64, x0: u64) -> Result<CounterProgram, FamilyError> {
    if n == 0 || x0 == 0 {
        return bad("exp_fixed(n, x0) needs n >= 1 and x0 >= 1");
    }
    Ok(parse_generated(&exp_text(n, &format!("x += {x0}  y += {x0}\n"))))
}

/// A Subset-Sum instance together with the derived reduction parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NpInstance {
    pub s0: u64,
    pub set: Vec<u64>,
    /// Least `n` with `N(n) >= s0, s_1, .., s_k`.
    pub n: u64,
    #[serde(with = "arith::decimal")]
    pub big_n: BigInt,
    /// Index of the top bit of `N(n)`.
    pub m: usize,
}

impl NpInstance {
    pub fn new(s0: u64, set: Vec<u64>) -> Result<Self, FamilyError> {
        if set.is_empty() {
            return bad("the set must be nonempty");
        }
        if s0 == 0 || set.contains(&0) {
            return bad("all values must be positive");
        }
        let values: Vec<BigInt> = std::iter::once(s0).chain(set.iter().copied()).map(BigInt::from).collect();
        let n = min_n_for(&values)?;
        let big_n = compute_n(n)?;
        let m = bits_of(&big_n)?.top();
        Ok(NpInstance {
            s0,
            set,
            n,
            big_n,
            m,
        })
    }

    pub fn k(&self) -> usize {
        self.set.len()
    }

    pub fn bits(&self) -> BitString {
        bits_of(&self.big_n).expect("N(n) >= 1")
    }
}

fn initializer_text(n: u64, k: usize) -> String {
    let k1 = k + 1;
    format!(
        "x += 1  y += 1  e += 1  f += {k1}
for i := M - 1 downto 0
  loop
    x -= 1  x' += 1
    y -= 1  e -= 1  f -= {k1}
  endloop
  loop
    x += 2  x' -= 1
    y += 2  e += 2  f += {two_k1}
  endloop
  if bit(N, i) = 1 then
    x += 1  y += 1  e += 1  f += {k1}
  endif
endfor
for i := {n} downto 1
  xz{{i}}: loop
    x -= 1  z += 1
  endloop
  zx{{i}}: loop
    x += i + 1  z -= i
  endloop
endfor
drain: loop
  x -= {n1}  y -= 1
endloop
",
        two_k1 = 2 * k1,
        n1 = n + 1
    )
}

fn np_header(inst: &NpInstance) -> String {
    let s: Vec<String> = std::iter::once(inst.s0)
        .chain(inst.set.iter().copied())
        .map(|v| v.to_string())
        .collect();
    format!(
        "counters x x' y z e f u\nconst N = {}\nconst M = {}\nconst S = [{}]\n",
        inst.big_n,
        inst.m,
        s.join(", ")
    )
}

/// The initializer: weakly computes `e = N(n)` and `f = N(n)(k+1)`, then
/// checks exactness like the exponential family. With `with_halt` it is a
/// complete program halting with `y` tested; without, the body is the
/// prefix of [`gen_np`].
pub fn gen_initializer(inst: &NpInstance, with_halt: bool) -> CounterProgram {
    let halt = if with_halt { "halt y\n" } else { "" };
    parse_generated(&format!(
        "{}init\n{}{halt}",
        np_header(inst),
        initializer_text(inst.n, inst.k())
    ))
}

/// One component: adds (`plus`) or subtracts `S[index]` from `u` when
/// `active`, using `e` and `f` to force every loop to iterate maximally.
/// Counters `x`, `x'` and `z` stand in for the component's `v`, `v'`, `e'`.
fn component_text(index: usize, active: bool, plus: bool) -> String {
    let u = if plus { "u += 1" } else { "u -= 1" };
    format!(
        "x += 1
for j := 0 to M - 1
  loop
    x -= 1  x' += 1
    if bit(N, j) = 1 then
      e -= 1  z += 1  f -= 1
    endif
    if {active} and bit(S[{index}], j) = 1 then
      {u}
    endif
  endloop
  loop
    x += 2  x' -= 1
  endloop
endfor
loop
  x -= 1
  e -= 1  z += 1  f -= 1
  if {active} and bit(S[{index}], M) = 1 then
    {u}
  endif
endloop
loop
  e += 1  z -= 1
endloop
"
    )
}

/// A component as a complete program over the reduction's counters, with
/// `e = N(n)` and `f = N(n)(k+1)` set up front. Halts testing `f` and `u`.
pub fn gen_component(
    inst: &NpInstance,
    index: usize,
    active: bool,
    plus: bool,
) -> Result<CounterProgram, FamilyError> {
    if index > inst.k() {
        return bad(format!("component index {index} out of range"));
    }
    let prefix = if plus { "" } else { "u += S[0]\n" };
    Ok(parse_generated(&format!(
        "{}init\ne += N  f += N * {}\n{prefix}{}halt\n",
        np_header(inst),
        inst.k() + 1,
        component_text(index, active, plus)
    )))
}

fn np_text(inst: &NpInstance, mutate: bool) -> String {
    let k = inst.k();
    let mut t = np_header(inst);
    t.push_str("init\n");
    t.push_str(&initializer_text(inst.n, k));
    let r0 = component_text(0, !mutate, true);
    t.push_str(&label_first("r0", &r0));
    t.push_str("goto f1 or t1\n");
    for i in 1..=k {
        t.push_str(&label_first(&format!("f{i}"), &component_text(i, false, false)));
        if i < k {
            t.push_str(&format!("goto f{n} or t{n}\n", n = i + 1));
        } else {
            t.push_str("goto h\n");
        }
        t.push_str(&label_first(&format!("t{i}"), &component_text(i, true, false)));
        if i < k {
            t.push_str(&format!("goto f{n} or t{n}\n", n = i + 1));
        }
    }
    t.push_str("h: halt y u f\n");
    t
}

fn label_first(label: &str, text: &str) -> String {
    format!("{label}: {text}")
}

/// The Subset-Sum reduction: initializer without its halt, the `+s0`
/// component labelled `r0`, then a choice between `f_i` (no effect on `u`)
/// and `t_i` (subtract `s_i`) for every element, halting at `h` with `y`,
/// `u` and `f` tested.
pub fn gen_np(inst: &NpInstance) -> CounterProgram {
    parse_generated(&np_text(inst, false))
}

/// Negative control: [`gen_np`] with the `+s0` component no longer touching
/// `u`. Halts for every instance (take no `t_i`), so it disagrees with the
/// oracle on negative instances.
pub fn gen_np_mutated(inst: &NpInstance) -> CounterProgram {
    let p = parse_generated(&np_text(inst, true));
    debug_assert_ne!(p, gen_np(inst));
    p
}

pub const SUBSET_SUM_MAX: usize = 25;

/// Brute force over all subsets. The empty subset sums to 0, so `s0 = 0`
/// is always positive.
pub fn subset_sum_brute(s0: u64, set: &[u64]) -> Result<bool, FamilyError> {
    if set.len() > SUBSET_SUM_MAX {
        return bad(format!("at most {SUBSET_SUM_MAX} elements"));
    }
    Ok((0u64..1 << set.len()).any(|mask| {
        let sum: u128 = set
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &s)| s as u128)
            .sum();
        sum == s0 as u128
    }))
}

/// Rationals `1 < f_1 < .. < f_k = 1 + 4^-k` whose product
/// `f_1^2 * f_2^4 * .. * f_k^(2^k)` stays small.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FractionSequence {
    pub k: u32,
    /// `r_i = (4^k + 2^(k-i)) / 4^k`
    pub r: Vec<Fraction>,
    /// `f_i = r_i / (r_{i+1} .. r_k)`
    pub f_list: Vec<Fraction>,
    /// `(r_1 .. r_k)^2`
    pub f: Fraction,
}

impl FractionSequence {
    pub fn a(&self, i: usize) -> &BigInt {
        self.f_list[i - 1].numer()
    }

    pub fn b(&self, i: usize) -> &BigInt {
        self.f_list[i - 1].denom()
    }

    /// Check every stated property; the error names the first failure.
    pub fn check(&self) -> Result<(), String> {
        let k = self.k;
        let one = Fraction::one();
        if self.f_list.len() != k as usize {
            return Err("wrong length".into());
        }
        if self.f_list[0] <= one {
            return Err(format!("f_1 = {} is not > 1", self.f_list[0]));
        }
        for w in self.f_list.windows(2) {
            if w[0] >= w[1] {
                return Err(format!("not increasing: {} >= {}", w[0], w[1]));
            }
        }
        let four_k = num_traits::pow(BigInt::from(4), k as usize);
        let last = Fraction::new(&four_k + 1, four_k.clone()).expect("positive");
        if self.f_list[k as usize - 1] != last {
            return Err(format!("f_k = {} is not {last}", self.f_list[k as usize - 1]));
        }
        let mut prod = Fraction::one();
        for (i, fi) in self.f_list.iter().enumerate() {
            prod = &prod * &fi.pow(1 << (i + 1));
        }
        if prod != self.f {
            return Err(format!("product {prod} differs from f = {}", self.f));
        }
        let e = (k * k + k) as usize;
        let bound = num_traits::pow(BigInt::from(4), e);
        for (i, fi) in self.f_list.iter().enumerate() {
            if *fi.description_size() > bound {
                return Err(format!("f_{} exceeds 4^(k^2+k)", i + 1));
            }
        }
        if *self.f.description_size() > &bound * &bound {
            return Err("f exceeds 4^(2(k^2+k))".into());
        }
        Ok(())
    }
}

pub fn fraction_sequence(k: u32) -> Result<FractionSequence, FamilyError> {
    if k == 0 {
        return bad("k must be >= 1");
    }
    let four_k = num_traits::pow(BigInt::from(4), k as usize);
    let r: Vec<Fraction> = (1..=k)
        .map(|i| {
            let num = &four_k + num_traits::pow(BigInt::from(2), (k - i) as usize);
            Fraction::new(num, four_k.clone()).expect("positive")
        })
        .collect();
    let mut f_list = Vec::with_capacity(k as usize);
    let mut tail = Fraction::one();
    for ri in r.iter().rev() {
        f_list.push(ri / &tail);
        tail = &tail * ri;
    }
    f_list.reverse();
    let f = &tail * &tail;
    Ok(FractionSequence { k, r, f_list, f })
}

/// The Hopcroft-Pansiot gadget: multiply `x + y` by `c/d` up to `z` times.
/// The outer loop is labelled `hp`.
pub fn gen_hp(c: u64, d: u64) -> Result<CounterProgram, FamilyError> {
    if d < 1 || c <= d || c.gcd(&d) != 1 {
        return bad(format!("HP(c, d) needs an irreducible c/d > 1, got {c}/{d}"));
    }
    Ok(parse_generated(&format!(
        "counters x y z\nhp: loop\n{}  z -= 1\nendloop\n",
        indent(&weak_mult_text(&c.to_string(), &d.to_string()), 1)
            .replace("first: ", "")
            .replace("second: ", "")
    )))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Family2ExpMeta {
    pub k: u32,
    pub fractions: FractionSequence,
    /// `prod b_i^(2^i)`: the pump value of the canonical run.
    #[serde(with = "arith::decimal")]
    pub n_can: BigInt,
    /// `b_k^(2^k)`: every halting pump value is a multiple.
    #[serde(with = "arith::decimal")]
    pub m: BigInt,
}

fn two_exp_text(seq: &FractionSequence, start: &str) -> String {
    let k = seq.k as usize;
    let a: Vec<String> = (1..=k).map(|i| seq.a(i).to_string()).collect();
    let b: Vec<String> = (1..=k).map(|i| seq.b(i).to_string()).collect();
    format!(
        "counters t x y z
const A = [{}]
const B = [{}]
const FA = {}
const FB = {}
init
{start}for i := {k} downto 1
  z += 2 ^ i
  hp{{i}}: loop
    loop
      x -= 1  y += 1
    endloop
    loop
      x += A[i - 1]  y -= B[i - 1]
    endloop
    z -= 1
  endloop
endfor
drain: loop
  t -= FB  x -= FA
endloop
halt t
",
        a.join(", "),
        b.join(", "),
        seq.f.numer(),
        seq.f.denom()
    )
}

fn two_exp_meta(k: u32) -> Result<Family2ExpMeta, FamilyError> {
    let fractions = fraction_sequence(k)?;
    let mut n_can = BigInt::one();
    for i in 1..=k as usize {
        n_can *= num_traits::pow(fractions.b(i).clone(), 1 << i);
    }
    let m = num_traits::pow(fractions.b(k as usize).clone(), 1 << k);
    Ok(Family2ExpMeta {
        k,
        fractions,
        n_can,
        m,
    })
}

/// The doubly-exponential family. Loops are labelled `pump`, `hp{i}` and
/// `drain`.
pub fn gen_2exp(k: u32) -> Result<(CounterProgram, Family2ExpMeta), FamilyError> {
    if k == 0 {
        return bad("2exp(k) needs k >= 1");
    }
    if k > 12 {
        return bad("2exp(k) is limited to k <= 12");
    }
    let meta = two_exp_meta(k)?;
    let start = "t += 1  x += 1\npump: loop\n  t += 1  x += 1\nendloop\n";
    Ok((parse_generated(&two_exp_text(&meta.fractions, start)), meta))
}

/// Test-harness variant of [`gen_2exp`] with the pump replaced by
/// `t = x = pump`.
pub fn gen_2exp_fixed(k: u32, pump: &BigInt) -> Result<(CounterProgram, Family2ExpMeta), FamilyError> {
    if k == 0 || k > 12 || pump.is_zero() || pump.sign() == num_bigint::Sign::Minus {
        return bad("2exp_fixed(k, N) needs 1 <= k <= 12 and N >= 1");
    }
    let meta = two_exp_meta(k)?;
    let start = format!("t += {pump}  x += {pump}\n");
    Ok((parse_generated(&two_exp_text(&meta.fractions, &start)), meta))
}

/// Complete a fragment: `init`, one line setting the initial values (if any
/// is nonzero), the fragment, and a halt testing `tested`.
pub fn harness(fragment: &CounterProgram, initial: &[u64], tested: &[&str]) -> CounterProgram {
    assert_eq!(initial.len(), fragment.counters.len());
    let mut body = vec![Node::new(Stmt::Init)];
    let ops: Vec<CounterOp> = fragment
        .counters
        .iter()
        .zip(initial)
        .filter(|(_, &v)| v > 0)
        .map(|(c, &v)| CounterOp {
            counter: c.clone(),
            kind: OpKind::Add,
            amount: MetaExpr::num(v),
        })
        .collect();
    if !ops.is_empty() {
        body.push(Node::new(Stmt::Update(ops)));
    }
    body.extend(fragment.body.iter().cloned());
    body.push(Node::new(Stmt::Halt(
        tested.iter().map(|s| s.to_string()).collect(),
    )));
    CounterProgram {
        counters: fragment.counters.clone(),
        consts: fragment.consts.clone(),
        body,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{build, expand, print_program};

    #[test]
    fn weak_mult_shape() {
        let p = gen_weak_mult(2, 1).unwrap();
        assert_eq!(p.body.len(), 2);
        assert!(matches!(p.body[0].stmt, Stmt::Loop(_)));
        assert!(gen_weak_mult(1, 1).is_err());
        assert!(gen_weak_mult(3, 0).is_err());
    }

    #[test]
    fn weak_one_and_two() {
        let e = expand(&gen_weak(1).unwrap()).unwrap();
        // init, two loops of three lines, one increment, halt
        assert_eq!(e.program.commands.len(), 1 + 6 + 1 + 1);
        let e2 = expand(&gen_weak(2).unwrap()).unwrap();
        assert_eq!(e2.program.commands.len(), 1 + 12 + 1 + 1);
        assert!(gen_weak(0).is_err());
    }

    #[test]
    fn np_instance_parameters() {
        let inst = NpInstance::new(3, vec![1, 2]).unwrap();
        assert_eq!(inst.n, 3);
        assert_eq!(inst.big_n, BigInt::from(3));
        assert_eq!(inst.m, 1);
        assert!(NpInstance::new(0, vec![1]).is_err());
        assert!(NpInstance::new(1, vec![]).is_err());
        assert!(NpInstance::new(1, vec![0]).is_err());
    }

    #[test]
    fn np_is_seven_dimensional() {
        let inst = NpInstance::new(3, vec![1, 2]).unwrap();
        let art = build(&gen_np(&inst)).unwrap();
        assert_eq!(art.compiled.vass.dimension, 7);
        let mutated = build(&gen_np_mutated(&inst)).unwrap();
        assert_ne!(mutated.compiled.vass, art.compiled.vass);
    }

    #[test]
    fn subset_sum_examples() {
        assert!(subset_sum_brute(3, &[1, 2]).unwrap());
        assert!(!subset_sum_brute(2, &[1]).unwrap());
        assert!(subset_sum_brute(0, &[]).unwrap());
        assert!(subset_sum_brute(1, &[1; 26]).is_err());
    }

    #[test]
    fn fraction_examples() {
        let s = fraction_sequence(1).unwrap();
        assert_eq!(s.f_list, vec![Fraction::new(5, 4).unwrap()]);
        assert_eq!(s.f, Fraction::new(25, 16).unwrap());
        s.check().unwrap();
        let s = fraction_sequence(2).unwrap();
        assert_eq!(s.r, vec![Fraction::new(9, 8).unwrap(), Fraction::new(17, 16).unwrap()]);
        assert_eq!(
            s.f_list,
            vec![Fraction::new(18, 17).unwrap(), Fraction::new(17, 16).unwrap()]
        );
        assert_eq!(s.f, Fraction::new(23409, 16384).unwrap());
        s.check().unwrap();
        assert!(fraction_sequence(0).is_err());
    }

    #[test]
    fn two_exp_meta_values() {
        let (_, m1) = gen_2exp(1).unwrap();
        assert_eq!(m1.n_can, BigInt::from(16));
        assert_eq!(m1.m, BigInt::from(16));
        let (_, m2) = gen_2exp(2).unwrap();
        assert_eq!(m2.n_can, BigInt::from(17 * 17) * BigInt::from(65536));
    }

    #[test]
    fn hp_rejects_reducible() {
        assert!(gen_hp(2, 2).is_err());
        assert!(gen_hp(4, 2).is_err());
        let p = gen_hp(3, 2).unwrap();
        assert!(matches!(&p.body[0].stmt, Stmt::Loop(b) if b.len() == 3));
    }

    #[test]
    fn generated_text_round_trips() {
        let inst = NpInstance::new(2, vec![1]).unwrap();
        for p in [
            gen_exp(2).unwrap(),
            gen_weak(6).unwrap(),
            gen_np(&inst),
            gen_2exp(2).unwrap().0,
            gen_hp(3, 2).unwrap(),
        ] {
            assert_eq!(crate::lang::parse(&print_program(&p)).unwrap(), p);
        }
    }

    #[test]
    fn harness_wraps_fragment() {
        let h = harness(&gen_hp(3, 2).unwrap(), &[4, 0, 2], &[]);
        assert!(h.is_complete());
        let art = build(&h).unwrap();
        assert_eq!(art.compiled.vass.dimension, 3);
    }

    #[test]
    fn component_program_builds() {
        let inst = NpInstance::new(3, vec![1, 2]).unwrap();
        for (i, active, plus) in [(0, true, true), (1, false, false), (2, true, false)] {
            build(&gen_component(&inst, i, active, plus).unwrap()).unwrap();
        }
        assert!(gen_component(&inst, 3, true, false).is_err());
    }
}
