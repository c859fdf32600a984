//! Exact integer and rational arithmetic.
//!
//! Integers are `num_bigint::BigInt`. [`Fraction`] is a strictly positive
//! rational kept in lowest terms at all times, and [`BitString`] is a
//! most-significant-first binary expansion used by the generators that
//! branch on individual bits of a constant.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul};
use std::str::FromStr;

pub use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("invalid range {lo}..={hi}: need 1 <= lo <= hi")]
    BadRange { lo: u64, hi: u64 },
    #[error("N(n) is only defined for n >= 1")]
    ZeroIndex,
    #[error("value list is empty")]
    EmptyValues,
    #[error("all values must be positive, got {0}")]
    NonPositive(BigInt),
    #[error("{value} does not fit into {width} bits")]
    PadTooSmall { value: BigInt, width: usize },
    #[error("fraction needs a positive numerator and denominator, got {num}/{den}")]
    BadFraction { num: BigInt, den: BigInt },
    #[error("cannot parse {0:?} as a fraction")]
    Parse(String),
}

/// `lcm(lo, lo + 1, ..., hi)`.
pub fn lcm_range(lo: u64, hi: u64) -> Result<BigInt, ArithError> {
    if lo < 1 || lo > hi {
        return Err(ArithError::BadRange { lo, hi });
    }
    Ok((lo..=hi).fold(BigInt::one(), |acc, i| acc.lcm(&BigInt::from(i))))
}

/// `N(n) = lcm{2, ..., n+1} / (n+1)`.
///
/// The quotient is exact because `n + 1` is itself one of the folded values.
pub fn compute_n(n: u64) -> Result<BigInt, ArithError> {
    if n == 0 {
        return Err(ArithError::ZeroIndex);
    }
    let l = lcm_range(2, n + 1)?;
    let (q, r) = l.div_rem(&BigInt::from(n + 1));
    debug_assert!(r.is_zero());
    Ok(q)
}

/// Least `n >= 1` with `N(n) >= max(values)`.
///
/// `N` is not monotone (N(4) = 12 but N(5) = 10), so this scans upward from 1
/// rather than bisecting.
pub fn min_n_for(values: &[BigInt]) -> Result<u64, ArithError> {
    let max = values.iter().max().ok_or(ArithError::EmptyValues)?;
    if let Some(bad) = values.iter().find(|v| !v.is_positive()) {
        return Err(ArithError::NonPositive(bad.clone()));
    }
    // Running lcm of {2..n+1}, extended one term per step.
    let mut lcm = BigInt::one();
    let mut n = 0u64;
    loop {
        n += 1;
        lcm = lcm.lcm(&BigInt::from(n + 1));
        if &(&lcm / BigInt::from(n + 1)) >= max {
            return Ok(n);
        }
    }
}

/// Binary expansion, most significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    /// Bits `b_m .. b_0`.
    pub fn msb_first(&self) -> &[bool] {
        &self.bits
    }

    /// Number of bits, i.e. `m + 1`.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Index `m` of the leading bit.
    pub fn top(&self) -> usize {
        self.bits.len() - 1
    }

    /// Bit `b_i`, counting from the least significant end. Out-of-range
    /// positions read as zero.
    pub fn bit(&self, i: usize) -> bool {
        i < self.bits.len() && self.bits[self.bits.len() - 1 - i]
    }

    pub fn value(&self) -> BigInt {
        self.bits.iter().fold(BigInt::zero(), |acc, &b| {
            (acc << 1u32) + if b { BigInt::one() } else { BigInt::zero() }
        })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Unpadded binary expansion of `x >= 1`; the leading bit is always 1.
pub fn bits_of(x: &BigInt) -> Result<BitString, ArithError> {
    if !x.is_positive() {
        return Err(ArithError::NonPositive(x.clone()));
    }
    let width = x.bits() as usize;
    Ok(BitString {
        bits: (0..width).rev().map(|i| x.bit(i as u64)).collect(),
    })
}

/// Expansion of `0 <= x < 2^width`, padded with leading zeros to `width` bits.
pub fn bits_padded(x: &BigInt, width: usize) -> Result<BitString, ArithError> {
    if x.is_negative() {
        return Err(ArithError::NonPositive(x.clone()));
    }
    if x.bits() as usize > width || width == 0 {
        return Err(ArithError::PadTooSmall {
            value: x.clone(),
            width,
        });
    }
    Ok(BitString {
        bits: (0..width).rev().map(|i| x.bit(i as u64)).collect(),
    })
}

/// A positive rational in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: BigInt,
    den: BigInt,
}

impl Fraction {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, ArithError> {
        let (num, den) = (num.into(), den.into());
        if !num.is_positive() || !den.is_positive() {
            return Err(ArithError::BadFraction { num, den });
        }
        Ok(Self::reduced(num, den))
    }

    pub fn integer(n: impl Into<BigInt>) -> Result<Self, ArithError> {
        Self::new(n, 1)
    }

    pub fn one() -> Self {
        Self {
            num: BigInt::one(),
            den: BigInt::one(),
        }
    }

    fn reduced(num: BigInt, den: BigInt) -> Self {
        let g = num.gcd(&den);
        if g.is_one() {
            Self { num, den }
        } else {
            Self {
                num: num / &g,
                den: den / g,
            }
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    /// `max(numerator, denominator)` of the reduced form.
    pub fn description_size(&self) -> &BigInt {
        std::cmp::max(&self.num, &self.den)
    }

    pub fn recip(&self) -> Self {
        Self {
            num: self.den.clone(),
            den: self.num.clone(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        // Powers of coprime integers stay coprime.
        Self {
            num: num_traits::pow(self.num.clone(), e as usize),
            den: num_traits::pow(self.den.clone(), e as usize),
        }
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    /// `self * n` as an integer, if the product is integral.
    pub fn scale_exact(&self, n: &BigInt) -> Option<BigInt> {
        let (q, r) = (n * &self.num).div_rem(&self.den);
        r.is_zero().then_some(q)
    }
}

impl Mul for &Fraction {
    type Output = Fraction;

    fn mul(self, rhs: &Fraction) -> Fraction {
        // Cross-cancel first so intermediate products stay small.
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        Fraction {
            num: (&self.num / &g1) * (&rhs.num / &g2),
            den: (&self.den / &g2) * (&rhs.den / &g1),
        }
    }
}

impl Mul for Fraction {
    type Output = Fraction;

    fn mul(self, rhs: Fraction) -> Fraction {
        &self * &rhs
    }
}

impl Div for &Fraction {
    type Output = Fraction;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &Fraction) -> Fraction {
        self * &rhs.recip()
    }
}

impl Div for Fraction {
    type Output = Fraction;

    fn div(self, rhs: Fraction) -> Fraction {
        &self / &rhs
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Fraction {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Parse(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num = BigInt::from_str(n).map_err(|_| bad())?;
        let den = BigInt::from_str(d).map_err(|_| bad())?;
        Fraction::new(num, den)
    }
}

impl serde::Serialize for Fraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Fraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapters writing big integers as decimal strings.
pub mod decimal {
    use super::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::BigInt;
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};
        use std::str::FromStr;

        pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&x.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| BigInt::from_str(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    /// lcm via maximal prime powers, independent of the gcd fold.
    fn lcm_by_prime_powers(lo: u64, hi: u64) -> u128 {
        let mut acc = 1u128;
        for p in 2..=hi {
            if (2..p).any(|q| p % q == 0) {
                continue;
            }
            let mut best = 0u32;
            for v in lo..=hi {
                let (mut v, mut e) = (v, 0);
                while v % p == 0 {
                    v /= p;
                    e += 1;
                }
                best = best.max(e);
            }
            acc *= (p as u128).pow(best);
        }
        acc
    }

    #[test]
    fn lcm_range_examples() {
        assert_eq!(lcm_range(2, 2).unwrap(), big(2));
        assert_eq!(lcm_range(2, 6).unwrap(), big(lcm_by_prime_powers(2, 6) as i64));
        assert_eq!(lcm_range(2, 6).unwrap(), big(60));
        assert_eq!(lcm_range(2, 7).unwrap(), big(420));
        for hi in 2..40 {
            assert_eq!(
                lcm_range(2, hi).unwrap(),
                BigInt::from(lcm_by_prime_powers(2, hi))
            );
        }
    }

    #[test]
    fn lcm_range_rejects_bad_ranges() {
        assert_eq!(lcm_range(5, 4), Err(ArithError::BadRange { lo: 5, hi: 4 }));
        assert_eq!(lcm_range(0, 4), Err(ArithError::BadRange { lo: 0, hi: 4 }));
    }

    #[test]
    fn compute_n_examples() {
        assert_eq!(compute_n(1).unwrap(), big(1));
        assert_eq!(compute_n(4).unwrap(), big(12));
        assert_eq!(compute_n(5).unwrap(), big(10));
        assert_eq!(compute_n(0), Err(ArithError::ZeroIndex));
    }

    #[test]
    fn n_times_successor_divisible_by_range() {
        for n in 1..=100u64 {
            let scaled = compute_n(n).unwrap() * BigInt::from(n + 1);
            for i in 2..=n + 1 {
                assert!((&scaled % BigInt::from(i)).is_zero(), "n={n} i={i}");
            }
        }
    }

    #[test]
    fn n_bounded_by_factorial() {
        let mut fact = BigInt::one();
        for n in 1..=20u64 {
            fact *= BigInt::from(n);
            assert!(compute_n(n).unwrap() <= fact, "n={n}");
        }
    }

    #[test]
    fn min_n_examples() {
        assert_eq!(min_n_for(&[big(1)]).unwrap(), 1);
        assert_eq!(min_n_for(&[big(3)]).unwrap(), 3);
        assert_eq!(min_n_for(&[big(12)]).unwrap(), 4);
        assert_eq!(min_n_for(&[big(2), big(11), big(1)]).unwrap(), 4);
        assert_eq!(min_n_for(&[]), Err(ArithError::EmptyValues));
        assert_eq!(min_n_for(&[big(0)]), Err(ArithError::NonPositive(big(0))));
    }

    #[test]
    fn min_n_is_least() {
        for v in 1..200i64 {
            let n = min_n_for(&[big(v)]).unwrap();
            assert!(compute_n(n).unwrap() >= big(v));
            for smaller in 1..n {
                assert!(compute_n(smaller).unwrap() < big(v));
            }
        }
    }

    #[test]
    fn bits_examples() {
        assert_eq!(bits_of(&big(1)).unwrap().msb_first(), &[true]);
        assert_eq!(bits_of(&big(6)).unwrap().msb_first(), &[true, true, false]);
        assert_eq!(
            bits_padded(&big(2), 3).unwrap().msb_first(),
            &[false, true, false]
        );
        assert_eq!(bits_padded(&big(0), 1).unwrap().to_string(), "0");
        assert!(matches!(
            bits_padded(&big(8), 3),
            Err(ArithError::PadTooSmall { .. })
        ));
        assert!(bits_of(&big(0)).is_err());
        let b = bits_of(&big(12)).unwrap();
        assert_eq!(b.top(), 3);
        assert!(b.bit(3) && b.bit(2) && !b.bit(1) && !b.bit(0) && !b.bit(9));
    }

    #[test]
    fn lcm_gcd_product_exhaustive() {
        for a in 1..=200i64 {
            for b in 1..=200i64 {
                let (a, b) = (big(a), big(b));
                assert_eq!(a.lcm(&b) * a.gcd(&b), &a * &b);
            }
        }
    }

    #[test]
    fn fraction_basics() {
        let f = Fraction::new(18, 12).unwrap();
        assert_eq!((f.numer(), f.denom()), (&big(3), &big(2)));
        assert_eq!(f.to_string(), "3/2");
        assert_eq!("23409/16384".parse::<Fraction>().unwrap().to_string(), "23409/16384");
        assert_eq!("6/4".parse::<Fraction>().unwrap(), f);
        assert!(Fraction::new(0, 3).is_err());
        assert!(Fraction::new(3, -1).is_err());
        assert!(Fraction::new(5, 4).unwrap() > Fraction::new(9, 8).unwrap());
        assert_eq!(f.scale_exact(&big(4)), Some(big(6)));
        assert_eq!(f.scale_exact(&big(3)), None);
        assert_eq!(*Fraction::new(4, 9).unwrap().description_size(), big(9));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn products_stay_reduced(a in 1i64..5000, b in 1i64..5000, c in 1i64..5000, d in 1i64..5000, e in 0u32..6) {
                let x = Fraction::new(a, b).unwrap();
                let y = Fraction::new(c, d).unwrap();
                let p = &x * &y;
                prop_assert!(p.numer().gcd(p.denom()).is_one());
                // Against the unreduced product.
                prop_assert_eq!(p.numer() * BigInt::from(b * d), p.denom() * BigInt::from(a * c));
                let q = &x / &y;
                prop_assert!(q.numer().gcd(q.denom()).is_one());
                prop_assert_eq!(&(&q * &y), &x);
                let pw = x.pow(e);
                prop_assert!(pw.numer().gcd(pw.denom()).is_one());
                prop_assert_eq!(
                    pw.numer() * num_traits::pow(BigInt::from(b), e as usize),
                    pw.denom() * num_traits::pow(BigInt::from(a), e as usize)
                );
            }

            #[test]
            fn bits_round_trip(x in 1u64..u64::MAX) {
                let v = BigInt::from(x);
                let b = bits_of(&v).unwrap();
                prop_assert!(b.msb_first()[0]);
                prop_assert_eq!(b.value(), v.clone());
                let padded = bits_padded(&v, b.len() + 3).unwrap();
                prop_assert_eq!(padded.value(), v);
            }
        }
    }
}
