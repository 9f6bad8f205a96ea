//! Exact integers, rationals and p-adic valuations.
//!
//! Rationals are `num_rational::BigRational`, which is always kept in lowest
//! terms with a positive denominator. Valuations live in [`ValInt`], the
//! integers extended by a top element `+inf`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{input, Error, Result};

pub type Int = BigInt;
pub type Rational = BigRational;

/// A valuation value: a finite integer or `+inf` (the valuation of zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValInt {
    Finite(i64),
    Infinite,
}

impl ValInt {
    pub const ZERO: ValInt = ValInt::Finite(0);

    pub fn is_infinite(self) -> bool {
        matches!(self, ValInt::Infinite)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            ValInt::Finite(v) => Some(v),
            ValInt::Infinite => None,
        }
    }

    /// `k * self` with the convention `0 * inf = 0`.
    pub fn scale(self, k: u64) -> ValInt {
        match self {
            _ if k == 0 => ValInt::ZERO,
            ValInt::Finite(v) => ValInt::Finite(v * k as i64),
            ValInt::Infinite => ValInt::Infinite,
        }
    }

    /// Narrow to a nonnegative finite value.
    pub fn to_natural(self) -> Option<u64> {
        match self {
            ValInt::Finite(v) if v >= 0 => Some(v as u64),
            _ => None,
        }
    }
}

impl Ord for ValInt {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ValInt::Finite(a), ValInt::Finite(b)) => a.cmp(b),
            (ValInt::Finite(_), ValInt::Infinite) => Ordering::Less,
            (ValInt::Infinite, ValInt::Finite(_)) => Ordering::Greater,
            (ValInt::Infinite, ValInt::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ValInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for ValInt {
    type Output = ValInt;
    fn add(self, rhs: ValInt) -> ValInt {
        match (self, rhs) {
            (ValInt::Finite(a), ValInt::Finite(b)) => ValInt::Finite(a + b),
            _ => ValInt::Infinite,
        }
    }
}

impl From<i64> for ValInt {
    fn from(v: i64) -> Self {
        ValInt::Finite(v)
    }
}

impl fmt::Display for ValInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValInt::Finite(v) => write!(f, "{v}"),
            ValInt::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ValInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ValInt::Finite(v) => s.serialize_i64(*v),
            ValInt::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ValInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ValInt::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(ValInt::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad valuation {s:?}"))),
        }
    }
}

/// Deterministic trial division; intended for desk-scale primes.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        input(format!("{p} is not prime"))
    }
}

pub fn vp_int(n: &BigInt, p: u64) -> ValInt {
    if n.is_zero() {
        return ValInt::Infinite;
    }
    let pb = BigInt::from(p);
    let mut v = 0i64;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return ValInt::Finite(v);
        }
        v += 1;
        m = q;
    }
}

/// Valuation of a rational at `p`, without the primality check.
pub fn vp_rat(x: &Rational, p: u64) -> ValInt {
    if x.is_zero() {
        return ValInt::Infinite;
    }
    let num = vp_int(x.numer(), p).finite().unwrap();
    let den = vp_int(x.denom(), p).finite().unwrap();
    ValInt::Finite(num - den)
}

/// The exponent of `p` in `x`; `+inf` for zero.
pub fn vp(x: &Rational, p: u64) -> Result<ValInt> {
    check_prime(p)?;
    Ok(vp_rat(x, p))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn pow_int(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// `p^e` for a possibly negative exponent.
pub fn p_power(p: u64, e: i64) -> Rational {
    let m = pow_int(p, e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from_integer(m)
    } else {
        Rational::new(BigInt::one(), m)
    }
}

/// `x mod m` in `[0, m)` for a rational whose denominator is invertible mod `m`.
pub fn residue(x: &Rational, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let inv = mod_inverse(x.denom(), m)?;
    Some((x.numer() * inv).mod_floor(m))
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Solve `s = r1 (mod m1)`, `s = r2 (mod m2)`; returns the class `(r, lcm)`.
pub fn crt(r1: &BigInt, m1: &BigInt, r2: &BigInt, m2: &BigInt) -> Option<(BigInt, BigInt)> {
    let e = m1.extended_gcd(m2);
    let g = e.gcd;
    let diff = r2 - r1;
    if !diff.mod_floor(&g).is_zero() {
        return None;
    }
    let l = m1 / &g * m2;
    let k = (&diff / &g * e.x).mod_floor(&(m2 / &g));
    Some(((r1 + m1 * k).mod_floor(&l), l))
}

/// Canonical ordering of candidate points: smaller absolute value first,
/// ties broken toward the positive value.
pub fn representative_order(a: &Rational, b: &Rational) -> Ordering {
    a.abs()
        .cmp(&b.abs())
        .then_with(|| a.is_negative().cmp(&b.is_negative()))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let parsed = match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad_rational(s))?;
            let d: BigInt = d.trim().parse().map_err(|_| bad_rational(s))?;
            if d.is_zero() {
                return input(format!("zero denominator in {s:?}"));
            }
            Rational::new(n, d)
        }
        None => Rational::from_integer(t.parse().map_err(|_| bad_rational(s))?),
    };
    Ok(parsed)
}

fn bad_rational(s: &str) -> Error {
    Error::Input(format!("cannot parse rational {s:?}"))
}

/// `"num/den"`, with the denominator omitted when it is 1.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_i64(x: &BigInt) -> Option<i64> {
    x.to_i64()
}

/// Prime factors of a nonzero integer by trial division (desk scale).
pub fn prime_factors(n: &BigInt, limit: u64) -> Result<Vec<u64>> {
    let mut m = n.abs();
    let mut out = Vec::new();
    if m.is_zero() {
        return input("cannot factor zero");
    }
    let mut d = 2u64;
    while BigInt::from(d) * BigInt::from(d) <= m {
        if d > limit {
            return Err(Error::Resource(format!(
                "integer {n} has no prime factor below {limit} and is too large to finish"
            )));
        }
        let bd = BigInt::from(d);
        if (&m % &bd).is_zero() {
            out.push(d);
            while (&m % &bd).is_zero() {
                m /= &bd;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !m.is_one() {
        out.push(m.to_u64().ok_or_else(|| {
            Error::Resource(format!("prime factor of {n} exceeds 64 bits"))
        })?);
    }
    out.sort_unstable();
    Ok(out)
}

/// Serde adapter writing a rational as `"num/den"`; accepts strings or integers.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        RawRational::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum RawRational {
        Str(String),
        Int(i64),
    }

    impl RawRational {
        pub(crate) fn parse(self) -> Result<Rational> {
            match self {
                RawRational::Str(s) => parse_rational(&s),
                RawRational::Int(i) => Ok(int(i)),
            }
        }
    }
}

pub mod rational_vec {
    use super::rational_str::RawRational;
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&format_rational(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        Vec::<RawRational>::deserialize(d)?
            .into_iter()
            .map(|r| r.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn valuation_examples() {
        assert_eq!(vp(&int(12), 2).unwrap(), ValInt::Finite(2));
        assert_eq!(vp(&int(0), 7).unwrap(), ValInt::Infinite);
        assert_eq!(vp(&rat(5, 8), 2).unwrap(), ValInt::Finite(-3));
        assert!(matches!(vp(&int(3), 4), Err(Error::Input(_))));
    }

    #[test]
    fn infinity_arithmetic() {
        let inf = ValInt::Infinite;
        assert_eq!(inf + ValInt::Finite(-5), inf);
        assert!(inf > ValInt::Finite(i64::MAX));
        assert_eq!(inf.scale(0), ValInt::ZERO);
        assert_eq!(ValInt::Finite(3).scale(4), ValInt::Finite(12));
    }

    #[test]
    fn rational_strings() {
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
        assert_eq!(format_rational(&int(-7)), "-7");
        assert_eq!(parse_rational(" -3/6 ").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn crt_and_residues() {
        let (r, l) = crt(&BigInt::from(1), &BigInt::from(2), &BigInt::from(0), &BigInt::from(3))
            .unwrap();
        assert_eq!((r, l), (BigInt::from(3), BigInt::from(6)));
        assert!(crt(&BigInt::from(1), &BigInt::from(4), &BigInt::from(0), &BigInt::from(6)).is_none());
        assert_eq!(residue(&rat(1, 3), &BigInt::from(4)), Some(BigInt::from(3)));
        assert_eq!(residue(&rat(1, 2), &BigInt::from(4)), None);
    }

    #[test]
    fn primes_and_factors() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(prime_factors(&BigInt::from(-360), 1000).unwrap(), vec![2, 3, 5]);
        assert_eq!(prime_factors(&BigInt::from(97), 1000).unwrap(), vec![97]);
    }

    const PRIMES: [u64; 25] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89, 97,
    ];

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-5000i64..5000, 1i64..3000).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn valuation_is_multiplicative_and_ultrametric(
            a in small_rational(), b in small_rational(), i in 0usize..25
        ) {
            let p = PRIMES[i];
            prop_assert_eq!(vp_rat(&(&a * &b), p), vp_rat(&a, p) + vp_rat(&b, p));
            let (va, vb) = (vp_rat(&a, p), vp_rat(&b, p));
            let vs = vp_rat(&(&a + &b), p);
            prop_assert!(vs >= va.min(vb));
            if va != vb {
                prop_assert_eq!(vs, va.min(vb));
            }
        }
    }
}
