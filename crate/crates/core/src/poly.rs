//! Dense univariate polynomials over the rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{self, format_rational, vp_rat, Rational, ValInt};
use crate::error::{input, Result};

/// Coefficients are stored lowest degree first; the last one is nonzero
/// unless the polynomial is zero (empty vector).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Poly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Poly {
        Poly::new(coeffs.iter().map(|&c| arith::int(c)).collect())
    }

    pub fn from_bigints(coeffs: &[BigInt]) -> Poly {
        Poly::new(coeffs.iter().cloned().map(Rational::from_integer).collect())
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn x() -> Poly {
        Poly::from_ints(&[0, 1])
    }

    pub fn constant(c: Rational) -> Poly {
        Poly::new(vec![c])
    }

    /// The monic linear polynomial `x - root`.
    pub fn linear(root: &Rational) -> Poly {
        Poly::new(vec![-root.clone(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading_coeff(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = self.leading_coeff();
        self.scale(&lc.recip())
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Horner evaluation.
    pub fn eval(&self, s: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &Poly::constant(c.clone());
        }
        acc
    }

    pub fn divrem(&self, b: &Poly) -> Result<(Poly, Poly)> {
        if b.is_zero() {
            return input("division by the zero polynomial");
        }
        let mut rem = self.coeffs.clone();
        let db = b.deg();
        if self.is_zero() || self.deg() < db {
            return Ok((Poly::zero(), self.clone()));
        }
        let lc_inv = b.leading_coeff().recip();
        let mut quot = vec![Rational::zero(); self.deg() - db + 1];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + db] * &lc_inv;
            if c.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                rem[i + j] -= &c * bj;
            }
            quot[i] = c;
        }
        rem.truncate(db);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Quotient if `b` divides `self` exactly.
    pub fn div_exact(&self, b: &Poly) -> Option<Poly> {
        let (q, r) = self.divrem(b).ok()?;
        r.is_zero().then_some(q)
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Positive rational `c` with `self / c` integral and primitive.
    pub fn content(&self) -> Result<Rational> {
        if self.is_zero() {
            return input("content of the zero polynomial");
        }
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in &self.coeffs {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        Ok(Rational::new(num, den))
    }

    /// Integer coefficients of `self / content(self)`, made to have positive
    /// leading coefficient.
    pub fn primitive_int_coeffs(&self) -> Result<Vec<BigInt>> {
        let mut c = self.content()?;
        if self.leading_coeff().is_negative() {
            c = -c;
        }
        Ok(self
            .coeffs
            .iter()
            .map(|a| {
                let q = a / &c;
                debug_assert!(q.is_integer());
                q.to_integer()
            })
            .collect())
    }

    pub fn primitive_part(&self) -> Result<Poly> {
        Ok(Poly::from_bigints(&self.primitive_int_coeffs()?))
    }

    /// Minimum coefficient valuation at `p` (`+inf` for zero).
    pub fn min_coeff_valuation(&self, p: u64) -> ValInt {
        self.coeffs
            .iter()
            .map(|c| vp_rat(c, p))
            .min()
            .unwrap_or(ValInt::Infinite)
    }

    /// Canonical total order: by degree, then coefficients lowest first.
    pub fn canonical_cmp(&self, other: &Poly) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(format_rational).collect()
    }
}

/// Division with remainder over the rationals.
pub fn poly_divrem(a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
    a.divrem(b)
}

pub fn poly_content(f: &Poly) -> Result<Rational> {
    f.content()
}

pub fn poly_eval(f: &Poly, s: &Rational) -> Rational {
    f.eval(s)
}

/// Largest `e` with `h^e | g`, for `h` monic irreducible.
pub fn multiplicity(g: &Poly, h: &Poly) -> Result<u32> {
    if g.is_zero() {
        return input("multiplicity in the zero polynomial");
    }
    if !h.is_monic() || h.is_constant() {
        return input(format!("{h} is not a monic non-constant polynomial"));
    }
    if !crate::factor::is_irreducible(h)? {
        return input(format!("{h} is reducible over Q"));
    }
    Ok(raw_multiplicity(g, h))
}

pub(crate) fn raw_multiplicity(g: &Poly, h: &Poly) -> u32 {
    let mut e = 0;
    let mut cur = g.clone();
    while let Some(q) = cur.div_exact(h) {
        e += 1;
        cur = q;
    }
    e
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let show_coeff = i == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{}", format_rational(&a))?;
                if i > 0 {
                    f.write_str("*")?;
                }
            }
            match i {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        arith::rational_vec::serialize(&self.coeffs, s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Poly::new(arith::rational_vec::deserialize(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    #[test]
    fn content_examples() {
        assert_eq!(p(&[10, 4, 6]).content().unwrap(), int(2));
        let f = Poly::new(vec![rat(9, 4), int(3), rat(3, 2)]);
        assert_eq!(f.content().unwrap(), rat(3, 4));
        assert_eq!(p(&[-1, 1]).content().unwrap(), int(1));
        assert!(Poly::zero().content().is_err());
        let prim = f.primitive_int_coeffs().unwrap();
        assert_eq!(prim, vec![BigInt::from(3), BigInt::from(4), BigInt::from(2)]);
    }

    #[test]
    fn divrem_examples() {
        let (q, r) = poly_divrem(&p(&[-1, 0, 1]), &p(&[-1, 1])).unwrap();
        assert_eq!((q, r), (p(&[1, 1]), Poly::zero()));
        let (q, r) = poly_divrem(&p(&[0, 0, 1]), &p(&[-1, 1])).unwrap();
        assert_eq!((q, r), (p(&[1, 1]), p(&[1])));
        let (q, r) = poly_divrem(&p(&[0, -1, 1]), &p(&[0, 2])).unwrap();
        assert_eq!(q, Poly::new(vec![rat(-1, 2), rat(1, 2)]));
        assert!(r.is_zero());
        assert!(poly_divrem(&p(&[1]), &Poly::zero()).is_err());
    }

    #[test]
    fn multiplicity_examples() {
        let g = p(&[0, 0, -1, 1]); // x^2 (x - 1)
        assert_eq!(multiplicity(&g, &Poly::x()).unwrap(), 2);
        assert_eq!(multiplicity(&g, &p(&[1, 1])).unwrap(), 0);
        let g = &p(&[1, 0, 1]).pow(3) * &p(&[-2, 1]);
        assert_eq!(multiplicity(&g, &p(&[1, 0, 1])).unwrap(), 3);
        assert!(multiplicity(&g, &p(&[-1, 0, 1])).is_err());
        assert!(multiplicity(&g, &p(&[2, 2])).is_err());
    }

    #[test]
    fn eval_examples() {
        let binom = Poly::new(vec![int(0), rat(-1, 2), rat(1, 2)]);
        assert_eq!(poly_eval(&binom, &int(4)), int(6));
        assert_eq!(poly_eval(&Poly::x(), &int(0)), int(0));
        let f = Poly::new(vec![rat(1, 2), rat(3, 2)]);
        assert_eq!(poly_eval(&f, &rat(1, 3)), int(1));
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(p(&[-1, 0, 1]).to_string(), "x^2 - 1");
        assert_eq!(Poly::new(vec![rat(1, 2), int(-3)]).to_string(), "-3*x + 1/2");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    #[test]
    fn json_form() {
        let f = Poly::new(vec![rat(-1, 2), int(0), int(1)]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"["-1/2","0","1"]"#);
        let back: Poly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let mixed: Poly = serde_json::from_str(r#"[0, "1/3", 2]"#).unwrap();
        assert_eq!(mixed, Poly::new(vec![int(0), rat(1, 3), int(2)]));
    }

    fn small_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
        prop::collection::vec((-30i64..30, 1i64..8), 0..=max_deg + 1)
            .prop_map(|cs| Poly::new(cs.into_iter().map(|(n, d)| rat(n, d)).collect()))
    }

    fn irreducible() -> impl Strategy<Value = Poly> {
        prop_oneof![
            (-6i64..6).prop_map(|r| p(&[-r, 1])),
            Just(p(&[1, 0, 1])),
            Just(p(&[-2, 0, 1])),
            Just(p(&[1, 1, 1])),
            Just(p(&[-2, 0, 0, 1])),
        ]
    }

    proptest! {
        #[test]
        fn divrem_recomposes(a in small_poly(6), b in small_poly(4)) {
            prop_assume!(!b.is_zero());
            let (q, r) = a.divrem(&b).unwrap();
            prop_assert_eq!(&(&q * &b) + &r, a);
            prop_assert!(r.is_zero() || r.deg() < b.deg());
        }

        #[test]
        fn multiplicity_counts_extra_factor(g in small_poly(5), h in irreducible()) {
            prop_assume!(!g.is_zero());
            let m = multiplicity(&g, &h).unwrap();
            prop_assert_eq!(multiplicity(&(&g * &h), &h).unwrap(), m + 1);
        }

        #[test]
        fn content_is_multiplicative(f in small_poly(4), g in small_poly(4)) {
            prop_assume!(!f.is_zero() && !g.is_zero());
            prop_assert_eq!(
                (&f * &g).content().unwrap(),
                f.content().unwrap() * g.content().unwrap()
            );
        }
    }
}
