//! Factorization over the rationals into monic irreducibles.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, is_prime, p_power, vp_rat, Rational, ValInt};
use crate::error::{input, Error, Result};
use crate::modp;
use crate::poly::{raw_multiplicity, Poly};

/// Largest squarefree degree handed to the modular recombination step.
pub const DEFAULT_DEGREE_CAP: usize = 12;

/// `content * prod h^e` with every `h` monic irreducible over the rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredPoly {
    content: Rational,
    factors: Vec<(Poly, u32)>,
}

impl FactoredPoly {
    /// Builds from already certified parts; merges repeated factors and sorts.
    pub(crate) fn from_parts(content: Rational, factors: Vec<(Poly, u32)>) -> FactoredPoly {
        let mut merged: Vec<(Poly, u32)> = Vec::new();
        for (h, e) in factors {
            if e == 0 {
                continue;
            }
            match merged.iter_mut().find(|(g, _)| *g == h) {
                Some(slot) => slot.1 += e,
                None => merged.push((h, e)),
            }
        }
        merged.sort_by(|a, b| a.0.canonical_cmp(&b.0));
        FactoredPoly {
            content,
            factors: merged,
        }
    }

    pub fn constant(c: Rational) -> FactoredPoly {
        FactoredPoly {
            content: c,
            factors: Vec::new(),
        }
    }

    pub fn one() -> FactoredPoly {
        FactoredPoly::constant(Rational::one())
    }

    pub fn content(&self) -> &Rational {
        &self.content
    }

    pub fn factors(&self) -> &[(Poly, u32)] {
        &self.factors
    }

    pub fn factor_polys(&self) -> Vec<Poly> {
        self.factors.iter().map(|(h, _)| h.clone()).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.factors.iter().map(|(h, e)| h.deg() * *e as usize).sum()
    }

    /// Exponent of the monic irreducible `h` (0 if absent).
    pub fn multiplicity(&self, h: &Poly) -> u32 {
        self.factors
            .iter()
            .find(|(g, _)| g == h)
            .map_or(0, |(_, e)| *e)
    }

    pub fn expand(&self) -> Poly {
        let mut acc = Poly::constant(self.content.clone());
        for (h, e) in &self.factors {
            acc = &acc * &h.pow(*e);
        }
        acc
    }

    pub fn mul(&self, other: &FactoredPoly) -> FactoredPoly {
        let mut fs = self.factors.clone();
        fs.extend(other.factors.iter().cloned());
        FactoredPoly::from_parts(&self.content * &other.content, fs)
    }

    pub fn pow(&self, e: u32) -> FactoredPoly {
        FactoredPoly {
            content: num_traits::pow(self.content.clone(), e as usize),
            factors: if e == 0 {
                Vec::new()
            } else {
                self.factors.iter().map(|(h, m)| (h.clone(), m * e)).collect()
            },
        }
    }

    pub fn scale(&self, a: &Rational) -> FactoredPoly {
        FactoredPoly {
            content: &self.content * a,
            factors: self.factors.clone(),
        }
    }

    /// `self / other` if it is a polynomial.
    pub fn div_exact(&self, other: &FactoredPoly) -> Option<FactoredPoly> {
        let mut fs = self.factors.clone();
        for (h, e) in &other.factors {
            let slot = fs.iter_mut().find(|(g, _)| g == h)?;
            if slot.1 < *e {
                return None;
            }
            slot.1 -= e;
        }
        fs.retain(|(_, e)| *e > 0);
        Some(FactoredPoly {
            content: &self.content / &other.content,
            factors: fs,
        })
    }

    /// True if `other | self` in `Q[x]`.
    pub fn divides(&self, other: &FactoredPoly) -> bool {
        self.factors
            .iter()
            .all(|(h, e)| other.multiplicity(h) >= *e)
    }

    /// True if every factor of `self` occurs among `support`.
    pub fn supported_by(&self, support: &[Poly]) -> bool {
        self.factors.iter().all(|(h, _)| support.contains(h))
    }

    pub fn eval(&self, s: &Rational) -> Rational {
        self.factors.iter().fold(self.content.clone(), |acc, (h, e)| {
            acc * num_traits::pow(h.eval(s), *e as usize)
        })
    }

    /// `v_p(self(s))`, computed factor by factor.
    pub fn vp_at(&self, s: &Rational, p: u64) -> ValInt {
        self.factors
            .iter()
            .fold(vp_rat(&self.content, p), |acc, (h, e)| {
                acc + vp_rat(&h.eval(s), p).scale(*e as u64)
            })
    }

    /// Rewrites the factorization as `c * prod sigma_h^e` with each
    /// `sigma_h = primitive_scaling(h, p)`; returns `c`.
    pub fn scaled_content(&self, p: u64) -> Rational {
        let mut c = self.content.clone();
        for (h, e) in &self.factors {
            let a = scaling_exponent(h, p);
            c *= p_power(p, -a * *e as i64);
        }
        c
    }
}

impl fmt::Display for FactoredPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", arith::format_rational(&self.content))?;
        for (h, e) in &self.factors {
            if *e == 1 {
                write!(f, " * ({h})")?;
            } else {
                write!(f, " * ({h})^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct FactorJson {
    coeffs: Poly,
    mult: u32,
}

#[derive(Serialize, Deserialize)]
struct FactoredJson {
    #[serde(with = "arith::rational_str")]
    content: Rational,
    factors: Vec<FactorJson>,
}

impl Serialize for FactoredPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FactoredJson {
            content: self.content.clone(),
            factors: self
                .factors
                .iter()
                .map(|(h, e)| FactorJson {
                    coeffs: h.clone(),
                    mult: *e,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FactoredPoly {
    /// Deserialization re-certifies the factorization.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FactoredJson::deserialize(d)?;
        let parts = raw.factors.into_iter().map(|f| (f.coeffs, f.mult)).collect();
        certify_factored(raw.content, parts).map_err(serde::de::Error::custom)
    }
}

/// `alpha` with `p^alpha h` primitive in `Z_(p)[x]`.
pub fn scaling_exponent(h: &Poly, p: u64) -> i64 {
    match h.min_coeff_valuation(p) {
        ValInt::Finite(v) => -v,
        ValInt::Infinite => 0,
    }
}

/// `p^alpha h` with coefficients in `Z_(p)` and at least one unit coefficient.
pub fn primitive_scaling(h: &Poly, p: u64) -> Poly {
    h.scale(&p_power(p, scaling_exponent(h, p)))
}

/// Yun's algorithm: pairwise coprime monic squarefree parts with multiplicities.
pub fn squarefree_decompose(f: &Poly) -> Result<Vec<(Poly, u32)>> {
    if f.is_zero() {
        return input("squarefree decomposition of the zero polynomial");
    }
    let f = f.monic();
    if f.is_constant() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let df = f.derivative();
    let a0 = Poly::gcd(&f, &df);
    let mut b = f.div_exact(&a0).expect("gcd divides");
    let mut c = df.div_exact(&a0).expect("gcd divides");
    let mut d = &c - &b.derivative();
    let mut i = 1;
    while !b.is_constant() {
        let a = Poly::gcd(&b, &d);
        b = b.div_exact(&a).expect("gcd divides");
        c = d.div_exact(&a).expect("gcd divides");
        d = &c - &b.derivative();
        if !a.is_constant() {
            out.push((a, i));
        }
        i += 1;
    }
    Ok(out)
}

/// Smallest prime not dividing the leading coefficient for which the
/// primitive integer polynomial stays squarefree.
fn good_prime(coeffs: &[BigInt]) -> u64 {
    let lc = coeffs.last().expect("nonzero");
    let mut p = 2;
    loop {
        if is_prime(p) && !(lc % BigInt::from(p)).is_zero() {
            let fp = modp::reduce(coeffs, p);
            if modp::is_squarefree(&fp, p) {
                return p;
            }
        }
        p += 1;
    }
}

/// Rational roots by p-adic lifting of the roots modulo a good prime.
pub fn rational_roots(f: &Poly) -> Result<Vec<Rational>> {
    if f.is_zero() {
        return input("rational roots of the zero polynomial");
    }
    let mut roots = Vec::new();
    for (part, _) in squarefree_decompose(f)? {
        roots.extend(squarefree_roots(&part));
    }
    roots.sort();
    Ok(roots)
}

fn squarefree_roots(f: &Poly) -> Vec<Rational> {
    let mut roots = Vec::new();
    let mut g = f.clone();
    if g.coeff(0).is_zero() {
        roots.push(Rational::zero());
        g = g.div_exact(&Poly::x()).expect("x divides");
    }
    if g.is_constant() {
        return roots;
    }
    let coeffs = g.primitive_int_coeffs().expect("nonzero");
    let lc = coeffs.last().unwrap().clone();
    let c0 = coeffs[0].abs();
    let p = good_prime(&coeffs);
    let bound = BigInt::from(2) * lc.abs() * &c0;
    let mut k = 1u32;
    let mut modulus = BigInt::from(p);
    while modulus <= bound {
        modulus *= p;
        k += 1;
    }
    let fp = modp::reduce(&coeffs, p);
    let dfp = modp::derivative(&fp, p);
    for r0 in 0..p {
        if modp::eval(&fp, r0, p) != 0 {
            continue;
        }
        let r = newton_lift(&coeffs, r0, modp::eval(&dfp, r0, p), p, k);
        let num = modp::symmetric(&(&lc * r), &modulus);
        let cand = Rational::new(num, lc.clone());
        if g.eval(&cand).is_zero() {
            roots.push(cand);
        }
    }
    roots
}

/// Lift a simple root `r0` of `f` modulo `p` to a root modulo `p^k`.
fn newton_lift(coeffs: &[BigInt], r0: u64, d0: u64, p: u64, k: u32) -> BigInt {
    let bp = BigInt::from(p);
    let modulus = num_traits::pow(bp.clone(), k as usize);
    let inv_d = BigInt::from(modp::inv_mod(d0, p));
    let mut r = BigInt::from(r0);
    let mut pj = bp.clone();
    // Linear lifting with the derivative inverse fixed mod p.
    for _ in 1..k {
        let next = &pj * &bp;
        let val = eval_int(coeffs, &r);
        let e = (val / &pj).mod_floor(&bp);
        let step = (e * &inv_d).mod_floor(&bp);
        r = (r - step * &pj).mod_floor(&next);
        pj = next;
    }
    r.mod_floor(&modulus)
}

fn eval_int(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    coeffs
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// Factors a nonzero polynomial with the default degree cap.
pub fn factor_over_q(f: &Poly) -> Result<FactoredPoly> {
    factor_over_q_with(f, DEFAULT_DEGREE_CAP)
}

pub fn factor_over_q_with(f: &Poly, degree_cap: usize) -> Result<FactoredPoly> {
    if f.is_zero() {
        return input("cannot factor the zero polynomial");
    }
    let content = f.leading_coeff();
    let mut factors = Vec::new();
    for (part, e) in squarefree_decompose(f)? {
        for h in factor_squarefree(&part, degree_cap)? {
            factors.push((h, e));
        }
    }
    let out = FactoredPoly::from_parts(content, factors);
    if out.expand() != *f {
        return Err(Error::Certification(format!(
            "factorization of {f} does not expand back"
        )));
    }
    Ok(out)
}

/// Monic irreducible factors of a monic squarefree polynomial.
fn factor_squarefree(f: &Poly, degree_cap: usize) -> Result<Vec<Poly>> {
    let mut out = Vec::new();
    let mut rest = f.clone();
    for r in squarefree_roots(f) {
        let lin = Poly::linear(&r);
        rest = rest.div_exact(&lin).expect("root divides");
        out.push(lin);
    }
    if rest.is_constant() {
        return Ok(out);
    }
    if rest.deg() <= 3 {
        out.push(rest);
        return Ok(out);
    }
    if rest.deg() > degree_cap {
        return Err(Error::Resource(format!(
            "degree {} squarefree part exceeds the factorization cap {degree_cap}",
            rest.deg()
        )));
    }
    out.extend(zassenhaus(&rest)?);
    Ok(out)
}

/// Modular factorization with Hensel lifting and subset recombination.
fn zassenhaus(f: &Poly) -> Result<Vec<Poly>> {
    let coeffs = f.primitive_int_coeffs()?;
    let n = coeffs.len() - 1;
    let lc = coeffs.last().unwrap().clone();
    let p = good_prime(&coeffs);
    let fp = modp::monic(&modp::reduce(&coeffs, p), p);
    let modular = modp::berlekamp(&fp, p);
    if modular.len() == 1 {
        return Ok(vec![f.monic()]);
    }
    // Coefficient bound for any factor of lc * f.
    let norm: BigInt = coeffs.iter().map(|c| c.abs()).sum();
    let bound = BigInt::from(2) * (BigInt::one() << n) * norm * lc.abs();
    let mut k = 1u32;
    let mut modulus = BigInt::from(p);
    while modulus <= bound {
        modulus *= p;
        k += 1;
    }
    let lc_inv = arith::mod_inverse(&lc, &modulus).expect("lc is a unit mod p");
    let monic_f: Vec<BigInt> = coeffs.iter().map(|c| c * &lc_inv).collect();
    let monic_f = modp::zm_reduce(&monic_f, &modulus);
    let mut lifted = modp::hensel_multi(&monic_f, &modular, p, k);

    let mut remaining = coeffs.clone();
    let mut found = Vec::new();
    let mut size = 1;
    while 2 * size <= lifted.len() {
        let mut hit = None;
        for subset in subsets(lifted.len(), size) {
            let cur_lc = remaining.last().unwrap().clone();
            let mut prod = vec![cur_lc.clone()];
            for &i in &subset {
                prod = modp::zm_mul(&prod, &lifted[i], &modulus);
            }
            let cand: Vec<BigInt> = prod.iter().map(|c| modp::symmetric(c, &modulus)).collect();
            let cand_poly = Poly::from_bigints(&cand);
            let cand_pp = cand_poly.primitive_part()?;
            let rem_poly = Poly::from_bigints(&remaining);
            if let Some(q) = rem_poly.div_exact(&cand_pp) {
                if q.coeffs().iter().all(|c| c.is_integer()) {
                    hit = Some((subset, cand_pp, q));
                    break;
                }
            }
        }
        match hit {
            Some((subset, factor, q)) => {
                found.push(factor.monic());
                remaining = q.primitive_int_coeffs()?;
                lifted = lifted
                    .into_iter()
                    .enumerate()
                    .filter(|(i, _)| !subset.contains(i))
                    .map(|(_, g)| g)
                    .collect();
            }
            None => size += 1,
        }
    }
    let last = Poly::from_bigints(&remaining);
    if !last.is_constant() {
        found.push(last.monic());
    }
    Ok(found)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Degrees `d` for which a factor of degree `d` is compatible with the
/// factorization modulo `p`.
fn degree_pattern(coeffs: &[BigInt], p: u64) -> Option<Vec<bool>> {
    let n = coeffs.len() - 1;
    let fp = modp::reduce(coeffs, p);
    if fp.len() != coeffs.len() || !modp::is_squarefree(&fp, p) {
        return None;
    }
    let mut possible = vec![false; n + 1];
    possible[0] = true;
    for g in modp::berlekamp(&modp::monic(&fp, p), p) {
        let d = g.len() - 1;
        for s in (d..=n).rev() {
            if possible[s - d] {
                possible[s] = true;
            }
        }
    }
    Some(possible)
}

/// Irreducibility over the rationals of a non-constant polynomial.
pub fn is_irreducible(h: &Poly) -> Result<bool> {
    if h.is_zero() || h.is_constant() {
        return Ok(false);
    }
    if h.deg() == 1 {
        return Ok(true);
    }
    let sf = squarefree_decompose(h)?;
    if sf.len() != 1 || sf[0].1 != 1 {
        return Ok(false);
    }
    if !squarefree_roots(&h.monic()).is_empty() {
        return Ok(false);
    }
    if h.deg() <= 3 {
        return Ok(true);
    }
    // Intersect the degree patterns over a few primes first.
    let coeffs = h.primitive_int_coeffs()?;
    let n = h.deg();
    let mut allowed = vec![true; n + 1];
    let mut p = 2;
    let mut used = 0;
    while used < 8 && p < 200 {
        if is_prime(p) {
            if let Some(pat) = degree_pattern(&coeffs, p) {
                for (a, b) in allowed.iter_mut().zip(pat) {
                    *a &= b;
                }
                used += 1;
                if (1..n).all(|d| !allowed[d]) {
                    return Ok(true);
                }
            }
        }
        p += 1;
    }
    Ok(factor_over_q(h)?.factors().len() == 1)
}

/// Checks a user supplied factorization: monic, irreducible, pairwise distinct.
pub fn certify_factored(content: Rational, factors: Vec<(Poly, u32)>) -> Result<FactoredPoly> {
    if content.is_zero() {
        return input("factored polynomial has zero content");
    }
    for (i, (h, e)) in factors.iter().enumerate() {
        if *e == 0 {
            return input(format!("factor {h} has multiplicity 0"));
        }
        if !h.is_monic() || h.is_constant() {
            return input(format!("factor {h} is not monic and non-constant"));
        }
        if factors[..i].iter().any(|(g, _)| g == h) {
            return input(format!("factor {h} is listed twice"));
        }
        if !is_irreducible(h)? {
            return input(format!("factor {h} is reducible over Q"));
        }
    }
    Ok(FactoredPoly::from_parts(content, factors))
}

/// Factors `g`, or checks it against a precomputed factor list when every
/// candidate factor is known; unknown factors fall back to full factoring.
pub fn factor_against(g: &Poly, known: &[Poly]) -> Result<FactoredPoly> {
    if g.is_zero() {
        return input("zero polynomial");
    }
    let mut rest = g.clone();
    let mut parts = Vec::new();
    for h in known {
        let e = raw_multiplicity(&rest, h);
        if e > 0 {
            rest = rest.div_exact(&h.pow(e)).expect("power divides");
            parts.push((h.clone(), e));
        }
    }
    let tail = factor_over_q(&rest)?;
    parts.extend(tail.factors().iter().cloned());
    Ok(FactoredPoly::from_parts(g.leading_coeff(), parts))
}
