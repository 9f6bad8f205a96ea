//! The valuation map `phi` into a free monoid `N_0^H (+) N_0^T`, gcds there,
//! divisor-theory witnesses, critical primes and the global map over `Z`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{self, p_power, prime_factors, vp_rat, Rational, ValInt};
use crate::density::{self, DenseOptions, ValVector};
use crate::error::{input, Error, Result};
use crate::factor::{scaling_exponent, FactoredPoly};
use crate::monoid::{self, Membership, MonoidContext};
use crate::oracle;
use crate::poly::Poly;
use crate::set_model::SetSpec;

/// Trial-division limit when factoring value gcds.
const FACTOR_LIMIT: u64 = 1 << 24;

pub const DEFAULT_WITNESS_BOUND: u32 = 32;

/// An element of `N_0^H (+) sum_p N_0^{T_p}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhiVector {
    pub h: Vec<u64>,
    pub t: BTreeMap<u64, Vec<u64>>,
}

impl PhiVector {
    pub fn zero_like(&self) -> PhiVector {
        PhiVector {
            h: vec![0; self.h.len()],
            t: self.t.iter().map(|(p, v)| (*p, vec![0; v.len()])).collect(),
        }
    }

    fn same_shape(&self, other: &PhiVector) -> bool {
        self.h.len() == other.h.len()
            && self.t.len() == other.t.len()
            && self
                .t
                .iter()
                .zip(&other.t)
                .all(|((p, a), (q, b))| p == q && a.len() == b.len())
    }

    fn zip_with(&self, other: &PhiVector, op: impl Fn(u64, u64) -> u64) -> PhiVector {
        PhiVector {
            h: self.h.iter().zip(&other.h).map(|(a, b)| op(*a, *b)).collect(),
            t: self
                .t
                .iter()
                .zip(&other.t)
                .map(|((p, a), (_, b))| (*p, a.iter().zip(b).map(|(x, y)| op(*x, *y)).collect()))
                .collect(),
        }
    }

    pub fn add(&self, other: &PhiVector) -> Result<PhiVector> {
        check_shape(self, other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    /// All coordinates in one list: `H` block, then each prime's block.
    pub fn flat(&self) -> Vec<u64> {
        let mut out = self.h.clone();
        for v in self.t.values() {
            out.extend(v);
        }
        out
    }
}

impl std::fmt::Display for PhiVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let h: Vec<String> = self.h.iter().map(u64::to_string).collect();
        write!(f, "({}", h.join(","))?;
        for v in self.t.values() {
            let t: Vec<String> = v.iter().map(u64::to_string).collect();
            write!(f, " | {}", t.join(","))?;
        }
        write!(f, ")")
    }
}

fn check_shape(u: &PhiVector, v: &PhiVector) -> Result<()> {
    if u.same_shape(v) {
        Ok(())
    } else {
        input(format!("phi vectors {u} and {v} have different shapes"))
    }
}

/// Componentwise `u <= v`.
pub fn divides_in_m(u: &PhiVector, v: &PhiVector) -> Result<bool> {
    check_shape(u, v)?;
    Ok(u.flat().iter().zip(v.flat()).all(|(a, b)| *a <= b))
}

/// Componentwise minimum.
pub fn gcd_in_m(vectors: &[PhiVector]) -> Result<PhiVector> {
    let (first, rest) = vectors
        .split_first()
        .ok_or_else(|| Error::Input("gcd of an empty family".into()))?;
    rest.iter().try_fold(first.clone(), |acc, v| {
        check_shape(&acc, v)?;
        Ok(acc.zip_with(v, u64::min))
    })
}

fn natural(v: ValInt, what: impl FnOnce() -> String) -> Result<u64> {
    match v {
        ValInt::Finite(x) if x >= 0 => Ok(x as u64),
        ValInt::Finite(_) => Err(Error::Domain(what())),
        ValInt::Infinite => Err(Error::Unsupported(format!(
            "{}: value is zero at a point of T",
            what()
        ))),
    }
}

fn local_block(g: &FactoredPoly, ctx: &MonoidContext) -> Result<Vec<u64>> {
    ctx.points()
        .iter()
        .map(|t| {
            natural(g.vp_at(t, ctx.prime), || {
                format!("{g} has negative valuation at {}", arith::format_rational(t))
            })
        })
        .collect()
}

fn h_block(g: &FactoredPoly, factors: &[Poly]) -> Vec<u64> {
    factors.iter().map(|h| g.multiplicity(h) as u64).collect()
}

/// `phi(g)` for `g` in `H`-supported integer-valued polynomials at one prime.
pub fn phi_local(g: &FactoredPoly, ctx: &MonoidContext) -> Result<PhiVector> {
    if !ctx.supports(g) {
        return Err(Error::Domain(format!("{g} has a factor outside H")));
    }
    if !ctx.int_valued(g)? {
        return Err(Error::Domain(format!("{g} is not integer-valued on S at {}", ctx.prime)));
    }
    Ok(PhiVector {
        h: h_block(g, &ctx.factors),
        t: BTreeMap::from([(ctx.prime, local_block(g, ctx)?)]),
    })
}

/// One gcd identity: the named basis vector and the images realizing it.
#[derive(Clone, Debug, Serialize)]
pub struct GcdIdentity {
    pub basis: String,
    pub target: PhiVector,
    pub images: Vec<PhiVector>,
    pub gcd: PhiVector,
    pub realized: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Separator {
    #[serde(with = "arith::rational_str")]
    pub point: Rational,
    /// Exponents of `k = prod sigma_h^{m_h}`.
    pub exponents: Vec<u32>,
    pub witness: FactoredPoly,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixedWitness {
    #[serde(with = "arith::rational_str")]
    pub point: Rational,
    pub factor: Poly,
    pub witness: FactoredPoly,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSet {
    pub const_p: FactoredPoly,
    pub factor_witnesses: Vec<FactoredPoly>,
    pub separators: Vec<Separator>,
    pub mixed: Vec<MixedWitness>,
    pub gcd_identities: Vec<GcdIdentity>,
}

impl WitnessSet {
    pub fn all_realized(&self) -> bool {
        self.gcd_identities.iter().all(|g| g.realized)
    }
}

fn basis_vector(ctx: &MonoidContext, slot: usize) -> PhiVector {
    let nh = ctx.factors.len();
    let mut flat = vec![0u64; nh + ctx.points().len()];
    flat[slot] = 1;
    PhiVector {
        h: flat[..nh].to_vec(),
        t: BTreeMap::from([(ctx.prime, flat[nh..].to_vec())]),
    }
}

/// Exponent vectors with entries `<= bound`, in order of total degree.
fn exponent_vectors(n: usize, bound: u32) -> Vec<Vec<u32>> {
    let mut all: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..n {
        all = all
            .into_iter()
            .flat_map(|v| {
                (0..=bound).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    all.sort_by_key(|v| (v.iter().sum::<u32>(), v.clone()));
    all
}

/// `k = prod sigma_h^{m_h}` strictly smallest at `T[index]`.
fn find_separator(
    ctx: &MonoidContext,
    vectors: &[ValVector],
    index: usize,
    max_bound: u32,
) -> Result<Vec<u32>> {
    let n = ctx.factors.len();
    let mut bound = 1u32;
    loop {
        let size = (bound as f64 + 1.0).powi(n as i32);
        if size > 2e6 {
            break;
        }
        for m in exponent_vectors(n, bound) {
            let m64: Vec<u64> = m.iter().map(|&x| x as u64).collect();
            let at = vectors[index].pairing(&m64);
            if at.is_infinite() {
                continue;
            }
            let separates = vectors
                .iter()
                .enumerate()
                .all(|(r, v)| r == index || v.pairing(&m64) > at);
            if separates {
                return Ok(m);
            }
        }
        if bound >= max_bound {
            break;
        }
        bound = (bound * 2).min(max_bound);
    }
    Err(Error::Resource(format!(
        "no separator for e_t with t = {} found with exponents up to {bound}",
        arith::format_rational(&ctx.points()[index])
    )))
}

fn in_family(g: &FactoredPoly, ctx: &MonoidContext) -> Result<()> {
    if !ctx.supports(g) || !ctx.int_valued(g)? {
        return Err(Error::Certification(format!("witness {g} is not in the family")));
    }
    if !ctx.f_image_primitive() && !ctx.in_monoid(g)?.is_member() {
        return Err(Error::Certification(format!("witness {g} is not in the monoid")));
    }
    Ok(())
}

/// Builds the witness polynomials and verifies every gcd identity.
pub fn build_witnesses(ctx: &MonoidContext, max_bound: u32) -> Result<WitnessSet> {
    let p = ctx.prime;
    let nh = ctx.factors.len();
    let vectors = &ctx.dense.vectors;
    let const_p = FactoredPoly::constant(Rational::from_integer(p.into()));
    let factor_witnesses: Vec<FactoredPoly> = ctx
        .factors
        .iter()
        .map(|h| monoid::factor_witness(h, p))
        .collect();

    let mut separators = Vec::new();
    for (i, t) in ctx.points().iter().enumerate() {
        let m = find_separator(ctx, vectors, i, max_bound)?;
        let k = ctx.sigma_product(&m);
        let alpha = k.vp_at(t, p).finite().expect("finite at the separated point");
        let witness = k.scale(&p_power(p, -alpha));
        in_family(&witness, ctx)?;
        separators.push(Separator {
            point: t.clone(),
            exponents: m,
            witness,
        });
    }

    let mut mixed = Vec::new();
    for (sep, t) in separators.iter().zip(ctx.points()) {
        for (h, sigma) in ctx.factors.iter().zip(&factor_witnesses) {
            let alpha = sigma.vp_at(t, p).finite().ok_or_else(|| {
                Error::Unsupported(format!("{} is a root of {h}", arith::format_rational(t)))
            })?;
            let witness = sigma
                .mul(&sep.witness.pow(alpha as u32))
                .scale(&p_power(p, -alpha));
            in_family(&witness, ctx)?;
            mixed.push(MixedWitness {
                point: t.clone(),
                factor: h.clone(),
                witness,
            });
        }
    }

    let mut gcd_identities = Vec::new();
    for (j, h) in ctx.factors.iter().enumerate() {
        let mut images: Vec<PhiVector> = mixed
            .iter()
            .filter(|w| w.factor == *h)
            .map(|w| phi_local(&w.witness, ctx))
            .collect::<Result<_>>()?;
        images.push(phi_local(&factor_witnesses[j], ctx)?);
        gcd_identities.push(identity(format!("e_{{{h}}}"), basis_vector(ctx, j), images)?);
    }
    let phi_p = phi_local(&const_p, ctx)?;
    for (i, t) in ctx.points().iter().enumerate() {
        let mut images: Vec<PhiVector> = separators
            .iter()
            .enumerate()
            .filter(|(r, _)| *r != i)
            .map(|(_, s)| phi_local(&s.witness, ctx))
            .collect::<Result<_>>()?;
        images.push(phi_p.clone());
        gcd_identities.push(identity(
            format!("e_{{t={}}}", arith::format_rational(t)),
            basis_vector(ctx, nh + i),
            images,
        )?);
    }
    Ok(WitnessSet {
        const_p,
        factor_witnesses,
        separators,
        mixed,
        gcd_identities,
    })
}

fn identity(basis: String, target: PhiVector, images: Vec<PhiVector>) -> Result<GcdIdentity> {
    let gcd = gcd_in_m(&images)?;
    Ok(GcdIdentity {
        realized: gcd == target,
        basis,
        target,
        images,
        gcd,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryReport {
    pub prime: u64,
    pub image_primitive: bool,
    pub basis_vectors: usize,
    pub realized: usize,
    pub identities: Vec<GcdIdentity>,
}

impl TheoryReport {
    pub fn holds(&self) -> bool {
        self.realized == self.basis_vectors
    }
}

/// Checks that every basis vector of the target is a gcd of images. In the
/// image-primitive case only the `H` block is checked, against `phi(sigma_h)`.
pub fn verify_divisor_theory(ctx: &MonoidContext, max_bound: u32) -> Result<TheoryReport> {
    if ctx.f_image_primitive() {
        let mut identities = Vec::new();
        for h in &ctx.factors {
            let img = phi_local(&monoid::factor_witness(h, ctx.prime), ctx)?;
            let target: Vec<u64> = ctx.factors.iter().map(|g| u64::from(g == h)).collect();
            let projected = PhiVector {
                h: img.h.clone(),
                t: BTreeMap::new(),
            };
            identities.push(GcdIdentity {
                basis: format!("e_{{{h}}}"),
                realized: img.h == target,
                target: PhiVector {
                    h: target,
                    t: BTreeMap::new(),
                },
                images: vec![img],
                gcd: projected,
            });
        }
        let realized = identities.iter().filter(|i| i.realized).count();
        return Ok(TheoryReport {
            prime: ctx.prime,
            image_primitive: true,
            basis_vectors: ctx.factors.len(),
            realized,
            identities,
        });
    }
    let w = build_witnesses(ctx, max_bound)?;
    let realized = w.gcd_identities.iter().filter(|i| i.realized).count();
    Ok(TheoryReport {
        prime: ctx.prime,
        image_primitive: false,
        basis_vectors: ctx.factors.len() + ctx.points().len(),
        realized,
        identities: w.gcd_identities,
    })
}

/// Primes `p` with `f` not in `Z_(p)[x]` or with `v_p(d_S(f)) > 0`.
pub fn critical_primes(f: &FactoredPoly, set: &SetSpec) -> Result<Vec<u64>> {
    critical_primes_with(f, set, &DenseOptions::default())
}

pub fn critical_primes_with(f: &FactoredPoly, set: &SetSpec, opts: &DenseOptions) -> Result<Vec<u64>> {
    require_integral_set(set)?;
    let g = f.expand();
    if g.is_zero() {
        return input("f is zero");
    }
    let den = g
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut primes = prime_factors(&den, FACTOR_LIMIT)?;
    let cleared = g.scale(&Rational::from_integer(den));
    let sample = sample_points(set, &f.factor_polys(), g.deg() + 1);
    if sample.is_empty() {
        return Err(Error::Unsupported("f vanishes on every element of S".into()));
    }
    let value_gcd = sample
        .iter()
        .fold(BigInt::zero(), |acc, s| acc.gcd(&cleared.eval(s).to_integer()));
    for q in prime_factors(&value_gcd, FACTOR_LIMIT)? {
        if primes.contains(&q) {
            continue;
        }
        let ctx = MonoidContext::with_options(f.clone(), set.clone(), q, opts)?;
        if ctx.fixed_divisor_val > ValInt::ZERO {
            primes.push(q);
        }
    }
    primes.sort_unstable();
    Ok(primes)
}

/// The fixed divisor of `g` on `S` over `Z` as a positive rational, from
/// `deg g + 1` consecutive values per residue class.
pub fn fixed_divisor_global(g: &FactoredPoly, set: &SetSpec) -> Result<Rational> {
    require_integral_set(set)?;
    let poly = g.expand();
    let den = poly
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let cleared = poly.scale(&Rational::from_integer(den.clone()));
    let values: Vec<Rational> = match set.classes() {
        Some(classes) => classes
            .iter()
            .flat_map(|(rho, m)| {
                (0..=poly.deg()).map(move |y| Rational::from_integer(rho + m * BigInt::from(y)))
            })
            .collect(),
        None => match set {
            SetSpec::Finite { elements } => elements.clone(),
            _ => unreachable!(),
        },
    };
    let gcd = values
        .iter()
        .fold(BigInt::zero(), |acc, s| acc.gcd(&cleared.eval(s).to_integer()));
    if gcd.is_zero() {
        return Err(Error::Unsupported("g vanishes on every element of S".into()));
    }
    Ok(Rational::new(gcd, den))
}

fn require_integral_set(set: &SetSpec) -> Result<()> {
    if let SetSpec::Finite { elements } = set {
        if let Some(e) = elements.iter().find(|e| !e.is_integer()) {
            return input(format!(
                "global scope needs S inside Z, found {}",
                arith::format_rational(e)
            ));
        }
    }
    Ok(())
}

/// The first `n` non-roots of `S` in representative order (all of them for a
/// finite set).
fn sample_points(set: &SetSpec, factors: &[Poly], n: usize) -> Vec<Rational> {
    match set {
        SetSpec::Finite { elements } => elements
            .iter()
            .filter(|s| !density::is_root(s, factors))
            .cloned()
            .collect(),
        _ => {
            let mut radius = BigInt::from(4 * n as u64 + 8);
            loop {
                let pts: Vec<Rational> = set
                    .elements_within(&radius)
                    .into_iter()
                    .filter(|s| !density::is_root(s, factors))
                    .take(n)
                    .collect();
                if pts.len() == n {
                    return pts;
                }
                radius *= 2;
            }
        }
    }
}

/// `[[f]]` inside `Int(S, Z)`, described prime by prime.
#[derive(Clone, Debug, Serialize)]
pub struct GlobalContext {
    pub f: FactoredPoly,
    pub set: SetSpec,
    pub factors: Vec<Poly>,
    pub primes: Vec<u64>,
    pub locals: Vec<MonoidContext>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalCertificate {
    pub m: u32,
    pub cofactor: FactoredPoly,
    /// Smallest local power at each critical prime.
    pub local_m: BTreeMap<u64, u32>,
}

impl GlobalContext {
    pub fn new(f: FactoredPoly, set: SetSpec) -> Result<GlobalContext> {
        GlobalContext::with_options(f, set, &DenseOptions::default())
    }

    pub fn with_options(f: FactoredPoly, set: SetSpec, opts: &DenseOptions) -> Result<GlobalContext> {
        require_integral_set(&set)?;
        if !oracle::int_valued_by_values(&f.expand(), &set, None) {
            return Err(Error::Precondition("f is not integer-valued on S".into()));
        }
        let primes = critical_primes_with(&f, &set, opts)?;
        let locals = primes
            .iter()
            .map(|&p| MonoidContext::with_options(f.clone(), set.clone(), p, opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(GlobalContext {
            factors: f.factor_polys(),
            f,
            set,
            primes,
            locals,
        })
    }

    /// Primes outside the critical set at which `g` could fail to be a
    /// primitive product: divisors of its content and of factor denominators.
    fn structural_primes(&self, g: &FactoredPoly) -> Result<Vec<u64>> {
        let mut ns = vec![g.content().numer().clone(), g.content().denom().clone()];
        for h in g.factor_polys() {
            ns.push(h.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom())));
        }
        let mut out = Vec::new();
        for n in ns {
            for q in prime_factors(&n, FACTOR_LIMIT)? {
                if !self.primes.contains(&q) && !out.contains(&q) {
                    out.push(q);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Membership over `Z`: local membership at every critical prime and
    /// primitivity elsewhere. Returns the failing prime on refusal.
    pub fn membership(&self, g: &FactoredPoly) -> Result<std::result::Result<GlobalCertificate, String>> {
        if let Some((h, _)) = g.factors().iter().find(|(h, _)| !self.factors.contains(h)) {
            return Ok(Err(format!("foreign factor {h}")));
        }
        for q in self.structural_primes(g)? {
            let v = vp_rat(&g.scaled_content(q), q);
            if v != ValInt::ZERO {
                return Ok(Err(format!("at {q}: content valuation {v} outside the critical primes")));
            }
        }
        let mut local_m = BTreeMap::new();
        let mut m = g
            .factors()
            .iter()
            .map(|(h, e)| Integer::div_ceil(e, &self.f.multiplicity(h)))
            .max()
            .unwrap_or(0)
            .max(1);
        for ctx in &self.locals {
            match ctx.in_monoid(g)? {
                Membership::Member(c) => {
                    m = m.max(c.m);
                    local_m.insert(ctx.prime, c.m);
                }
                Membership::Refused { reason, detail } => {
                    return Ok(Err(format!("at {}: {} ({detail})", ctx.prime, reason.describe())));
                }
            }
        }
        let cofactor = self.f.pow(m).div_exact(g).expect("exponents checked");
        if !oracle::int_valued_by_values(&g.expand(), &self.set, None)
            || !oracle::int_valued_by_values(&cofactor.expand(), &self.set, None)
        {
            return Err(Error::Certification(format!(
                "local certificates for {g} do not combine to an integer-valued cofactor"
            )));
        }
        Ok(Ok(GlobalCertificate { m, cofactor, local_m }))
    }

    pub fn divides_in_monoid(&self, a: &FactoredPoly, b: &FactoredPoly) -> Option<FactoredPoly> {
        let c = b.div_exact(a)?;
        oracle::int_valued_by_values(&c.expand(), &self.set, None).then_some(c)
    }

    /// Seeded sample of distinct members of the global monoid.
    pub fn sample_monoid(&self, count: usize, m_max: u32, seed: u64) -> Result<Vec<FactoredPoly>> {
        if m_max == 0 {
            return Err(Error::Precondition("m_max must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let mut attempts = 0usize;
        let mut denominators: Vec<u64> = Vec::new();
        for h in &self.factors {
            let d = h.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            for q in prime_factors(&d, FACTOR_LIMIT)? {
                if !self.primes.contains(&q) && !denominators.contains(&q) {
                    denominators.push(q);
                }
            }
        }
        'attempt: while out.len() < count && attempts < 50 * count + 200 {
            attempts += 1;
            let m = rng.gen_range(1..=m_max);
            let e: Vec<u32> = self
                .f
                .factors()
                .iter()
                .map(|(_, k)| rng.gen_range(0..=m * k))
                .collect();
            let mut c = if rng.gen_bool(0.5) { Rational::one() } else { -Rational::one() };
            for ctx in &self.locals {
                let Some((lo, hi)) = ctx.exponent_range(&e, m) else {
                    continue 'attempt;
                };
                let j = rng.gen_range(lo..=hi);
                c *= p_power(ctx.prime, j + sigma_shift(&self.factors, &e, ctx.prime));
            }
            for &q in &denominators {
                c *= p_power(q, sigma_shift(&self.factors, &e, q));
            }
            let parts = self.factors.iter().cloned().zip(e.iter().copied()).collect();
            let g = FactoredPoly::from_parts(c, parts);
            if !seen.insert(g.clone()) {
                continue;
            }
            if let Err(why) = self.membership(&g)? {
                return Err(Error::Certification(format!("sampled element {g} was refused: {why}")));
            }
            out.push(g);
        }
        Ok(out)
    }
}

/// `v_p` of the constant turning `prod h^{e_h}` into `prod sigma_h^{e_h}`.
fn sigma_shift(factors: &[Poly], e: &[u32], p: u64) -> i64 {
    factors
        .iter()
        .zip(e)
        .map(|(h, &k)| scaling_exponent(h, p) * k as i64)
        .sum()
}

/// `phi(g)` over `Z`, concatenating the local blocks at the critical primes.
pub fn phi_global(g: &FactoredPoly, ctx: &GlobalContext) -> Result<PhiVector> {
    if let Err(why) = ctx.membership(g)? {
        return Err(Error::Domain(why));
    }
    let mut t = BTreeMap::new();
    for local in &ctx.locals {
        t.insert(local.prime, local_block(g, local)?);
    }
    Ok(PhiVector {
        h: h_block(g, &ctx.factors),
        t,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub index: usize,
    pub a: FactoredPoly,
    pub b: FactoredPoly,
    pub phi_a: PhiVector,
    pub phi_b: PhiVector,
    pub phi_divides: bool,
    pub monoid_divides: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomReport {
    pub scope: String,
    pub samples: usize,
    pub equivalences: usize,
    /// Pairs with `phi(a) <= phi(b)`.
    pub phi_divides: usize,
    /// Pairs with `a | b` in the monoid.
    pub monoid_divides: usize,
    pub additivity_failures: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl HomReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty() && self.additivity_failures == 0 && self.equivalences == self.samples
    }
}

/// Pairs drawn from a seeded pool: even indices are independent draws, odd
/// indices are `(a, a * c)` so that divisible pairs are well represented.
fn pairs(pool: &[FactoredPoly], samples: usize, seed: u64) -> Vec<(FactoredPoly, FactoredPoly)> {
    if pool.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..samples)
        .map(|i| {
            let a = pool[rng.gen_range(0..pool.len())].clone();
            let b = pool[rng.gen_range(0..pool.len())].clone();
            if i % 2 == 0 {
                (a, b)
            } else {
                let ab = a.mul(&b);
                (a, ab)
            }
        })
        .collect()
}

fn pool_size(samples: usize) -> usize {
    (samples / 4).clamp(8, 60)
}

fn run_pairs(
    scope: String,
    pairs: Vec<(FactoredPoly, FactoredPoly)>,
    phi: impl Fn(&FactoredPoly) -> Result<PhiVector>,
    divides: impl Fn(&FactoredPoly, &FactoredPoly) -> bool,
) -> Result<HomReport> {
    let mut report = HomReport {
        scope,
        samples: pairs.len(),
        equivalences: 0,
        phi_divides: 0,
        monoid_divides: 0,
        additivity_failures: 0,
        counterexamples: Vec::new(),
    };
    for (index, (a, b)) in pairs.into_iter().enumerate() {
        let (phi_a, phi_b) = (phi(&a)?, phi(&b)?);
        if phi(&a.mul(&b))? != phi_a.add(&phi_b)? {
            report.additivity_failures += 1;
        }
        let by_phi = divides_in_m(&phi_a, &phi_b)?;
        let by_monoid = divides(&a, &b);
        report.phi_divides += usize::from(by_phi);
        report.monoid_divides += usize::from(by_monoid);
        if by_phi == by_monoid {
            report.equivalences += 1;
        } else {
            report.counterexamples.push(Counterexample {
                index,
                a,
                b,
                phi_a,
                phi_b,
                phi_divides: by_phi,
                monoid_divides: by_monoid,
            });
        }
    }
    Ok(report)
}

/// Compares `phi`-divisibility with divisibility in `[[f]]` on sampled pairs.
pub fn verify_divisor_hom(ctx: &MonoidContext, samples: usize, seed: u64) -> Result<HomReport> {
    let pool = if samples == 0 {
        Vec::new()
    } else {
        ctx.sample_monoid(pool_size(samples), 3, seed)?
    };
    run_pairs(
        format!("p = {}", ctx.prime),
        pairs(&pool, samples, seed),
        |g| phi_local(g, ctx),
        |a, b| ctx.divides_in_monoid(a, b).is_some(),
    )
}

pub fn verify_divisor_hom_global(ctx: &GlobalContext, samples: usize, seed: u64) -> Result<HomReport> {
    let pool = if samples == 0 {
        Vec::new()
    } else {
        ctx.sample_monoid(pool_size(samples), 3, seed)?
    };
    run_pairs(
        "global".into(),
        pairs(&pool, samples, seed),
        |g| phi_global(g, ctx),
        |a, b| ctx.divides_in_monoid(a, b).is_some(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::factor::factor_over_q;
    use proptest::prelude::*;

    fn fp(c: &[i64]) -> FactoredPoly {
        factor_over_q(&Poly::from_ints(c)).unwrap()
    }

    fn fq(c: &[Rational]) -> FactoredPoly {
        factor_over_q(&Poly::new(c.to_vec())).unwrap()
    }

    const XX1: [i64; 3] = [0, -1, 1];

    fn ctx2() -> MonoidContext {
        MonoidContext::new(fp(&XX1), SetSpec::Integers, 2).unwrap()
    }

    fn pv(h: &[u64], p: u64, t: &[u64]) -> PhiVector {
        PhiVector {
            h: h.to_vec(),
            t: BTreeMap::from([(p, t.to_vec())]),
        }
    }

    /// Rewrites a phi vector from the (x, x-1) factor order and the (3-like,
    /// 2) point order used when describing these examples.
    fn in_ctx(ctx: &MonoidContext, x_part: [u64; 2], t_even: u64, t_odd: u64) -> PhiVector {
        let h = ctx
            .factors
            .iter()
            .map(|h| if *h == Poly::x() { x_part[0] } else { x_part[1] })
            .collect();
        let t = ctx
            .points()
            .iter()
            .map(|s| if s.to_integer().is_even() { t_even } else { t_odd })
            .collect();
        PhiVector {
            h,
            t: BTreeMap::from([(ctx.prime, t)]),
        }
    }

    #[test]
    fn phi_examples() {
        let c = ctx2();
        assert_eq!(c.points().len(), 2);
        let g = fp(&XX1).scale(&rat(1, 2));
        assert_eq!(phi_local(&g, &c).unwrap(), in_ctx(&c, [1, 1], 0, 0));
        let two = FactoredPoly::constant(int(2));
        assert_eq!(phi_local(&two, &c).unwrap(), in_ctx(&c, [0, 0], 1, 1));
        let one = phi_local(&FactoredPoly::one(), &c).unwrap();
        assert_eq!(one, one.zero_like());
        let quarter = fp(&XX1).scale(&rat(1, 4));
        assert!(matches!(phi_local(&quarter, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn phi_is_additive() {
        let c = ctx2();
        for a in c.sample_monoid(6, 2, 3).unwrap() {
            for b in c.sample_monoid(6, 2, 4).unwrap() {
                let lhs = phi_local(&a.mul(&b), &c).unwrap();
                let rhs = phi_local(&a, &c).unwrap().add(&phi_local(&b, &c).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn divides_and_gcd_examples() {
        assert!(!divides_in_m(&pv(&[1, 0], 2, &[1, 0]), &pv(&[1, 1], 2, &[0, 0])).unwrap());
        let u = pv(&[2, 1], 2, &[0, 3]);
        assert!(divides_in_m(&u.zero_like(), &u).unwrap());
        assert!(divides_in_m(&u, &u).unwrap());
        assert!(matches!(divides_in_m(&u, &pv(&[1], 2, &[0, 3])), Err(Error::Input(_))));

        let g = gcd_in_m(&[pv(&[1, 1], 2, &[0, 0]), pv(&[1, 0], 2, &[1, 0])]).unwrap();
        assert_eq!(g, pv(&[1, 0], 2, &[0, 0]));
        assert_eq!(gcd_in_m(std::slice::from_ref(&u)).unwrap(), u);
        let g = gcd_in_m(&[pv(&[0, 0], 2, &[1, 1]), pv(&[1, 0], 2, &[1, 0])]).unwrap();
        assert_eq!(g, pv(&[0, 0], 2, &[1, 0]));
        assert!(gcd_in_m(&[]).is_err());
    }

    #[test]
    fn witness_examples() {
        let c = ctx2();
        let w = build_witnesses(&c, DEFAULT_WITNESS_BOUND).unwrap();
        assert!(w.all_realized());
        assert_eq!(w.gcd_identities.len(), 4);
        for sep in &w.separators {
            // The odd point is separated by x, the even one by x - 1.
            let expected = if sep.point.to_integer().is_even() { fp(&[-1, 1]) } else { fp(&[0, 1]) };
            assert_eq!(sep.witness, expected);
        }
        let even = c.points().iter().find(|s| s.to_integer().is_even()).unwrap();
        let mixed = w
            .mixed
            .iter()
            .find(|m| m.point == *even && m.factor == Poly::x())
            .unwrap();
        assert_eq!(mixed.witness, fp(&XX1).scale(&rat(1, 2)));
        let ex = w.gcd_identities.iter().find(|i| i.basis == "e_{x}").unwrap();
        assert_eq!(ex.gcd, in_ctx(&c, [1, 0], 0, 0));
    }

    #[test]
    fn witness_identity_for_single_point() {
        let c = MonoidContext::new(fp(&[0, 2]), SetSpec::Integers, 2).unwrap();
        assert_eq!(c.points().len(), 1);
        let w = build_witnesses(&c, DEFAULT_WITNESS_BOUND).unwrap();
        assert!(w.all_realized());
        assert_eq!(w.separators[0].witness, FactoredPoly::one());
    }

    #[test]
    fn theory_reports() {
        let r = verify_divisor_theory(&ctx2(), DEFAULT_WITNESS_BOUND).unwrap();
        assert!(r.holds());
        assert_eq!(r.basis_vectors, 4);
        let c3 = MonoidContext::new(fp(&XX1), SetSpec::Integers, 3).unwrap();
        let r = verify_divisor_theory(&c3, DEFAULT_WITNESS_BOUND).unwrap();
        assert!(r.image_primitive && r.holds());
        assert_eq!(r.basis_vectors, 2);
        let cp = MonoidContext::new(FactoredPoly::constant(int(2)), SetSpec::Integers, 2).unwrap();
        let r = verify_divisor_theory(&cp, DEFAULT_WITNESS_BOUND).unwrap();
        assert!(r.holds());
        assert_eq!(r.basis_vectors, 1);
    }

    #[test]
    fn critical_prime_examples() {
        let half = fq(&[int(0), rat(1, 2), rat(1, 2)]);
        assert_eq!(critical_primes(&half, &SetSpec::Integers).unwrap(), vec![2]);
        assert_eq!(critical_primes(&fp(&[0, 2, -3, 1]), &SetSpec::Integers).unwrap(), vec![2, 3]);
        assert!(critical_primes(&fp(&[0, 1]), &SetSpec::Integers).unwrap().is_empty());
        let roots = SetSpec::finite(vec![int(0), int(1)]).unwrap();
        assert!(matches!(critical_primes(&fp(&XX1), &roots), Err(Error::Unsupported(_))));
    }

    #[test]
    fn global_examples() {
        let half = fq(&[int(0), rat(1, 2), rat(1, 2)]);
        let g = GlobalContext::new(half.clone(), SetSpec::Integers).unwrap();
        assert_eq!(g.primes, vec![2]);
        let pts: Vec<Rational> = g.locals[0].points().to_vec();
        assert_eq!(pts, vec![int(1), int(2)]);
        assert_eq!(phi_global(&half, &g).unwrap(), pv(&[1, 1], 2, &[0, 0]));
        let one = phi_global(&FactoredPoly::one(), &g).unwrap();
        assert_eq!(one, one.zero_like());
        // x lies in the family at 2 but not in the monoid.
        let x = fp(&[0, 1]);
        let phi_x = phi_local(&x, &g.locals[0]).unwrap();
        assert_eq!(phi_x, pv(&[1, 0], 2, &[0, 1]));
        assert!(!divides_in_m(&phi_x, &phi_global(&half, &g).unwrap()).unwrap());
        assert!(matches!(phi_global(&x, &g), Err(Error::Domain(_))));
        // structural primes: 3x(x+1)/2 fails at 3
        assert!(g.membership(&half.scale(&int(3))).unwrap().is_err());
    }

    #[test]
    fn global_projection_matches_local() {
        let f = fp(&[0, 2, -3, 1]);
        let g = GlobalContext::new(f, SetSpec::Integers).unwrap();
        for a in g.sample_monoid(10, 2, 5).unwrap() {
            let phi = phi_global(&a, &g).unwrap();
            for local in &g.locals {
                let l = phi_local(&a, local).unwrap();
                assert_eq!(l.h, phi.h);
                assert_eq!(l.t[&local.prime], phi.t[&local.prime]);
            }
        }
    }

    #[test]
    fn verification_reports() {
        let r = verify_divisor_hom(&ctx2(), 200, 7).unwrap();
        assert_eq!(r.samples, 200);
        assert!(r.holds(), "{:?}", r.counterexamples);
        let r = verify_divisor_hom(&ctx2(), 0, 7).unwrap();
        assert_eq!(r.samples, 0);
        assert!(r.holds());
        let half = fq(&[int(0), rat(1, 2), rat(1, 2)]);
        let g = GlobalContext::new(half, SetSpec::Integers).unwrap();
        let r = verify_divisor_hom_global(&g, 100, 7).unwrap();
        assert!(r.holds(), "{:?}", r.counterexamples);
    }

    #[test]
    fn global_fixed_divisors() {
        assert_eq!(fixed_divisor_global(&fp(&[0, 2, -3, 1]), &SetSpec::Integers).unwrap(), int(6));
        let half = fq(&[int(0), rat(1, 2), rat(1, 2)]);
        assert_eq!(fixed_divisor_global(&half, &SetSpec::Integers).unwrap(), int(1));
        assert_eq!(fixed_divisor_global(&half.scale(&rat(1, 3)), &SetSpec::Integers).unwrap(), rat(1, 3));
        let odd = SetSpec::residues(2, vec![1]).unwrap();
        assert_eq!(fixed_divisor_global(&fp(&[-1, 0, 1]), &odd).unwrap(), int(8));
    }

    #[test]
    fn serialization_shape() {
        let v = pv(&[1, 0], 2, &[0, 1]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"h":[1,0],"t":{"2":[0,1]}}"#);
        let back: PhiVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gcd_laws(
            a in prop::collection::vec(0u64..5, 4),
            b in prop::collection::vec(0u64..5, 4),
            c in prop::collection::vec(0u64..5, 4),
        ) {
            let mk = |v: &Vec<u64>| pv(&v[..2], 3, &v[2..]);
            let (a, b, c) = (mk(&a), mk(&b), mk(&c));
            prop_assert_eq!(gcd_in_m(&[a.clone(), a.clone()]).unwrap(), a.clone());
            prop_assert_eq!(gcd_in_m(&[a.clone(), b.clone()]).unwrap(), gcd_in_m(&[b.clone(), a.clone()]).unwrap());
            let left = gcd_in_m(&[gcd_in_m(&[a.clone(), b.clone()]).unwrap(), c.clone()]).unwrap();
            let right = gcd_in_m(&[a.clone(), gcd_in_m(&[b.clone(), c.clone()]).unwrap()]).unwrap();
            prop_assert_eq!(&left, &right);
            for x in [&a, &b, &c] {
                prop_assert!(divides_in_m(&left, x).unwrap());
            }
        }
    }
}
