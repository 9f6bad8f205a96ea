//! The divisor-closed submonoid of `Int(S, Z_(p))` generated by one
//! polynomial `f`: fixed divisors, membership with certificates,
//! divisibility and a seeded element sampler.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::arith::{self, p_power, vp_rat, Rational, ValInt};
use crate::density::{self, DenseOptions, DenseSet};
use crate::error::{input, Error, Result};
use crate::factor::{primitive_scaling, scaling_exponent, FactoredPoly};
use crate::oracle;
use crate::poly::Poly;
use crate::set_model::SetSpec;

/// Everything needed to answer questions about `[[f]]` at one prime.
#[derive(Clone, Debug, Serialize)]
pub struct MonoidContext {
    pub f: FactoredPoly,
    pub set: SetSpec,
    pub prime: u64,
    /// Monic irreducible factors of `f` in factor order.
    pub factors: Vec<Poly>,
    /// Minimal dense subset of `S` relative to the factors.
    pub dense: DenseSet,
    /// `v_p(d_S(f))`.
    pub fixed_divisor_val: ValInt,
    /// `false` when `T` had to take a root of `f` (an isolated root of `S`).
    pub root_free: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    ImagePrimitive,
    ArchimedeanBound,
}

/// `v_p` of `g`, the cofactor and `f^m` at one point of `T`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditRow {
    #[serde(with = "arith::rational_str")]
    pub point: Rational,
    pub g: ValInt,
    pub cofactor: ValInt,
    pub f_power: ValInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipCertificate {
    pub m: u32,
    pub cofactor: FactoredPoly,
    pub kind: CertificateKind,
    pub audit: Vec<AuditRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RefusalReason {
    #[serde(rename = "foreign factor")]
    ForeignFactor,
    #[serde(rename = "not integer-valued")]
    NotIntegerValued,
    /// `f` is image-primitive and in `Z_(p)[x]`, and `g` is not a unit
    /// multiple of a product of primitive factors.
    #[serde(rename = "non-primitive")]
    NonPrimitive,
    /// `f` is image-primitive but not in `Z_(p)[x]`, and no power of `f` has
    /// an integer-valued cofactor.
    #[serde(rename = "no integer-valued cofactor")]
    NoCofactor,
}

impl RefusalReason {
    pub fn describe(self) -> &'static str {
        match self {
            RefusalReason::ForeignFactor => "foreign factor",
            RefusalReason::NotIntegerValued => "not integer-valued",
            RefusalReason::NonPrimitive => "non-primitive",
            RefusalReason::NoCofactor => "no integer-valued cofactor",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Membership {
    Member(MembershipCertificate),
    Refused { reason: RefusalReason, detail: String },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }

    pub fn certificate(&self) -> Option<&MembershipCertificate> {
        match self {
            Membership::Member(c) => Some(c),
            Membership::Refused { .. } => None,
        }
    }

    pub fn reason(&self) -> Option<RefusalReason> {
        match self {
            Membership::Refused { reason, .. } => Some(*reason),
            Membership::Member(_) => None,
        }
    }
}

impl MonoidContext {
    pub fn new(f: FactoredPoly, set: SetSpec, p: u64) -> Result<MonoidContext> {
        MonoidContext::with_options(f, set, p, &DenseOptions::default())
    }

    pub fn with_options(
        f: FactoredPoly,
        set: SetSpec,
        p: u64,
        opts: &DenseOptions,
    ) -> Result<MonoidContext> {
        set.check_prime(p)?;
        if f.content().is_zero() {
            return input("f is zero");
        }
        let factors = f.factor_polys();
        let full = density::dense_set_with(&set, &factors, p, opts)?;
        let dense = density::minimize_dense_set_with(&full.points, &set, &factors, p, opts)?;
        let root_free = !dense.points.iter().any(|t| density::is_root(t, &factors));
        let fixed_divisor_val = min_over(&dense.points, &f, p);
        if fixed_divisor_val < ValInt::ZERO {
            return Err(Error::Precondition(format!(
                "f is not integer-valued on S at {p}: v_p(d_S(f)) = {fixed_divisor_val}"
            )));
        }
        Ok(MonoidContext {
            f,
            set,
            prime: p,
            factors,
            dense,
            fixed_divisor_val,
            root_free,
        })
    }

    pub fn points(&self) -> &[Rational] {
        &self.dense.points
    }

    /// `d_S(f) = Z_(p)`.
    pub fn f_image_primitive(&self) -> bool {
        self.fixed_divisor_val == ValInt::ZERO
    }

    /// `f` has `p`-integral coefficients.
    pub fn f_in_vx(&self) -> bool {
        self.f.expand().min_coeff_valuation(self.prime) >= ValInt::ZERO
    }

    pub fn supports(&self, g: &FactoredPoly) -> bool {
        g.supported_by(&self.factors)
    }

    /// `v_p(d_S(g))`. Polynomials with factors outside `H` get a dense set of
    /// their own.
    pub fn image_min(&self, g: &FactoredPoly) -> Result<ValInt> {
        if self.supports(g) {
            return Ok(min_over(self.points(), g, self.prime));
        }
        let mut fs = self.factors.clone();
        for h in g.factor_polys() {
            if !fs.contains(&h) {
                fs.push(h);
            }
        }
        let t = density::dense_set(&self.set, &fs, self.prime)?;
        Ok(min_over(&t.points, g, self.prime))
    }

    pub fn int_valued(&self, g: &FactoredPoly) -> Result<bool> {
        Ok(self.image_min(g)? >= ValInt::ZERO)
    }

    pub fn is_image_primitive(&self, g: &FactoredPoly) -> Result<bool> {
        Ok(self.image_min(g)? == ValInt::ZERO)
    }

    /// `g` is a unit of `Z_(p)` times a product of the primitive scalings of
    /// factors of `f`.
    pub fn is_primitive_product(&self, g: &FactoredPoly) -> bool {
        self.supports(g) && vp_rat(&g.scaled_content(self.prime), self.prime) == ValInt::ZERO
    }

    /// Decides `g in [[f]]`. Members come with the smallest `m` such that
    /// `f^m / g` is an integer-valued polynomial.
    pub fn in_monoid(&self, g: &FactoredPoly) -> Result<Membership> {
        if let Some((h, _)) = g.factors().iter().find(|(h, _)| !self.factors.contains(h)) {
            return Ok(refuse(RefusalReason::ForeignFactor, format!("{h} does not divide f")));
        }
        let d_g = self.image_min(g)?;
        if d_g < ValInt::ZERO {
            return Ok(refuse(
                RefusalReason::NotIntegerValued,
                format!("v_p(d_S(g)) = {d_g}"),
            ));
        }
        let p = self.prime;
        let m_min = g
            .factors()
            .iter()
            .map(|(h, e)| e.div_ceil(self.f.multiplicity(h)))
            .max()
            .unwrap_or(0)
            .max(1);
        // v_p(f^m/g)(t) = m v_p(f(t)) - v_p(g(t)) never decreases in m, so
        // one step past the largest per-point requirement is conclusive.
        let mut m_top = m_min;
        for t in self.points() {
            if let (Some(vf), Some(vg)) = (self.f.vp_at(t, p).finite(), g.vp_at(t, p).finite()) {
                if vf > 0 && vg > 0 {
                    m_top = m_top.max(((vg + vf - 1) / vf) as u32);
                }
            }
        }
        m_top += 1;
        for m in m_min..=m_top {
            let fm = self.f.pow(m);
            let cofactor = fm.div_exact(g).expect("exponents checked");
            if min_over(self.points(), &cofactor, p) >= ValInt::ZERO {
                return self.certify(g, m, cofactor).map(Membership::Member);
            }
        }
        if !self.f_image_primitive() {
            return Err(Error::Certification(format!(
                "f has positive fixed divisor but no cofactor of f^m/g with m <= {m_top} is integer-valued"
            )));
        }
        Ok(if self.f_in_vx() {
            refuse(
                RefusalReason::NonPrimitive,
                format!(
                    "content of g after primitive scaling has valuation {}",
                    vp_rat(&g.scaled_content(p), p)
                ),
            )
        } else {
            refuse(
                RefusalReason::NoCofactor,
                format!("no f^m/g with m <= {m_top} is integer-valued"),
            )
        })
    }

    fn certify(&self, g: &FactoredPoly, m: u32, cofactor: FactoredPoly) -> Result<MembershipCertificate> {
        let fm = self.f.pow(m);
        if g.mul(&cofactor) != fm {
            return Err(Error::Certification(format!("g * cofactor differs from f^{m}")));
        }
        let p = self.prime;
        let audit: Vec<AuditRow> = self
            .points()
            .iter()
            .map(|t| AuditRow {
                point: t.clone(),
                g: g.vp_at(t, p),
                cofactor: cofactor.vp_at(t, p),
                f_power: fm.vp_at(t, p),
            })
            .collect();
        if audit.iter().any(|r| r.g < ValInt::ZERO || r.cofactor < ValInt::ZERO) {
            return Err(Error::Certification("negative valuation in the audit table".into()));
        }
        let kind = if self.f_image_primitive() {
            CertificateKind::ImagePrimitive
        } else {
            CertificateKind::ArchimedeanBound
        };
        Ok(MembershipCertificate {
            m,
            cofactor,
            kind,
            audit,
        })
    }

    /// `b / a` when `a | b` in `Q[x]` and the quotient is integer-valued on
    /// `S`. Integer-valuedness is decided from values, not from `T`.
    pub fn divides_in_monoid(&self, a: &FactoredPoly, b: &FactoredPoly) -> Option<FactoredPoly> {
        let c = b.div_exact(a)?;
        oracle::int_valued_by_values(&c.expand(), &self.set, Some(self.prime)).then_some(c)
    }

    /// `a * g`, provided `-v_p(d_S(g)) <= v_p(a) <= 0`.
    pub fn scale_into_monoid(&self, g: &FactoredPoly, a: &Rational) -> Result<FactoredPoly> {
        if a.is_zero() {
            return input("scaling by zero");
        }
        let d = self.image_min(g)?;
        let va = vp_rat(a, self.prime).finite().expect("nonzero");
        let lower = d.finite().map(|x| -x);
        if va > 0 || lower.is_some_and(|lo| va < lo) {
            return Err(Error::Precondition(format!(
                "v_p(a) = {va} outside [{}, 0]",
                lower.map_or("-inf".to_string(), |x| x.to_string())
            )));
        }
        let out = g.scale(a);
        match self.in_monoid(&out)? {
            Membership::Member(_) => Ok(out),
            Membership::Refused { reason, detail } => Err(Error::Precondition(format!(
                "scaled polynomial is not in the monoid ({}: {detail})",
                reason.describe()
            ))),
        }
    }

    /// The allowed range of `j` such that `p^j * prod sigma_h^{e_h}` lies in
    /// `[[f]]` with `f^m` as witness power, if any.
    pub fn exponent_range(&self, e: &[u32], m: u32) -> Option<(i64, i64)> {
        let g0 = self.sigma_product(e);
        let cof = self.f.pow(m).div_exact(&g0)?;
        let lo = -min_over(self.points(), &g0, self.prime).finite()?;
        let hi = min_over(self.points(), &cof, self.prime).finite()?;
        (lo <= hi).then_some((lo, hi))
    }

    /// `prod sigma_h^{e_h}` over the factors of `f`.
    pub fn sigma_product(&self, e: &[u32]) -> FactoredPoly {
        let p = self.prime;
        let mut c = Rational::one();
        let mut parts = Vec::new();
        for (h, &k) in self.factors.iter().zip(e) {
            c *= p_power(p, scaling_exponent(h, p) * k as i64);
            parts.push((h.clone(), k));
        }
        FactoredPoly::from_parts(c, parts)
    }

    /// Up to `count` distinct certified elements, deterministic in `seed`.
    pub fn sample_monoid(&self, count: usize, m_max: u32, seed: u64) -> Result<Vec<FactoredPoly>> {
        if m_max == 0 {
            return Err(Error::Precondition("m_max must be at least 1".into()));
        }
        let p = self.prime;
        let q = Rational::from_integer(if p == 2 { 3.into() } else { 2.into() });
        let units = [Rational::one(), -Rational::one(), q.clone(), q.recip()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = FxHashSet::default();
        let mut out = Vec::new();
        let mut attempts = 0usize;
        while out.len() < count && attempts < 50 * count + 200 {
            attempts += 1;
            let m = rng.gen_range(1..=m_max);
            let e: Vec<u32> = self
                .f
                .factors()
                .iter()
                .map(|(_, k)| rng.gen_range(0..=m * k))
                .collect();
            let Some((lo, hi)) = self.exponent_range(&e, m) else {
                continue;
            };
            let j = rng.gen_range(lo..=hi);
            let unit = units.choose(&mut rng).expect("nonempty");
            let g = self.sigma_product(&e).scale(&(p_power(p, j) * unit));
            if !seen.insert(g.clone()) {
                continue;
            }
            if !self.in_monoid(&g)?.is_member() {
                return Err(Error::Certification(format!("sampled element {g} was refused")));
            }
            out.push(g);
        }
        Ok(out)
    }
}

fn refuse(reason: RefusalReason, detail: String) -> Membership {
    Membership::Refused { reason, detail }
}

/// `min_t v_p(g(t))`; `+inf` for an empty point list.
pub(crate) fn min_over(points: &[Rational], g: &FactoredPoly, p: u64) -> ValInt {
    points
        .iter()
        .map(|t| g.vp_at(t, p))
        .min()
        .unwrap_or(ValInt::Infinite)
}

/// `sigma_h` of every factor of `f` as a factored polynomial.
pub fn factor_witness(h: &Poly, p: u64) -> FactoredPoly {
    let sigma = primitive_scaling(h, p);
    FactoredPoly::from_parts(sigma.leading_coeff(), vec![(h.clone(), 1)])
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

    fn ctx(f: &[i64], p: u64) -> MonoidContext {
        MonoidContext::new(fp(f), SetSpec::Integers, p).unwrap()
    }

    // x(x - 1)
    const XX1: [i64; 3] = [0, -1, 1];

    #[test]
    fn int_valued_examples() {
        let c = ctx(&XX1, 2);
        assert!(c.int_valued(&fp(&XX1).scale(&rat(1, 2))).unwrap());
        assert!(!c.int_valued(&fp(&XX1).scale(&rat(1, 4))).unwrap());
        let c9 = MonoidContext::new(fp(&[0, 1]), SetSpec::residues(9, vec![0]).unwrap(), 3).unwrap();
        assert!(c9.int_valued(&fq(&[int(0), rat(1, 3)])).unwrap());
    }

    #[test]
    fn image_min_examples() {
        let c = ctx(&XX1, 2);
        assert_eq!(c.image_min(&fp(&XX1)).unwrap(), ValInt::Finite(1));
        assert_eq!(c.image_min(&fp(&[0, 1])).unwrap(), ValInt::ZERO);
        // x(x-1)(x-2) = x^3 - 3x^2 + 2x
        let c3 = ctx(&[0, 2, -3, 1], 3);
        assert_eq!(c3.image_min(&fp(&[0, 2, -3, 1])).unwrap(), ValInt::Finite(1));
        // a factor outside H gets its own dense set
        assert_eq!(c.image_min(&fp(&[0, 0, 1, 1])).unwrap(), ValInt::Finite(1));
    }

    #[test]
    fn image_min_matches_value_gcd() {
        let c = ctx(&[0, 2, -3, 1], 3);
        let g = fp(&[0, 2, -3, 1]);
        let direct = (0..81)
            .map(|s| vp_rat(&g.eval(&int(s)), 3))
            .min()
            .unwrap();
        assert_eq!(c.image_min(&g).unwrap(), direct);
    }

    #[test]
    fn image_primitive_examples() {
        let half = fq(&[int(0), rat(1, 2), rat(1, 2)]);
        let c = MonoidContext::new(half.clone(), SetSpec::Integers, 2).unwrap();
        assert!(c.is_image_primitive(&half).unwrap());
        assert!(!ctx(&XX1, 2).is_image_primitive(&fp(&XX1)).unwrap());
        assert!(c.is_image_primitive(&FactoredPoly::one()).unwrap());
    }

    #[test]
    fn membership_examples() {
        let c = ctx(&XX1, 2);
        let g = fp(&XX1).scale(&rat(1, 2));
        let cert = c.in_monoid(&g).unwrap();
        let cert = cert.certificate().unwrap();
        // The smallest admissible power is 1 with cofactor 2.
        assert_eq!(cert.m, 1);
        assert_eq!(cert.cofactor, FactoredPoly::constant(int(2)));
        assert_eq!(cert.kind, CertificateKind::ArchimedeanBound);
        // m = 2 with cofactor 2x(x-1) is also a valid witness
        let cof2 = fp(&XX1).scale(&int(2));
        assert_eq!(g.mul(&cof2), fp(&XX1).pow(2));
        assert!(c.int_valued(&cof2).unwrap());

        let quarter = fp(&XX1).scale(&rat(1, 4));
        assert_eq!(c.in_monoid(&quarter).unwrap().reason(), Some(RefusalReason::NotIntegerValued));

        let c3 = ctx(&XX1, 3);
        assert!(c3.f_image_primitive());
        assert_eq!(
            c3.in_monoid(&fp(&[0, 3])).unwrap().reason(),
            Some(RefusalReason::NonPrimitive)
        );
        assert_eq!(
            c3.in_monoid(&fp(&[1, 1])).unwrap().reason(),
            Some(RefusalReason::ForeignFactor)
        );
        let member = c3.in_monoid(&fp(&[0, 1])).unwrap();
        assert_eq!(member.certificate().unwrap().kind, CertificateKind::ImagePrimitive);
    }

    #[test]
    fn no_cofactor_when_f_has_denominators() {
        // f = x(x+1)/2 at 2 is image-primitive but not in Z_(2)[x]; x is not
        // in the monoid since v_2(f(2)) = 0 < v_2(2).
        let f = fq(&[int(0), rat(1, 2), rat(1, 2)]);
        let c = MonoidContext::new(f.clone(), SetSpec::Integers, 2).unwrap();
        assert_eq!(c.in_monoid(&fp(&[0, 1])).unwrap().reason(), Some(RefusalReason::NoCofactor));
        assert!(c.in_monoid(&f).unwrap().is_member());
    }

    #[test]
    fn divisibility_examples() {
        let c = ctx(&XX1, 2);
        let a = fp(&XX1).scale(&rat(1, 2));
        let b = fp(&XX1).pow(2).scale(&rat(1, 2));
        assert_eq!(c.divides_in_monoid(&a, &b), Some(fp(&XX1)));
        let x = fp(&[0, 1]);
        assert_eq!(c.divides_in_monoid(&x, &a), None);
        assert_eq!(c.divides_in_monoid(&a, &a), Some(FactoredPoly::one()));
    }

    #[test]
    fn scaling_examples() {
        let c = ctx(&XX1, 2);
        let g = fp(&XX1);
        assert_eq!(c.scale_into_monoid(&g, &rat(1, 2)).unwrap(), g.scale(&rat(1, 2)));
        assert!(matches!(
            c.scale_into_monoid(&g, &rat(1, 4)),
            Err(Error::Precondition(_))
        ));
        assert_eq!(c.scale_into_monoid(&g, &int(1)).unwrap(), g);
    }

    #[test]
    fn sampling_examples() {
        let c = ctx(&XX1, 2);
        let s = c.sample_monoid(5, 2, 1).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s, c.sample_monoid(5, 2, 1).unwrap());
        assert!(c.sample_monoid(0, 2, 1).unwrap().is_empty());

        let cp = MonoidContext::new(FactoredPoly::constant(int(2)), SetSpec::Integers, 2).unwrap();
        for g in cp.sample_monoid(10, 3, 4).unwrap() {
            assert!(g.is_constant());
            let v = vp_rat(g.content(), 2).finite().unwrap();
            assert!((0..=3).contains(&v));
        }
    }

    #[test]
    fn fixed_divisor_must_be_nonnegative() {
        let f = fp(&XX1).scale(&rat(1, 4));
        assert!(matches!(
            MonoidContext::new(f, SetSpec::Integers, 2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn image_primitive_powers_stay_primitive() {
        let f = fq(&[int(0), rat(1, 2), rat(1, 2)]);
        let c = MonoidContext::new(f.clone(), SetSpec::Integers, 2).unwrap();
        for n in 1..=5 {
            assert!(c.is_image_primitive(&f.pow(n)).unwrap());
        }
        for g in c.sample_monoid(20, 3, 9).unwrap() {
            if let Some(cert) = c.in_monoid(&g).unwrap().certificate() {
                assert!(g.divides(&f.pow(cert.m)));
            }
            assert!(c.is_image_primitive(&g).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Products of members are members; certified cofactors are members.
        #[test]
        fn closed_under_products_and_divisors(seed in 0u64..1000, p in prop::sample::select(vec![2u64, 3])) {
            let c = ctx(&XX1, p);
            let s = c.sample_monoid(4, 2, seed).unwrap();
            for a in &s {
                for b in &s {
                    let ab = a.mul(b);
                    prop_assert!(c.in_monoid(&ab).unwrap().is_member());
                    if let Some(q) = c.divides_in_monoid(a, &ab) {
                        prop_assert!(c.in_monoid(&q).unwrap().is_member());
                    }
                }
                let cert = c.in_monoid(a).unwrap();
                let cof = &cert.certificate().unwrap().cofactor;
                prop_assert!(c.in_monoid(cof).unwrap().is_member());
            }
        }

        /// `d_S(g) d_S(h)` contains `d_S(gh)`.
        #[test]
        fn fixed_divisor_superadditive(seed in 0u64..1000) {
            let c = ctx(&[0, 2, -3, 1], 2);
            let s = c.sample_monoid(4, 2, seed).unwrap();
            for a in &s {
                for b in &s {
                    let ab = c.image_min(&a.mul(b)).unwrap();
                    let sum = c.image_min(a).unwrap() + c.image_min(b).unwrap();
                    prop_assert!(ab >= sum);
                }
            }
        }
    }
}
