//! Valuation vectors, finite dense subsets, relative closure and density.
//!
//! The covering routine walks p-adic balls breadth first. For a ball
//! `c + p^n Z_p` and each factor it rescales `sigma_h(c + p^n y)`, strips the
//! Gauss valuation `mu_h` and reduces mod `p`. Every value of `sigma_h` on the
//! ball has valuation at least `mu_h`, with equality exactly where the
//! reduction does not vanish. A child residue where no reduction vanishes is
//! therefore a place where all factors attain their ball minimum at once, and
//! one representative from it covers the whole ball.

use std::fmt;

use log::debug;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, p_power, pow_int, vp_rat, Rational, ValInt};
use crate::error::{input, Error, Result};
use crate::factor::{primitive_scaling, FactoredPoly};
use crate::feasibility::{find_point, Constraint, Relation};
use crate::oracle;
use crate::poly::Poly;
use crate::set_model::{self, Ball, SetSpec};

pub const DEFAULT_DEPTH_BOUND: u32 = 64;

/// `(v_p(sigma_h(s)))_h` for an ordered factor list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValVector(pub Vec<ValInt>);

impl ValVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Componentwise `self <= other`.
    pub fn is_below(&self, other: &ValVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `sum m_h v_h` with `0 * inf = 0`.
    pub fn pairing(&self, m: &[u64]) -> ValInt {
        self.0
            .iter()
            .zip(m)
            .fold(ValInt::ZERO, |acc, (v, &k)| acc + v.scale(k))
    }

    pub fn has_infinite(&self) -> bool {
        self.0.iter().any(|v| v.is_infinite())
    }
}

impl fmt::Display for ValVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Minimal elements of a set of vectors under the componentwise order,
/// sorted and without repetitions.
pub fn minimal_elements(vectors: &[ValVector]) -> Vec<ValVector> {
    let mut vs: Vec<ValVector> = vectors.to_vec();
    vs.sort();
    vs.dedup();
    let mins: Vec<ValVector> = vs
        .iter()
        .filter(|v| !vs.iter().any(|w| w != *v && w.is_below(v)))
        .cloned()
        .collect();
    mins
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every factor is linear.
    Exact,
    Tracked { depth_bound: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DenseOptions {
    pub depth_bound: u32,
}

impl Default for DenseOptions {
    fn default() -> Self {
        DenseOptions {
            depth_bound: DEFAULT_DEPTH_BOUND,
        }
    }
}

/// One resolved ball of the cover and the point chosen for it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverEntry {
    pub ball: Ball,
    #[serde(with = "arith::rational_str")]
    pub point: Rational,
    /// `true` when the ball met `S` in this single point.
    pub isolated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DenseSet {
    #[serde(with = "arith::rational_vec")]
    pub points: Vec<Rational>,
    pub vectors: Vec<ValVector>,
    pub prime: u64,
    pub factors: Vec<Poly>,
    pub mode: Mode,
    pub cover: Vec<CoverEntry>,
    pub notices: Vec<String>,
}

impl DenseSet {
    /// Wraps an explicit point list, computing its vectors.
    pub fn from_points(points: &[Rational], factors: &[Poly], p: u64, mode: Mode) -> DenseSet {
        let mut points = points.to_vec();
        points.sort();
        let sigmas = scalings(factors, p);
        let vectors = points.iter().map(|t| vector_of(&sigmas, t, p)).collect();
        DenseSet {
            points,
            vectors,
            prime: p,
            factors: factors.to_vec(),
            mode,
            cover: Vec::new(),
            notices: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `min_t sum m_h v_p(sigma_h(t))`.
    pub fn min_functional(&self, m: &[u64]) -> ValInt {
        self.vectors
            .iter()
            .map(|v| v.pairing(m))
            .min()
            .unwrap_or(ValInt::Infinite)
    }

    pub fn minimal_vectors(&self) -> Vec<ValVector> {
        minimal_elements(&self.vectors)
    }

    pub fn index_of(&self, t: &Rational) -> Option<usize> {
        self.points.iter().position(|x| x == t)
    }
}

fn scalings(factors: &[Poly], p: u64) -> Vec<Poly> {
    factors.iter().map(|h| primitive_scaling(h, p)).collect()
}

fn vector_of(sigmas: &[Poly], s: &Rational, p: u64) -> ValVector {
    ValVector(sigmas.iter().map(|g| vp_rat(&g.eval(s), p)).collect())
}

pub fn val_vector(s: &Rational, factors: &[Poly], p: u64) -> Result<ValVector> {
    arith::check_prime(p)?;
    if vp_rat(s, p) < ValInt::ZERO {
        return input(format!("{} is not {p}-integral", arith::format_rational(s)));
    }
    Ok(vector_of(&scalings(factors, p), s, p))
}

/// `v_p(f(s))` summed over the roots of a product of linear factors, checked
/// against direct evaluation.
pub fn value_by_roots(f: &FactoredPoly, s: &Rational, p: u64) -> Result<ValInt> {
    arith::check_prime(p)?;
    let vs = vp_rat(s, p);
    let mut total = vp_rat(f.content(), p);
    for (h, e) in f.factors() {
        if h.deg() != 1 {
            return Err(Error::Unsupported(format!("factor {h} has no rational root")));
        }
        let root = -h.coeff(0);
        let va = vp_rat(&root, p);
        // Below the valuation of s the root alone decides the value.
        let w = if va < vs { va } else { vp_rat(&(s - &root), p) };
        total = total + w.scale(*e as u64);
    }
    let direct = vp_rat(&f.expand().eval(s), p);
    if direct != total {
        return Err(Error::Certification(format!(
            "root decomposition gives {total} but direct evaluation gives {direct} at {}",
            arith::format_rational(s)
        )));
    }
    Ok(total)
}

fn check_factor_list(factors: &[Poly]) -> Result<()> {
    for (i, h) in factors.iter().enumerate() {
        if !h.is_monic() || h.is_constant() {
            return input(format!("factor {h} is not monic and non-constant"));
        }
        if factors[..i].contains(h) {
            return input(format!("factor {h} is listed twice"));
        }
    }
    Ok(())
}

fn depth_needed(set: &SetSpec, factors: &[Poly], p: u64) -> u32 {
    let mut anchors: Vec<Rational> = factors
        .iter()
        .filter(|h| h.deg() == 1)
        .map(|h| -h.coeff(0))
        .filter(|a| vp_rat(a, p) >= ValInt::ZERO)
        .collect();
    let mut sep = 0i64;
    match set {
        SetSpec::Finite { elements } => anchors.extend(elements.iter().cloned()),
        SetSpec::Residues { modulus, .. } => {
            sep = vp_rat(&Rational::from_integer(BigInt::from(*modulus)), p)
                .finite()
                .unwrap_or(0);
        }
        SetSpec::Integers => {}
    }
    for (i, a) in anchors.iter().enumerate() {
        for b in &anchors[..i] {
            if let Some(v) = vp_rat(&(a - b), p).finite() {
                sep = sep.max(v);
            }
        }
    }
    sep as u32 + 2
}

pub fn dense_set(set: &SetSpec, factors: &[Poly], p: u64) -> Result<DenseSet> {
    dense_set_with(set, factors, p, &DenseOptions::default())
}

pub fn dense_set_with(
    set: &SetSpec,
    factors: &[Poly],
    p: u64,
    opts: &DenseOptions,
) -> Result<DenseSet> {
    set.check_prime(p)?;
    check_factor_list(factors)?;
    let exact = factors.iter().all(|h| h.deg() == 1);
    let mode = if exact {
        Mode::Exact
    } else {
        Mode::Tracked {
            depth_bound: opts.depth_bound,
        }
    };
    if factors.is_empty() {
        let t = set_model::pick_representative(set, &Ball::whole(), p, &[])?;
        let mut out = DenseSet::from_points(&[t.clone()], factors, p, mode);
        out.cover.push(CoverEntry {
            ball: Ball::whole(),
            point: t,
            isolated: false,
        });
        return Ok(out);
    }
    let bound = if exact {
        opts.depth_bound.max(depth_needed(set, factors, p))
    } else {
        opts.depth_bound
    };
    let sigmas = scalings(factors, p);
    let mut cover = Vec::new();
    let mut notices = Vec::new();
    let mut level = vec![Ball::whole()];
    while !level.is_empty() {
        let mut next = Vec::new();
        for ball in &level {
            if let Some(c) = set_model::single_point(set, ball, p) {
                let vec = vector_of(&sigmas, &c, p);
                for (h, v) in factors.iter().zip(&vec.0) {
                    if v.is_infinite() {
                        notices.push(format!(
                            "isolated root {} of {h} taken into the dense set",
                            arith::format_rational(&c)
                        ));
                    }
                }
                cover.push(CoverEntry {
                    ball: ball.clone(),
                    point: c,
                    isolated: true,
                });
                continue;
            }
            let (mu, reductions) = ball_profile(&sigmas, ball, p);
            let children = set_model::relevant_children(set, ball, p);
            let good = children.iter().enumerate().find(|(_, child)| {
                let j = child_index(ball, child, p);
                reductions
                    .iter()
                    .all(|r| crate::modp::eval(r, j, p) != 0)
            });
            match good {
                Some((_, child)) => {
                    let t = set_model::pick_representative(set, child, p, &[])?;
                    let got = vector_of(&sigmas, &t, p);
                    if got != mu {
                        return Err(Error::Certification(format!(
                            "point {} has vector {got}, expected the ball minimum {mu}",
                            arith::format_rational(&t)
                        )));
                    }
                    cover.push(CoverEntry {
                        ball: ball.clone(),
                        point: t,
                        isolated: false,
                    });
                }
                None => next.extend(children),
            }
        }
        if let Some(b) = next.first() {
            if b.depth > bound {
                return Err(Error::Resource(format!(
                    "covering did not resolve within depth {bound} ({} balls pending)",
                    next.len()
                )));
            }
        }
        next.sort();
        level = next;
    }
    debug!("dense set at p={p}: {} balls resolved", cover.len());
    let points: Vec<Rational> = cover.iter().map(|c| c.point.clone()).collect();
    let mut out = DenseSet::from_points(&points, factors, p, mode);
    cover.sort_by(|a, b| a.point.cmp(&b.point));
    out.cover = cover;
    out.notices = notices;
    Ok(out)
}

fn child_index(parent: &Ball, child: &Ball, p: u64) -> u64 {
    let step = parent.radius(p);
    let j: BigInt = (&child.center - &parent.center) / step;
    u64::try_from(j).expect("child digit")
}

/// Gauss valuations and reductions mod `p` of each `sigma_h(c + p^n y)`.
fn ball_profile(sigmas: &[Poly], ball: &Ball, p: u64) -> (ValVector, Vec<Vec<u64>>) {
    let shift = Poly::new(vec![
        Rational::from_integer(ball.center.clone()),
        Rational::from_integer(ball.radius(p)),
    ]);
    let pb = BigInt::from(p);
    let mut mus = Vec::with_capacity(sigmas.len());
    let mut reds = Vec::with_capacity(sigmas.len());
    for s in sigmas {
        let g = s.compose(&shift);
        let mu = g.min_coeff_valuation(p);
        let scale = p_power(p, -mu.finite().expect("nonzero polynomial"));
        let mut red: Vec<u64> = g
            .coeffs()
            .iter()
            .map(|c| {
                let r = arith::residue(&(c * &scale), &pb).expect("p-integral");
                u64::try_from(r).expect("small residue")
            })
            .collect();
        while red.last() == Some(&0) {
            red.pop();
        }
        mus.push(mu);
        reds.push(red);
    }
    (ValVector(mus), reds)
}

/// Minimum over `S` of `sum m_h v_p(sigma_h(s))`, read off the dense set.
pub fn min_functional(set: &SetSpec, factors: &[Poly], p: u64, m: &[u64]) -> Result<ValInt> {
    if factors.is_empty() {
        return input("empty factor set");
    }
    if m.len() != factors.len() {
        return input("exponent vector length differs from the factor count");
    }
    Ok(dense_set(set, factors, p)?.min_functional(m))
}

/// Brute-force minimal vectors over `S` within `[-radius, radius]`.
pub fn minimal_vectors_oracle(
    set: &SetSpec,
    factors: &[Poly],
    p: u64,
    radius: u64,
) -> Result<Vec<ValVector>> {
    set.check_prime(p)?;
    if radius < p * p {
        return input(format!("oracle radius {radius} is below p^2 = {}", p * p));
    }
    let vectors = oracle::distinct_vectors(set, factors, p, radius)?;
    Ok(minimal_elements(&vectors))
}

/// Result of testing `u in conv(points) + R_{>=0}^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum HullCertificate {
    /// Convex multipliers, one per point, whose combination lies below `u`.
    Inside {
        #[serde(with = "arith::rational_vec")]
        multipliers: Vec<Rational>,
    },
    /// An exponent vector whose functional is smaller at `u` than at every point.
    Outside { exponents: Vec<u64> },
}

impl HullCertificate {
    pub fn is_inside(&self) -> bool {
        matches!(self, HullCertificate::Inside { .. })
    }
}

/// Exact membership of `u` in the upward closed convex hull of `points`,
/// where an infinite coordinate satisfies every inequality it appears in.
pub fn hull_check(points: &[ValVector], u: &ValVector) -> Result<HullCertificate> {
    let d = u.len();
    let n = points.len();
    let unit = |i: usize| {
        let mut lam = vec![Rational::zero(); n];
        lam[i] = Rational::one();
        HullCertificate::Inside { multipliers: lam }
    };
    if let Some(i) = points.iter().position(|t| t.is_below(u)) {
        return Ok(unit(i));
    }
    let active: Vec<usize> = (0..d).filter(|&h| !u.0[h].is_infinite()).collect();
    if active.is_empty() {
        // Only the zero functional is constraining.
        return Ok(if n > 0 {
            unit(0)
        } else {
            HullCertificate::Outside {
                exponents: vec![0; d],
            }
        });
    }
    let finite_pts: Vec<usize> = (0..n)
        .filter(|&i| active.iter().all(|&h| !points[i].0[h].is_infinite()))
        .collect();
    let val = |v: ValInt| Rational::from_integer(BigInt::from(v.finite().expect("finite")));
    if finite_pts.is_empty() {
        let mut m = vec![0u64; d];
        for &h in &active {
            m[h] = 1;
        }
        return Ok(HullCertificate::Outside { exponents: m });
    }
    // Cheap candidates first: single coordinates, then their sum.
    let mut simple: Vec<Vec<u64>> = active
        .iter()
        .map(|&h| {
            let mut m = vec![0u64; d];
            m[h] = 1;
            m
        })
        .collect();
    simple.push((0..d).map(|h| u64::from(active.contains(&h))).collect());
    for m in simple {
        let at_u = u.pairing(&m);
        if points.iter().all(|t| t.pairing(&m) > at_u) {
            return Ok(HullCertificate::Outside { exponents: m });
        }
    }
    // Separating functional: m_h > 0 on the active coordinates and
    // <m, u - t> < 0 for every point finite there.
    let k = active.len();
    let mut dual = Vec::new();
    for j in 0..k {
        let mut row = vec![Rational::zero(); k];
        row[j] = -Rational::one();
        dual.push(Constraint::new(row, Relation::Lt, Rational::zero()));
    }
    for &i in &finite_pts {
        let row = active
            .iter()
            .map(|&h| val(u.0[h]) - val(points[i].0[h]))
            .collect();
        dual.push(Constraint::new(row, Relation::Lt, Rational::zero()));
    }
    if let Some(m) = find_point(k, &dual) {
        let ints = to_integer_vector(&m);
        let mut exps = vec![0u64; d];
        for (j, &h) in active.iter().enumerate() {
            exps[h] = ints[j];
        }
        let at_u = u.pairing(&exps);
        if points.iter().any(|t| t.pairing(&exps) <= at_u) {
            return Err(Error::Certification(format!(
                "separating functional {exps:?} does not separate {u}"
            )));
        }
        return Ok(HullCertificate::Outside { exponents: exps });
    }
    let q = finite_pts.len();
    let mut primal = Vec::new();
    for j in 0..q {
        let mut row = vec![Rational::zero(); q];
        row[j] = -Rational::one();
        primal.push(Constraint::new(row, Relation::Le, Rational::zero()));
    }
    primal.push(Constraint::new(
        vec![Rational::one(); q],
        Relation::Eq,
        Rational::one(),
    ));
    for &h in &active {
        let row = finite_pts.iter().map(|&i| val(points[i].0[h])).collect();
        primal.push(Constraint::new(row, Relation::Le, val(u.0[h])));
    }
    match find_point(q, &primal) {
        Some(lam) => {
            let mut multipliers = vec![Rational::zero(); n];
            for (j, &i) in finite_pts.iter().enumerate() {
                multipliers[i] = lam[j].clone();
            }
            Ok(HullCertificate::Inside { multipliers })
        }
        None => Err(Error::Certification(format!(
            "neither a separating functional nor convex multipliers exist for {u}"
        ))),
    }
}

/// Clears denominators of a positive rational vector and removes the common
/// factor.
fn to_integer_vector(m: &[Rational]) -> Vec<u64> {
    let den = m
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let nums: Vec<BigInt> = m.iter().map(|x| (x * &den).to_integer()).collect();
    let g = nums.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    nums.iter()
        .map(|x| u64::try_from(x / &g).expect("exponent fits in u64"))
        .collect()
}

/// Closure membership with a certificate.
pub fn closure_check(
    s: &Rational,
    points: &[Rational],
    factors: &[Poly],
    p: u64,
) -> Result<HullCertificate> {
    let u = val_vector(s, factors, p)?;
    let sigmas = scalings(factors, p);
    let vecs: Vec<ValVector> = points.iter().map(|t| vector_of(&sigmas, t, p)).collect();
    hull_check(&vecs, &u)
}

pub fn in_closure(s: &Rational, points: &[Rational], factors: &[Poly], p: u64) -> Result<bool> {
    Ok(closure_check(s, points, factors, p)?.is_inside())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    pub dense: bool,
    /// Minimal vectors of `S` relative to the factor set.
    pub targets: Vec<ValVector>,
    /// One hull certificate per target vector.
    pub certificates: Vec<HullCertificate>,
}

impl DensityReport {
    /// The first exponent vector on which the minima differ, if any.
    pub fn violation(&self) -> Option<&[u64]> {
        self.certificates.iter().find_map(|c| match c {
            HullCertificate::Outside { exponents } => Some(exponents.as_slice()),
            HullCertificate::Inside { .. } => None,
        })
    }
}

fn check_subset(points: &[Rational], set: &SetSpec) -> Result<()> {
    if let Some(t) = points.iter().find(|t| !set_model::contains(set, t)) {
        return input(format!("{} is not an element of S", arith::format_rational(t)));
    }
    Ok(())
}

fn density_against(
    points: &[Rational],
    targets: &[ValVector],
    factors: &[Poly],
    p: u64,
) -> Result<DensityReport> {
    let sigmas = scalings(factors, p);
    let vecs: Vec<ValVector> = points.iter().map(|t| vector_of(&sigmas, t, p)).collect();
    let certificates = targets
        .iter()
        .map(|u| hull_check(&vecs, u))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityReport {
        dense: certificates.iter().all(|c| c.is_inside()),
        targets: targets.to_vec(),
        certificates,
    })
}

pub fn density_check(
    points: &[Rational],
    set: &SetSpec,
    factors: &[Poly],
    p: u64,
) -> Result<DensityReport> {
    check_subset(points, set)?;
    let full = dense_set(set, factors, p)?;
    density_against(points, &full.minimal_vectors(), factors, p)
}

pub fn is_dense(points: &[Rational], set: &SetSpec, factors: &[Poly], p: u64) -> Result<bool> {
    Ok(density_check(points, set, factors, p)?.dense)
}

/// Greedy removal in ascending point order down to an inclusion-minimal
/// dense subset.
pub fn minimize_dense_set(
    points: &[Rational],
    set: &SetSpec,
    factors: &[Poly],
    p: u64,
) -> Result<DenseSet> {
    minimize_dense_set_with(points, set, factors, p, &DenseOptions::default())
}

pub fn minimize_dense_set_with(
    points: &[Rational],
    set: &SetSpec,
    factors: &[Poly],
    p: u64,
    opts: &DenseOptions,
) -> Result<DenseSet> {
    check_subset(points, set)?;
    let full = dense_set_with(set, factors, p, opts)?;
    let targets = full.minimal_vectors();
    if !density_against(points, &targets, factors, p)?.dense {
        return Err(Error::Precondition("the given set is not dense".into()));
    }
    let mut kept: Vec<Rational> = points.to_vec();
    kept.sort();
    kept.dedup();
    let mut i = 0;
    while i < kept.len() {
        let mut trial = kept.clone();
        trial.remove(i);
        if !trial.is_empty() && density_against(&trial, &targets, factors, p)?.dense {
            kept = trial;
        } else {
            i += 1;
        }
    }
    let mut out = DenseSet::from_points(&kept, factors, p, full.mode);
    out.notices = full.notices;
    Ok(out)
}

/// Radius `p^k` as an integer.
pub fn power_radius(p: u64, k: u32) -> u64 {
    let r = pow_int(p, k);
    u64::try_from(r).expect("radius fits in u64")
}

/// True when `s` is a root of some factor.
pub fn is_root(s: &Rational, factors: &[Poly]) -> bool {
    factors.iter().any(|h| h.eval(s).is_zero())
}
