//! Runners for the acceptance criteria. Each runner is deterministic in its
//! seed and reports the number of checks made and the failures found.

use std::sync::OnceLock;

use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{int, p_power, rat, vp_rat, Rational, ValInt};
use crate::density::{self, minimal_elements, DenseSet, Mode, ValVector};
use crate::divisor_hom::{self, GlobalContext, DEFAULT_WITNESS_BOUND};
use crate::error::Result;
use crate::factor::{factor_over_q, FactoredPoly};
use crate::monoid::MonoidContext;
use crate::oracle;
use crate::poly::Poly;
use crate::set_model::SetSpec;

/// Failures kept per criterion; the count is always exact.
const MAX_REPORTED: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub failure_count: usize,
    pub failures: Vec<String>,
}

struct Tally {
    checks: usize,
    failures: Vec<String>,
    failure_count: usize,
}

impl Tally {
    fn new() -> Tally {
        Tally {
            checks: 0,
            failures: Vec::new(),
            failure_count: 0,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.fail(what());
        }
    }

    fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < MAX_REPORTED {
            self.failures.push(msg);
        }
    }

    /// Records an error from the code under test as a failure.
    fn guard<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(x) => Some(x),
            Err(e) => {
                self.checks += 1;
                self.fail(format!("{}: {e}", what()));
                None
            }
        }
    }

    fn finish(self, id: u8, title: &'static str) -> CriterionOutcome {
        CriterionOutcome {
            id,
            title,
            passed: self.failure_count == 0 && self.checks > 0,
            checks: self.checks,
            failure_count: self.failure_count,
            failures: self.failures,
        }
    }
}

pub const TITLES: [&str; 11] = [
    "dense-set correctness against the brute-force minimum",
    "cardinality bound in exact mode",
    "root-freeness and isolated-root notices",
    "minimal vectors equal the oracle's",
    "divisor-homomorphism equivalence at one prime",
    "divisor-theory witnesses for x(x-1) at 2",
    "monoid equals the integer-valued H-supported polynomials",
    "image-primitive case",
    "global homomorphism over the integers",
    "closure axioms",
    "valuation by roots equals direct evaluation",
];

pub fn run(id: u8, seed: u64) -> CriterionOutcome {
    let title = TITLES[(id - 1) as usize];
    let tally = match id {
        1 => dense_correctness(),
        2 => cardinality_bound(),
        3 => root_freeness(seed),
        4 => oracle_equivalence(),
        5 => hom_equivalence(seed),
        6 => witnesses(),
        7 => monoid_equality(seed),
        8 => image_primitive(seed),
        9 => global_hom(seed),
        10 => closure_axioms(seed),
        11 => valuation_decomposition(seed),
        _ => panic!("no criterion {id}"),
    };
    tally.finish(id, title)
}

pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    (1..=11).map(|id| run(id, seed)).collect()
}

fn fp(coeffs: &[i64]) -> FactoredPoly {
    factor_over_q(&Poly::from_ints(coeffs)).expect("fixed test polynomial")
}

fn fq(coeffs: &[Rational]) -> FactoredPoly {
    factor_over_q(&Poly::new(coeffs.to_vec())).expect("fixed test polynomial")
}

/// `prod (x - r)^e` over distinct rational roots, degree at most six.
pub fn random_rational_root_poly(rng: &mut ChaCha8Rng) -> FactoredPoly {
    let degree = rng.gen_range(1..=6usize);
    let mut parts: Vec<(Poly, u32)> = Vec::new();
    let mut used = 0;
    while used < degree {
        let root = if rng.gen_bool(0.75) {
            int(rng.gen_range(-20..=20))
        } else {
            let den = *[2i64, 3, 4, 5].choose(rng).expect("nonempty");
            rat(rng.gen_range(-20 * den..=20 * den), den)
        };
        let h = Poly::linear(&root);
        if parts.iter().any(|(g, _)| *g == h) {
            continue;
        }
        let e = if degree - used >= 2 && rng.gen_bool(0.3) { 2 } else { 1 };
        used += e as usize;
        parts.push((h, e));
    }
    FactoredPoly::from_parts(Rational::one(), parts)
}

fn corpus_sets() -> Vec<SetSpec> {
    vec![
        SetSpec::Integers,
        SetSpec::residues(4, vec![1, 2]).expect("valid"),
        SetSpec::residues(15, vec![0, 7, 11]).expect("valid"),
    ]
}

const CORPUS_PRIMES: [u64; 3] = [2, 3, 5];
const CORPUS_SIZE: usize = 25;
const CORPUS_SEED: u64 = 20_250_101;

/// One (polynomial, prime, set) case of the dense-set corpus.
pub struct Instance {
    pub f: FactoredPoly,
    pub prime: u64,
    pub set: SetSpec,
    pub dense: Result<DenseSet>,
    /// Distinct vectors of `S` within `[-p^10, p^10]`.
    pub window: Result<Vec<ValVector>>,
}

impl Instance {
    fn label(&self) -> String {
        format!("f = {}, p = {}, S = {:?}", self.f, self.prime, self.set)
    }
}

/// The shared dense-set corpus, built once per process.
pub fn corpus() -> &'static [Instance] {
    static CORPUS: OnceLock<Vec<Instance>> = OnceLock::new();
    CORPUS.get_or_init(build_corpus)
}

fn build_corpus() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let polys: Vec<FactoredPoly> = (0..CORPUS_SIZE).map(|_| random_rational_root_poly(&mut rng)).collect();
    let sets = corpus_sets();
    let mut out = Vec::new();
    for f in &polys {
        let hs = f.factor_polys();
        for p in CORPUS_PRIMES {
            let radius = density::power_radius(p, 10);
            let windows = oracle::distinct_vectors_multi(&sets, &hs, p, radius);
            for (i, set) in sets.iter().enumerate() {
                out.push(Instance {
                    f: f.clone(),
                    prime: p,
                    set: set.clone(),
                    dense: density::dense_set(set, &hs, p),
                    window: windows.as_ref().map(|w| w[i].clone()).map_err(Clone::clone),
                });
            }
        }
    }
    out
}

fn dense_correctness() -> Tally {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED + 1);
    for inst in corpus() {
        let hs = inst.f.factor_polys();
        let Some(dense) = t.guard(inst.dense.clone(), || inst.label()) else { continue };
        let Some(window) = t.guard(inst.window.clone(), || inst.label()) else { continue };
        if let Some(ok) = t.guard(density::is_dense(&dense.points, &inst.set, &hs, inst.prime), || inst.label()) {
            t.check(ok, || format!("{}: dense_set output fails is_dense", inst.label()));
        }
        for _ in 0..100 {
            let m: Vec<u64> = (0..hs.len()).map(|_| rng.gen_range(0..=5)).collect();
            let by_t = dense.min_functional(&m);
            let brute = window.iter().map(|v| v.pairing(&m)).min().unwrap_or(ValInt::Infinite);
            t.check(by_t == brute, || {
                format!("{}: m = {m:?}: min over T {by_t}, brute force {brute}", inst.label())
            });
        }
    }
    t
}

fn cardinality_bound() -> Tally {
    let mut t = Tally::new();
    for inst in corpus() {
        let Some(dense) = t.guard(inst.dense.clone(), || inst.label()) else { continue };
        if dense.mode != Mode::Exact {
            continue;
        }
        let bound = inst.f.factors().len().max(1);
        t.check(dense.len() <= bound, || {
            format!("{}: |T| = {} exceeds {bound}", inst.label(), dense.len())
        });
    }
    t
}

fn root_freeness(seed: u64) -> Tally {
    let mut t = Tally::new();
    for inst in corpus() {
        let Some(dense) = t.guard(inst.dense.clone(), || inst.label()) else { continue };
        let hs = inst.f.factor_polys();
        for s in &dense.points {
            t.check(!density::is_root(s, &hs), || format!("{}: {s} is a root", inst.label()));
        }
        t.check(dense.notices.is_empty(), || format!("{}: unexpected notice", inst.label()));
    }
    // A finite S made of roots only: every point is isolated and each one
    // taken into T is announced.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
    for _ in 0..20 {
        let f = random_rational_root_poly(&mut rng);
        let hs = f.factor_polys();
        let roots: Vec<Rational> = hs.iter().map(|h| -h.coeff(0)).collect();
        let p = *CORPUS_PRIMES.choose(&mut rng).expect("nonempty");
        let roots: Vec<Rational> = roots.into_iter().filter(|r| vp_rat(r, p) >= ValInt::ZERO).collect();
        if roots.is_empty() {
            continue;
        }
        let set = SetSpec::finite(roots).expect("nonempty");
        let label = format!("f = {f}, p = {p}, S = {set:?}");
        let Some(dense) = t.guard(density::dense_set(&set, &hs, p), || label.clone()) else { continue };
        t.check(!dense.notices.is_empty(), || format!("{label}: no isolated-root notice"));
        for s in &dense.points {
            let shown = crate::arith::format_rational(s);
            t.check(dense.notices.iter().any(|n| n.contains(&format!("root {shown} "))), || {
                format!("{label}: root {shown} taken silently")
            });
        }
    }
    t
}

fn oracle_equivalence() -> Tally {
    let mut t = Tally::new();
    for inst in corpus() {
        let Some(dense) = t.guard(inst.dense.clone(), || inst.label()) else { continue };
        let Some(window) = t.guard(inst.window.clone(), || inst.label()) else { continue };
        let oracle_min = minimal_elements(&window);
        let ours = dense.minimal_vectors();
        t.check(ours == oracle_min, || {
            format!("{}: dense set gives {ours:?}, oracle gives {oracle_min:?}", inst.label())
        });
    }
    t
}

fn hom_polys() -> Vec<FactoredPoly> {
    vec![
        fp(&[0, -1, 1]),
        fp(&[0, 2, -3, 1]),
        // (x^2 + x)/2 * (x - 3)
        fq(&[int(0), rat(-3, 2), int(-1), rat(1, 2)]),
    ]
}

fn hom_equivalence(seed: u64) -> Tally {
    let mut t = Tally::new();
    for f in hom_polys() {
        for p in [2u64, 3] {
            let label = format!("f = {f}, p = {p}");
            let Some(ctx) = t.guard(MonoidContext::new(f.clone(), SetSpec::Integers, p), || label.clone())
            else {
                continue;
            };
            let Some(r) = t.guard(divisor_hom::verify_divisor_hom(&ctx, 200, seed), || label.clone()) else {
                continue;
            };
            t.check(r.samples == 200, || format!("{label}: only {} pairs", r.samples));
            t.check(r.additivity_failures == 0, || format!("{label}: phi not additive"));
            for c in &r.counterexamples {
                t.fail(format!(
                    "{label}: a = {}, b = {}: phi says {}, monoid says {}",
                    c.a, c.b, c.phi_divides, c.monoid_divides
                ));
            }
            t.checks += r.samples;
        }
    }
    t
}

fn witnesses() -> Tally {
    let mut t = Tally::new();
    let label = "f = x(x-1), p = 2";
    let Some(ctx) = t.guard(MonoidContext::new(fp(&[0, -1, 1]), SetSpec::Integers, 2), || label.into()) else {
        return t;
    };
    t.check(ctx.fixed_divisor_val == ValInt::Finite(1), || {
        format!("{label}: v_2(d_S(f)) = {}", ctx.fixed_divisor_val)
    });
    t.check(ctx.points().len() == 2, || format!("{label}: |T| = {}", ctx.points().len()));
    if let Some(w) = t.guard(divisor_hom::build_witnesses(&ctx, DEFAULT_WITNESS_BOUND), || label.into()) {
        t.check(w.gcd_identities.len() == 4, || {
            format!("{label}: {} basis vectors", w.gcd_identities.len())
        });
        for id in &w.gcd_identities {
            t.check(id.realized, || format!("{label}: {} not realized (gcd {})", id.basis, id.gcd));
        }
    }
    t
}

/// `c * x^i (x - 1)^j` with `c` ranging over small powers of `p` times units,
/// plus some polynomials with a foreign factor.
fn h_population(ctx: &MonoidContext, rng: &mut ChaCha8Rng, foreign: bool) -> FactoredPoly {
    let p = ctx.prime;
    let unit = [int(1), int(-1), rat(5, 7), rat(-7, 5)].choose(rng).expect("nonempty").clone();
    let j = rng.gen_range(-3..=2);
    let mut parts: Vec<(Poly, u32)> = ctx.factors.iter().map(|h| (h.clone(), rng.gen_range(0..=3))).collect();
    if foreign {
        parts.push((Poly::linear(&int(-1)), 1));
    }
    FactoredPoly::from_parts(p_power(p, j) * unit, parts)
}

fn monoid_equality(seed: u64) -> Tally {
    let mut t = Tally::new();
    let label = "f = x(x-1), p = 2";
    let Some(ctx) = t.guard(MonoidContext::new(fp(&[0, -1, 1]), SetSpec::Integers, 2), || label.into()) else {
        return t;
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
    let (mut accepted, mut refused) = (0, 0);
    for _ in 0..200 {
        let foreign = rng.gen_bool(0.1);
        let g = h_population(&ctx, &mut rng, foreign);
        let expected = !foreign && oracle::int_valued_by_values(&g.expand(), &ctx.set, Some(2));
        let Some(m) = t.guard(ctx.in_monoid(&g), || format!("{label}: g = {g}")) else { continue };
        t.check(m.is_member() == expected, || {
            format!("{label}: g = {g}: in_monoid {}, expected {expected}", m.is_member())
        });
        if let Some(c) = m.certificate() {
            accepted += 1;
            let exact = g.mul(&c.cofactor) == ctx.f.pow(c.m);
            let iv = oracle::int_valued_by_values(&c.cofactor.expand(), &ctx.set, Some(2));
            t.check(exact && iv, || format!("{label}: g = {g}: certificate m = {} fails", c.m));
        } else {
            refused += 1;
        }
    }
    t.check(accepted > 0 && refused > 0, || {
        format!("{label}: population not mixed ({accepted} accepted, {refused} refused)")
    });
    t
}

fn image_primitive(seed: u64) -> Tally {
    let mut t = Tally::new();
    let label = "f = x(x-1), p = 3";
    let Some(ctx) = t.guard(MonoidContext::new(fp(&[0, -1, 1]), SetSpec::Integers, 3), || label.into()) else {
        return t;
    };
    t.check(ctx.f_image_primitive(), || format!("{label}: f not image-primitive"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 8);
    for _ in 0..100 {
        let g = h_population(&ctx, &mut rng, false);
        let Some(m) = t.guard(ctx.in_monoid(&g), || format!("{label}: g = {g}")) else { continue };
        let expected = ctx.is_primitive_product(&g);
        t.check(m.is_member() == expected, || {
            format!("{label}: g = {g}: in_monoid {}, primitive product {expected}", m.is_member())
        });
    }
    let Some(pool) = t.guard(ctx.sample_monoid(30, 3, seed), || label.into()) else { return t };
    for _ in 0..100 {
        let a = pool.choose(&mut rng).expect("nonempty");
        let b = pool.choose(&mut rng).expect("nonempty");
        let b = if rng.gen_bool(0.5) { b.mul(a) } else { b.clone() };
        let in_monoid = ctx.divides_in_monoid(a, &b).is_some();
        let in_qx = a.divides(&b);
        t.check(in_monoid == in_qx, || {
            format!("{label}: a = {a}, b = {b}: monoid {in_monoid}, Q[x] {in_qx}")
        });
    }
    t
}

fn global_hom(seed: u64) -> Tally {
    let mut t = Tally::new();
    let half = fq(&[int(0), rat(1, 2), rat(1, 2)]);
    let cubic = fp(&[0, 2, -3, 1]);
    for (f, expected) in [(&half, vec![2u64]), (&cubic, vec![2, 3])] {
        if let Some(ps) = t.guard(divisor_hom::critical_primes(f, &SetSpec::Integers), || format!("f = {f}")) {
            t.check(ps == expected, || format!("f = {f}: critical primes {ps:?}, expected {expected:?}"));
        }
    }
    for f in [&half, &cubic] {
        let label = format!("global f = {f}");
        let Some(ctx) = t.guard(GlobalContext::new(f.clone(), SetSpec::Integers), || label.clone()) else {
            continue;
        };
        let Some(r) = t.guard(divisor_hom::verify_divisor_hom_global(&ctx, 100, seed), || label.clone()) else {
            continue;
        };
        t.check(r.samples == 100 && r.additivity_failures == 0, || format!("{label}: degenerate report"));
        for c in &r.counterexamples {
            t.fail(format!("{label}: a = {}, b = {}", c.a, c.b));
        }
        t.checks += r.samples;
        if f == &half {
            let x = fp(&[0, 1]);
            let local = &ctx.locals[0];
            let verdict = divisor_hom::phi_local(&x, local).and_then(|px| {
                let pf = divisor_hom::phi_global(&half, &ctx)?;
                divisor_hom::divides_in_m(&px, &pf)
            });
            if let Some(d) = t.guard(verdict, || label.clone()) {
                t.check(!d, || format!("{label}: phi(x) divides phi(f)"));
            }
        }
    }
    t
}

/// Elements of `universe` in the closure of `points` relative to `factors`.
fn closure_within(
    universe: &[Rational],
    points: &[Rational],
    factors: &[Poly],
    p: u64,
) -> Result<Vec<Rational>> {
    let mut out = Vec::new();
    for s in universe {
        if density::in_closure(s, points, factors, p)? {
            out.push(s.clone());
        }
    }
    Ok(out)
}

fn subset(a: &[Rational], b: &[Rational]) -> bool {
    a.iter().all(|x| b.contains(x))
}

fn closure_axioms(seed: u64) -> Tally {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 10);
    let universe: Vec<Rational> = (-20..=20).map(int).collect();
    for case in 0..50 {
        let p = if case % 2 == 0 { 2 } else { 3 };
        let mut factors: Vec<Poly> = Vec::new();
        while factors.len() < rng.gen_range(1..=3) {
            let root = if rng.gen_bool(0.8) {
                int(rng.gen_range(-10..=10))
            } else {
                rat(rng.gen_range(-20..=20), 5)
            };
            let h = Poly::linear(&root);
            if !factors.contains(&h) {
                factors.push(h);
            }
        }
        let mut pool = universe.clone();
        pool.shuffle(&mut rng);
        let size = rng.gen_range(1..=4);
        let small: Vec<Rational> = pool[..size].to_vec();
        let large: Vec<Rational> = pool[..size + rng.gen_range(1..=4)].to_vec();
        let fewer = &factors[..rng.gen_range(0..factors.len())];
        let label = format!("case {case}: p = {p}, F = {factors:?}, T = {small:?}");
        let run = || -> Result<[bool; 4]> {
            let cl = closure_within(&universe, &small, &factors, p)?;
            let extensive = subset(&small, &cl);
            let idempotent = closure_within(&universe, &cl, &factors, p)? == cl;
            let monotone = subset(&cl, &closure_within(&universe, &large, &factors, p)?);
            let antitone = subset(&cl, &closure_within(&universe, &small, fewer, p)?);
            Ok([extensive, idempotent, monotone, antitone])
        };
        if let Some(flags) = t.guard(run(), || label.clone()) {
            for (name, ok) in ["extensivity", "idempotence", "monotonicity", "antitonicity"].iter().zip(flags) {
                t.check(ok, || format!("{label}: {name} fails"));
            }
        }
    }
    t
}

fn valuation_decomposition(seed: u64) -> Tally {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 11);
    for _ in 0..500 {
        let f = random_rational_root_poly(&mut rng).scale(&rat(rng.gen_range(1..=12), rng.gen_range(1..=12)));
        let p = *[2u64, 3, 5, 7].choose(&mut rng).expect("nonempty");
        let s = rat(rng.gen_range(-60..=60), *[1i64, 1, 1, 2, 3, 5].choose(&mut rng).expect("nonempty"));
        let direct = vp_rat(&f.expand().eval(&s), p);
        let label = format!("f = {f}, s = {s}, p = {p}");
        if let Some(v) = t.guard(density::value_by_roots(&f, &s, p), || label.clone()) {
            t.check(v == direct, || format!("{label}: by roots {v}, direct {direct}"));
        }
    }
    t
}
