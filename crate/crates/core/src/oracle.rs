//! Brute-force oracles: valuation vectors over a window of `S`, and
//! integer-valuedness decided from finitely many values.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rustc_hash::FxHashSet;

use crate::arith::{vp_rat, Rational, ValInt};
use crate::density::ValVector;
use crate::error::{input, Result};
use crate::factor::primitive_scaling;
use crate::poly::Poly;
use crate::set_model::{self, SetSpec};

/// Distinct valuation vectors of the elements of `S` in `[-radius, radius]`.
pub fn distinct_vectors(
    set: &SetSpec,
    factors: &[Poly],
    p: u64,
    radius: u64,
) -> Result<Vec<ValVector>> {
    Ok(distinct_vectors_multi(std::slice::from_ref(set), factors, p, radius)?
        .pop()
        .expect("one set"))
}

/// As [`distinct_vectors`] for several sets at once, sharing one scan of the
/// window.
pub fn distinct_vectors_multi(
    sets: &[SetSpec],
    factors: &[Poly],
    p: u64,
    radius: u64,
) -> Result<Vec<Vec<ValVector>>> {
    let linear = factors.len() <= 8 && factors.iter().all(|h| h.deg() == 1);
    let mut out: Vec<Vec<ValVector>> = vec![Vec::new(); sets.len()];
    let integral: Vec<usize> = (0..sets.len()).filter(|&i| !sets[i].is_finite()).collect();
    let sigmas: Vec<Poly> = factors.iter().map(|h| primitive_scaling(h, p)).collect();
    for (i, set) in sets.iter().enumerate() {
        if let SetSpec::Finite { elements } = set {
            let r = Rational::from_integer(BigInt::from(radius));
            let mut seen = FxHashSet::default();
            for e in elements.iter().filter(|e| e.abs() <= r) {
                let v = ValVector(sigmas.iter().map(|g| vp_rat(&g.eval(e), p)).collect());
                if seen.insert(v.clone()) {
                    out[i].push(v);
                }
            }
        }
    }
    if integral.is_empty() {
        return Ok(out);
    }
    let r = i64::try_from(radius).map_err(|_| crate::Error::Input("radius too large".into()))?;
    if linear {
        let keys = scan_linear(&integral.iter().map(|&i| &sets[i]).collect::<Vec<_>>(), factors, p, r)?;
        for (slot, ks) in integral.iter().zip(keys) {
            let mut vs: Vec<ValVector> = ks.into_iter().map(|k| unpack(k, factors.len())).collect();
            vs.sort();
            out[*slot] = vs;
        }
    } else {
        for &i in &integral {
            let mut seen = FxHashSet::default();
            for s in -r..=r {
                let sr = Rational::from_integer(BigInt::from(s));
                if !set_model::contains(&sets[i], &sr) {
                    continue;
                }
                let v = ValVector(sigmas.iter().map(|g| vp_rat(&g.eval(&sr), p)).collect());
                seen.insert(v);
            }
            let mut vs: Vec<ValVector> = seen.into_iter().collect();
            vs.sort();
            out[i] = vs;
        }
    }
    Ok(out)
}

const INF_CODE: u64 = 255;

fn unpack(key: u64, d: usize) -> ValVector {
    ValVector(
        (0..d)
            .map(|h| match (key >> (8 * h)) & 0xff {
                INF_CODE => ValInt::Infinite,
                v => ValInt::Finite(v as i64),
            })
            .collect(),
    )
}

/// Membership of integers in an integral set, tracked incrementally.
struct ResidueTracker {
    modulus: u64,
    table: Vec<bool>,
    current: u64,
}

impl ResidueTracker {
    fn new(set: &SetSpec, start: i64) -> ResidueTracker {
        match set {
            SetSpec::Residues { modulus, residues } => {
                let mut table = vec![false; *modulus as usize];
                for &r in residues {
                    table[r as usize] = true;
                }
                ResidueTracker {
                    modulus: *modulus,
                    table,
                    current: start.rem_euclid(*modulus as i64) as u64,
                }
            }
            _ => ResidueTracker {
                modulus: 1,
                table: vec![true],
                current: 0,
            },
        }
    }

    fn member(&self) -> bool {
        self.table[self.current as usize]
    }

    fn advance(&mut self) {
        self.current += 1;
        if self.current == self.modulus {
            self.current = 0;
        }
    }
}

/// Valuation of `den * s - num` for each linear factor `x - num/den`, which
/// equals the valuation of its primitive scaling at `s`.
fn scan_linear(sets: &[&SetSpec], factors: &[Poly], p: u64, r: i64) -> Result<Vec<FxHashSet<u64>>> {
    struct Lin {
        num: i128,
        den: i128,
        residue: u64,
        step: u64,
    }
    let mut lins = Vec::with_capacity(factors.len());
    for h in factors {
        let root = -h.coeff(0);
        let (Some(num), Some(den)) = (root.numer().to_i128(), root.denom().to_i128()) else {
            return input("root too large for the fast oracle");
        };
        if num.abs() > 1 << 60 || den > 1 << 40 {
            return input("root too large for the fast oracle");
        }
        let pi = p as i128;
        let start = (den * (-r as i128) - num).rem_euclid(pi) as u64;
        lins.push(Lin {
            num,
            den,
            residue: start,
            step: den.rem_euclid(pi) as u64,
        });
    }
    let mut trackers: Vec<ResidueTracker> = sets.iter().map(|s| ResidueTracker::new(s, -r)).collect();
    let mut seen: Vec<FxHashSet<u64>> = vec![FxHashSet::default(); sets.len()];
    const CACHE: usize = 1 << 12;
    let mut cache = vec![vec![u64::MAX; CACHE]; sets.len()];
    let pi = p as i128;
    for s in -r..=r {
        let mut key = 0u64;
        for (h, lin) in lins.iter_mut().enumerate() {
            let code = if lin.residue != 0 {
                0
            } else {
                let mut x = lin.den * s as i128 - lin.num;
                if x == 0 {
                    INF_CODE
                } else {
                    let mut v = 0u64;
                    while x % pi == 0 {
                        x /= pi;
                        v += 1;
                    }
                    v.min(254)
                }
            };
            key |= code << (8 * h);
            lin.residue += lin.step;
            if lin.residue >= p {
                lin.residue -= p;
            }
        }
        let slot = (key.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 52) as usize;
        for (k, tr) in trackers.iter_mut().enumerate() {
            if tr.member() && cache[k][slot] != key {
                cache[k][slot] = key;
                seen[k].insert(key);
            }
            tr.advance();
        }
    }
    Ok(seen)
}

/// Whether `g` maps every element of `S` into `Z_(p)` (or into `Z` when
/// `p` is `None`), decided from `deg g + 1` consecutive values on each
/// residue class, or from all elements of a finite set.
pub fn int_valued_by_values(g: &Poly, set: &SetSpec, p: Option<u64>) -> bool {
    let ok = |x: &Rational| match p {
        Some(q) => vp_rat(x, q) >= ValInt::ZERO,
        None => x.is_integer(),
    };
    match set.classes() {
        None => match set {
            SetSpec::Finite { elements } => elements.iter().all(|e| ok(&g.eval(e))),
            _ => unreachable!(),
        },
        Some(classes) => {
            let n = g.deg() as i64;
            classes.iter().all(|(rho, m)| {
                (0..=n).all(|y| {
                    let s = Rational::from_integer(rho + m * BigInt::from(y));
                    ok(&g.eval(&s))
                })
            })
        }
    }
}
