//! Subsets of the integers (and finite sets of p-integral rationals) together
//! with the p-adic ball queries the covering algorithm needs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, pow_int, representative_order, vp_rat, Rational, ValInt};
use crate::error::{input, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "lowercase", try_from = "RawSet")]
pub enum SetSpec {
    Integers,
    Finite {
        #[serde(with = "arith::rational_vec")]
        elements: Vec<Rational>,
    },
    Residues { modulus: u64, residues: Vec<u64> },
}

#[derive(Deserialize)]
#[serde(tag = "set", rename_all = "lowercase")]
enum RawSet {
    Integers,
    Finite {
        #[serde(with = "arith::rational_vec")]
        elements: Vec<Rational>,
    },
    Residues { modulus: u64, residues: Vec<u64> },
}

impl TryFrom<RawSet> for SetSpec {
    type Error = Error;
    fn try_from(raw: RawSet) -> Result<SetSpec> {
        match raw {
            RawSet::Integers => Ok(SetSpec::Integers),
            RawSet::Finite { elements } => SetSpec::finite(elements),
            RawSet::Residues { modulus, residues } => SetSpec::residues(modulus, residues),
        }
    }
}

/// The residue class `center + p^depth Z_(p)`; `center` lies in `[0, p^depth)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Ball {
    #[serde(serialize_with = "serialize_bigint")]
    pub center: BigInt,
    pub depth: u32,
}

fn serialize_bigint<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl Ball {
    pub fn new(center: &Rational, depth: u32, p: u64) -> Result<Ball> {
        if vp_rat(center, p) < ValInt::ZERO {
            return input(format!(
                "ball center {} is not {p}-integral",
                arith::format_rational(center)
            ));
        }
        let m = pow_int(p, depth);
        let c = arith::residue(center, &m).expect("p-integral");
        Ok(Ball { center: c, depth })
    }

    pub fn whole() -> Ball {
        Ball {
            center: BigInt::zero(),
            depth: 0,
        }
    }

    pub fn radius(&self, p: u64) -> BigInt {
        pow_int(p, self.depth)
    }

    pub fn contains(&self, s: &Rational, p: u64) -> bool {
        let diff = s - Rational::from_integer(self.center.clone());
        vp_rat(&diff, p) >= ValInt::Finite(self.depth as i64)
    }

    /// The `p` balls of the next depth inside `self`, in increasing center order.
    pub fn children(&self, p: u64) -> Vec<Ball> {
        let step = self.radius(p);
        (0..p)
            .map(|j| Ball {
                center: &self.center + &step * j,
                depth: self.depth + 1,
            })
            .collect()
    }
}

impl SetSpec {
    pub fn finite(elements: Vec<Rational>) -> Result<SetSpec> {
        let mut elements = elements;
        elements.sort();
        let n = elements.len();
        elements.dedup();
        if elements.len() != n {
            return input("finite set lists an element twice");
        }
        if elements.is_empty() {
            return input("finite set is empty");
        }
        Ok(SetSpec::Finite { elements })
    }

    pub fn residues(modulus: u64, residues: Vec<u64>) -> Result<SetSpec> {
        if modulus < 2 {
            return input("residue modulus must be at least 2");
        }
        let mut rs: Vec<u64> = residues.into_iter().map(|r| r % modulus).collect();
        rs.sort_unstable();
        rs.dedup();
        if rs.is_empty() {
            return input("residue set is empty");
        }
        Ok(SetSpec::Residues {
            modulus,
            residues: rs,
        })
    }

    /// Rejects elements that are not `p`-integral.
    pub fn check_prime(&self, p: u64) -> Result<()> {
        arith::check_prime(p)?;
        if let SetSpec::Finite { elements } = self {
            if let Some(e) = elements.iter().find(|e| vp_rat(e, p) < ValInt::ZERO) {
                return input(format!(
                    "element {} of S is not {p}-integral",
                    arith::format_rational(e)
                ));
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SetSpec::Finite { .. })
    }

    /// Residue classes `rho + M Z` covering the set, or `None` for a finite set.
    pub fn classes(&self) -> Option<Vec<(BigInt, BigInt)>> {
        match self {
            SetSpec::Integers => Some(vec![(BigInt::zero(), BigInt::from(1))]),
            SetSpec::Residues { modulus, residues } => Some(
                residues
                    .iter()
                    .map(|&r| (BigInt::from(r), BigInt::from(*modulus)))
                    .collect(),
            ),
            SetSpec::Finite { .. } => None,
        }
    }

    /// Every element with absolute value at most `radius`, in the canonical
    /// representative order.
    pub fn elements_within(&self, radius: &BigInt) -> Vec<Rational> {
        let mut out: Vec<Rational> = match self {
            SetSpec::Finite { elements } => elements
                .iter()
                .filter(|e| e.abs() <= Rational::from_integer(radius.clone()))
                .cloned()
                .collect(),
            _ => {
                let lo = -radius.clone();
                let mut v = Vec::new();
                let mut s = lo;
                while &s <= radius {
                    let r = Rational::from_integer(s.clone());
                    if contains(self, &r) {
                        v.push(r);
                    }
                    s += 1;
                }
                v
            }
        };
        out.sort_by(representative_order);
        out
    }
}

pub fn contains(set: &SetSpec, s: &Rational) -> bool {
    match set {
        SetSpec::Integers => s.is_integer(),
        SetSpec::Finite { elements } => elements.binary_search(s).is_ok(),
        SetSpec::Residues { modulus, residues } => {
            s.is_integer() && {
                let r = s.to_integer().mod_floor(&BigInt::from(*modulus));
                residues.iter().any(|&x| BigInt::from(x) == r)
            }
        }
    }
}

/// Residue classes `(r, M)` whose union is `S` intersected with the ball.
fn ball_classes(set: &SetSpec, ball: &Ball, p: u64) -> Vec<(BigInt, BigInt)> {
    let rad = ball.radius(p);
    set.classes()
        .unwrap_or_default()
        .into_iter()
        .filter_map(|(r, m)| arith::crt(&ball.center, &rad, &r, &m))
        .collect()
}

pub fn ball_meets(set: &SetSpec, ball: &Ball, p: u64) -> bool {
    match set {
        SetSpec::Integers => true,
        SetSpec::Finite { elements } => elements.iter().any(|e| ball.contains(e, p)),
        SetSpec::Residues { .. } => !ball_classes(set, ball, p).is_empty(),
    }
}

/// Smallest `|s|` (ties toward the positive value) in `S` meet `ball`,
/// skipping `exclude`.
pub fn pick_representative(
    set: &SetSpec,
    ball: &Ball,
    p: u64,
    exclude: &[Rational],
) -> Result<Rational> {
    let mut candidates: Vec<Rational> = match set {
        SetSpec::Finite { elements } => elements
            .iter()
            .filter(|e| ball.contains(e, p))
            .cloned()
            .collect(),
        _ => {
            let k = exclude.len() as i64 + 1;
            let mut v = Vec::new();
            for (r, m) in ball_classes(set, ball, p) {
                for i in 0..k {
                    v.push(Rational::from_integer(&r + &m * i));
                    v.push(Rational::from_integer(&r - &m * (i + 1)));
                }
            }
            v
        }
    };
    candidates.sort_by(representative_order);
    candidates
        .into_iter()
        .find(|c| !exclude.contains(c))
        .ok_or_else(|| {
            Error::EmptyChoice(format!(
                "no element of S in {} + {p}^{} Z_({p}) outside the excluded points",
                ball.center, ball.depth
            ))
        })
}

pub fn is_isolated(set: &SetSpec, s: &Rational, _p: u64) -> Result<bool> {
    if !contains(set, s) {
        return input(format!("{} is not an element of S", arith::format_rational(s)));
    }
    Ok(set.is_finite())
}

/// Children of `ball` that meet `S`.
pub fn relevant_children(set: &SetSpec, ball: &Ball, p: u64) -> Vec<Ball> {
    ball.children(p)
        .into_iter()
        .filter(|b| ball_meets(set, b, p))
        .collect()
}

/// The unique element of `S` in `ball`, when a finite set has exactly one.
pub fn single_point(set: &SetSpec, ball: &Ball, p: u64) -> Option<Rational> {
    match set {
        SetSpec::Finite { elements } => {
            let mut inside = elements.iter().filter(|e| ball.contains(e, p));
            let first = inside.next()?;
            inside.next().is_none().then(|| first.clone())
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use proptest::prelude::*;

    fn ball(c: i64, d: u32, p: u64) -> Ball {
        Ball::new(&int(c), d, p).unwrap()
    }

    #[test]
    fn contains_examples() {
        assert!(contains(&SetSpec::Integers, &int(5)));
        let r = SetSpec::residues(4, vec![1, 3]).unwrap();
        assert!(!contains(&r, &int(6)));
        let f = SetSpec::finite(vec![int(0), rat(1, 3)]).unwrap();
        assert!(contains(&f, &rat(1, 3)));
        assert!(!contains(&SetSpec::Integers, &rat(1, 2)));
    }

    #[test]
    fn ball_meets_examples() {
        assert!(ball_meets(&SetSpec::Integers, &ball(3, 3, 2), 2));
        let r = SetSpec::residues(3, vec![0]).unwrap();
        assert!(ball_meets(&r, &ball(1, 1, 2), 2));
        let f = SetSpec::finite(vec![int(4)]).unwrap();
        assert!(!ball_meets(&f, &ball(1, 1, 2), 2));
        let even = SetSpec::residues(4, vec![0]).unwrap();
        assert!(!ball_meets(&even, &ball(2, 2, 2), 2));
        assert!(ball_meets(&even, &ball(4, 3, 2), 2));
    }

    #[test]
    fn representative_examples() {
        let z = SetSpec::Integers;
        assert_eq!(pick_representative(&z, &ball(1, 1, 2), 2, &[int(1)]).unwrap(), int(-1));
        assert_eq!(pick_representative(&z, &ball(0, 2, 2), 2, &[]).unwrap(), int(0));
        let r = SetSpec::residues(5, vec![2]).unwrap();
        // -3 is odd, is 2 mod 5, and beats 7 on absolute value.
        assert_eq!(pick_representative(&r, &ball(1, 1, 2), 2, &[]).unwrap(), int(-3));
        assert_eq!(pick_representative(&r, &ball(1, 1, 2), 2, &[int(-3)]).unwrap(), int(7));
        let f = SetSpec::finite(vec![int(4)]).unwrap();
        assert!(matches!(
            pick_representative(&f, &ball(0, 1, 2), 2, &[int(4)]),
            Err(Error::EmptyChoice(_))
        ));
    }

    #[test]
    fn isolation_examples() {
        assert!(!is_isolated(&SetSpec::Integers, &int(0), 2).unwrap());
        let f = SetSpec::finite(vec![int(0), int(1), int(2)]).unwrap();
        assert!(is_isolated(&f, &int(1), 3).unwrap());
        let r = SetSpec::residues(4, vec![1]).unwrap();
        assert!(!is_isolated(&r, &int(1), 2).unwrap());
        assert!(is_isolated(&r, &int(2), 2).is_err());
    }

    #[test]
    fn json_forms() {
        let s: SetSpec = serde_json::from_str(r#"{"set": "integers"}"#).unwrap();
        assert_eq!(s, SetSpec::Integers);
        let s: SetSpec = serde_json::from_str(r#"{"set": "residues", "modulus": 4, "residues": [5, 3]}"#).unwrap();
        assert_eq!(s, SetSpec::residues(4, vec![1, 3]).unwrap());
        let s: SetSpec = serde_json::from_str(r#"{"set": "finite", "elements": ["1/3", 0]}"#).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"set":"finite","elements":["0","1/3"]}"#);
        assert!(serde_json::from_str::<SetSpec>(r#"{"set": "finite", "elements": []}"#).is_err());
        assert!(serde_json::from_str::<SetSpec>(r#"{"set": "residues", "modulus": 1, "residues": [0]}"#).is_err());
    }

    fn set_strategy() -> impl Strategy<Value = SetSpec> {
        prop_oneof![
            Just(SetSpec::Integers),
            (2u64..30, prop::collection::vec(0u64..30, 1..4))
                .prop_map(|(m, r)| SetSpec::residues(m, r).unwrap()),
            prop::collection::btree_set(-40i64..40, 1..6)
                .prop_map(|e| SetSpec::finite(e.into_iter().map(int).collect()).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn meets_is_monotone(set in set_strategy(), c in 0i64..200, d in 0u32..5, p in prop_oneof![Just(2u64), Just(3), Just(5)]) {
            let deep = ball(c, d + 1, p);
            let shallow = ball(c, d, p);
            if ball_meets(&set, &deep, p) {
                prop_assert!(ball_meets(&set, &shallow, p));
            }
        }

        #[test]
        fn representative_lies_in_set_and_ball(set in set_strategy(), c in 0i64..200, d in 0u32..4, p in prop_oneof![Just(2u64), Just(3)]) {
            let b = ball(c, d, p);
            if ball_meets(&set, &b, p) {
                let r = pick_representative(&set, &b, p, &[]).unwrap();
                prop_assert!(contains(&set, &r));
                prop_assert!(b.contains(&r, p));
                if !set.is_finite() {
                    prop_assert!(!is_isolated(&set, &r, p).unwrap());
                    let r2 = pick_representative(&set, &b, p, &[r.clone()]).unwrap();
                    prop_assert!(r2 != r && contains(&set, &r2) && b.contains(&r2, p));
                }
            }
        }
    }
}
