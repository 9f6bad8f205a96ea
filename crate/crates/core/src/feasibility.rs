//! Exact feasibility of small systems of linear (in)equalities over the
//! rationals by Fourier-Motzkin elimination with back substitution.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use crate::arith::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Lt,
    Eq,
}

/// `sum coeffs[i] * x[i]  (relation)  rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Constraint {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Lt => lhs < self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Ineq {
    coeffs: Vec<Rational>,
    rhs: Rational,
    strict: bool,
}

impl Ineq {
    /// Scale so the first nonzero coefficient has absolute value one.
    fn normalized(mut self) -> Ineq {
        if let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
            for c in self.coeffs.iter_mut() {
                *c /= &lead;
            }
            self.rhs /= lead;
        }
        self
    }

    fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn trivially_holds(&self) -> bool {
        if self.strict {
            self.rhs.is_positive()
        } else {
            !self.rhs.is_negative()
        }
    }
}

/// A point satisfying every constraint, or `None` if the system is infeasible.
pub fn find_point(n_vars: usize, constraints: &[Constraint]) -> Option<Vec<Rational>> {
    let mut system: Vec<Ineq> = Vec::new();
    for c in constraints {
        assert_eq!(c.coeffs.len(), n_vars, "constraint arity");
        let le = Ineq {
            coeffs: c.coeffs.clone(),
            rhs: c.rhs.clone(),
            strict: c.relation == Relation::Lt,
        };
        if c.relation == Relation::Eq {
            system.push(Ineq {
                coeffs: c.coeffs.iter().map(|a| -a).collect(),
                rhs: -c.rhs.clone(),
                strict: false,
            });
        }
        system.push(le);
    }
    let mut stages: Vec<Vec<Ineq>> = Vec::with_capacity(n_vars + 1);
    let mut current = prune(system)?;
    for v in (0..n_vars).rev() {
        let next = eliminate(&current, v);
        stages.push(current);
        current = prune(next)?;
    }
    // `current` now only holds satisfied constant constraints.
    stages.reverse();
    let mut x = vec![Rational::zero(); n_vars];
    for v in 0..n_vars {
        x[v] = choose_value(&stages[v], v, &x)?;
    }
    debug_assert!(constraints.iter().all(|c| c.holds(&x)));
    Some(x)
}

/// Drops duplicates and satisfied constant rows; `None` if a constant row fails.
fn prune(system: Vec<Ineq>) -> Option<Vec<Ineq>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for ineq in system {
        if ineq.is_trivial() {
            if !ineq.trivially_holds() {
                return None;
            }
            continue;
        }
        let n = ineq.normalized();
        if seen.insert(n.clone()) {
            out.push(n);
        }
    }
    Some(out)
}

fn eliminate(system: &[Ineq], v: usize) -> Vec<Ineq> {
    let mut keep = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for ineq in system {
        let a = &ineq.coeffs[v];
        if a.is_zero() {
            keep.push(ineq.clone());
        } else if a.is_positive() {
            upper.push(ineq);
        } else {
            lower.push(ineq);
        }
    }
    for u in &upper {
        for l in &lower {
            // u: a x_v + ... <= b (a > 0), l: -c x_v + ... <= d (c > 0)
            let a = u.coeffs[v].clone();
            let c = -l.coeffs[v].clone();
            let coeffs = u
                .coeffs
                .iter()
                .zip(&l.coeffs)
                .map(|(x, y)| x * &c + y * &a)
                .collect();
            keep.push(Ineq {
                coeffs,
                rhs: &u.rhs * &c + &l.rhs * &a,
                strict: u.strict || l.strict,
            });
        }
    }
    keep
}

/// Picks `x[v]` within the bounds the stage imposes given `x[..v]`.
fn choose_value(stage: &[Ineq], v: usize, x: &[Rational]) -> Option<Rational> {
    let mut lo: Option<(Rational, bool)> = None;
    let mut hi: Option<(Rational, bool)> = None;
    for ineq in stage {
        let a = &ineq.coeffs[v];
        if a.is_zero() {
            continue;
        }
        let rest: Rational = ineq
            .coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < v)
            .map(|(i, c)| c * &x[i])
            .sum();
        let bound = (&ineq.rhs - rest) / a;
        if a.is_positive() {
            let tighter = match &hi {
                None => true,
                Some((h, s)) => bound < *h || (bound == *h && ineq.strict && !s),
            };
            if tighter {
                hi = Some((bound, ineq.strict));
            }
        } else {
            let tighter = match &lo {
                None => true,
                Some((l, s)) => bound > *l || (bound == *l && ineq.strict && !s),
            };
            if tighter {
                lo = Some((bound, ineq.strict));
            }
        }
    }
    let one = Rational::one();
    match (lo, hi) {
        (None, None) => Some(Rational::zero()),
        (Some((l, s)), None) => Some(if s { l + one } else { l }),
        (None, Some((h, s))) => Some(if s { h - one } else { h }),
        (Some((l, ls)), Some((h, hs))) => {
            if l < h {
                Some(if !ls { l } else if !hs { h } else { (l + h) / Rational::from_integer(2.into()) })
            } else if l == h && !ls && !hs {
                Some(l)
            } else {
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use proptest::prelude::*;

    fn c(coeffs: &[i64], rel: Relation, rhs: i64) -> Constraint {
        Constraint::new(coeffs.iter().map(|&a| int(a)).collect(), rel, int(rhs))
    }

    #[test]
    fn simple_systems() {
        // x + y <= 1, x > 0, y > 0
        let sys = vec![
            c(&[1, 1], Relation::Le, 1),
            c(&[-1, 0], Relation::Lt, 0),
            c(&[0, -1], Relation::Lt, 0),
        ];
        let x = find_point(2, &sys).unwrap();
        assert!(sys.iter().all(|k| k.holds(&x)));
        // x < 0 and x > 0
        assert!(find_point(1, &[c(&[1], Relation::Lt, 0), c(&[-1], Relation::Lt, 0)]).is_none());
        // x <= 0 and x >= 0 pins x = 0
        assert_eq!(
            find_point(1, &[c(&[1], Relation::Le, 0), c(&[-1], Relation::Le, 0)]).unwrap(),
            vec![int(0)]
        );
        // equality
        let x = find_point(2, &[c(&[1, 1], Relation::Eq, 1), c(&[1, -1], Relation::Eq, 0)]).unwrap();
        assert_eq!(x, vec![rat(1, 2), rat(1, 2)]);
    }

    proptest! {
        /// A system built around a known point is always reported feasible, and
        /// the returned point satisfies it.
        #[test]
        fn finds_points_of_feasible_systems(
            point in prop::collection::vec(-5i64..5, 3),
            rows in prop::collection::vec((prop::collection::vec(-3i64..4, 3), 0i64..3, any::<bool>()), 1..7),
        ) {
            let sys: Vec<Constraint> = rows
                .iter()
                .map(|(a, slack, strict)| {
                    let lhs: i64 = a.iter().zip(&point).map(|(x, y)| x * y).sum();
                    let rel = if *strict { Relation::Lt } else { Relation::Le };
                    c(a, rel, lhs + slack + i64::from(*strict))
                })
                .collect();
            let x = find_point(3, &sys);
            prop_assert!(x.is_some());
            let x = x.unwrap();
            prop_assert!(sys.iter().all(|k| k.holds(&x)));
        }

        /// Whenever a point is returned it satisfies the system.
        #[test]
        fn answers_are_sound(
            rows in prop::collection::vec((prop::collection::vec(-3i64..4, 2), -3i64..3, any::<bool>()), 1..6),
        ) {
            let sys: Vec<Constraint> = rows
                .iter()
                .map(|(a, b, strict)| c(a, if *strict { Relation::Lt } else { Relation::Le }, *b))
                .collect();
            if let Some(x) = find_point(2, &sys) {
                prop_assert!(sys.iter().all(|k| k.holds(&x)));
            } else {
                // Infeasible: no small grid point works either.
                for i in -12..=12 {
                    for j in -12..=12 {
                        let p = [rat(i, 4), rat(j, 4)];
                        prop_assert!(!sys.iter().all(|k| k.holds(&p)));
                    }
                }
            }
        }
    }
}
