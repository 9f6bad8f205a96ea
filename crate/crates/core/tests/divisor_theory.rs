use ivmonoid::arith::{int, rat};
use ivmonoid::divisor_hom::{
    critical_primes, fixed_divisor_global, phi_local, verify_divisor_theory, GlobalContext,
    DEFAULT_WITNESS_BOUND,
};
use ivmonoid::monoid::{Membership, MonoidContext, RefusalReason};
use ivmonoid::{factor_over_q, FactoredPoly, Poly, SetSpec};
use proptest::prelude::*;

fn roots_poly(roots: &[i64]) -> FactoredPoly {
    let p = roots
        .iter()
        .fold(Poly::from_ints(&[1]), |acc, r| &acc * &Poly::linear(&int(*r)));
    factor_over_q(&p).unwrap()
}

#[test]
fn binomial_two_is_member() {
    let f = roots_poly(&[0, 1]);
    let ctx = MonoidContext::new(f.clone(), SetSpec::Integers, 2).unwrap();
    let half = f.scale(&rat(1, 2));
    match ctx.in_monoid(&half).unwrap() {
        Membership::Member(cert) => {
            assert_eq!(cert.m, 1);
            assert_eq!(
                half.mul(&cert.cofactor).expand(),
                f.pow(cert.m).expand()
            );
        }
        other => panic!("expected membership, got {other:?}"),
    }
    let quarter = f.scale(&rat(1, 4));
    let verdict = ctx.in_monoid(&quarter).unwrap();
    assert_eq!(verdict.reason(), Some(RefusalReason::NotIntegerValued));
}

#[test]
fn theory_holds_for_small_cases() {
    for (roots, p) in [(vec![0, 1], 2), (vec![0, 1, 2], 3), (vec![0, 4], 2), (vec![1], 5)] {
        let ctx = MonoidContext::new(roots_poly(&roots), SetSpec::Integers, p).unwrap();
        let report = verify_divisor_theory(&ctx, DEFAULT_WITNESS_BOUND).unwrap();
        assert!(report.holds(), "roots {roots:?} at {p}");
    }
}

#[test]
fn global_invariants() {
    let f = roots_poly(&[0, 1, 2]);
    assert_eq!(critical_primes(&f, &SetSpec::Integers).unwrap(), vec![2, 3]);
    assert_eq!(fixed_divisor_global(&f, &SetSpec::Integers).unwrap(), int(6));
    let ctx = GlobalContext::new(f.clone(), SetSpec::Integers).unwrap();
    assert!(ctx.membership(&f.scale(&rat(1, 6))).unwrap().is_ok());
    assert!(ctx.membership(&f.scale(&rat(1, 12))).unwrap().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phi_is_additive_on_samples(
        roots in prop::collection::btree_set(-6i64..6, 1..4),
        p in prop::sample::select(vec![2u64, 3]),
        seed in any::<u64>(),
    ) {
        let roots: Vec<i64> = roots.into_iter().collect();
        let ctx = MonoidContext::new(roots_poly(&roots), SetSpec::Integers, p).unwrap();
        let xs = ctx.sample_monoid(6, 2, seed).unwrap();
        for pair in xs.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let sum = phi_local(a, &ctx).unwrap().add(&phi_local(b, &ctx).unwrap()).unwrap();
            prop_assert_eq!(phi_local(&a.mul(b), &ctx).unwrap(), sum);
            prop_assert!(ctx.in_monoid(&a.mul(b)).unwrap().is_member());
        }
    }
}
