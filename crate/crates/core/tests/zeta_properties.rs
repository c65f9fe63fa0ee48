use num_bigint::BigInt;
use num_traits::{One, Signed};
use proptest::prelude::*;

use shadow_core::poly::RationalFunc;
use shadow_core::zeta::{
    poincare_from_shadow_data, sl2_closed_form, sl2_shadow_data, sl3_table, sl3_transition_poly, theorem_c,
    zeta_from_poincare,
};

const PRIMES: [u64; 12] = [5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43];

fn assert_counting_series(f: &RationalFunc, terms: usize) {
    for (k, c) in f.series(terms).iter().enumerate() {
        assert!(c.is_integer() && !c.is_negative(), "coefficient {k} is {c}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sl3_formula_agrees_with_closed_form(idx in 0usize..PRIMES.len()) {
        let q = PRIMES[idx];
        let table = sl3_table(q, false, 0).unwrap();
        let p = poincare_from_shadow_data(&table.shadow_data().unwrap()).unwrap();
        prop_assert!(zeta_from_poincare(&p, q).equals(&theorem_c(q)));
        prop_assert!(p.series(1)[0].is_one());
        assert_counting_series(&p, 8);
    }

    #[test]
    fn level_one_transitions_partition_nonzero_vectors(idx in 0usize..PRIMES.len()) {
        let q = PRIMES[idx];
        let total: BigInt = ["L", "J", "R"].iter().map(|t| sl3_transition_poly("SL", t).unwrap().eval(q)).sum();
        prop_assert_eq!(total, BigInt::from(q).pow(8) - 1);
    }

    #[test]
    fn sl2_formula_agrees_with_closed_form(q in prop::sample::select(vec![3u64, 5, 7, 11, 13, 101])) {
        let data = sl2_shadow_data(q, BigInt::from(q).pow(3) - 1);
        let p = poincare_from_shadow_data(&data).unwrap();
        prop_assert!(zeta_from_poincare(&p, q).equals(&sl2_closed_form(q)));
        assert_counting_series(&p, 6);
    }
}
