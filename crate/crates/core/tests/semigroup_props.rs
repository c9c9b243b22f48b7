use loopfock::matrix::in_gl0;
use loopfock::samples::{random_gl0_unit, random_integral_matrix, random_scale, rng};
use loopfock::semigroup::{commutation_scalar, convolve_raw, MeasuredElement};
use num_traits::{One, Zero};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn product_projects_to_matrix_product(seed in any::<u64>(), n in 2usize..=3, l1 in -2i64..=2, l2 in -2i64..=2) {
        let mut r = rng(seed);
        let a = MeasuredElement { l: l1, ..MeasuredElement::with_scale(random_integral_matrix(&mut r, n), random_scale(&mut r)).unwrap() };
        let b = MeasuredElement { l: l2, ..MeasuredElement::with_scale(random_integral_matrix(&mut r, n), random_scale(&mut r)).unwrap() };
        let p = convolve_raw(&a, &b).unwrap();
        prop_assert_eq!(p.l, l1 + l2);
        prop_assert!(p.g.agrees_with(&a.g.mul(&b.g)));
        // kernel positivity
        prop_assert!(p.mu.scale > loopfock::Q::zero());
    }

    #[test]
    fn units_with_unimodular_constant_term_commute_with_t(seed in any::<u64>(), n in 2usize..=3, k in 1i64..=3) {
        let u = random_gl0_unit(&mut rng(seed), n);
        prop_assert!(in_gl0(&u).unwrap());
        prop_assert!(commutation_scalar(&u, k).unwrap().is_one());
    }
}
