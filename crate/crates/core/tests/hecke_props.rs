use loopfock::hecke::{circle_hecke, coset_representatives, mat_mul_i, padic_hecke, random_padic_matrix, FourierPoly, PAdicFunction};
use loopfock::rational::qr;
use loopfock::samples::rng;
use num_complex::Complex;
use proptest::prelude::*;

fn fourier() -> impl Strategy<Value = FourierPoly> {
    prop::collection::vec((-24i64..=24, -5i64..=5, -5i64..=5, 1i64..=3), 0..12).prop_map(|ts| {
        FourierPoly::from_terms(ts.into_iter().map(|(k, a, b, d)| (k, Complex::new(qr(a, d), qr(b, d)))))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn circle_operators_multiply(f in fourier(), m in 1i64..=6, n in 1i64..=6) {
        let mn = circle_hecke(m, &circle_hecke(n, &f).unwrap()).unwrap();
        prop_assert_eq!(&mn, &circle_hecke(m * n, &f).unwrap());
        prop_assert_eq!(&mn, &circle_hecke(n, &circle_hecke(m, &f).unwrap()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn padic_operators_multiply(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3])) {
        let mut r = rng(seed);
        let a = random_padic_matrix(&mut r, p, 2);
        let b = random_padic_matrix(&mut r, p, 2);
        let f = PAdicFunction::random(&mut r, p, 2, 2).unwrap();
        let lhs = padic_hecke(&a, &padic_hecke(&b, &f).unwrap()).unwrap();
        prop_assert_eq!(lhs, padic_hecke(&mat_mul_i(&a, &b), &f).unwrap());
    }

    #[test]
    fn coset_count_is_p_part_of_det(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5])) {
        let g = random_padic_matrix(&mut rng(seed), p, 2);
        let mut det = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).unsigned_abs();
        let mut part = 1;
        while det % p == 0 {
            det /= p;
            part *= p;
        }
        prop_assert_eq!(coset_representatives(&g, p).unwrap().len() as u64, part);
    }
}
