use loopfock::affine::{lie_bracket, CopyTag, LieElement, Model};
use loopfock::fock::{GaussPoly, Scalar, Slot};
use loopfock::rational::{q, qr};
use loopfock::samples::{random_gauss_poly, rng};
use proptest::prelude::*;

fn poly(seed: u64, m: usize) -> GaussPoly {
    random_gauss_poly(&mut rng(seed), m, 5, 6)
}

fn same_on_common_window(a: &GaussPoly, b: &GaussPoly) -> bool {
    let w = a.window().min(b.window());
    a.agrees_on_window(b, w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_shifts_through_pi_t(seed in any::<u64>(), i in 1u32..=3, a in 1u32..=2) {
        let f = poly(seed, 2);
        let lhs = f.pi_t().unwrap().mul_var(Slot::new(i, a)).unwrap();
        let rhs = f.mul_var(Slot::new(i + 1, a)).unwrap().pi_t().unwrap();
        prop_assert!(same_on_common_window(&lhs, &rhs));
    }

    #[test]
    fn derivative_shifts_through_pi_t(seed in any::<u64>(), i in 1u32..=3, a in 1u32..=2) {
        let f = poly(seed, 2);
        let lhs = f.pi_t().unwrap().derive(Slot::new(i, a)).unwrap();
        let rhs = f.derive(Slot::new(i + 1, a)).unwrap().pi_t().unwrap();
        prop_assert!(same_on_common_window(&lhs, &rhs));
    }

    #[test]
    fn pi_t_kills_depth_one_derivatives(seed in any::<u64>(), a in 1u32..=3) {
        let f = poly(seed, 3);
        prop_assert!(f.derive(Slot::new(1, a)).unwrap().pi_t().unwrap().is_zero());
    }

    #[test]
    fn partial_integrations_compose_to_pi_t(seed in any::<u64>()) {
        let f = poly(seed, 2);
        let both = f.pi_t_partial(1).unwrap().pi_t_partial(2).unwrap();
        let swapped = f.pi_t_partial(2).unwrap().pi_t_partial(1).unwrap();
        let full = f.pi_t().unwrap();
        prop_assert!(same_on_common_window(&both, &full));
        prop_assert!(same_on_common_window(&swapped, &full));
    }

    /// Up to six primitive operations on phi at depths D and D + 2.
    #[test]
    fn primitive_words_are_window_stable(ops in prop::collection::vec((0u8..3, 1u32..=3, 1u32..=2), 0..=6)) {
        let run = |depth: u32| -> GaussPoly {
            let mut f = GaussPoly::gaussian(2, depth);
            for &(op, i, a) in &ops {
                f = match op {
                    0 => f.mul_var(Slot::new(i, a)).unwrap(),
                    1 => f.derive(Slot::new(i, a)).unwrap(),
                    _ => f.pi_t().unwrap(),
                };
            }
            f
        };
        let (a, b) = (run(9), run(11));
        prop_assert!(b.window() >= a.window());
        prop_assert!(a.agrees_on_window(&b, a.window()));
    }

    #[test]
    fn generator_words_are_window_stable(seed in any::<u64>()) {
        let model = Model::vector(3);
        let word = model.random_word(&mut rng(seed), 6, 1);
        let depth = 2 + loopfock::affine::window_cost(&word);
        let a = model.apply_word(&word, &model.gaussian(depth)).unwrap();
        let b = model.apply_word(&word, &model.gaussian(depth + 2)).unwrap();
        prop_assert!(a.agrees_on_window(&b, a.window()));
    }
}

fn scalar() -> impl Strategy<Value = Scalar> {
    prop::collection::vec((-5i64..=5, 1i64..=4, -2i64..=2, -3i64..=3), 0..4).prop_map(|ts| {
        ts.into_iter()
            .fold(Scalar::zero(), |acc, (n, d, a, b)| acc.add(&Scalar::monomial(qr(n, d), a, b)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scalar_ring_laws(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.add(&b), b.add(&a));
        // canonical form: neutral operations are the identity on the representation
        prop_assert_eq!(a.add(&Scalar::zero()), a.clone());
        prop_assert_eq!(a.mul(&Scalar::one()), a.clone());
        prop_assert!(a.sub(&a).is_zero());
        let (s, rho) = (0.159, 1.3);
        let lhs = a.mul(&b).eval(s, rho);
        prop_assert!((lhs - a.eval(s, rho) * b.eval(s, rho)).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }
}

fn lie_element() -> impl Strategy<Value = LieElement> {
    let term = (1u32..=3, 1u32..=3, -2i64..=2, -3i64..=3);
    (prop::collection::vec(term, 1..4), -2i64..=2).prop_map(|(ts, k)| {
        let mut x = LieElement::central(CopyTag::Single, q(k));
        for (u, v, m, c) in ts {
            x.add_term(CopyTag::Single, u, v, m, q(c));
        }
        x
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bracket_is_a_lie_bracket(x in lie_element(), y in lie_element(), z in lie_element()) {
        prop_assert_eq!(lie_bracket(&x, &y), lie_bracket(&y, &x).scale(&q(-1)));
        let jacobi = lie_bracket(&x, &lie_bracket(&y, &z))
            .add(&lie_bracket(&y, &lie_bracket(&z, &x)))
            .add(&lie_bracket(&z, &lie_bracket(&x, &y)));
        prop_assert!(jacobi.is_zero(), "{}", jacobi);
    }
}
