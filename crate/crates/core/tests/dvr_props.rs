use loopfock::dvr::{lattice_quotient_from, smith_decompose};
use loopfock::matrix::{loop_inner_product, orthogonality_check, val_det};
use loopfock::rational::qr;
use loopfock::{LoopMatrix, TruncatedSeries};
use proptest::prelude::*;

fn matrix_strategy() -> impl Strategy<Value = LoopMatrix> {
    (2usize..=3).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(-2i64..=2, 0..4), n * n).prop_map(move |cs| {
            let mut it = cs.into_iter();
            LoopMatrix::from_fn(n, |_, _| {
                TruncatedSeries::poly_i64(&it.next().unwrap()).truncate(12)
            })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn smith_form_reconstructs(g in matrix_strategy()) {
        let Ok((v, _)) = val_det(&g) else { return Ok(()) };
        let d = smith_decompose(&g).unwrap();
        prop_assert!(d.k.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(d.k.iter().all(|&k| k >= 0));
        prop_assert_eq!(d.k.iter().sum::<i64>(), v);
        prop_assert!(d.reconstruct().agrees_with(&g));
        prop_assert!(d.certified >= 12 - v);
        let lq = lattice_quotient_from(&g, &d).unwrap();
        prop_assert_eq!(lq.dim as i64, v);
        prop_assert_eq!(lq.basis.len(), lq.dim);
    }
}

fn rotation() -> LoopMatrix {
    let m = |c: i64, e: i64| TruncatedSeries::monomial(qr(c, 5), e);
    LoopMatrix::from_rows(vec![vec![m(3, 0), m(4, 1)], vec![m(-4, -1), m(3, 0)]]).unwrap()
}

fn laurent_vec() -> impl Strategy<Value = Vec<TruncatedSeries>> {
    prop::collection::vec(prop::collection::vec((-3i64..=3, -4i64..=4), 0..4), 2).prop_map(|comps| {
        comps
            .into_iter()
            .map(|ts| {
                TruncatedSeries::from_terms(ts.into_iter().map(|(e, c)| (e, qr(c, 1))), None)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn orthogonal_loops_preserve_inner_product(u in laurent_vec(), v in laurent_vec()) {
        let g = rotation();
        prop_assert!(orthogonality_check(&g));
        prop_assert_eq!(loop_inner_product(&g.apply(&u), &g.apply(&v)), loop_inner_product(&u, &v));
    }
}
