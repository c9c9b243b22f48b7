//! Seeded random inputs shared by the verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fock::{GaussPoly, Monomial, Scalar, Slot};
use crate::matrix::{val_det, LoopMatrix};
use crate::rational::{q, qr, Q};
use crate::series::TruncatedSeries;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer polynomial of degree `< len` with coefficients in `[-c, c]`.
pub fn random_poly(rng: &mut impl Rng, len: usize, c: i64) -> TruncatedSeries {
    let cs: Vec<i64> = (0..len).map(|_| rng.random_range(-c..=c)).collect();
    TruncatedSeries::poly_i64(&cs)
}

/// Matrix over `R` with nonzero determinant and entries of degree `<= 2`.
pub fn random_integral_matrix(rng: &mut impl Rng, n: usize) -> LoopMatrix {
    loop {
        let g = LoopMatrix::from_fn(n, |_, _| random_poly(rng, 3, 2));
        if val_det(&g).is_ok() {
            return g;
        }
    }
}

fn unitriangular(rng: &mut impl Rng, n: usize, lower: bool) -> LoopMatrix {
    LoopMatrix::from_fn(n, |i, j| {
        if i == j {
            TruncatedSeries::one()
        } else if (i > j) == lower {
            random_poly(rng, 2, 2)
        } else {
            TruncatedSeries::zero()
        }
    })
}

/// Element of `GL_n(R)` whose constant term has determinant `+-1`.
pub fn random_gl0_unit(rng: &mut impl Rng, n: usize) -> LoopMatrix {
    let sign = if rng.random_bool(0.5) { -1 } else { 1 };
    let d = LoopMatrix::diag(
        (0..n)
            .map(|i| TruncatedSeries::poly_i64(&[if i == 0 { sign } else { 1 }, rng.random_range(-1..=1)]))
            .collect(),
    );
    unitriangular(rng, n, true).mul(&d).mul(&unitriangular(rng, n, false))
}

/// Element of `M'_n(R) ∩ GL_n(F)_0` with elementary divisors of degree `<= 2`.
pub fn random_gl0_matrix(rng: &mut impl Rng, n: usize) -> LoopMatrix {
    let k: Vec<i64> = (0..n).map(|_| rng.random_range(0..=2)).collect();
    random_gl0_unit(rng, n)
        .mul(&LoopMatrix::t_power_diag(&k))
        .mul(&random_gl0_unit(rng, n))
}

/// Element of `GL_n(R)` with arbitrary nonzero `det u(0)`.
pub fn random_unit(rng: &mut impl Rng, n: usize) -> LoopMatrix {
    loop {
        let u = LoopMatrix::from_fn(n, |_, _| random_poly(rng, 2, 3));
        if val_det(&u).is_ok_and(|(v, _)| v == 0) {
            return u;
        }
    }
}

pub fn random_scale(rng: &mut impl Rng) -> Q {
    qr(rng.random_range(1..=9), rng.random_range(1..=9))
}

pub fn random_rational(rng: &mut impl Rng, c: i64) -> Q {
    q(rng.random_range(-c..=c))
}

/// Polynomial times Gaussian with up to `terms` monomials of degree `<= 3`
/// in the slots of depth `<= depth`, small rational coefficients and scalar exponents.
pub fn random_gauss_poly(rng: &mut impl Rng, m: usize, depth: u32, terms: usize) -> GaussPoly {
    let picked = (0..terms).map(|_| {
        let deg = rng.random_range(0..=3);
        let slots = (0..deg)
            .map(|_| Slot::new(rng.random_range(1..=depth), rng.random_range(1..=m as u32)))
            .collect();
        let c = Scalar::monomial(
            qr(rng.random_range(-4..=4), rng.random_range(1..=3)),
            rng.random_range(-1..=1),
            rng.random_range(-1..=1),
        );
        (Monomial::from_slots(slots), c)
    });
    GaussPoly::from_terms(m, depth, depth, picked).expect("slots lie inside the ambient depth")
}
