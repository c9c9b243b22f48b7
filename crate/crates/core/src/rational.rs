//! Small helpers around arbitrary-precision rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // huge numerator/denominator pairs: fall back to ratio of floats
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parse "p/q" or "p".
pub fn parse_q(s: &str) -> Result<Q> {
    s.trim()
        .parse::<Q>()
        .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
}

pub fn pow_q(x: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// Determinant of a dense rational matrix by fraction-exact Gaussian elimination.
pub fn det_q(rows: &[Vec<Q>]) -> Q {
    let n = rows.len();
    let mut a: Vec<Vec<Q>> = rows.to_vec();
    let mut det = Q::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let piv = a[col][col].clone();
        det *= &piv;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &piv;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// Solve for coordinates of `targets` in the span of `basis` (all vectors of equal length).
/// Returns one coordinate row per target, or `None` if some target is outside the span
/// or the basis is dependent.
pub fn coordinates_in_basis(basis: &[Vec<Q>], targets: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let k = basis.len();
    if k == 0 {
        return if targets.iter().all(|t| t.iter().all(Zero::is_zero)) {
            Some(vec![Vec::new(); targets.len()])
        } else {
            None
        };
    }
    let len = basis[0].len();
    // augmented system: columns = basis vectors, rhs = targets
    let mut a: Vec<Vec<Q>> = (0..len)
        .map(|r| {
            let mut row: Vec<Q> = basis.iter().map(|b| b[r].clone()).collect();
            row.extend(targets.iter().map(|t| t[r].clone()));
            row
        })
        .collect();
    let width = k + targets.len();
    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(k);
    for col in 0..k {
        let Some(p) = (pivot_row..len).find(|&r| !a[r][col].is_zero()) else {
            return None;
        };
        a.swap(p, pivot_row);
        let inv = a[pivot_row][col].recip();
        for c in col..width {
            a[pivot_row][c] *= &inv;
        }
        for r in 0..len {
            if r == pivot_row || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..width {
                let sub = &f * &a[pivot_row][c];
                a[r][c] -= sub;
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    // consistency: remaining rows must be zero on rhs
    for row in a.iter().skip(pivot_row) {
        if row[k..].iter().any(|x| !x.is_zero()) {
            return None;
        }
    }
    Some(
        (0..targets.len())
            .map(|t| pivots.iter().map(|&r| a[r][k + t].clone()).collect())
            .collect(),
    )
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

/// Serde helper writing a rational as its `"p/q"` string.
pub fn serialize_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn deserialize_q<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
    let s = <String as serde::Deserialize>::deserialize(d)?;
    parse_q(&s).map_err(serde::de::Error::custom)
}
