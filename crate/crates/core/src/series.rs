//! Truncated Laurent series in `t` with exact rational coefficients.
//!
//! A series carries an optional truncation order `T`: coefficients of `t^e`
//! with `e >= T` are *unknown*, not zero. `order == None` marks an exact
//! Laurent polynomial.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{parse_q, Q};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TruncatedSeries {
    coeffs: BTreeMap<i64, Q>,
    order: Option<i64>,
}

fn min_order(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

fn add_order(a: Option<i64>, k: i64) -> Option<i64> {
    a.map(|x| x + k)
}

impl TruncatedSeries {
    /// Exact zero.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(c, 0)
    }

    /// Exact `c t^e`.
    pub fn monomial(c: Q, e: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(e, c);
        }
        Self { coeffs, order: None }
    }

    /// Build from `(exponent, coefficient)` pairs, dropping zeros and terms at or beyond `order`.
    pub fn from_terms<I: IntoIterator<Item = (i64, Q)>>(terms: I, order: Option<i64>) -> Self {
        let mut coeffs: BTreeMap<i64, Q> = BTreeMap::new();
        for (e, c) in terms {
            if order.is_some_and(|t| e >= t) {
                continue;
            }
            *coeffs.entry(e).or_insert_with(Q::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Self { coeffs, order }
    }

    /// Exact polynomial from integer coefficients `c_0 + c_1 t + ...`.
    pub fn poly_i64(cs: &[i64]) -> Self {
        Self::from_terms(
            cs.iter().enumerate().map(|(e, &c)| (e as i64, Q::from_integer(c.into()))),
            None,
        )
    }

    pub fn order(&self) -> Option<i64> {
        self.order
    }

    pub fn is_exact(&self) -> bool {
        self.order.is_none()
    }

    /// Forget everything at or beyond `t`.
    pub fn truncate(&self, t: i64) -> Self {
        let order = min_order(self.order, Some(t));
        Self::from_terms(self.coeffs.iter().map(|(e, c)| (*e, c.clone())), order)
    }

    pub fn with_order(mut self, order: Option<i64>) -> Self {
        if let Some(t) = order {
            self.coeffs.retain(|e, _| *e < t);
        }
        self.order = min_order(self.order, order);
        self
    }

    pub fn coeff(&self, e: i64) -> Q {
        self.coeffs.get(&e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Q)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    /// Smallest stored exponent; `None` when every known coefficient vanishes.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn leading(&self) -> Option<(i64, &Q)> {
        self.coeffs.iter().next().map(|(e, c)| (*e, c))
    }

    /// Largest stored exponent.
    pub fn degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn is_zero_up_to_precision(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.order.is_none()
    }

    /// Valuation, or the truncation order for a series that is zero up to precision.
    fn effective_valuation(&self) -> Option<i64> {
        self.valuation().or(self.order)
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c.clone())).collect(),
            order: self.order,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = min_order(self.order, other.order);
        Self::from_terms(
            self.terms()
                .chain(other.terms())
                .map(|(e, c)| (e, c.clone())),
            order,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(e, x)| (*e, x * c)).collect(),
            order: self.order,
        }
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            order: add_order(self.order, k),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero();
        }
        // product is certified up to min(v_a + T_b, v_b + T_a)
        let order = match (self.effective_valuation(), other.effective_valuation()) {
            (Some(va), Some(vb)) => min_order(add_order(other.order, va), add_order(self.order, vb)),
            _ => None,
        };
        let mut coeffs: BTreeMap<i64, Q> = BTreeMap::new();
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                let e = ea + eb;
                if order.is_some_and(|t| e >= t) {
                    continue;
                }
                *coeffs.entry(e).or_insert_with(Q::zero) += ca * cb;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        Self { coeffs, order }
    }

    /// Multiplicative inverse certified up to order `t` (or less if the input
    /// precision does not allow it). Exact monomials invert exactly.
    pub fn invert(&self, t: i64) -> Result<Self> {
        let (v, c0) = match self.leading() {
            Some((v, c)) => (v, c.clone()),
            None => return Err(Error::ZeroUpToPrecision),
        };
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(Self::monomial(c0.recip(), -v));
        }
        // self = t^v w, w(0) = c0; w^{-1} is needed to order t + v
        let w = self.shift(-v);
        let w_order = min_order(w.order, Some(t + v)).unwrap();
        let inv_c0 = c0.recip();
        let mut b: Vec<Q> = Vec::new();
        for k in 0..w_order.max(0) {
            // sum_{j=0}^{k} w_j b_{k-j} = [k == 0]
            let mut acc = if k == 0 { Q::one() } else { Q::zero() };
            for (j, wj) in w.coeffs.range(1..k + 1).filter(|_| k > 0) {
                acc -= wj * &b[(k - j) as usize];
            }
            b.push(acc * &inv_c0);
        }
        let inv_w = Self::from_terms(
            b.into_iter().enumerate().map(|(e, c)| (e as i64, c)),
            Some(w_order),
        );
        Ok(inv_w.shift(-v))
    }

    /// Keep exactly the strictly negative powers of `t`. The projection is exact
    /// once the series is known through `t^{-1}`.
    pub fn negative_part(&self) -> Result<Self> {
        if self.order.is_some_and(|t| t < 0) {
            return Err(Error::InsufficientPrecision(format!(
                "negative part needs order >= 0, have {:?}",
                self.order
            )));
        }
        Ok(Self {
            coeffs: self.coeffs.range(..0).map(|(e, c)| (*e, c.clone())).collect(),
            order: None,
        })
    }

    /// Substitute `t -> t^{-1}` (exact series only).
    pub fn invert_variable(&self) -> Result<Self> {
        if !self.is_exact() {
            return Err(Error::InsufficientPrecision(
                "t -> 1/t needs an exact Laurent polynomial".into(),
            ));
        }
        Ok(Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (-e, c.clone())).collect(),
            order: None,
        })
    }

    /// Equality of all coefficients known to both sides.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let order = min_order(self.order, other.order);
        self.sub(other)
            .with_order(order)
            .is_zero_up_to_precision()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coeffs
                .iter()
                .map(|(e, c)| json!([e, c.to_string()]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value, order: Option<i64>) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("series must be an array of [exp, \"p/q\"]".into()))?;
        let mut terms = Vec::with_capacity(arr.len());
        for item in arr {
            let pair = item
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse(format!("bad series term {item}")))?;
            let e = pair[0]
                .as_i64()
                .ok_or_else(|| Error::Parse(format!("bad exponent {}", pair[0])))?;
            let c = match &pair[1] {
                Value::String(s) => parse_q(s)?,
                Value::Number(n) if n.is_i64() => Q::from_integer(n.as_i64().unwrap().into()),
                other => return Err(Error::Parse(format!("bad coefficient {other}"))),
            };
            terms.push((e, c));
        }
        Ok(Self::from_terms(terms, order))
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.coeffs.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            match e {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a} t")?,
                _ => write!(f, "{a} t^{e}")?,
            }
        }
        if let Some(t) = self.order {
            write!(f, " + O(t^{t})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    #[test]
    fn geometric_series_inverse() {
        let a = TruncatedSeries::poly_i64(&[1, -1]);
        let inv = a.invert(4).unwrap();
        assert_eq!(inv, TruncatedSeries::from_terms((0..4).map(|e| (e, q(1))), Some(4)));
        let prod = a.mul(&inv);
        assert_eq!(prod.order(), Some(4));
        assert!(prod.agrees_with(&TruncatedSeries::one()));
    }

    #[test]
    fn inverse_of_one_and_two_plus_t() {
        let one = TruncatedSeries::one().truncate(4);
        assert!(one.invert(4).unwrap().agrees_with(&TruncatedSeries::one()));
        let a = TruncatedSeries::poly_i64(&[2, 1]);
        let inv = a.invert(2).unwrap();
        let expected = TruncatedSeries::from_terms([(0, qr(1, 2)), (1, qr(-1, 4))], Some(2));
        assert_eq!(inv, expected);
    }

    #[test]
    fn zero_is_rejected() {
        let z = TruncatedSeries::zero().truncate(5);
        assert_eq!(z.invert(3), Err(Error::ZeroUpToPrecision));
    }

    #[test]
    fn product_precision_tracks_valuations() {
        let a = TruncatedSeries::poly_i64(&[0, 0, 1]).truncate(6); // t^2 + O(t^6)
        let b = TruncatedSeries::poly_i64(&[3, 1]).truncate(5);
        let p = a.mul(&b);
        assert_eq!(p.order(), Some(6)); // min(2 + 5, 0 + 6)
        assert_eq!(p.coeff(2), q(3));
        assert_eq!(p.coeff(3), q(1));
    }

    #[test]
    fn laurent_inverse_of_monomial_times_unit() {
        let a = TruncatedSeries::poly_i64(&[0, 2, 1]); // 2t + t^2
        let inv = a.invert(3).unwrap();
        assert_eq!(inv.valuation(), Some(-1));
        assert!(a.mul(&inv).agrees_with(&TruncatedSeries::one()));
        assert_eq!(a.mul(&inv).order(), Some(4)); // inverse known to t^3, times t
    }

    #[test]
    fn negative_projection() {
        let x = TruncatedSeries::from_terms([(-1, q(1)), (0, q(1)), (1, q(1))], None);
        assert_eq!(
            x.negative_part().unwrap(),
            TruncatedSeries::monomial(q(1), -1)
        );
        assert!(TruncatedSeries::monomial(q(1), 3)
            .negative_part()
            .unwrap()
            .is_exact_zero());
    }
}
