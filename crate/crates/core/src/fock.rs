//! Polynomial-times-Gaussian functions on `R^n_-` with exact coefficients in
//! `Q[s^{±1}, rho^{±1}]`, where `s` stands for `1/(2 pi)` and `rho` for `c^{-1/2}`.
//!
//! A [`GaussPoly`] carries an ambient depth `D` (largest `i` of any variable
//! `x_{-i}^a`) and an exactness window `W`: coefficients of monomials that only
//! involve depths `<= W` agree with the untruncated model. Monomials outside the
//! window are dropped after every operation, which is sound because no operation
//! here moves a monomial from outside the window back inside it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{parse_q, q, q_to_f64, Q};

/// Element of `Q[s^{±1}, rho^{±1}]`, keyed by `(s exponent, rho exponent)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Scalar {
    terms: BTreeMap<(i64, i64), Q>,
}

impl Scalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Q::one(), 0, 0)
    }

    pub fn rational(c: Q) -> Self {
        Self::monomial(c, 0, 0)
    }

    /// `c s^a rho^b`.
    pub fn monomial(c: Q, a: i64, b: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((a, b), c);
        }
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64, &Q)> {
        self.terms.iter().map(|(&(a, b), c)| (a, b, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: (i64, i64), c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &other.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, x)| (*k, x * c)).collect(),
        }
    }

    /// Multiply by `s^a rho^b`.
    pub fn shift(&self, a: i64, b: i64) -> Self {
        Self {
            terms: self.terms.iter().map(|(&(x, y), c)| ((x + a, y + b), c.clone())).collect(),
        }
    }

    pub fn eval(&self, s: f64, rho: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| q_to_f64(c) * s.powi(a as i32) * rho.powi(b as i32))
            .sum()
    }

    /// Value with `s = 1/(2 pi)` and `rho^m = lambda`.
    pub fn eval_lambda(&self, lambda: f64, m: usize) -> f64 {
        self.eval(1.0 / (2.0 * std::f64::consts::PI), lambda.powf(1.0 / m as f64))
    }

    /// The single rational coefficient if `self = c s^a rho^b`.
    pub fn as_monomial(&self) -> Option<(Q, i64, i64)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (&(a, b), c) = self.terms.iter().next().unwrap();
        Some((c.clone(), a, b))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(&(a, b), c)| json!([c.to_string(), a, b]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("scalar must be an array of [q, a, b]".into()))?;
        let mut out = Self::zero();
        for t in arr {
            let (Some(c), Some(a), Some(b)) = (t[0].as_str(), t[1].as_i64(), t[2].as_i64()) else {
                return Err(Error::Parse(format!("bad scalar term {t}")));
            };
            out.add_term((a, b), parse_q(c)?);
        }
        Ok(out)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (&(a, b), c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if a != 0 {
                write!(f, " s^{a}")?;
            }
            if b != 0 {
                write!(f, " rho^{b}")?;
            }
        }
        Ok(())
    }
}

/// Gaussian moment `∫ y^e exp(-pi c y^2) dy` in scalar form.
pub fn moment(e: u32) -> Scalar {
    if e % 2 == 1 {
        return Scalar::zero();
    }
    let k = (e / 2) as i64;
    let mut df = Q::one();
    for j in 1..=k {
        df *= q(2 * j - 1);
    }
    Scalar::monomial(df, k, 2 * k + 1)
}

/// The variable `x_{-depth}^{coord}`; both indices start at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub depth: u32,
    pub coord: u32,
}

impl Slot {
    pub fn new(depth: u32, coord: u32) -> Self {
        Self { depth, coord }
    }
}

/// Sorted multiset of slots, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<Slot>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn from_slots(mut slots: Vec<Slot>) -> Self {
        slots.sort();
        Self(slots)
    }

    pub fn slots(&self) -> &[Slot] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn max_depth(&self) -> u32 {
        self.0.last().map_or(0, |s| s.depth)
    }

    pub fn multiplicity(&self, s: Slot) -> u32 {
        self.0.iter().filter(|&&x| x == s).count() as u32
    }

    pub fn times(&self, s: Slot) -> Self {
        let pos = self.0.partition_point(|&x| x <= s);
        let mut v = self.0.clone();
        v.insert(pos, s);
        Self(v)
    }

    /// Remove one copy of `s`, if present.
    pub fn without(&self, s: Slot) -> Option<Self> {
        let pos = self.0.iter().position(|&x| x == s)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(Self(v))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|s| format!("x[{},{}]", s.depth, s.coord)).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// `(sum of terms) * phi_c` with `phi_c = exp(-pi c sum x^2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussPoly {
    m: usize,
    depth: u32,
    window: u32,
    terms: BTreeMap<Monomial, Scalar>,
}

impl GaussPoly {
    /// The Gaussian `phi_c` itself, exact on the whole ambient depth.
    pub fn gaussian(m: usize, depth: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::one(), Scalar::one());
        Self {
            m,
            depth,
            window: depth,
            terms,
        }
    }

    pub fn zero(m: usize, depth: u32, window: u32) -> Self {
        Self {
            m,
            depth,
            window: window.min(depth),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        m: usize,
        depth: u32,
        window: u32,
        terms: impl IntoIterator<Item = (Monomial, Scalar)>,
    ) -> Result<Self> {
        let mut out = Self::zero(m, depth, window);
        for (mono, c) in terms {
            for s in mono.slots() {
                out.check_slot(*s)?;
            }
            out.add_term(mono, c);
        }
        out.prune();
        Ok(out)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mono: &Monomial) -> Scalar {
        self.terms.get(mono).cloned().unwrap_or_default()
    }

    fn check_slot(&self, s: Slot) -> Result<()> {
        if s.coord == 0 || s.coord as usize > self.m || s.depth == 0 {
            return Err(Error::Invalid(format!(
                "slot ({}, {}) outside 1..={} coordinates",
                s.depth, s.coord, self.m
            )));
        }
        if s.depth > self.depth {
            return Err(Error::DepthOverflow {
                depth: s.depth,
                max: self.depth,
            });
        }
        Ok(())
    }

    fn add_term(&mut self, mono: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(x) => {
                *x = x.add(&c);
                if x.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    fn prune(&mut self) {
        let w = self.window;
        self.terms.retain(|mono, _| mono.max_depth() <= w);
    }

    /// Shrink the window to `w` (and the ambient depth with it), dropping monomials outside.
    pub fn restrict_to_window(&self, w: u32) -> Self {
        let mut out = self.clone();
        out.window = out.window.min(w);
        out.depth = out.window;
        out.prune();
        out
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch(format!(
                "GaussPoly with {} and {} coordinates",
                self.m, other.m
            )));
        }
        Ok(())
    }

    /// Sum; the result is exact on the smaller of the two windows.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.window = self.window.min(other.window);
        out.depth = self.depth.max(other.depth);
        for (mono, c) in &other.terms {
            out.add_term(mono.clone(), c.clone());
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&Scalar::one().neg()))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.m, self.depth, self.window);
        for (mono, x) in &self.terms {
            out.add_term(mono.clone(), x.mul(c));
        }
        out
    }

    pub fn mul_var(&self, s: Slot) -> Result<Self> {
        self.check_slot(s)?;
        let mut out = Self::zero(self.m, self.depth, self.window);
        for (mono, c) in &self.terms {
            out.add_term(mono.times(s), c.clone());
        }
        out.prune();
        Ok(out)
    }

    /// `d/dx_s`, including the Gaussian factor: `d(p phi) = (dp - s^{-1} rho^{-2} x p) phi`.
    pub fn derive(&self, s: Slot) -> Result<Self> {
        self.check_slot(s)?;
        if s.depth > self.window {
            return Err(Error::WindowExhausted(format!(
                "derivative at depth {} outside window {}",
                s.depth, self.window
            )));
        }
        Ok(self.derive_unchecked(s))
    }

    /// Derivative without the window check; callers guarantee the result is only
    /// read where it is exact.
    pub(crate) fn derive_unchecked(&self, s: Slot) -> Self {
        let gauss = Scalar::monomial(-Q::one(), -1, -2);
        let mut out = Self::zero(self.m, self.depth, self.window);
        for (mono, c) in &self.terms {
            let e = mono.multiplicity(s);
            if e > 0 {
                out.add_term(mono.without(s).unwrap(), c.scale(&q(e as i64)));
            }
            if s.depth <= self.window {
                out.add_term(mono.times(s), c.mul(&gauss));
            }
        }
        out.prune();
        out
    }

    /// `sum_{(a, b) in pairs} sum_{i >= 1} x_{-(i+db)}^b d/dx_{-(i+da)}^a f`, kept on window `out_window`.
    ///
    /// The result is exact on `out_window` provided `out_window + da - db <= W`
    /// (every contributing input monomial then lies in the input window).
    pub fn vector_field(&self, pairs: &[(u32, u32)], da: u32, db: u32, out_window: u32) -> Self {
        let w = out_window.min(self.window);
        let mut out = Self::zero(self.m, self.depth, w);
        let gauss = Scalar::monomial(-Q::one(), -1, -2);
        for (mono, c) in &self.terms {
            let slots = mono.slots();
            for (k, sl) in slots.iter().enumerate() {
                if k > 0 && slots[k - 1] == *sl {
                    continue;
                }
                if sl.depth <= da {
                    continue;
                }
                let i = sl.depth - da;
                for &(a, b) in pairs {
                    if sl.coord != a || i + db > w {
                        continue;
                    }
                    let e = mono.multiplicity(*sl) as i64;
                    let new = mono.without(*sl).unwrap().times(Slot::new(i + db, b));
                    if new.max_depth() <= w {
                        out.add_term(new, c.scale(&q(e)));
                    }
                }
            }
            if mono.max_depth() > w {
                continue;
            }
            let cg = c.mul(&gauss);
            for &(a, b) in pairs {
                let mut i = 1;
                while i + da.max(db) <= w {
                    let new = mono.times(Slot::new(i + da, a)).times(Slot::new(i + db, b));
                    out.add_term(new, cg.clone());
                    i += 1;
                }
            }
        }
        out
    }

    /// Copy with the window lowered to `w` and out-of-window monomials dropped.
    pub fn with_window(&self, w: u32) -> Self {
        let mut out = self.clone();
        out.window = out.window.min(w);
        out.prune();
        out
    }

    /// Integrate out the depth-1 variables of the coordinates in `coords` and shift
    /// those coordinates up one depth.
    fn integrate_depth_one(&self, coords: &[u32]) -> Result<Self> {
        if self.window == 0 {
            return Err(Error::WindowExhausted("integration needs window >= 1".into()));
        }
        let mut out = Self::zero(self.m, self.depth, self.window - 1);
        let chosen = |c: u32| coords.contains(&c);
        for (mono, c) in &self.terms {
            let mut exps = vec![0u32; self.m + 1];
            let mut rest = Vec::with_capacity(mono.degree());
            for s in mono.slots() {
                if chosen(s.coord) {
                    if s.depth == 1 {
                        exps[s.coord as usize] += 1;
                    } else {
                        rest.push(Slot::new(s.depth - 1, s.coord));
                    }
                } else {
                    rest.push(*s);
                }
            }
            let mut f = c.clone();
            for &a in coords {
                f = f.mul(&moment(exps[a as usize]));
                if f.is_zero() {
                    break;
                }
            }
            out.add_term(Monomial::from_slots(rest), f);
        }
        out.prune();
        Ok(out)
    }

    /// `pi_t f(x_{-1}, x_{-2}, ...) = ∫ f(y, x_{-1}, ...) dy`.
    pub fn pi_t(&self) -> Result<Self> {
        let all: Vec<u32> = (1..=self.m as u32).collect();
        let mut out = self.integrate_depth_one(&all)?;
        out.depth = self.depth.saturating_sub(1).max(out.window);
        Ok(out)
    }

    /// `pi_t` restricted to coordinate `a`.
    pub fn pi_t_partial(&self, a: u32) -> Result<Self> {
        if a == 0 || a as usize > self.m {
            return Err(Error::Invalid(format!("coordinate {a} outside 1..={}", self.m)));
        }
        self.integrate_depth_one(&[a])
    }

    /// `∫ f(x_{-1}^1, ..., x_{-1}^k, 0, 0, ...) dx` over the first `k` depth-1 coordinates.
    pub fn slice_integral(&self, k: usize) -> Result<Scalar> {
        if k > self.m {
            return Err(Error::Invalid(format!("slice of {k} coordinates with m = {}", self.m)));
        }
        if self.window == 0 {
            return Err(Error::WindowExhausted("slice integral needs window >= 1".into()));
        }
        let mut total = Scalar::zero();
        for (mono, c) in &self.terms {
            if mono.slots().iter().any(|s| s.depth != 1 || s.coord as usize > k) {
                continue;
            }
            let mut f = c.clone();
            for a in 1..=k as u32 {
                f = f.mul(&moment(mono.multiplicity(Slot::new(1, a))));
            }
            total = total.add(&f);
        }
        Ok(total)
    }

    /// Value at `point` (flattened, slot `(i, a)` at index `(i-1) m + a - 1`) with `rho^m = lambda`.
    pub fn eval_numeric(&self, point: &[f64], lambda: f64) -> Result<f64> {
        let needed = self.depth as usize * self.m;
        if point.len() < needed {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} for {} variables",
                point.len(),
                needed
            )));
        }
        let c = lambda.powf(-2.0 / self.m as f64);
        let r2: f64 = point.iter().map(|x| x * x).sum();
        Ok(self.eval_polynomial(point, lambda) * (-std::f64::consts::PI * c * r2).exp())
    }

    /// Polynomial part only, without the Gaussian factor.
    pub fn eval_polynomial(&self, point: &[f64], lambda: f64) -> f64 {
        let s = 1.0 / (2.0 * std::f64::consts::PI);
        let rho = lambda.powf(1.0 / self.m as f64);
        self.terms
            .iter()
            .map(|(mono, c)| {
                let x: f64 = mono
                    .slots()
                    .iter()
                    .map(|sl| point[(sl.depth as usize - 1) * self.m + sl.coord as usize - 1])
                    .product();
                c.eval(s, rho) * x
            })
            .sum()
    }

    /// Equality of all coefficients on monomials of depth `<= w`.
    pub fn agrees_on_window(&self, other: &Self, w: u32) -> bool {
        let a = self.terms.iter().filter(|(m, _)| m.max_depth() <= w);
        let b = other.terms.iter().filter(|(m, _)| m.max_depth() <= w);
        a.eq(b)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "D": self.depth,
            "W": self.window,
            "terms": self.terms.iter().map(|(mono, c)| json!({
                "mono": mono.slots().iter().map(|s| json!([s.depth, s.coord])).collect::<Vec<_>>(),
                "coef": c.to_json(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |k: &str| {
            v[k].as_u64()
                .ok_or_else(|| Error::Parse(format!("missing integer \"{k}\"")))
        };
        let (m, depth, window) = (field("m")? as usize, field("D")? as u32, field("W")? as u32);
        let terms = v["terms"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing \"terms\" array".into()))?;
        let mut parsed = Vec::with_capacity(terms.len());
        for t in terms {
            let slots = t["mono"]
                .as_array()
                .ok_or_else(|| Error::Parse("term needs \"mono\"".into()))?
                .iter()
                .map(|p| match (p[0].as_u64(), p[1].as_u64()) {
                    (Some(i), Some(a)) => Ok(Slot::new(i as u32, a as u32)),
                    _ => Err(Error::Parse(format!("bad slot {p}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            parsed.push((Monomial::from_slots(slots), Scalar::from_json(&t["coef"])?));
        }
        Self::from_terms(m, depth, window, parsed)
    }
}

impl fmt::Display for GaussPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 [D={}, W={}]", self.depth, self.window);
        }
        for (k, (mono, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}) {mono}")?;
        }
        write!(f, " [D={}, W={}]", self.depth, self.window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    fn x(i: u32, a: u32) -> Slot {
        Slot::new(i, a)
    }

    fn mono(sl: &[(u32, u32)]) -> Monomial {
        Monomial::from_slots(sl.iter().map(|&(i, a)| x(i, a)).collect())
    }

    #[test]
    fn gaussian_basics() {
        let phi = GaussPoly::gaussian(2, 6);
        assert_eq!(phi.len(), 1);
        assert_eq!(phi.coeff(&Monomial::one()), Scalar::one());
        assert_eq!(phi.eval_numeric(&[0.0; 12], 1.0).unwrap(), 1.0);
        let mut p = [0.0; 12];
        p[3] = 1.0;
        let v = phi.eval_numeric(&p, 1.0).unwrap();
        assert!((v - (-std::f64::consts::PI).exp()).abs() < 1e-15);
        let lifted = phi.pi_t().unwrap();
        assert_eq!(lifted.coeff(&Monomial::one()), Scalar::monomial(q(1), 0, 2));
        assert_eq!(lifted.window(), 5);
    }

    #[test]
    fn derivative_examples() {
        let phi = GaussPoly::gaussian(2, 4);
        let g = Scalar::monomial(q(-1), -1, -2);
        let d = phi.derive(x(1, 2)).unwrap();
        assert_eq!(d.coeff(&mono(&[(1, 2)])), g);
        assert_eq!(d.len(), 1);
        let d = phi.mul_var(x(1, 2)).unwrap().derive(x(1, 2)).unwrap();
        assert_eq!(d.coeff(&Monomial::one()), Scalar::one());
        assert_eq!(d.coeff(&mono(&[(1, 2), (1, 2)])), g);
        let d = phi.mul_var(x(2, 1)).unwrap().derive(x(1, 2)).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.coeff(&mono(&[(1, 2), (2, 1)])), g);
    }

    #[test]
    fn multiplication_commutes() {
        let phi = GaussPoly::gaussian(2, 4);
        let a = phi.mul_var(x(1, 1)).unwrap().mul_var(x(2, 2)).unwrap();
        let b = phi.mul_var(x(2, 2)).unwrap().mul_var(x(1, 1)).unwrap();
        assert_eq!(a, b);
        let a = phi.mul_var(x(1, 1)).unwrap().derive(x(2, 2)).unwrap();
        let b = phi.derive(x(2, 2)).unwrap().mul_var(x(1, 1)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(phi.mul_var(x(5, 1)), Err(Error::DepthOverflow { .. })));
    }

    #[test]
    fn integration_moments() {
        let phi = GaussPoly::gaussian(2, 4);
        assert!(phi.mul_var(x(1, 1)).unwrap().pi_t().unwrap().is_zero());
        let sq = phi.mul_var(x(1, 1)).unwrap().mul_var(x(1, 1)).unwrap().pi_t().unwrap();
        assert_eq!(sq.coeff(&Monomial::one()), Scalar::monomial(q(1), 1, 4));
        let sh = phi.mul_var(x(2, 1)).unwrap().pi_t().unwrap();
        assert_eq!(sh.coeff(&mono(&[(1, 1)])), Scalar::monomial(q(1), 0, 2));
        assert_eq!(
            phi.pi_t_partial(1).unwrap().coeff(&Monomial::one()),
            Scalar::monomial(q(1), 0, 1)
        );
        let f = phi.mul_var(x(1, 2)).unwrap();
        let g = f.pi_t_partial(1).unwrap();
        assert_eq!(g.coeff(&mono(&[(1, 2)])), Scalar::monomial(q(1), 0, 1));
        let mut empty = GaussPoly::gaussian(1, 1).pi_t().unwrap();
        empty = empty.restrict_to_window(0);
        assert!(matches!(empty.pi_t(), Err(Error::WindowExhausted(_))));
    }

    #[test]
    fn moments_match_recursion() {
        // M_{2k} = (2k-1)/(2 pi c) M_{2k-2}, M_0 = c^{-1/2}; 1/(2 pi c) = s rho^2
        let mut expect = Scalar::monomial(q(1), 0, 1);
        for k in 1..8u32 {
            expect = expect.mul(&Scalar::monomial(q(2 * k as i64 - 1), 1, 2));
            assert_eq!(moment(2 * k), expect);
            assert!(moment(2 * k - 1).is_zero());
        }
    }

    #[test]
    fn slice_examples() {
        let phi = GaussPoly::gaussian(3, 3);
        assert_eq!(phi.slice_integral(3).unwrap(), Scalar::monomial(q(1), 0, 3));
        assert!(phi.mul_var(x(1, 1)).unwrap().slice_integral(2).unwrap().is_zero());
        assert!(phi.mul_var(x(2, 1)).unwrap().slice_integral(3).unwrap().is_zero());
    }

    #[test]
    fn scalar_evaluation_is_multiplicative() {
        let a = Scalar::monomial(qr(3, 2), 1, -2).add(&Scalar::monomial(q(-2), 0, 3));
        let b = Scalar::monomial(qr(1, 7), -1, 1).add(&Scalar::one());
        let (s, r) = (0.159, 1.3);
        assert!((a.mul(&b).eval(s, r) - a.eval(s, r) * b.eval(s, r)).abs() < 1e-12);
        assert_eq!(a.sub(&a), Scalar::zero());
    }

    #[test]
    fn json_round_trip() {
        let phi = GaussPoly::gaussian(2, 3);
        let f = phi
            .mul_var(x(1, 1))
            .unwrap()
            .derive(x(2, 2))
            .unwrap()
            .add(&phi.scale(&Scalar::monomial(qr(-5, 3), 2, -1)))
            .unwrap();
        assert_eq!(GaussPoly::from_json(&f.to_json()).unwrap(), f);
    }
}
