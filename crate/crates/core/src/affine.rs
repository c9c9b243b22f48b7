//! Affine `sl_n` acting on the Fock model: abstract brackets, the differential
//! and integral operators for each generator, and the residual checks built on them.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::fock::{GaussPoly, Monomial, Scalar};
use crate::rational::{q, Q};

/// Which `sl_n` factor a generator belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CopyTag {
    /// The vector model on `R^n_-`.
    Single,
    /// Row action `x -> a x` on the matrix model.
    Left,
    /// Column action `x -> x b^T` on the matrix model.
    Right,
}

impl fmt::Display for CopyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CopyTag::Single => "single",
            CopyTag::Left => "left",
            CopyTag::Right => "right",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenKind {
    /// `E_uv`, `u != v`.
    OffDiag(u32, u32),
    /// `E_uu - E_vv`.
    Cartan(u32, u32),
    /// `E_uv` of `gl_n`, any `u, v`; only for nonnegative modes.
    Raw(u32, u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub kind: GenKind,
    pub mode: i64,
    pub copy: CopyTag,
}

impl Generator {
    pub fn offdiag(u: u32, v: u32, mode: i64) -> Self {
        Self {
            kind: GenKind::OffDiag(u, v),
            mode,
            copy: CopyTag::Single,
        }
    }

    pub fn cartan(u: u32, v: u32, mode: i64) -> Self {
        Self {
            kind: GenKind::Cartan(u, v),
            mode,
            copy: CopyTag::Single,
        }
    }

    pub fn raw(u: u32, v: u32, mode: i64) -> Self {
        Self {
            kind: GenKind::Raw(u, v),
            mode,
            copy: CopyTag::Single,
        }
    }

    pub fn on(mut self, copy: CopyTag) -> Self {
        self.copy = copy;
        self
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        let (u, v) = match self.kind {
            GenKind::OffDiag(u, v) | GenKind::Cartan(u, v) | GenKind::Raw(u, v) => (u, v),
        };
        if u == 0 || v == 0 || u > n || v > n {
            return Err(Error::InvalidGenerator(format!("{self}: indices outside 1..={n}")));
        }
        match self.kind {
            GenKind::OffDiag(..) | GenKind::Cartan(..) if u == v => Err(Error::InvalidGenerator(
                format!("{self}: needs distinct indices"),
            )),
            GenKind::Raw(..) if self.mode < 0 => Err(Error::InvalidGenerator(format!(
                "{self}: gl_n generators only at nonnegative modes"
            ))),
            _ => Ok(()),
        }
    }

    pub fn to_element(&self) -> LieElement {
        let mut e = LieElement::zero();
        match self.kind {
            GenKind::OffDiag(u, v) | GenKind::Raw(u, v) => e.add_term(self.copy, u, v, self.mode, Q::one()),
            GenKind::Cartan(u, v) => {
                e.add_term(self.copy, u, u, self.mode, Q::one());
                e.add_term(self.copy, v, v, self.mode, -Q::one());
            }
        }
        e
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GenKind::OffDiag(u, v) | GenKind::Raw(u, v) => write!(f, "E{u}{v}")?,
            GenKind::Cartan(u, v) => write!(f, "(E{u}{u}-E{v}{v})")?,
        }
        write!(f, " t^{}", self.mode)?;
        if self.copy != CopyTag::Single {
            write!(f, " [{}]", self.copy)?;
        }
        Ok(())
    }
}

/// Rational combination of `E_uv t^j` (per copy) plus central terms `K` (per copy).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LieElement {
    terms: BTreeMap<(CopyTag, u32, u32, i64), Q>,
    central: BTreeMap<CopyTag, Q>,
}

impl LieElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn central(copy: CopyTag, c: Q) -> Self {
        let mut e = Self::zero();
        e.add_central(copy, c);
        e
    }

    pub fn add_term(&mut self, copy: CopyTag, u: u32, v: u32, mode: i64, c: Q) {
        let key = (copy, u, v, mode);
        let x = self.terms.entry(key).or_insert_with(Q::zero);
        *x += c;
        if x.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add_central(&mut self, copy: CopyTag, c: Q) {
        let x = self.central.entry(copy).or_insert_with(Q::zero);
        *x += c;
        if x.is_zero() {
            self.central.remove(&copy);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (CopyTag, u32, u32, i64, &Q)> {
        self.terms.iter().map(|(&(c, u, v, j), x)| (c, u, v, j, x))
    }

    pub fn central_part(&self, copy: CopyTag) -> Q {
        self.central.get(&copy).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.central.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(c, u, v, j), x) in &other.terms {
            out.add_term(c, u, v, j, x.clone());
        }
        for (&c, x) in &other.central {
            out.add_central(c, x.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> Self {
        let mut out = Self::zero();
        for (&(c, u, v, j), x) in &self.terms {
            out.add_term(c, u, v, j, x * s);
        }
        for (&c, x) in &self.central {
            out.add_central(c, x * s);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    /// Same element with every central term removed.
    pub fn without_central(&self) -> Self {
        Self {
            terms: self.terms.clone(),
            central: BTreeMap::new(),
        }
    }
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(c, u, v, j), x)| {
                let tag = if c == CopyTag::Single { String::new() } else { format!("[{c}]") };
                format!("{x} E{u}{v}t^{j}{tag}")
            })
            .collect();
        for (c, x) in &self.central {
            parts.push(format!("{x} K[{c}]"));
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        f.write_str(&parts.join(" + "))
    }
}

/// `[a t^m, b t^k] = [a, b] t^{m+k} + m delta_{m+k,0} tr(ab) K`; distinct copies commute.
pub fn lie_bracket(x: &LieElement, y: &LieElement) -> LieElement {
    let mut out = LieElement::zero();
    for (&(c1, a, b, m), x1) in &x.terms {
        for (&(c2, cc, d, k), y1) in &y.terms {
            if c1 != c2 {
                continue;
            }
            let coef = x1 * y1;
            if b == cc {
                out.add_term(c1, a, d, m + k, coef.clone());
            }
            if d == a {
                out.add_term(c1, cc, b, m + k, -coef.clone());
            }
            if m + k == 0 && b == cc && a == d {
                out.add_central(c1, coef * q(m));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Functions on `R^n_-`, one copy of `sl_n^`.
    Vector,
    /// Functions on `M_n(R)[t^{-1}] t^{-1}`, two commuting copies.
    Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Model {
    pub n: u32,
    pub kind: ModelKind,
}

impl Model {
    pub fn vector(n: u32) -> Self {
        Self {
            n,
            kind: ModelKind::Vector,
        }
    }

    pub fn matrix(n: u32) -> Self {
        Self {
            n,
            kind: ModelKind::Matrix,
        }
    }

    /// Coordinates per depth.
    pub fn m(&self) -> usize {
        match self.kind {
            ModelKind::Vector => self.n as usize,
            ModelKind::Matrix => (self.n * self.n) as usize,
        }
    }

    /// Coordinate of the matrix entry `(u, v)`.
    pub fn entry(&self, u: u32, v: u32) -> u32 {
        (u - 1) * self.n + v
    }

    pub fn copies(&self) -> &'static [CopyTag] {
        match self.kind {
            ModelKind::Vector => &[CopyTag::Single],
            ModelKind::Matrix => &[CopyTag::Left, CopyTag::Right],
        }
    }

    pub fn gaussian(&self, depth: u32) -> GaussPoly {
        GaussPoly::gaussian(self.m(), depth)
    }

    /// `(differentiated, multiplied)` coordinate pairs realizing `E_uv`.
    fn pairs(&self, copy: CopyTag, u: u32, v: u32) -> Result<Vec<(u32, u32)>> {
        match (self.kind, copy) {
            (ModelKind::Vector, CopyTag::Single) => Ok(vec![(u, v)]),
            (ModelKind::Matrix, CopyTag::Left) => {
                Ok((1..=self.n).map(|s| (self.entry(u, s), self.entry(v, s))).collect())
            }
            (ModelKind::Matrix, CopyTag::Right) => {
                Ok((1..=self.n).map(|s| (self.entry(s, u), self.entry(s, v))).collect())
            }
            _ => Err(Error::InvalidGenerator(format!(
                "copy {copy} does not act on the {:?} model",
                self.kind
            ))),
        }
    }

    /// Level predicted for a copy: 1 on the vector model, `n` on either matrix copy.
    pub fn expected_level(&self) -> u32 {
        match self.kind {
            ModelKind::Vector => 1,
            ModelKind::Matrix => self.n,
        }
    }

    /// `E_uv t^j` for `j >= 0`: `-sum x_{-i-j}^v d/dx_{-i}^u`.
    fn raise(&self, f: &GaussPoly, copy: CopyTag, u: u32, v: u32, j: u32) -> Result<GaussPoly> {
        let pairs = self.pairs(copy, u, v)?;
        Ok(f.vector_field(&pairs, 0, j, f.window())
            .scale(&Scalar::rational(-Q::one())))
    }

    /// `E_uv t^{-j}` for `j > 0`: `-lambda^{-j} pi_t^j sum x_{-i}^v d/dx_{-i-j}^u`.
    /// Output window shrinks by `2j`.
    fn lower(&self, f: &GaussPoly, copy: CopyTag, u: u32, v: u32, j: u32) -> Result<GaussPoly> {
        if f.window() < 2 * j {
            return Err(Error::WindowExhausted(format!(
                "mode -{j} needs window >= {}, have {}",
                2 * j,
                f.window()
            )));
        }
        let pairs = self.pairs(copy, u, v)?;
        let mut g = f.vector_field(&pairs, j, 0, f.window() - j);
        for _ in 0..j {
            g = g.pi_t()?;
        }
        let lam = -(self.m() as i64) * j as i64;
        Ok(g.scale(&Scalar::monomial(-Q::one(), 0, lam)))
    }

    /// `pi(E_uv t^j)` for one basis term.
    fn apply_basis(&self, f: &GaussPoly, copy: CopyTag, u: u32, v: u32, j: i64) -> Result<GaussPoly> {
        if j >= 0 {
            self.raise(f, copy, u, v, j as u32)
        } else {
            self.lower(f, copy, u, v, (-j) as u32)
        }
    }

    pub fn apply(&self, g: &Generator, f: &GaussPoly) -> Result<GaussPoly> {
        g.validate(self.n)?;
        self.apply_element(&g.to_element(), f, &Q::zero())
    }

    /// `pi(X) f` with every central `K` acting as `level`.
    pub fn apply_element(&self, x: &LieElement, f: &GaussPoly, level: &Q) -> Result<GaussPoly> {
        // diagonal parts at negative modes must be traceless per (copy, mode)
        let mut traces: BTreeMap<(CopyTag, i64), Q> = BTreeMap::new();
        for (c, u, v, j, coef) in x.terms() {
            if u == v && j < 0 {
                *traces.entry((c, j)).or_insert_with(Q::zero) += coef;
            }
        }
        if let Some(((c, j), _)) = traces.iter().find(|(_, t)| !t.is_zero()) {
            return Err(Error::InvalidGenerator(format!(
                "diagonal part at mode {j} on copy {c} is not traceless"
            )));
        }
        let mut acc: Option<GaussPoly> = None;
        let mut push = |g: GaussPoly| -> Result<()> {
            acc = Some(match acc.take() {
                None => g,
                Some(a) => a.add(&g)?,
            });
            Ok(())
        };
        for (c, u, v, j, coef) in x.terms() {
            if u == 0 || v == 0 || u > self.n || v > self.n {
                return Err(Error::InvalidGenerator(format!("E{u}{v} outside 1..={}", self.n)));
            }
            push(self.apply_basis(f, c, u, v, j)?.scale(&Scalar::rational(coef.clone())))?;
        }
        let k: Q = self.copies().iter().map(|&c| x.central_part(c)).sum::<Q>() * level;
        if !k.is_zero() {
            push(f.scale(&Scalar::rational(k)))?;
        }
        Ok(acc.unwrap_or_else(|| GaussPoly::zero(f.m(), f.depth(), f.window())))
    }

    pub fn apply_word(&self, word: &[Generator], f: &GaussPoly) -> Result<GaussPoly> {
        let mut g = f.clone();
        for x in word.iter().rev() {
            g = self.apply(x, &g)?;
        }
        Ok(g)
    }

    /// `[pi(a), pi(b)] f - pi([a, b]) f` with `K -> level`, on the final window.
    pub fn bracket_residual(&self, a: &Generator, b: &Generator, f: &GaussPoly, level: &Q) -> Result<GaussPoly> {
        a.validate(self.n)?;
        b.validate(self.n)?;
        let ab = self.apply(a, &self.apply(b, f)?)?;
        let ba = self.apply(b, &self.apply(a, f)?)?;
        let br = lie_bracket(&a.to_element(), &b.to_element());
        let rhs = self.apply_element(&br, f, level)?;
        let lhs = ab.sub(&ba)?;
        let w = lhs.window().min(rhs.window());
        Ok(lhs.with_window(w).sub(&rhs.with_window(w))?)
    }

    /// Central value `kappa` with `([pi(E_vu t^m), pi(E_uv t^{-m})] - pi(bracket without K)) f = m kappa f`.
    pub fn measure_level(&self, u: u32, v: u32, m: i64, f: &GaussPoly, copy: CopyTag) -> Result<Scalar> {
        if m < 1 {
            return Err(Error::Invalid("measure_level needs m >= 1".into()));
        }
        let a = Generator::offdiag(v, u, m).on(copy);
        let b = Generator::offdiag(u, v, -m).on(copy);
        a.validate(self.n)?;
        b.validate(self.n)?;
        let ab = self.apply(&a, &self.apply(&b, f)?)?;
        let ba = self.apply(&b, &self.apply(&a, f)?)?;
        let br = lie_bracket(&a.to_element(), &b.to_element()).without_central();
        let rhs = self.apply_element(&br, f, &Q::zero())?;
        let res = ab.sub(&ba)?.sub(&rhs)?;
        let w = res.window();
        let base = f.with_window(w);
        let (mono, fc) = base
            .terms()
            .find(|(_, c)| c.as_monomial().is_some())
            .map(|(mono, c)| (mono.clone(), c.as_monomial().unwrap()))
            .ok_or_else(|| Error::NotProportional("f vanishes on the final window".into()))?;
        let (c0, a0, b0) = fc;
        let kappa = res
            .coeff(&mono)
            .mul(&Scalar::monomial(c0.recip() / q(m), -a0, -b0));
        let predicted = base.scale(&kappa.scale(&q(m)));
        if !res.sub(&predicted)?.is_zero() {
            return Err(Error::NotProportional(format!(
                "residual is not a multiple of f on window {w}"
            )));
        }
        Ok(kappa)
    }

    /// `pi(E_uv t^m - E_vu t^{-m}) phi` and `pi((E_uu - E_vv)(t^m - t^{-m})) phi`.
    pub fn chevalley_residual(&self, u: u32, v: u32, m: i64, depth: u32) -> Result<(GaussPoly, GaussPoly)> {
        let phi = self.gaussian(depth);
        let copy = self.copies()[0];
        let mut off = Generator::offdiag(u, v, m).on(copy).to_element();
        off = off.sub(&Generator::offdiag(v, u, -m).on(copy).to_element());
        let mut diag = Generator::cartan(u, v, m).on(copy).to_element();
        diag = diag.sub(&Generator::cartan(u, v, -m).on(copy).to_element());
        Ok((
            self.apply_element(&off, &phi, &Q::zero())?,
            self.apply_element(&diag, &phi, &Q::zero())?,
        ))
    }

    /// `[pi(a), pi(b)] f` for generators on different copies.
    pub fn commuting_copies_residual(&self, a: &Generator, b: &Generator, f: &GaussPoly) -> Result<GaussPoly> {
        if a.copy == b.copy {
            return Err(Error::InvalidGenerator("generators must lie on different copies".into()));
        }
        let ab = self.apply(a, &self.apply(b, f)?)?;
        let ba = self.apply(b, &self.apply(a, f)?)?;
        ab.sub(&ba)
    }

    /// `pi_t f - lambda f` on the reduced window.
    pub fn eigen_residual(&self, f: &GaussPoly) -> Result<GaussPoly> {
        let lhs = f.pi_t()?;
        let rhs = f
            .with_window(lhs.window())
            .scale(&Scalar::monomial(Q::one(), 0, self.m() as i64));
        lhs.sub(&rhs)
    }

    /// All `sl_n` generators of the given copy with modes in `[-max_mode, max_mode]`.
    pub fn generators(&self, copy: CopyTag, max_mode: i64) -> Vec<Generator> {
        let mut out = Vec::new();
        for j in -max_mode..=max_mode {
            for u in 1..=self.n {
                for v in 1..=self.n {
                    if u != v {
                        out.push(Generator::offdiag(u, v, j).on(copy));
                    }
                }
            }
            for u in 1..self.n {
                out.push(Generator::cartan(u, u + 1, j).on(copy));
            }
        }
        out
    }

    /// Random word of `sl_n` generators with modes in `[-max_mode, max_mode]`.
    pub fn random_word(&self, rng: &mut impl Rng, max_len: usize, max_mode: i64) -> Vec<Generator> {
        let len = rng.random_range(0..=max_len);
        let copies = self.copies();
        (0..len)
            .map(|_| {
                let copy = copies[rng.random_range(0..copies.len())];
                let pool = self.generators(copy, max_mode);
                pool[rng.random_range(0..pool.len())]
            })
            .collect()
    }
}

/// Window consumed by a word: twice the sum of its negative modes.
pub fn window_cost(word: &[Generator]) -> u32 {
    word.iter().map(|g| 2 * (-g.mode).max(0) as u32).sum()
}

/// Coefficient of `x_{-i}^a` products in a result, for diagnostics.
pub fn residual_terms(f: &GaussPoly) -> usize {
    f.len()
}

pub fn monomial_of(slots: &[(u32, u32)]) -> Monomial {
    Monomial::from_slots(slots.iter().map(|&(i, a)| crate::fock::Slot::new(i, a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(u: u32, v: u32, j: i64) -> LieElement {
        Generator::offdiag(u, v, j).to_element()
    }

    #[test]
    fn bracket_examples() {
        let b = lie_bracket(&e(1, 2, 1), &e(2, 1, -1));
        let expect = Generator::cartan(1, 2, 0)
            .to_element()
            .add(&LieElement::central(CopyTag::Single, q(1)));
        assert_eq!(b, expect);
        assert!(lie_bracket(&e(1, 2, 0), &e(1, 3, 0)).is_zero());
        let b = lie_bracket(&Generator::cartan(1, 2, 0).to_element(), &e(1, 2, 2));
        assert_eq!(b, e(1, 2, 2).scale(&q(2)));
        let left = Generator::offdiag(1, 2, 0).on(CopyTag::Left).to_element();
        let right = Generator::offdiag(2, 1, 0).on(CopyTag::Right).to_element();
        assert!(lie_bracket(&left, &right).is_zero());
    }

    #[test]
    fn generator_validation() {
        assert!(Generator::offdiag(1, 1, 0).validate(2).is_err());
        assert!(Generator::raw(1, 1, -1).validate(2).is_err());
        assert!(Generator::raw(1, 1, 0).validate(2).is_ok());
        assert!(Generator::cartan(1, 3, 0).validate(2).is_err());
        let model = Model::vector(2);
        let mut x = LieElement::zero();
        x.add_term(CopyTag::Single, 1, 1, -1, q(1));
        assert!(model.apply_element(&x, &model.gaussian(4), &q(0)).is_err());
    }

    #[test]
    fn raising_on_gaussian() {
        // pi(E_12 t) phi = s^{-1} rho^{-2} sum_i x_{-i-1}^2 x_{-i}^1 phi
        let model = Model::vector(2);
        let f = model.apply(&Generator::offdiag(1, 2, 1), &model.gaussian(4)).unwrap();
        assert_eq!(f.window(), 4);
        assert_eq!(f.len(), 3);
        for i in 1..=3 {
            assert_eq!(
                f.coeff(&monomial_of(&[(i, 1), (i + 1, 2)])),
                Scalar::monomial(q(1), -1, -2)
            );
        }
    }

    #[test]
    fn lowering_on_gaussian() {
        // pi(E_21 t^{-1}) phi = s^{-1} rho^{-2} sum_i x_{-i}^1 x_{-i-1}^2 phi
        let model = Model::vector(2);
        let f = model.apply(&Generator::offdiag(2, 1, -1), &model.gaussian(6)).unwrap();
        assert_eq!(f.window(), 4);
        assert_eq!(f.len(), 3);
        for i in 1..=3 {
            assert_eq!(
                f.coeff(&monomial_of(&[(i, 1), (i + 1, 2)])),
                Scalar::monomial(q(1), -1, -2)
            );
        }
    }

    #[test]
    fn central_charge_vector_model() {
        let model = Model::vector(2);
        let phi = model.gaussian(10);
        for m in 1..=2 {
            let k = model.measure_level(1, 2, m, &phi, CopyTag::Single).unwrap();
            assert_eq!(k, Scalar::one());
        }
        let r = model
            .bracket_residual(&Generator::offdiag(2, 1, 1), &Generator::offdiag(1, 2, -1), &phi, &q(1))
            .unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn eigen_examples() {
        let model = Model::vector(2);
        let phi = model.gaussian(6);
        assert!(model.eigen_residual(&phi).unwrap().is_zero());
        let f = model.apply(&Generator::offdiag(1, 2, -1), &phi).unwrap();
        assert!(model.eigen_residual(&f).unwrap().is_zero());
        let bad = phi.mul_var(crate::fock::Slot::new(1, 1)).unwrap();
        assert!(!model.eigen_residual(&bad).unwrap().is_zero());
    }

    #[test]
    fn chevalley_small() {
        let model = Model::vector(2);
        let (a, b) = model.chevalley_residual(1, 2, 1, 10).unwrap();
        assert!(a.is_zero() && b.is_zero());
    }

    #[test]
    fn matrix_level_and_commuting_copies() {
        let model = Model::matrix(2);
        let phi = model.gaussian(4);
        for &c in model.copies() {
            assert_eq!(model.measure_level(1, 2, 1, &phi, c).unwrap(), Scalar::rational(q(2)));
        }
        let a = Generator::offdiag(1, 2, 1).on(CopyTag::Left);
        let b = Generator::offdiag(1, 2, -1).on(CopyTag::Right);
        assert!(model.commuting_copies_residual(&a, &b, &phi).unwrap().is_zero());
    }
}
