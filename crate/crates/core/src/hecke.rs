//! Two finite toy models of Hecke operators: integer dilations acting on
//! Fourier polynomials on the circle, and integral matrices acting on periodic
//! functions on `Q_p^n / Z_p^n` with bounded denominators.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::{pow_q, Q};

pub type GaussianRational = Complex<Q>;

/// Finite sum `sum_k a_k e^{2 pi i k x}` with Gaussian-rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FourierPoly {
    coeffs: BTreeMap<i64, GaussianRational>,
}

impl FourierPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `e_k = e^{2 pi i k x}`.
    pub fn basis(k: i64) -> Self {
        Self::from_terms([(k, Complex::new(Q::one(), Q::zero()))])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, GaussianRational)>) -> Self {
        let mut out = Self::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    fn add_term(&mut self, k: i64, c: GaussianRational) {
        let e = self
            .coeffs
            .entry(k)
            .or_insert_with(|| Complex::new(Q::zero(), Q::zero()));
        *e = &*e + c;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeff(&self, k: i64) -> GaussianRational {
        self.coeffs
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Complex::new(Q::zero(), Q::zero()))
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &GaussianRational)> {
        self.coeffs.iter().map(|(&k, c)| (k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value at `x` in floating point.
    pub fn eval(&self, x: f64) -> num_complex::Complex64 {
        self.coeffs
            .iter()
            .map(|(&k, c)| {
                let a = crate::rational::q_to_f64(&c.re);
                let b = crate::rational::q_to_f64(&c.im);
                num_complex::Complex64::new(a, b) * num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * x)
            })
            .sum()
    }
}

/// `pi(m) f(x) = sum_{i=1}^m f(x/m + i/m)`: `e_k -> m e_{k/m}` when `m | k`, else 0.
pub fn circle_hecke(m: i64, f: &FourierPoly) -> Result<FourierPoly> {
    if m < 1 {
        return Err(Error::Invalid(format!("dilation must be >= 1, got {m}")));
    }
    let scale = Q::from_integer(m.into());
    Ok(FourierPoly::from_terms(f.terms().filter(|(k, _)| k % m == 0).map(|(k, c)| {
        (k / m, Complex::new(&c.re * &scale, &c.im * &scale))
    })))
}

/// Largest supported denominator exponent.
pub const MAX_PADIC_DEPTH: u32 = 4;

/// A function on `p^{-M} Z_p^n / Z_p^n`, extended by zero to `Q_p^n / Z_p^n`.
/// Point `a / p^M` with `a` in `(Z / p^M)^n` sits at the mixed-radix index of `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAdicFunction {
    p: u64,
    n: usize,
    depth: u32,
    values: Vec<Q>,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl PAdicFunction {
    pub fn zero(p: u64, n: usize, depth: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        if depth > MAX_PADIC_DEPTH {
            return Err(Error::DepthOverflow {
                depth,
                max: MAX_PADIC_DEPTH,
            });
        }
        let size = (p.pow(depth) as usize).pow(n as u32);
        Ok(Self {
            p,
            n,
            depth,
            values: vec![Q::zero(); size],
        })
    }

    /// Indicator of the zero coset `Z_p^n`.
    pub fn zero_coset(p: u64, n: usize, depth: u32) -> Result<Self> {
        let mut f = Self::zero(p, n, depth)?;
        f.values[0] = Q::one();
        Ok(f)
    }

    pub fn random(rng: &mut impl Rng, p: u64, n: usize, depth: u32) -> Result<Self> {
        let mut f = Self::zero(p, n, depth)?;
        for v in f.values.iter_mut() {
            *v = Q::from_integer(rng.random_range(-3..=3).into());
        }
        Ok(f)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn modulus(&self) -> i128 {
        (self.p as i128).pow(self.depth)
    }

    fn index(&self, a: &[i128]) -> usize {
        let m = self.modulus();
        a.iter().fold(0usize, |acc, &x| acc * m as usize + x.rem_euclid(m) as usize)
    }

    fn point(&self, mut idx: usize) -> Vec<i128> {
        let m = self.modulus() as usize;
        let mut a = vec![0i128; self.n];
        for slot in a.iter_mut().rev() {
            *slot = (idx % m) as i128;
            idx /= m;
        }
        a
    }

    /// Value at `a / p^M`.
    pub fn value(&self, a: &[i64]) -> Q {
        let a: Vec<i128> = a.iter().map(|&x| x as i128).collect();
        self.values[self.index(&a)].clone()
    }

    pub fn set(&mut self, a: &[i64], v: Q) {
        let a: Vec<i128> = a.iter().map(|&x| x as i128).collect();
        let i = self.index(&a);
        self.values[i] = v;
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

fn valuation(mut x: i128, p: i128) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn det_i(g: &[Vec<i128>]) -> i128 {
    let n = g.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return g[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i128>> = g[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * g[0][j] * det_i(&minor)
        })
        .sum()
}

fn adjugate_i(g: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = g.len();
    if n == 1 {
        return vec![vec![1]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    // cofactor of (j, i)
                    let minor: Vec<Vec<i128>> = g
                        .iter()
                        .enumerate()
                        .filter(|&(r, _)| r != j)
                        .map(|(_, row)| row.iter().enumerate().filter(|&(c, _)| c != i).map(|(_, &x)| x).collect())
                        .collect();
                    let s = if (i + j) % 2 == 0 { 1 } else { -1 };
                    s * det_i(&minor)
                })
                .collect()
        })
        .collect()
}

/// Integer Smith form `g = U diag(d) V` with `U, V` unimodular; returns `(U, d)`.
pub fn integer_smith(g: &[Vec<i64>]) -> Result<(Vec<Vec<i64>>, Vec<i64>)> {
    let n = g.len();
    let mut a: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    if det_i(&a) == 0 {
        return Err(Error::Singular);
    }
    let mut u: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    for s in 0..n {
        loop {
            // pivot: smallest nonzero absolute value in the trailing block
            let (pi, pj) = (s..n)
                .flat_map(|i| (s..n).map(move |j| (i, j)))
                .filter(|&(i, j)| a[i][j] != 0)
                .min_by_key(|&(i, j)| (a[i][j].abs(), i, j))
                .expect("nonsingular");
            // row swap s <-> pi: U gets the column swap
            a.swap(s, pi);
            for row in u.iter_mut() {
                row.swap(s, pi);
            }
            for row in a.iter_mut() {
                row.swap(s, pj);
            }
            let mut clean = true;
            for i in s + 1..n {
                let c = a[i][s] / a[s][s];
                if c != 0 {
                    // row i -= c row s; U column s += c column i
                    for j in 0..n {
                        a[i][j] -= c * a[s][j];
                    }
                    for row in u.iter_mut() {
                        row[s] += c * row[i];
                    }
                }
                clean &= a[i][s] == 0;
            }
            for j in s + 1..n {
                let c = a[s][j] / a[s][s];
                if c != 0 {
                    for row in a.iter_mut() {
                        row[j] -= c * row[s];
                    }
                }
                clean &= a[s][j] == 0;
            }
            if !clean {
                continue;
            }
            // the pivot must divide the rest of the block
            let bad = (s + 1..n).flat_map(|i| (s + 1..n).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % a[s][s] != 0);
            match bad {
                Some((i, _)) => {
                    // row s += row i; U column i -= column s
                    for j in 0..n {
                        a[s][j] += a[i][j];
                    }
                    for row in u.iter_mut() {
                        row[i] -= row[s];
                    }
                }
                None => break,
            }
        }
    }
    let d = (0..n).map(|i| a[i][i] as i64).collect();
    Ok((u.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect(), d))
}

/// Representatives of `Z_p^n / g Z_p^n` as integer vectors.
pub fn coset_representatives(g: &[Vec<i64>], p: u64) -> Result<Vec<Vec<i64>>> {
    let (u, d) = integer_smith(g)?;
    let n = g.len();
    let sizes: Vec<i64> = d
        .iter()
        .map(|&di| (p as i64).pow(valuation(di as i128, p as i128)))
        .collect();
    let mut out = Vec::new();
    let mut a = vec![0i64; n];
    loop {
        out.push((0..n).map(|i| (0..n).map(|j| u[i][j] * a[j]).sum()).collect());
        let mut k = 0;
        loop {
            if k == n {
                return Ok(out);
            }
            a[k] += 1;
            if a[k] < sizes[k] {
                break;
            }
            a[k] = 0;
            k += 1;
        }
    }
}

fn inverse_mod(x: i128, m: i128) -> i128 {
    // extended Euclid; x is a unit mod m
    let (mut r0, mut r1) = (x.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(m)
}

/// `pi(g) f(x) = sum_{r in Z_p^n / g Z_p^n} f(g^{-1}(x + r))` for an integral `g`.
pub fn padic_hecke(g: &[Vec<i64>], f: &PAdicFunction) -> Result<PAdicFunction> {
    let n = f.n;
    if g.len() != n || g.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("{} x {} matrix on Q_p^{n}", g.len(), g.first().map_or(0, Vec::len))));
    }
    let p = f.p as i128;
    let gi: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let det = det_i(&gi);
    if det == 0 {
        return Err(Error::Singular);
    }
    let e = valuation(det, p);
    let unit = det / p.pow(e);
    let big = p.pow(f.depth + e);
    let uinv = inverse_mod(unit, big);
    let adj = adjugate_i(&gi);
    let reps = coset_representatives(g, f.p)?;
    let pm = f.modulus();
    let pe = p.pow(e);
    let mut out = PAdicFunction::zero(f.p, n, f.depth)?;
    for idx in 0..f.values.len() {
        let a = f.point(idx);
        let mut acc = Q::zero();
        for r in &reps {
            // y = adj (a + p^M r) / (p^{M+e} unit)
            let b: Vec<i128> = (0..n).map(|i| a[i] + pm * r[i] as i128).collect();
            let z: Vec<i128> = (0..n)
                .map(|i| {
                    let s: i128 = (0..n).map(|j| (adj[i][j] % big) * (b[j] % big) % big).sum();
                    (s.rem_euclid(big) * uinv).rem_euclid(big)
                })
                .collect();
            if z.iter().all(|&zi| zi % pe == 0) {
                let y: Vec<i128> = z.iter().map(|&zi| zi / pe).collect();
                acc += &f.values[f.index(&y)];
            }
        }
        out.values[idx] = acc;
    }
    Ok(out)
}

fn scalar_matrix(n: usize, c: i64) -> Vec<Vec<i64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { c } else { 0 }).collect()).collect()
}

fn q_valuation(x: &Q, p: u64) -> i64 {
    if x.is_zero() {
        return i64::MAX;
    }
    let p = num_bigint::BigInt::from(p);
    let count = |mut v: num_bigint::BigInt| {
        let mut k = 0i64;
        while (&v % &p).is_zero() {
            v /= &p;
            k += 1;
        }
        k
    };
    count(x.numer().clone()) - count(x.denom().clone())
}

/// `g = p^k g'` with `g'` integral, for the given `k`.
fn integral_part(g: &[Vec<Q>], p: u64, k: i64) -> Result<Vec<Vec<i64>>> {
    let pk = pow_q(&Q::from_integer(p.into()), -k);
    g.iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    let y = x * &pk;
                    if !y.is_integer() {
                        return Err(Error::Invalid(format!("p^{} g is not integral", -k)));
                    }
                    i64::try_from(y.to_integer()).map_err(|_| Error::Invalid("entry too large".into()))
                })
                .collect()
        })
        .collect()
}

/// Largest `k` with `p^{-k} g` integral; entries may only have `p`-power denominators.
pub fn max_p_power(g: &[Vec<Q>], p: u64) -> Result<i64> {
    let mut k: Option<i64> = None;
    for x in g.iter().flatten() {
        if x.is_zero() {
            continue;
        }
        let mut d = x.denom().clone();
        while (&d % num_bigint::BigInt::from(p)).is_zero() {
            d /= num_bigint::BigInt::from(p);
        }
        if !d.is_one() {
            return Err(Error::Invalid(format!("{x} has a denominator prime to {p}")));
        }
        let v = q_valuation(x, p);
        k = Some(k.map_or(v, |k| k.min(v)));
    }
    k.ok_or(Error::Singular)
}

/// `pi_lambda(g) f = lambda^k pi(g') f` for `g = p^k g'`, `f` in the `lambda`-eigenspace of `pi(p I)`.
/// `shift` lowers `k` below its largest admissible value, which must not change the result.
pub fn padic_extend_with(lambda: &Q, g: &[Vec<Q>], f: &PAdicFunction, shift: u32) -> Result<PAdicFunction> {
    if lambda.is_zero() {
        return Err(Error::Invalid("lambda must be nonzero".into()));
    }
    let eig = padic_hecke(&scalar_matrix(f.n, f.p as i64), f)?;
    if eig != f.scale(lambda) {
        return Err(Error::NotEigen(format!("pi({} I) f != {lambda} f", f.p)));
    }
    let k = max_p_power(g, f.p)? - shift as i64;
    let gp = integral_part(g, f.p, k)?;
    Ok(padic_hecke(&gp, f)?.scale(&pow_q(lambda, k)))
}

pub fn padic_extend(lambda: &Q, g: &[Vec<Q>], f: &PAdicFunction) -> Result<PAdicFunction> {
    padic_extend_with(lambda, g, f, 0)
}

/// Integer matrix with entries `0` or `+-u p^e`, `e <= 1`, `u` a small unit, and nonzero determinant.
pub fn random_padic_matrix(rng: &mut impl Rng, p: u64, n: usize) -> Vec<Vec<i64>> {
    let p = p as i64;
    let units: Vec<i64> = (1..=2 * p).filter(|u| u % p != 0).collect();
    loop {
        let g: Vec<Vec<i64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if rng.random_bool(0.2) {
                            return 0;
                        }
                        let u = units[rng.random_range(0..units.len())];
                        let s = if rng.random_bool(0.5) { -1 } else { 1 };
                        s * u * if rng.random_bool(0.5) { p } else { 1 }
                    })
                    .collect()
            })
            .collect();
        let gi: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        if det_i(&gi) != 0 {
            return g;
        }
    }
}

pub fn mat_mul_i(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}
