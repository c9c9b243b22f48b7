//! Functionals on the Fock model: the highest-weight pairings `I_k` on the
//! vector model, and Whittaker functionals on the matrix model (the loop
//! functionals on `M_n(R)[t^{-1}] t^{-1}` and the finite `GL_3` ones on `M_3(R)`).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::affine::{GenKind, Generator, Model};
use crate::error::{Error, Result};
use crate::fock::{GaussPoly, Scalar};
use crate::matrix::LoopMatrix;
use crate::quadrature::{gauss_hermite, integrate_box};
use crate::rational::{q, q_to_f64, Q};

/// `I_k(f) = ∫_{R^k} f(x_{-1}^1, ..., x_{-1}^k, 0, 0, ...)`.
pub fn i_pair(k: usize, f: &GaussPoly) -> Result<Scalar> {
    if k == 0 {
        return Err(Error::Invalid("I_k needs k >= 1".into()));
    }
    f.slice_integral(k)
}

/// `<Lambda_k, E_uu - E_vv>` with `Lambda_k(E_ww) = -1` for `w <= k` and 0 otherwise.
pub fn highest_weight(k: u32, u: u32, v: u32) -> i64 {
    let w = |i: u32| if i <= k { -1 } else { 0 };
    w(u) - w(v)
}

/// Generators of `n^+` and of the Cartan part with modes up to `max_mode`.
pub fn positive_generators(n: u32, max_mode: i64) -> Vec<Generator> {
    let mut out = Vec::new();
    for j in 0..=max_mode {
        for u in 1..=n {
            for v in 1..=n {
                if u != v && (j > 0 || u < v) {
                    out.push(Generator::offdiag(u, v, j));
                }
            }
        }
        for u in 1..n {
            out.push(Generator::cartan(u, u + 1, j));
        }
    }
    out
}

/// `<I_k, pi(gen) f>` minus its predicted value: 0 on `n^+`, and
/// `-<Lambda_k, H> <I_k, f>` for a Cartan element `H` at mode 0.
pub fn highest_weight_residual(k: usize, gen: &Generator, f: &GaussPoly) -> Result<Scalar> {
    let n = f.m() as u32;
    if k == 0 || k > n as usize {
        return Err(Error::Invalid(format!("k = {k} outside 1..={n}")));
    }
    if gen.mode < 0 {
        return Err(Error::InvalidGenerator(format!("{gen}: negative modes are not in n^+ + h")));
    }
    let expected = match gen.kind {
        GenKind::Cartan(u, v) if gen.mode == 0 => {
            let w = highest_weight(k as u32, u, v);
            i_pair(k, f)?.scale(&q(-w))
        }
        GenKind::OffDiag(u, v) if gen.mode == 0 && u > v => {
            return Err(Error::InvalidGenerator(format!("{gen} lies in n^-")));
        }
        GenKind::Raw(..) => return Err(Error::InvalidGenerator(format!("{gen} is not in sl_n"))),
        _ => Scalar::zero(),
    };
    let image = Model::vector(n).apply(gen, f)?;
    Ok(i_pair(k, &image)?.sub(&expected))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub k: u32,
    /// Simple coroot `E_uu - E_{u+1,u+1}`.
    pub u: u32,
    pub expected: i64,
    /// `-<I_k, pi(H) phi> / <I_k, phi>`.
    #[serde(serialize_with = "crate::rational::serialize_q", deserialize_with = "crate::rational::deserialize_q")]
    pub measured: Q,
}

/// Highest weights of every `I_k` on every simple coroot, measured on `phi`.
pub fn weight_table(n: u32) -> Result<Vec<WeightEntry>> {
    let phi = Model::vector(n).gaussian(2);
    let mut out = Vec::new();
    for k in 1..=n {
        let base = i_pair(k as usize, &phi)?
            .as_monomial()
            .ok_or_else(|| Error::NotProportional("I_k(phi) is not a monomial".into()))?;
        for u in 1..n {
            let h = Generator::cartan(u, u + 1, 0);
            let img = i_pair(k as usize, &Model::vector(n).apply(&h, &phi)?)?;
            let measured = if img.is_zero() {
                Q::zero()
            } else {
                let (c, a, b) = img
                    .as_monomial()
                    .ok_or_else(|| Error::NotProportional("pairing is not a monomial".into()))?;
                if (a, b) != (base.1, base.2) {
                    return Err(Error::NotProportional(format!("I_{k}(H phi) vs I_{k}(phi)")));
                }
                -(c / &base.0)
            };
            out.push(WeightEntry {
                k,
                u,
                expected: highest_weight(k, u, u + 1),
                measured,
            });
        }
    }
    Ok(out)
}

/// Which copy of the loop group a Whittaker functional is covariant for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Rows: `x -> u x`, `u(0)` upper unipotent.
    First,
    /// Columns: `x -> x v^T`, `v(0)` lower unipotent.
    Second,
}

/// Coordinates of `u` seen by the characters: the super (or sub) diagonal of
/// `u(0)` and the corner entry of `u'(0)`, `(n, 1)` on the first side and `(1, n)` on the second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnipotentParams {
    pub side: Side,
    pub diagonal: Vec<Q>,
    pub corner: Q,
}

impl UnipotentParams {
    pub fn extract(u: &LoopMatrix, side: Side) -> Result<Self> {
        let n = u.n();
        let u0 = u.at_zero()?;
        for i in 0..n {
            for j in 0..n {
                let below = match side {
                    Side::First => i > j,
                    Side::Second => i < j,
                };
                let want = if i == j {
                    Q::from_integer(1.into())
                } else {
                    Q::zero()
                };
                if (i == j || below) && u0[i][j] != want {
                    return Err(Error::Invalid(format!("u(0) is not unipotent {side:?}-triangular")));
                }
            }
        }
        let u1 = u.coefficient(1);
        Ok(match side {
            Side::First => Self {
                side,
                diagonal: (0..n - 1).map(|k| u0[k][k + 1].clone()).collect(),
                corner: u1[n - 1][0].clone(),
            },
            Side::Second => Self {
                side,
                diagonal: (0..n - 1).map(|k| u0[k + 1][k].clone()).collect(),
                corner: u1[0][n - 1].clone(),
            },
        })
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.diagonal
            .iter()
            .chain(std::iter::once(&self.corner))
            .map(q_to_f64)
            .collect()
    }
}

/// `exp(-2 pi i (c_1 u_1 + ... + c_{n-1} u_{n-1} + c_n v_n))`; the corner term is
/// dropped when `c` has only `n - 1` entries (the finite-dimensional character).
pub fn character_eval(p: &UnipotentParams, c: &[f64]) -> Complex64 {
    let mut phase: f64 = p.diagonal.iter().zip(c).map(|(u, ck)| ck * q_to_f64(u)).sum();
    if c.len() > p.diagonal.len() {
        phase += c[p.diagonal.len()] * q_to_f64(&p.corner);
    }
    Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * phase)
}

/// Largest admissible `|c_i|`.
pub const MAX_FREQUENCY: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WhittakerConfig {
    pub n: usize,
    /// The `GL_3(R)` functional on `M_3(R)` instead of the loop one.
    pub finite: bool,
    pub side: Side,
    /// `c` (first side) or `d` (second side): `n` entries, or 2 in the finite case.
    pub freq: Vec<f64>,
    pub lambda: f64,
    pub nodes: usize,
    pub half_width: f64,
    /// Cap on integrand evaluations.
    pub budget: u64,
}

impl WhittakerConfig {
    pub fn loop_case(n: usize, side: Side, freq: Vec<f64>) -> Self {
        Self {
            n,
            finite: false,
            side,
            freq,
            lambda: 2.0,
            nodes: 33,
            half_width: 6.0,
            budget: 50_000_000,
        }
    }

    pub fn finite_case(side: Side, freq: Vec<f64>) -> Self {
        Self {
            finite: true,
            ..Self::loop_case(3, side, freq)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.finite {
            if self.n != 3 || self.freq.len() != 2 {
                return Err(Error::Invalid("the finite functional is defined for GL_3 with two frequencies".into()));
            }
        } else if !(2..=3).contains(&self.n) || self.freq.len() != self.n {
            return Err(Error::Invalid(format!(
                "loop functional needs n in 2..=3 and n frequencies, got n = {} with {}",
                self.n,
                self.freq.len()
            )));
        }
        if let Some(c) = self.freq.iter().find(|c| !(c.abs() <= MAX_FREQUENCY)) {
            return Err(Error::Invalid(format!("|{c}| exceeds the oscillation budget {MAX_FREQUENCY}")));
        }
        if self.nodes < 8 || !(self.half_width >= 4.0) || !(self.lambda > 0.0) {
            return Err(Error::Invalid("need nodes >= 8, L >= 4 and lambda > 0".into()));
        }
        Ok(())
    }

    /// Coordinates per depth of the matrix model.
    pub fn m(&self) -> usize {
        self.n * self.n
    }

    /// Free variables as `(depth, row, col)`: every depth-1 entry except those
    /// strictly below the subdiagonal, plus `x_{-2}^{1,n}` in the loop case.
    pub fn slice(&self) -> Vec<(usize, usize, usize)> {
        let n = self.n;
        let mut vars: Vec<(usize, usize, usize)> = (1..=n)
            .flat_map(|r| (1..=n).map(move |c| (1, r, c)))
            .filter(|&(_, r, c)| r <= c + 1)
            .collect();
        if !self.finite {
            vars.push((2, 1, n));
        }
        vars
    }

    /// Phase terms `freq_k * x[num] / x[den]`, as indices into [`Self::slice`].
    pub fn phases(&self) -> Vec<(usize, usize, f64)> {
        let vars = self.slice();
        let at = |v: (usize, usize, usize)| vars.iter().position(|&w| w == v).expect("variable in slice");
        let n = self.n;
        let mut out = Vec::new();
        for k in 1..n {
            let num = match self.side {
                Side::First => (1, k, k),
                Side::Second => (1, k + 1, k + 1),
            };
            out.push((at(num), at((1, k + 1, k)), self.freq[k - 1]));
        }
        if !self.finite {
            let num = match self.side {
                Side::First => (1, n, n),
                Side::Second => (1, 1, 1),
            };
            out.push((at(num), at((2, 1, n)), self.freq[n - 1]));
        }
        out
    }

    fn depth(&self) -> usize {
        if self.finite {
            1
        } else {
            2
        }
    }

    /// Slice embedding into flattened coordinates of depth `depth`.
    fn embedding(&self, depth: usize) -> DMatrix<f64> {
        let n = self.n;
        let vars = self.slice();
        let mut e = DMatrix::zeros(self.m() * depth, vars.len());
        for (j, &(i, r, c)) in vars.iter().enumerate() {
            e[((i - 1) * n * n + (r - 1) * n + c - 1, j)] = 1.0;
        }
        e
    }

    /// Linear map `x -> pi_-(u x)` (first side) or `x -> pi_-(x u^T)` (second side)
    /// on flattened matrix coordinates of depth `depth`.
    fn substitution(&self, u: &LoopMatrix, depth: usize) -> Result<DMatrix<f64>> {
        let n = self.n;
        if u.n() != n || !u.is_integral() {
            return Err(Error::Invalid("substitution needs an n x n matrix over R".into()));
        }
        let dim = n * n * depth;
        let idx = |i: usize, r: usize, c: usize| (i - 1) * n * n + r * n + c;
        let mut t = DMatrix::zeros(dim, dim);
        for k in 0..depth {
            let uk = u.coefficient(k as i64);
            for i in 1..=depth - k {
                for r in 0..n {
                    for c in 0..n {
                        for s in 0..n {
                            match self.side {
                                // (u_k X_{-(i+k)})[r][c] = sum_s u_k[r][s] X[s][c]
                                Side::First => t[(idx(i, r, c), idx(i + k, s, c))] += q_to_f64(&uk[r][s]),
                                // (X_{-(i+k)} u_k^T)[r][c] = sum_s X[r][s] u_k[c][s]
                                Side::Second => t[(idx(i, r, c), idx(i + k, r, s))] += q_to_f64(&uk[c][s]),
                            }
                        }
                    }
                }
            }
        }
        Ok(t)
    }
}

/// Per-axis node multiplier for the denominator variables. After the exact
/// Gaussian step the integrand in a denominator `x` behaves like
/// `exp(-pi (c x^2 + k / x^2))`, whose peak is narrower than the plain grid step.
pub const DENOMINATOR_REFINEMENT: usize = 4;

/// A Whittaker integral with a Richardson-style error estimate from a coarser grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WhittakerValue {
    pub re: f64,
    pub im: f64,
    pub error_estimate: f64,
}

impl WhittakerValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `∫ f(M x) exp(2 pi i sum_k freq_k x_num / x_den) dx` over the slice variables.
///
/// For fixed denominators the phase is linear in every other variable, so those are
/// integrated exactly as a complex-shifted Gaussian (Gauss-Hermite with enough nodes
/// for the polynomial degree). Only the denominators go on the offset grid, which
/// never hits their zero set.
fn oscillatory_integral(
    f: &GaussPoly,
    lambda: f64,
    embed: &DMatrix<f64>,
    phases: &[(usize, usize, f64)],
    nodes: usize,
    half_width: f64,
    budget: u64,
) -> Result<Complex64> {
    let m = f.m();
    let s = embed.ncols();
    let big_n = embed.nrows();
    let c = lambda.powf(-2.0 / m as f64);
    let mut den: Vec<usize> = phases.iter().map(|p| p.1).collect();
    den.sort_unstable();
    den.dedup();
    let num: Vec<usize> = (0..s).filter(|j| !den.contains(j)).collect();
    let (dn, nn) = (den.len(), num.len());

    let a_full = embed.transpose() * embed * c;
    let a = DMatrix::from_fn(nn, nn, |i, j| a_full[(num[i], num[j])]);
    let b = DMatrix::from_fn(nn, dn, |i, j| a_full[(num[i], den[j])]);
    let cdd = DMatrix::from_fn(dn, dn, |i, j| a_full[(den[i], den[j])]);
    let m_num = DMatrix::from_fn(big_n, nn, |i, j| embed[(i, num[j])]);
    let m_den = DMatrix::from_fn(big_n, dn, |i, j| embed[(i, den[j])]);
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Invalid("slice Gaussian is degenerate".into()))?;
    let l = chol.l();
    let det_l: f64 = (0..nn).map(|i| l[(i, i)]).product();
    // y = L^{-T} s / sqrt(pi) turns exp(-pi y^T A y) into exp(-|s|^2)
    let lt_inv = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Invalid("singular Cholesky factor".into()))?
        / std::f64::consts::PI.sqrt();
    let gauss_norm = std::f64::consts::PI.powf(-(nn as f64) / 2.0) / det_l;

    let degree = f.terms().map(|(mono, _)| mono.degree()).max().unwrap_or(0);
    let qn = degree / 2 + 1;
    let (gh_t, gh_w) = gauss_hermite(qn);
    let nodes = nodes * DENOMINATOR_REFINEMENT;
    let evals = (nodes as u64).saturating_pow(dn as u32).saturating_mul((qn as u64).saturating_pow(nn as u32));
    if evals > budget {
        return Err(Error::BudgetExceeded(format!("{evals} integrand evaluations > {budget}")));
    }
    let s_val = 1.0 / (2.0 * std::f64::consts::PI);
    let rho = lambda.powf(1.0 / m as f64);
    let poly: Vec<(f64, Vec<usize>)> = f
        .terms()
        .map(|(mono, coef)| {
            let idx = mono
                .slots()
                .iter()
                .map(|sl| (sl.depth as usize - 1) * m + sl.coord as usize - 1)
                .collect();
            (coef.eval(s_val, rho), idx)
        })
        .collect();
    let eval_poly = |z: &[Complex64]| -> Complex64 {
        poly.iter()
            .map(|(coef, idx)| {
                idx.iter()
                    .map(|&i| z.get(i).copied().unwrap_or_default())
                    .fold(Complex64::new(*coef, 0.0), |acc, v| acc * v)
            })
            .sum()
    };

    // Gauss-Hermite tensor grid in the numerator variables, as points y and weights
    let mut gh_points: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut idx = vec![0usize; nn];
    loop {
        let sv = DVector::from_fn(nn, |i, _| gh_t[idx[i]]);
        let w: f64 = idx.iter().map(|&i| gh_w[i]).product();
        gh_points.push((&lt_inv * sv, w));
        let mut a = 0;
        loop {
            if a == nn {
                break;
            }
            idx[a] += 1;
            if idx[a] < qn {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == nn {
            break;
        }
    }

    let pi = std::f64::consts::PI;
    let width = half_width / c.sqrt();
    let total = integrate_box(dn, nodes, &vec![width; dn], |xd| {
        let xd = DVector::from_column_slice(xd);
        let re_b = -(&b * &xd);
        let mut im_b = DVector::zeros(nn);
        for &(jn, jd, fr) in phases {
            let pn = num.iter().position(|&v| v == jn).expect("numerator is not a denominator");
            let pd = den.iter().position(|&v| v == jd).unwrap();
            im_b[pn] += fr / xd[pd];
        }
        let mu_re = chol.solve(&re_b);
        let mu_im = chol.solve(&im_b);
        // pi b^T mu - pi x_d^T C x_d
        let bmu = Complex64::new(
            re_b.dot(&mu_re) - im_b.dot(&mu_im),
            re_b.dot(&mu_im) + im_b.dot(&mu_re),
        );
        let expo = pi * bmu - Complex64::new(pi * xd.dot(&(&cdd * &xd)), 0.0);
        if expo.re < -700.0 {
            return Complex64::zero();
        }
        let z_den = &m_den * &xd;
        let z_mu_re = &m_num * &mu_re + &z_den;
        let z_mu_im = &m_num * &mu_im;
        let mut z = vec![Complex64::zero(); big_n];
        let mut acc = Complex64::zero();
        for (y, w) in &gh_points {
            let zy = &m_num * y;
            for i in 0..big_n {
                z[i] = Complex64::new(z_mu_re[i] + zy[i], z_mu_im[i]);
            }
            acc += eval_poly(&z) * *w;
        }
        acc * expo.exp() * gauss_norm
    });
    Ok(total)
}

fn with_estimate(cfg: &WhittakerConfig, run: impl Fn(usize) -> Result<Complex64>) -> Result<WhittakerValue> {
    let v = run(cfg.nodes)?;
    let coarse = run((cfg.nodes / 2).max(8))?;
    Ok(WhittakerValue {
        re: v.re,
        im: v.im,
        error_estimate: (v - coarse).norm(),
    })
}

fn whittaker(cfg: &WhittakerConfig, f: &GaussPoly, u: Option<&LoopMatrix>) -> Result<WhittakerValue> {
    cfg.validate()?;
    if f.m() != cfg.m() {
        return Err(Error::DimensionMismatch(format!(
            "function of {} coordinates per depth on M_{}",
            f.m(),
            cfg.n
        )));
    }
    let depth = cfg.depth().max(f.depth() as usize);
    let mut embed = cfg.embedding(depth);
    if let Some(u) = u {
        embed = cfg.substitution(u, depth)? * embed;
    }
    let phases = cfg.phases();
    with_estimate(cfg, |nodes| {
        oscillatory_integral(f, cfg.lambda, &embed, &phases, nodes, cfg.half_width, cfg.budget)
    })
}

/// `Phi_c(f)` (first side) or `Phi'_d(f)` (second side) on `S(M_3(R))`; `f` has 9 coordinates.
pub fn phi_finite(cfg: &WhittakerConfig, f: &GaussPoly) -> Result<WhittakerValue> {
    if !cfg.finite {
        return Err(Error::Invalid("phi_finite needs the finite configuration".into()));
    }
    whittaker(cfg, f, None)
}

/// `Psi_c(f)` (first side) or `Psi'_d(f)` (second side) on the matrix model.
pub fn psi_loop(cfg: &WhittakerConfig, f: &GaussPoly) -> Result<WhittakerValue> {
    if cfg.finite {
        return Err(Error::Invalid("psi_loop needs the loop configuration".into()));
    }
    whittaker(cfg, f, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Covariance {
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub relerr: f64,
}

/// `(pi^*(u) W, f) = chi(u) (W, f)` for the configured functional `W`:
/// the left side is `W` applied to `pi(u)^{-1} f = f(pi_-(u x))`, resp. `f(pi_-(x u^T))`.
pub fn whittaker_covariance(u: &LoopMatrix, cfg: &WhittakerConfig, f: &GaussPoly) -> Result<Covariance> {
    let params = UnipotentParams::extract(u, cfg.side)?;
    let lhs = whittaker(cfg, f, Some(u))?.value();
    let rhs = character_eval(&params, &cfg.freq) * whittaker(cfg, f, None)?.value();
    if rhs.norm() < 1e-14 {
        return Err(Error::RhsNearZero);
    }
    Ok(Covariance {
        lhs: [lhs.re, lhs.im],
        rhs: [rhs.re, rhs.im],
        relerr: (lhs - rhs).norm() / rhs.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Slot;
    use crate::rational::qr;
    use crate::series::TruncatedSeries;

    fn poly(cs: &[(i64, i64)]) -> TruncatedSeries {
        TruncatedSeries::from_terms(cs.iter().map(|&(e, c)| (e, q(c))), None)
    }

    #[test]
    fn pairing_examples() {
        for n in 2..=3u32 {
            let phi = Model::vector(n).gaussian(2);
            assert_eq!(i_pair(n as usize, &phi).unwrap(), Scalar::monomial(q(1), 0, n as i64));
            for k in 1..=n as usize {
                for a in 1..=n {
                    let f = phi.mul_var(Slot::new(1, a)).unwrap();
                    assert!(i_pair(k, &f).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn table_matches_highest_weights() {
        for n in 2..=4 {
            for e in weight_table(n).unwrap() {
                assert_eq!(e.measured, q(e.expected), "{e:?}");
                assert_eq!(e.expected, if e.u == e.k { -1 } else { 0 });
            }
        }
    }

    #[test]
    fn highest_weight_on_generated_vectors() {
        let model = Model::vector(3);
        let mut rng = crate::samples::rng(11);
        for _ in 0..5 {
            let word = model.random_word(&mut rng, 2, 1);
            let f = model.apply_word(&word, &model.gaussian(6)).unwrap();
            if f.window() == 0 {
                continue;
            }
            for k in 1..=3 {
                for g in positive_generators(3, 2) {
                    assert!(highest_weight_residual(k, &g, &f).unwrap().is_zero(), "{g} k={k}");
                }
            }
        }
        assert!(highest_weight_residual(1, &Generator::offdiag(1, 2, -1), &model.gaussian(4)).is_err());
    }

    #[test]
    fn characters() {
        let p = |d: Vec<Q>, c: Q| UnipotentParams {
            side: Side::First,
            diagonal: d,
            corner: c,
        };
        assert_eq!(character_eval(&p(vec![q(0)], q(0)), &[1.0, 2.0]), Complex64::new(1.0, 0.0));
        let z = character_eval(&p(vec![q(1)], q(0)), &[0.5, 0.0]);
        assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let (a, b) = (p(vec![qr(1, 3)], qr(1, 7)), p(vec![qr(2, 5)], qr(-1, 2)));
        let ab = p(vec![qr(1, 3) + qr(2, 5)], qr(1, 7) - qr(1, 2));
        let c = [1.3, -0.7];
        assert!((character_eval(&ab, &c) - character_eval(&a, &c) * character_eval(&b, &c)).norm() < 1e-14);
    }

    #[test]
    fn extraction() {
        let u = LoopMatrix::from_rows(vec![
            vec![poly(&[(0, 1), (1, 5)]), poly(&[(0, 3)])],
            vec![poly(&[(1, 7)]), poly(&[(0, 1)])],
        ])
        .unwrap();
        let p = UnipotentParams::extract(&u, Side::First).unwrap();
        assert_eq!((p.diagonal.clone(), p.corner.clone()), (vec![q(3)], q(7)));
        assert!(UnipotentParams::extract(&u, Side::Second).is_err());
        let p = UnipotentParams::extract(&u.transpose(), Side::Second).unwrap();
        assert_eq!((p.diagonal, p.corner), (vec![q(3)], q(7)));
    }

    #[test]
    fn slices() {
        let c = WhittakerConfig::loop_case(2, Side::First, vec![1.0, 0.5]);
        assert_eq!(c.slice().len(), 5);
        let c = WhittakerConfig::loop_case(3, Side::Second, vec![1.0, 0.5, 0.25]);
        assert_eq!(c.slice().len(), 9);
        assert!(!c.slice().contains(&(1, 3, 1)));
        let c = WhittakerConfig::finite_case(Side::First, vec![1.0, 0.5]);
        assert_eq!(c.slice().len(), 8);
        assert!(WhittakerConfig::loop_case(2, Side::First, vec![5.0, 0.0]).validate().is_err());
    }

    #[test]
    fn zero_frequency_is_a_product_of_gaussians() {
        let cfg = WhittakerConfig::loop_case(2, Side::First, vec![0.0, 0.0]);
        let phi = Model::matrix(2).gaussian(2);
        let v = psi_loop(&cfg, &phi).unwrap();
        let c = cfg.lambda.powf(-2.0 / 4.0);
        let closed = c.powf(-(cfg.slice().len() as f64) / 2.0);
        assert!((v.value() - Complex64::new(closed, 0.0)).norm() < 1e-6 * closed);
        let second = WhittakerConfig {
            side: Side::Second,
            ..cfg.clone()
        };
        assert!((psi_loop(&second, &phi).unwrap().value() - v.value()).norm() < 1e-12);

        let fin = WhittakerConfig::finite_case(Side::First, vec![0.0, 0.0]);
        let phi9 = GaussPoly::gaussian(9, 1);
        let v = phi_finite(&fin, &phi9).unwrap();
        let c = fin.lambda.powf(-2.0 / 9.0);
        assert!((v.re - c.powf(-4.0)).abs() < 1e-6 * c.powf(-4.0) && v.im.abs() < 1e-12);
    }

    #[test]
    fn oscillatory_value_is_stable() {
        let cfg = WhittakerConfig::loop_case(2, Side::First, vec![1.0, 0.5]);
        let phi = Model::matrix(2).gaussian(2);
        let v = psi_loop(&cfg, &phi).unwrap();
        let fine = psi_loop(&WhittakerConfig { nodes: 66, ..cfg.clone() }, &phi).unwrap();

        assert!(v.value().norm() > 0.0);
        assert!((v.value() - fine.value()).norm() <= 1e-2 * fine.value().norm());
    }

    #[test]
    fn covariance_loop_and_finite() {
        let n2 = |a: Q, b: Q| {
            LoopMatrix::from_rows(vec![
                vec![TruncatedSeries::one(), TruncatedSeries::constant(a)],
                vec![TruncatedSeries::monomial(b, 1), TruncatedSeries::one()],
            ])
            .unwrap()
        };
        let phi = Model::matrix(2).gaussian(2);
        let cfg = WhittakerConfig::loop_case(2, Side::First, vec![1.0, 0.5]);
        let id = whittaker_covariance(&LoopMatrix::identity(2), &cfg, &phi).unwrap();
        assert_eq!(id.relerr, 0.0);
        let r = whittaker_covariance(&n2(qr(1, 2), qr(1, 4)), &cfg, &phi).unwrap();
        assert!(r.relerr <= 2e-2, "{r:?}");
        let second = WhittakerConfig::loop_case(2, Side::Second, vec![1.0, 0.5]);
        let r = whittaker_covariance(&n2(qr(1, 2), qr(1, 4)).transpose(), &second, &phi).unwrap();
        assert!(r.relerr <= 2e-2, "{r:?}");

        // a polynomial factor exercises the complex Gauss-Hermite step
        let f = Model::matrix(2)
            .gaussian(2)
            .mul_var(Slot::new(1, 1))
            .unwrap()
            .mul_var(Slot::new(1, 2))
            .unwrap()
            .add(&phi)
            .unwrap();
        let r = whittaker_covariance(&n2(qr(1, 2), qr(1, 4)), &cfg, &f).unwrap();
        assert!(r.relerr <= 2e-2, "{r:?}");

        let u3 = LoopMatrix::from_constant(&[
            vec![q(1), qr(3, 10), qr(1, 10)],
            vec![q(0), q(1), qr(-1, 5)],
            vec![q(0), q(0), q(1)],
        ]);
        let fin = WhittakerConfig::finite_case(Side::First, vec![1.0, 0.5]);
        let r = whittaker_covariance(&u3, &fin, &GaussPoly::gaussian(9, 1)).unwrap();
        assert!(r.relerr <= 5e-2, "{r:?}");
        let fin2 = WhittakerConfig::finite_case(Side::Second, vec![1.0, 0.5]);
        let r = whittaker_covariance(&u3.transpose(), &fin2, &GaussPoly::gaussian(9, 1)).unwrap();
        assert!(r.relerr <= 5e-2, "{r:?}");
    }
}
