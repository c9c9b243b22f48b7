//! Group action on `S(R^n_-)_lambda` through point evaluators.
//!
//! `pi(t^l, (g, mu)) f(x) = lambda^l ∫_{V_g} f(g^{-1} x + y) mu(dy)` leaves the
//! class of Gaussian polynomials in general, so operators are realized as
//! closures over points of `R^n_-` (flattened, slot `(i, a)` at `(i-1) n + a - 1`).
//! Substitutions are exact up to floating point; integrals use the offset
//! midpoint rule over an orthonormal frame of `V_g`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dvr::{flatten, lattice_quotient, pole_order};
use crate::error::{Error, Result};
use crate::fock::GaussPoly;
use crate::matrix::{val_det, LoopMatrix, LoopVector};
use crate::quadrature::integrate_box;
use crate::rational::{q_to_f64, Q};
use crate::samples;
use crate::semigroup::{is_central_g, MeasuredElement};
use crate::series::TruncatedSeries;

pub use crate::matrix::orthogonality_check;

/// Largest `dim V_g` the quadrature budget accepts.
pub const MAX_QUADRATURE_DIM: usize = 4;

/// Extra `t`-adic precision requested when inverting matrices, on top of the probe depth.
const INVERSE_MARGIN: i64 = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Depth of the probe points.
    #[serde(default = "default_eval_depth")]
    pub eval_depth: usize,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Box half-width in units of the Gaussian width.
    #[serde(rename = "L", default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_lambda() -> f64 {
    2.0
}
fn default_eval_depth() -> usize {
    3
}
fn default_nodes() -> usize {
    33
}
fn default_half_width() -> f64 {
    6.0
}
fn default_probes() -> usize {
    20
}

impl Default for ActionConfig {
    fn default() -> Self {
        Self {
            lambda: default_lambda(),
            eval_depth: default_eval_depth(),
            nodes: default_nodes(),
            half_width: default_half_width(),
            probes: default_probes(),
            seed: 0,
        }
    }
}

impl ActionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.nodes < 8 {
            return Err(Error::Invalid(format!("need at least 8 nodes, got {}", self.nodes)));
        }
        if !(self.half_width >= 4.0) {
            return Err(Error::Invalid(format!("half-width must be >= 4, got {}", self.half_width)));
        }
        if self.eval_depth == 0 {
            return Err(Error::Invalid("probe depth must be positive".into()));
        }
        Ok(())
    }

    /// Seeded probe points for `n` coordinates per depth, spread over the Gaussian width.
    pub fn probe_points(&self, n: usize) -> Vec<Vec<f64>> {
        let mut rng = samples::rng(self.seed);
        let width = gaussian_width(self.lambda, n);
        (0..self.probes)
            .map(|_| {
                (0..n * self.eval_depth)
                    .map(|_| width * rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect()
    }
}

/// `1 / sqrt(c)` for `c = lambda^{-2/m}`.
fn gaussian_width(lambda: f64, m: usize) -> f64 {
    lambda.powf(1.0 / m as f64)
}

/// A function on `R^n_-`, evaluated at finitely supported points.
pub trait PointFunction {
    fn n(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<f64>;
    /// Typical width of the Gaussian envelope, used to size quadrature boxes.
    fn spread(&self) -> f64;
    /// Width of the envelope in its narrowest direction, used to pick the step.
    fn narrowest(&self) -> f64 {
        self.spread()
    }
}

/// Cap on the node refinement for strongly sheared envelopes.
const MAX_NODE_RATIO: f64 = 8.0;

pub type Evaluator = Box<dyn PointFunction>;

struct PolyEval {
    f: GaussPoly,
    lambda: f64,
}

impl PointFunction for PolyEval {
    fn n(&self) -> usize {
        self.f.m()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        let needed = self.f.depth() as usize * self.f.m();
        if x.len() >= needed {
            return self.f.eval_numeric(x, self.lambda);
        }
        let mut padded = x.to_vec();
        padded.resize(needed, 0.0);
        self.f.eval_numeric(&padded, self.lambda)
    }

    fn spread(&self) -> f64 {
        gaussian_width(self.lambda, self.f.m())
    }
}

/// `f` read as an element of `S(R^m_-)_lambda`.
pub fn poly_evaluator(f: &GaussPoly, lambda: f64) -> Evaluator {
    Box::new(PolyEval {
        f: f.clone(),
        lambda,
    })
}

/// Floating-point Laurent matrix `sum_k A_k t^k`, `k` in `lo..=hi`.
#[derive(Clone, Debug)]
struct NumLaurent {
    n: usize,
    lo: i64,
    coeffs: Vec<Vec<f64>>,
    /// `None` when every coefficient past `hi` is zero.
    known_below: Option<i64>,
}

impl NumLaurent {
    /// Factors by which `x -> f(a x)` rescales the widest and the narrowest
    /// directions of the envelope of `f`, read off the constant coefficient.
    fn envelope_factors(&self) -> (f64, f64) {
        let Some(c) = usize::try_from(-self.lo).ok().and_then(|i| self.coeffs.get(i)) else {
            return (1.0, 1.0);
        };
        let sv = DMatrix::from_row_slice(self.n, self.n, c).singular_values();
        let (smin, smax) = (sv.min(), sv.max());
        if smin > 0.0 { (1.0 / smin, 1.0 / smax) } else { (1.0, 1.0) }
    }


    fn from_matrix(g: &LoopMatrix) -> Self {
        let n = g.n();
        let lo = g.min_valuation().unwrap_or(0).min(0);
        let known_below = g.order();
        let hi = match known_below {
            Some(t) => t - 1,
            None => g
                .entries()
                .iter()
                .filter_map(|e| e.degree())
                .max()
                .unwrap_or(0),
        };
        let coeffs = (lo..=hi.max(lo))
            .map(|k| {
                g.coefficient(k)
                    .iter()
                    .flat_map(|row| row.iter().map(q_to_f64))
                    .collect()
            })
            .collect();
        Self {
            n,
            lo,
            coeffs,
            known_below,
        }
    }

    fn pole(&self) -> usize {
        (-self.lo).max(0) as usize
    }

    /// `pi_-(A x)` for `x` of depth `p`, flattened at depth `p + pole`.
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let p = x.len() / n;
        if let Some(t) = self.known_below {
            if t < p as i64 {
                return Err(Error::InsufficientPrecision(format!(
                    "matrix known below t^{t}, probe depth {p} needs t^{}",
                    p
                )));
            }
        }
        let depth = p + self.pole();
        let mut out = vec![0.0; depth * n];
        for i in 1..=depth as i64 {
            for (off, a) in self.coeffs.iter().enumerate() {
                let k = self.lo + off as i64;
                let src = i + k;
                if src < 1 || src > p as i64 {
                    continue;
                }
                let xs = &x[(src as usize - 1) * n..src as usize * n];
                let o = &mut out[(i as usize - 1) * n..i as usize * n];
                for r in 0..n {
                    o[r] += (0..n).map(|s| a[r * n + s] * xs[s]).sum::<f64>();
                }
            }
        }
        Ok(out)
    }
}

struct Substitute {
    inner: Evaluator,
    a: NumLaurent,
    wide: f64,
    narrow: f64,
}

impl PointFunction for Substitute {
    fn n(&self) -> usize {
        self.a.n
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.inner.eval(&self.a.apply(x)?)
    }

    fn spread(&self) -> f64 {
        self.inner.spread() * self.wide
    }

    fn narrowest(&self) -> f64 {
        self.inner.narrowest() * self.narrow
    }
}

struct Integrate {
    inner: Evaluator,
    a: NumLaurent,
    frame: Vec<Vec<f64>>,
    density: f64,
    nodes: usize,
    half_width: f64,
    wide: f64,
    narrow: f64,
}

impl PointFunction for Integrate {
    fn n(&self) -> usize {
        self.a.n
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        let base = self.a.apply(x)?;
        let dim = self.frame.len();
        if dim == 0 {
            return Ok(self.density * self.inner.eval(&base)?);
        }
        let len = self.frame.iter().map(Vec::len).max().unwrap_or(0).max(base.len());
        let mut y = base.clone();
        y.resize(len, 0.0);
        let w = self.half_width * self.inner.spread();
        // keep the step as fine relative to the narrowest direction as the
        // configured grid is for the canonical Gaussian
        let ratio = (self.inner.spread() / self.inner.narrowest()).clamp(1.0, MAX_NODE_RATIO);
        let nodes = (self.nodes as f64 * ratio).ceil() as usize;
        let mut failure = None;
        let total = integrate_box(dim, nodes, &vec![w; dim], |u| {
            y[..base.len()].copy_from_slice(&base);
            y[base.len()..].iter_mut().for_each(|v| *v = 0.0);
            for (uk, e) in u.iter().zip(&self.frame) {
                for (yi, ei) in y.iter_mut().zip(e) {
                    *yi += uk * ei;
                }
            }
            match self.inner.eval(&y) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(self.density * total),
        }
    }

    fn spread(&self) -> f64 {
        self.inner.spread() * self.wide
    }

    fn narrowest(&self) -> f64 {
        self.inner.narrowest() * self.narrow
    }
}

/// How the measure on `V_g` is specified.
#[derive(Clone, Copy, Debug)]
pub enum VolumeForm<'a> {
    /// Haar measure giving the parallelotope of `basis` volume `scale`.
    Haar(&'a Q),
    /// Orthonormal frames (for the loop inner product) have volume 1.
    Orthonormal,
}

fn inverse_for(g: &LoopMatrix, cfg: &ActionConfig) -> Result<NumLaurent> {
    let ginv = g.inverse(cfg.eval_depth as i64 + INVERSE_MARGIN)?;
    Ok(NumLaurent::from_matrix(&ginv))
}

/// Orthonormal frame of `span(basis)` and `|det R|` of the basis in that frame.
fn orthonormal_frame(basis: &[LoopVector]) -> (Vec<Vec<f64>>, f64) {
    if basis.is_empty() {
        return (Vec::new(), 1.0);
    }
    let depth = basis.iter().map(|v| pole_order(v)).max().unwrap_or(0);
    let cols: Vec<Vec<f64>> = basis
        .iter()
        .map(|v| flatten(v, depth).iter().map(q_to_f64).collect())
        .collect();
    let rows = cols[0].len();
    let b = DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i]);
    let qr = b.qr();
    let (qm, r) = (qr.q(), qr.r());
    let det_r: f64 = (0..cols.len()).map(|i| r[(i, i)]).product();
    let frame = (0..cols.len())
        .map(|j| qm.column(j).iter().copied().collect())
        .collect();
    (frame, det_r.abs())
}

/// `sqrt(det Gram)` of `basis` under the loop inner product.
pub fn orthonormal_volume(basis: &[LoopVector]) -> f64 {
    orthonormal_frame(basis).1
}

/// `x -> inner(pi_-(u^{-1} x))`, the action of `(u, mu_st)` for `u` in `GL_n(R)`.
pub fn substitute(u: &LoopMatrix, inner: Evaluator, cfg: &ActionConfig) -> Result<Evaluator> {
    let (v, _) = val_det(u)?;
    if v != 0 || !u.is_integral() {
        return Err(Error::NotInvertible("substitution needs u in GL_n(R)".into()));
    }
    check_n(u, &*inner)?;
    let a = inverse_for(u, cfg)?;
    let (wide, narrow) = a.envelope_factors();
    Ok(Box::new(Substitute {
        inner,
        a,
        wide,
        narrow,
    }))
}

/// `pi_c f(x) = f(c^{-1} x)`.
pub fn rescale(c: f64, inner: Evaluator) -> Result<Evaluator> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::Invalid(format!("rescaling by {c}")));
    }
    let n = inner.n();
    let mut id = vec![0.0; n * n];
    for i in 0..n {
        id[i * n + i] = 1.0 / c;
    }
    Ok(Box::new(Substitute {
        inner,
        a: NumLaurent {
            n,
            lo: 0,
            coeffs: vec![id],
            known_below: None,
        },
        wide: c.abs(),
        narrow: c.abs(),
    }))
}

/// `x -> lambda^l ∫_{V_g} inner(g^{-1} x + y) mu(dy)` with `mu` described by `form` on `basis`.
pub fn integral_operator(
    l: i64,
    g: &LoopMatrix,
    basis: &[LoopVector],
    form: VolumeForm<'_>,
    lambda: f64,
    inner: Evaluator,
    cfg: &ActionConfig,
) -> Result<Evaluator> {
    cfg.validate()?;
    check_n(g, &*inner)?;
    if basis.len() > MAX_QUADRATURE_DIM {
        return Err(Error::DimensionTooLarge {
            dim: basis.len(),
            max: MAX_QUADRATURE_DIM,
        });
    }
    // the box is [-L, L] for the canonical Gaussian at the configured lambda,
    // and grows with evaluators that widen the envelope
    let unit = gaussian_width(cfg.lambda, inner.n());
    if cfg.half_width < 3.0 * unit {
        return Err(Error::Invalid(format!(
            "half width {} is below three Gaussian widths ({:.3}) at lambda = {}",
            cfg.half_width,
            3.0 * unit,
            cfg.lambda
        )));
    }
    let (frame, det_r) = orthonormal_frame(basis);
    let density = match form {
        VolumeForm::Haar(scale) => q_to_f64(scale) / det_r,
        VolumeForm::Orthonormal => 1.0,
    } * lambda.powi(l as i32);
    let a = inverse_for(g, cfg)?;
    let (wide, narrow) = a.envelope_factors();
    Ok(Box::new(Integrate {
        inner,
        a,
        wide,
        narrow,
        frame,
        density,
        nodes: cfg.nodes,
        half_width: cfg.half_width / unit,
    }))
}

/// `pi_lambda(m)` applied to an evaluator.
pub fn act(m: &MeasuredElement, inner: Evaluator, lambda: f64, cfg: &ActionConfig) -> Result<Evaluator> {
    integral_operator(m.l, &m.g, &m.mu.basis, VolumeForm::Haar(&m.mu.scale), lambda, inner, cfg)
}

/// `pi(u, mu_st) f` for `u` in `GL_n(R)`.
pub fn act_substitution(u: &LoopMatrix, f: &GaussPoly, cfg: &ActionConfig) -> Result<Evaluator> {
    substitute(u, poly_evaluator(f, cfg.lambda), cfg)
}

/// `pi(t^l, (g, mu)) f` by quadrature over `V_g`.
pub fn act_integral(m: &MeasuredElement, f: &GaussPoly, cfg: &ActionConfig) -> Result<Evaluator> {
    act(m, poly_evaluator(f, cfg.lambda), cfg.lambda, cfg)
}

fn check_n(g: &LoopMatrix, f: &dyn PointFunction) -> Result<()> {
    if g.n() != f.n() {
        return Err(Error::DimensionMismatch(format!(
            "{0}x{0} matrix acting on functions of {1} coordinates",
            g.n(),
            f.n()
        )));
    }
    Ok(())
}

/// `max |a - b| / max |b|` over the probes.
pub fn relative_gap(a: &dyn PointFunction, b: &dyn PointFunction, points: &[Vec<f64>]) -> Result<f64> {
    let mut diff: f64 = 0.0;
    let mut size: f64 = 0.0;
    for x in points {
        let (va, vb) = (a.eval(x)?, b.eval(x)?);
        diff = diff.max((va - vb).abs());
        size = size.max(vb.abs());
    }
    if size == 0.0 {
        return Ok(diff);
    }
    Ok(diff / size)
}

#[derive(Clone, Debug, Serialize)]
pub struct KFixedReport {
    pub dim: usize,
    pub l: i64,
    /// `max |pi(s(g)) phi - phi| / max |phi|` over the probes.
    pub residual: f64,
    /// `∫_{V} phi(h^{-1} x + y) dy / phi(x)` with `h = t^l g`, worst probe.
    pub raw_ratio: f64,
    /// `c^{-dim/2}`.
    pub expected_ratio: f64,
    /// `lambda^l` times the raw ratio; should be 1.
    pub scalar: f64,
    pub expected_scalar: f64,
}

/// Invariance of `phi_c` under `s(g) = (t^{-l}, (t^l g, mu_{t^l g}))` for `g` in the orthogonal loop group.
pub fn k_fixed_residual(g: &LoopMatrix, cfg: &ActionConfig) -> Result<KFixedReport> {
    cfg.validate()?;
    if !orthogonality_check(g) {
        return Err(Error::Invalid("g(t) g(t^{-1})^T != I".into()));
    }
    let n = g.n();
    let l = (-g.min_valuation().unwrap_or(0)).max(0);
    let h = g.scale(&TruncatedSeries::monomial(Q::from_integer(1.into()), l));
    let lq = lattice_quotient(&h)?;
    let phi = GaussPoly::gaussian(n, 1);
    let raw = integral_operator(0, &h, &lq.basis, VolumeForm::Orthonormal, cfg.lambda, poly_evaluator(&phi, cfg.lambda), cfg)?;
    let target = poly_evaluator(&phi, cfg.lambda);
    let lam_l = cfg.lambda.powi(-l as i32);
    let c = cfg.lambda.powf(-2.0 / n as f64);
    let expected_ratio = c.powf(-(lq.dim as f64) / 2.0);
    let points = cfg.probe_points(n);
    let mut diff: f64 = 0.0;
    let mut size: f64 = 0.0;
    let mut worst_ratio = expected_ratio;
    for x in &points {
        let (r, p) = (raw.eval(x)?, target.eval(x)?);
        diff = diff.max((lam_l * r - p).abs());
        size = size.max(p.abs());
        let ratio = r / p;
        if (ratio - expected_ratio).abs() > (worst_ratio - expected_ratio).abs() {
            worst_ratio = ratio;
        }
    }
    Ok(KFixedReport {
        dim: lq.dim,
        l,
        residual: if size > 0.0 { diff / size } else { diff },
        raw_ratio: worst_ratio,
        expected_ratio,
        scalar: lam_l * worst_ratio,
        expected_scalar: lam_l * expected_ratio,
    })
}

/// Group elements used by the intertwining and centrality checks.
#[derive(Clone, Debug)]
pub enum TestElement {
    /// `(u, mu_st)` with `u` in `SL_n(R)`.
    Substitution(LoopMatrix),
    /// `(t^l I, (t^k, mu_st))`.
    Monomial { l: i64, k: Vec<i64> },
}

impl TestElement {
    fn n(&self) -> usize {
        match self {
            TestElement::Substitution(u) => u.n(),
            TestElement::Monomial { k, .. } => k.len(),
        }
    }

    fn measured(&self) -> Result<MeasuredElement> {
        match self {
            TestElement::Substitution(u) => MeasuredElement::standard(u.clone()),
            TestElement::Monomial { l, k } => {
                if k.iter().any(|&e| e < 0) {
                    return Err(Error::Invalid("diagonal exponents must be >= 0".into()));
                }
                let mut m = MeasuredElement::standard(LoopMatrix::t_power_diag(k))?;
                m.l = *l;
                Ok(m)
            }
        }
    }

    fn apply(&self, inner: Evaluator, lambda: f64, cfg: &ActionConfig) -> Result<Evaluator> {
        act(&self.measured()?, inner, lambda, cfg)
    }
}

/// `pi_c pi_lambda(g) f` against `pi_{|c|^n lambda}(g) pi_c f`, relative, at the probes.
pub fn pi_c_intertwine_residual(c: f64, g: &TestElement, f: &GaussPoly, cfg: &ActionConfig) -> Result<f64> {
    cfg.validate()?;
    let n = g.n();
    match g {
        TestElement::Substitution(u) => {
            let (v, d) = val_det(u)?;
            if v != 0 || d != Q::from_integer(1.into()) || !u.is_integral() {
                return Err(Error::Invalid("substitution case needs u in SL_n(R)".into()));
            }
        }
        TestElement::Monomial { l, k } => {
            if k.iter().sum::<i64>() + l * n as i64 != 0 {
                return Err(Error::Invalid("monomial case needs k_1 + ... + k_n + l n = 0".into()));
            }
        }
    }
    let lambda = cfg.lambda;
    let lhs = rescale(c, g.apply(poly_evaluator(f, lambda), lambda, cfg)?)?;
    let rhs = g.apply(rescale(c, poly_evaluator(f, lambda))?, c.abs().powi(n as i32) * lambda, cfg)?;
    relative_gap(&*lhs, &*rhs, &cfg.probe_points(n))
}

/// `pi(a I) pi(g) f` against `pi(g) pi(a I) f` for central `a` in `R`.
pub fn central_g_commute_residual(
    a: &TruncatedSeries,
    g: &TestElement,
    f: &GaussPoly,
    cfg: &ActionConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !is_central_g(a) {
        return Err(Error::Invalid(format!("{a} is not in the central subgroup")));
    }
    if a.valuation().is_none_or(|v| v < 0) {
        return Err(Error::Invalid("central element must lie in R".into()));
    }
    let n = g.n();
    let ai = MeasuredElement::standard(LoopMatrix::diag(vec![a.clone(); n]))?;
    let lambda = cfg.lambda;
    let lhs = act(&ai, g.apply(poly_evaluator(f, lambda), lambda, cfg)?, lambda, cfg)?;
    let rhs = g.apply(act(&ai, poly_evaluator(f, lambda), lambda, cfg)?, lambda, cfg)?;
    relative_gap(&*lhs, &*rhs, &cfg.probe_points(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};
    use crate::samples::{random_gauss_poly, rng};
    use crate::semigroup::convolve;

    fn rotation() -> LoopMatrix {
        let s = |c: Q, e| TruncatedSeries::monomial(c, e);
        LoopMatrix::from_rows(vec![
            vec![s(qr(3, 5), 0), s(qr(4, 5), 1)],
            vec![s(qr(-4, 5), -1), s(qr(3, 5), 0)],
        ])
        .unwrap()
    }

    fn cfg() -> ActionConfig {
        ActionConfig {
            probes: 8,
            ..ActionConfig::default()
        }
    }

    fn gap(a: &Evaluator, b: &Evaluator, cfg: &ActionConfig, n: usize) -> f64 {
        relative_gap(&**a, &**b, &cfg.probe_points(n)).unwrap()
    }

    #[test]
    fn config_json_round_trip() {
        let c: ActionConfig = serde_json::from_str(r#"{"lambda": 1.5, "L": 5, "nodes": 20, "probes": 4, "seed": 9}"#).unwrap();
        assert_eq!(c.half_width, 5.0);
        assert_eq!(c.eval_depth, 3);
        assert!(c.validate().is_ok());
        assert!(ActionConfig { nodes: 4, ..c.clone() }.validate().is_err());
        assert!(ActionConfig { half_width: 3.0, ..c.clone() }.validate().is_err());
        assert_eq!(c.probe_points(2), c.probe_points(2));
    }

    #[test]
    fn identity_substitution() {
        let cfg = cfg();
        let f = random_gauss_poly(&mut rng(1), 2, 3, 6);
        let a = act_substitution(&LoopMatrix::identity(2), &f, &cfg).unwrap();
        let b = poly_evaluator(&f, cfg.lambda);
        assert_eq!(gap(&a, &b, &cfg, 2), 0.0);
        let id = act_integral(&MeasuredElement::identity(2), &f, &cfg).unwrap();
        assert_eq!(gap(&id, &b, &cfg, 2), 0.0);
    }

    #[test]
    fn permutation_substitution() {
        let cfg = cfg();
        let f = random_gauss_poly(&mut rng(2), 2, 2, 6);
        let p = LoopMatrix::from_constant(&[vec![q(0), q(1)], vec![q(1), q(0)]]);
        let a = act_substitution(&p, &f, &cfg).unwrap();
        for x in cfg.probe_points(2) {
            let swapped: Vec<f64> = x.chunks(2).flat_map(|c| [c[1], c[0]]).collect();
            let want = f.eval_numeric(&swapped, cfg.lambda).unwrap();
            assert!((a.eval(&x).unwrap() - want).abs() <= 1e-14 * want.abs().max(1.0));
        }
    }

    #[test]
    fn unipotent_substitution() {
        // u = I + t E_12, u^{-1} = I - t E_12: (u^{-1} x)^1_{-i} = x^1_{-i} - x^2_{-i-1}
        let cfg = cfg();
        let u = LoopMatrix::from_rows(vec![
            vec![TruncatedSeries::one(), TruncatedSeries::poly_i64(&[0, 1])],
            vec![TruncatedSeries::zero(), TruncatedSeries::one()],
        ])
        .unwrap();
        let f = random_gauss_poly(&mut rng(3), 2, 4, 8);
        let a = act_substitution(&u, &f, &cfg).unwrap();
        for x in cfg.probe_points(2) {
            let mut y = x.clone();
            y.resize(8, 0.0);
            let p = x.len() / 2;
            for i in 0..p {
                let next = if i + 1 < p { x[2 * (i + 1) + 1] } else { 0.0 };
                y[2 * i] = x[2 * i] - next;
            }
            let want = f.eval_numeric(&y, cfg.lambda).unwrap();
            assert!((a.eval(&x).unwrap() - want).abs() <= 1e-12 * want.abs().max(1e-3));
        }
    }

    #[test]
    fn integral_of_t_matches_pi_t() {
        let cfg = cfg();
        let mut r = rng(4);
        let tm = MeasuredElement::standard(LoopMatrix::scalar(2, q(1), 1)).unwrap();
        for _ in 0..5 {
            let f = random_gauss_poly(&mut r, 2, 3, 6);
            let lhs = act_integral(&tm, &f, &cfg).unwrap();
            let rhs = poly_evaluator(&f.pi_t().unwrap(), cfg.lambda);
            assert!(gap(&lhs, &rhs, &cfg, 2) < 1e-8);
        }
        let phi = GaussPoly::gaussian(2, 3);
        let lhs = act_integral(&tm, &phi, &cfg).unwrap();
        for x in cfg.probe_points(2) {
            let want = cfg.lambda * phi.eval_numeric(&{ let mut y = x.clone(); y.resize(6, 0.0); y }, cfg.lambda).unwrap();
            assert!((lhs.eval(&x).unwrap() - want).abs() < 1e-8 * want.abs().max(1e-3));
        }
    }

    #[test]
    fn homomorphism_on_diagonals() {
        // class normalization trades t I for lambda, so f must be a pi_t-eigenvector
        use crate::affine::{Generator, Model};
        let cfg = cfg();
        let model = Model::vector(2);
        let word = [Generator::offdiag(1, 2, -1), Generator::cartan(1, 2, 1)];
        let f = model.apply_word(&word, &model.gaussian(8)).unwrap();
        assert!(f.window() >= 5);
        let m1 = MeasuredElement::with_scale(LoopMatrix::t_power_diag(&[1, 0]), qr(3, 2)).unwrap();
        let m2 = MeasuredElement::with_scale(LoopMatrix::t_power_diag(&[0, 1]), qr(2, 5)).unwrap();
        let lam = cfg.lambda;
        let lhs = act(&m1, act(&m2, poly_evaluator(&f, lam), lam, &cfg).unwrap(), lam, &cfg).unwrap();
        let prod = convolve(&m1, &m2).unwrap();
        assert_eq!(prod.l, 1);
        let rhs = act(&prod, poly_evaluator(&f, lam), lam, &cfg).unwrap();
        assert!(gap(&lhs, &rhs, &cfg, 2) < 1e-6);
    }

    #[test]
    fn loop_rotation_fixes_gaussian() {
        assert!(orthogonality_check(&rotation()));
        assert!(orthogonality_check(&LoopMatrix::t_power_diag(&[1, -1])));
        assert!(!orthogonality_check(&LoopMatrix::diag(vec![
            TruncatedSeries::constant(q(2)),
            TruncatedSeries::constant(qr(1, 2))
        ])));
        let cfg = cfg();
        let rep = k_fixed_residual(&rotation(), &cfg).unwrap();
        assert_eq!((rep.dim, rep.l), (2, 1));
        assert!(rep.residual <= 1e-8, "{rep:?}");
        assert!((rep.raw_ratio - rep.expected_ratio).abs() <= 1e-8 * rep.expected_ratio);
        let flat = LoopMatrix::from_constant(&[vec![qr(3, 5), qr(-4, 5)], vec![qr(4, 5), qr(3, 5)]]);
        let rep = k_fixed_residual(&flat, &cfg).unwrap();
        assert_eq!(rep.dim, 0);
        assert!(rep.residual <= 1e-12);
        assert_eq!(k_fixed_residual(&LoopMatrix::identity(2), &cfg).unwrap().residual, 0.0);
    }

    #[test]
    fn rescaling_intertwines() {
        let cfg = cfg();
        let f = random_gauss_poly(&mut rng(6), 2, 3, 6);
        let sl2 = TestElement::Substitution(LoopMatrix::from_constant(&[vec![q(2), q(1)], vec![q(1), q(1)]]));
        assert_eq!(pi_c_intertwine_residual(1.0, &sl2, &f, &cfg).unwrap(), 0.0);
        assert!(pi_c_intertwine_residual(2.0, &sl2, &f, &cfg).unwrap() <= 1e-10);
        let mono = TestElement::Monomial { l: -1, k: vec![2, 0] };
        assert!(pi_c_intertwine_residual(2.0, &mono, &f, &cfg).unwrap() <= 1e-6);
        let bad = TestElement::Monomial { l: 0, k: vec![2, 0] };
        assert!(pi_c_intertwine_residual(2.0, &bad, &f, &cfg).is_err());
    }

    #[test]
    fn central_elements_commute() {
        let cfg = ActionConfig { probes: 3, ..ActionConfig::default() };
        let f = random_gauss_poly(&mut rng(7), 2, 2, 5);
        let rot = TestElement::Substitution(LoopMatrix::from_constant(&[vec![qr(3, 5), qr(-4, 5)], vec![qr(4, 5), qr(3, 5)]]));
        assert_eq!(central_g_commute_residual(&TruncatedSeries::one(), &rot, &f, &cfg).unwrap(), 0.0);
        let t = TruncatedSeries::poly_i64(&[0, 1]);
        assert!(central_g_commute_residual(&t, &rot, &f, &cfg).unwrap() <= 1e-8);
        let mono = TestElement::Monomial { l: -1, k: vec![2, 0] };
        let a = TruncatedSeries::poly_i64(&[1, 1]);
        assert!(central_g_commute_residual(&a, &mono, &f, &cfg).unwrap() <= 1e-6);
    }

    #[test]
    fn too_many_dimensions() {
        let cfg = cfg();
        let f = GaussPoly::gaussian(2, 1);
        let m = MeasuredElement::standard(LoopMatrix::t_power_diag(&[3, 2])).unwrap();
        assert!(matches!(act_integral(&m, &f, &cfg), Err(Error::DimensionTooLarge { dim: 5, .. })));
    }
}
