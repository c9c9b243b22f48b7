//! Verification suites. Each suite expands into per-case records carrying a
//! residual, the tolerance it was held to, and whether it was computed exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::action::{central_g_commute_residual, k_fixed_residual, pi_c_intertwine_residual, ActionConfig, TestElement};
use crate::affine::{window_cost, CopyTag, Generator, Model};
use crate::dvr::{lattice_quotient_from, smith_decompose};
use crate::error::{Error, Result};
use crate::fock::{GaussPoly, Scalar, Slot};
use crate::functionals::{
    highest_weight_residual, positive_generators, psi_loop, weight_table, whittaker_covariance, Side,
    WeightEntry, WhittakerConfig,
};
use crate::hecke::{
    circle_hecke, coset_representatives, mat_mul_i, padic_extend, padic_extend_with, padic_hecke,
    random_padic_matrix, FourierPoly, PAdicFunction,
};
use crate::matrix::{val_det, LoopMatrix};
use crate::rational::{pow_q, q, q_to_f64, qr, Q};
use crate::samples::{
    self, random_gauss_poly, random_gl0_matrix, random_integral_matrix, random_scale, random_unit,
};
use crate::semigroup::{commutation_formula, commutation_scalar, convolve, convolve_raw, invert, same_class, MeasuredElement};
use crate::series::TruncatedSeries;
use crate::tables::{level_table, LevelEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Levels,
    Copies,
    Brackets,
    Eigen,
    Chevalley,
    HighestWeight,
    Snf,
    Semigroup,
    KFixed,
    Intertwine,
    Whittaker,
    Hecke,
    Window,
}

impl Suite {
    pub const ALL: [Suite; 13] = [
        Suite::Levels,
        Suite::Copies,
        Suite::Brackets,
        Suite::Eigen,
        Suite::Chevalley,
        Suite::HighestWeight,
        Suite::Snf,
        Suite::Semigroup,
        Suite::KFixed,
        Suite::Intertwine,
        Suite::Whittaker,
        Suite::Hecke,
        Suite::Window,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Levels => "levels",
            Suite::Copies => "copies",
            Suite::Brackets => "brackets",
            Suite::Eigen => "eigen",
            Suite::Chevalley => "chevalley",
            Suite::HighestWeight => "highest-weight",
            Suite::Snf => "snf",
            Suite::Semigroup => "semigroup",
            Suite::KFixed => "k-fixed",
            Suite::Intertwine => "intertwine",
            Suite::Whittaker => "whittaker",
            Suite::Hecke => "hecke",
            Suite::Window => "window",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(Suite::name).collect();
                Error::Invalid(format!("unknown suite '{s}' (expected one of: {}, all)", names.join(", ")))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Vector,
    Matrix,
}

impl ModelChoice {
    pub fn model(&self, n: u32) -> Model {
        match self {
            ModelChoice::Vector => Model::vector(n),
            ModelChoice::Matrix => Model::matrix(n),
        }
    }
}

/// Numeric and model parameters shared by all suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteParams {
    pub n: u32,
    pub model: ModelChoice,
    /// Ambient depth `D`; raised per case when a word needs more room.
    pub depth: u32,
    /// Target exactness window `W` of every exact result.
    pub window: u32,
    pub lambda: f64,
    pub nodes: usize,
    pub half_width: f64,
    pub probes: usize,
    pub seed: u64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            n: 2,
            model: ModelChoice::Vector,
            depth: 10,
            window: 2,
            lambda: 2.0,
            nodes: 33,
            half_width: 6.0,
            probes: 20,
            seed: 0,
        }
    }
}

impl SuiteParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: String| Err(Error::Invalid(format!("field '{field}': {why}")));
        if !(2..=4).contains(&self.n) {
            return bad("n", format!("{} outside 2..=4", self.n));
        }
        if self.window < 1 {
            return bad("window", "must be >= 1".into());
        }
        if self.depth < self.window {
            return bad("depth", format!("{} is below the target window {}", self.depth, self.window));
        }
        if self.depth > 24 {
            return bad("depth", format!("{} exceeds 24", self.depth));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return bad("lambda", format!("{} is not a positive number", self.lambda));
        }
        if self.nodes < 8 || self.nodes > 256 {
            return bad("nodes", format!("{} outside 8..=256", self.nodes));
        }
        if !(self.half_width >= 4.0) || !self.half_width.is_finite() {
            return bad("half_width", format!("{} is below 4", self.half_width));
        }
        if self.probes == 0 {
            return bad("probes", "must be >= 1".into());
        }
        Ok(())
    }

    pub fn action_config(&self) -> ActionConfig {
        ActionConfig {
            lambda: self.lambda,
            nodes: self.nodes,
            half_width: self.half_width,
            probes: self.probes,
            seed: self.seed,
            ..ActionConfig::default()
        }
    }

    /// Depth giving a final window of at least `window` after spending `cost`.
    pub(crate) fn depth_for(&self, cost: u32) -> u32 {
        self.depth.max(self.window.max(2) + cost)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Not evaluable at these parameters (e.g. a vanishing reference value).
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub suite: Suite,
    pub id: String,
    pub params: Value,
    /// Exact cases: number of nonzero coefficients left over. Numeric cases: relative error.
    /// Absent when the case raised an error.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub exact: bool,
    pub status: Status,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Case {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub params: SuiteParams,
    pub suites: Vec<Suite>,
    pub summary: Summary,
    pub cases: Vec<Case>,
    /// Highest weights of the pairings `I_k` on the simple coroots, at `n`.
    pub weight_table: Vec<WeightEntry>,
    /// Levels of each copy of the configured model.
    pub levels: Vec<LevelEntry>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

struct Recorder {
    suite: Suite,
    cases: Vec<Case>,
}

impl Recorder {
    fn new(suite: Suite) -> Self {
        Self { suite, cases: Vec::new() }
    }

    fn push(&mut self, id: String, params: Value, residual: Option<f64>, tolerance: f64, exact: bool, status: Status, note: String) {
        self.cases.push(Case {
            suite: self.suite,
            id,
            params,
            residual,
            tolerance,
            exact,
            status,
            note,
        });
    }

    /// Exact check: passes iff the count of leftover terms is zero.
    fn exact(&mut self, id: String, params: Value, outcome: Result<(usize, String)>) {
        match outcome {
            Ok((r, note)) => {
                let status = if r == 0 { Status::Pass } else { Status::Fail };
                self.push(id, params, Some(r as f64), 0.0, true, status, note)
            }
            Err(e) => self.push(id, params, None, 0.0, true, Status::Fail, e.to_string()),
        }
    }

    /// Exact negative control: passes iff the relation is violated.
    fn control(&mut self, id: String, params: Value, outcome: Result<usize>) {
        match outcome {
            Ok(r) => {
                let status = if r > 0 { Status::Pass } else { Status::Fail };
                self.push(id, params, Some(r as f64), 0.0, true, status, "negative control: must be nonzero".into())
            }
            Err(e) => self.push(id, params, None, 0.0, true, Status::Fail, e.to_string()),
        }
    }

    fn numeric(&mut self, id: String, params: Value, tolerance: f64, outcome: Result<(f64, String)>) {
        match outcome {
            Ok((r, note)) => {
                let status = if r <= tolerance { Status::Pass } else { Status::Fail };
                self.push(id, params, Some(r), tolerance, false, status, note)
            }
            Err(Error::RhsNearZero) => {
                self.push(id, params, None, tolerance, false, Status::Skip, Error::RhsNearZero.to_string())
            }
            Err(e) => self.push(id, params, None, tolerance, false, Status::Fail, e.to_string()),
        }
    }
}

fn word_json(word: &[Generator]) -> Value {
    Value::Array(word.iter().map(|g| Value::String(g.to_string())).collect())
}

/// Seeded test words: the empty word first, then `count` random ones.
fn test_words(model: &Model, seed: u64, count: usize, max_len: usize, max_mode: i64) -> Vec<Vec<Generator>> {
    let mut rng = samples::rng(seed);
    let mut out = vec![Vec::new()];
    while out.len() < count + 1 {
        let w = model.random_word(&mut rng, max_len, max_mode);
        if !w.is_empty() {
            out.push(w);
        }
    }
    out
}

/// `word(phi)` at ambient depth `depth`, memoized.
struct VectorCache {
    model: Model,
    cache: BTreeMap<(usize, u32), GaussPoly>,
}

impl VectorCache {
    fn new(model: Model) -> Self {
        Self {
            model,
            cache: BTreeMap::new(),
        }
    }

    fn get(&mut self, idx: usize, word: &[Generator], depth: u32) -> Result<GaussPoly> {
        if let Some(v) = self.cache.get(&(idx, depth)) {
            return Ok(v.clone());
        }
        let v = self.model.apply_word(word, &self.model.gaussian(depth))?;
        self.cache.insert((idx, depth), v.clone());
        Ok(v)
    }
}

fn levels(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Levels);
    let model = p.model.model(p.n);
    let expected = Scalar::rational(q(model.expected_level() as i64));
    let phi = model.gaussian(p.depth_for(4));
    for &copy in model.copies() {
        for u in 1..=p.n {
            for v in 1..=p.n {
                if u == v {
                    continue;
                }
                for m in 1..=2 {
                    let params = json!({"model": p.model, "n": p.n, "copy": copy.to_string(), "u": u, "v": v, "m": m});
                    let out = model
                        .measure_level(u, v, m, &phi, copy)
                        .map(|k| ((k != expected) as usize, format!("level {k}")));
                    rec.exact(format!("{copy}/E{u}{v}/m{m}"), params, out);
                }
            }
        }
    }
    rec.cases
}

fn copies(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Copies);
    let model = Model::matrix(p.n);
    let left = model.generators(CopyTag::Left, 1);
    let right = model.generators(CopyTag::Right, 1);
    let mut rng = samples::rng(p.seed ^ 0xC0);
    let words = [Vec::new(), vec![Generator::offdiag(1, 2, 1).on(CopyTag::Left)]];
    let mut cache = VectorCache::new(model);
    for i in 0..24 {
        let a = left[rng.random_range(0..left.len())];
        let b = right[rng.random_range(0..right.len())];
        let wi = i % words.len();
        let depth = p.depth_for(window_cost(&[a, b]) + window_cost(&words[wi]));
        let params = json!({"n": p.n, "a": a.to_string(), "b": b.to_string(), "word": word_json(&words[wi]), "depth": depth});
        let out = cache
            .get(wi, &words[wi], depth)
            .and_then(|f| model.commuting_copies_residual(&a, &b, &f))
            .map(|r| (r.len(), String::new()));
        rec.exact(format!("pair{i}"), params, out);
    }
    rec.cases
}

/// Generator pairs of the bracket suite: all unordered pairs at `n = 2`, a seeded sample otherwise.
fn bracket_pairs(p: &SuiteParams, model: &Model) -> Vec<(Generator, Generator)> {
    let copy = model.copies()[0];
    let gens = model.generators(copy, 2);
    if p.n == 2 && model.copies().len() == 1 {
        let mut out = Vec::new();
        for i in 0..gens.len() {
            for j in i..gens.len() {
                out.push((gens[i], gens[j]));
            }
        }
        out
    } else {
        let mut rng = samples::rng(p.seed ^ 0xB4);
        (0..60)
            .map(|_| (gens[rng.random_range(0..gens.len())], gens[rng.random_range(0..gens.len())]))
            .collect()
    }
}

fn bracket_words(p: &SuiteParams, model: &Model) -> Vec<Vec<Generator>> {
    let count = if p.n == 2 { 2 } else { 1 };
    test_words(model, p.seed ^ 0x3A, count, 2, 1)
}

fn brackets(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Brackets);
    let model = p.model.model(p.n);
    let words = bracket_words(p, &model);
    let mut cache = VectorCache::new(model);
    let level = q(model.expected_level() as i64);
    let min_window = p.window.max(2);
    for (pi, (a, b)) in bracket_pairs(p, &model).into_iter().enumerate() {
        for (wi, word) in words.iter().enumerate() {
            let depth = p.depth_for(window_cost(&[a, b]) + window_cost(word));
            let params = json!({"n": p.n, "model": p.model, "a": a.to_string(), "b": b.to_string(), "word": word_json(word), "depth": depth});
            let out = cache.get(wi, word, depth).and_then(|f| {
                let r = model.bracket_residual(&a, &b, &f, &level)?;
                if r.window() < min_window {
                    return Err(Error::WindowExhausted(format!("final window {} < {min_window}", r.window())));
                }
                Ok((r.len(), format!("window {}", r.window())))
            });
            rec.exact(format!("pair{pi}/v{wi}"), params, out);
        }
    }
    rec.cases
}

fn eigen(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Eigen);
    let model = p.model.model(p.n);
    let phi = model.gaussian(p.depth);
    // pi_t phi = rho^m phi, compared coefficientwise
    let out = phi.pi_t().map(|img| {
        let want = phi.with_window(img.window()).scale(&Scalar::monomial(Q::one(), 0, model.m() as i64));
        (img.sub(&want).map(|d| d.len()).unwrap_or(usize::MAX), String::new())
    });
    rec.exact("phi".into(), json!({"n": p.n, "model": p.model, "depth": p.depth}), out);
    let bad = phi.mul_var(Slot::new(1, 1));
    rec.control(
        "x1phi".into(),
        json!({"n": p.n, "model": p.model, "vector": "x_{-1}^1 phi"}),
        bad.and_then(|f| model.eigen_residual(&f)).map(|r| r.len()),
    );
    // every vector met in the bracket suite: f, b f and a b f
    let words = bracket_words(p, &model);
    let mut cache = VectorCache::new(model);
    for (pi, (a, b)) in bracket_pairs(p, &model).into_iter().enumerate() {
        for (wi, word) in words.iter().enumerate() {
            let depth = p.depth_for(window_cost(&[a, b]) + window_cost(word));
            let params = json!({"n": p.n, "model": p.model, "a": a.to_string(), "b": b.to_string(), "word": word_json(word), "depth": depth});
            let out = cache.get(wi, word, depth).and_then(|f| {
                let bf = model.apply(&b, &f)?;
                let abf = model.apply(&a, &bf)?;
                let mut total = 0;
                for v in [&f, &bf, &abf] {
                    total += model.eigen_residual(v)?.len();
                }
                Ok((total, String::new()))
            });
            rec.exact(format!("pair{pi}/v{wi}"), params, out);
        }
    }
    rec.cases
}

fn chevalley(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Chevalley);
    let model = p.model.model(p.n);
    for u in 1..=p.n {
        for v in 1..=p.n {
            if u == v {
                continue;
            }
            for m in -3..=3i64 {
                let depth = p.depth_for(2 * m.unsigned_abs() as u32);
                let params = json!({"n": p.n, "model": p.model, "u": u, "v": v, "m": m, "depth": depth});
                let out = model
                    .chevalley_residual(u, v, m, depth)
                    .map(|(a, b)| (a.len() + b.len(), String::new()));
                rec.exact(format!("E{u}{v}/m{m}"), params, out);
            }
        }
    }
    rec.cases
}

fn highest_weight(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::HighestWeight);
    let model = Model::vector(p.n);
    let gens = positive_generators(p.n, 2);
    for (vi, word) in test_words(&model, p.seed ^ 0x51, 99, 3, 2).into_iter().enumerate() {
        let depth = p.depth_for(window_cost(&word)).min(p.window.max(2) + window_cost(&word) + 2);
        let params = json!({"n": p.n, "word": word_json(&word), "depth": depth, "generators": gens.len()});
        let out = model.apply_word(&word, &model.gaussian(depth)).and_then(|f| {
            let mut bad = 0;
            for k in 1..=p.n as usize {
                for g in &gens {
                    if !highest_weight_residual(k, g, &f)?.is_zero() {
                        bad += 1;
                    }
                }
            }
            Ok((bad, String::new()))
        });
        rec.exact(format!("v{vi}"), params, out);
    }
    match weight_table(p.n) {
        Ok(table) => {
            for e in table {
                let params = json!({"n": p.n, "k": e.k, "coroot": format!("E{}{} - E{}{}", e.u, e.u, e.u + 1, e.u + 1)});
                let ok = e.measured == q(e.expected);
                rec.exact(
                    format!("table/k{}/u{}", e.k, e.u),
                    params,
                    Ok(((!ok) as usize, format!("measured {} expected {}", e.measured, e.expected))),
                );
            }
        }
        Err(e) => rec.exact("table".into(), json!({"n": p.n}), Err(e)),
    }
    rec.cases
}

fn snf(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Snf);
    let mut rng = samples::rng(p.seed ^ 0x11);
    for case in 0..200 {
        let n = 2 + case % 2;
        let g = random_integral_matrix(&mut rng, n).truncate(12);
        let params = json!({"n": n, "g": g.to_json()});
        let out = (|| {
            let (v, _) = val_det(&g)?;
            let d = smith_decompose(&g)?;
            let lq = lattice_quotient_from(&g, &d)?;
            let bad = (!d.reconstruct().agrees_with(&g)) as usize
                + (d.k.iter().sum::<i64>() != v) as usize
                + (lq.dim as i64 != v) as usize;
            Ok((bad, format!("k = {:?}, dim V = {}", d.k, lq.dim)))
        })();
        rec.exact(format!("g{case}"), params, out);
    }
    rec.cases
}

fn semigroup(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Semigroup);
    let mut rng = samples::rng(p.seed ^ 0x23);
    for case in 0..200 {
        let n = 2 + case % 2;
        let out = (|| {
            let m: Vec<MeasuredElement> = (0..3)
                .map(|_| MeasuredElement::with_scale(random_integral_matrix(&mut rng, n), random_scale(&mut rng)))
                .collect::<Result<_>>()?;
            let left = convolve_raw(&convolve_raw(&m[0], &m[1])?, &m[2])?;
            let right = convolve_raw(&m[0], &convolve_raw(&m[1], &m[2])?)?;
            let mut bad = (!left.g.agrees_with(&right.g)) as usize + (!left.mu.ratio(&right.mu)?.is_one()) as usize;
            let m: Vec<MeasuredElement> = (0..3)
                .map(|i| {
                    let e = MeasuredElement::with_scale(random_gl0_matrix(&mut rng, n), random_scale(&mut rng))?;
                    Ok(MeasuredElement { l: i - 1, ..e })
                })
                .collect::<Result<_>>()?;
            let left = convolve(&convolve(&m[0], &m[1])?, &m[2])?;
            let right = convolve(&m[0], &convolve(&m[1], &m[2])?)?;
            bad += (!same_class(&left, &right)?) as usize;
            Ok((bad, String::new()))
        })();
        rec.exact(format!("assoc{case}"), json!({"n": n}), out);
    }
    for case in 0..50 {
        let n = 2 + case % 2;
        let k = 1 + (case as i64 % 3);
        let out = (|| {
            let (u, expect) = if case % 5 == 0 {
                let c = q(2 + case as i64 % 3);
                (LoopMatrix::scalar(n, c.clone(), 0), pow_q(&c, k * n as i64))
            } else {
                let u = random_unit(&mut rng, n);
                let f = commutation_formula(&u, k)?;
                (u, f)
            };
            let got = commutation_scalar(&u, k)?;
            Ok(((got != expect) as usize, format!("scalar {got}")))
        })();
        rec.exact(format!("commute{case}"), json!({"n": n, "k": k}), out);
    }
    for case in 0..100 {
        let n = 2 + case % 2;
        let out = (|| {
            let m = MeasuredElement {
                l: case as i64 % 3 - 1,
                ..MeasuredElement::with_scale(random_gl0_matrix(&mut rng, n), random_scale(&mut rng))?
            };
            let prod = convolve(&m, &invert(&m)?)?;
            Ok(((!same_class(&prod, &MeasuredElement::identity(n))?) as usize, String::new()))
        })();
        rec.exact(format!("inverse{case}"), json!({"n": n}), out);
    }
    rec.cases
}

/// The orthogonal loop `[[3/5, 4/5 t], [-4/5 t^{-1}, 3/5]]`.
pub fn loop_rotation() -> LoopMatrix {
    let s = |c: Q, e| TruncatedSeries::monomial(c, e);
    LoopMatrix::from_rows(vec![
        vec![s(qr(3, 5), 0), s(qr(4, 5), 1)],
        vec![s(qr(-4, 5), -1), s(qr(3, 5), 0)],
    ])
    .expect("square")
}

fn rotation(c: Q, s: Q) -> LoopMatrix {
    LoopMatrix::from_constant(&[vec![c.clone(), -s.clone()], vec![s, c]])
}

fn k_fixed(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::KFixed);
    let cfg = p.action_config();
    let cases = [
        ("loop-rotation", loop_rotation(), 1e-8),
        ("rotation-3-4-5", rotation(qr(3, 5), qr(4, 5)), 1e-12),
        ("rotation-5-12-13", rotation(qr(5, 13), qr(12, 13)), 1e-12),
        ("rotation-8-15-17", rotation(qr(8, 17), qr(-15, 17)), 1e-12),
        ("identity", LoopMatrix::identity(2), 1e-12),
    ];
    for (name, g, tol) in cases {
        let params = json!({"g": g.to_json(), "lambda": p.lambda, "nodes": p.nodes, "probes": p.probes});
        match k_fixed_residual(&g, &cfg) {
            Ok(rep) => {
                rec.numeric(
                    name.into(),
                    params.clone(),
                    tol,
                    Ok((rep.residual, format!("dim V = {}, l = {}", rep.dim, rep.l))),
                );
                let rel = (rep.raw_ratio - rep.expected_ratio).abs() / rep.expected_ratio;
                rec.numeric(
                    format!("{name}/scalar"),
                    params,
                    1e-8,
                    Ok((rel, format!("lambda^l c^(-dim/2) = {:.12}, measured {:.12}", rep.expected_scalar, rep.scalar))),
                );
            }
            Err(e) => rec.numeric(name.into(), params, tol, Err(e)),
        }
    }
    rec.cases
}

fn intertwine(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Intertwine);
    let cfg = p.action_config();
    let f = random_gauss_poly(&mut samples::rng(p.seed ^ 0x25), 2, 3, 6);
    let sl2 = TestElement::Substitution(LoopMatrix::from_constant(&[vec![q(2), q(1)], vec![q(1), q(1)]]));
    let rot = TestElement::Substitution(rotation(qr(3, 5), qr(4, 5)));
    let mono = TestElement::Monomial { l: -1, k: vec![2, 0] };
    let mono11 = TestElement::Monomial { l: -1, k: vec![1, 1] };
    let pi_c: [(&str, f64, &TestElement, f64); 6] = [
        ("sl2/c1", 1.0, &sl2, 0.0),
        ("sl2/c2", 2.0, &sl2, 1e-10),
        ("rotation/c-half", 0.5, &rot, 1e-10),
        ("monomial-2-0/c2", 2.0, &mono, 1e-6),
        ("monomial-2-0/c-minus-1.5", -1.5, &mono, 1e-6),
        ("monomial-1-1/c2", 2.0, &mono11, 1e-6),
    ];
    for (name, c, g, tol) in pi_c {
        let params = json!({"kind": "rescaling", "c": c, "element": format!("{g:?}"), "lambda": p.lambda});
        let out = pi_c_intertwine_residual(c, g, &f, &cfg).map(|r| (r, String::new()));
        rec.numeric(name.into(), params, tol, out);
    }
    let one = TruncatedSeries::one();
    let t = TruncatedSeries::poly_i64(&[0, 1]);
    let one_t = TruncatedSeries::poly_i64(&[1, 1]);
    let central: [(&str, &TruncatedSeries, &TestElement, f64); 4] = [
        ("central-1/rotation", &one, &rot, 0.0),
        ("central-t/rotation", &t, &rot, 1e-8),
        ("central-1+t/monomial", &one_t, &mono, 1e-6),
        ("central-t/sl2", &t, &sl2, 1e-8),
    ];
    let few = ActionConfig {
        probes: p.probes.min(4),
        ..cfg.clone()
    };
    for (name, a, g, tol) in central {
        let params = json!({"kind": "central", "a": a.to_string(), "element": format!("{g:?}"), "probes": few.probes});
        let out = central_g_commute_residual(a, g, &f, &few).map(|r| (r, String::new()));
        rec.numeric(name.into(), params, tol, out);
    }
    rec.cases
}

fn unipotent2(a: Q, b: Q) -> LoopMatrix {
    LoopMatrix::from_rows(vec![
        vec![TruncatedSeries::one(), TruncatedSeries::constant(a)],
        vec![TruncatedSeries::monomial(b, 1), TruncatedSeries::one()],
    ])
    .expect("square")
}

fn whittaker(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Whittaker);
    let phi = Model::matrix(2).gaussian(2);
    let with = |cfg: WhittakerConfig| WhittakerConfig {
        lambda: p.lambda,
        nodes: p.nodes,
        half_width: p.half_width,
        ..cfg
    };
    let cov = |rec: &mut Recorder, id: String, u: &LoopMatrix, cfg: &WhittakerConfig, f: &GaussPoly, tol: f64| {
        let functional = if cfg.finite { "phi" } else { "psi" };
        let mut params = json!({
            "functional": functional,
            "side": cfg.side,
            "n": cfg.n,
            "c": cfg.freq,
            "u_params": crate::functionals::UnipotentParams::extract(u, cfg.side).map(|x| x.as_f64()).unwrap_or_default(),
            "nodes": cfg.nodes,
        });
        let out = whittaker_covariance(u, cfg, f).map(|c| {
            params["lhs"] = json!(c.lhs);
            params["rhs"] = json!(c.rhs);
            (c.relerr, String::new())
        });
        rec.numeric(id, params, tol, out);
    };

    // without phases the functional is a product of Gaussian integrals
    for side in [Side::First, Side::Second] {
        let cfg = with(WhittakerConfig::loop_case(2, side, vec![0.0, 0.0]));
        let c = p.lambda.powf(-2.0 / 4.0);
        let closed = c.powf(-(cfg.slice().len() as f64) / 2.0);
        let out = psi_loop(&cfg, &phi).map(|v| ((v.value() - closed).norm() / closed, format!("closed form {closed:.9}")));
        rec.numeric(
            format!("zero-phase/{side:?}").to_lowercase(),
            json!({"functional": "psi", "side": side, "n": 2, "c": [0.0, 0.0], "nodes": cfg.nodes}),
            1e-6,
            out,
        );
        let u = match side {
            Side::First => unipotent2(qr(1, 2), qr(1, 4)),
            Side::Second => unipotent2(qr(1, 2), qr(1, 4)).transpose(),
        };
        cov(&mut rec, format!("zero-phase-covariance/{side:?}").to_lowercase(), &u, &cfg, &phi, 1e-6);
    }

    let first = with(WhittakerConfig::loop_case(2, Side::First, vec![1.0, 0.5]));
    let second = with(WhittakerConfig::loop_case(2, Side::Second, vec![1.0, 0.5]));
    cov(&mut rec, "identity".into(), &LoopMatrix::identity(2), &first, &phi, 0.0);
    cov(&mut rec, "first/u0.5-v0.25".into(), &unipotent2(qr(1, 2), qr(1, 4)), &first, &phi, 2e-2);
    cov(&mut rec, "second/v0.5-z0.25".into(), &unipotent2(qr(1, 2), qr(1, 4)).transpose(), &second, &phi, 2e-2);
    let mut rng = samples::rng(p.seed ^ 0x77);
    for i in 0..2 {
        let a = qr(rng.random_range(-8..=8), 8);
        let b = qr(rng.random_range(-8..=8), 8);
        let u = unipotent2(a, b);
        cov(&mut rec, format!("first/random{i}"), &u, &first, &phi, 2e-2);
        cov(&mut rec, format!("second/random{i}"), &u.transpose(), &second, &phi, 2e-2);
    }
    let poly = phi
        .mul_var(Slot::new(1, 1))
        .and_then(|f| f.mul_var(Slot::new(1, 2)))
        .and_then(|f| f.add(&phi));
    match poly {
        Ok(f) => cov(&mut rec, "first/polynomial".into(), &unipotent2(qr(1, 2), qr(1, 4)), &first, &f, 2e-2),
        Err(e) => rec.numeric("first/polynomial".into(), json!({}), 2e-2, Err(e)),
    }
    // the value itself must be stable under node doubling
    let fine = WhittakerConfig {
        nodes: 2 * first.nodes,
        ..first.clone()
    };
    let out = psi_loop(&first, &phi).and_then(|a| {
        let b = psi_loop(&fine, &phi)?;
        Ok(((a.value() - b.value()).norm() / b.value().norm(), String::new()))
    });
    rec.numeric(
        "node-doubling".into(),
        json!({"functional": "psi", "n": 2, "c": first.freq, "nodes": [first.nodes, fine.nodes]}),
        1e-2,
        out,
    );

    let u3 = LoopMatrix::from_constant(&[
        vec![q(1), qr(3, 10), qr(1, 10)],
        vec![q(0), q(1), qr(-1, 5)],
        vec![q(0), q(0), q(1)],
    ]);
    let phi9 = GaussPoly::gaussian(9, 1);
    let fin = with(WhittakerConfig::finite_case(Side::First, vec![1.0, 0.5]));
    cov(&mut rec, "gl3/first".into(), &u3, &fin, &phi9, 5e-2);
    let fin2 = with(WhittakerConfig::finite_case(Side::Second, vec![1.0, 0.5]));
    cov(&mut rec, "gl3/second".into(), &u3.transpose(), &fin2, &phi9, 5e-2);
    rec.cases
}

fn hecke(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Hecke);
    let mut rng = samples::rng(p.seed ^ 0x4E);
    let f = FourierPoly::from_terms((-24..=24).map(|k| {
        let c = num_complex::Complex::new(qr(rng.random_range(-5..=5), rng.random_range(1..=3)), q(rng.random_range(-2..=2)));
        (k, c)
    }));
    for m in 1..=6i64 {
        for n in 1..=6i64 {
            let out = (|| {
                let mn = circle_hecke(m, &circle_hecke(n, &f)?)?;
                let nm = circle_hecke(n, &circle_hecke(m, &f)?)?;
                let direct = circle_hecke(m * n, &f)?;
                Ok(((mn != direct) as usize + (nm != direct) as usize, String::new()))
            })();
            rec.exact(format!("circle/{m}x{n}"), json!({"m": m, "n": n, "frequencies": 24}), out);
        }
    }
    for i in 0..50 {
        let prime = if i < 25 { 2 } else { 3 };
        let a = random_padic_matrix(&mut rng, prime, 2);
        let b = random_padic_matrix(&mut rng, prime, 2);
        let params = json!({"p": prime, "g1": a, "g2": b});
        let out = PAdicFunction::random(&mut rng, prime, 2, 2).and_then(|f| {
            let lhs = padic_hecke(&a, &padic_hecke(&b, &f)?)?;
            let rhs = padic_hecke(&mat_mul_i(&a, &b), &f)?;
            let reps = coset_representatives(&a, prime)?.len() as u64;
            let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).unsigned_abs();
            let mut ppart = 1;
            let mut d = det;
            while d % prime == 0 {
                d /= prime;
                ppart *= prime;
            }
            Ok(((lhs != rhs) as usize + (reps != ppart) as usize, format!("{reps} cosets")))
        });
        rec.exact(format!("padic/pair{i}"), params, out);
    }
    let one = Q::one();
    for prime in [2u64, 3] {
        let pq = q(prime as i64);
        let out = (|| {
            let f = PAdicFunction::zero_coset(prime, 2, 2)?;
            let g = vec![vec![pq.clone(), q(0)], vec![q(0), pq.recip()]];
            let a = padic_extend(&one, &g, &f)?;
            let b = padic_extend_with(&one, &g, &f, 1)?;
            let c = padic_extend_with(&one, &g, &f, 2)?;
            let scalar = |x: Q| vec![vec![x.clone(), q(0)], vec![q(0), x]];
            let back = padic_extend(&one, &scalar(pq.recip()), &padic_extend(&one, &scalar(pq.clone()), &f)?)?;
            let bad = (a != b) as usize + (a != c) as usize + (back != f) as usize;
            Ok((bad, String::new()))
        })();
        rec.exact(
            format!("extension/p{prime}"),
            json!({"p": prime, "lambda": "1", "g": format!("diag({prime}, 1/{prime})")}),
            out,
        );
    }
    rec.cases
}

fn window(p: &SuiteParams) -> Vec<Case> {
    let mut rec = Recorder::new(Suite::Window);
    for (name, model) in [("vector", Model::vector(p.n)), ("matrix", Model::matrix(2))] {
        let count = if name == "vector" { 30 } else { 10 };
        for (i, word) in test_words(&model, p.seed ^ 0x99, count, 3, 2).into_iter().enumerate() {
            let depth = p.depth_for(window_cost(&word));
            let params = json!({"model": name, "word": word_json(&word), "depth": depth});
            let out = (|| {
                let a = model.apply_word(&word, &model.gaussian(depth))?;
                let b = model.apply_word(&word, &model.gaussian(depth + 2))?;
                let w = a.window();
                let same = a.agrees_on_window(&b, w) && b.window() >= w;
                Ok(((!same) as usize, format!("window {w}")))
            })();
            rec.exact(format!("{name}/word{i}"), params, out);
        }
    }
    // the exact suites themselves at D + 2
    let bumped = SuiteParams {
        depth: p.depth + 2,
        ..p.clone()
    };
    let model = bumped.model.model(bumped.n);
    for (pi, (a, b)) in bracket_pairs(&bumped, &model).into_iter().enumerate().step_by(4) {
        let depth = bumped.depth_for(window_cost(&[a, b]));
        let params = json!({"a": a.to_string(), "b": b.to_string(), "depth": depth});
        let out = model
            .bracket_residual(&a, &b, &model.gaussian(depth), &q(model.expected_level() as i64))
            .map(|r| (r.len(), String::new()));
        rec.exact(format!("bracket{pi}"), params, out);
    }
    for c in chevalley(&bumped) {
        rec.push(format!("chevalley/{}", c.id), c.params, c.residual, c.tolerance, c.exact, c.status, c.note);
    }
    rec.cases
}

pub fn run_suite(suite: Suite, p: &SuiteParams) -> Vec<Case> {
    match suite {
        Suite::Levels => levels(p),
        Suite::Copies => copies(p),
        Suite::Brackets => brackets(p),
        Suite::Eigen => eigen(p),
        Suite::Chevalley => chevalley(p),
        Suite::HighestWeight => highest_weight(p),
        Suite::Snf => snf(p),
        Suite::Semigroup => semigroup(p),
        Suite::KFixed => k_fixed(p),
        Suite::Intertwine => intertwine(p),
        Suite::Whittaker => whittaker(p),
        Suite::Hecke => hecke(p),
        Suite::Window => window(p),
    }
}

/// Run the selected suites in order; cases are reported in suite order, then case order.
pub fn run(suites: &[Suite], p: &SuiteParams) -> Result<Report> {
    if suites.is_empty() {
        return Err(Error::Invalid("field 'suites': no suite selected".into()));
    }
    p.validate()?;
    let cases: Vec<Case> = std::thread::scope(|s| {
        let handles: Vec<_> = suites.iter().map(|&suite| s.spawn(move || run_suite(suite, p))).collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("suite thread panicked"))
            .collect()
    });
    let summary = Summary {
        total: cases.len(),
        passed: cases.iter().filter(|c| c.status == Status::Pass).count(),
        failed: cases.iter().filter(|c| c.status == Status::Fail).count(),
        skipped: cases.iter().filter(|c| c.status == Status::Skip).count(),
    };
    Ok(Report {
        version: env!("CARGO_PKG_VERSION").to_string(),
        params: p.clone(),
        suites: suites.to_vec(),
        summary,
        cases,
        weight_table: weight_table(p.n)?,
        levels: level_table(p)?,
    })
}

/// Print-friendly value of a rational, for tables.
pub fn q_display(x: &Q) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{x} ({:.6})", q_to_f64(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            let j = serde_json::to_string(&s).unwrap();
            assert_eq!(j, format!("\"{}\"", s.name()));
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SuiteParams::default().validate().is_ok());
        let bad = SuiteParams {
            depth: 1,
            window: 3,
            ..SuiteParams::default()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("depth"));
        let parsed: SuiteParams = serde_json::from_str(r#"{"n": 3, "seed": 7}"#).unwrap();
        assert_eq!((parsed.n, parsed.seed, parsed.depth), (3, 7, 10));
        assert!(serde_json::from_str::<SuiteParams>(r#"{"m": 3}"#).is_err());
        assert!(run(&[], &SuiteParams::default()).is_err());
    }

    #[test]
    fn small_suites_pass() {
        let p = SuiteParams::default();
        for s in [Suite::Levels, Suite::Chevalley, Suite::Hecke] {
            let cases = run_suite(s, &p);
            assert!(!cases.is_empty());
            for c in &cases {
                assert!(c.passed(), "{c:?}");
            }
        }
    }

    #[test]
    fn failures_are_recorded() {
        let mut rec = Recorder::new(Suite::Eigen);
        rec.exact("x".into(), json!({}), Ok((2, String::new())));
        rec.exact("y".into(), json!({}), Err(Error::Singular));
        rec.numeric("z".into(), json!({}), 1e-3, Ok((0.5, String::new())));
        rec.numeric("w".into(), json!({}), 1e-3, Err(Error::RhsNearZero));
        let st: Vec<Status> = rec.cases.iter().map(|c| c.status).collect();
        assert_eq!(st, vec![Status::Fail, Status::Fail, Status::Fail, Status::Skip]);
    }
}
