//! Smith normal form over `R[[t]]` and the lattice quotients `V_g = g^{-1}R^n / R^n`.
//!
//! Pivoting picks the entry of minimal valuation, ties broken by the smallest
//! `(row, column)` index, so decompositions are reproducible. Only the
//! reconstruction `g = h1 t^k h2` and the exponent vector `k` are contractual.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::{LoopMatrix, LoopVector};
use crate::rational::Q;
use crate::series::TruncatedSeries;

/// Floor for the working order used with exact inputs.
pub const DEFAULT_ORDER: i64 = 6;

/// Precision used for series inverses derived from `g`: its own order if truncated,
/// otherwise a margin past the valuation of `det g`.
pub fn working_order(g: &LoopMatrix) -> i64 {
    g.order().unwrap_or_else(|| {
        let v = crate::matrix::val_det(g).map_or(0, |(v, _)| v);
        DEFAULT_ORDER + v
    })
}

#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub h1: LoopMatrix,
    pub k: Vec<i64>,
    pub h2: LoopMatrix,
    /// Order up to which `h1 t^k h2 = g` is certified.
    pub certified: i64,
}

impl SmithDecomposition {
    pub fn reconstruct(&self) -> LoopMatrix {
        self.h1
            .mul(&LoopMatrix::t_power_diag(&self.k))
            .mul(&self.h2)
    }
}

fn swap_rows(m: &mut LoopMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.n() {
        let x = m.get(a, j).clone();
        let y = m.get(b, j).clone();
        m.set(a, j, y);
        m.set(b, j, x);
    }
}

fn swap_cols(m: &mut LoopMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.n() {
        let x = m.get(i, a).clone();
        let y = m.get(i, b).clone();
        m.set(i, a, y);
        m.set(i, b, x);
    }
}

/// `g = h1 diag(t^{k_1}, ..., t^{k_n}) h2` with `h1, h2 in GL_n(R[[t]])`, `k` ascending.
pub fn smith_decompose(g: &LoopMatrix) -> Result<SmithDecomposition> {
    smith_decompose_to(g, working_order(g))
}

/// As [`smith_decompose`], with inverses of unit pivots computed to order `t`.
pub fn smith_decompose_to(g: &LoopMatrix, t: i64) -> Result<SmithDecomposition> {
    if !g.is_integral() {
        return Err(Error::Invalid("smith_decompose needs entries in R[[t]]".into()));
    }
    let n = g.n();
    let mut a = g.clone();
    let mut p = LoopMatrix::identity(n);
    let mut q = LoopMatrix::identity(n);
    let mut k = Vec::with_capacity(n);
    let mut certified = t;
    let mut note = |r: &TruncatedSeries| -> Result<()> {
        if !r.is_zero_up_to_precision() {
            return Err(Error::InsufficientPrecision(format!(
                "elimination residual {r} does not vanish"
            )));
        }
        if let Some(o) = r.order() {
            certified = certified.min(o);
        }
        Ok(())
    };

    for step in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in step..n {
            for j in step..n {
                if let Some(v) = a.get(i, j).valuation() {
                    if best.map_or(true, |(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            let exact = (step..n).all(|i| (step..n).all(|j| a.get(i, j).is_exact_zero()));
            return Err(if exact {
                Error::Singular
            } else {
                Error::InsufficientPrecision(format!(
                    "no pivot with certified valuation at step {step}"
                ))
            });
        };
        swap_rows(&mut a, step, pi);
        swap_cols(&mut p, step, pi);
        swap_cols(&mut a, step, pj);
        swap_rows(&mut q, step, pj);

        // pivot = t^v w with w a unit; pull w into h1
        let w = a.get(step, step).shift(-v);
        let w_inv = w.invert(t)?;
        for j in 0..n {
            let c = p.get(j, step).mul(&w);
            p.set(j, step, c);
        }
        for j in step..n {
            let c = a.get(step, j).mul(&w_inv);
            a.set(step, j, c);
        }
        let residual = a.get(step, step).sub(&TruncatedSeries::monomial(Q::one(), v));
        note(&residual)?;
        a.set(step, step, TruncatedSeries::monomial(Q::one(), v));

        // clear column below the pivot: row_i -= c row_step
        for i in step + 1..n {
            let c = a.get(i, step).shift(-v);
            if c.is_exact_zero() {
                continue;
            }
            for j in step..n {
                let x = a.get(i, j).sub(&c.mul(a.get(step, j)));
                a.set(i, j, x);
            }
            note(a.get(i, step))?;
            a.set(i, step, TruncatedSeries::zero());
            for r in 0..n {
                let x = p.get(r, step).add(&c.mul(p.get(r, i)));
                p.set(r, step, x);
            }
        }
        // clear row right of the pivot: col_j -= c col_step (only row `step` is touched)
        for j in step + 1..n {
            let c = a.get(step, j).shift(-v);
            if c.is_exact_zero() {
                continue;
            }
            if c.valuation().is_some_and(|e| e < 0) {
                return Err(Error::InsufficientPrecision("pivot does not divide its row".into()));
            }
            a.set(step, j, TruncatedSeries::zero());
            for col in 0..n {
                let x = q.get(step, col).add(&c.mul(q.get(j, col)));
                q.set(step, col, x);
            }
        }
        k.push(v);
    }
    Ok(SmithDecomposition {
        h1: p,
        k,
        h2: q,
        certified,
    })
}

/// `V_g = g^{-1}R^n / R^n`, realized inside `R_-^n` as `pi_-(g^{-1} R^n)`.
#[derive(Clone, Debug)]
pub struct LatticeQuotient {
    pub g: LoopMatrix,
    pub dim: usize,
    /// Largest pole order among basis vectors.
    pub depth: usize,
    pub basis: Vec<LoopVector>,
}

impl LatticeQuotient {
    /// Flattened coordinates of the basis: slot `(i-1) n + j` holds the `t^{-i} e_j` coefficient.
    pub fn coords(&self, depth: usize) -> Vec<Vec<Q>> {
        self.basis.iter().map(|v| flatten(v, depth)).collect()
    }

    pub fn basis_to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.basis
                .iter()
                .map(|v| serde_json::Value::Array(v.iter().map(|c| c.to_json()).collect()))
                .collect(),
        )
    }
}

/// Coordinates of a vector in `R_-^n` truncated at pole order `depth`.
pub fn flatten(v: &[TruncatedSeries], depth: usize) -> Vec<Q> {
    let n = v.len();
    let mut out = vec![Q::zero(); n * depth];
    for (j, comp) in v.iter().enumerate() {
        for (e, c) in comp.terms() {
            if e < 0 && ((-e) as usize) <= depth {
                out[((-e) as usize - 1) * n + j] = c.clone();
            }
        }
    }
    out
}

/// Pole order of a vector (0 if it has no negative powers).
pub fn pole_order(v: &[TruncatedSeries]) -> usize {
    v.iter()
        .filter_map(|c| c.valuation())
        .filter(|&e| e < 0)
        .map(|e| (-e) as usize)
        .max()
        .unwrap_or(0)
}

pub fn lattice_quotient(g: &LoopMatrix) -> Result<LatticeQuotient> {
    let snf = smith_decompose(g)?;
    lattice_quotient_from(g, &snf)
}

/// Basis `pi_-(h2^{-1} t^{-i} e_j)`, `1 <= i <= k_j`, ordered by `(j, i)`.
pub fn lattice_quotient_from(g: &LoopMatrix, snf: &SmithDecomposition) -> Result<LatticeQuotient> {
    let n = g.n();
    let kmax = snf.k.iter().copied().max().unwrap_or(0).max(0);
    let dim: i64 = snf.k.iter().sum();
    if kmax == 0 {
        return Ok(LatticeQuotient {
            g: g.clone(),
            dim: 0,
            depth: 0,
            basis: Vec::new(),
        });
    }
    let h2_inv = snf.h2.inverse(kmax)?;
    let mut basis = Vec::with_capacity(dim as usize);
    for (j, &kj) in snf.k.iter().enumerate() {
        for i in 1..=kj {
            let col: Vec<TruncatedSeries> = (0..n).map(|r| h2_inv.get(r, j).shift(-i)).collect();
            let v: LoopVector = col
                .iter()
                .map(|c| c.negative_part())
                .collect::<Result<_>>()?;
            basis.push(v);
        }
    }
    let depth = basis.iter().map(|v| pole_order(v)).max().unwrap_or(0);
    Ok(LatticeQuotient {
        g: g.clone(),
        dim: dim as usize,
        depth,
        basis,
    })
}
