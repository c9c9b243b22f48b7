//! Square matrices and vectors over truncated Laurent series.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::Q;
use crate::series::TruncatedSeries;

/// Element of `M_n(R((t)))` with entries known to individual truncation orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopMatrix {
    n: usize,
    entries: Vec<TruncatedSeries>,
}

/// Column vector in `R^n((t))`.
pub type LoopVector = Vec<TruncatedSeries>;

impl LoopMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> TruncatedSeries) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self { n, entries }
    }

    pub fn from_rows(rows: Vec<Vec<TruncatedSeries>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("matrix must be square".into()));
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                TruncatedSeries::one()
            } else {
                TruncatedSeries::zero()
            }
        })
    }

    pub fn diag(d: Vec<TruncatedSeries>) -> Self {
        let n = d.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                d[i].clone()
            } else {
                TruncatedSeries::zero()
            }
        })
    }

    /// `diag(t^{k_1}, ..., t^{k_n})`.
    pub fn t_power_diag(k: &[i64]) -> Self {
        Self::diag(k.iter().map(|&e| TruncatedSeries::monomial(Q::one(), e)).collect())
    }

    /// `c * t^k * I_n`.
    pub fn scalar(n: usize, c: Q, k: i64) -> Self {
        Self::diag(vec![TruncatedSeries::monomial(c, k); n])
    }

    pub fn from_constant(rows: &[Vec<Q>]) -> Self {
        Self::from_fn(rows.len(), |i, j| TruncatedSeries::constant(rows[i][j].clone()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TruncatedSeries) {
        self.entries[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[TruncatedSeries] {
        &self.entries
    }

    /// Smallest truncation order over all entries (`None` if all exact).
    pub fn order(&self) -> Option<i64> {
        self.entries.iter().filter_map(|e| e.order()).min()
    }

    pub fn truncate(&self, t: i64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|e| e.truncate(t)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        Self::from_fn(n, |i, j| {
            (0..n).fold(TruncatedSeries::zero(), |acc, k| {
                acc.add(&self.get(i, k).mul(other.get(k, j)))
            })
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).add(other.get(i, j)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).sub(other.get(i, j)))
    }

    pub fn scale(&self, s: &TruncatedSeries) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).mul(s))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    /// Substitute `t -> t^{-1}` entrywise (exact matrices only).
    pub fn invert_variable(&self) -> Result<Self> {
        let rows = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.get(i, j).invert_variable())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    fn minor(&self, row: usize, col: usize) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != row) {
            for j in (0..n).filter(|&j| j != col) {
                entries.push(self.get(i, j).clone());
            }
        }
        Self { n: n - 1, entries }
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> TruncatedSeries {
        match self.n {
            0 => TruncatedSeries::one(),
            1 => self.entries[0].clone(),
            2 => self
                .get(0, 0)
                .mul(self.get(1, 1))
                .sub(&self.get(0, 1).mul(self.get(1, 0))),
            n => (0..n).fold(TruncatedSeries::zero(), |acc, j| {
                if self.get(0, j).is_exact_zero() {
                    return acc;
                }
                let term = self.get(0, j).mul(&self.minor(0, j).det());
                if j % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                }
            }),
        }
    }

    pub fn adjugate(&self) -> Self {
        let n = self.n;
        if n == 1 {
            return Self::identity(1);
        }
        Self::from_fn(n, |i, j| {
            let c = self.minor(j, i).det();
            if (i + j) % 2 == 0 {
                c
            } else {
                c.neg()
            }
        })
    }

    /// Inverse over `R((t))` with the determinant inverted to order `t`.
    pub fn inverse(&self, t: i64) -> Result<Self> {
        let det = self.det();
        if det.is_zero_up_to_precision() {
            return Err(Error::Singular);
        }
        let dinv = det.invert(t)?;
        Ok(self.adjugate().scale(&dinv))
    }

    /// `g(0)`: requires every entry to lie in `R[[t]]`.
    pub fn at_zero(&self) -> Result<Vec<Vec<Q>>> {
        if !self.is_integral() {
            return Err(Error::Invalid("matrix has negative powers of t".into()));
        }
        Ok((0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).coeff(0)).collect())
            .collect())
    }

    /// Coefficient matrix of `t^k`.
    pub fn coefficient(&self, k: i64) -> Vec<Vec<Q>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).coeff(k)).collect())
            .collect()
    }

    /// All entries in `R[[t]]`.
    pub fn is_integral(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.valuation().map_or(true, |v| v >= 0))
    }

    /// Smallest valuation over entries (`None` if all vanish up to precision).
    pub fn min_valuation(&self) -> Option<i64> {
        self.entries.iter().filter_map(|e| e.valuation()).min()
    }

    pub fn apply(&self, v: &[TruncatedSeries]) -> LoopVector {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(TruncatedSeries::zero(), |acc, j| {
                    acc.add(&self.get(i, j).mul(&v[j]))
                })
            })
            .collect()
    }

    /// Entrywise agreement on all commonly known coefficients.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.n == other.n
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.agrees_with(b))
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = (0..self.n)
            .map(|i| Value::Array((0..self.n).map(|j| self.get(i, j).to_json()).collect()))
            .collect();
        json!({ "n": self.n, "T": self.order(), "entries": entries })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v["n"]
            .as_u64()
            .ok_or_else(|| Error::Parse("LoopMatrix needs integer \"n\"".into()))? as usize;
        let order = match &v["T"] {
            Value::Null => None,
            t => Some(
                t.as_i64()
                    .ok_or_else(|| Error::Parse("\"T\" must be an integer or null".into()))?,
            ),
        };
        let rows = v["entries"]
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| Error::Parse(format!("\"entries\" must have {n} rows")))?;
        let mut out = Vec::with_capacity(n);
        for row in rows {
            let cells = row
                .as_array()
                .filter(|r| r.len() == n)
                .ok_or_else(|| Error::Parse(format!("each row must have {n} entries")))?;
            out.push(
                cells
                    .iter()
                    .map(|c| TruncatedSeries::from_json(c, order))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Self::from_rows(out)
    }
}

impl fmt::Display for LoopMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// `(N, c_0)` with `det g = t^N (c_0 + c_1 t + ...)`.
pub fn val_det(g: &LoopMatrix) -> Result<(i64, Q)> {
    let d = g.det();
    match d.leading() {
        Some((v, c)) => Ok((v, c.clone())),
        None => Err(Error::Singular),
    }
}

/// Membership in `GL_n(F)_0`: the leading coefficient of `det g` is `±1`.
pub fn in_gl0(g: &LoopMatrix) -> Result<bool> {
    let (_, c) = val_det(g)?;
    Ok(c.abs().is_one())
}

/// `(u, v) = (u(t)^T v(t^{-1}))_0`, i.e. the sum of products of matching coefficients.
pub fn loop_inner_product(u: &[TruncatedSeries], v: &[TruncatedSeries]) -> Q {
    u.iter().zip(v).fold(Q::zero(), |acc, (a, b)| {
        a.terms().fold(acc, |acc, (e, c)| acc + c * b.coeff(e))
    })
}

/// Componentwise projection onto `R_-^n`.
pub fn negative_projection(x: &[TruncatedSeries]) -> Result<LoopVector> {
    x.iter().map(|c| c.negative_part()).collect()
}

/// `g(t) g(t^{-1})^T == I` exactly.
pub fn orthogonality_check(g: &LoopMatrix) -> bool {
    let Ok(gi) = g.invert_variable() else {
        return false;
    };
    g.mul(&gi.transpose()) == LoopMatrix::identity(g.n())
}

/// Basis vector `e_j t^k` of `R^n[t, t^{-1}]`.
pub fn unit_vector(n: usize, j: usize, k: i64) -> LoopVector {
    (0..n)
        .map(|i| {
            if i == j {
                TruncatedSeries::monomial(Q::one(), k)
            } else {
                TruncatedSeries::zero()
            }
        })
        .collect()
}
