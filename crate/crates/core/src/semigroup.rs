//! Pairs `(g, mu)` with `mu` a Haar measure on `V_g`, their convolution product,
//! and classes `(l, g, mu)` of the central extension of `GL_n(F)_0`.

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::dvr::{flatten, lattice_quotient, pole_order, working_order, LatticeQuotient};
use crate::error::{Error, Result};
use crate::matrix::{in_gl0, LoopMatrix, LoopVector};
use crate::rational::{abs_q, coordinates_in_basis, det_q, parse_q, pow_q, Q};
use crate::series::TruncatedSeries;

/// `scale` is the measure of the parallelotope spanned by `basis`.
#[derive(Clone, Debug)]
pub struct HaarMeasure {
    pub basis: Vec<LoopVector>,
    pub scale: Q,
}

impl HaarMeasure {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn depth(&self) -> usize {
        self.basis.iter().map(|v| pole_order(v)).max().unwrap_or(0)
    }

    /// The same measure described relative to `new_basis`.
    pub fn rebase(&self, new_basis: &[LoopVector]) -> Result<HaarMeasure> {
        if new_basis.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "rebase from dimension {} to {}",
                self.dim(),
                new_basis.len()
            )));
        }
        if self.dim() == 0 {
            return Ok(self.clone());
        }
        let depth = self.depth().max(
            new_basis.iter().map(|v| pole_order(v)).max().unwrap_or(0),
        );
        let old: Vec<Vec<Q>> = self.basis.iter().map(|v| flatten(v, depth)).collect();
        let new: Vec<Vec<Q>> = new_basis.iter().map(|v| flatten(v, depth)).collect();
        let m = coordinates_in_basis(&old, &new)
            .ok_or_else(|| Error::DimensionMismatch("bases span different spaces".into()))?;
        let d = abs_q(&det_q(&m));
        if d.is_zero() {
            return Err(Error::DimensionMismatch("new basis is degenerate".into()));
        }
        Ok(HaarMeasure {
            basis: new_basis.to_vec(),
            scale: &self.scale * d,
        })
    }

    /// `self / other` for two Haar measures on the same space.
    pub fn ratio(&self, other: &HaarMeasure) -> Result<Q> {
        let r = self.rebase(&other.basis)?;
        Ok(r.scale / &other.scale)
    }
}

/// Standard measure: unit scale on the canonical basis of `V_g`.
pub fn mu_st(g: &LoopMatrix) -> Result<HaarMeasure> {
    let lq = lattice_quotient(g)?;
    Ok(HaarMeasure {
        basis: lq.basis,
        scale: Q::one(),
    })
}

#[derive(Clone, Debug)]
pub struct MeasuredElement {
    pub l: i64,
    pub g: LoopMatrix,
    pub mu: HaarMeasure,
}

impl MeasuredElement {
    pub fn new(l: i64, g: LoopMatrix, mu: HaarMeasure) -> Result<Self> {
        let lq = lattice_quotient(&g)?;
        if lq.dim != mu.dim() {
            return Err(Error::DimensionMismatch(format!(
                "measure of dimension {} on V_g of dimension {}",
                mu.dim(),
                lq.dim
            )));
        }
        if mu.scale <= Q::zero() {
            return Err(Error::Invalid("Haar measure scale must be positive".into()));
        }
        Ok(Self { l, g, mu })
    }

    pub fn standard(g: LoopMatrix) -> Result<Self> {
        let mu = mu_st(&g)?;
        Ok(Self { l: 0, g, mu })
    }

    /// `(g, scale * mu_st(g))`.
    pub fn with_scale(g: LoopMatrix, scale: Q) -> Result<Self> {
        let mut m = Self::standard(g)?;
        m.mu.scale = scale;
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            l: 0,
            g: LoopMatrix::identity(n),
            mu: HaarMeasure {
                basis: Vec::new(),
                scale: Q::one(),
            },
        }
    }

    pub fn quotient(&self) -> Result<LatticeQuotient> {
        lattice_quotient(&self.g)
    }

    /// Scale of the measure relative to `mu_st(g)`.
    pub fn relative_scale(&self) -> Result<Q> {
        self.mu.ratio(&mu_st(&self.g)?)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "l": self.l,
            "g": self.g.to_json(),
            "basis": self.mu.basis.iter().map(|v| Value::Array(v.iter().map(|c| c.to_json()).collect())).collect::<Vec<_>>(),
            "scale": self.mu.scale.to_string(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let l = v["l"].as_i64().ok_or_else(|| Error::Parse("missing integer \"l\"".into()))?;
        let g = LoopMatrix::from_json(&v["g"])?;
        let scale = parse_q(
            v["scale"]
                .as_str()
                .ok_or_else(|| Error::Parse("missing string \"scale\"".into()))?,
        )?;
        let basis = match v.get("basis") {
            Some(Value::Array(vs)) => vs
                .iter()
                .map(|bv| {
                    bv.as_array()
                        .ok_or_else(|| Error::Parse("basis vector must be an array".into()))?
                        .iter()
                        .map(|c| TruncatedSeries::from_json(c, None))
                        .collect::<Result<LoopVector>>()
                })
                .collect::<Result<Vec<_>>>()?,
            _ => mu_st(&g)?.basis,
        };
        Self::new(l, g, HaarMeasure { basis, scale })
    }
}

/// Inverse of `g` good enough to project vectors of pole order `depth`.
fn inverse_for(g: &LoopMatrix, depth: usize) -> Result<LoopMatrix> {
    let t = (depth as i64).max(1);
    g.inverse(t)
}

/// `(g1, mu1)(g2, mu2) = (g1 g2, mu1 * mu2)`, with `l` components added. No normalization.
pub fn convolve_raw(a: &MeasuredElement, b: &MeasuredElement) -> Result<MeasuredElement> {
    let g = a.g.mul(&b.g);
    let lq = lattice_quotient(&g)?;
    let mut images: Vec<LoopVector> = Vec::with_capacity(lq.dim);
    if a.mu.dim() > 0 {
        let b_inv = inverse_for(&b.g, a.mu.depth())?;
        for v in &a.mu.basis {
            let w = b_inv.apply(v);
            images.push(w.iter().map(|c| c.negative_part()).collect::<Result<_>>()?);
        }
    }
    images.extend(b.mu.basis.iter().cloned());
    let scale = &a.mu.scale * &b.mu.scale;
    let mu = HaarMeasure {
        basis: images,
        scale,
    }
    .rebase(&lq.basis)?;
    Ok(MeasuredElement {
        l: a.l + b.l,
        g,
        mu,
    })
}

pub fn convolve(a: &MeasuredElement, b: &MeasuredElement) -> Result<MeasuredElement> {
    normalize(&convolve_raw(a, b)?)
}

fn divisible_by_t(g: &LoopMatrix) -> bool {
    g.entries().iter().all(|e| {
        e.order().map_or(true, |o| o >= 1) && e.valuation().map_or(true, |v| v >= 1)
    }) && !g.entries().iter().all(|e| e.valuation().is_none())
}

/// Peel central factors `t I_n` off `g` using `(l, (tI, mu_st) a) ~ (l + 1, a)`.
pub fn normalize(m: &MeasuredElement) -> Result<MeasuredElement> {
    let n = m.g.n();
    let mut cur = m.clone();
    let t_inv = TruncatedSeries::monomial(Q::one(), -1);
    let t_id = MeasuredElement::standard(LoopMatrix::scalar(n, Q::one(), 1))?;
    while divisible_by_t(&cur.g) {
        let g1 = cur.g.scale(&t_inv);
        let unit = MeasuredElement::standard(g1.clone())?;
        let probe = convolve_raw(&t_id, &unit)?;
        let rel = cur.mu.ratio(&probe.mu)?;
        let mut mu = unit.mu;
        mu.scale = rel;
        cur = MeasuredElement {
            l: cur.l + 1,
            g: g1,
            mu,
        };
    }
    Ok(cur)
}

/// Class equality: same normalized `(l, g)` and equal measures.
pub fn same_class(a: &MeasuredElement, b: &MeasuredElement) -> Result<bool> {
    let (a, b) = (normalize(a)?, normalize(b)?);
    if a.l != b.l || a.g.n() != b.g.n() || !a.g.agrees_with(&b.g) {
        return Ok(false);
    }
    Ok(a.mu.ratio(&b.mu)?.is_one())
}

/// Smallest `l >= 0` with `t^l g^{-1}` integral.
fn denominator_power(g_inv: &LoopMatrix) -> i64 {
    g_inv.min_valuation().map_or(0, |v| (-v).max(0))
}

pub fn invert(m: &MeasuredElement) -> Result<MeasuredElement> {
    if !in_gl0(&m.g)? {
        return Err(Error::NotInvertible(
            "leading coefficient of det g is not +-1".into(),
        ));
    }
    let n = m.g.n();
    let order = working_order(&m.g);
    let g_inv = m.g.inverse(order)?;
    let l = denominator_power(&g_inv);
    let h = g_inv.scale(&TruncatedSeries::monomial(Q::one(), l));
    let nu = MeasuredElement::standard(h.clone())?;
    // (k, (g, mu)) (-k-l, (h, nu)) = (-l, (t^l I, c mu_st))
    let prod = convolve_raw(
        &MeasuredElement { l: 0, ..m.clone() },
        &nu,
    )?;
    let c = prod.mu.ratio(&mu_st(&LoopMatrix::scalar(n, Q::one(), l))?)?;
    let mut mu = nu.mu;
    mu.scale = mu.scale / c;
    normalize(&MeasuredElement {
        l: -m.l - l,
        g: h,
        mu,
    })
}

/// Ratio of `(t^k I, mu_st)(u, mu_st)` to `(u, mu_st)(t^k I, mu_st)`; equals `|det u(0)|^k`.
pub fn commutation_scalar(u: &LoopMatrix, k: i64) -> Result<Q> {
    if k < 0 {
        return commutation_scalar(u, -k).map(|x| x.recip());
    }
    let (v, _) = crate::matrix::val_det(u)?;
    if v != 0 || !u.is_integral() {
        return Err(Error::Invalid("commutation_scalar needs u in GL_n(R)".into()));
    }
    let tk = MeasuredElement::standard(LoopMatrix::scalar(u.n(), Q::one(), k))?;
    let um = MeasuredElement::standard(u.clone())?;
    let left = convolve_raw(&tk, &um)?;
    let right = convolve_raw(&um, &tk)?;
    left.mu.ratio(&right.mu)
}

/// `|det u(0)|^k` computed directly.
pub fn commutation_formula(u: &LoopMatrix, k: i64) -> Result<Q> {
    Ok(pow_q(&abs_q(&det_q(&u.at_zero()?)), k))
}

/// Membership of `a(t) I_n` in the splitting subgroup: leading coefficient `+-1`.
pub fn is_central_g(a: &TruncatedSeries) -> bool {
    a.leading().is_some_and(|(_, c)| c.abs().is_one())
}
