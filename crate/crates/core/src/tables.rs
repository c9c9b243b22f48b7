//! Small reference tables: measured levels and commutation scalars.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::Scalar;
use crate::rational::{serialize_q, Q};
use crate::samples::{random_unit, rng};
use crate::semigroup::{commutation_formula, commutation_scalar};
use crate::suites::SuiteParams;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub copy: String,
    pub u: u32,
    pub v: u32,
    pub m: i64,
    pub expected: u32,
    /// Central value measured from `[E_vu t^m, E_uv t^-m]` on the Gaussian.
    pub measured: String,
}

/// Level of every copy of the configured model, read off `E_12` and `E_21` at modes 1 and 2.
pub fn level_table(p: &SuiteParams) -> Result<Vec<LevelEntry>> {
    p.validate()?;
    let model = p.model.model(p.n);
    let phi = model.gaussian(p.depth_for(4));
    let mut out = Vec::new();
    for &copy in model.copies() {
        for (u, v) in [(1, 2), (2, 1)] {
            for m in 1..=2 {
                let k: Scalar = model.measure_level(u, v, m, &phi, copy)?;
                out.push(LevelEntry {
                    copy: copy.to_string(),
                    u,
                    v,
                    m,
                    expected: model.expected_level(),
                    measured: k.to_string(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CocycleEntry {
    pub n: usize,
    pub k: i64,
    /// `u` in the JSON matrix format.
    pub u: serde_json::Value,
    /// Ratio of `(t^k I)(u)` to `(u)(t^k I)` from the convolution product.
    #[serde(serialize_with = "serialize_q")]
    pub scalar: Q,
    /// `|det u(0)|^k`.
    #[serde(serialize_with = "serialize_q")]
    pub formula: Q,
}

/// Commutation scalars of `(t^k I, mu_st)` against seeded random `u` in `GL_n(R)`.
pub fn cocycle_table(n: usize, seed: u64, count: usize) -> Result<Vec<CocycleEntry>> {
    let mut r = rng(seed ^ 0xC0C7);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let u = random_unit(&mut r, n);
        let k = [1, 2, -1][i % 3];
        out.push(CocycleEntry {
            n,
            k,
            u: u.to_json(),
            scalar: commutation_scalar(&u, k)?,
            formula: commutation_formula(&u, k)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::suites::ModelChoice;

    #[test]
    fn levels_match_model() {
        let vector = level_table(&SuiteParams::default()).unwrap();
        assert_eq!(vector.len(), 4);
        assert!(vector.iter().all(|e| e.measured == "1"));
        let p = SuiteParams {
            model: ModelChoice::Matrix,
            ..SuiteParams::default()
        };
        let matrix = level_table(&p).unwrap();
        assert_eq!(matrix.len(), 8);
        assert!(matrix.iter().all(|e| e.measured == "2" && e.expected == 2));
    }

    #[test]
    fn cocycles_match_formula() {
        let t = cocycle_table(2, 0, 6).unwrap();
        assert_eq!(t.len(), 6);
        for e in &t {
            assert_eq!(e.scalar, e.formula);
            assert!(e.scalar > q(0));
        }
    }
}
