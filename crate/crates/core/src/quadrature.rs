//! Deterministic tensor-product quadrature: a midpoint rule on a half-step
//! offset grid for Gaussian-damped integrands, and Gauss-Hermite nodes.

use std::ops::{AddAssign, Mul};

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and common weight of a uniform rule with spacing `2 half_width / nodes`.
/// The grid sits half a step off the lattice `h Z`, so no node lands on zero.
pub fn offset_grid(nodes: usize, half_width: f64) -> (Vec<f64>, f64) {
    let h = 2.0 * half_width / nodes as f64;
    let centre = (nodes as f64 - 1.0) / 2.0;
    let shift = if nodes % 2 == 1 { 0.5 } else { 0.0 };
    let pts = (0..nodes).map(|k| (k as f64 - centre + shift) * h).collect();
    (pts, h)
}

/// `∫_{[-L, L]^d} f` by the product midpoint rule, summed in fixed lexicographic order.
pub fn integrate_box<T>(dim: usize, nodes: usize, half_widths: &[f64], mut f: impl FnMut(&[f64]) -> T) -> T
where
    T: Copy + Default + AddAssign + Mul<f64, Output = T>,
{
    if dim == 0 {
        return f(&[]);
    }
    let grids: Vec<(Vec<f64>, f64)> = (0..dim).map(|a| offset_grid(nodes, half_widths[a])).collect();
    let weight: f64 = grids.iter().map(|g| g.1).product();
    let mut point = vec![0.0; dim];
    // partial sums per axis keep the reduction order fixed and the error small
    let mut sums = vec![T::default(); dim];
    let mut idx = vec![0usize; dim];
    loop {
        for a in 0..dim {
            point[a] = grids[a].0[idx[a]];
        }
        sums[dim - 1] += f(&point);
        let mut a = dim - 1;
        loop {
            idx[a] += 1;
            if idx[a] < nodes {
                break;
            }
            idx[a] = 0;
            if a == 0 {
                return sums[0] * weight;
            }
            let s = sums[a];
            sums[a] = T::default();
            sums[a - 1] += s;
            a -= 1;
        }
    }
}

/// Gauss-Hermite rule for `∫ e^{-t^2} g(t) dt`, exact for polynomials of degree `< 2q`.
pub fn gauss_hermite(q: usize) -> (Vec<f64>, Vec<f64>) {
    if q == 0 {
        return (Vec::new(), Vec::new());
    }
    // Golub-Welsch: Jacobi matrix of the Hermite recurrence
    let mut j = DMatrix::<f64>::zeros(q, q);
    for k in 1..q {
        let b = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_integrals() {
        let v = integrate_box(1, 33, &[6.0], |x| (-PI * x[0] * x[0]).exp());
        // aliasing error of the midpoint rule is about 2 exp(-pi / h^2)
        assert!((v - 1.0).abs() < 1e-9, "{v}");
        let v = integrate_box(2, 33, &[6.0, 6.0], |x| {
            x[0] * x[0] * (-PI * (x[0] * x[0] + x[1] * x[1])).exp()
        });
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-8, "{v}");
        let v = integrate_box(0, 33, &[], |_| 2.5);
        assert_eq!(v, 2.5);
    }

    #[test]
    fn grid_avoids_zero() {
        for nodes in [32, 33] {
            let (pts, h) = offset_grid(nodes, 6.0);
            assert!(pts.iter().all(|&p| p.abs() >= h / 2.0 - 1e-12));
            assert!(pts.iter().all(|&p| p.abs() <= 6.0 + 1e-12));
        }
    }

    #[test]
    fn hermite_moments() {
        let (t, w) = gauss_hermite(5);
        let m = |k: i32| t.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((m(0) - PI.sqrt()).abs() < 1e-12);
        assert!(m(3).abs() < 1e-12);
        assert!((m(8) - 105.0 / 16.0 * PI.sqrt()).abs() < 1e-10);
    }
}
