//! Gauss rules on reference simplices built from collapsed Gauss–Jacobi
//! products. Points are stored in barycentric coordinates; weights are in
//! units of the reference measure (1, 1/2, 1/6).

use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)] // float methods only live in `core` on recent toolchains
use num_traits::Float;

use crate::{Error, Result};

/// Highest exactness degree handed out.
pub const MAX_EXACTNESS: usize = 40;

/// Barycentric point; entries beyond `dim + 1` are zero.
pub type Bary = [f64; 4];

#[derive(Debug, Clone)]
pub struct QuadRule {
    pub dim: usize,
    pub degree: usize,
    pub points: Vec<Bary>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Cartesian coordinates of point `q` on the reference simplex.
    pub fn reference_point(&self, q: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        x[..self.dim].copy_from_slice(&self.points[q][1..=self.dim]);
        x
    }
}

/// Gauss–Jacobi rule with `n` points for the weight `(1-u)^alpha` on `[0,1]`.
pub fn gauss_jacobi01(n: usize, alpha: usize) -> (Vec<f64>, Vec<f64>) {
    let a = alpha as f64;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        // beta = 0 in the standard recurrence on [-1, 1]
        let s = 2.0 * kf + a;
        jac[(k, k)] = if k == 0 {
            -a / (a + 2.0)
        } else {
            -a * a / (s * (s + 2.0))
        };
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + a;
            let b = 4.0 * m * (m + a) * m * (m + a) / (s * s * (s + 1.0) * (s - 1.0));
            jac[(k, k + 1)] = b.sqrt();
            jac[(k + 1, k)] = b.sqrt();
        }
    }
    let mu0 = 2f64.powi(alpha as i32 + 1) / (a + 1.0);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (1.0 + x), mu0 * v0 * v0 * 0.5f64.powi(alpha as i32 + 1))
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

/// Rule on the reference `dim`-simplex exact for polynomials of degree `exactness`.
pub fn quad_rule(dim: usize, exactness: usize) -> Result<QuadRule> {
    if exactness > MAX_EXACTNESS {
        return Err(Error::Quadrature(exactness));
    }
    let n = exactness / 2 + 1;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match dim {
        0 => {
            points.push([1.0, 0.0, 0.0, 0.0]);
            weights.push(1.0);
        }
        1 => {
            let (x, w) = gauss_jacobi01(n, 0);
            for (xi, wi) in x.iter().zip(&w) {
                points.push([1.0 - xi, *xi, 0.0, 0.0]);
                weights.push(*wi);
            }
        }
        2 => {
            let (u, wu) = gauss_jacobi01(n, 1);
            let (v, wv) = gauss_jacobi01(n, 0);
            for (ui, wui) in u.iter().zip(&wu) {
                for (vj, wvj) in v.iter().zip(&wv) {
                    let y = *ui;
                    let x = vj * (1.0 - y);
                    points.push([1.0 - x - y, x, y, 0.0]);
                    weights.push(wui * wvj);
                }
            }
        }
        3 => {
            let (u, wu) = gauss_jacobi01(n, 2);
            let (s, ws) = gauss_jacobi01(n, 1);
            let (v, wv) = gauss_jacobi01(n, 0);
            for (ui, wui) in u.iter().zip(&wu) {
                for (sj, wsj) in s.iter().zip(&ws) {
                    for (vk, wvk) in v.iter().zip(&wv) {
                        let z = *ui;
                        let y = sj * (1.0 - z);
                        let x = vk * (1.0 - z) * (1.0 - sj);
                        points.push([1.0 - x - y - z, x, y, z]);
                        weights.push(wui * wsj * wvk);
                    }
                }
            }
        }
        d => return Err(Error::Dimension(d)),
    }
    Ok(QuadRule {
        dim,
        degree: exactness,
        points,
        weights,
    })
}

/// Gauss–Legendre points and weights on `[0, 1]`.
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi01(n, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    // ∫ over the reference simplex of x^a y^b z^c
    fn monomial_integral(exps: &[usize]) -> f64 {
        let d = exps.len();
        let s: usize = exps.iter().sum();
        exps.iter().map(|&e| factorial(e)).product::<f64>() / factorial(s + d)
    }

    #[test]
    fn midpoint_rule() {
        let r = quad_rule(1, 0).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
        assert!((r.points[0][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn triangle_xy() {
        let r = quad_rule(2, 2).unwrap();
        let s: f64 = (0..r.len())
            .map(|q| r.weights[q] * r.points[q][1] * r.points[q][2])
            .sum();
        assert!((s - 1.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn tet_x2yz() {
        let r = quad_rule(3, 4).unwrap();
        let s: f64 = (0..r.len())
            .map(|q| {
                let p = r.points[q];
                r.weights[q] * p[1] * p[1] * p[2] * p[3]
            })
            .sum();
        assert!((s - 1.0 / 2520.0).abs() < 1e-14);
    }

    #[test]
    fn exact_for_all_monomials() {
        for dim in 1..=3 {
            for deg in 0..=14 {
                let r = quad_rule(dim, deg).unwrap();
                let wsum: f64 = r.weights.iter().sum();
                assert!((wsum - 1.0 / factorial(dim)).abs() < 1e-14);
                for a in 0..=deg {
                    for b in 0..=(deg - a) {
                        for c in 0..=(deg - a - b) {
                            let exps: Vec<usize> = [a, b, c][..dim].to_vec();
                            if dim < 3 && c > 0 || dim < 2 && b > 0 {
                                continue;
                            }
                            let num: f64 = (0..r.len())
                                .map(|q| {
                                    let x = r.reference_point(q);
                                    r.weights[q]
                                        * exps
                                            .iter()
                                            .enumerate()
                                            .map(|(i, &e)| x[i].powi(e as i32))
                                            .product::<f64>()
                                })
                                .sum();
                            let want = monomial_integral(&exps);
                            assert!(
                                (num - want).abs() < 1e-13 * want.max(1e-3),
                                "dim {dim} deg {deg} exps {exps:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_excessive_degree() {
        assert!(quad_rule(2, MAX_EXACTNESS + 1).is_err());
    }
}
