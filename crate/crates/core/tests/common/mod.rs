#![allow(dead_code)]

use distcurv::fields::SymJet;
use distcurv::tensor::{Mat3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sym(r: &mut ChaCha8Rng, dim: usize, scale: f64) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in i..dim {
            let v = r.random_range(-1.0..1.0) * scale;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Quadratic metric `G0 + Σ G1_k x_k + ½ Σ G2_kl x_k x_l` with a dominant
/// positive constant part.
#[derive(Clone, Debug)]
pub struct QuadraticMetric {
    pub dim: usize,
    pub g0: Mat3,
    pub g1: [Mat3; 3],
    pub g2: [[Mat3; 3]; 3],
}

impl QuadraticMetric {
    pub fn random(r: &mut ChaCha8Rng, dim: usize, strength: f64) -> Self {
        let mut g0 = random_sym(r, dim, 0.3);
        for i in 0..dim {
            g0[i][i] += 1.5;
        }
        let mut g1 = [[[0.0; 3]; 3]; 3];
        let mut g2 = [[[[0.0; 3]; 3]; 3]; 3];
        for k in 0..dim {
            g1[k] = random_sym(r, dim, strength);
            for l in k..dim {
                let m = random_sym(r, dim, strength);
                g2[k][l] = m;
                g2[l][k] = m;
            }
        }
        Self { dim, g0, g1, g2 }
    }

    pub fn value(&self, x: &Vec3) -> Mat3 {
        self.jet(x).val
    }

    pub fn jet(&self, x: &Vec3) -> SymJet {
        let d = self.dim;
        let mut j = SymJet::constant(self.g0);
        for i in 0..d {
            for jj in 0..d {
                for k in 0..d {
                    j.val[i][jj] += self.g1[k][i][jj] * x[k];
                    j.d1[k][i][jj] += self.g1[k][i][jj];
                    for l in 0..d {
                        j.val[i][jj] += 0.5 * self.g2[k][l][i][jj] * x[k] * x[l];
                        j.d1[k][i][jj] += self.g2[k][l][i][jj] * x[l];
                        j.d2[k][l][i][jj] = self.g2[k][l][i][jj];
                    }
                }
            }
        }
        j
    }
}

pub fn random_point(r: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec3 {
    let mut p = [0.0; 3];
    for c in p.iter_mut().take(dim) {
        *c = r.random_range(-scale..scale);
    }
    p
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Random coefficients, zero on boundary DOFs.
pub fn random_interior_coeffs(r: &mut ChaCha8Rng, boundary: &[bool]) -> Vec<f64> {
    boundary
        .iter()
        .map(|&b| if b { 0.0 } else { r.random_range(-1.0..1.0) })
        .collect()
}

/// Test field from an element callback.
pub struct FnTest<F: Fn(usize, &distcurv::quadrature::Bary) -> Mat3>(pub F);

impl<F: Fn(usize, &distcurv::quadrature::Bary) -> Mat3> distcurv::curvature::TestField for FnTest<F> {
    fn value(&self, elem: usize, bary: &distcurv::quadrature::Bary) -> Mat3 {
        (self.0)(elem, bary)
    }
}
