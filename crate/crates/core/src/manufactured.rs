//! Metrics with known curvature: graph embeddings, the flat metric and
//! piecewise constant cone metrics on a fan.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
#[allow(unused_imports)] // float methods only live in `core` on recent toolchains
use num_traits::Float;

use crate::fields::{PiecewiseField, PolySymTensor, SymJet};
use crate::mesh::{Mesh, PAD};
use crate::tensor::{self, Mat3, Tensor3, Vec3, ZERO33, ZERO333, ZERO3};
use crate::{Error, Result};

/// Gradient, Hessian and third derivatives of a height function.
pub type HeightDerivs = fn(&Vec3) -> (Vec3, Mat3, Tensor3);

/// Metric `g = I + ∇f ⊗ ∇f` induced by the graph of `f`.
#[derive(Debug, Clone, Copy)]
pub struct GraphMetric {
    pub dim: usize,
    pub derivs: HeightDerivs,
}

impl GraphMetric {
    pub fn new(dim: usize, derivs: HeightDerivs) -> Self {
        Self { dim, derivs }
    }

    pub fn value(&self, x: &Vec3) -> Mat3 {
        let (df, _, _) = (self.derivs)(x);
        let mut g = tensor::identity(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                g[i][j] += df[i] * df[j];
            }
        }
        g
    }

    pub fn jet(&self, x: &Vec3) -> SymJet {
        let d = self.dim;
        let (f1, f2, f3) = (self.derivs)(x);
        let mut j = SymJet::constant(self.value(x));
        for i in 0..d {
            for jj in 0..d {
                for k in 0..d {
                    j.d1[k][i][jj] = f2[i][k] * f1[jj] + f1[i] * f2[jj][k];
                    for l in 0..d {
                        j.d2[k][l][i][jj] =
                            f3[i][k][l] * f1[jj] + f2[i][k] * f2[jj][l] + f2[i][l] * f2[jj][k] + f1[i] * f3[jj][k][l];
                    }
                }
            }
        }
        j
    }

    /// `det g = 1 + |∇f|²`.
    pub fn det(&self, x: &Vec3) -> f64 {
        let (df, _, _) = (self.derivs)(x);
        1.0 + tensor::dot(&df, &df, self.dim)
    }

    /// Classical Gauss curvature of a graph surface, `det(Hess f) / (1 + |∇f|²)²`.
    pub fn gauss_exact(&self, x: &Vec3) -> f64 {
        let (_, h, _) = (self.derivs)(x);
        let w = self.det(x);
        tensor::det(&h, 2) / (w * w)
    }
}

fn zero_height(_: &Vec3) -> (Vec3, Mat3, Tensor3) {
    (ZERO3, ZERO33, ZERO333)
}

/// Height function `½|x|² - (1/12) Σ x_i⁴` restricted to the first `dim` coordinates.
fn quartic_height<const D: usize>(x: &Vec3) -> (Vec3, Mat3, Tensor3) {
    let mut g = ZERO3;
    let mut h = ZERO33;
    let mut t = ZERO333;
    for i in 0..D {
        g[i] = x[i] - x[i].powi(3) / 3.0;
        h[i][i] = 1.0 - x[i] * x[i];
        t[i][i][i] = -2.0 * x[i];
    }
    (g, h, t)
}

/// The flat metric in `dim` dimensions.
pub fn flat(dim: usize) -> GraphMetric {
    GraphMetric::new(dim, zero_height)
}

/// `q(x) = x²(x² - 3)²`
pub fn benchmark_q(x: f64) -> f64 {
    let s = x * x - 3.0;
    x * x * s * s
}

/// Three-dimensional benchmark on `(-1,1)³`.
pub fn benchmark_3d() -> GraphMetric {
    GraphMetric::new(3, quartic_height::<3>)
}

/// Closed-form curvature operator (contravariant components) of [`benchmark_3d`].
pub fn benchmark_q_exact(x: &Vec3) -> Mat3 {
    let (a, b, c) = (x[0], x[1], x[2]);
    let detg = (benchmark_q(a) + benchmark_q(b) + benchmark_q(c) + 9.0) / 9.0;
    let den = detg * (benchmark_q(a) + benchmark_q(b) + benchmark_q(c) + 9.0);
    let mut q = ZERO33;
    q[0][0] = 9.0 * (c * c - 1.0) * (b * b - 1.0) / den;
    q[1][1] = 9.0 * (a * a - 1.0) * (c * c - 1.0) / den;
    q[2][2] = 9.0 * (a * a - 1.0) * (b * b - 1.0) / den;
    q
}

/// Two-dimensional analogue of the benchmark on `(-1,1)²`.
pub fn benchmark_2d() -> GraphMetric {
    GraphMetric::new(2, quartic_height::<2>)
}

/// Fan of triangles around a single interior vertex carrying piecewise
/// constant flat metrics.
#[derive(Debug, Clone)]
pub struct ConeFan {
    pub mesh: Mesh,
    pub metrics: Vec<Mat3>,
    /// Index of the apex vertex.
    pub apex: usize,
}

impl ConeFan {
    pub fn field(&self) -> PiecewiseField<'_> {
        let pieces = self
            .metrics
            .iter()
            .enumerate()
            .map(|(e, m)| PolySymTensor {
                elem: e,
                degree: 0,
                coeffs: alloc::vec![*m],
            })
            .collect();
        PiecewiseField {
            mesh: &self.mesh,
            pieces,
        }
    }
}

/// Cone metric with prescribed apex angles. Each triangle is drawn with apex
/// angle `2π/m` and unit spokes, and carries the constant metric that turns
/// it into the isosceles triangle with apex angle `angles[i]`. Every sector is
/// split into `2^refine` triangles along its outer edge.
pub fn cone_metric_2d(angles: &[f64], refine: usize) -> Result<ConeFan> {
    let m = angles.len();
    if m < 3 || angles.iter().any(|a| !(*a > 0.0 && *a < PI)) {
        return Err(Error::Invalid("cone angles must lie in (0, π) with at least 3 sectors"));
    }
    let parts = 1usize << refine;
    let n = m * parts;
    let mut vertices = alloc::vec![[0.0; 3]];
    for i in 0..n {
        let t = 2.0 * PI * i as f64 / n as f64;
        vertices.push([t.cos(), t.sin(), 0.0]);
    }
    let mut elements = Vec::with_capacity(n);
    let mut metrics = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (1 + i, 1 + (i + 1) % n);
        elements.push([0, a, b, PAD]);
        let phi = angles[i / parts] / parts as f64;
        let edges = [vertices[a], vertices[b], tensor::sub(&vertices[b], &vertices[a])];
        let lens = [1.0, 1.0, 2.0 - 2.0 * phi.cos()];
        let mat = Matrix3::from_fn(|r, c| {
            let e = edges[r];
            [e[0] * e[0], 2.0 * e[0] * e[1], e[1] * e[1]][c]
        });
        let sol = mat
            .lu()
            .solve(&Vector3::from_column_slice(&lens))
            .ok_or(Error::Invalid("inconsistent edge lengths"))?;
        let mut g = ZERO33;
        g[0][0] = sol[0];
        g[0][1] = sol[1];
        g[1][0] = sol[1];
        g[1][1] = sol[2];
        if !tensor::is_positive_definite(&g, 2) {
            return Err(Error::Invalid("edge lengths violate the triangle inequality"));
        }
        metrics.push(g);
    }
    Ok(ConeFan {
        mesh: Mesh::new(2, vertices, elements)?,
        metrics,
        apex: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_at_origin() {
        let g = benchmark_3d();
        let o = [0.0; 3];
        assert_eq!(g.value(&o), tensor::identity(3));
        assert!((g.det(&o) - 1.0).abs() < 1e-15);
        let q = benchmark_q_exact(&o);
        assert!((q[0][0] - 1.0).abs() < 1e-15 && (q[2][2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cone_metrics_realise_target_lengths() {
        let fan = cone_metric_2d(&[PI / 4.0; 6], 1).unwrap();
        assert_eq!(fan.mesh.num_elements(), 12);
        for (e, g) in fan.metrics.iter().enumerate() {
            let el = fan.mesh.element(e);
            let spoke = fan.mesh.vertices[el[1]];
            assert!((tensor::bilinear(g, &spoke, &spoke, 2) - 1.0).abs() < 1e-13);
        }
    }
}
