//! Pointwise Riemannian geometry of a metric given with its first and second
//! partial derivatives: Christoffel symbols, the Riemann tensor and its
//! contractions, the algebraic map between test tensors and algebraic
//! curvature tensors, and the facet and bone frames used by the jump terms.
//!
//! The curvature sign convention makes `R_{1221} > 0` on a round sphere, so
//! the Gauss curvature in 2D is `R_{1221} / det g`.

use core::f64::consts::PI;

#[allow(unused_imports)] // float methods only live in `core` on recent toolchains
use num_traits::Float;

use crate::fields::SymJet;
use crate::tensor::{self, eps2, eps3, Mat3, Tensor3, Tensor4, Vec3, ZERO3, ZERO33, ZERO333, ZERO4};
use crate::{Error, Result};

/// Metric quantities at one point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub dim: usize,
    pub g: Mat3,
    pub ginv: Mat3,
    pub det: f64,
    pub sqrt_det: f64,
    /// `dg[k] = ∂_k g`
    pub dg: [Mat3; 3],
    /// `d2g[k][l] = ∂_k ∂_l g`
    pub d2g: [[Mat3; 3]; 3],
    /// First kind, `gamma1[i][j][k] = Γ_{ijk} = ½(∂_i g_jk + ∂_j g_ik - ∂_k g_ij)`.
    pub gamma1: Tensor3,
    /// Second kind, `gamma2[l][i][j] = Γ^l_{ij}`.
    pub gamma2: Tensor3,
    /// `dgamma2[m][l][i][j] = ∂_m Γ^l_{ij}`; only filled when curvature is requested.
    pub dgamma2: [Tensor3; 3],
    /// Covariant Riemann tensor `R_{ijkl}`; zero unless curvature is requested.
    pub riem: Tensor4,
}

impl PointGeometry {
    /// Full geometry including the Riemann tensor.
    pub fn new(dim: usize, jet: &SymJet) -> Option<Self> {
        let mut pg = Self::first_order(dim, jet)?;
        pg.fill_curvature();
        Some(pg)
    }

    /// Metric and Christoffel symbols only.
    pub fn first_order(dim: usize, jet: &SymJet) -> Option<Self> {
        let g = jet.val;
        if !tensor::is_positive_definite(&g, dim) {
            return None;
        }
        let det = tensor::det(&g, dim);
        let ginv = tensor::inverse(&g, dim)?;
        let mut gamma1 = ZERO333;
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    gamma1[i][j][k] = 0.5 * (jet.d1[i][j][k] + jet.d1[j][i][k] - jet.d1[k][i][j]);
                }
            }
        }
        let mut gamma2 = ZERO333;
        for l in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    gamma2[l][i][j] = (0..dim).map(|k| ginv[l][k] * gamma1[i][j][k]).sum();
                }
            }
        }
        Some(Self {
            dim,
            g,
            ginv,
            det,
            sqrt_det: det.sqrt(),
            dg: jet.d1,
            d2g: jet.d2,
            gamma1,
            gamma2,
            dgamma2: [ZERO333; 3],
            riem: ZERO4,
        })
    }

    fn fill_curvature(&mut self) {
        let dim = self.dim;
        let gi = self.ginv;
        for m in 0..dim {
            // ∂_m g^{lk} = -g^{la} ∂_m g_ab g^{bk}
            let dginv = tensor::scale(&tensor::matmul(&tensor::matmul(&gi, &self.dg[m], dim), &gi, dim), -1.0);
            for l in 0..dim {
                for i in 0..dim {
                    for j in 0..dim {
                        let mut s = 0.0;
                        for k in 0..dim {
                            let dg1 = 0.5 * (self.d2g[m][i][j][k] + self.d2g[m][j][i][k] - self.d2g[m][k][i][j]);
                            s += dginv[l][k] * self.gamma1[i][j][k] + gi[l][k] * dg1;
                        }
                        self.dgamma2[m][l][i][j] = s;
                    }
                }
            }
        }
        let (g, gm, dgm) = (&self.g, &self.gamma2, &self.dgamma2);
        let mut r = ZERO4;
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    // T^m = ∂_iΓ^m_jk - ∂_jΓ^m_ik + Γ^p_jk Γ^m_ip - Γ^p_ik Γ^m_jp
                    let mut t = ZERO3;
                    for (mm, tm) in t.iter_mut().enumerate().take(dim) {
                        let mut s = dgm[i][mm][j][k] - dgm[j][mm][i][k];
                        for p in 0..dim {
                            s += gm[p][j][k] * gm[mm][i][p] - gm[p][i][k] * gm[mm][j][p];
                        }
                        *tm = s;
                    }
                    for l in 0..dim {
                        r[i][j][k][l] = (0..dim).map(|mm| g[l][mm] * t[mm]).sum();
                    }
                }
            }
        }
        self.riem = r;
    }

    /// `ε̂^{...}` (all indices up).
    #[inline]
    pub fn eps_up3(&self, i: usize, j: usize, k: usize) -> f64 {
        eps3(i, j, k) / self.sqrt_det
    }

    /// `g⁻¹ A g⁻¹`
    pub fn raise(&self, a: &Mat3) -> Mat3 {
        let d = self.dim;
        tensor::matmul(&tensor::matmul(&self.ginv, a, d), &self.ginv, d)
    }

    /// `g A g`
    pub fn lower(&self, a: &Mat3) -> Mat3 {
        let d = self.dim;
        tensor::matmul(&tensor::matmul(&self.g, a, d), &self.g, d)
    }

    /// `⟨A, B⟩ = A_ij g^ia g^jb B_ab` for covariant 2-tensors.
    pub fn inner2(&self, a: &Mat3, b: &Mat3) -> f64 {
        tensor::frob(a, &self.raise(b), self.dim)
    }

    /// `⟨A, B⟩` for covariant 4-tensors.
    pub fn inner4(&self, a: &Tensor4, b: &Tensor4) -> f64 {
        tensor::inner4(a, b, &self.ginv, self.dim)
    }

    pub fn metric(&self, x: &Vec3, y: &Vec3) -> f64 {
        tensor::bilinear(&self.g, x, y, self.dim)
    }

    pub fn norm(&self, x: &Vec3) -> f64 {
        self.metric(x, x).sqrt()
    }

    /// Gauss curvature (2D).
    pub fn gauss(&self) -> f64 {
        self.riem[0][1][1][0] / self.det
    }

    /// Scalar curvature `g^{il} g^{jk} R_{ijkl}`.
    pub fn scalar(&self) -> f64 {
        let d = self.dim;
        let gi = &self.ginv;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        s += gi[i][l] * gi[j][k] * self.riem[i][j][k][l];
                    }
                }
            }
        }
        s
    }

    /// Ricci tensor `Ric_ij = R_{kijl} g^{kl}`.
    pub fn ricci(&self) -> Mat3 {
        let d = self.dim;
        let mut r = ZERO33;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        r[i][j] += self.riem[k][i][j][l] * self.ginv[k][l];
                    }
                }
            }
        }
        r
    }

    /// Einstein tensor `Ric - ½ S g`.
    pub fn einstein(&self) -> Mat3 {
        let mut g = self.ricci();
        tensor::axpy(&mut g, -0.5 * self.scalar(), &self.g);
        g
    }

    /// Curvature operator `Q^{ij} = -¼ ε̂^{ikl} ε̂^{jmn} R_{klmn}` (3D), contravariant.
    pub fn curvature_operator(&self) -> Mat3 {
        let mut q = ZERO33;
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        let e1 = eps3(i, k, l);
                        if e1 == 0.0 {
                            continue;
                        }
                        for m in 0..3 {
                            for n in 0..3 {
                                let e2 = eps3(j, m, n);
                                if e2 != 0.0 {
                                    s += e1 * e2 * self.riem[k][l][m][n];
                                }
                            }
                        }
                    }
                }
                q[i][j] = -0.25 * s / self.det;
            }
        }
        q
    }

    /// Algebraic curvature tensor associated with a test tensor. In 2D the
    /// scalar test function is `u[0][0]` and the result is `-u ω⊗ω`; in 3D
    /// `(𝔸U)_{ijkl} = -ε̂_{ija} ε̂_{klb} U^{ab}`.
    pub fn amap(&self, u: &Mat3) -> Tensor4 {
        let mut a = ZERO4;
        if self.dim == 2 {
            let v = u[0][0];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            a[i][j][k][l] = -self.det * eps2(i, j) * eps2(k, l) * v;
                        }
                    }
                }
            }
            return a;
        }
        let uu = self.raise(u);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut s = 0.0;
                        for c in 0..3 {
                            for d in 0..3 {
                                s += eps3(i, j, c) * eps3(k, l, d) * uu[c][d];
                            }
                        }
                        a[i][j][k][l] = -self.det * s;
                    }
                }
            }
        }
        a
    }

    /// Inverse of [`amap`](Self::amap); rejects tensors without the algebraic
    /// curvature symmetries.
    pub fn amap_inv(&self, a: &Tensor4) -> Result<Mat3> {
        let d = self.dim;
        let mut scale_ref: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let x = a[i][j][k][l];
                        scale_ref = scale_ref.max(x.abs());
                        defect = defect
                            .max((x + a[j][i][k][l]).abs())
                            .max((x + a[i][j][l][k]).abs())
                            .max((x - a[k][l][i][j]).abs());
                    }
                }
            }
        }
        if defect > 1e-9 * scale_ref.max(1.0) {
            return Err(Error::Symmetry(defect));
        }
        let up = tensor::raise4(a, &self.ginv, d);
        let mut u = ZERO33;
        if d == 2 {
            let mut s = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            s += eps2(i, j) * eps2(k, l) * up[i][j][k][l];
                        }
                    }
                }
            }
            u[0][0] = -0.25 * self.det * s;
            return Ok(u);
        }
        for al in 0..3 {
            for be in 0..3 {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        for k in 0..3 {
                            for l in 0..3 {
                                s += eps3(al, i, j) * eps3(be, k, l) * up[i][j][k][l];
                            }
                        }
                    }
                }
                u[al][be] = -0.25 * self.det * s;
            }
        }
        Ok(u)
    }

    /// Metric cross product of two vectors (3D), `(X×Y)^i = ε̂^{ijk} X_j Y_k`.
    pub fn cross(&self, x: &Vec3, y: &Vec3) -> Vec3 {
        let xl = tensor::matvec(&self.g, x, 3);
        let yl = tensor::matvec(&self.g, y, 3);
        let mut r = ZERO3;
        for (i, ri) in r.iter_mut().enumerate() {
            for j in 0..3 {
                for k in 0..3 {
                    *ri += self.eps_up3(i, j, k) * xl[j] * yl[k];
                }
            }
        }
        r
    }

    /// `Γ(X, Y)^k = Γ^k_ij X^i Y^j`, the covariant derivative of a constant field.
    pub fn connection(&self, x: &Vec3, y: &Vec3) -> Vec3 {
        let d = self.dim;
        let mut r = ZERO3;
        for (k, rk) in r.iter_mut().enumerate().take(d) {
            *rk = tensor::bilinear(&self.gamma2[k], x, y, d);
        }
        r
    }

    /// Unit normal for an inward Euclidean normal covector: `g⁻¹n / |n|_{g⁻¹}`.
    pub fn g_normal(&self, nhat: &Vec3) -> Vec3 {
        let v = tensor::matvec(&self.ginv, nhat, self.dim);
        let s = tensor::dot(nhat, &v, self.dim).sqrt();
        [v[0] / s, v[1] / s, v[2] / s]
    }

    /// Metric Gram–Schmidt of the given vectors; returns the count produced.
    pub fn orthonormalize(&self, vs: &[Vec3], out: &mut [Vec3; 3]) -> usize {
        let mut n = 0;
        for v in vs {
            let mut w = *v;
            for b in out.iter().take(n) {
                let c = self.metric(&w, b);
                for i in 0..3 {
                    w[i] -= c * b[i];
                }
            }
            let len = self.norm(&w);
            if len > 0.0 {
                out[n] = [w[0] / len, w[1] / len, w[2] / len];
                n += 1;
            }
        }
        n
    }

    /// Unit conormal of a bone inside a facet: component of `into` that is
    /// metric-orthogonal to the bone tangents, normalised.
    pub fn conormal(&self, bone_tangents: &[Vec3], into: &Vec3) -> Vec3 {
        let mut basis = [ZERO3; 3];
        let n = self.orthonormalize(bone_tangents, &mut basis);
        let mut w = *into;
        for b in basis.iter().take(n) {
            let c = self.metric(&w, b);
            for i in 0..3 {
                w[i] -= c * b[i];
            }
        }
        let len = self.norm(&w);
        [w[0] / len, w[1] / len, w[2] / len]
    }

    /// Second fundamental form `II(X, Y) = g(ν, ∇_X Y)` for constant tangent fields.
    pub fn sff(&self, nu: &Vec3, x: &Vec3, y: &Vec3) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                for m in 0..d {
                    s += self.gamma1[a][b][m] * nu[m] * x[a] * y[b];
                }
            }
        }
        s
    }

    /// First covariant derivative `(∇σ)[a][b][c] = ∇_a σ_bc`.
    pub fn nabla(&self, s: &SymJet) -> Tensor3 {
        let d = self.dim;
        let gm = &self.gamma2;
        let mut r = ZERO333;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let mut v = s.d1[a][b][c];
                    for m in 0..d {
                        v -= gm[m][a][b] * s.val[m][c] + gm[m][a][c] * s.val[b][m];
                    }
                    r[a][b][c] = v;
                }
            }
        }
        r
    }

    /// Second covariant derivative `(∇²σ)[a][b][c][d] = ∇_a ∇_b σ_cd`.
    /// Needs the curvature-level data (`∂Γ`).
    pub fn nabla2(&self, s: &SymJet) -> Tensor4 {
        let dm = self.dim;
        let gm = &self.gamma2;
        let dgm = &self.dgamma2;
        let n1 = self.nabla(s);
        let mut r = ZERO4;
        for a in 0..dm {
            for b in 0..dm {
                for c in 0..dm {
                    for d in 0..dm {
                        // ∂_a (∇σ)_bcd
                        let mut v = s.d2[a][b][c][d];
                        for m in 0..dm {
                            v -= dgm[a][m][b][c] * s.val[m][d] + gm[m][b][c] * s.d1[a][m][d];
                            v -= dgm[a][m][b][d] * s.val[c][m] + gm[m][b][d] * s.d1[a][c][m];
                        }
                        for m in 0..dm {
                            v -= gm[m][a][b] * n1[m][c][d] + gm[m][a][c] * n1[b][m][d] + gm[m][a][d] * n1[b][c][m];
                        }
                        r[a][b][c][d] = v;
                    }
                }
            }
        }
        r
    }
}

/// Interior angle between two conormals, with the cosine clamped to `[-1, 1]`.
/// The flag reports a clamp beyond `1 + 1e-10`.
pub fn angle_between(pg: &PointGeometry, mu_plus: &Vec3, mu_minus: &Vec3) -> (f64, bool) {
    let c = pg.metric(mu_plus, mu_minus);
    let warn = c.abs() > 1.0 + 1e-10;
    (c.clamp(-1.0, 1.0).acos(), warn)
}

/// Full angle minus a sum of interior angles.
pub fn deficit(angles: impl IntoIterator<Item = f64>) -> f64 {
    2.0 * PI - angles.into_iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet_from(g: Mat3) -> SymJet {
        SymJet::constant(g)
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let pg = PointGeometry::new(3, &jet_from(tensor::identity(3))).unwrap();
        assert!(pg.gamma2.iter().flatten().flatten().all(|x| *x == 0.0));
        assert!(pg.riem.iter().flatten().flatten().flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn normal_for_diagonal_metric() {
        let mut g = ZERO33;
        g[0][0] = 4.0;
        g[1][1] = 1.0;
        let pg = PointGeometry::first_order(2, &jet_from(g)).unwrap();
        let nu = pg.g_normal(&[1.0, 0.0, 0.0]);
        assert!((nu[0] - 0.5).abs() < 1e-15 && nu[1].abs() < 1e-15);
    }

    #[test]
    fn amap_2d_identity() {
        let pg = PointGeometry::new(2, &jet_from(tensor::identity(2))).unwrap();
        let mut u = ZERO33;
        u[0][0] = 1.7;
        let a = pg.amap(&u);
        assert!((a[0][1][0][1] + 1.7).abs() < 1e-15);
        assert!((a[0][1][1][0] - 1.7).abs() < 1e-15);
        assert!((pg.amap_inv(&a).unwrap()[0][0] - 1.7).abs() < 1e-14);
    }

    #[test]
    fn amap_inverse_rejects_nonsymmetric() {
        let pg = PointGeometry::new(3, &jet_from(tensor::identity(3))).unwrap();
        let mut a = ZERO4;
        a[0][1][0][1] = 1.0;
        assert!(pg.amap_inv(&a).is_err());
    }
}
