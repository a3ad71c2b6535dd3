//! Per-element polynomial fields in a barycentric monomial (Bernstein-type)
//! basis, and the field traits consumed by the curvature assembly.

use alloc::boxed::Box;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // float methods only live in `core` on recent toolchains
use num_traits::Float;

use crate::mesh::Mesh;
use crate::quadrature::Bary;
use crate::tensor::{Mat3, Vec3, ZERO33};
use crate::{Error, Result};

/// Multi-indices `α` with `|α| = degree` over `nvars` barycentric slots, in
/// a fixed lexicographic order.
pub fn multi_indices(nvars: usize, degree: usize) -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    let mut a = [0u8; 4];
    fn rec(slot: usize, nvars: usize, left: usize, a: &mut [u8; 4], out: &mut Vec<[u8; 4]>) {
        if slot + 1 == nvars {
            a[slot] = left as u8;
            out.push(*a);
            return;
        }
        for v in (0..=left).rev() {
            a[slot] = v as u8;
            rec(slot + 1, nvars, left - v, a, out);
        }
        a[slot] = 0;
    }
    rec(0, nvars, degree, &mut a, &mut out);
    out
}

/// Value, gradient and Hessian of a scalar at a point.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarJet {
    pub val: f64,
    pub grad: Vec3,
    pub hess: Mat3,
}

/// Value and first/second partial derivatives of a symmetric 2-tensor.
#[derive(Debug, Clone, Copy)]
pub struct SymJet {
    pub val: Mat3,
    /// `d1[k] = ∂_k σ`
    pub d1: [Mat3; 3],
    /// `d2[k][l] = ∂_k ∂_l σ`
    pub d2: [[Mat3; 3]; 3],
}

impl Default for SymJet {
    fn default() -> Self {
        Self {
            val: ZERO33,
            d1: [ZERO33; 3],
            d2: [[ZERO33; 3]; 3],
        }
    }
}

impl SymJet {
    pub fn constant(val: Mat3) -> Self {
        Self { val, ..Self::default() }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &SymJet) {
        crate::tensor::axpy(&mut self.val, s, &other.val);
        for k in 0..3 {
            crate::tensor::axpy(&mut self.d1[k], s, &other.d1[k]);
            for l in 0..3 {
                crate::tensor::axpy(&mut self.d2[k][l], s, &other.d2[k][l]);
            }
        }
    }

    /// Accumulate `jet · m` for a scalar jet and constant matrix.
    pub fn add_scaled_matrix(&mut self, s: &ScalarJet, m: &Mat3) {
        for i in 0..3 {
            for j in 0..3 {
                let mij = m[i][j];
                if mij == 0.0 {
                    continue;
                }
                self.val[i][j] += s.val * mij;
                for k in 0..3 {
                    self.d1[k][i][j] += s.grad[k] * mij;
                    for l in 0..3 {
                        self.d2[k][l][i][j] += s.hess[k][l] * mij;
                    }
                }
            }
        }
    }
}

/// Powers of the barycentric coordinates, reused across a basis.
#[derive(Debug, Clone)]
pub struct BaryPowers {
    nvars: usize,
    pow: [[f64; 16]; 4],
}

impl BaryPowers {
    pub fn new(bary: &Bary, nvars: usize, degree: usize) -> Self {
        assert!(degree < 15, "polynomial degree too large");
        let mut pow = [[0.0; 16]; 4];
        for i in 0..nvars {
            pow[i][0] = 1.0;
            for e in 1..=degree + 1 {
                pow[i][e] = pow[i][e - 1] * bary[i];
            }
        }
        Self { nvars, pow }
    }

    fn mono(&self, a: &[i32; 4]) -> f64 {
        let mut v = 1.0;
        for i in 0..self.nvars {
            if a[i] < 0 {
                return 0.0;
            }
            v *= self.pow[i][a[i] as usize];
        }
        v
    }

    pub fn value(&self, alpha: &[u8; 4]) -> f64 {
        (0..self.nvars).map(|i| self.pow[i][alpha[i] as usize]).product()
    }

    /// `λ^α` with gradient and Hessian, given `∇λ_i`.
    pub fn jet(&self, alpha: &[u8; 4], grad_lambda: &[Vec3; 4], dim: usize) -> ScalarJet {
        let n = self.nvars;
        let a: [i32; 4] = [alpha[0] as i32, alpha[1] as i32, alpha[2] as i32, alpha[3] as i32];
        let mut jet = ScalarJet {
            val: self.mono(&a),
            ..ScalarJet::default()
        };
        for i in 0..n {
            if a[i] == 0 {
                continue;
            }
            let mut b = a;
            b[i] -= 1;
            let c = a[i] as f64 * self.mono(&b);
            for k in 0..dim {
                jet.grad[k] += c * grad_lambda[i][k];
            }
            for j in 0..n {
                let mut d = b;
                d[j] -= 1;
                if d[j] < 0 {
                    continue;
                }
                let cij = a[i] as f64 * b[j] as f64;
                let w = cij * self.mono(&d);
                if w == 0.0 {
                    continue;
                }
                for k in 0..dim {
                    for l in 0..dim {
                        jet.hess[k][l] += w * grad_lambda[i][k] * grad_lambda[j][l];
                    }
                }
            }
        }
        jet
    }
}

/// Scalar polynomial on one element.
#[derive(Debug, Clone)]
pub struct PolyScalar {
    pub elem: usize,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

/// Symmetric-matrix polynomial on one element, `Σ_α λ^α C_α`, with the
/// constant matrices `C_α` in global Cartesian components.
#[derive(Debug, Clone)]
pub struct PolySymTensor {
    pub elem: usize,
    pub degree: usize,
    pub coeffs: Vec<Mat3>,
}

/// Equally spaced barycentric lattice of a given degree (one point for degree 0).
pub fn lattice(nvars: usize, degree: usize) -> Vec<Bary> {
    multi_indices(nvars, degree)
        .into_iter()
        .map(|a| {
            let mut b = [0.0; 4];
            for i in 0..nvars {
                b[i] = if degree == 0 { 1.0 / nvars as f64 } else { a[i] as f64 / degree as f64 };
            }
            b
        })
        .collect()
}

fn vandermonde(nvars: usize, degree: usize) -> (Vec<Bary>, DMatrix<f64>) {
    let pts = lattice(nvars, degree);
    let idx = multi_indices(nvars, degree);
    let mut v = DMatrix::zeros(pts.len(), idx.len());
    for (r, p) in pts.iter().enumerate() {
        let bp = BaryPowers::new(p, nvars, degree);
        for (c, a) in idx.iter().enumerate() {
            v[(r, c)] = bp.value(a);
        }
    }
    (pts, v)
}

impl PolyScalar {
    /// Interpolate `f` at the lattice points of the element.
    pub fn from_fn(mesh: &Mesh, elem: usize, degree: usize, f: impl Fn(&Vec3) -> f64) -> Result<Self> {
        let nvars = mesh.dim + 1;
        let (pts, v) = vandermonde(nvars, degree);
        let rhs = DVector::from_iterator(pts.len(), pts.iter().map(|p| f(&mesh.point(elem, p))));
        let coeffs = v.lu().solve(&rhs).ok_or(Error::SingularMoments(elem))?;
        Ok(Self {
            elem,
            degree,
            coeffs: coeffs.iter().copied().collect(),
        })
    }

    pub fn eval(&self, mesh: &Mesh, bary: &Bary) -> ScalarJet {
        let nvars = mesh.dim + 1;
        let gl = &mesh.reference_map(self.elem).grad_lambda;
        let bp = BaryPowers::new(bary, nvars, self.degree);
        let mut out = ScalarJet::default();
        for (a, c) in multi_indices(nvars, self.degree).iter().zip(&self.coeffs) {
            let j = bp.jet(a, gl, mesh.dim);
            out.val += c * j.val;
            for k in 0..3 {
                out.grad[k] += c * j.grad[k];
                for l in 0..3 {
                    out.hess[k][l] += c * j.hess[k][l];
                }
            }
        }
        out
    }
}

impl PolySymTensor {
    /// Interpolate a symmetric-matrix function at the lattice points.
    pub fn from_fn(mesh: &Mesh, elem: usize, degree: usize, f: impl Fn(&Vec3) -> Mat3) -> Result<Self> {
        let nvars = mesh.dim + 1;
        let (pts, v) = vandermonde(nvars, degree);
        let lu = v.lu();
        let vals: Vec<Mat3> = pts.iter().map(|p| f(&mesh.point(elem, p))).collect();
        let mut coeffs = alloc::vec![ZERO33; pts.len()];
        for i in 0..mesh.dim {
            for j in i..mesh.dim {
                let rhs = DVector::from_iterator(pts.len(), vals.iter().map(|m| 0.5 * (m[i][j] + m[j][i])));
                let c = lu.solve(&rhs).ok_or(Error::SingularMoments(elem))?;
                for (k, ck) in c.iter().enumerate() {
                    coeffs[k][i][j] = *ck;
                    coeffs[k][j][i] = *ck;
                }
            }
        }
        Ok(Self { elem, degree, coeffs })
    }

    pub fn eval(&self, mesh: &Mesh, bary: &Bary) -> SymJet {
        let nvars = mesh.dim + 1;
        let gl = &mesh.reference_map(self.elem).grad_lambda;
        let bp = BaryPowers::new(bary, nvars, self.degree);
        let mut out = SymJet::default();
        for (a, c) in multi_indices(nvars, self.degree).iter().zip(&self.coeffs) {
            let j = bp.jet(a, gl, mesh.dim);
            out.add_scaled_matrix(&j, c);
        }
        out
    }
}

/// A symmetric 2-tensor field that can be evaluated element by element.
///
/// Metrics, metric perturbations and matrix-valued test fields all implement
/// this. Evaluation is by element and barycentric point so that piecewise
/// fields are unambiguous on shared facets.
pub trait TensorField {
    fn mesh(&self) -> &Mesh;

    fn jet(&self, elem: usize, bary: &Bary) -> SymJet;

    fn value(&self, elem: usize, bary: &Bary) -> Mat3 {
        self.jet(elem, bary).val
    }
}

/// Scalar field evaluated element by element.
pub trait ScalarField {
    fn value(&self, elem: usize, bary: &Bary) -> f64;
}

/// Independent polynomial pieces per element.
#[derive(Debug, Clone)]
pub struct PiecewiseField<'m> {
    pub mesh: &'m Mesh,
    pub pieces: Vec<PolySymTensor>,
}

impl<'m> PiecewiseField<'m> {
    /// Interpolate a global callback element by element at degree `k`.
    pub fn interpolate(mesh: &'m Mesh, degree: usize, f: impl Fn(&Vec3) -> Mat3) -> Result<Self> {
        let pieces = (0..mesh.num_elements())
            .map(|e| PolySymTensor::from_fn(mesh, e, degree, &f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mesh, pieces })
    }
}

impl TensorField for PiecewiseField<'_> {
    fn mesh(&self) -> &Mesh {
        self.mesh
    }

    fn jet(&self, elem: usize, bary: &Bary) -> SymJet {
        self.pieces[elem].eval(self.mesh, bary)
    }
}

/// A smooth field given by a pointwise jet callback, restricted to each element.
pub struct SmoothField<'m> {
    pub mesh: &'m Mesh,
    pub f: Box<dyn Fn(&Vec3) -> SymJet + 'm>,
}

impl core::fmt::Debug for SmoothField<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SmoothField").finish_non_exhaustive()
    }
}

impl<'m> SmoothField<'m> {
    pub fn new(mesh: &'m Mesh, f: impl Fn(&Vec3) -> SymJet + 'm) -> Self {
        Self { mesh, f: Box::new(f) }
    }
}

impl TensorField for SmoothField<'_> {
    fn mesh(&self) -> &Mesh {
        self.mesh
    }

    fn jet(&self, elem: usize, bary: &Bary) -> SymJet {
        (self.f)(&self.mesh.point(elem, bary))
    }
}

/// Linear combination `Σ c_i F_i` of fields on the same mesh.
pub struct Combination<'a> {
    pub terms: Vec<(f64, &'a dyn TensorField)>,
}

impl core::fmt::Debug for Combination<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Combination").field("terms", &self.terms.len()).finish()
    }
}

impl<'a> Combination<'a> {
    pub fn new(terms: Vec<(f64, &'a dyn TensorField)>) -> Self {
        assert!(!terms.is_empty());
        Self { terms }
    }
}

impl TensorField for Combination<'_> {
    fn mesh(&self) -> &Mesh {
        self.terms[0].1.mesh()
    }

    fn jet(&self, elem: usize, bary: &Bary) -> SymJet {
        let mut j = SymJet::default();
        for (c, f) in &self.terms {
            j.axpy(*c, &f.jet(elem, bary));
        }
        j
    }

    fn value(&self, elem: usize, bary: &Bary) -> Mat3 {
        let mut v = ZERO33;
        for (c, f) in &self.terms {
            crate::tensor::axpy(&mut v, *c, &f.value(elem, bary));
        }
        v
    }
}

/// Scalar field from a global callback.
pub struct ScalarFn<'m, F: Fn(&Vec3) -> f64> {
    pub mesh: &'m Mesh,
    pub f: F,
}

impl<F: Fn(&Vec3) -> f64> core::fmt::Debug for ScalarFn<'_, F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ScalarFn").finish_non_exhaustive()
    }
}

impl<F: Fn(&Vec3) -> f64> ScalarField for ScalarFn<'_, F> {
    fn value(&self, elem: usize, bary: &Bary) -> f64 {
        (self.f)(&self.mesh.point(elem, bary))
    }
}

/// Scalar field times a constant symmetric matrix.
pub struct ScaledMatrix<'a> {
    pub mesh: &'a Mesh,
    pub scalar: &'a dyn ScalarField,
    pub matrix: Mat3,
}

impl core::fmt::Debug for ScaledMatrix<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ScaledMatrix").field("matrix", &self.matrix).finish()
    }
}

impl TensorField for ScaledMatrix<'_> {
    fn mesh(&self) -> &Mesh {
        self.mesh
    }

    fn jet(&self, elem: usize, bary: &Bary) -> SymJet {
        SymJet::constant(self.value(elem, bary))
    }

    fn value(&self, elem: usize, bary: &Bary) -> Mat3 {
        crate::tensor::scale(&self.matrix, self.scalar.value(elem, bary))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_triangle() -> Mesh {
        Mesh::new(
            2,
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2, crate::mesh::PAD]],
        )
        .unwrap()
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(3, 0).len(), 1);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(4, 3).len(), 20);
        assert!(multi_indices(4, 3).iter().all(|a| a.iter().map(|&x| x as usize).sum::<usize>() == 3));
    }

    #[test]
    fn x_squared() {
        let m = unit_triangle();
        let p = PolyScalar::from_fn(&m, 0, 2, |x| x[0] * x[0]).unwrap();
        let j = p.eval(&m, &[0.7, 0.3, 0.0, 0.0]);
        assert!((j.val - 0.09).abs() < 1e-14);
        assert!((j.grad[0] - 0.6).abs() < 1e-13);
        assert!(j.grad[1].abs() < 1e-13);
        assert!((j.hess[0][0] - 2.0).abs() < 1e-12);
        assert!(j.hess[0][1].abs() < 1e-12 && j.hess[1][1].abs() < 1e-12);
    }

    #[test]
    fn constant_has_no_derivatives() {
        let m = unit_triangle();
        let p = PolyScalar::from_fn(&m, 0, 0, |_| 3.5).unwrap();
        let j = p.eval(&m, &[0.2, 0.3, 0.5, 0.0]);
        assert!((j.val - 3.5).abs() < 1e-15);
        assert!(j.grad.iter().all(|g| g.abs() < 1e-15));
        assert!(j.hess.iter().flatten().all(|g| g.abs() < 1e-15));
    }
}
