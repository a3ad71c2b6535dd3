//! Lagrange, Regge and Hellan–Herrmann–Johnson spaces with barycentric
//! monomial bases, canonical Regge interpolation and trace checks.
//!
//! Every local basis function is tied to the subsimplex spanned by the
//! vertices it depends on. Functions are identified across elements through
//! global vertex ids, which makes Lagrange fields continuous, Regge fields
//! tangential-tangential continuous and HHJ fields normal-normal continuous
//! without any sign bookkeeping.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // float methods only live in `core` on recent toolchains
use num_traits::Float;

use crate::fields::{multi_indices, BaryPowers, PiecewiseField, PolySymTensor, ScalarField, ScalarJet, SymJet, TensorField};
use crate::mesh::{key_of, Mesh};
use crate::quadrature::{quad_rule, Bary};
use crate::tensor::{self, Mat3, Vec3, ZERO33};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Lagrange,
    Regge,
    Hhj,
}

/// Matrix factor of a local basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    /// `∇λ_i ⊙ ∇λ_j`
    Pair(u8, u8),
    /// Normal-normal carrier of the facet opposite local vertex `l`.
    Facet(u8),
    /// Matrix with vanishing normal-normal trace on every facet.
    Bubble(u8),
}

#[derive(Debug, Clone, Copy)]
pub struct LocalFn {
    pub alpha: [u8; 4],
    pub shape: Shape,
}

#[derive(Debug, Clone)]
pub struct Space<'m> {
    pub mesh: &'m Mesh,
    pub kind: SpaceKind,
    pub order: usize,
    templates: Vec<LocalFn>,
    elem_dofs: Vec<Vec<usize>>,
    /// Subsimplex `(dimension, id)` carrying each DOF.
    pub dof_entity: Vec<(usize, usize)>,
    /// DOFs with nonzero (tangential) trace on the boundary.
    pub boundary: Vec<bool>,
}

impl<'m> Space<'m> {
    pub fn lagrange(mesh: &'m Mesh, order: usize) -> Self {
        let templates = multi_indices(mesh.dim + 1, order)
            .into_iter()
            .map(|alpha| LocalFn { alpha, shape: Shape::Scalar })
            .collect();
        Self::build(mesh, SpaceKind::Lagrange, order, templates)
    }

    pub fn regge(mesh: &'m Mesh, order: usize) -> Self {
        let n = mesh.dim + 1;
        let mut templates = Vec::new();
        for alpha in multi_indices(n, order) {
            for i in 0..n {
                for j in i + 1..n {
                    templates.push(LocalFn {
                        alpha,
                        shape: Shape::Pair(i as u8, j as u8),
                    });
                }
            }
        }
        Self::build(mesh, SpaceKind::Regge, order, templates)
    }

    pub fn hhj(mesh: &'m Mesh, order: usize) -> Self {
        let n = mesh.dim + 1;
        let mut templates = Vec::new();
        for alpha in multi_indices(n, order) {
            for l in 0..n {
                templates.push(LocalFn {
                    alpha,
                    shape: Shape::Facet(l as u8),
                });
            }
            for b in 0..tensor::sym_count(mesh.dim) - n {
                templates.push(LocalFn {
                    alpha,
                    shape: Shape::Bubble(b as u8),
                });
            }
        }
        Self::build(mesh, SpaceKind::Hhj, order, templates)
    }

    fn build(mesh: &'m Mesh, kind: SpaceKind, order: usize, templates: Vec<LocalFn>) -> Self {
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut elem_dofs = Vec::with_capacity(mesh.num_elements());
        let mut dof_entity = Vec::new();
        for e in 0..mesh.num_elements() {
            let el = mesh.element(e);
            let mut dofs = Vec::with_capacity(templates.len());
            for (t, lf) in templates.iter().enumerate() {
                let (key, ent) = global_key(mesh, e, el, t, lf);
                let id = *index.entry(key).or_insert_with(|| {
                    dof_entity.push(ent);
                    dof_entity.len() - 1
                });
                dofs.push(id);
            }
            elem_dofs.push(dofs);
        }
        let boundary = dof_entity
            .iter()
            .map(|&(s, id)| s < mesh.dim && mesh.entities(s).boundary[id])
            .collect();
        Self {
            mesh,
            kind,
            order,
            templates,
            elem_dofs,
            dof_entity,
            boundary,
        }
    }

    pub fn ndofs(&self) -> usize {
        self.dof_entity.len()
    }

    pub fn templates(&self) -> &[LocalFn] {
        &self.templates
    }

    /// Global DOF of each local basis function of element `e`.
    pub fn elem_dofs(&self, e: usize) -> &[usize] {
        &self.elem_dofs[e]
    }

    /// DOFs not on the boundary, in ascending order.
    pub fn interior_dofs(&self) -> Vec<usize> {
        (0..self.ndofs()).filter(|&d| !self.boundary[d]).collect()
    }

    /// Constant matrix factor of local function `t` on element `e`.
    pub fn shape_matrix(&self, e: usize, shape: Shape) -> Mat3 {
        let m = self.mesh.reference_map(e);
        let gl = &m.grad_lambda;
        let dim = self.mesh.dim;
        let el = self.mesh.element(e);
        let x = |i: usize| self.mesh.vertices[el[i]];
        match shape {
            Shape::Scalar => tensor::identity(1),
            Shape::Pair(i, j) => tensor::sym_outer(&gl[i as usize], &gl[j as usize]),
            Shape::Facet(l) => facet_carrier(dim, gl, &x, l as usize, None),
            Shape::Bubble(b) => {
                // differences of the three carriers of facet 0 in 3D
                let p = facet_carrier(dim, gl, &x, 0, Some((1, 2)));
                let q = facet_carrier(dim, gl, &x, 0, Some(if b == 0 { (1, 3) } else { (2, 3) }));
                let mut r = p;
                tensor::axpy(&mut r, -1.0, &q);
                r
            }
        }
    }

    /// Scalar jets of all local functions (Lagrange spaces).
    pub fn scalar_jets(&self, e: usize, bary: &Bary, out: &mut Vec<ScalarJet>) {
        let dim = self.mesh.dim;
        let bp = BaryPowers::new(bary, dim + 1, self.order);
        let gl = &self.mesh.reference_map(e).grad_lambda;
        out.clear();
        out.extend(self.templates.iter().map(|t| bp.jet(&t.alpha, gl, dim)));
    }

    /// Scalar values of all local functions (Lagrange spaces).
    pub fn scalar_values(&self, bary: &Bary, out: &mut Vec<f64>) {
        let bp = BaryPowers::new(bary, self.mesh.dim + 1, self.order);
        out.clear();
        out.extend(self.templates.iter().map(|t| bp.value(&t.alpha)));
    }

    /// Matrix values of all local functions (Regge and HHJ spaces).
    pub fn tensor_values(&self, e: usize, bary: &Bary, out: &mut Vec<Mat3>) {
        let bp = BaryPowers::new(bary, self.mesh.dim + 1, self.order);
        out.clear();
        for t in &self.templates {
            out.push(tensor::scale(&self.shape_matrix(e, t.shape), bp.value(&t.alpha)));
        }
    }

    /// Full jets of all local functions (Regge and HHJ spaces).
    pub fn tensor_jets(&self, e: usize, bary: &Bary, out: &mut Vec<SymJet>) {
        let dim = self.mesh.dim;
        let bp = BaryPowers::new(bary, dim + 1, self.order);
        let gl = &self.mesh.reference_map(e).grad_lambda;
        out.clear();
        for t in &self.templates {
            let mut j = SymJet::default();
            j.add_scaled_matrix(&bp.jet(&t.alpha, gl, dim), &self.shape_matrix(e, t.shape));
            out.push(j);
        }
    }
}

fn facet_carrier(dim: usize, gl: &[Vec3; 4], x: &dyn Fn(usize) -> Vec3, l: usize, pair: Option<(usize, usize)>) -> Mat3 {
    let others: Vec<usize> = (0..=dim).filter(|&i| i != l).collect();
    let (a, b) = pair.unwrap_or((others[0], others[1]));
    let ta = tensor::sub(&x(l), &x(a));
    let tb = tensor::sub(&x(l), &x(b));
    let n2 = tensor::dot(&gl[l], &gl[l], dim);
    tensor::scale(&tensor::sym_outer(&ta, &tb), n2)
}

fn exps_key(el: &[usize], alpha: &[u8; 4]) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = el
        .iter()
        .zip(alpha)
        .filter(|(_, &a)| a > 0)
        .map(|(&g, &a)| (g, a as usize))
        .collect();
    v.sort_unstable();
    v
}

fn global_key(mesh: &Mesh, e: usize, el: &[usize], t: usize, lf: &LocalFn) -> (Vec<usize>, (usize, usize)) {
    let exps = exps_key(el, &lf.alpha);
    let mut verts: Vec<usize> = exps.iter().map(|p| p.0).collect();
    let mut key = Vec::new();
    match lf.shape {
        Shape::Scalar => key.push(0),
        Shape::Pair(i, j) => {
            let (a, b) = (el[i as usize], el[j as usize]);
            key.extend([1, a.min(b), a.max(b)]);
            verts.extend([a, b]);
        }
        Shape::Facet(l) => {
            if lf.alpha[l as usize] > 0 {
                // vanishes on its facet: interior to the element
                return (vec![3, e, t], (mesh.dim, e));
            }
            let fv: Vec<usize> = (0..el.len()).filter(|&i| i != l as usize).map(|i| el[i]).collect();
            let f = mesh.facets().find(&key_of(&fv)).expect("facet registered");
            key.extend([2, f]);
            for (g, a) in exps {
                key.extend([g, a]);
            }
            return (key, (mesh.dim - 1, f));
        }
        Shape::Bubble(_) => return (vec![3, e, t], (mesh.dim, e)),
    }
    for (g, a) in exps {
        key.extend([g, a]);
    }
    verts.sort_unstable();
    verts.dedup();
    let s = verts.len() - 1;
    let id = mesh.entities(s).find(&key_of(&verts)).expect("entity registered");
    key.push(usize::MAX);
    (key, (s, id))
}

/// Coefficient vector over a Regge space, viewed as a tensor field.
#[derive(Debug, Clone)]
pub struct ReggeField<'s, 'm> {
    pub space: &'s Space<'m>,
    pub coeffs: Vec<f64>,
}

impl<'s, 'm> ReggeField<'s, 'm> {
    pub fn new(space: &'s Space<'m>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), space.ndofs());
        Self { space, coeffs }
    }

    /// Smallest eigenvalue sign check at the element quadrature points.
    pub fn is_positive(&self, exactness: usize) -> bool {
        let mesh = self.space.mesh;
        let rule = quad_rule(mesh.dim, exactness).expect("rule");
        (0..mesh.num_elements())
            .all(|e| rule.points.iter().all(|p| tensor::is_positive_definite(&self.value(e, p), mesh.dim)))
    }
}

impl TensorField for ReggeField<'_, '_> {
    fn mesh(&self) -> &Mesh {
        self.space.mesh
    }

    fn jet(&self, elem: usize, bary: &Bary) -> SymJet {
        let sp = self.space;
        let dim = sp.mesh.dim;
        let bp = BaryPowers::new(bary, dim + 1, sp.order);
        let gl = &sp.mesh.reference_map(elem).grad_lambda;
        let mut out = SymJet::default();
        for (t, &d) in sp.templates.iter().zip(sp.elem_dofs(elem)) {
            let c = self.coeffs[d];
            if c == 0.0 {
                continue;
            }
            let mut j = bp.jet(&t.alpha, gl, dim);
            j.val *= c;
            j.grad = j.grad.map(|x| x * c);
            j.hess = tensor::scale(&j.hess, c);
            out.add_scaled_matrix(&j, &sp.shape_matrix(elem, t.shape));
        }
        out
    }

    fn value(&self, elem: usize, bary: &Bary) -> Mat3 {
        let sp = self.space;
        let bp = BaryPowers::new(bary, sp.mesh.dim + 1, sp.order);
        let mut out = ZERO33;
        for (t, &d) in sp.templates.iter().zip(sp.elem_dofs(elem)) {
            let c = self.coeffs[d];
            if c != 0.0 {
                tensor::axpy(&mut out, c * bp.value(&t.alpha), &sp.shape_matrix(elem, t.shape));
            }
        }
        out
    }
}

/// Coefficient vector over a Lagrange space.
#[derive(Debug, Clone)]
pub struct LagrangeField<'s, 'm> {
    pub space: &'s Space<'m>,
    pub coeffs: Vec<f64>,
}

impl ScalarField for LagrangeField<'_, '_> {
    fn value(&self, elem: usize, bary: &Bary) -> f64 {
        let sp = self.space;
        let bp = BaryPowers::new(bary, sp.mesh.dim + 1, sp.order);
        sp.templates
            .iter()
            .zip(sp.elem_dofs(elem))
            .map(|(t, &d)| self.coeffs[d] * bp.value(&t.alpha))
            .sum()
    }
}

impl LagrangeField<'_, '_> {
    pub fn jet(&self, elem: usize, bary: &Bary) -> ScalarJet {
        let sp = self.space;
        let dim = sp.mesh.dim;
        let bp = BaryPowers::new(bary, dim + 1, sp.order);
        let gl = &sp.mesh.reference_map(elem).grad_lambda;
        let mut out = ScalarJet::default();
        for (t, &d) in sp.templates.iter().zip(sp.elem_dofs(elem)) {
            let c = self.coeffs[d];
            let j = bp.jet(&t.alpha, gl, dim);
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

/// Exactness used for the interpolation moments.
fn moment_exactness(order: usize) -> usize {
    (2 * order + 8).min(crate::quadrature::MAX_EXACTNESS)
}

/// Canonical Regge interpolant of a smooth callback.
pub fn canonical_interpolate<'s, 'm>(space: &'s Space<'m>, f: impl Fn(&Vec3) -> Mat3) -> Result<ReggeField<'s, 'm>> {
    let mesh = space.mesh;
    interpolate_elementwise(space, &|e, b| f(&mesh.point(e, b)))
}

/// Canonical Regge interpolant of a tt-continuous field given per element.
pub fn canonical_interpolate_field<'s, 'm>(space: &'s Space<'m>, field: &dyn TensorField) -> Result<ReggeField<'s, 'm>> {
    interpolate_elementwise(space, &|e, b| field.value(e, b))
}

/// Hierarchical moment projection: edges, then faces, then cells. Each
/// subsimplex is solved once on the first element containing it, with the
/// contributions of lower-dimensional DOFs already removed.
pub fn interpolate_elementwise<'s, 'm>(space: &'s Space<'m>, f: &dyn Fn(usize, &Bary) -> Mat3) -> Result<ReggeField<'s, 'm>> {
    if space.kind != SpaceKind::Regge {
        return Err(Error::Invalid("canonical interpolation needs a Regge space"));
    }
    let mesh = space.mesh;
    let dim = mesh.dim;
    let k = space.order;
    let mut coeffs = vec![0.0; space.ndofs()];
    let mut done = vec![false; space.ndofs()];
    let mut by_entity: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (d, ent) in space.dof_entity.iter().enumerate() {
        by_entity.entry(*ent).or_default().push(d);
    }
    let mut vals = Vec::new();
    for s in 1..=dim {
        if s > k + 1 {
            break;
        }
        let rule = quad_rule(s, moment_exactness(k))?;
        for id in 0..mesh.entities(s).len() {
            let Some(dofs) = by_entity.get(&(s, id)) else { continue };
            let e = mesh.entities(s).cells[id][0];
            let ev = mesh.entity_vertices(s, id).to_vec();
            let local: Vec<usize> = dofs
                .iter()
                .map(|d| space.elem_dofs(e).iter().position(|x| x == d).expect("dof in element"))
                .collect();
            // tangents: all edges of the entity
            let mut tangents = Vec::new();
            for a in 0..ev.len() {
                for b in a + 1..ev.len() {
                    tangents.push(tensor::sub(&mesh.vertices[ev[b]], &mesh.vertices[ev[a]]));
                }
            }
            let qdeg = k + 1 - s;
            let qidx = multi_indices(s + 1, qdeg);
            let nm = qidx.len() * tangents.len();
            if nm != local.len() {
                return Err(Error::SingularMoments(e));
            }
            let mut mat = DMatrix::<f64>::zeros(nm, nm);
            let mut rhs = DVector::<f64>::zeros(nm);
            for (q, w) in rule.points.iter().zip(&rule.weights) {
                let b = mesh.bary_from_vertex_weights(e, &ev, &q[..=s]);
                let bp = BaryPowers::new(q, s + 1, qdeg);
                let target = f(e, &b);
                space.tensor_values(e, &b, &mut vals);
                let mut known = ZERO33;
                for (t, &d) in space.elem_dofs(e).iter().enumerate() {
                    if done[d] && coeffs[d] != 0.0 {
                        tensor::axpy(&mut known, coeffs[d], &vals[t]);
                    }
                }
                let mut resid = target;
                tensor::axpy(&mut resid, -1.0, &known);
                let mut row = 0;
                for a in &qidx {
                    let qa = bp.value(a) * w;
                    for t in &tangents {
                        rhs[row] += qa * tensor::bilinear(&resid, t, t, dim);
                        for (c, &lt) in local.iter().enumerate() {
                            mat[(row, c)] += qa * tensor::bilinear(&vals[lt], t, t, dim);
                        }
                        row += 1;
                    }
                }
            }
            let sol = mat.lu().solve(&rhs).ok_or(Error::SingularMoments(e))?;
            for (c, &d) in dofs.iter().enumerate() {
                coeffs[d] = sol[c];
                done[d] = true;
            }
        }
    }
    Ok(ReggeField::new(space, coeffs))
}

/// Largest tangential-tangential jump on one interior facet.
#[derive(Debug, Clone, Copy)]
pub struct FacetJump {
    pub facet: usize,
    pub jump: f64,
}

/// Sample the tangential-tangential trace from both sides of every interior
/// facet. The report is sorted by decreasing jump.
pub fn check_tt_continuity(field: &dyn TensorField, exactness: usize) -> Result<Vec<FacetJump>> {
    trace_jumps(field, exactness, false)
}

/// Same as [`check_tt_continuity`] for the normal-normal trace.
pub fn check_nn_continuity(field: &dyn TensorField, exactness: usize) -> Result<Vec<FacetJump>> {
    trace_jumps(field, exactness, true)
}

fn trace_jumps(field: &dyn TensorField, exactness: usize, normal: bool) -> Result<Vec<FacetJump>> {
    let mesh = field.mesh();
    let dim = mesh.dim;
    let rule = quad_rule(dim - 1, exactness)?;
    let facets = mesh.facets();
    let mut out = Vec::new();
    for f in 0..facets.len() {
        if facets.boundary[f] {
            continue;
        }
        let fv = mesh.entity_vertices(dim - 1, f).to_vec();
        let (e0, e1) = (facets.cells[f][0], facets.cells[f][1]);
        let mut dirs = Vec::new();
        if normal {
            let n = mesh.inward_normal(e0, f);
            dirs.push((n, n));
        } else {
            for a in 1..fv.len() {
                for b in a..fv.len() {
                    let ta = tensor::sub(&mesh.vertices[fv[a]], &mesh.vertices[fv[0]]);
                    let tb = tensor::sub(&mesh.vertices[fv[b]], &mesh.vertices[fv[0]]);
                    dirs.push((ta, tb));
                }
            }
        }
        let mut jump: f64 = 0.0;
        for q in &rule.points {
            let b0 = mesh.bary_from_vertex_weights(e0, &fv, &q[..dim]);
            let b1 = mesh.bary_from_vertex_weights(e1, &fv, &q[..dim]);
            let (s0, s1) = (field.value(e0, &b0), field.value(e1, &b1));
            for (x, y) in &dirs {
                jump = jump.max((tensor::bilinear(&s0, x, y, dim) - tensor::bilinear(&s1, x, y, dim)).abs());
            }
        }
        out.push(FacetJump { facet: f, jump });
    }
    out.sort_by(|a, b| b.jump.total_cmp(&a.jump));
    Ok(out)
}

/// Independent elementwise L² projection onto polynomials of degree `k`.
/// The result is generally not tt-continuous.
pub fn l2_project_elementwise<'m>(mesh: &'m Mesh, k: usize, f: impl Fn(&Vec3) -> Mat3) -> Result<PiecewiseField<'m>> {
    let dim = mesh.dim;
    let idx = multi_indices(dim + 1, k);
    let rule = quad_rule(dim, 2 * k + 8)?;
    let mut pieces = Vec::with_capacity(mesh.num_elements());
    for e in 0..mesh.num_elements() {
        let n = idx.len();
        let mut mass = DMatrix::<f64>::zeros(n, n);
        let mut rhs = vec![DVector::<f64>::zeros(n); 9];
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            let bp = BaryPowers::new(q, dim + 1, k);
            let phi: Vec<f64> = idx.iter().map(|a| bp.value(a)).collect();
            let v = f(&mesh.point(e, q));
            for a in 0..n {
                for b in 0..n {
                    mass[(a, b)] += w * phi[a] * phi[b];
                }
                for c in 0..9 {
                    rhs[c][a] += w * phi[a] * v[c / 3][c % 3];
                }
            }
        }
        let chol = mass.cholesky().ok_or(Error::SingularMoments(e))?;
        let mut coeffs = vec![ZERO33; n];
        for c in 0..9 {
            let sol = chol.solve(&rhs[c]);
            for a in 0..n {
                coeffs[a][c / 3][c % 3] = sol[a];
            }
        }
        for m in coeffs.iter_mut() {
            *m = tensor::sym_part(m);
        }
        pieces.push(PolySymTensor { elem: e, degree: k, coeffs });
    }
    Ok(PiecewiseField { mesh, pieces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_cube_mesh, PAD};

    #[test]
    fn lagrange_counts() {
        let m0 = build_structured_cube_mesh(0, 2, 0.0, 0).unwrap();
        let s = Space::lagrange(&m0, 1);
        assert_eq!(s.ndofs(), 4);
        assert!(s.boundary.iter().all(|b| *b));
        let m1 = build_structured_cube_mesh(1, 2, 0.0, 0).unwrap();
        let s = Space::lagrange(&m1, 1);
        assert_eq!(s.ndofs(), 9);
        assert_eq!(s.interior_dofs().len(), 1);
    }

    #[test]
    fn regge_counts_match_subsimplex_moments() {
        let m = build_structured_cube_mesh(0, 3, 0.0, 0).unwrap();
        assert_eq!(Space::regge(&m, 0).ndofs(), 19);
        assert_eq!(Space::regge(&m, 1).ndofs(), 92);
    }

    #[test]
    fn hhj_single_tet() {
        let m = Mesh::new(
            3,
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0, 1, 2, 3]],
        )
        .unwrap();
        let s = Space::hhj(&m, 0);
        assert_eq!(s.ndofs(), 6);
        let facet: Vec<usize> = (0..6).filter(|&d| s.dof_entity[d].0 == 2).collect();
        assert_eq!(facet.len(), 4);
        assert!(facet.iter().all(|&d| s.boundary[d]));
        assert!((0..6).filter(|d| !facet.contains(d)).all(|d| !s.boundary[d]));
    }

    #[test]
    fn hhj_local_basis_spans_symmetric_matrices() {
        let m = Mesh::new(
            3,
            vec![[0.1, 0.0, 0.0], [1.0, 0.2, 0.0], [0.3, 1.0, 0.1], [0.0, 0.2, 1.3]],
            vec![[0, 1, 2, 3]],
        )
        .unwrap();
        let s = Space::hhj(&m, 0);
        let mut vals = Vec::new();
        s.tensor_values(0, &[0.25; 4], &mut vals);
        let a = DMatrix::from_fn(6, 6, |r, c| {
            let (i, j) = tensor::sym_index(3, r);
            vals[c][i][j]
        });
        assert_eq!(a.rank(1e-10), 6);
    }

    #[test]
    fn unit_triangle_lagrange_has_no_interior() {
        let m = Mesh::new(2, vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2, PAD]]).unwrap();
        assert!(Space::lagrange(&m, 2).interior_dofs().is_empty());
    }
}
