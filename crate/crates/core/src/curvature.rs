//! Distributional densitized curvature functionals.
//!
//! Every functional is linear in its test field and, at each quadrature
//! point, depends only on the test value there. Assembly therefore emits
//! `(element, point, kernel)` triples into a [`Sink`]; the sink decides
//! whether to contract with a concrete test field, store the triples or
//! accumulate against a discrete basis. Scalar test functions travel in the
//! `[0][0]` slot of the kernel and of the test value.

use alloc::vec::Vec;

#[allow(unused_imports)] // float methods only live in `core` on recent toolchains
use num_traits::Float;

use crate::fields::{ScalarField, SymJet, TensorField};
use crate::geometry::{angle_between, deficit, PointGeometry};
use crate::mesh::{BoneRing, Mesh};
use crate::quadrature::{quad_rule, Bary, QuadRule};
use crate::regge::{Space, SpaceKind};
use crate::tensor::{self, Mat3, Tensor4, Vec3, ZERO33, ZERO3};
use crate::{Error, Result};

/// Receives the pointwise kernels of a functional.
pub trait Sink {
    /// Add `Σ kernel_ij U_ij` evaluated at `(elem, bary)`.
    fn add(&mut self, elem: usize, bary: &Bary, kernel: &Mat3);
}

/// Test field evaluated element by element. Scalars sit in `[0][0]`.
pub trait TestField {
    fn value(&self, elem: usize, bary: &Bary) -> Mat3;
}

/// View a scalar field as a test field.
#[derive(Debug)]
pub struct ScalarTest<'a, S: ScalarField + ?Sized>(pub &'a S);

impl<S: ScalarField + ?Sized> TestField for ScalarTest<'_, S> {
    fn value(&self, elem: usize, bary: &Bary) -> Mat3 {
        let mut m = ZERO33;
        m[0][0] = self.0.value(elem, bary);
        m
    }
}

/// View a tensor field as a test field.
#[derive(Debug)]
pub struct MatrixTest<'a, T: TensorField + ?Sized>(pub &'a T);

impl<T: TensorField + ?Sized> TestField for MatrixTest<'_, T> {
    fn value(&self, elem: usize, bary: &Bary) -> Mat3 {
        self.0.value(elem, bary)
    }
}

/// Contracts kernels with a test field.
pub struct Evaluate<'a> {
    pub test: &'a dyn TestField,
    pub sum: f64,
}

impl core::fmt::Debug for Evaluate<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Evaluate").field("sum", &self.sum).finish()
    }
}

impl<'a> Evaluate<'a> {
    pub fn new(test: &'a dyn TestField) -> Self {
        Self { test, sum: 0.0 }
    }
}

impl Sink for Evaluate<'_> {
    fn add(&mut self, elem: usize, bary: &Bary, kernel: &Mat3) {
        self.sum += tensor::frob(kernel, &self.test.value(elem, bary), 3);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub elem: usize,
    pub bary: Bary,
    pub kernel: Mat3,
}

/// Stores the kernels for repeated evaluation.
#[derive(Debug, Clone, Default)]
pub struct Samples(pub Vec<Sample>);

impl Sink for Samples {
    fn add(&mut self, elem: usize, bary: &Bary, kernel: &Mat3) {
        self.0.push(Sample {
            elem,
            bary: *bary,
            kernel: *kernel,
        });
    }
}

impl Samples {
    pub fn evaluate(&self, test: &dyn TestField) -> f64 {
        self.0
            .iter()
            .map(|s| tensor::frob(&s.kernel, &test.value(s.elem, &s.bary), 3))
            .sum()
    }
}

/// Multiplies every kernel by a factor before forwarding it.
#[derive(Debug)]
pub struct Scaled<'a, S: Sink + ?Sized> {
    pub inner: &'a mut S,
    pub factor: f64,
}

impl<S: Sink + ?Sized> Sink for Scaled<'_, S> {
    fn add(&mut self, elem: usize, bary: &Bary, kernel: &Mat3) {
        self.inner.add(elem, bary, &tensor::scale(kernel, self.factor));
    }
}

/// Constant test directions: the scalar `1` in slot `[0][0]`, or the
/// Frobenius-orthonormal basis of symmetric matrices
/// (`e_a⊗e_a` and `(e_a⊗e_b + e_b⊗e_a)/√2`).
pub fn test_directions(scalar: bool, dim: usize) -> Vec<Mat3> {
    if scalar {
        let mut m = ZERO33;
        m[0][0] = 1.0;
        return alloc::vec![m];
    }
    (0..tensor::sym_count(dim))
        .map(|c| {
            let (a, b) = tensor::sym_index(dim, c);
            let mut m = ZERO33;
            if a == b {
                m[a][a] = 1.0;
            } else {
                let s = core::f64::consts::FRAC_1_SQRT_2;
                m[a][b] = s;
                m[b][a] = s;
            }
            m
        })
        .collect()
}

/// Coefficients `c_(j,c) = F(φ_j E_c)` over the interior DOFs of a Lagrange space.
#[derive(Debug, Clone)]
pub struct AssembledFunctional {
    pub directions: Vec<Mat3>,
    /// Global Lagrange DOF of each row.
    pub dofs: Vec<usize>,
    /// Row-major `dofs.len() × directions.len()`.
    pub values: Vec<f64>,
}

impl AssembledFunctional {
    pub fn ndirections(&self) -> usize {
        self.directions.len()
    }

    /// Column of one direction.
    pub fn component(&self, c: usize) -> Vec<f64> {
        let nd = self.directions.len();
        (0..self.dofs.len()).map(|r| self.values[r * nd + c]).collect()
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn add_scaled(&mut self, s: f64, other: &Self) {
        assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }
}

/// Sink accumulating against a Lagrange basis times constant directions.
#[derive(Debug)]
pub struct BasisAssembler<'s, 'm> {
    pub space: &'s Space<'m>,
    pub directions: Vec<Mat3>,
    row_of: Vec<Option<usize>>,
    rows: usize,
    values: Vec<f64>,
    buf: Vec<f64>,
}

impl<'s, 'm> BasisAssembler<'s, 'm> {
    pub fn new(space: &'s Space<'m>, directions: Vec<Mat3>) -> Self {
        assert_eq!(space.kind, SpaceKind::Lagrange);
        let mut row_of = alloc::vec![None; space.ndofs()];
        let mut rows = 0;
        for (d, r) in row_of.iter_mut().enumerate() {
            if !space.boundary[d] {
                *r = Some(rows);
                rows += 1;
            }
        }
        let n = rows * directions.len();
        Self {
            space,
            directions,
            row_of,
            rows,
            values: alloc::vec![0.0; n],
            buf: Vec::new(),
        }
    }

    pub fn finish(self) -> AssembledFunctional {
        let dofs = self.space.interior_dofs();
        debug_assert_eq!(dofs.len(), self.rows);
        AssembledFunctional {
            directions: self.directions,
            dofs,
            values: self.values,
        }
    }
}

impl Sink for BasisAssembler<'_, '_> {
    fn add(&mut self, elem: usize, bary: &Bary, kernel: &Mat3) {
        let nd = self.directions.len();
        let proj: Vec<f64> = self.directions.iter().map(|e| tensor::frob(kernel, e, 3)).collect();
        self.space.scalar_values(bary, &mut self.buf);
        for (phi, &d) in self.buf.iter().zip(self.space.elem_dofs(elem)) {
            if let Some(r) = self.row_of[d] {
                for c in 0..nd {
                    self.values[r * nd + c] += phi * proj[c];
                }
            }
        }
    }
}

/// Quadrature exactness per entity type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadOrders {
    pub element: usize,
    pub facet: usize,
    pub bone: usize,
}

impl QuadOrders {
    /// Defaults for a metric of polynomial order `k`.
    pub fn for_order(k: usize) -> Self {
        Self {
            element: 2 * k + 6,
            facet: 2 * k + 4,
            bone: 2 * k + 4,
        }
    }
}

/// One side of an interior facet at a quadrature point.
#[derive(Debug, Clone)]
pub struct FacetSide {
    pub elem: usize,
    pub bary: Bary,
    pub jet: SymJet,
    pub pg: PointGeometry,
    /// Unit normal pointing into `elem`.
    pub nu: Vec3,
    /// `II(τ_a, τ_b)` in the shared tangent frame.
    pub sff: Mat3,
}

/// Interior facet quadrature point with both sides.
#[derive(Debug, Clone)]
pub struct FacetPoint {
    pub facet: usize,
    pub sides: [FacetSide; 2],
    /// Metric-orthonormal tangent frame (from the first side).
    pub tangents: [Vec3; 3],
    pub ntan: usize,
    /// Quadrature weight times the facet volume form.
    pub weight: f64,
}

impl FacetPoint {
    /// `⟦II⟧` in the tangent frame.
    pub fn sff_jump(&self) -> Mat3 {
        tensor::add(&self.sides[0].sff, &self.sides[1].sff)
    }

    /// Kernel `K` with `frob(K, U) = Σ_ab M_ab U(τ_a, τ_b)`.
    pub fn tangential_kernel(&self, m: &Mat3) -> Mat3 {
        let mut k = ZERO33;
        for a in 0..self.ntan {
            for b in 0..self.ntan {
                tensor::axpy(&mut k, m[a][b], &tensor::outer(&self.tangents[a], &self.tangents[b]));
            }
        }
        tensor::sym_part(&k)
    }

    /// `U(τ_a, τ_b)` as a matrix in the tangent frame.
    pub fn restrict(&self, u: &Mat3) -> Mat3 {
        let mut r = ZERO33;
        let d = self.sides[0].pg.dim;
        for a in 0..self.ntan {
            for b in 0..self.ntan {
                r[a][b] = tensor::bilinear(u, &self.tangents[a], &self.tangents[b], d);
            }
        }
        r
    }
}

/// Trace-reversal `M - tr(M) I` of a tangent-frame matrix.
pub fn trace_reverse(m: &Mat3, n: usize) -> Mat3 {
    let mut r = *m;
    let t = tensor::trace(m, n);
    for i in 0..n {
        r[i][i] -= t;
    }
    r
}

/// Frame of one element of a bone ring.
#[derive(Debug, Clone)]
pub struct BoneEntry {
    pub elem: usize,
    pub bary: Bary,
    pub jet: SymJet,
    pub pg: PointGeometry,
    pub facets: [usize; 2],
    /// Normals of the two facets, pointing into `elem`.
    pub nu: [Vec3; 2],
    /// Conormals of the bone in the two facets.
    pub mu: [Vec3; 2],
    pub angle: f64,
}

/// Interior bone quadrature point with the full ring.
#[derive(Debug, Clone)]
pub struct BonePoint {
    pub bone: usize,
    pub entries: Vec<BoneEntry>,
    pub theta: f64,
    /// Unit bone tangent (3D only).
    pub tau: Vec3,
    /// Quadrature weight times the bone volume form (1 at 2D vertices).
    pub weight: f64,
    /// Set when an angle cosine needed clamping beyond tolerance.
    pub clamped: bool,
}

/// Shared machinery for all functionals on one metric.
pub struct Assembly<'a> {
    pub metric: &'a dyn TensorField,
    pub orders: QuadOrders,
    pub rings: Vec<BoneRing>,
    elem_rule: QuadRule,
    facet_rule: QuadRule,
    bone_rule: QuadRule,
}

impl core::fmt::Debug for Assembly<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Assembly").field("orders", &self.orders).finish_non_exhaustive()
    }
}

impl<'a> Assembly<'a> {
    pub fn new(metric: &'a dyn TensorField, orders: QuadOrders) -> Result<Self> {
        let mesh = metric.mesh();
        let dim = mesh.dim;
        Ok(Self {
            metric,
            orders,
            rings: mesh.enumerate_bones()?,
            elem_rule: quad_rule(dim, orders.element)?,
            facet_rule: quad_rule(dim - 1, orders.facet)?,
            bone_rule: quad_rule(dim - 2, orders.bone)?,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.metric.mesh()
    }

    pub fn dim(&self) -> usize {
        self.mesh().dim
    }

    /// Visit element quadrature points with full geometry; the weight
    /// includes the Riemannian volume form.
    pub fn for_each_element_point(&self, f: &mut dyn FnMut(usize, &Bary, &PointGeometry, &SymJet, f64)) -> Result<()> {
        let mesh = self.mesh();
        for e in 0..mesh.num_elements() {
            let jac = mesh.reference_map(e).det;
            for (q, w) in self.elem_rule.points.iter().zip(&self.elem_rule.weights) {
                let jet = self.metric.jet(e, q);
                let pg = PointGeometry::new(mesh.dim, &jet).ok_or(Error::NotPositive { elem: e })?;
                f(e, q, &pg, &jet, w * jac * pg.sqrt_det);
            }
        }
        Ok(())
    }

    /// Visit interior facet quadrature points.
    pub fn for_each_facet_point(&self, f: &mut dyn FnMut(&FacetPoint) -> Result<()>) -> Result<()> {
        let mesh = self.mesh();
        let dim = mesh.dim;
        let facets = mesh.facets();
        for fid in 0..facets.len() {
            if facets.boundary[fid] {
                continue;
            }
            let fv = mesh.entity_vertices(dim - 1, fid).to_vec();
            let edges: Vec<Vec3> = (1..fv.len())
                .map(|a| tensor::sub(&mesh.vertices[fv[a]], &mesh.vertices[fv[0]]))
                .collect();
            for (q, w) in self.facet_rule.points.iter().zip(&self.facet_rule.weights) {
                let mut sides: Vec<(usize, Bary, SymJet, PointGeometry, Vec3)> = Vec::with_capacity(2);
                for &e in &facets.cells[fid] {
                    let b = mesh.bary_from_vertex_weights(e, &fv, &q[..dim]);
                    let jet = self.metric.jet(e, &b);
                    let pg = PointGeometry::first_order(dim, &jet).ok_or(Error::NotPositive { elem: e })?;
                    let nhat = mesh.reference_map(e).grad_lambda[mesh.opposite_local(e, fid)];
                    let nu = pg.g_normal(&nhat);
                    sides.push((e, b, jet, pg, nu));
                }
                let mut tangents = [ZERO3; 3];
                let ntan = sides[0].3.orthonormalize(&edges, &mut tangents);
                let gram = {
                    let mut m = ZERO33;
                    for a in 0..edges.len() {
                        for b in 0..edges.len() {
                            m[a][b] = sides[0].3.metric(&edges[a], &edges[b]);
                        }
                    }
                    tensor::det(&m, edges.len())
                };
                let make = |s: (usize, Bary, SymJet, PointGeometry, Vec3)| {
                    let mut sff = ZERO33;
                    for a in 0..ntan {
                        for b in 0..ntan {
                            sff[a][b] = s.3.sff(&s.4, &tangents[a], &tangents[b]);
                        }
                    }
                    FacetSide {
                        elem: s.0,
                        bary: s.1,
                        jet: s.2,
                        pg: s.3,
                        nu: s.4,
                        sff: tensor::sym_part(&sff),
                    }
                };
                let s1 = sides.pop().expect("two sides");
                let s0 = sides.pop().expect("two sides");
                let fp = FacetPoint {
                    facet: fid,
                    sides: [make(s0), make(s1)],
                    tangents,
                    ntan,
                    weight: w * gram.sqrt(),
                };
                f(&fp)?;
            }
        }
        Ok(())
    }

    /// Visit interior bone quadrature points with the full ring of frames.
    /// With `curvature` set the entry geometries carry the Riemann tensor.
    pub fn for_each_bone_point(&self, curvature: bool, f: &mut dyn FnMut(&BonePoint) -> Result<()>) -> Result<()> {
        let mesh = self.mesh();
        let dim = mesh.dim;
        for ring in &self.rings {
            let bv = mesh.entity_vertices(dim - 2, ring.bone).to_vec();
            let tangent = if dim == 3 {
                Some(tensor::sub(&mesh.vertices[bv[1]], &mesh.vertices[bv[0]]))
            } else {
                None
            };
            for (q, w) in self.bone_rule.points.iter().zip(&self.bone_rule.weights) {
                let mut entries = Vec::with_capacity(ring.entries.len());
                let mut clamped = false;
                for re in &ring.entries {
                    let e = re.elem;
                    let b = mesh.bary_from_vertex_weights(e, &bv, &q[..dim - 1]);
                    let jet = self.metric.jet(e, &b);
                    let pg = if curvature {
                        PointGeometry::new(dim, &jet)
                    } else {
                        PointGeometry::first_order(dim, &jet)
                    }
                    .ok_or(Error::NotPositive { elem: e })?;
                    let gl = &mesh.reference_map(e).grad_lambda;
                    let facets = [re.facet_plus, re.facet_minus];
                    let mut nu = [ZERO3; 2];
                    let mut mu = [ZERO3; 2];
                    for s in 0..2 {
                        let fv = mesh.entity_vertices(dim - 1, facets[s]);
                        nu[s] = pg.g_normal(&gl[mesh.opposite_local(e, facets[s])]);
                        let opp = *fv.iter().find(|v| !bv.contains(v)).expect("facet has a vertex off the bone");
                        let into = tensor::sub(&mesh.vertices[opp], &mesh.vertices[bv[0]]);
                        mu[s] = match &tangent {
                            Some(t) => pg.conormal(core::slice::from_ref(t), &into),
                            None => pg.conormal(&[], &into),
                        };
                    }
                    let (angle, warn) = angle_between(&pg, &mu[0], &mu[1]);
                    clamped |= warn;
                    entries.push(BoneEntry {
                        elem: e,
                        bary: b,
                        jet,
                        pg,
                        facets,
                        nu,
                        mu,
                        angle,
                    });
                }
                let theta = deficit(entries.iter().map(|x| x.angle));
                let (tau, weight) = match &tangent {
                    Some(t) => {
                        let len = entries[0].pg.norm(t);
                        ([t[0] / len, t[1] / len, t[2] / len], w * len)
                    }
                    None => (ZERO3, *w),
                };
                let bp = BonePoint {
                    bone: ring.bone,
                    entries,
                    theta,
                    tau,
                    weight,
                    clamped,
                };
                f(&bp)?;
            }
        }
        Ok(())
    }

    fn scalar_kernel(v: f64) -> Mat3 {
        let mut m = ZERO33;
        m[0][0] = v;
        m
    }

    /// Gauss curvature (2D, scalar tests):
    /// `Σ∫K v ω + Σ∫⟦κ⟧ v ω_F + Σ Θ v(E)`.
    pub fn gauss(&self, sink: &mut dyn Sink) -> Result<()> {
        if self.dim() != 2 {
            return Err(Error::Dimension(self.dim()));
        }
        self.for_each_element_point(&mut |e, b, pg, _, w| sink.add(e, b, &Self::scalar_kernel(pg.gauss() * w)))?;
        self.for_each_facet_point(&mut |fp| {
            let s = &fp.sides[0];
            sink.add(s.elem, &s.bary, &Self::scalar_kernel(fp.sff_jump()[0][0] * fp.weight));
            Ok(())
        })?;
        self.for_each_bone_point(false, &mut |bp| {
            let en = &bp.entries[0];
            sink.add(en.elem, &en.bary, &Self::scalar_kernel(bp.theta * bp.weight));
            Ok(())
        })
    }

    /// Scalar curvature (scalar tests):
    /// `Σ∫S v ω + 2Σ∫⟦H⟧ v ω_F + 2Σ∫Θ v ω_E`.
    pub fn scalar(&self, sink: &mut dyn Sink) -> Result<()> {
        self.for_each_element_point(&mut |e, b, pg, _, w| sink.add(e, b, &Self::scalar_kernel(pg.scalar() * w)))?;
        self.for_each_facet_point(&mut |fp| {
            let s = &fp.sides[0];
            let h = tensor::trace(&fp.sff_jump(), fp.ntan);
            sink.add(s.elem, &s.bary, &Self::scalar_kernel(2.0 * h * fp.weight));
            Ok(())
        })?;
        self.for_each_bone_point(false, &mut |bp| {
            let en = &bp.entries[0];
            sink.add(en.elem, &en.bary, &Self::scalar_kernel(2.0 * bp.theta * bp.weight));
            Ok(())
        })
    }

    /// Ricci curvature (matrix tests):
    /// `Σ∫⟨Ric,ρ⟩ω + Σ∫⟨⟦II⟧, ρ_F + ρ_νν g_F⟩ω_F + Σ∫Θ(ρ_νν + ρ_μμ)ω_E`.
    /// The normal components are taken in the first element of each
    /// facet, and in the first element and facet of each bone ring.
    pub fn ricci(&self, sink: &mut dyn Sink) -> Result<()> {
        self.for_each_element_point(&mut |e, b, pg, _, w| sink.add(e, b, &tensor::scale(&pg.raise(&pg.ricci()), w)))?;
        self.for_each_facet_point(&mut |fp| {
            let s = &fp.sides[0];
            let jump = fp.sff_jump();
            let mut k = fp.tangential_kernel(&jump);
            tensor::axpy(&mut k, tensor::trace(&jump, fp.ntan), &tensor::outer(&s.nu, &s.nu));
            sink.add(s.elem, &s.bary, &tensor::scale(&k, fp.weight));
            Ok(())
        })?;
        self.for_each_bone_point(false, &mut |bp| {
            let en = &bp.entries[0];
            let mut k = tensor::outer(&en.nu[0], &en.nu[0]);
            tensor::axpy(&mut k, 1.0, &tensor::outer(&en.mu[0], &en.mu[0]));
            sink.add(en.elem, &en.bary, &tensor::scale(&k, bp.theta * bp.weight));
            Ok(())
        })
    }

    /// Einstein tensor (3D, matrix tests):
    /// `Σ∫⟨G,ρ⟩ω + Σ∫⟨⟦II̅⟧, ρ_F⟩ω_F - Σ∫Θ ρ_ττ ω_E`.
    pub fn einstein(&self, sink: &mut dyn Sink) -> Result<()> {
        self.operator_like(1.0, sink, |pg| pg.raise(&pg.einstein()))
    }

    /// Curvature operator (3D, matrix tests):
    /// `Σ∫⟨Q,U⟩ω - Σ∫⟨⟦II̅⟧, U_F⟩ω_F + Σ∫Θ U_ττ ω_E`.
    pub fn curvature_operator(&self, sink: &mut dyn Sink) -> Result<()> {
        self.operator_like(-1.0, sink, |pg| pg.curvature_operator())
    }

    fn operator_like(&self, facet_sign: f64, sink: &mut dyn Sink, volume: impl Fn(&PointGeometry) -> Mat3) -> Result<()> {
        if self.dim() != 3 {
            return Err(Error::Dimension(self.dim()));
        }
        self.for_each_element_point(&mut |e, b, pg, _, w| sink.add(e, b, &tensor::scale(&volume(pg), w)))?;
        self.for_each_facet_point(&mut |fp| {
            let s = &fp.sides[0];
            let k = fp.tangential_kernel(&trace_reverse(&fp.sff_jump(), fp.ntan));
            sink.add(s.elem, &s.bary, &tensor::scale(&k, facet_sign * fp.weight));
            Ok(())
        })?;
        self.for_each_bone_point(false, &mut |bp| {
            let en = &bp.entries[0];
            let k = tensor::outer(&bp.tau, &bp.tau);
            sink.add(en.elem, &en.bary, &tensor::scale(&k, -facet_sign * bp.theta * bp.weight));
            Ok(())
        })
    }

    /// Generic Riemann curvature against algebraic curvature tensors
    /// `A = build(pg, B_c)` that depend linearly on the test value:
    /// `Σ∫⟨R,A⟩ω + 4Σ∫⟨⟦II⟧, A_FννF⟩ω_F + 4Σ∫Θ A_μννμ ω_E`.
    ///
    /// `scalar` selects scalar tests (one component) or symmetric-matrix tests.
    pub fn riemann_with(&self, scalar: bool, build: &dyn Fn(&PointGeometry, &Mat3) -> Tensor4, sink: &mut dyn Sink) -> Result<()> {
        let dim = self.dim();
        let basis = component_basis(scalar, dim);
        let kernel = |vals: &dyn Fn(&Mat3) -> f64| {
            let mut k = ZERO33;
            for (b, s) in &basis {
                tensor::axpy(&mut k, vals(b), s);
            }
            k
        };
        self.for_each_element_point(&mut |e, b, pg, _, w| {
            let k = kernel(&|bc| pg.inner4(&pg.riem, &build(pg, bc)));
            sink.add(e, b, &tensor::scale(&k, w));
        })?;
        self.for_each_facet_point(&mut |fp| {
            let s = &fp.sides[0];
            let jump = fp.sff_jump();
            let k = kernel(&|bc| {
                let a = build(&s.pg, bc);
                let mut acc = 0.0;
                for x in 0..fp.ntan {
                    for y in 0..fp.ntan {
                        acc += jump[x][y] * tensor::eval4(&a, &fp.tangents[x], &s.nu, &s.nu, &fp.tangents[y], dim);
                    }
                }
                acc
            });
            sink.add(s.elem, &s.bary, &tensor::scale(&k, 4.0 * fp.weight));
            Ok(())
        })?;
        self.for_each_bone_point(false, &mut |bp| {
            let en = &bp.entries[0];
            let k = kernel(&|bc| {
                let a = build(&en.pg, bc);
                tensor::eval4(&a, &en.mu[0], &en.nu[0], &en.nu[0], &en.mu[0], dim)
            });
            sink.add(en.elem, &en.bary, &tensor::scale(&k, 4.0 * bp.theta * bp.weight));
            Ok(())
        })
    }

    /// Generic Riemann curvature tested with `𝔸U` for metric-independent `U`
    /// (a scalar in 2D, a symmetric matrix in 3D).
    pub fn riemann(&self, sink: &mut dyn Sink) -> Result<()> {
        self.riemann_with(self.dim() == 2, &|pg, u| pg.amap(u), sink)
    }
}

/// Pairs `(B_c, S_c)` with `U = Σ frob(S_c, U) B_c`.
fn component_basis(scalar: bool, dim: usize) -> Vec<(Mat3, Mat3)> {
    if scalar {
        let mut m = ZERO33;
        m[0][0] = 1.0;
        return alloc::vec![(m, m)];
    }
    (0..tensor::sym_count(dim))
        .map(|c| {
            let (a, b) = tensor::sym_index(dim, c);
            let mut bm = ZERO33;
            bm[a][b] = 1.0;
            bm[b][a] = 1.0;
            (bm, tensor::sym_unit(dim, c))
        })
        .collect()
}

/// Volume-only functional `U ↦ Σ∫ density(x) : U dx` on element quadrature.
pub fn volume_functional(mesh: &Mesh, exactness: usize, density: &dyn Fn(&Vec3) -> Mat3, sink: &mut dyn Sink) -> Result<()> {
    let rule = quad_rule(mesh.dim, exactness)?;
    for e in 0..mesh.num_elements() {
        let jac = mesh.reference_map(e).det;
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            let k = density(&mesh.point(e, q));
            sink.add(e, q, &tensor::scale(&k, w * jac));
        }
    }
    Ok(())
}

/// Which curvature functional to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    Gauss,
    Scalar,
    Ricci,
    Einstein,
    CurvatureOperator,
    Riemann,
}

impl Functional {
    /// Whether tests are scalar functions in dimension `dim`.
    pub fn scalar_tests(self, dim: usize) -> bool {
        match self {
            Functional::Gauss | Functional::Scalar => true,
            Functional::Riemann => dim == 2,
            _ => false,
        }
    }

    pub fn run(self, asm: &Assembly<'_>, sink: &mut dyn Sink) -> Result<()> {
        match self {
            Functional::Gauss => asm.gauss(sink),
            Functional::Scalar => asm.scalar(sink),
            Functional::Ricci => asm.ricci(sink),
            Functional::Einstein => asm.einstein(sink),
            Functional::CurvatureOperator => asm.curvature_operator(sink),
            Functional::Riemann => asm.riemann(sink),
        }
    }
}

fn evaluate(func: Functional, g: &dyn TensorField, orders: QuadOrders, test: &dyn TestField) -> Result<f64> {
    let asm = Assembly::new(g, orders)?;
    let mut ev = Evaluate::new(test);
    func.run(&asm, &mut ev)?;
    Ok(ev.sum)
}

pub fn gauss_functional(g: &dyn TensorField, v: &dyn ScalarField, orders: QuadOrders) -> Result<f64> {
    evaluate(Functional::Gauss, g, orders, &ScalarTest(v))
}

pub fn scalar_functional(g: &dyn TensorField, v: &dyn ScalarField, orders: QuadOrders) -> Result<f64> {
    evaluate(Functional::Scalar, g, orders, &ScalarTest(v))
}

pub fn ricci_functional(g: &dyn TensorField, rho: &dyn TensorField, orders: QuadOrders) -> Result<f64> {
    evaluate(Functional::Ricci, g, orders, &MatrixTest(rho))
}

pub fn einstein_functional(g: &dyn TensorField, rho: &dyn TensorField, orders: QuadOrders) -> Result<f64> {
    evaluate(Functional::Einstein, g, orders, &MatrixTest(rho))
}

pub fn curvature_operator_functional(g: &dyn TensorField, u: &dyn TensorField, orders: QuadOrders) -> Result<f64> {
    evaluate(Functional::CurvatureOperator, g, orders, &MatrixTest(u))
}

/// Generic Riemann functional; `u` holds the scalar test in `[0][0]` in 2D.
pub fn riemann_functional(g: &dyn TensorField, u: &dyn TestField, orders: QuadOrders) -> Result<f64> {
    evaluate(Functional::Riemann, g, orders, u)
}

/// Coefficients of a functional against `φ_j E_c` for the interior DOFs of a
/// Lagrange space.
pub fn assemble_against_basis(func: Functional, asm: &Assembly<'_>, space: &Space<'_>) -> Result<AssembledFunctional> {
    let dirs = test_directions(func.scalar_tests(asm.dim()), asm.dim());
    let mut sink = BasisAssembler::new(space, dirs);
    func.run(asm, &mut sink)?;
    Ok(sink.finish())
}
