//! Dual norms in `H⁻²` through clamped biharmonic problems.
//!
//! Each component of a functional is used as the load of `Δ²V = f` with
//! `V = ∂_n V = 0` on the boundary. The problem is discretised with the
//! Hellan–Herrmann–Johnson mixed method in hybridized form: the stress is
//! broken elementwise, its normal-normal continuity is imposed by facet
//! multipliers, and the stress is eliminated locally. What remains is a sparse
//! symmetric positive definite system in displacement and multipliers.

use distcurv::curvature::AssembledFunctional;
use distcurv::fields::{multi_indices, BaryPowers, ScalarJet};
use distcurv::mesh::{key_of, Mesh};
use distcurv::quadrature::{quad_rule, Bary, QuadRule};
use distcurv::regge::{LagrangeField, Space};
use distcurv::tensor::{self, Mat3};
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Relative residual accepted from the direct solver.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// Symmetric positive definite, factored by Cholesky.
    Spd,
    /// General (saddle point) matrix, factored by LU.
    Indefinite,
}

/// Square sparse matrix in coordinate form. Duplicate entries are summed.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub n: usize,
    pub kind: MatrixKind,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSystem {
    pub fn new(n: usize, kind: MatrixKind) -> Self {
        Self {
            n,
            kind,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    /// Sort by (column, row) and merge duplicates.
    pub fn compress(&mut self) {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (j, i));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(i, j, v) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        self.entries = out;
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// Largest deviation from symmetry relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut s = self.clone();
        s.compress();
        let mut t: Vec<(usize, usize, f64)> = s.entries.iter().map(|&(i, j, v)| (j, i, v)).collect();
        t.sort_unstable_by_key(|&(i, j, _)| (j, i));
        let scale = s.entries.iter().fold(0.0f64, |a, e| a.max(e.2.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        if t.len() != s.entries.len() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for (a, b) in s.entries.iter().zip(&t) {
            if a.0 != b.0 || a.1 != b.1 {
                return f64::INFINITY;
            }
            d = d.max((a.2 - b.2).abs());
        }
        d / scale
    }

    pub fn factor(&self) -> Result<Factorization> {
        let triplets: Vec<Triplet<usize, usize, f64>> = self.entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(self.n, self.n, &triplets)
            .map_err(|e| Error::Solver(format!("{e:?}")))?;
        let inner = match self.kind {
            MatrixKind::Spd => Factor::Llt(mat.sp_cholesky(Side::Lower).map_err(|e| Error::Solver(format!("{e:?}")))?),
            MatrixKind::Indefinite => Factor::Lu(mat.sp_lu().map_err(|e| Error::Solver(format!("{e:?}")))?),
        };
        Ok(Factorization { system: self.clone(), inner })
    }
}

enum Factor {
    Llt(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
}

/// A factored [`SparseSystem`], reusable for many right-hand sides.
pub struct Factorization {
    system: SparseSystem,
    inner: Factor,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("n", &self.system.n).finish()
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Factorization {
    fn raw(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        let x = match &self.inner {
            Factor::Llt(f) => f.solve(&rhs),
            Factor::Lu(f) => f.solve(&rhs),
        };
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solve with up to three steps of iterative refinement. Returns the
    /// solution and its relative residual.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let nb = norm2(b);
        if nb == 0.0 {
            return Ok((vec![0.0; b.len()], 0.0));
        }
        let mut x = self.raw(b);
        let mut rel = f64::INFINITY;
        for _ in 0..4 {
            let ax = self.system.apply(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            rel = norm2(&r) / nb;
            if rel <= 1e-14 {
                break;
            }
            let dx = self.raw(&r);
            x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        }
        if !(rel <= RESIDUAL_TOL) {
            return Err(Error::Residual {
                residual: rel,
                tol: RESIDUAL_TOL,
            });
        }
        Ok((x, rel))
    }
}

/// Factor and solve once.
pub fn sparse_solve(system: &SparseSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    Ok(system.factor()?.solve(rhs)?.0)
}

/// Hybridized HHJ discretisation of the clamped biharmonic problem with
/// Lagrange displacement of order `m` and stress of order `m - 1`.
pub struct HhjBiharmonic<'m> {
    layout: Layout<'m>,
    factor: Factorization,
}

/// DOF numbering and quadrature of the hybridized system.
struct Layout<'m> {
    mesh: &'m Mesh,
    order: usize,
    space: Space<'m>,
    /// Row of each displacement DOF, `None` on the boundary.
    u_row: Vec<Option<usize>>,
    n_u: usize,
    /// First multiplier row of each facet, `None` on the boundary.
    facet_row: Vec<Option<usize>>,
    n_mult: usize,
    stress_alphas: Vec<[u8; 4]>,
    mult_alphas: Vec<[u8; 4]>,
    elem_rule: QuadRule,
    facet_rule: QuadRule,
}

impl std::fmt::Debug for HhjBiharmonic<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HhjBiharmonic")
            .field("order", &self.layout.order)
            .field("n_u", &self.layout.n_u)
            .field("n_mult", &self.layout.n_mult)
            .finish()
    }
}

/// Local stress blocks of one element.
struct LocalBlocks {
    /// Stress mass matrix.
    a: Mat<f64>,
    /// Coupling to displacement and multipliers.
    g: Mat<f64>,
    /// Global unknown of each column of `g`.
    cols: Vec<Option<usize>>,
}

/// A solved biharmonic problem.
#[derive(Debug, Clone)]
pub struct BiharmonicSolution {
    /// Displacement on the interior DOFs, in ascending DOF order.
    pub u: Vec<f64>,
    pub multipliers: Vec<f64>,
    /// `‖σ_h‖²_{L²}` of the eliminated stress.
    pub stress_energy: f64,
    pub residual: f64,
}

impl<'m> HhjBiharmonic<'m> {
    pub fn new(mesh: &'m Mesh, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("HHJ displacement order must be at least 1".into()));
        }
        let dim = mesh.dim;
        let space = Space::lagrange(mesh, order);
        let mut u_row = vec![None; space.ndofs()];
        let mut n_u = 0;
        for (d, r) in u_row.iter_mut().enumerate() {
            if !space.boundary[d] {
                *r = Some(n_u);
                n_u += 1;
            }
        }
        let mult_alphas = multi_indices(dim, order - 1);
        let facets = mesh.facets();
        let mut facet_row = vec![None; facets.len()];
        let mut n_mult = 0;
        for (f, r) in facet_row.iter_mut().enumerate() {
            if !facets.boundary[f] {
                *r = Some(n_u + n_mult);
                n_mult += mult_alphas.len();
            }
        }
        let layout = Layout {
            mesh,
            order,
            space,
            u_row,
            n_u,
            facet_row,
            n_mult,
            stress_alphas: multi_indices(dim + 1, order - 1),
            mult_alphas,
            elem_rule: quad_rule(dim, 2 * order)?,
            facet_rule: quad_rule(dim - 1, 2 * order)?,
        };
        let mut sys = SparseSystem::new(n_u + n_mult, MatrixKind::Spd);
        for e in 0..mesh.num_elements() {
            let lb = layout.local_blocks(e);
            let llt = lb.a.llt(Side::Lower).map_err(|e| Error::Solver(format!("stress mass: {e:?}")))?;
            let x = llt.solve(&lb.g);
            let k = lb.g.transpose() * &x;
            for (p, cp) in lb.cols.iter().enumerate() {
                let Some(i) = cp else { continue };
                for (q, cq) in lb.cols.iter().enumerate() {
                    if let Some(j) = cq {
                        sys.push(*i, *j, k[(p, q)]);
                    }
                }
            }
        }
        sys.compress();
        let factor = sys.factor()?;
        Ok(Self { layout, factor })
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn displacement_space(&self) -> &Space<'m> {
        &self.layout.space
    }

    /// Size of the reduced system.
    pub fn ndofs(&self) -> usize {
        self.layout.n_u + self.layout.n_mult
    }

    /// Solve for several loads given on the interior displacement DOFs.
    pub fn solve(&self, loads: &[Vec<f64>]) -> Result<Vec<BiharmonicSolution>> {
        let n_u = self.layout.n_u;
        loads
            .iter()
            .map(|load| {
                if load.len() != n_u {
                    return Err(Error::SpaceMismatch);
                }
                let mut b = load.clone();
                b.resize(self.ndofs(), 0.0);
                let (x, residual) = self.factor.solve(&b)?;
                let stress_energy = load.iter().zip(&x).map(|(f, u)| f * u).sum();
                Ok(BiharmonicSolution {
                    u: x[..n_u].to_vec(),
                    multipliers: x[n_u..].to_vec(),
                    stress_energy,
                    residual,
                })
            })
            .collect()
    }

    /// Unreduced saddle point system in broken stress, displacement and
    /// multipliers, solved by sparse LU. Returns the displacement.
    pub fn solve_saddle(&self, load: &[f64]) -> Result<Vec<f64>> {
        let l = &self.layout;
        let nsig = l.stress_count();
        let off = nsig * l.mesh.num_elements();
        let mut sys = SparseSystem::new(off + self.ndofs(), MatrixKind::Indefinite);
        for e in 0..l.mesh.num_elements() {
            let lb = l.local_blocks(e);
            for i in 0..nsig {
                for j in 0..nsig {
                    sys.push(e * nsig + i, e * nsig + j, lb.a[(i, j)]);
                }
                for (c, col) in lb.cols.iter().enumerate() {
                    if let Some(j) = col {
                        sys.push(e * nsig + i, off + j, -lb.g[(i, c)]);
                        sys.push(off + j, e * nsig + i, -lb.g[(i, c)]);
                    }
                }
            }
        }
        sys.compress();
        let mut b = vec![0.0; sys.n];
        for (r, f) in load.iter().enumerate() {
            b[off + r] = -f;
        }
        let x = sparse_solve(&sys, &b)?;
        Ok(x[off..off + l.n_u].to_vec())
    }

    /// Displacement as a field over the full Lagrange space.
    pub fn displacement(&self, u: &[f64]) -> LagrangeField<'_, 'm> {
        let coeffs = self.layout.u_row.iter().map(|r| r.map_or(0.0, |r| u[r])).collect();
        LagrangeField {
            space: &self.layout.space,
            coeffs,
        }
    }

    /// `‖u_h‖²_{L²}` and `‖∇u_h‖²_{L²}`.
    pub fn displacement_norms(&self, u: &[f64]) -> (f64, f64) {
        let field = self.displacement(u);
        let l = &self.layout;
        let (mut l2, mut h1) = (0.0, 0.0);
        for e in 0..l.mesh.num_elements() {
            let jac = l.mesh.reference_map(e).det;
            for (q, w) in l.elem_rule.points.iter().zip(&l.elem_rule.weights) {
                let j = field.jet(e, q);
                l2 += w * jac * j.val * j.val;
                h1 += w * jac * tensor::dot(&j.grad, &j.grad, l.mesh.dim);
            }
        }
        (l2, h1)
    }
}

impl Layout<'_> {
    fn stress_count(&self) -> usize {
        self.stress_alphas.len() * tensor::sym_count(self.mesh.dim)
    }

    fn local_blocks(&self, e: usize) -> LocalBlocks {
        let mesh = self.mesh;
        let dim = mesh.dim;
        let ns = tensor::sym_count(dim);
        let units: Vec<Mat3> = (0..ns).map(|c| tensor::sym_unit(dim, c)).collect();
        let nsig = self.stress_count();
        let nphi = self.space.templates().len();
        let el = mesh.element(e);
        let facets = mesh.facets();

        let mut cols: Vec<Option<usize>> = self.space.elem_dofs(e).iter().map(|&d| self.u_row[d]).collect();
        let mut local_facets = Vec::new();
        for l in 0..=dim {
            let fv: Vec<usize> = (0..=dim).filter(|&i| i != l).map(|i| el[i]).collect();
            let f = facets.find(&key_of(&fv)).expect("element facet");
            let first = cols.len();
            if let Some(r) = self.facet_row[f] {
                cols.extend((0..self.mult_alphas.len()).map(|b| Some(r + b)));
            }
            local_facets.push((f, first));
        }
        let mut a = Mat::<f64>::zeros(nsig, nsig);
        let mut g = Mat::<f64>::zeros(nsig, cols.len());
        let jac = mesh.reference_map(e).det;
        let mut jets: Vec<ScalarJet> = Vec::new();
        let mut psi = vec![0.0; self.stress_alphas.len()];

        for (q, w) in self.elem_rule.points.iter().zip(&self.elem_rule.weights) {
            let wq = w * jac;
            self.stress_values(q, &mut psi);
            self.space.scalar_jets(e, q, &mut jets);
            for (pa, &va) in psi.iter().enumerate() {
                for (pb, &vb) in psi.iter().enumerate() {
                    for s in 0..ns {
                        for t in 0..ns {
                            a[(pa * ns + s, pb * ns + t)] += wq * va * vb * tensor::frob(&units[s], &units[t], dim);
                        }
                    }
                }
                for s in 0..ns {
                    for (c, j) in jets.iter().enumerate() {
                        g[(pa * ns + s, c)] += wq * va * tensor::frob(&units[s], &j.hess, dim);
                    }
                }
            }
        }

        let fact: f64 = (1..dim).map(|i| i as f64).product();
        for (f, first) in local_facets {
            let key = facets.verts[f];
            let fv = &key[..dim];
            let area = facet_measure(mesh, fv);
            let mut n = mesh.inward_normal(e, f);
            n.iter_mut().for_each(|x| *x = -*x);
            let sign = if facets.cells[f][0] == e { 1.0 } else { -1.0 };
            let interior = self.facet_row[f].is_some();
            for (p, w) in self.facet_rule.points.iter().zip(&self.facet_rule.weights) {
                let wq = w * area * fact;
                let bary = mesh.bary_from_vertex_weights(e, fv, &p[..dim]);
                self.stress_values(&bary, &mut psi);
                self.space.scalar_jets(e, &bary, &mut jets);
                let nn: Vec<f64> = units.iter().map(|u| tensor::bilinear(u, &n, &n, dim)).collect();
                let mu = BaryPowers::new(p, dim, self.order - 1);
                for (pa, &va) in psi.iter().enumerate() {
                    for s in 0..ns {
                        let sn = wq * va * nn[s];
                        if sn == 0.0 {
                            continue;
                        }
                        let row = pa * ns + s;
                        for (c, j) in jets.iter().enumerate() {
                            g[(row, c)] -= sn * tensor::dot(&j.grad, &n, dim);
                        }
                        if interior {
                            for (b, alpha) in self.mult_alphas.iter().enumerate() {
                                g[(row, first + b)] += sign * sn * mu.value(alpha);
                            }
                        }
                    }
                }
            }
        }
        debug_assert!(cols.len() >= nphi);
        LocalBlocks { a, g, cols }
    }

    fn stress_values(&self, bary: &Bary, out: &mut [f64]) {
        let bp = BaryPowers::new(bary, self.mesh.dim + 1, self.order - 1);
        for (o, alpha) in out.iter_mut().zip(&self.stress_alphas) {
            *o = bp.value(alpha);
        }
    }
}

fn facet_measure(mesh: &Mesh, fv: &[usize]) -> f64 {
    let p = |i: usize| mesh.vertices[fv[i]];
    let a = tensor::sub(&p(1), &p(0));
    if mesh.dim == 2 {
        return tensor::dot(&a, &a, 2).sqrt();
    }
    let b = tensor::sub(&p(2), &p(0));
    let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    0.5 * tensor::dot(&c, &c, 3).sqrt()
}

/// `H⁻²` estimate of an assembled functional, one biharmonic solve per
/// direction.
#[derive(Debug, Clone)]
pub struct DualNormReport {
    pub components: Vec<f64>,
    pub total: f64,
    /// Worst relative residual over the component solves.
    pub residual: f64,
    pub order: usize,
}

pub fn hminus2_norm(f: &AssembledFunctional, solver: &HhjBiharmonic<'_>) -> Result<DualNormReport> {
    if f.dofs != solver.layout.space.interior_dofs() {
        return Err(Error::SpaceMismatch);
    }
    let loads: Vec<Vec<f64>> = (0..f.ndirections()).map(|c| f.component(c)).collect();
    let sols = solver.solve(&loads)?;
    let mut components = Vec::with_capacity(sols.len());
    let mut residual: f64 = 0.0;
    for s in &sols {
        let (l2, h1) = solver.displacement_norms(&s.u);
        components.push((l2 + h1 + s.stress_energy).max(0.0).sqrt());
        residual = residual.max(s.residual);
    }
    let total = components.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(DualNormReport {
        components,
        total,
        residual,
        order: solver.layout.order,
    })
}
