//! Evolution forms of the distributional curvature under a metric
//! variation `σ`, covariant curl and incompatibility, and the edge probe
//! functionals used to study the critical codimension-two terms.
//!
//! Forms follow the curvature module: they emit kernels into a [`Sink`],
//! so they can be evaluated on a test field or assembled against a basis.
//! Scalar (2D) tests use the `[0][0]` slot.

use alloc::vec::Vec;

use crate::curvature::{trace_reverse, Assembly, BonePoint, Evaluate, FacetPoint, QuadOrders, Sink, TestField};
use crate::fields::{Combination, SymJet, TensorField};
use crate::geometry::PointGeometry;
use crate::quadrature::gauss_legendre01;
use crate::tensor::{self, eps2, eps3, Mat3, Tensor3, Tensor4, Vec3, ZERO33, ZERO333};
use crate::{Error, Result};

/// Which part of a form to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Volume,
    Facet,
    Bone,
}

pub const PARTS: [Part; 3] = [Part::Volume, Part::Facet, Part::Bone];

/// Values of the three parts of a form.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FormTerms {
    pub volume: f64,
    pub facet: f64,
    pub bone: f64,
}

impl FormTerms {
    pub fn total(&self) -> f64 {
        self.volume + self.facet + self.bone
    }
}

fn scalar_kernel(v: f64) -> Mat3 {
    let mut m = ZERO33;
    m[0][0] = v;
    m
}

/// `∂_r σ_qs - Γ^u_rq σ_us`, the partially covariant derivative shared by
/// curl and inc.
fn half_nabla(pg: &PointGeometry, s: &SymJet) -> Tensor3 {
    let d = pg.dim;
    let mut w = ZERO333;
    for r in 0..d {
        for q in 0..d {
            for t in 0..d {
                let mut v = s.d1[r][q][t];
                for u in 0..d {
                    v -= pg.gamma2[u][r][q] * s.val[u][t];
                }
                w[r][q][t] = v;
            }
        }
    }
    w
}

/// `∂_p` of [`half_nabla`]; needs curvature-level geometry.
fn d_half_nabla(pg: &PointGeometry, s: &SymJet) -> Tensor4 {
    let d = pg.dim;
    let mut w = [ZERO333; 3];
    for p in 0..d {
        for r in 0..d {
            for q in 0..d {
                for t in 0..d {
                    let mut v = s.d2[p][r][q][t];
                    for u in 0..d {
                        v -= pg.dgamma2[p][u][r][q] * s.val[u][t] + pg.gamma2[u][r][q] * s.d1[p][u][t];
                    }
                    w[p][r][q][t] = v;
                }
            }
        }
    }
    w
}

/// Covariant curl in 3D, `(curl σ)_ij = ε̂^{pql} g_lj (∂_p σ_iq - Γ^m_pi σ_mq)`.
pub fn covariant_curl(pg: &PointGeometry, s: &SymJet) -> Mat3 {
    let w = half_nabla(pg, s);
    let mut c = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            let mut v = 0.0;
            for p in 0..3 {
                for q in 0..3 {
                    for l in 0..3 {
                        let e = pg.eps_up3(p, q, l);
                        if e != 0.0 {
                            v += e * pg.g[l][j] * w[p][i][q];
                        }
                    }
                }
            }
            c[i][j] = v;
        }
    }
    c
}

/// Covariant incompatibility in 3D, contravariant components `(inc σ)^{ij}`.
pub fn covariant_inc(pg: &PointGeometry, s: &SymJet) -> Mat3 {
    let w = half_nabla(pg, s);
    let dw = d_half_nabla(pg, s);
    let trace_gamma: Vec3 = core::array::from_fn(|p| (0..3).map(|l| pg.gamma2[l][l][p]).sum());
    let mut r = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            let mut v = 0.0;
            for p in 0..3 {
                for q in 0..3 {
                    let epq = pg.eps_up3(p, q, j);
                    if epq == 0.0 {
                        continue;
                    }
                    let mut inner = 0.0;
                    for rr in 0..3 {
                        for s_ in 0..3 {
                            let e1 = pg.eps_up3(rr, s_, i);
                            if e1 != 0.0 {
                                inner += e1 * (dw[p][rr][q][s_] - trace_gamma[p] * w[rr][q][s_]);
                            }
                            for t in 0..3 {
                                let e2 = pg.eps_up3(rr, s_, t);
                                if e2 != 0.0 {
                                    inner += e2 * pg.gamma2[i][p][t] * w[rr][q][s_];
                                }
                            }
                        }
                    }
                    v += epq * inner;
                }
            }
            r[i][j] = v;
        }
    }
    tensor::sym_part(&r)
}

/// Covariant incompatibility in 2D (a scalar).
pub fn inc_2d(pg: &PointGeometry, s: &SymJet) -> f64 {
    let w = half_nabla(pg, s);
    let dw = d_half_nabla(pg, s);
    let trace_gamma: [f64; 2] = core::array::from_fn(|q| (0..2).map(|l| pg.gamma2[l][l][q]).sum());
    let mut v = 0.0;
    for q in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let e = eps2(q, i) * eps2(j, k);
                    if e != 0.0 {
                        v += e * (dw[q][j][i][k] - trace_gamma[q] * w[j][i][k]);
                    }
                }
            }
        }
    }
    v / pg.det
}

/// Triple product `A : B : C = A_ij B^jk C_k^i` of covariant tensors.
pub fn triple_product(pg: &PointGeometry, a: &Mat3, b: &Mat3, c: &Mat3) -> f64 {
    let d = pg.dim;
    let gi = &pg.ginv;
    let m = tensor::matmul(&tensor::matmul(&tensor::matmul(a, gi, d), &tensor::matmul(b, gi, d), d), &tensor::matmul(c, gi, d), d);
    tensor::trace(&m, d)
}

/// `∇(ν⌟σ)(X, Y) = (∇_X σ)(ν, Y) - Σ_c II(X, τ_c) σ(τ_c, Y)` on the facet
/// frame, as a tangent-frame matrix.
fn nabla_normal_contraction(fp: &FacetPoint, side: usize, nab: &Tensor3, sigma: &Mat3) -> Mat3 {
    let s = &fp.sides[side];
    let d = s.pg.dim;
    let mut n = ZERO33;
    for a in 0..fp.ntan {
        for b in 0..fp.ntan {
            let mut v = eval3(nab, &fp.tangents[a], &s.nu, &fp.tangents[b], d);
            for c in 0..fp.ntan {
                v -= s.sff[a][c] * tensor::bilinear(sigma, &fp.tangents[c], &fp.tangents[b], d);
            }
            n[a][b] = v;
        }
    }
    n
}

fn eval3(t: &Tensor3, x: &Vec3, y: &Vec3, z: &Vec3, d: usize) -> f64 {
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                s += t[a][b][c] * x[a] * y[b] * z[c];
            }
        }
    }
    s
}

/// Evolution form `a(g; σ, U)`. Identically zero in 2D.
pub fn a_form(asm: &Assembly<'_>, sigma: &dyn TensorField, part: Part, sink: &mut dyn Sink) -> Result<()> {
    if asm.dim() == 2 {
        return Ok(());
    }
    match part {
        Part::Volume => asm.for_each_element_point(&mut |e, b, pg, _, w| {
            // Q:σ:U with Q contravariant: kernel (Q σ g⁻¹) symmetrised
            let s = sigma.value(e, b);
            let k = tensor::matmul(&tensor::matmul(&pg.curvature_operator(), &s, 3), &pg.ginv, 3);
            sink.add(e, b, &tensor::scale(&tensor::sym_part(&k), -2.0 * w));
        }),
        Part::Facet => asm.for_each_facet_point(&mut |fp| {
            let s0 = &fp.sides[0];
            let sf = trace_reverse(&fp.restrict(&sigma.value(s0.elem, &s0.bary)), fp.ntan);
            // J : S(σ) : S(U) = Σ (J S(σ))_ab S(U)_ba ; S is self-adjoint on the facet
            let js = tensor::matmul(&fp.sff_jump(), &sf, fp.ntan);
            let k = trace_reverse(&tensor::sym_part(&js), fp.ntan);
            sink.add(s0.elem, &s0.bary, &tensor::scale(&fp.tangential_kernel(&k), -2.0 * fp.weight));
            Ok(())
        }),
        Part::Bone => asm.for_each_bone_point(false, &mut |bp| {
            let en = &bp.entries[0];
            let st = tensor::bilinear(&sigma.value(en.elem, &en.bary), &bp.tau, &bp.tau, 3);
            let k = tensor::outer(&bp.tau, &bp.tau);
            sink.add(en.elem, &en.bary, &tensor::scale(&k, -2.0 * bp.theta * st * bp.weight));
            Ok(())
        }),
    }
}

/// `Σ_{F⊃E} ⟦σ_νμ⟧` over a bone ring, with inward normals per element and
/// conormals pointing from the bone into each facet.
pub fn ring_normal_conormal_jump(bp: &BonePoint, sigma: &dyn TensorField) -> f64 {
    bp.entries
        .iter()
        .map(|en| {
            let s = sigma.value(en.elem, &en.bary);
            let d = en.pg.dim;
            tensor::bilinear(&s, &en.nu[0], &en.mu[0], d) + tensor::bilinear(&s, &en.nu[1], &en.mu[1], d)
        })
        .sum()
}

/// Evolution form `b(g; σ, U)` from the dimension-specific expressions.
///
/// The bone term is `+2 Σ_E ∫ Σ_F ⟦σ_νμ⟧ U_ττ ω_E`: with inward normals and
/// conormals pointing into the facets the angle deficit evolves as
/// `dΘ/dt = +½ Σ_F ⟦σ_νμ⟧`. `edge_sign = -1.0` flips it (used to check that
/// the linearization test detects a wrong sign).
pub fn b_form(asm: &Assembly<'_>, sigma: &dyn TensorField, part: Part, edge_sign: f64, sink: &mut dyn Sink) -> Result<()> {
    let dim = asm.dim();
    match part {
        Part::Volume => asm.for_each_element_point(&mut |e, b, pg, _, w| {
            let sj = sigma.jet(e, b);
            let k = if dim == 2 {
                scalar_kernel(inc_2d(pg, &sj))
            } else {
                covariant_inc(pg, &sj)
            };
            sink.add(e, b, &tensor::scale(&k, -2.0 * w));
        }),
        Part::Facet => asm.for_each_facet_point(&mut |fp| {
            let mut jump = ZERO33;
            for side in 0..2 {
                let s = &fp.sides[side];
                let sj = sigma.jet(s.elem, &s.bary);
                let nab = s.pg.nabla(&sj);
                let snn = tensor::bilinear(&sj.val, &s.nu, &s.nu, dim);
                if dim == 2 {
                    let t = &fp.tangents[0];
                    let kappa = s.sff[0][0];
                    let v = 2.0 * eval3(&nab, t, &s.nu, t, 2) - eval3(&nab, &s.nu, t, t, 2)
                        - kappa * tensor::bilinear(&sj.val, t, t, 2)
                        + kappa * snn;
                    jump[0][0] += v;
                } else {
                    let curl = covariant_curl(&s.pg, &sj);
                    let n = nabla_normal_contraction(fp, side, &nab, &sj.val);
                    let sn = trace_reverse(&tensor::sym_part(&n), fp.ntan);
                    let sbar = trace_reverse(&s.sff, fp.ntan);
                    for a in 0..fp.ntan {
                        for bb in 0..fp.ntan {
                            let cross = s.pg.cross(&s.nu, &fp.tangents[bb]);
                            let x = tensor::bilinear(&curl, &cross, &fp.tangents[a], 3);
                            jump[a][bb] += x - snn * sbar[a][bb] - sn[a][bb];
                        }
                    }
                }
            }
            let s0 = &fp.sides[0];
            let k = if dim == 2 {
                scalar_kernel(jump[0][0])
            } else {
                fp.tangential_kernel(&tensor::sym_part(&jump))
            };
            sink.add(s0.elem, &s0.bary, &tensor::scale(&k, 2.0 * fp.weight));
            Ok(())
        }),
        Part::Bone => asm.for_each_bone_point(false, &mut |bp| {
            let en = &bp.entries[0];
            let j = ring_normal_conormal_jump(bp, sigma);
            let k = if dim == 2 { scalar_kernel(1.0) } else { tensor::outer(&bp.tau, &bp.tau) };
            sink.add(en.elem, &en.bary, &tensor::scale(&k, 2.0 * edge_sign * j * bp.weight));
            Ok(())
        }),
    }
}

fn evaluate_parts(f: &dyn Fn(Part, &mut dyn Sink) -> Result<()>, test: &dyn TestField) -> Result<FormTerms> {
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(PARTS) {
        let mut ev = Evaluate::new(test);
        f(p, &mut ev)?;
        *o = ev.sum;
    }
    Ok(FormTerms {
        volume: out[0],
        facet: out[1],
        bone: out[2],
    })
}

/// Evaluate `a(g; σ, U)` term by term.
pub fn a_form_terms(g: &dyn TensorField, sigma: &dyn TensorField, u: &dyn TestField, orders: QuadOrders) -> Result<FormTerms> {
    let asm = Assembly::new(g, orders)?;
    evaluate_parts(&|p, s| a_form(&asm, sigma, p, s), u)
}

/// Evaluate `b(g; σ, U)` term by term.
pub fn b_form_terms(g: &dyn TensorField, sigma: &dyn TensorField, u: &dyn TestField, orders: QuadOrders) -> Result<FormTerms> {
    let asm = Assembly::new(g, orders)?;
    evaluate_parts(&|p, s| b_form(&asm, sigma, p, 1.0, s), u)
}

/// `(SA)_{abcd} = A_{acbd}`.
fn swap_middle(a: &Tensor4) -> Tensor4 {
    let mut r = *a;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    r[i][j][k][l] = a[i][k][j][l];
                }
            }
        }
    }
    r
}

/// Generalized distributional incompatibility of `σ` tested with algebraic
/// curvature tensors `A = build(pg, B_c)` (see
/// [`Assembly::riemann_with`]). Volume term `-⟨∇²σ, SA⟩`, facet term from
/// both sides with inward normals, and an edge term
/// `-edge_sign · Σ_F ⟦σ_νμ⟧ A_μννμ`.
pub fn inc_functional_with(
    asm: &Assembly<'_>,
    sigma: &dyn TensorField,
    scalar: bool,
    build: &dyn Fn(&PointGeometry, &Mat3) -> Tensor4,
    edge_sign: f64,
    sink: &mut dyn Sink,
) -> Result<()> {
    let dim = asm.dim();
    let basis = component_pairs(scalar, dim);
    let kernel = |vals: &dyn Fn(&Mat3) -> f64| {
        let mut k = ZERO33;
        for (b, s) in &basis {
            tensor::axpy(&mut k, vals(b), s);
        }
        k
    };
    asm.for_each_element_point(&mut |e, b, pg, _, w| {
        let n2 = pg.nabla2(&sigma.jet(e, b));
        let k = kernel(&|bc| -pg.inner4(&n2, &swap_middle(&build(pg, bc))));
        sink.add(e, b, &tensor::scale(&k, w));
    })?;
    asm.for_each_facet_point(&mut |fp| {
        for side in 0..2 {
            let s = &fp.sides[side];
            let sj = sigma.jet(s.elem, &s.bary);
            let nab = s.pg.nabla(&sj);
            let snn = tensor::bilinear(&sj.val, &s.nu, &s.nu, dim);
            let n = nabla_normal_contraction(fp, side, &nab, &sj.val);
            let mut m = ZERO33;
            for a in 0..fp.ntan {
                for c in 0..fp.ntan {
                    let (ta, tc) = (&fp.tangents[a], &fp.tangents[c]);
                    m[a][c] = snn * s.sff[a][c] + eval3(&nab, ta, &s.nu, tc, dim) + n[a][c] - eval3(&nab, &s.nu, ta, tc, dim);
                }
            }
            let k = kernel(&|bc| {
                let a4 = build(&s.pg, bc);
                let mut acc = 0.0;
                for x in 0..fp.ntan {
                    for y in 0..fp.ntan {
                        acc += m[x][y] * tensor::eval4(&a4, &fp.tangents[x], &s.nu, &s.nu, &fp.tangents[y], dim);
                    }
                }
                acc
            });
            sink.add(s.elem, &s.bary, &tensor::scale(&k, -fp.weight));
        }
        Ok(())
    })?;
    asm.for_each_bone_point(false, &mut |bp| {
        for en in &bp.entries {
            let sv = sigma.value(en.elem, &en.bary);
            for f in 0..2 {
                let j = tensor::bilinear(&sv, &en.nu[f], &en.mu[f], dim);
                let k = kernel(&|bc| {
                    let a4 = build(&en.pg, bc);
                    tensor::eval4(&a4, &en.mu[f], &en.nu[f], &en.nu[f], &en.mu[f], dim)
                });
                sink.add(en.elem, &en.bary, &tensor::scale(&k, -edge_sign * j * bp.weight));
            }
        }
        Ok(())
    })
}

/// `ĩnc σ (U)` through the generic route with `A = 𝔸U`.
pub fn inc_functional(g: &dyn TensorField, sigma: &dyn TensorField, u: &dyn TestField, orders: QuadOrders) -> Result<f64> {
    let asm = Assembly::new(g, orders)?;
    let mut ev = Evaluate::new(u);
    inc_functional_with(&asm, sigma, asm.dim() == 2, &|pg, b| pg.amap(b), 1.0, &mut ev)?;
    Ok(ev.sum)
}

fn component_pairs(scalar: bool, dim: usize) -> Vec<(Mat3, Mat3)> {
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

/// Euclidean distributional incompatibility in 3D:
/// `Σ∫⟨inc σ, Φ⟩ - Σ∫⟨⟦Q(curl σ)ᵀ×ν - S_F(grad_F σ_ν)⟧, Φ_F⟩ - Σ∫Σ_F⟦σ_νμ⟧Φ_ττ`,
/// with the edge sign matching `b = -2 ĩnc`.
/// The mesh metric must be the identity; `identity` supplies it.
pub fn distributional_inc_euclidean(identity: &dyn TensorField, sigma: &dyn TensorField, phi: &dyn TestField, orders: QuadOrders) -> Result<f64> {
    let mesh = identity.mesh();
    if mesh.dim != 3 {
        return Err(Error::Dimension(mesh.dim));
    }
    let asm = Assembly::new(identity, orders)?;
    let mut ev = Evaluate::new(phi);
    let sink: &mut dyn Sink = &mut ev;
    asm.for_each_element_point(&mut |e, b, pg, _, w| {
        let sj = sigma.jet(e, b);
        sink.add(e, b, &tensor::scale(&euclidean_inc(&sj), w));
        let _ = pg;
    })?;
    asm.for_each_facet_point(&mut |fp| {
        let mut jump = ZERO33;
        for side in 0..2 {
            let s = &fp.sides[side];
            let sj = sigma.jet(s.elem, &s.bary);
            let curl = euclidean_curl(&sj);
            let mut grad = ZERO33;
            for a in 0..fp.ntan {
                for c in 0..fp.ntan {
                    let mut v = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            for k in 0..3 {
                                v += fp.tangents[a][i] * sj.d1[i][j][k] * s.nu[j] * fp.tangents[c][k];
                            }
                        }
                    }
                    grad[a][c] = v;
                }
            }
            let sg = trace_reverse(&tensor::sym_part(&grad), fp.ntan);
            for a in 0..fp.ntan {
                for c in 0..fp.ntan {
                    let cross = cross3(&s.nu, &fp.tangents[c]);
                    jump[a][c] += tensor::bilinear(&curl, &cross, &fp.tangents[a], 3) - sg[a][c];
                }
            }
        }
        let s0 = &fp.sides[0];
        let k = fp.tangential_kernel(&tensor::sym_part(&jump));
        sink.add(s0.elem, &s0.bary, &tensor::scale(&k, -fp.weight));
        Ok(())
    })?;
    asm.for_each_bone_point(false, &mut |bp| {
        let en = &bp.entries[0];
        let j = ring_normal_conormal_jump(bp, sigma);
        sink.add(en.elem, &en.bary, &tensor::scale(&tensor::outer(&bp.tau, &bp.tau), -j * bp.weight));
        Ok(())
    })?;
    Ok(ev.sum)
}

fn cross3(x: &Vec3, y: &Vec3) -> Vec3 {
    [x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]]
}

/// `(curl σ)_ij = ε_pqj ∂_p σ_iq`.
pub fn euclidean_curl(s: &SymJet) -> Mat3 {
    let mut c = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            for p in 0..3 {
                for q in 0..3 {
                    c[i][j] += eps3(p, q, j) * s.d1[p][i][q];
                }
            }
        }
    }
    c
}

/// `(inc σ)_ij = ε_pqj ε_rsi ∂_p ∂_r σ_qs`.
pub fn euclidean_inc(s: &SymJet) -> Mat3 {
    let mut r = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            for p in 0..3 {
                for q in 0..3 {
                    let e1 = eps3(p, q, j);
                    if e1 == 0.0 {
                        continue;
                    }
                    for rr in 0..3 {
                        for s_ in 0..3 {
                            r[i][j] += e1 * eps3(rr, s_, i) * s.d2[p][rr][q][s_];
                        }
                    }
                }
            }
        }
    }
    r
}

/// Gauss–Legendre rule in the path parameter.
#[derive(Debug, Clone)]
pub struct TQuadrature {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TQuadrature {
    pub fn gauss(n: usize) -> Self {
        let (points, weights) = gauss_legendre01(n);
        Self { points, weights }
    }
}

/// Straight path `ĝ(t) = g + t (g_h - g)` between a smooth metric and its
/// approximation, with `σ = g_h - g`.
pub struct MetricPath<'a> {
    pub g: &'a dyn TensorField,
    pub gh: &'a dyn TensorField,
}

impl core::fmt::Debug for MetricPath<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("MetricPath").finish_non_exhaustive()
    }
}

impl<'a> MetricPath<'a> {
    pub fn new(g: &'a dyn TensorField, gh: &'a dyn TensorField) -> Self {
        Self { g, gh }
    }

    pub fn at(&self, t: f64) -> Combination<'a> {
        Combination::new(alloc::vec![(1.0 - t, self.g), (t, self.gh)])
    }

    pub fn sigma(&self) -> Combination<'a> {
        Combination::new(alloc::vec![(1.0, self.gh), (-1.0, self.g)])
    }
}

/// Edge probe functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    /// `½∫ Σ_E ∫ σ_ττ Θ U_ττ ω_E dt`
    F1,
    /// `-½∫ Σ_E Σ_F ∫ σ_ττ ⟦U_νμ⟧ ω_E dt`
    F2,
    /// `F1 + F2`
    F3,
}

/// Emit the kernels of a probe functional; every metric-dependent quantity
/// is evaluated at the same path node.
pub fn probe(path: &MetricPath<'_>, which: Probe, tq: &TQuadrature, orders: QuadOrders, sink: &mut dyn Sink) -> Result<()> {
    let sigma = path.sigma();
    let dim = path.gh.mesh().dim;
    if dim != 3 {
        return Err(Error::Dimension(dim));
    }
    let (f1, f2) = match which {
        Probe::F1 => (true, false),
        Probe::F2 => (false, true),
        Probe::F3 => (true, true),
    };
    for (&t, &wt) in tq.points.iter().zip(&tq.weights) {
        let gt = path.at(t);
        let asm = Assembly::new(&gt, orders)?;
        asm.for_each_bone_point(false, &mut |bp| {
            let en0 = &bp.entries[0];
            let st = tensor::bilinear(&sigma.value(en0.elem, &en0.bary), &bp.tau, &bp.tau, 3);
            if f1 {
                let k = tensor::outer(&bp.tau, &bp.tau);
                sink.add(en0.elem, &en0.bary, &tensor::scale(&k, 0.5 * wt * st * bp.theta * bp.weight));
            }
            if f2 {
                for en in &bp.entries {
                    let mut k = tensor::sym_outer(&en.nu[0], &en.mu[0]);
                    tensor::axpy(&mut k, 1.0, &tensor::sym_outer(&en.nu[1], &en.mu[1]));
                    sink.add(en.elem, &en.bary, &tensor::scale(&k, -0.5 * wt * st * bp.weight));
                }
            }
            Ok(())
        })?;
    }
    Ok(())
}

/// Evaluate a probe on a test field.
pub fn probe_value(path: &MetricPath<'_>, which: Probe, u: &dyn TestField, tq: &TQuadrature, orders: QuadOrders) -> Result<f64> {
    let mut ev = Evaluate::new(u);
    probe(path, which, tq, orders, &mut ev)?;
    Ok(ev.sum)
}
