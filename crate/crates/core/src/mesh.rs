//! Affine simplicial meshes with full subsimplex incidence.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::{self, Mat3, Vec3, ZERO33};
#[allow(unused_imports)] // float methods only live in `core` on recent toolchains
use num_traits::Float;
use crate::{Error, Result};

/// Sorted vertex ids of a subsimplex, padded with `usize::MAX`.
pub type Key = [usize; 4];

pub const PAD: usize = usize::MAX;

/// Build a key from (possibly unsorted) global vertex ids.
pub fn key_of(verts: &[usize]) -> Key {
    let mut k = [PAD; 4];
    k[..verts.len()].copy_from_slice(verts);
    k[..verts.len()].sort_unstable();
    k
}

pub fn key_len(k: &Key) -> usize {
    k.iter().take_while(|&&v| v != PAD).count()
}

/// All subsimplices of one dimension.
#[derive(Debug, Clone, Default)]
pub struct EntityTable {
    pub verts: Vec<Key>,
    pub boundary: Vec<bool>,
    /// Elements containing the entity, ascending.
    pub cells: Vec<Vec<usize>>,
    index: BTreeMap<Key, usize>,
}

impl EntityTable {
    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn find(&self, key: &Key) -> Option<usize> {
        self.index.get(key).copied()
    }
}

/// Affine map from the reference simplex onto an element.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub origin: Vec3,
    /// Columns are the edge vectors `v_i - v_0`.
    pub jac: Mat3,
    pub det: f64,
    pub jac_inv: Mat3,
    /// Gradients of the barycentric coordinates.
    pub grad_lambda: [Vec3; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RingEntry {
    pub elem: usize,
    pub facet_plus: usize,
    pub facet_minus: usize,
}

/// Elements around an interior bone, ordered by crossing shared facets.
#[derive(Debug, Clone)]
pub struct BoneRing {
    pub bone: usize,
    pub entries: Vec<RingEntry>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<Vec3>,
    pub elements: Vec<[usize; 4]>,
    maps: Vec<AffineMap>,
    /// `entities[s]` lists the `s`-dimensional subsimplices.
    entities: Vec<EntityTable>,
}

impl Mesh {
    /// Build a mesh; element orientation is normalised to positive volume.
    pub fn new(dim: usize, vertices: Vec<Vec3>, elements: Vec<[usize; 4]>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        let mut elements = elements;
        let mut maps = Vec::with_capacity(elements.len());
        for (e, el) in elements.iter_mut().enumerate() {
            if el[..=dim].iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Invalid("element references a missing vertex"));
            }
            let mut m = affine_map(dim, &vertices, el);
            if m.det < 0.0 {
                el.swap(0, 1);
                m = affine_map(dim, &vertices, el);
            }
            if !(m.det > 0.0) {
                return Err(Error::DegenerateElement(e));
            }
            maps.push(m);
        }

        let mut entities: Vec<EntityTable> = (0..=dim).map(|_| EntityTable::default()).collect();
        for (e, el) in elements.iter().enumerate() {
            for mask in 1u32..(1 << (dim + 1)) {
                let local: Vec<usize> = (0..=dim).filter(|i| mask & (1 << i) != 0).collect();
                let s = local.len() - 1;
                let gl: Vec<usize> = local.iter().map(|&i| el[i]).collect();
                let key = key_of(&gl);
                let table = &mut entities[s];
                let id = match table.index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = table.verts.len();
                        table.index.insert(key, id);
                        table.verts.push(key);
                        table.boundary.push(false);
                        table.cells.push(Vec::new());
                        id
                    }
                };
                table.cells[id].push(e);
            }
        }
        for f in 0..entities[dim - 1].len() {
            let n = entities[dim - 1].cells[f].len();
            if n > 2 {
                return Err(Error::NonManifold(n));
            }
            if n == 1 {
                let fv = entities[dim - 1].verts[f];
                for mask in 1u32..(1 << dim) {
                    let sub: Vec<usize> = (0..dim).filter(|i| mask & (1 << i) != 0).map(|i| fv[i]).collect();
                    let s = sub.len() - 1;
                    let id = entities[s].find(&key_of(&sub)).expect("subentity registered");
                    entities[s].boundary[id] = true;
                }
            }
        }
        Ok(Self {
            dim,
            vertices,
            elements,
            maps,
            entities,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Global vertex ids of an element (length `dim + 1`).
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..=self.dim]
    }

    pub fn reference_map(&self, e: usize) -> &AffineMap {
        &self.maps[e]
    }

    pub fn entities(&self, s: usize) -> &EntityTable {
        &self.entities[s]
    }

    pub fn facets(&self) -> &EntityTable {
        &self.entities[self.dim - 1]
    }

    pub fn bones(&self) -> &EntityTable {
        &self.entities[self.dim - 2]
    }

    pub fn edges(&self) -> &EntityTable {
        &self.entities[1]
    }

    /// Vertex ids of entity `(s, id)` in sorted order.
    pub fn entity_vertices(&self, s: usize, id: usize) -> &[usize] {
        &self.entities[s].verts[id][..=s]
    }

    /// Local index in element `e` of global vertex `v`.
    pub fn local_index(&self, e: usize, v: usize) -> Option<usize> {
        self.element(e).iter().position(|&w| w == v)
    }

    /// Local index of the vertex of `e` opposite facet `f`.
    pub fn opposite_local(&self, e: usize, f: usize) -> usize {
        let fv = self.entity_vertices(self.dim - 1, f);
        self.element(e)
            .iter()
            .position(|v| !fv.contains(v))
            .expect("facet belongs to element")
    }

    /// Barycentric coordinates in element `e` of a point given by weights on global vertices.
    pub fn bary_from_vertex_weights(&self, e: usize, verts: &[usize], w: &[f64]) -> [f64; 4] {
        let mut b = [0.0; 4];
        for (v, wi) in verts.iter().zip(w) {
            let l = self.local_index(e, *v).expect("vertex in element");
            b[l] += wi;
        }
        b
    }

    /// Physical coordinates of a barycentric point in element `e`.
    pub fn point(&self, e: usize, bary: &[f64; 4]) -> Vec3 {
        let mut x = [0.0; 3];
        for (i, &v) in self.element(e).iter().enumerate() {
            for (c, xc) in x.iter_mut().enumerate().take(self.dim) {
                *xc += bary[i] * self.vertices[v][c];
            }
        }
        x
    }

    /// Euclidean volume of element `e`.
    pub fn volume(&self, e: usize) -> f64 {
        let f = if self.dim == 2 { 2.0 } else { 6.0 };
        self.maps[e].det / f
    }

    /// Largest element diameter.
    pub fn h_max(&self) -> f64 {
        let mut h: f64 = 0.0;
        for e in 0..self.num_elements() {
            let el = self.element(e);
            for i in 0..el.len() {
                for j in i + 1..el.len() {
                    let d = tensor::sub(&self.vertices[el[i]], &self.vertices[el[j]]);
                    h = h.max(tensor::dot(&d, &d, 3).sqrt());
                }
            }
        }
        h
    }

    /// Euclidean unit normal of facet `f` pointing into element `e`.
    pub fn inward_normal(&self, e: usize, f: usize) -> Vec3 {
        let l = self.opposite_local(e, f);
        let g = self.maps[e].grad_lambda[l];
        let n = tensor::dot(&g, &g, self.dim).sqrt();
        [g[0] / n, g[1] / n, g[2] / n]
    }

    /// Ordered rings of elements around every interior bone.
    pub fn enumerate_bones(&self) -> Result<Vec<BoneRing>> {
        let bones = self.bones();
        let mut rings = Vec::new();
        for b in 0..bones.len() {
            if bones.boundary[b] {
                continue;
            }
            rings.push(self.bone_ring(b)?);
        }
        Ok(rings)
    }

    /// The two facets of element `e` containing bone `b`.
    pub fn facets_at_bone(&self, e: usize, b: usize) -> [usize; 2] {
        let dim = self.dim;
        let bv = self.entity_vertices(dim - 2, b);
        let el = self.element(e);
        let mut out = [0usize; 2];
        let mut n = 0;
        for skip in 0..=dim {
            if bv.contains(&el[skip]) {
                continue;
            }
            let fv: Vec<usize> = (0..=dim).filter(|&i| i != skip).map(|i| el[i]).collect();
            out[n] = self.facets().find(&key_of(&fv)).expect("facet registered");
            n += 1;
        }
        debug_assert_eq!(n, 2);
        out
    }

    fn bone_ring(&self, b: usize) -> Result<BoneRing> {
        let cells = &self.bones().cells[b];
        let start = cells[0];
        let [f0, f1] = self.facets_at_bone(start, b);
        let mut entries = vec![RingEntry {
            elem: start,
            facet_plus: f1,
            facet_minus: f0,
        }];
        let mut cur = start;
        let mut cross = f1;
        loop {
            let fc = &self.facets().cells[cross];
            if fc.len() != 2 {
                return Err(Error::OpenRing(b));
            }
            let next = if fc[0] == cur { fc[1] } else { fc[0] };
            if next == start {
                break;
            }
            let [a, c] = self.facets_at_bone(next, b);
            let other = if a == cross { c } else { a };
            entries.push(RingEntry {
                elem: next,
                facet_plus: other,
                facet_minus: cross,
            });
            if entries.len() > cells.len() {
                return Err(Error::OpenRing(b));
            }
            cur = next;
            cross = other;
        }
        if entries.len() != cells.len() || cross != f0 {
            return Err(Error::OpenRing(b));
        }
        Ok(BoneRing { bone: b, entries })
    }
}

fn affine_map(dim: usize, verts: &[Vec3], el: &[usize; 4]) -> AffineMap {
    let origin = verts[el[0]];
    let mut jac = ZERO33;
    for c in 0..dim {
        let v = verts[el[c + 1]];
        for r in 0..dim {
            jac[r][c] = v[r] - origin[r];
        }
    }
    let det = tensor::det(&jac, dim);
    let jac_inv = tensor::inverse(&jac, dim).unwrap_or(ZERO33);
    let mut grad_lambda = [[0.0; 3]; 4];
    for i in 0..dim {
        grad_lambda[i + 1] = jac_inv[i];
    }
    for c in 0..dim {
        grad_lambda[0][c] = -(1..=dim).map(|i| grad_lambda[i][c]).sum::<f64>();
    }
    AffineMap {
        origin,
        jac,
        det,
        jac_inv,
        grad_lambda,
    }
}

/// Diameter of the elements in the structured family before perturbation.
pub fn structured_h(level: usize, dim: usize) -> f64 {
    (dim as f64).sqrt() * 2f64.powi(1 - level as i32)
}

/// Uniform grid of `(-1,1)^dim` split into simplices (Kuhn in 3D, one
/// diagonal per square in 2D), with interior vertices perturbed by uniform
/// samples in `[-a·h, a·h]` per coordinate.
pub fn build_structured_cube_mesh(level: usize, dim: usize, perturb_amplitude: f64, seed: u64) -> Result<Mesh> {
    if !(2..=3).contains(&dim) {
        return Err(Error::Dimension(dim));
    }
    if !(perturb_amplitude >= 0.0) {
        return Err(Error::Invalid("perturbation amplitude must be non-negative"));
    }
    let n = 1usize << level;
    let np = n + 1;
    let spacing = 2.0 / n as f64;
    let nz = if dim == 3 { np } else { 1 };
    let idx = |i: usize, j: usize, k: usize| i + np * (j + np * k);
    let mut vertices = Vec::with_capacity(np * np * nz);
    let mut interior = Vec::with_capacity(np * np * nz);
    for k in 0..nz {
        for j in 0..np {
            for i in 0..np {
                let z = if dim == 3 { -1.0 + spacing * k as f64 } else { 0.0 };
                vertices.push([-1.0 + spacing * i as f64, -1.0 + spacing * j as f64, z]);
                let inner = |t: usize| t > 0 && t < n;
                interior.push(inner(i) && inner(j) && (dim == 2 || inner(k)));
            }
        }
    }
    let mut elements = Vec::new();
    if dim == 2 {
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (idx(i, j, 0), idx(i + 1, j, 0), idx(i + 1, j + 1, 0), idx(i, j + 1, 0));
                elements.push([a, b, c, PAD]);
                elements.push([a, c, d, PAD]);
            }
        }
    } else {
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for p in PERMS {
                        let mut c = [i, j, k];
                        let mut el = [idx(c[0], c[1], c[2]), 0, 0, 0];
                        for (s, &ax) in p.iter().enumerate() {
                            c[ax] += 1;
                            el[s + 1] = idx(c[0], c[1], c[2]);
                        }
                        elements.push(el);
                    }
                }
            }
        }
    }
    let h = structured_h(level, dim);
    let mut amp = perturb_amplitude;
    const ATTEMPTS: usize = 8;
    for _ in 0..=ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut moved = vertices.clone();
        if amp > 0.0 {
            for (v, &inner) in moved.iter_mut().zip(&interior) {
                if inner {
                    for c in v.iter_mut().take(dim) {
                        *c += rng.random_range(-1.0..=1.0) * amp * h;
                    }
                }
            }
        }
        let flipped = elements.iter().any(|el| {
            let a = affine_map(dim, &vertices, el).det;
            let b = affine_map(dim, &moved, el).det;
            a.signum() != b.signum() || b.abs() < 1e-12 * a.abs()
        });
        if flipped {
            amp *= 0.5;
            continue;
        }
        return Mesh::new(dim, moved, elements);
    }
    Err(Error::PerturbationFailed(ATTEMPTS))
}
