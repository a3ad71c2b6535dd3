//! Convergence sweeps, probe studies and the linearization check.

use std::fmt::Write as _;

use distcurv::curvature::{
    assemble_against_basis, test_directions, volume_functional, AssembledFunctional, Assembly, BasisAssembler, Evaluate,
    Functional, MatrixTest, QuadOrders, ScalarTest, TestField,
};
use distcurv::fields::{Combination, SmoothField, TensorField};
use distcurv::linearization::{a_form_terms, b_form, inc_functional, probe, MetricPath, Probe, TQuadrature, PARTS};
use distcurv::manufactured::{benchmark_2d, benchmark_3d, benchmark_q_exact, flat, GraphMetric};
use distcurv::mesh::{build_structured_cube_mesh, Mesh};
use distcurv::regge::{canonical_interpolate, LagrangeField, ReggeField, Space};
use distcurv::tensor::{self, Vec3, ZERO33};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::dualnorm::{hminus2_norm, HhjBiharmonic};
use crate::error::{Error, Result};

/// Default perturbation amplitude, `2^{-3.5}` of the mesh size.
pub const DEFAULT_PERTURB: f64 = 0.088_388_347_648_318_44;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalKind {
    Gauss,
    Scalar,
    Ricci,
    Einstein,
    Qop,
    Riemann,
    Inc,
    Probes,
}

impl FunctionalKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "gauss" => Self::Gauss,
            "scalar" => Self::Scalar,
            "ricci" => Self::Ricci,
            "einstein" => Self::Einstein,
            "qop" => Self::Qop,
            "riemann" => Self::Riemann,
            "inc" => Self::Inc,
            "probes" => Self::Probes,
            _ => return Err(Error::Config(format!("unknown functional `{s}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Gauss => "gauss",
            Self::Scalar => "scalar",
            Self::Ricci => "ricci",
            Self::Einstein => "einstein",
            Self::Qop => "qop",
            Self::Riemann => "riemann",
            Self::Inc => "inc",
            Self::Probes => "probes",
        }
    }

    /// The curvature functional behind a selector, if it is one.
    pub fn curvature(self) -> Option<Functional> {
        Some(match self {
            Self::Gauss => Functional::Gauss,
            Self::Scalar => Functional::Scalar,
            Self::Ricci => Functional::Ricci,
            Self::Einstein => Functional::Einstein,
            Self::Qop => Functional::CurvatureOperator,
            Self::Riemann => Functional::Riemann,
            Self::Inc | Self::Probes => return None,
        })
    }
}

/// Exact metric the discrete metrics approximate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Graph of `½|x|² - (1/12)Σ x_i⁴`.
    Benchmark,
    Flat,
}

impl MetricKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "benchmark" => Ok(Self::Benchmark),
            "flat" => Ok(Self::Flat),
            _ => Err(Error::Config(format!("unknown metric `{s}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Benchmark => "benchmark",
            Self::Flat => "flat",
        }
    }

    pub fn graph(self, dim: usize) -> GraphMetric {
        match (self, dim) {
            (Self::Flat, _) => flat(dim),
            (Self::Benchmark, 2) => benchmark_2d(),
            _ => benchmark_3d(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dim: usize,
    pub levels: Vec<usize>,
    pub order: usize,
    /// Lagrange order of the test space; `order + 2` when unset.
    pub test_order: Option<usize>,
    pub perturb: f64,
    pub seed: u64,
    /// Points of the Gauss rule in the path parameter.
    pub gp: Vec<usize>,
    pub functional: FunctionalKind,
    pub metric: MetricKind,
    /// Sign of the edge-jump term of the `b` form. Only flipped to check that
    /// the linearization test notices.
    pub edge_sign: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            levels: vec![0, 1, 2],
            order: 1,
            test_order: None,
            perturb: DEFAULT_PERTURB,
            seed: 1,
            gp: vec![5],
            functional: FunctionalKind::Qop,
            metric: MetricKind::Benchmark,
            edge_sign: 1.0,
        }
    }
}

impl RunConfig {
    pub fn test_order(&self) -> usize {
        self.test_order.unwrap_or(self.order + 2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(Error::Config(format!("dimension {} is not 2 or 3", self.dim)));
        }
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("levels must be nonempty and strictly ascending".into()));
        }
        if self.test_order() == 0 {
            return Err(Error::Config("test order must be at least 1".into()));
        }
        if self.gp.is_empty() || self.gp.contains(&0) {
            return Err(Error::Config("need at least one positive path quadrature size".into()));
        }
        if !(self.perturb >= 0.0) {
            return Err(Error::Config("perturbation must be nonnegative".into()));
        }
        Ok(())
    }

    /// Short digest identifying every field that influences results.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!(
            "dim={};levels={:?};order={};test_order={};perturb={:e};seed={};gp={:?};functional={};metric={};edge_sign={}",
            self.dim,
            self.levels,
            self.order,
            self.test_order(),
            self.perturb,
            self.seed,
            self.gp,
            self.functional.name(),
            self.metric.name(),
            self.edge_sign
        ));
        h.finalize().iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn mesh(&self, level: usize) -> Result<Mesh> {
        Ok(build_structured_cube_mesh(level, self.dim, self.perturb, self.seed)?)
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    pub error: f64,
    pub order: Option<f64>,
    /// `[F1, F2, F3]` for probe runs.
    pub probes: Option<[f64; 3]>,
    pub gp: Option<usize>,
}

fn with_level<T>(level: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Level {
        level,
        source: Box::new(e),
    })
}

/// Observed order between consecutive rows, using the actual mesh sizes.
pub fn observed_order(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

fn smooth_metric<'m>(mesh: &'m Mesh, gm: GraphMetric) -> SmoothField<'m> {
    SmoothField::new(mesh, move |x| gm.jet(x))
}

/// Exact curvature functional of the smooth metric against the same basis.
fn exact_functional(cfg: &RunConfig, func: Functional, mesh: &Mesh, space: &Space<'_>, orders: QuadOrders) -> Result<AssembledFunctional> {
    let dim = cfg.dim;
    let gm = cfg.metric.graph(dim);
    let dirs = test_directions(func.scalar_tests(dim), dim);
    let mut sink = BasisAssembler::new(space, dirs);
    match (cfg.metric, func, dim) {
        (MetricKind::Flat, _, _) => {}
        (_, Functional::Gauss, 2) => {
            let density = |x: &Vec3| {
                let mut k = ZERO33;
                k[0][0] = gm.gauss_exact(x) * gm.det(x).sqrt();
                k
            };
            volume_functional(mesh, orders.element, &density, &mut sink)?;
        }
        (_, Functional::CurvatureOperator, 3) => {
            let density = |x: &Vec3| tensor::scale(&benchmark_q_exact(x), gm.det(x).sqrt());
            volume_functional(mesh, orders.element, &density, &mut sink)?;
        }
        _ => {
            // Only the element terms survive for a smooth metric.
            let g = smooth_metric(mesh, gm);
            let asm = Assembly::new(&g, orders)?;
            func.run(&asm, &mut sink)?;
        }
    }
    Ok(sink.finish())
}

/// Assembled error functional `F(g_h) - F(g)` on one level.
pub fn curvature_error(cfg: &RunConfig, func: Functional, mesh: &Mesh, gh: &dyn TensorField, space: &Space<'_>) -> Result<AssembledFunctional> {
    let orders = QuadOrders::for_order(cfg.order);
    let asm = Assembly::new(gh, orders)?;
    let mut f = assemble_against_basis(func, &asm, space)?;
    let ex = exact_functional(cfg, func, mesh, space, orders)?;
    f.add_scaled(-1.0, &ex);
    Ok(f)
}

/// Canonical Regge interpolant of the configured metric.
pub fn interpolate<'s, 'm>(cfg: &RunConfig, space: &'s Space<'m>) -> Result<ReggeField<'s, 'm>> {
    let gm = cfg.metric.graph(cfg.dim);
    Ok(canonical_interpolate(space, |x| gm.value(x))?)
}

fn fill_orders(rows: &mut [LevelResult]) {
    for i in 1..rows.len() {
        let (a, b) = (&rows[i - 1], &rows[i]);
        if a.gp == b.gp && a.error > 0.0 && b.error > 0.0 {
            rows[i].order = Some(observed_order(a.error, b.error, a.h, b.h));
        }
    }
}

/// `H⁻²` error of a curvature functional per level.
pub fn run_convergence(cfg: &RunConfig) -> Result<Vec<LevelResult>> {
    cfg.validate()?;
    let func = cfg
        .functional
        .curvature()
        .ok_or_else(|| Error::Config(format!("`{}` is not a curvature functional", cfg.functional.name())))?;
    let mut rows = Vec::new();
    for &level in &cfg.levels {
        let row = with_level(level, (|| {
            let mesh = cfg.mesh(level)?;
            let rs = Space::regge(&mesh, cfg.order);
            let gh = interpolate(cfg, &rs)?;
            let solver = HhjBiharmonic::new(&mesh, cfg.test_order())?;
            let err = curvature_error(cfg, func, &mesh, &gh, solver.displacement_space())?;
            let rep = hminus2_norm(&err, &solver)?;
            Ok(LevelResult {
                level,
                h: mesh.h_max(),
                ndof: rs.ndofs(),
                error: rep.total,
                order: None,
                probes: None,
                gp: None,
            })
        })())?;
        rows.push(row);
    }
    if cfg.metric != MetricKind::Flat {
        fill_orders(&mut rows);
    }
    Ok(rows)
}

/// `H⁻²` norms of the probe functionals, one row per level and path rule.
pub fn run_probes(cfg: &RunConfig) -> Result<Vec<LevelResult>> {
    cfg.validate()?;
    if cfg.dim != 3 {
        return Err(Error::Config("probe functionals are three-dimensional".into()));
    }
    let orders = QuadOrders::for_order(cfg.order);
    let mut by_gp: Vec<Vec<LevelResult>> = vec![Vec::new(); cfg.gp.len()];
    for &level in &cfg.levels {
        let rows = with_level(level, (|| {
            let mesh = cfg.mesh(level)?;
            let rs = Space::regge(&mesh, cfg.order);
            let gh = interpolate(cfg, &rs)?;
            let g = smooth_metric(&mesh, cfg.metric.graph(3));
            let path = MetricPath::new(&g, &gh);
            let solver = HhjBiharmonic::new(&mesh, cfg.test_order())?;
            let mut rows = Vec::new();
            for &n in &cfg.gp {
                let tq = TQuadrature::gauss(n);
                let mut vals = [0.0; 3];
                for (v, which) in vals.iter_mut().zip([Probe::F1, Probe::F2, Probe::F3]) {
                    let mut sink = BasisAssembler::new(solver.displacement_space(), test_directions(false, 3));
                    probe(&path, which, &tq, orders, &mut sink)?;
                    *v = hminus2_norm(&sink.finish(), &solver)?.total;
                }
                rows.push(LevelResult {
                    level,
                    h: mesh.h_max(),
                    ndof: rs.ndofs(),
                    error: vals[2],
                    order: None,
                    probes: Some(vals),
                    gp: Some(n),
                });
            }
            Ok(rows)
        })())?;
        for (acc, r) in by_gp.iter_mut().zip(rows) {
            acc.push(r);
        }
    }
    let mut out = Vec::new();
    for mut rows in by_gp {
        fill_orders(&mut rows);
        out.extend(rows);
    }
    Ok(out)
}

/// Outcome of the linearization check.
#[derive(Debug, Clone)]
pub struct LincheckReport {
    pub dim: usize,
    pub eps: Vec<f64>,
    /// `|central difference - (a + b)/4|` per step.
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
    /// Value of `a` (identically zero in two dimensions).
    pub a: f64,
    /// Relative deviation of `b` from `-2 ĩnc`.
    pub b_inc_rel: f64,
    pub passed: bool,
}

impl LincheckReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim {}", self.dim);
        for (i, (e, err)) in self.eps.iter().zip(&self.errors).enumerate() {
            let o = if i == 0 { String::from("-") } else { format!("{:.3}", self.orders[i - 1]) };
            let _ = writeln!(s, "eps {e:.3e} error {err:.3e} order {o}");
        }
        let _ = writeln!(s, "a {:.3e}", self.a);
        let _ = writeln!(s, "b vs -2 inc relative {:.3e}", self.b_inc_rel);
        let _ = writeln!(s, "{}", if self.passed { "PASS" } else { "FAIL" });
        s
    }
}

/// Minimum ε-order accepted by [`run_lincheck`].
pub const LINCHECK_MIN_ORDER: f64 = 1.8;

fn random_coeffs(r: &mut ChaCha8Rng, boundary: &[bool], skip_boundary: bool) -> Vec<f64> {
    boundary
        .iter()
        .map(|&b| if b && skip_boundary { 0.0 } else { r.random_range(-1.0..1.0) })
        .collect()
}

/// Central-difference check of `d/dε F(g_h + εσ)(U) = (a + b)/4` for the
/// curvature operator (Gauss curvature in 2D) on the first configured level,
/// plus the identity `b = -2 ĩnc`.
pub fn run_lincheck(cfg: &RunConfig) -> Result<LincheckReport> {
    cfg.validate()?;
    let dim = cfg.dim;
    let level = cfg.levels[0];
    let mesh = cfg.mesh(level)?;
    let rs = Space::regge(&mesh, cfg.order);
    let g = interpolate(cfg, &rs)?;
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Small perturbation keeps g + εσ positive.
    let sigma = ReggeField::new(&rs, random_coeffs(&mut r, &rs.boundary, false).iter().map(|c| 0.2 * c).collect());
    let orders = QuadOrders {
        element: 12,
        facet: 12,
        bone: 12,
    };
    let ls = Space::lagrange(&mesh, cfg.order + 1);
    let v = LagrangeField {
        space: &ls,
        coeffs: random_coeffs(&mut r, &ls.boundary, true),
    };
    let u = ReggeField::new(&rs, random_coeffs(&mut r, &rs.boundary, true));
    let (scalar, matrix) = (ScalarTest(&v), MatrixTest(&u));
    let test: &dyn TestField = if dim == 2 { &scalar } else { &matrix };
    let func = if dim == 2 { Functional::Gauss } else { Functional::CurvatureOperator };

    let value = |e: f64| -> Result<f64> {
        let ge = Combination::new(vec![(1.0, &g as &dyn TensorField), (e, &sigma)]);
        let asm = Assembly::new(&ge, orders)?;
        let mut ev = Evaluate::new(test);
        func.run(&asm, &mut ev)?;
        Ok(ev.sum)
    };
    let a = a_form_terms(&g, &sigma, test, orders)?.total();
    let asm = Assembly::new(&g, orders)?;
    let b_with = |sign: f64| -> Result<f64> {
        let mut t = 0.0;
        for part in PARTS {
            let mut ev = Evaluate::new(test);
            b_form(&asm, &sigma, part, sign, &mut ev)?;
            t += ev.sum;
        }
        Ok(t)
    };
    let b = b_with(cfg.edge_sign)?;
    let exact = 0.25 * (a + b);
    let eps = vec![1e-2, 5e-3, 2.5e-3];
    let mut errors = Vec::new();
    for &e in &eps {
        errors.push(((value(e)? - value(-e)?) / (2.0 * e) - exact).abs());
    }
    let orders_eps: Vec<f64> = (1..eps.len()).map(|i| observed_order(errors[i - 1], errors[i], eps[i - 1], eps[i])).collect();

    let inc = inc_functional(&g, &sigma, test, orders)?;
    let b_ref = b_with(1.0)?;
    let b_inc_rel = (b_ref + 2.0 * inc).abs() / b_ref.abs().max(f64::MIN_POSITIVE);

    let a_ok = dim == 3 || a == 0.0;
    let passed = a_ok && b_inc_rel <= 1e-10 && orders_eps.iter().all(|&o| o >= LINCHECK_MIN_ORDER);
    Ok(LincheckReport {
        dim,
        eps,
        errors,
        orders: orders_eps,
        a,
        b_inc_rel,
        passed,
    })
}

/// Assembled curvature functional of the interpolated metric on one level.
pub fn assemble_curvature(cfg: &RunConfig, mesh: &Mesh, gh: &dyn TensorField) -> Result<AssembledFunctional> {
    let func = cfg
        .functional
        .curvature()
        .ok_or_else(|| Error::Config(format!("`{}` is not a curvature functional", cfg.functional.name())))?;
    let space = Space::lagrange(mesh, cfg.test_order());
    let asm = Assembly::new(gh, QuadOrders::for_order(cfg.order))?;
    Ok(assemble_against_basis(func, &asm, &space)?)
}
