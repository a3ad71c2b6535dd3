use std::f64::consts::PI;

use distcurv::curvature::{test_directions, volume_functional, AssembledFunctional, BasisAssembler};
use distcurv::mesh::{build_structured_cube_mesh, Mesh};
use distcurv::quadrature::quad_rule;
use distcurv::regge::Space;
use distcurv::tensor::{Vec3, ZERO33};
use distcurv_cli::dualnorm::{hminus2_norm, sparse_solve, HhjBiharmonic, MatrixKind, SparseSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar_load(mesh: &Mesh, m: usize, f: impl Fn(&Vec3) -> f64) -> AssembledFunctional {
    let space = Space::lagrange(mesh, m);
    let mut sink = BasisAssembler::new(&space, test_directions(true, mesh.dim));
    let density = |x: &Vec3| {
        let mut k = ZERO33;
        k[0][0] = f(x);
        k
    };
    volume_functional(mesh, 2 * m + 10, &density, &mut sink).unwrap();
    sink.finish()
}

fn random_functional(r: &mut ChaCha8Rng, mesh: &Mesh, m: usize) -> AssembledFunctional {
    let space = Space::lagrange(mesh, m);
    let dirs = test_directions(false, mesh.dim);
    let rows = space.interior_dofs();
    let values = (0..rows.len() * dirs.len()).map(|_| r.random_range(-1.0..1.0)).collect();
    AssembledFunctional {
        directions: dirs,
        dofs: rows,
        values,
    }
}

#[test]
fn identity_returns_rhs() {
    let mut s = SparseSystem::new(5, MatrixKind::Spd);
    for i in 0..5 {
        s.push(i, i, 1.0);
    }
    let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
    assert_eq!(sparse_solve(&s, &b).unwrap(), b);
}

#[test]
fn saddle_two_by_two() {
    // [[2,1],[1,0]]⁻¹ = [[0,1],[1,-2]]
    let mut s = SparseSystem::new(2, MatrixKind::Indefinite);
    s.push(0, 0, 2.0);
    s.push(0, 1, 1.0);
    s.push(1, 0, 1.0);
    let x = sparse_solve(&s, &[1.0, 2.0]).unwrap();
    assert!((x[0] - 2.0).abs() < 1e-14 && (x[1] + 3.0).abs() < 1e-14, "{x:?}");
}

#[test]
fn random_spd_residual() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let n = 100;
    let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let mut s = SparseSystem::new(n, MatrixKind::Spd);
    for i in 0..n {
        for j in 0..n {
            let v: f64 = (0..n).map(|k| b[k][i] * b[k][j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
            s.push(i, j, v);
        }
    }
    let rhs: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let x = sparse_solve(&s, &rhs).unwrap();
    let ax = s.apply(&x);
    let res = ax.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let nb = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(res <= 1e-10 * nb, "{res}");
}

#[test]
fn zero_load_gives_zero() {
    let mesh = build_structured_cube_mesh(1, 3, 0.0, 0).unwrap();
    let solver = HhjBiharmonic::new(&mesh, 2).unwrap();
    let f = AssembledFunctional {
        directions: test_directions(false, 3),
        dofs: solver.displacement_space().interior_dofs(),
        values: vec![0.0; solver.displacement_space().interior_dofs().len() * 6],
    };
    let rep = hminus2_norm(&f, &solver).unwrap();
    assert_eq!(rep.total, 0.0);
    assert_eq!(rep.components.len(), 6);
}

#[test]
fn clamped_bubble_is_reproduced() {
    // u = (1-x²)²(1-y²)² has degree 8 and a degree-6 Hessian.
    let u = |x: &Vec3| (1.0 - x[0] * x[0]).powi(2) * (1.0 - x[1] * x[1]).powi(2);
    let bilap = |x: &Vec3| {
        let (a, b) = (x[0], x[1]);
        let p = (1.0 - a * a).powi(2);
        let q = (1.0 - b * b).powi(2);
        let p2 = 12.0 * a * a - 4.0;
        let q2 = 12.0 * b * b - 4.0;
        24.0 * q + 2.0 * p2 * q2 + 24.0 * p
    };
    let mesh = build_structured_cube_mesh(1, 2, 0.1, 5).unwrap();
    let m = 8;
    let solver = HhjBiharmonic::new(&mesh, m).unwrap();
    let load = scalar_load(&mesh, m, bilap);
    let sol = solver.solve(&[load.component(0)]).unwrap().remove(0);
    let uh = solver.displacement(&sol.u);
    let rule = quad_rule(2, 6).unwrap();
    let mut err: f64 = 0.0;
    for e in 0..mesh.num_elements() {
        for q in &rule.points {
            err = err.max((distcurv::fields::ScalarField::value(&uh, e, q) - u(&mesh.point(e, q))).abs());
        }
    }
    assert!(err < 1e-9, "{err}");
}

#[test]
fn hybrid_matches_saddle_point_solve() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for (dim, level, m) in [(2, 2, 2), (2, 1, 3), (3, 1, 2)] {
        let mesh = build_structured_cube_mesh(level, dim, 0.15, 2).unwrap();
        let solver = HhjBiharmonic::new(&mesh, m).unwrap();
        let n = solver.displacement_space().interior_dofs().len();
        let load: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let hybrid = solver.solve(&[load.clone()]).unwrap().remove(0);
        let saddle = solver.solve_saddle(&load).unwrap();
        let scale = hybrid.u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in hybrid.u.iter().zip(&saddle) {
            assert!((a - b).abs() <= 1e-9 * scale, "dim {dim}: {a} vs {b}");
        }
    }
}

#[test]
fn norm_is_homogeneous_and_subadditive() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    let mesh = build_structured_cube_mesh(1, 3, 0.0, 0).unwrap();
    let solver = HhjBiharmonic::new(&mesh, 2).unwrap();
    for _ in 0..3 {
        let f = random_functional(&mut r, &mesh, 2);
        let g = random_functional(&mut r, &mesh, 2);
        let nf = hminus2_norm(&f, &solver).unwrap();
        let ng = hminus2_norm(&g, &solver).unwrap();
        let ssq: f64 = nf.components.iter().map(|c| c * c).sum();
        assert!((ssq.sqrt() - nf.total).abs() <= 1e-14 * nf.total);
        let mut fs = f.clone();
        fs.scale(-3.5);
        let ns = hminus2_norm(&fs, &solver).unwrap();
        assert!((ns.total - 3.5 * nf.total).abs() <= 1e-10 * ns.total);
        let mut sum = f.clone();
        sum.add_scaled(1.0, &g);
        let nsum = hminus2_norm(&sum, &solver).unwrap();
        assert!(nsum.total <= nf.total + ng.total + 1e-9);
    }
}

#[test]
fn fixed_functional_norm_is_mesh_independent() {
    let f = |x: &Vec3| (PI * x[0]).sin() * (PI * x[1]).sin();
    let norm = |level| {
        let mesh = build_structured_cube_mesh(level, 2, 0.0, 0).unwrap();
        let solver = HhjBiharmonic::new(&mesh, 3).unwrap();
        hminus2_norm(&scalar_load(&mesh, 3, f), &solver).unwrap().total
    };
    let (a, b) = (norm(2), norm(3));
    assert!((a - b).abs() <= 0.05 * b, "{a} {b}");
}

#[test]
fn displacement_converges_in_h1() {
    // u = sin²(πx) sin²(πy) is clamped on (-1,1)².
    let grad = |x: &Vec3| {
        let (sx, cx, sy, cy) = ((PI * x[0]).sin(), (PI * x[0]).cos(), (PI * x[1]).sin(), (PI * x[1]).cos());
        [2.0 * PI * sx * cx * sy * sy, 2.0 * PI * sy * cy * sx * sx, 0.0]
    };
    let bilap = |x: &Vec3| {
        let (ca, cb) = ((2.0 * PI * x[0]).cos(), (2.0 * PI * x[1]).cos());
        4.0 * PI.powi(4) * (4.0 * ca * cb - ca - cb)
    };
    let m = 2;
    let mut errs = Vec::new();
    for level in 2..=4 {
        let mesh = build_structured_cube_mesh(level, 2, 0.0, 0).unwrap();
        let solver = HhjBiharmonic::new(&mesh, m).unwrap();
        let sol = solver.solve(&[scalar_load(&mesh, m, bilap).component(0)]).unwrap().remove(0);
        let uh = solver.displacement(&sol.u);
        let rule = quad_rule(2, 8).unwrap();
        let mut e2 = 0.0;
        for e in 0..mesh.num_elements() {
            let jac = mesh.reference_map(e).det;
            for (q, w) in rule.points.iter().zip(&rule.weights) {
                let g = grad(&mesh.point(e, q));
                let gh = uh.jet(e, q).grad;
                e2 += w * jac * ((g[0] - gh[0]).powi(2) + (g[1] - gh[1]).powi(2));
            }
        }
        errs.push(e2.sqrt());
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= m as f64 - 0.5, "{errs:?}");
    }
}
