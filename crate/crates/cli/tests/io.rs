use std::io::BufReader;
use std::process::Command;

use distcurv::mesh::build_structured_cube_mesh;
use distcurv_cli::io::{read_coefficients, read_mesh, write_coefficients, write_mesh};
use distcurv_cli::Error;

#[test]
fn mesh_round_trip() {
    for dim in [2, 3] {
        let mesh = build_structured_cube_mesh(1, dim, 0.08, 4).unwrap();
        let mut buf = Vec::new();
        write_mesh(&mesh, &mut buf).unwrap();
        let back = read_mesh(BufReader::new(&buf[..]), "mem").unwrap();
        assert_eq!(back.vertices, mesh.vertices);
        assert_eq!(back.num_elements(), mesh.num_elements());
        for e in 0..mesh.num_elements() {
            assert_eq!(back.element(e), mesh.element(e));
        }
    }
}

#[test]
fn mesh_errors_carry_line_numbers() {
    let text = "2 3 1\n0 0\n1 0\n\n0 x\n0 1 2\n";
    match read_mesh(BufReader::new(text.as_bytes()), "bad.mesh") {
        Err(Error::Parse { path, line, .. }) => {
            assert_eq!(path, "bad.mesh");
            assert_eq!(line, 5);
        }
        other => panic!("{other:?}"),
    }
    let text = "3 4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 1 2 7\n";
    assert!(matches!(read_mesh(BufReader::new(text.as_bytes()), "m"), Err(Error::Parse { line: 6, .. })));
    assert!(read_mesh(BufReader::new("4 1 1\n".as_bytes()), "m").is_err());
}

#[test]
fn coefficients_round_trip() {
    let c = vec![1.0, -2.5e-17, 3.25, f64::MIN_POSITIVE, 1.0 / 3.0];
    let mut buf = Vec::new();
    write_coefficients(&c, &mut buf).unwrap();
    assert_eq!(read_coefficients(&buf[..], "mem").unwrap(), c);
    let gap = "dof,value\n0,1.0\n2,3.0\n";
    assert!(matches!(read_coefficients(gap.as_bytes(), "gap"), Err(Error::Parse { line: 3, .. })));
}

fn distcurv(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_distcurv")).args(args).output().unwrap()
}

#[test]
fn convergence_output_is_reproducible() {
    let args = ["convergence", "--dim", "2", "--levels", "0,1", "--order", "0", "--functional", "gauss", "--seed", "9"];
    let a = distcurv(&args);
    let b = distcurv(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,h,ndof,error,order,config"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn files_written_by_one_verb_feed_another() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("level1.mesh");
    let coeffs = dir.path().join("g.csv");
    let (m, c) = (mesh.to_str().unwrap(), coeffs.to_str().unwrap());
    assert!(distcurv(&["mesh", "--dim", "2", "--levels", "1", "--out", m]).status.success());
    assert!(distcurv(&["interp", "--dim", "2", "--mesh", m, "--out", c]).status.success());
    let from_files = distcurv(&["curvature", "--dim", "2", "--functional", "gauss", "--mesh", m, "--coeffs", c]);
    let direct = distcurv(&["curvature", "--dim", "2", "--levels", "1", "--functional", "gauss"]);
    assert!(from_files.status.success(), "{}", String::from_utf8_lossy(&from_files.stderr));
    assert_eq!(from_files.stdout, direct.stdout);
}

#[test]
fn bad_arguments_exit_with_two() {
    let out = distcurv(&["convergence", "--functional", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let out = distcurv(&["convergence", "--levels", "2,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flipped_edge_jump_fails_the_linearization_check() {
    let ok = distcurv(&["lincheck", "--dim", "2", "--levels", "1"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = distcurv(&["lincheck", "--dim", "2", "--levels", "1", "--flip-edge-jump"]);
    assert_eq!(bad.status.code(), Some(1));
}
