//! Small fixed-size tensors. Arrays are always sized for three dimensions;
//! in 2D the trailing entries stay zero and loops run to `dim`.

#[allow(unused_imports)] // float methods only live in `core` on recent toolchains
use num_traits::Float;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
pub type Tensor3 = [[[f64; 3]; 3]; 3];
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

pub const ZERO3: Vec3 = [0.0; 3];
pub const ZERO33: Mat3 = [[0.0; 3]; 3];
pub const ZERO333: Tensor3 = [[[0.0; 3]; 3]; 3];
pub const ZERO4: Tensor4 = [[[[0.0; 3]; 3]; 3]; 3];

/// Permutation symbol in three indices.
#[inline]
pub fn eps3(i: usize, j: usize, k: usize) -> f64 {
    let (i, j, k) = (i as i64, j as i64, k as i64);
    ((i - j) * (j - k) * (k - i) / 2) as f64
}

/// Permutation symbol in two indices.
#[inline]
pub fn eps2(i: usize, j: usize) -> f64 {
    j as f64 - i as f64
}

pub fn identity(dim: usize) -> Mat3 {
    let mut m = ZERO33;
    for (i, row) in m.iter_mut().enumerate().take(dim) {
        row[i] = 1.0;
    }
    m
}

pub fn det(a: &Mat3, dim: usize) -> f64 {
    match dim {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
    }
}

/// Inverse by cofactors; `None` if the determinant vanishes.
pub fn inverse(a: &Mat3, dim: usize) -> Option<Mat3> {
    let d = det(a, dim);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut r = ZERO33;
    match dim {
        1 => r[0][0] = 1.0 / d,
        2 => {
            r[0][0] = a[1][1] / d;
            r[0][1] = -a[0][1] / d;
            r[1][0] = -a[1][0] / d;
            r[1][1] = a[0][0] / d;
        }
        _ => {
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
                    let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
                    r[i][j] = (a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]) / d;
                }
            }
        }
    }
    Some(r)
}

pub fn matmul(a: &Mat3, b: &Mat3, dim: usize) -> Mat3 {
    let mut r = ZERO33;
    for i in 0..dim {
        for j in 0..dim {
            r[i][j] = (0..dim).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    r
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut r = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = a[j][i];
        }
    }
    r
}

pub fn matvec(a: &Mat3, x: &Vec3, dim: usize) -> Vec3 {
    let mut r = ZERO3;
    for i in 0..dim {
        r[i] = (0..dim).map(|k| a[i][k] * x[k]).sum();
    }
    r
}

pub fn dot(x: &Vec3, y: &Vec3, dim: usize) -> f64 {
    (0..dim).map(|i| x[i] * y[i]).sum()
}

/// Bilinear form `xᵀ a y`.
pub fn bilinear(a: &Mat3, x: &Vec3, y: &Vec3, dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += x[i] * a[i][j] * y[j];
        }
    }
    s
}

/// Frobenius contraction `Σ a_ij b_ij`.
pub fn frob(a: &Mat3, b: &Mat3, dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

pub fn trace(a: &Mat3, dim: usize) -> f64 {
    (0..dim).map(|i| a[i][i]).sum()
}

pub fn scale(a: &Mat3, s: f64) -> Mat3 {
    let mut r = *a;
    r.iter_mut().flatten().for_each(|x| *x *= s);
    r
}

pub fn add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut r = *a;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] += b[i][j];
        }
    }
    r
}

pub fn axpy(r: &mut Mat3, s: f64, a: &Mat3) {
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] += s * a[i][j];
        }
    }
}

/// Symmetrized outer product `(x⊗y + y⊗x)/2`.
pub fn sym_outer(x: &Vec3, y: &Vec3) -> Mat3 {
    let mut r = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = 0.5 * (x[i] * y[j] + y[i] * x[j]);
        }
    }
    r
}

pub fn outer(x: &Vec3, y: &Vec3) -> Mat3 {
    let mut r = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = x[i] * y[j];
        }
    }
    r
}

pub fn sub(x: &Vec3, y: &Vec3) -> Vec3 {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

pub fn sym_part(a: &Mat3) -> Mat3 {
    let mut r = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = 0.5 * (a[i][j] + a[j][i]);
        }
    }
    r
}

/// Positive definiteness through leading principal minors.
pub fn is_positive_definite(a: &Mat3, dim: usize) -> bool {
    (1..=dim).all(|d| det(a, d) > 0.0)
}

/// Unit symmetric direction `E_ab` numbered row-major over `a <= b`.
///
/// Off-diagonal directions carry `1/2` in both slots so that contracting
/// with a symmetric `M` gives `M_ab`.
pub fn sym_unit(dim: usize, c: usize) -> Mat3 {
    let (a, b) = sym_index(dim, c);
    let mut e = ZERO33;
    if a == b {
        e[a][a] = 1.0;
    } else {
        e[a][b] = 0.5;
        e[b][a] = 0.5;
    }
    e
}

/// Number of independent components of a symmetric `dim × dim` matrix.
pub fn sym_count(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// `(a, b)` pair of the `c`-th symmetric component, `a <= b`.
pub fn sym_index(dim: usize, c: usize) -> (usize, usize) {
    let mut k = 0;
    for a in 0..dim {
        for b in a..dim {
            if k == c {
                return (a, b);
            }
            k += 1;
        }
    }
    panic!("symmetric component {c} out of range for dim {dim}")
}

/// Contract a 4-tensor with all indices raised by `gi` against another.
pub fn inner4(a: &Tensor4, b: &Tensor4, gi: &Mat3, dim: usize) -> f64 {
    let raised = raise4(b, gi, dim);
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    s += a[i][j][k][l] * raised[i][j][k][l];
                }
            }
        }
    }
    s
}

/// Apply `gi` to every slot of a 4-tensor.
pub fn raise4(b: &Tensor4, gi: &Mat3, dim: usize) -> Tensor4 {
    let mut t = *b;
    for slot in 0..4 {
        let mut r = ZERO4;
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let idx = [i, j, k, l];
                        let mut s = 0.0;
                        for m in 0..dim {
                            let mut src = idx;
                            src[slot] = m;
                            s += gi[idx[slot]][m] * t[src[0]][src[1]][src[2]][src[3]];
                        }
                        r[i][j][k][l] = s;
                    }
                }
            }
        }
        t = r;
    }
    t
}

/// `A(x, y, z, w)` for a covariant 4-tensor.
pub fn eval4(a: &Tensor4, x: &Vec3, y: &Vec3, z: &Vec3, w: &Vec3, dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    s += a[i][j][k][l] * x[i] * y[j] * z[k] * w[l];
                }
            }
        }
    }
    s
}

/// Kulkarni–Nomizu product of two symmetric 2-tensors.
pub fn kulkarni_nomizu(h: &Mat3, k: &Mat3, dim: usize) -> Tensor4 {
    let mut r = ZERO4;
    for x in 0..dim {
        for y in 0..dim {
            for z in 0..dim {
                for w in 0..dim {
                    r[x][y][z][w] = h[x][w] * k[y][z] + h[y][z] * k[x][w]
                        - h[x][z] * k[y][w]
                        - h[y][w] * k[x][z];
                }
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_symbols() {
        assert_eq!(eps3(0, 1, 2), 1.0);
        assert_eq!(eps3(1, 0, 2), -1.0);
        assert_eq!(eps3(2, 0, 1), 1.0);
        assert_eq!(eps3(0, 0, 2), 0.0);
        assert_eq!(eps2(0, 1), 1.0);
        assert_eq!(eps2(1, 0), -1.0);
        assert_eq!(eps2(1, 1), 0.0);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        for dim in 1..=3 {
            let ai = inverse(&a, dim).unwrap();
            let p = matmul(&a, &ai, dim);
            for i in 0..dim {
                for j in 0..dim {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((p[i][j] - e).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn sym_units_extract_components() {
        let m = [[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]];
        let want = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        for c in 0..6 {
            assert_eq!(frob(&sym_unit(3, c), &m, 3), want[c]);
        }
    }

    #[test]
    fn kulkarni_nomizu_of_metric_has_curvature_symmetries() {
        let g = [[2.0, 0.3, 0.1], [0.3, 1.5, -0.2], [0.1, -0.2, 1.0]];
        let r = kulkarni_nomizu(&g, &g, 3);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        assert!((r[i][j][k][l] + r[j][i][k][l]).abs() < 1e-14);
                        assert!((r[i][j][k][l] - r[k][l][i][j]).abs() < 1e-14);
                    }
                }
            }
        }
    }
}
