//! Slow reference computations for the test suites. Nothing here shares code
//! with the library: derivatives come from finite differences, permutation
//! symbols from counting inversions and integrals from tensor-product
//! Gauss–Legendre rules on boxes.

pub type V3 = [f64; 3];
pub type M3 = [[f64; 3]; 3];
pub type T4 = [[[[f64; 3]; 3]; 3]; 3];

/// Step and extrapolation depth for the finite-difference oracles.
#[derive(Debug, Clone, Copy)]
pub struct FdConfig {
    pub step: f64,
    pub levels: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: 2e-3, levels: 3 }
    }
}

/// Sign of a permutation of distinct indices, 0 on repeats.
pub fn perm_sign(idx: &[usize]) -> f64 {
    let mut sign = 1.0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            if idx[a] == idx[b] {
                return 0.0;
            }
            if idx[a] > idx[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Central difference with Richardson extrapolation of a vector-valued map.
pub fn richardson<const N: usize>(f: &dyn Fn(f64) -> [f64; N], cfg: FdConfig) -> [f64; N] {
    let mut table: Vec<[f64; N]> = Vec::new();
    for lev in 0..cfg.levels {
        let h = cfg.step / 2f64.powi(lev as i32);
        let (p, m) = (f(h), f(-h));
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = (p[i] - m[i]) / (2.0 * h);
        }
        table.push(d);
    }
    // eliminate h², h⁴, ...
    for k in 1..cfg.levels {
        let fac = 4f64.powi(k as i32);
        for lev in (k..cfg.levels).rev() {
            let (hi, lo) = (table[lev], table[lev - 1]);
            for i in 0..N {
                table[lev][i] = (fac * hi[i] - lo[i]) / (fac - 1.0);
            }
        }
    }
    table[cfg.levels - 1]
}

fn flat9(m: &M3) -> [f64; 9] {
    let mut r = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            r[3 * i + j] = m[i][j];
        }
    }
    r
}

fn invert(m: &M3, dim: usize) -> M3 {
    // Gauss–Jordan on an augmented copy
    let mut a = [[0.0; 6]; 3];
    for i in 0..dim {
        for j in 0..dim {
            a[i][j] = m[i][j];
        }
        a[i][dim + i] = 1.0;
    }
    for c in 0..dim {
        let p = (c..dim).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        let piv = a[c][c];
        for v in a[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..dim {
            if r != c {
                let f = a[r][c];
                for k in 0..2 * dim {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            out[i][j] = a[i][dim + j];
        }
    }
    out
}

fn shifted(x: &V3, k: usize, h: f64) -> V3 {
    let mut y = *x;
    y[k] += h;
    y
}

/// Christoffel symbols of the second kind, `Γ^l_ij` stored `[l][i][j]`,
/// from metric evaluations only.
pub fn fd_christoffel(metric: &dyn Fn(&V3) -> M3, dim: usize, x: &V3, cfg: FdConfig) -> [[[f64; 3]; 3]; 3] {
    let mut dg = [[[0.0; 3]; 3]; 3];
    for k in 0..dim {
        let d = richardson(&|h| flat9(&metric(&shifted(x, k, h))), cfg);
        for i in 0..3 {
            for j in 0..3 {
                dg[k][i][j] = d[3 * i + j];
            }
        }
    }
    let gi = invert(&metric(x), dim);
    let mut out = [[[0.0; 3]; 3]; 3];
    for l in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for m in 0..dim {
                    s += 0.5 * gi[l][m] * (dg[i][j][m] + dg[j][i][m] - dg[m][i][j]);
                }
                out[l][i][j] = s;
            }
        }
    }
    out
}

/// Riemann tensor `R_ijkl = g_lm(∂_iΓ^m_jk - ∂_jΓ^m_ik + Γ^p_jk Γ^m_ip - Γ^p_ik Γ^m_jp)`
/// by nested finite differences.
pub fn fd_riemann(metric: &dyn Fn(&V3) -> M3, dim: usize, x: &V3, cfg: FdConfig) -> T4 {
    let inner = FdConfig {
        step: cfg.step * 0.5,
        levels: cfg.levels,
    };
    let gam = fd_christoffel(metric, dim, x, inner);
    let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
    for k in 0..dim {
        let d = richardson(
            &|h| {
                let g = fd_christoffel(metric, dim, &shifted(x, k, h), inner);
                let mut r = [0.0; 27];
                for a in 0..3 {
                    for b in 0..3 {
                        for c in 0..3 {
                            r[9 * a + 3 * b + c] = g[a][b][c];
                        }
                    }
                }
                r
            },
            cfg,
        );
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    dgam[k][a][b][c] = d[9 * a + 3 * b + c];
                }
            }
        }
    }
    let g = metric(x);
    let mut r = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    let mut s = 0.0;
                    for m in 0..dim {
                        let mut t = dgam[i][m][j][k] - dgam[j][m][i][k];
                        for p in 0..dim {
                            t += gam[p][j][k] * gam[m][i][p] - gam[p][i][k] * gam[m][j][p];
                        }
                        s += g[l][m] * t;
                    }
                    r[i][j][k][l] = s;
                }
            }
        }
    }
    r
}

fn det(m: &M3, dim: usize) -> f64 {
    if dim == 2 {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    } else {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    s += perm_sign(&[i, j, k]) * m[0][i] * m[1][j] * m[2][k];
                }
            }
        }
        s
    }
}

/// `Σ ε_{ijk} ε_{ijk}` in 3D (or `Σ ε_ij ε_ij` in 2D).
pub fn eps_eps_full(dim: usize) -> f64 {
    let mut s = 0.0;
    let n = dim.pow(dim as u32);
    for t in 0..n {
        let idx: Vec<usize> = (0..dim).map(|p| (t / dim.pow(p as u32)) % dim).collect();
        let e = perm_sign(&idx);
        s += e * e;
    }
    s
}

/// The algebraic curvature tensor of a test tensor, built with all indices
/// up, `A^{ijkl} = -ε̂^{ij·} ε̂^{kl·} U_··`, then lowered with `g`. In 2D the
/// scalar is `u[0][0]`.
pub fn amap_oracle(g: &M3, u: &M3, dim: usize) -> T4 {
    let sd = det(g, dim).sqrt();
    let mut up = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    let mut s = 0.0;
                    if dim == 2 {
                        s = perm_sign(&[i, j]) * perm_sign(&[k, l]) * u[0][0] / (sd * sd);
                    } else {
                        for a in 0..3 {
                            for b in 0..3 {
                                s += perm_sign(&[i, j, a]) * perm_sign(&[k, l, b]) * u[a][b] / (sd * sd);
                            }
                        }
                    }
                    up[i][j][k][l] = -s;
                }
            }
        }
    }
    let mut low = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    let mut s = 0.0;
                    for a in 0..dim {
                        for b in 0..dim {
                            for c in 0..dim {
                                for d in 0..dim {
                                    s += g[i][a] * g[j][b] * g[k][c] * g[l][d] * up[a][b][c][d];
                                }
                            }
                        }
                    }
                    low[i][j][k][l] = s;
                }
            }
        }
    }
    low
}

/// `Q^{ij} = -¼ ε̂^{ikl} ε̂^{jmn} R_klmn` summed literally.
pub fn q_oracle(g: &M3, r: &T4) -> M3 {
    let d = det(g, 3);
    let mut q = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    for m in 0..3 {
                        for n in 0..3 {
                            s += perm_sign(&[i, k, l]) * perm_sign(&[j, m, n]) * r[k][l][m][n];
                        }
                    }
                }
            }
            q[i][j] = -0.25 * s / d;
        }
    }
    q
}

/// Euclidean `inc σ_ij = ε_ikl ε_jmn ∂_k ∂_m σ_ln` from second derivatives
/// `d2[k][m][l][n] = ∂_k∂_m σ_ln`.
pub fn inc_euclid(d2: &T4) -> M3 {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    for m in 0..3 {
                        for n in 0..3 {
                            s += perm_sign(&[i, k, l]) * perm_sign(&[j, m, n]) * d2[k][m][l][n];
                        }
                    }
                }
            }
            r[i][j] = s;
        }
    }
    r
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
            let dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let (pn, pn1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
                let dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

/// Tensor-product Gauss–Legendre integral over `(-1, 1)^dim`.
pub fn box_integral(dim: usize, n: usize, f: &dyn Fn(&V3) -> f64) -> f64 {
    let (x, w) = gauss_legendre(n);
    let mut s = 0.0;
    let nz = if dim == 3 { n } else { 1 };
    for k in 0..nz {
        for j in 0..n {
            for i in 0..n {
                let p = [x[i], x[j], if dim == 3 { x[k] } else { 0.0 }];
                let wz = if dim == 3 { w[k] } else { 1.0 };
                s += w[i] * w[j] * wz * f(&p);
            }
        }
    }
    s
}

/// Central-difference derivative estimates `[f(ε) - f(-ε)] / 2ε` for each ε.
pub fn central_differences(f: &dyn Fn(f64) -> f64, eps: &[f64]) -> Vec<f64> {
    eps.iter().map(|&e| (f(e) - f(-e)) / (2.0 * e)).collect()
}

/// Observed order from errors at successive step sizes.
pub fn observed_orders(steps: &[f64], errors: &[f64]) -> Vec<f64> {
    steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}
