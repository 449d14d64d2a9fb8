//! Dense brute-force reference computations.
//!
//! Nothing here shares code with the `walkprec` library: matrices are plain
//! row-major `Vec<Vec<f64>>`, and every routine is the textbook O(n³)
//! version. Intended for the small (≤ 50) systems used in tests.

pub type Dense = Vec<Vec<f64>>;

/// `A = L D Lᵀ` without pivoting. Returns `(L, d)` with unit-diagonal `L`.
pub fn ldl(a: &Dense) -> (Dense, Vec<f64>) {
    let (l, d, _) = ldu(a);
    (l, d)
}

/// `A = L D U` without pivoting; `L` unit lower, `U` unit upper.
pub fn ldu(a: &Dense) -> (Dense, Vec<f64>, Dense) {
    let n = a.len();
    let mut s = a.clone();
    let mut l = identity(n);
    let mut u = identity(n);
    let mut d = vec![0.0; n];
    for k in 0..n {
        let piv = s[k][k];
        assert!(piv != 0.0, "zero pivot at {k}");
        d[k] = piv;
        for i in k + 1..n {
            l[i][k] = s[i][k] / piv;
            u[k][i] = s[k][i] / piv;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                s[i][j] -= s[i][k] * s[k][j] / piv;
            }
        }
    }
    (l, d, u)
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Dense = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap())
            .unwrap();
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    x
}

pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            solve(a, &e)
        })
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Boolean structural elimination in the natural order. Returns the lower
/// triangle (diagonal included) of the complete factor's pattern.
pub fn elimination_pattern(a: &Dense) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut s: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i == j || a[i][j] != 0.0 || a[j][i] != 0.0).collect())
        .collect();
    for k in 0..n {
        for i in k + 1..n {
            if !s[i][k] {
                continue;
            }
            for j in k + 1..n {
                if s[k][j] {
                    s[i][j] = true;
                }
            }
        }
    }
    (0..n).map(|i| (0..n).map(|j| j <= i && s[i][j]).collect()).collect()
}

/// Nonzero pattern of the numeric `L` factor; for M-matrices no fill
/// cancels, so this equals the structural pattern.
pub fn numeric_ldl_pattern(a: &Dense) -> Vec<Vec<bool>> {
    let (l, _) = ldl(a);
    l.iter()
        .map(|row| row.iter().map(|&v| v != 0.0).collect())
        .collect()
}

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn transpose(a: &Dense) -> Dense {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// `L diag(d) Lᵀ`.
pub fn ldlt_product(l: &Dense, d: &[f64]) -> Dense {
    let n = l.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| l[i][k] * d[k] * l[j][k]).sum())
                .collect()
        })
        .collect()
}

pub fn reverse(a: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[n - 1 - i][n - 1 - j]).collect())
        .collect()
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn frobenius_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum())
        .collect()
}

/// Standard normal CDF by composite Simpson quadrature of the density on
/// `[0, |x|]`.
pub fn normal_cdf_quadrature(x: f64) -> f64 {
    let steps = 20_000;
    let h = x.abs() / steps as f64;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = phi(0.0) + phi(x.abs());
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * phi(i as f64 * h);
    }
    let half = s * h / 3.0;
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// Two-sided normal quantile `q` with `P(|Z| < q) = alpha`, by bisection.
pub fn two_sided_quantile_bisection(alpha: f64) -> f64 {
    let target = 0.5 + alpha / 2.0;
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf_quadrature(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
