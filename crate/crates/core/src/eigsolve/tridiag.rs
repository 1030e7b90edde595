//! Real symmetric tridiagonal eigenproblems: Sturm bisection for values,
//! inverse iteration for vectors. Used for the Lanczos projections and for the
//! radial fibers of the disk operator.

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = 0.0;
    for i in 0..d.len() {
        q = if i == 0 { d[0] - x } else { d[i] - x - e[i - 1] * e[i - 1] / q };
        // an exact zero pivot is perturbed downward and counted as negative
        if q.abs() < tiny {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

pub fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < e.len() { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// The j-th smallest eigenvalue (0-based) by bisection to machine precision.
pub fn eigenvalue(d: &[f64], e: &[f64], j: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(d, e);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * scale;
    hi += 1e-12 * scale;
    // The stopping width is relative to the eigenvalue, not to ‖T‖: Sturm counts
    // are componentwise backward stable, so small eigenvalues of graded matrices
    // (the disk fibers reach ‖T‖ ≈ 1e11) are resolved to full relative accuracy.
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if sturm_count(d, e, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves the tridiagonal system (sub, diag, sup) x = b with partial pivoting.
/// Zero pivots are replaced by a tiny value, which is what inverse iteration wants.
pub fn solve(sub: &[f64], diag: &[f64], sup: &[f64], b: &mut [f64]) {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let dl = sub;
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let scale = d.iter().chain(du.iter()).map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let tiny = f64::EPSILON * scale;
    if n == 1 {
        if d[0].abs() < tiny {
            d[0] = tiny;
        }
        b[0] /= d[0];
        return;
    }
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i].abs() < tiny {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let t = d[i + 1];
            d[i + 1] = du[i] - f * t;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = t;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - f * b[i + 1];
        }
    }
    if d[n - 1].abs() < tiny {
        d[n - 1] = tiny;
    }
    b[n - 1] /= d[n - 1];
    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

/// Lowest `k` eigenpairs; vectors are orthonormal, including within clusters.
pub fn lowest_pairs(d: &[f64], e: &[f64], k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = d.len();
    let k = k.min(n);
    let vals: Vec<f64> = (0..k).map(|j| eigenvalue(d, e, j)).collect();
    let (lo, hi) = gershgorin(d, e);
    let norm = lo.abs().max(hi.abs()).max(1e-300);
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let shift = vals[j] - 1e-13 * norm;
        let diag: Vec<f64> = d.iter().map(|v| v - shift).collect();
        // deterministic, non-degenerate start
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7 + j * 13) % 11) as f64).collect();
        for _ in 0..4 {
            solve(e, &diag, e, &mut x);
            for (p, v) in vecs.iter().enumerate() {
                if (vals[p] - vals[j]).abs() < 1e-6 * norm {
                    let c: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
                    x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= c * vi);
                }
            }
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nx);
        }
        vecs.push(x);
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_values_and_vectors() {
        let n = 200;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let (vals, vecs) = lowest_pairs(&d, &e, 3);
        for j in 0..3 {
            let exact = 4.0 * (std::f64::consts::PI * (j + 1) as f64 / (2.0 * (n + 1) as f64)).sin().powi(2);
            assert!((vals[j] - exact).abs() < 1e-14);
            // residual
            let v = &vecs[j];
            let mut r = 0.0f64;
            for i in 0..n {
                let mut t = 2.0 * v[i];
                if i > 0 {
                    t -= v[i - 1];
                }
                if i + 1 < n {
                    t -= v[i + 1];
                }
                r = r.max((t - vals[j] * v[i]).abs());
            }
            assert!(r < 1e-12, "residual {r}");
        }
    }

    #[test]
    fn exact_zero_pivot_in_sturm_sequence() {
        // the shift 8 makes the first pivot vanish exactly
        let (d, e) = ([8.0, 8.0, 8.0, 8.0, 4.0], [-4.0; 4]);
        let (vals, _) = lowest_pairs(&d, &e, 5);
        let expect = [0.32405621108401594, 2.761114128437714, 6.86148129, 11.3233201, 14.73002826];
        for (v, x) in vals.iter().zip(expect) {
            assert!((v - x).abs() < 1e-7, "{v} vs {x}");
        }
    }

    #[test]
    fn pivoting_solve_matches_dense() {
        let sub = [3.0, -1.0, 0.5];
        let diag = [0.0, 1.0, -2.0, 4.0];
        let sup = [1.0, 2.0, -1.5];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = [
            diag[0] * x[0] + sup[0] * x[1],
            sub[0] * x[0] + diag[1] * x[1] + sup[1] * x[2],
            sub[1] * x[1] + diag[2] * x[2] + sup[2] * x[3],
            sub[2] * x[2] + diag[3] * x[3],
        ];
        solve(&sub, &diag, &sup, &mut b);
        for i in 0..4 {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }
}
