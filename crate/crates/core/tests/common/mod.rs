//! Independent reference values used by the integration tests.
//!
//! Neither oracle touches the lattice code: the threshold comes from shooting
//! the radial ODE with RK4, the disk energies from the Kummer-function solution
//! of the magnetic Neumann problem.

#![allow(dead_code)]

use std::path::PathBuf;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

/// Lowest eigenvalue of −Δ − V₀·1{r < a} on ℝ², by shooting the m = 0 radial
/// equation f'' + f'/r + (V + E) f = 0 out to `r_max`.
///
/// Below the ground energy the regular solution stays positive and blows up;
/// above it, it crosses zero. Bisection on that sign.
pub fn radial_shooting_threshold(v0: f64, a: f64, r_max: f64) -> f64 {
    let positive_at_end = |e: f64| -> bool {
        let rhs = |r: f64, y: [f64; 2], inside: bool| -> [f64; 2] {
            let q = if inside { v0 + e } else { e };
            [y[1], -y[1] / r - q * y[0]]
        };
        // series start: f = 1 − (V + E) r²/4
        let r0 = 1e-6;
        let mut y = [1.0 - (v0 + e) * r0 * r0 / 4.0, -(v0 + e) * r0 / 2.0];
        let mut r = r0;
        for (end, inside) in [(a, true), (r_max, false)] {
            let steps = ((end - r) / 2e-4).ceil() as usize;
            let dr = (end - r) / steps as f64;
            for _ in 0..steps {
                let k1 = rhs(r, y, inside);
                let k2 = rhs(r + dr / 2.0, [y[0] + dr / 2.0 * k1[0], y[1] + dr / 2.0 * k1[1]], inside);
                let k3 = rhs(r + dr / 2.0, [y[0] + dr / 2.0 * k2[0], y[1] + dr / 2.0 * k2[1]], inside);
                let k4 = rhs(r + dr, [y[0] + dr * k3[0], y[1] + dr * k3[1]], inside);
                for i in 0..2 {
                    y[i] += dr / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                r += dr;
                if y[0] <= 0.0 {
                    return false;
                }
            }
            r = end;
        }
        true
    };
    let (mut lo, mut hi) = (-v0 + 1e-12, -1e-9);
    assert!(positive_at_end(lo) && !positive_at_end(hi), "no bound state to bracket");
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if positive_at_end(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Kummer's M(a, b, z) by its power series; fine for the moderate z used here
/// since for the ground state the terms beyond the first share one sign.
fn kummer(a: f64, b: f64, z: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    let mut k = 0.0;
    loop {
        term *= (a + k) / (b + k) * z / (k + 1.0);
        sum += term;
        k += 1.0;
        if k > z + 20.0 && term.abs() < 1e-17 * sum.abs() {
            return sum;
        }
        if k > 20_000.0 {
            return sum;
        }
    }
}

/// Neumann derivative (up to a positive factor) of the exact radial solution
/// r^|m| e^{−Br²/4} M(−ν, |m|+1, Br²/2) with λ = B(2ν + 1 + |m| − m).
fn neumann_defect(lambda: f64, b: f64, r: f64, m: i64) -> f64 {
    let am = m.unsigned_abs() as f64;
    let nu = (lambda / b - 1.0 - am + m as f64) / 2.0;
    let (ka, kb, z) = (-nu, am + 1.0, b * r * r / 2.0);
    let mm = kummer(ka, kb, z);
    let mp = ka / kb * kummer(ka + 1.0, kb + 1.0, z);
    (am / r - b * r / 2.0) * mm + b * r * mp
}

/// Ground energy of the magnetic Neumann Laplacian on the disk of radius `r`
/// with constant field `b`: smallest root over angular momenta.
pub fn disk_ground_kummer(b: f64, r: f64) -> f64 {
    let top = (b * r * r / 2.0).ceil() as i64 + 8;
    let mut best = f64::INFINITY;
    for m in -4..=top {
        let scan = 2000;
        let f = |l: f64| neumann_defect(l, b, r, m);
        let mut prev_l = 1e-9 * b;
        let mut prev = f(prev_l);
        for i in 1..=scan {
            let l = (i as f64 / scan as f64) * 1.2 * b;
            if l >= best {
                break;
            }
            let cur = f(l);
            if prev.signum() != cur.signum() {
                let (mut lo, mut hi, mut flo) = (prev_l, l, prev);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                best = best.min(0.5 * (lo + hi));
                break;
            }
            prev_l = l;
            prev = cur;
        }
    }
    best
}

/// Lowest eigenvalue of a symmetric tridiagonal matrix, certified by residual.
pub struct TridiagCertificate {
    /// Rayleigh quotient of the inverse-iteration vector.
    pub rho: f64,
    /// ‖Tv − ρv‖ for unit v; some eigenvalue lies within this of ρ.
    pub residual: f64,
    /// Lowest and second-lowest eigenvalues from a dense QR solve.
    pub dense: [f64; 2],
    /// Backward-error bound of the dense solve, n·ε·‖T‖∞.
    pub dense_bound: f64,
}

/// Dense QR is only accurate to ε‖T‖ in absolute terms, which is far too coarse
/// for graded matrices such as the disk fibers (‖T‖ ≈ 1e11 from the centrifugal
/// term in the first cell). Inverse iteration does much better, because the
/// large entries meet eigenvector components that are tiny: the dense value
/// only serves as a shift and to confirm that the certified eigenvalue is the
/// lowest.
pub fn certify_lowest_tridiag(d: &[f64], e: &[f64]) -> TridiagCertificate {
    let n = d.len();
    let t = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            d[i]
        } else if i + 1 == j {
            e[i]
        } else if j + 1 == i {
            e[j]
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(t).eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    let norm = (0..n)
        .map(|i| d[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 })
        .fold(0.0, f64::max);
    let dense_bound = n as f64 * f64::EPSILON * norm;

    // T − σ is positive definite, so LDLᵀ without pivoting is stable
    let sigma = ev[0] - 1e-3 * (1.0 + ev[0].abs()) - dense_bound;
    let mut piv = vec![0.0; n];
    piv[0] = d[0] - sigma;
    for i in 1..n {
        piv[i] = d[i] - sigma - e[i - 1] * e[i - 1] / piv[i - 1];
    }
    let mut v = vec![1.0; n];
    for _ in 0..30 {
        for i in 1..n {
            v[i] -= e[i - 1] / piv[i - 1] * v[i - 1];
        }
        v[n - 1] /= piv[n - 1];
        for i in (0..n - 1).rev() {
            v[i] = (v[i] - e[i] * v[i + 1]) / piv[i];
        }
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= s);
    }
    // Tv and vᵀTv in double-double, so ρ is the Rayleigh quotient of the stored
    // matrix rather than of its rounded products
    let tv: Vec<Dd> = (0..n)
        .map(|i| {
            let mut y = Dd::prod(d[i], v[i]);
            if i > 0 {
                y = y.add(Dd::prod(e[i - 1], v[i - 1]));
            }
            if i + 1 < n {
                y = y.add(Dd::prod(e[i], v[i + 1]));
            }
            y
        })
        .collect();
    let vv = v.iter().fold(Dd::ZERO, |acc, &x| acc.add(Dd::prod(x, x)));
    let vtv = v.iter().zip(&tv).fold(Dd::ZERO, |acc, (&x, y)| acc.add(y.scale(x)));
    let rho = vtv.hi / vv.hi;
    let residual = tv.iter().zip(&v).map(|(y, &x)| y.add(Dd::prod(-rho, x)).hi.powi(2)).sum::<f64>().sqrt();
    TridiagCertificate { rho, residual, dense: [ev[0], ev[1]], dense_bound }
}

/// Unevaluated sum hi + lo with |lo| ≤ ulp(hi)/2.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd { hi: p, lo: a.mul_add(b, -p) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        Dd::two_sum(s.hi, lo)
    }

    fn scale(self, x: f64) -> Dd {
        let p = Dd::prod(self.hi, x);
        Dd::two_sum(p.hi, p.lo + self.lo * x)
    }
}
