//! Magnetic Neumann Laplacian on the disk of radius R with constant field B̃.
//!
//! In the symmetric gauge A = (B̃/2)(−x₂, x₁) the operator commutes with
//! rotations. On the angular mode e^{imθ} it reduces to
//!
//! ```text
//! −u'' − u'/r + (m/r − B̃r/2)² u,   u'(R) = 0,
//! ```
//!
//! discretized by finite volumes on a cell-centred radial grid (the flux through
//! r = 0 vanishes, the flux through r = R is dropped) and symmetrized with √r.
//! Each fiber is tridiagonal; its lowest eigenvalue comes from Sturm bisection.
//!
//! A Cartesian cut-cell discretization of the same problem is provided for
//! cross-validation of the fiber reduction.

use crate::eigsolve::{dense_eigenvalues, lowest_eigs, tridiag, Mode, SolveRequest, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, C64};
use serde::{Deserialize, Serialize};

/// Symmetric tridiagonal (diagonal, off-diagonal) of the m-th fiber.
pub fn fiber_matrix(b: f64, radius: f64, m: i64, nr: usize) -> (Vec<f64>, Vec<f64>) {
    let dr = radius / nr as f64;
    let r = |j: usize| (j as f64 + 0.5) * dr;
    let mut d = Vec::with_capacity(nr);
    let mut e = Vec::with_capacity(nr.saturating_sub(1));
    for j in 0..nr {
        let rj = r(j);
        let inner = j as f64 * dr;
        let outer = if j + 1 < nr { (j + 1) as f64 * dr } else { 0.0 };
        let w = m as f64 / rj - 0.5 * b * rj;
        d.push((inner + outer) / (rj * dr * dr) + w * w);
        if j + 1 < nr {
            e.push(-outer / (dr * dr * (rj * r(j + 1)).sqrt()));
        }
    }
    (d, e)
}

/// Lowest eigenvalue of one fiber.
pub fn fiber_ground(b: f64, radius: f64, m: i64, nr: usize) -> f64 {
    let (d, e) = fiber_matrix(b, radius, m, nr);
    tridiag::eigenvalue(&d, &e, 0)
}

/// The fibered operator family for m ∈ [−M, M].
pub struct DiskFamily {
    pub b: f64,
    pub radius: f64,
    pub nr: usize,
    pub m_max: i64,
}

pub fn assemble_disk_neumann(b: f64, radius: f64, nr: usize, m_max: i64) -> Result<DiskFamily> {
    if !(radius > 0.0) || !(b >= 0.0) || nr < 3 {
        return Err(Error::InvalidInput(format!("disk needs R > 0, B >= 0, nr >= 3 (got {radius}, {b}, {nr})")));
    }
    Ok(DiskFamily { b, radius, nr, m_max })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DiskGround {
    pub lambda: f64,
    pub m: i64,
}

impl DiskFamily {
    /// Minimum over m of the fiber ground energies. The fiber minimum is unimodal
    /// in m for fixed B̃, so the scan stops once energies climb for a few modes.
    pub fn ground(&self) -> Result<DiskGround> {
        let mut best = DiskGround { lambda: f64::INFINITY, m: 0 };
        for m in -self.m_max..=self.m_max {
            let l = fiber_ground(self.b, self.radius, m, self.nr);
            if l < best.lambda {
                best = DiskGround { lambda: l, m };
            }
        }
        // bulk fibers sit on the flat Landau level, so an edge minimum is not the
        // only symptom: the edge-state minimizer lives near the flux B̃R²/2
        let flux = 0.5 * self.b * self.radius * self.radius;
        if best.m.abs() == self.m_max || (self.m_max as f64) < flux {
            return Err(Error::AngularCutoff { m: best.m, max: self.m_max });
        }
        Ok(best)
    }
}

/// Angular cutoff comfortably above the flux B̃R²/2 through the disk.
pub fn default_m_cutoff(b: f64, radius: f64) -> i64 {
    (0.5 * b * radius * radius).ceil() as i64 + 12
}

/// λ₁(B̃, R) with its minimizing angular momentum.
pub fn lambda1_disk(b: f64, radius: f64, nr: usize) -> Result<DiskGround> {
    assemble_disk_neumann(b, radius, nr, default_m_cutoff(b, radius))?.ground()
}

/// Length of {t ∈ [a, b] : c² + t² < R²}.
fn chord(c: f64, a: f64, b: f64, radius: f64) -> f64 {
    let r2 = radius * radius - c * c;
    if r2 <= 0.0 {
        return 0.0;
    }
    let s = r2.sqrt();
    (b.min(s) - a.max(-s)).max(0.0)
}

/// Cut-cell finite volumes on a square lattice of spacing ≈ h: cells carry their
/// area fraction inside the disk, faces their open length fraction, links the
/// exact Peierls phase of the symmetric gauge. Returns λ₁ of the pencil
/// K u = λ M u.
pub fn cartesian_lambda1(b: f64, radius: f64, h_target: f64, seed: u64) -> Result<f64> {
    let nc = (2.0 * radius / h_target).ceil() as usize;
    let h = 2.0 * radius / nc as f64;
    let c = |i: usize| -radius + (i as f64 + 0.5) * h;
    let sub = 16;
    let frac = |i: usize, j: usize| {
        let (x, y) = (c(i), c(j));
        let far = (x.abs() + 0.5 * h).hypot(y.abs() + 0.5 * h);
        let near = (x.abs() - 0.5 * h).max(0.0).hypot((y.abs() - 0.5 * h).max(0.0));
        if far <= radius {
            return 1.0;
        }
        if near >= radius {
            return 0.0;
        }
        let mut k = 0;
        for a in 0..sub {
            for bb in 0..sub {
                let px = x + ((a as f64 + 0.5) / sub as f64 - 0.5) * h;
                let py = y + ((bb as f64 + 0.5) / sub as f64 - 0.5) * h;
                if px * px + py * py < radius * radius {
                    k += 1;
                }
            }
        }
        k as f64 / (sub * sub) as f64
    };
    let mut id = vec![usize::MAX; nc * nc];
    let mut mass = Vec::new();
    for i in 0..nc {
        for j in 0..nc {
            let f = frac(i, j);
            if f > 0.0 {
                id[i * nc + j] = mass.len();
                mass.push(f * h * h);
            }
        }
    }
    let n = mass.len();
    let mut diag = vec![0.0; n];
    let mut t = Vec::new();
    for i in 0..nc {
        for j in 0..nc {
            let p = id[i * nc + j];
            if p == usize::MAX {
                continue;
            }
            // face towards +x (x-link at height y: θ = −(B/2) y h)
            if i + 1 < nc && id[(i + 1) * nc + j] != usize::MAX {
                let q = id[(i + 1) * nc + j];
                let ap = chord(c(i) + 0.5 * h, c(j) - 0.5 * h, c(j) + 0.5 * h, radius) / h;
                let th = -0.5 * b * c(j) * h;
                diag[p] += ap;
                diag[q] += ap;
                t.push((p, q, C64::from_polar(-ap, -th)));
                t.push((q, p, C64::from_polar(-ap, th)));
            }
            // face towards +y (y-link at abscissa x: θ = (B/2) x h)
            if j + 1 < nc && id[i * nc + j + 1] != usize::MAX {
                let q = id[i * nc + j + 1];
                let ap = chord(c(j) + 0.5 * h, c(i) - 0.5 * h, c(i) + 0.5 * h, radius) / h;
                let th = 0.5 * b * c(i) * h;
                diag[p] += ap;
                diag[q] += ap;
                t.push((p, q, C64::from_polar(-ap, -th)));
                t.push((q, p, C64::from_polar(-ap, th)));
            }
        }
    }
    for (p, d) in diag.iter().enumerate() {
        t.push((p, p, C64::new(*d, 0.0)));
    }
    // symmetric scaling M^{-1/2} K M^{-1/2}
    let s: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let t = t.into_iter().map(|(p, q, v)| (p, q, v * s[p] * s[q])).collect();
    let k = CsrMatrix::from_triplets(n, t);
    if n <= DENSE_LIMIT {
        return Ok(dense_eigenvalues(&k)?[0]);
    }
    let rep = lowest_eigs(&SolveRequest::new(&k, 1).tol(1e-10).seed(seed).shift(-1.0).mode(Mode::ShiftInvert))?;
    Ok(rep.eigenvalues[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_constant_ground_state() {
        let g = lambda1_disk(0.0, 1.3, 200).unwrap();
        assert!(g.lambda.abs() < 1e-10);
        assert_eq!(g.m, 0);
    }

    #[test]
    fn scaling_identity_is_exact_on_matched_grids() {
        for &(b, r) in &[(10.0, 0.8), (40.0, 1.4)] {
            let lhs = lambda1_disk(b, r, 400).unwrap().lambda;
            let rhs = lambda1_disk(r * r * b, 1.0, 400).unwrap().lambda / (r * r);
            assert!(((lhs - rhs) / lhs).abs() < 1e-9, "{lhs} {rhs}");
        }
    }

    #[test]
    fn quadratic_onset() {
        let a = lambda1_disk(0.01, 1.0, 400).unwrap().lambda;
        let b = lambda1_disk(0.02, 1.0, 400).unwrap().lambda;
        assert!((b / a - 4.0).abs() < 1e-3, "{}", b / a);
    }

    #[test]
    fn angular_cutoff_is_enforced() {
        let fam = assemble_disk_neumann(100.0, 1.0, 200, 3).unwrap();
        assert!(matches!(fam.ground(), Err(Error::AngularCutoff { .. })));
    }

    #[test]
    fn fibers_match_cartesian_cut_cells() {
        let b = 3.0;
        let fib = lambda1_disk(b, 1.0, 2000).unwrap().lambda;
        let cart = cartesian_lambda1(b, 1.0, 0.04, 7).unwrap();
        assert!(((fib - cart) / fib).abs() < 1e-3, "fiber {fib} cartesian {cart}");
    }
}
