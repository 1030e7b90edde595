//! Neumann bracketing at the discrete level.
//!
//! Restricting a lattice operator to a node subset and dropping every link that
//! leaves the subset (both its off-diagonal entry and its share of the
//! diagonal) is the lattice form of inserting a Neumann wall. Each dropped link
//! removes a nonnegative term |ψ_i − e^{−iθ}ψ_j|²/h² from the quadratic form, so
//! the direct sum of the pieces is a lower bound for the full operator exactly,
//! not just up to discretization error.

use super::LatticeOperator;
use crate::error::{Error, Result};
use crate::geometry::TubeLocator;
use crate::linalg::{CsrMatrix, C64};

/// The piece of `a` on the nodes with `keep[i]`, re-indexed in order. Returns the
/// matrix and the original index of each kept node.
pub fn restrict(a: &CsrMatrix, keep: &[bool]) -> (CsrMatrix, Vec<usize>) {
    let old: Vec<usize> = (0..a.n).filter(|&i| keep[i]).collect();
    let mut new_id = vec![usize::MAX; a.n];
    for (k, &i) in old.iter().enumerate() {
        new_id[i] = k;
    }
    let mut t = Vec::with_capacity(a.nnz());
    for &i in &old {
        let mut dropped = 0.0;
        let mut diag = None;
        for p in a.indptr[i]..a.indptr[i + 1] {
            let j = a.indices[p];
            if j == i {
                diag = Some(a.values[p]);
            } else if keep[j] {
                t.push((new_id[i], new_id[j], a.values[p]));
            } else {
                dropped += a.values[p].norm();
            }
        }
        let d = diag.unwrap_or(C64::new(0.0, 0.0)) - dropped;
        t.push((new_id[i], new_id[i], d));
    }
    (CsrMatrix::from_triplets(old.len(), t), old)
}

/// H₁ (x₃ beyond the upper cut), H₂ (below the lower cut), and the slab split
/// into H₃¹ (inside the lateral square) and H₃² (outside it).
pub struct BracketingPieces {
    pub h1: CsrMatrix,
    pub h2: CsrMatrix,
    pub h31: CsrMatrix,
    pub h32: CsrMatrix,
    /// Upper and lower cut positions actually realized on the lattice.
    pub cuts: [f64; 2],
    pub box_half_width: f64,
    /// Smallest admissible square half-width.
    pub required_half_width: f64,
    /// Original lattice index of every node of H₁, H₂, H₃¹, H₃².
    pub maps: [Vec<usize>; 4],
}

/// Half-width of the smallest square (−a, a)² containing every slice of the
/// tube with |x₃| < z.
pub fn slice_half_width(loc: &TubeLocator, z: f64) -> f64 {
    let f = loc.frame();
    let r = loc.section().r_max();
    let mut w: f64 = r;
    for g in &f.gamma_pos {
        if g[2].abs() <= z + r {
            w = w.max(g[0].abs() + r).max(g[1].abs() + r);
        }
    }
    w
}

/// Cuts at x₃ = ±2s₀ (between the lattice planes adjacent to them). H₁ comes
/// from the Landau-gauge operator, H₂ from the mirror-gauge one, the slab from
/// the Landau one.
pub fn bracketing_pieces(
    landau: &LatticeOperator,
    mirror: &LatticeOperator,
    loc: &TubeLocator,
    s0: f64,
    box_half_width: f64,
) -> Result<BracketingPieces> {
    let grid = landau.grid();
    if grid.dim() != 3 || mirror.grid() != grid {
        return Err(Error::InvalidInput("bracketing needs two operators on the same 3D grid".into()));
    }
    let required = slice_half_width(loc, 2.0 * s0);
    if box_half_width < required {
        return Err(Error::Precondition(format!(
            "box half-width {box_half_width} does not contain the tube slices; need at least {required}"
        )));
    }
    let z = grid.axes[2].nodes();
    let upper = z.iter().position(|&v| v > 2.0 * s0).ok_or_else(|| Error::Precondition("grid ends below 2 s0".into()))?;
    let lower = z.iter().rposition(|&v| v < -2.0 * s0).ok_or_else(|| Error::Precondition("grid ends above -2 s0".into()))?;
    let n = grid.len();
    let mut in1 = vec![false; n];
    let mut in2 = vec![false; n];
    let mut in31 = vec![false; n];
    let mut in32 = vec![false; n];
    for i in 0..n {
        let idx = grid.index(i);
        let p = grid.point(i);
        if idx[2] >= upper {
            in1[i] = true;
        } else if idx[2] <= lower {
            in2[i] = true;
        } else if p[0].abs() < box_half_width && p[1].abs() < box_half_width {
            in31[i] = true;
        } else {
            in32[i] = true;
        }
    }
    let la = landau.to_csr();
    let mi = mirror.to_csr();
    let hz = grid.axes[2].h();
    let (h1, m1) = restrict(&la, &in1);
    let (h2, m2) = restrict(&mi, &in2);
    let (h31, m31) = restrict(&la, &in31);
    let (h32, m32) = restrict(&la, &in32);
    Ok(BracketingPieces {
        h1,
        h2,
        h31,
        h32,
        cuts: [z[upper] - 0.5 * hz, z[lower] + 0.5 * hz],
        box_half_width,
        required_half_width: required,
        maps: [m1, m2, m31, m32],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigsolve::dense_fallback;
    use crate::grid::{Grid, GridAxis};

    #[test]
    fn restriction_is_a_form_lower_bound() {
        let g = Grid::new(vec![GridAxis::new(0.0, 1.0, 6).unwrap(), GridAxis::new(0.0, 1.0, 7).unwrap()]).unwrap();
        let th: Vec<f64> = (0..g.len()).map(|i| 0.3 * (i % 7) as f64).collect();
        let v: Vec<f64> = (0..g.len()).map(|i| ((i * 7) % 5) as f64).collect();
        let op = LatticeOperator::new(&g, &v, &[Some(&th), None]);
        let full = op.to_csr();
        let keep: Vec<bool> = (0..g.len()).map(|i| g.index(i)[0] < 3).collect();
        let comp: Vec<bool> = keep.iter().map(|k| !k).collect();
        let (a, _) = restrict(&full, &keep);
        let (b, _) = restrict(&full, &comp);
        let lo = dense_fallback(&a).unwrap().eigenvalues[0].min(dense_fallback(&b).unwrap().eigenvalues[0]);
        assert!(dense_fallback(&full).unwrap().eigenvalues[0] >= lo - 1e-12);
        // keeping everything reproduces the operator
        let (all, _) = restrict(&full, &vec![true; g.len()]);
        assert_eq!(all.values, full.values);
    }
}
