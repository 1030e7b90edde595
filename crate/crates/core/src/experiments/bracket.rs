//! Numerical check of the Neumann-bracketing lower bound.

use crate::eigsolve::{lowest_eigs, Mode, Preconditioner, SeparablePreconditioner, SolveRequest, AUTO_DENSE_LIMIT};
use crate::error::Result;
use crate::geometry::TubeLocator;
use crate::linalg::{CsrMatrix, C64, ZERO};
use crate::operators::{bracketing_pieces, lowest_lattice_eigs, LatticeOperator, PRECOND_SHIFT};
use serde::{Deserialize, Serialize};

/// The full-lattice preconditioner acting on a node subset: extend by zero,
/// apply, restrict. Symmetric positive definite, which is all LOBPCG needs.
struct Restricted<'a> {
    inner: &'a SeparablePreconditioner,
    map: Vec<usize>,
    full: usize,
}

impl Preconditioner for Restricted<'_> {
    fn apply(&self, r: &[C64], z: &mut [C64]) {
        let mut big = vec![ZERO; self.full];
        for (k, &i) in self.map.iter().enumerate() {
            big[i] = r[k];
        }
        let mut out = vec![ZERO; self.full];
        self.inner.apply(&big, &mut out);
        for (k, &i) in self.map.iter().enumerate() {
            z[k] = out[i];
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceSpectrum {
    pub dimension: usize,
    pub lowest: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketingResult {
    pub h: PieceSpectrum,
    pub h1: PieceSpectrum,
    pub h2: PieceSpectrum,
    pub h31: PieceSpectrum,
    pub h32: PieceSpectrum,
    /// min over the pieces.
    pub lower_bound: f64,
    pub cuts: [f64; 2],
    pub box_half_width: f64,
}

fn piece(a: &CsrMatrix, map: &[usize], pc: &SeparablePreconditioner, full: usize, tol: f64, seed: u64) -> Result<PieceSpectrum> {
    let rep = if a.n <= AUTO_DENSE_LIMIT {
        lowest_eigs(&SolveRequest::new(a, 1).mode(Mode::Dense))?
    } else {
        let r = Restricted { inner: pc, map: map.to_vec(), full };
        lowest_eigs(&SolveRequest::new(a, 1).tol(tol).seed(seed).mode(Mode::Lobpcg).precond(&r).max_iter(5000))?
    };
    Ok(PieceSpectrum { dimension: a.n, lowest: rep.eigenvalues[0], residual: rep.residuals[0] })
}

/// Lowest eigenvalues of H and of the four bracketing pieces.
pub fn bracketing_check(
    landau: &LatticeOperator,
    mirror: &LatticeOperator,
    loc: &TubeLocator,
    s0: f64,
    box_half_width: f64,
    tol: f64,
    seed: u64,
) -> Result<BracketingResult> {
    let pieces = bracketing_pieces(landau, mirror, loc, s0, box_half_width)?;
    let full_rep = lowest_lattice_eigs(landau, 1, tol, seed, None)?;
    let grid = landau.grid();
    let pc = SeparablePreconditioner::new(&grid.axis_specs(), PRECOND_SHIFT);
    let n = grid.len();
    let h1 = piece(&pieces.h1, &pieces.maps[0], &pc, n, tol, seed)?;
    let h2 = piece(&pieces.h2, &pieces.maps[1], &pc, n, tol, seed)?;
    let h31 = piece(&pieces.h31, &pieces.maps[2], &pc, n, tol, seed)?;
    let h32 = piece(&pieces.h32, &pieces.maps[3], &pc, n, tol, seed)?;
    let lower_bound = h1.lowest.min(h2.lowest).min(h31.lowest).min(h32.lowest);
    Ok(BracketingResult {
        h: PieceSpectrum { dimension: n, lowest: full_rep.eigenvalues[0], residual: full_rep.residuals[0] },
        h1,
        h2,
        h31,
        h32,
        lower_bound,
        cuts: pieces.cuts,
        box_half_width,
    })
}
