//! Discrete operators: the 2D threshold operator h_V, the magnetic Neumann
//! Laplacian on a disk, the 3D Hamiltonian, and the bracketing pieces.

pub mod bracketing;
pub mod disk;
pub mod export;
pub mod h3d;
pub mod hv;
pub mod lattice;

pub use bracketing::{bracketing_pieces, restrict, BracketingPieces};
pub use disk::{assemble_disk_neumann, lambda1_disk, DiskGround};
pub use h3d::{assemble_h3d, H3dBuilder, PhaseTable};
pub use hv::{assemble_hv, ground_state_2d, GroundState2D, HvOperator};
pub use lattice::LatticeOperator;

use crate::eigsolve::{lowest_eigs, Mode, SeparablePreconditioner, SolveRequest, SpectrumReport, AUTO_DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::linalg::{dot, LinearOperator, C64, ZERO};

/// Shift of the separable (−Δ_h + μ)⁻¹ preconditioner.
pub const PRECOND_SHIFT: f64 = 3.0;

/// Lowest `k` eigenpairs of a lattice operator: dense when small, otherwise
/// LOBPCG preconditioned by the exact inverse of the shifted free Laplacian on
/// the same lattice.
pub fn lowest_lattice_eigs(
    op: &LatticeOperator,
    k: usize,
    tol: f64,
    seed: u64,
    warm: Option<&[Vec<C64>]>,
) -> Result<SpectrumReport> {
    if op.dim() <= AUTO_DENSE_LIMIT {
        return lowest_eigs(&SolveRequest::new(op, k).tol(tol).seed(seed).mode(Mode::Dense));
    }
    let pc = SeparablePreconditioner::new(&op.grid().axis_specs(), PRECOND_SHIFT);
    let mut req = SolveRequest::new(op, k).tol(tol).seed(seed).mode(Mode::Lobpcg).precond(&pc).max_iter(5000);
    if let Some(w) = warm {
        req = req.warm_start(w);
    }
    lowest_eigs(&req)
}

/// Rayleigh quotient ⟨ψ, Op ψ⟩ / ⟨ψ, ψ⟩, the discrete value of the quadratic form.
pub fn quadratic_form(op: &dyn LinearOperator, psi: &[C64]) -> Result<f64> {
    if psi.len() != op.dim() {
        return Err(Error::InvalidInput(format!("vector length {} vs dimension {}", psi.len(), op.dim())));
    }
    let nn = dot(psi, psi).re;
    if nn == 0.0 {
        return Err(Error::InvalidInput("quadratic form of the zero vector".into()));
    }
    let mut y = vec![ZERO; psi.len()];
    op.apply(psi, &mut y);
    Ok(dot(psi, &y).re / nn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn rayleigh_bounds() {
        let g = Grid::square(1.0, 0.2).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|i| (i % 7) as f64).collect();
        let op = LatticeOperator::new(&g, &v, &[]);
        let r = lowest_lattice_eigs(&op, 1, 1e-10, 1, None).unwrap();
        assert!((quadratic_form(&op, &r.vectors[0]).unwrap() - r.eigenvalues[0]).abs() < 1e-10);
        let x = crate::linalg::random_vector(g.len(), 9);
        assert!(quadratic_form(&op, &x).unwrap() >= r.eigenvalues[0] - 1e-10);
        assert!(quadratic_form(&op, &vec![ZERO; g.len()]).is_err());
    }
}
