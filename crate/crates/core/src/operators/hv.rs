//! The 2D threshold operator h_V = −Δ − V and its positive ground state.

use super::{lowest_lattice_eigs, LatticeOperator};
use crate::error::{Error, Result};
use crate::geometry::CrossSection;
use crate::grid::Grid;
use crate::linalg::{relative_residual, LinearOperator, C64};
use crate::potential::{cell_average_2d, Potential2D};
use serde::{Deserialize, Serialize};

pub struct HvOperator {
    pub op: LatticeOperator,
    /// Cell-averaged V at the nodes.
    pub potential: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Five-point Laplacian minus cell-averaged V, Dirichlet faces.
pub fn assemble_hv(v: &Potential2D, section: &CrossSection, grid: &Grid, sub: usize) -> Result<HvOperator> {
    if grid.dim() != 2 {
        return Err(Error::InvalidInput("h_V needs a 2D grid".into()));
    }
    let h = grid.spacing();
    let potential: Vec<f64> = (0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            cell_average_2d(v, section, [p[0], p[1]], [h[0], h[1]], sub)
        })
        .collect();
    let mut warnings = Vec::new();
    let sup = v.sup_norm();
    if sup > 0.0 {
        let need = 5.0 / sup.sqrt();
        let margin = grid
            .axes
            .iter()
            .map(|a| (a.hi - section.r_max()).min(-section.r_max() - a.lo))
            .fold(f64::INFINITY, f64::min);
        if margin < need {
            warnings.push(format!("support margin {margin:.3} below 5 decay lengths ({need:.3})"));
        }
    }
    Ok(HvOperator { op: LatticeOperator::new(grid, &potential, &[]), potential, warnings })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundState2D {
    pub e: f64,
    /// Second eigenvalue, kept to certify simplicity.
    pub e_next: f64,
    /// Nodal values, Σ f² h₁h₂ = 1, strictly positive.
    #[serde(skip)]
    pub f: Vec<f64>,
    pub grid: Grid,
    pub s0: f64,
    /// min f² over the disk x₁² + x₂² ≤ s₀².
    pub beta_f: f64,
    pub f_inf: f64,
    pub residual: f64,
    /// Most negative value of the sign-fixed solver vector relative to ‖f‖_∞,
    /// before the positivity-preserving polish.
    pub raw_min_ratio: f64,
    pub polish_steps: usize,
}

/// Lowest eigenpair of h_V with the ground state sign-fixed positive.
///
/// The solver returns f to a global residual, which leaves noise of that size in
/// the exponentially small tails. Since c − h_V is entrywise nonnegative and
/// irreducible for c ≥ max diag, its powers map |f| to strictly positive vectors
/// with the same Perron eigenvector, so a short power iteration restores positivity
/// at every node while the residual is re-checked afterwards.
pub fn ground_state_2d(hv: &HvOperator, s0: f64, tol: f64, seed: u64) -> Result<GroundState2D> {
    let op = &hv.op;
    let grid = op.grid().clone();
    let rep = lowest_lattice_eigs(op, 2, tol, seed, None)?;
    let (e, e_next) = (rep.eigenvalues[0], rep.eigenvalues[1]);
    let vsup = hv.potential.iter().cloned().fold(0.0, f64::max);
    if e >= 0.0 {
        return Err(Error::NoBoundState(e));
    }
    if e <= -vsup {
        return Err(Error::InvalidInput(format!("e = {e} below -sup V = {}", -vsup)));
    }
    if e_next - e < 1e-8 * (1.0 + e.abs()) {
        return Err(Error::DegenerateGroundState(e, e_next));
    }
    // sign fix: rotate so that the entry of largest modulus is real positive
    let v = &rep.vectors[0];
    let imax = (0..v.len()).max_by(|&a, &b| v[a].norm().partial_cmp(&v[b].norm()).unwrap()).unwrap();
    let phase = v[imax].conj() / v[imax].norm();
    let raw: Vec<f64> = v.iter().map(|z| (z * phase).re).collect();
    let rmax = raw.iter().cloned().fold(0.0, f64::max);
    let raw_min_ratio = raw.iter().cloned().fold(f64::INFINITY, f64::min) / rmax;
    // negative excursions beyond solver noise mean this is not a ground state
    if raw_min_ratio < -1e3 * tol {
        return Err(Error::NotPositive(format!("sign-fixed vector reaches {raw_min_ratio:e} of its maximum")));
    }

    let diag = op.diagonal();
    let c = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut x: Vec<C64> = raw.iter().map(|r| C64::new(r.abs(), 0.0)).collect();
    let mut y = vec![C64::new(0.0, 0.0); x.len()];
    let max_steps = 20 * grid.shape().iter().sum::<usize>();
    let mut steps = 0;
    loop {
        let positive = x.iter().all(|z| z.re > 0.0);
        if positive && steps > 0 {
            break;
        }
        if steps >= max_steps {
            return Err(Error::NotPositive(format!("no strictly positive iterate after {steps} steps")));
        }
        for _ in 0..25 {
            op.apply(&x, &mut y);
            let mut s = 0.0;
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = C64::new((c * xi.re - yi.re).max(0.0), 0.0);
                s += xi.re * xi.re;
            }
            let inv = 1.0 / s.sqrt();
            x.iter_mut().for_each(|z| *z *= inv);
        }
        steps += 25;
    }
    let residual = relative_residual(op, &x, e);
    if residual > 10.0 * tol {
        return Err(Error::NotPositive(format!("polished vector lost accuracy: residual {residual:e}")));
    }
    let cell = grid.cell_measure();
    let norm = (x.iter().map(|z| z.re * z.re).sum::<f64>() * cell).sqrt();
    let f: Vec<f64> = x.iter().map(|z| z.re / norm).collect();
    let f_inf = f.iter().cloned().fold(0.0, f64::max);
    let mut beta_f = f64::INFINITY;
    for (i, fi) in f.iter().enumerate() {
        let p = grid.point(i);
        if p[0] * p[0] + p[1] * p[1] <= s0 * s0 {
            beta_f = beta_f.min(fi * fi);
        }
    }
    if !(beta_f > 0.0) || !beta_f.is_finite() {
        return Err(Error::NotPositive(format!("beta_f = {beta_f}")));
    }
    Ok(GroundState2D { e, e_next, f, grid, s0, beta_f, f_inf, residual, raw_min_ratio, polish_steps: steps })
}

impl GroundState2D {
    /// f at the node nearest to (x₁, x₂), zero outside the lattice.
    pub fn value_near(&self, x1: f64, x2: f64) -> f64 {
        let mut idx = [0usize; 2];
        for (d, &x) in [x1, x2].iter().enumerate() {
            let a = &self.grid.axes[d];
            let k = ((x - a.lo) / a.h()).round() as i64 - 1;
            if k < 0 || k >= a.n as i64 {
                return 0.0;
            }
            idx[d] = k as usize;
        }
        self.f[self.grid.flat(&idx)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_box_has_no_bound_state() {
        let g = Grid::square(2.0, 0.25).unwrap();
        let hv = assemble_hv(&Potential2D::Well { depth: 0.0 }, &CrossSection::Disk { radius: 1.0 }, &g, 4).unwrap();
        let rep = lowest_lattice_eigs(&hv.op, 1, 1e-10, 1, None).unwrap();
        let n = g.axes[0].n;
        let h = g.axes[0].h();
        let exact = 2.0 * 4.0 / (h * h) * (std::f64::consts::PI / (2.0 * (n + 1) as f64)).sin().powi(2);
        assert!((rep.eigenvalues[0] - exact).abs() < 1e-10);
        assert!(matches!(ground_state_2d(&hv, 1.0, 1e-9, 1), Err(Error::NoBoundState(_))));
    }

    #[test]
    fn well_ground_state_is_positive() {
        let g = Grid::square(6.0, 0.2).unwrap();
        let hv = assemble_hv(&Potential2D::Well { depth: 10.0 }, &CrossSection::Disk { radius: 1.0 }, &g, 4).unwrap();
        let gs = ground_state_2d(&hv, 1.0, 1e-9, 1).unwrap();
        assert!(gs.e < 0.0 && gs.e > -10.0);
        assert!(gs.f.iter().all(|&v| v > 0.0));
        assert!(gs.beta_f > 0.0 && gs.beta_f <= gs.f_inf * gs.f_inf);
        let total: f64 = gs.f.iter().map(|v| v * v).sum::<f64>() * g.cell_measure();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
