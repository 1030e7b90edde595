//! Quasi-modes on a straight tail of the tube.
//!
//! ψ_k(x) = k^{-1/2} f(x₁, x₂) e^{ipx₃} χ(x₃/k) lives where the field and the
//! deformation are both absent, so H acts on it as h_V ⊗ 1 + 1 ⊗ (−∂₃²). On the
//! lattice the plane wave e^{ipx₃} is an exact eigenvector of the 3-point
//! second difference with eigenvalue 4 sin²(ph₃/2)/h₃², which replaces p² so the
//! residual measures the cutoff commutator and nothing else.

use crate::error::{Error, Result};
use crate::fields::{FieldSpec, GaugeChoice};
use crate::geometry::TubeLocator;
use crate::grid::{Grid, GridAxis};
use crate::linalg::{LinearOperator, C64, ZERO};
use crate::operators::{GroundState2D, H3dBuilder};
use crate::potential::Potential2D;
use serde::{Deserialize, Serialize};

/// The C^∞ bump exp(−1/(t−1) − 1/(2−t)) scaled to peak 1, supported in (1, 2).
pub fn bump(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        return 0.0;
    }
    (4.0 - 1.0 / (t - 1.0) - 1.0 / (2.0 - t)).exp()
}

/// Everything besides (p, k) needed to build the tail operator.
pub struct TailSetup<'a> {
    pub loc: &'a TubeLocator,
    pub potential: &'a Potential2D,
    pub field: &'a FieldSpec,
    pub gauge: GaugeChoice,
    /// Subsampling used for the cell averages of V; must match h_V.
    pub sub: usize,
    /// Spacing along x₃.
    pub h3: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylProbe {
    pub p: f64,
    pub k: u32,
    pub h3: f64,
    /// e + 4 sin²(ph₃/2)/h₃², the lattice counterpart of e + p².
    pub lambda: f64,
    /// Continuum-normalized ‖ψ_k‖ (Riemann sum with cell volumes).
    pub norm: f64,
    /// ‖Hψ_k − λψ_k‖ / ‖ψ_k‖.
    pub residual: f64,
    /// Grid nodes of the tail box.
    pub nodes: usize,
}

/// Lattice along x₃ covering supp χ(·/k) = (k, 2k) with a two-cell margin.
pub fn tail_axis(k: u32, h3: f64) -> Result<GridAxis> {
    let k = k as f64;
    let lo = k - 2.0 * h3;
    let cells = ((k + 4.0 * h3) / h3).round();
    GridAxis::new(lo, lo + cells * h3, cells as usize - 1)
}

pub fn weyl_residual(gs: &GroundState2D, setup: &TailSetup<'_>, p: f64, k: u32) -> Result<WeylProbe> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let h3 = setup.h3;
    let zaxis = tail_axis(k, h3)?;
    let field_free = 2.0 * setup.field.s0;
    let straight = setup.loc.straight_beyond() + h3;
    if zaxis.lo <= field_free.max(straight) {
        return Err(Error::Precondition(format!(
            "tail box starts at x3 = {:.3}, inside the field support (2 s0 = {field_free}) or the deformed stretch ({straight:.3}); increase k",
            zaxis.lo
        )));
    }
    let lateral = &gs.grid.axes;
    let grid = Grid::new(vec![lateral[0], lateral[1], zaxis])?;
    let mut builder = H3dBuilder::new(&grid, setup.loc, setup.potential, setup.sub)?;
    if setup.field.b0 != [0.0; 3] {
        builder = builder.with_phases(setup.field, setup.gauge)?;
    }
    let op = builder.operator(setup.field.b0)?;

    let nz = zaxis.n;
    let kf = k as f64;
    let scale = 1.0 / kf.sqrt();
    let mut psi = vec![ZERO; grid.len()];
    for (l, fl) in gs.f.iter().enumerate() {
        for j in 0..nz {
            let z = zaxis.x(j);
            psi[l * nz + j] = C64::from_polar(scale * fl * bump(z / kf), p * z);
        }
    }
    let lambda = gs.e + 4.0 * (0.5 * p * h3).sin().powi(2) / (h3 * h3);
    let mut y = vec![ZERO; psi.len()];
    op.apply(&psi, &mut y);
    let mut num = 0.0;
    let mut den = 0.0;
    for (yi, xi) in y.iter().zip(&psi) {
        num += (yi - xi * lambda).norm_sqr();
        den += xi.norm_sqr();
    }
    Ok(WeylProbe {
        p,
        k,
        h3,
        lambda,
        norm: (den * grid.cell_measure()).sqrt(),
        residual: (num / den).sqrt(),
        nodes: grid.len(),
    })
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    super::linear_fit(&lx, &ly).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_supported_in_the_unit_interval() {
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(2.0), 0.0);
        assert_eq!(bump(0.3), 0.0);
        assert!((bump(1.5) - 1.0).abs() < 1e-15);
        assert!(bump(1.01) > 0.0 && bump(1.01) < 1e-30);
    }

    #[test]
    fn tail_axis_covers_the_support() {
        let a = tail_axis(8, 0.25).unwrap();
        assert!((a.h() - 0.25).abs() < 1e-12);
        assert!(a.x(0) < 8.0 && a.x(a.n - 1) > 16.0);
    }
}
