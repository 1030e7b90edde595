//! Uniform rectilinear lattices with a boundary tag on every face.
//!
//! Along each axis the box [lo, hi] holds `n` nodes at lo + (i + 1)h with
//! h = (hi − lo)/(n + 1), so the faces sit where a Dirichlet ghost node would.
//! A Dirichlet face contributes the ghost link to the diagonal; a Neumann face
//! simply has no link, which places the effective wall half a spacing outside
//! the last node.

use crate::eigsolve::precond::AxisSpec;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub bc: [Bc; 2],
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n < 3 {
            return Err(Error::InvalidInput(format!("axis [{lo}, {hi}] with {n} nodes: need hi > lo and n >= 3")));
        }
        Ok(GridAxis { lo, hi, n, bc: [Bc::Dirichlet; 2] })
    }

    /// Node count chosen so the spacing is as close to `h` as possible.
    pub fn with_spacing(lo: f64, hi: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidInput(format!("spacing must be positive, got {h}")));
        }
        let cells = ((hi - lo) / h).round().max(4.0) as usize;
        GridAxis::new(lo, hi, cells - 1)
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / (self.n + 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + (i + 1) as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn spec(&self) -> AxisSpec {
        AxisSpec { n: self.n, h: self.h(), dirichlet_lo: self.bc[0] == Bc::Dirichlet, dirichlet_hi: self.bc[1] == Bc::Dirichlet }
    }
}

/// A 2D or 3D lattice; nodes are stored row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<GridAxis>,
}

pub type Grid2 = Grid;
pub type Grid3 = Grid;

impl Grid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidInput("grids have 1 to 3 axes".into()));
        }
        Ok(Grid { axes })
    }

    /// Square box [−L, L]² with spacing close to h, Dirichlet faces.
    pub fn square(half: f64, h: f64) -> Result<Self> {
        let a = GridAxis::with_spacing(-half, half, h)?;
        Grid::new(vec![a, a])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for d in (0..self.dim().saturating_sub(1)).rev() {
            s[d] = s[d + 1] * self.axes[d + 1].n;
        }
        s
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.h()).collect()
    }

    /// Multi-index of a flat node index.
    pub fn index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            idx[d] = flat % self.axes[d].n;
            flat /= self.axes[d].n;
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.index(flat).iter().zip(&self.axes).map(|(&i, a)| a.x(i)).collect()
    }

    /// Volume (area) of one lattice cell.
    pub fn cell_measure(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub fn with_bc(mut self, axis: usize, bc: [Bc; 2]) -> Self {
        self.axes[axis].bc = bc;
        self
    }

    pub fn axis_specs(&self) -> Vec<AxisSpec> {
        self.axes.iter().map(|a| a.spec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_roundtrip() {
        let g = Grid::new(vec![
            GridAxis::new(0.0, 1.0, 4).unwrap(),
            GridAxis::new(-1.0, 1.0, 5).unwrap(),
            GridAxis::new(0.0, 3.0, 3).unwrap(),
        ])
        .unwrap();
        assert_eq!(g.strides(), vec![15, 3, 1]);
        for f in 0..g.len() {
            assert_eq!(g.flat(&g.index(f)), f);
        }
        assert!((g.point(0)[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn spacing_rounding() {
        let a = GridAxis::with_spacing(-12.0, 12.0, 0.05).unwrap();
        assert_eq!(a.n, 479);
        assert!((a.h() - 0.05).abs() < 1e-14);
        assert!(GridAxis::new(0.0, 1.0, 2).is_err());
    }
}
