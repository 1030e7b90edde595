//! The 3D Hamiltonian H = (i∇ + A)² − Ṽ on a rectilinear lattice.
//!
//! Link phases are the 3-point Gauss values of ∫A·dl. Both gauges have A₂ ≡ 0,
//! so only links along x₁ and x₃ carry phases. A is linear in B⁰, so the tables
//! are computed once per unit component and combined for any B⁰; a field sweep
//! pays for the gauge quadrature once.

use super::LatticeOperator;
use crate::error::{Error, Result};
use crate::fields::{FieldGauge, FieldSpec, GaugeChoice};
use crate::geometry::{TubeLocator, Vec3};
use crate::grid::Grid;
use crate::potential::{cell_average_2d, cell_average_3d, Potential2D};
use crate::quadrature::{GAUSS3_T, GAUSS3_W};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Cell-averaged Ṽ on every node. Planes entirely inside the straight tails
/// reuse the 2D averages, which makes the tails coincide with h_V exactly.
pub fn potential_3d(v: &Potential2D, loc: &TubeLocator, grid: &Grid, sub: usize) -> Result<Vec<f64>> {
    if grid.dim() != 3 {
        return Err(Error::InvalidInput("expected a 3D grid".into()));
    }
    let h = grid.spacing();
    let (a0, a1, a2) = (grid.axes[0], grid.axes[1], grid.axes[2]);
    let plane = a0.n * a1.n;
    let lateral: Vec<f64> = (0..plane)
        .map(|l| cell_average_2d(v, loc.section(), [a0.x(l / a1.n), a1.x(l % a1.n)], [h[0], h[1]], sub))
        .collect();
    let tail = loc.straight_beyond();
    let planes: Vec<Vec<f64>> = (0..a2.n)
        .into_par_iter()
        .map(|k| {
            let z = a2.x(k);
            if z.abs() - 0.5 * h[2] > tail {
                return lateral.clone();
            }
            (0..plane)
                .map(|l| cell_average_3d(v, loc, [a0.x(l / a1.n), a1.x(l % a1.n), z], [h[0], h[1], h[2]], sub))
                .collect()
        })
        .collect();
    // planes are indexed by the last axis; interleave into row-major order
    let mut out = vec![0.0; grid.len()];
    for (k, p) in planes.iter().enumerate() {
        for (l, val) in p.iter().enumerate() {
            out[l * a2.n + k] = *val;
        }
    }
    Ok(out)
}

/// Forward-link phases for unit field components.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseTable {
    pub grid: Grid,
    pub gauge: GaugeChoice,
    pub s0: f64,
    pub rho: [f64; 2],
    /// theta[c] = Some([axis-0 phases, axis-2 phases]) for unit B⁰ = e_c
    #[serde(skip)]
    pub theta: [Option<[Vec<f64>; 2]>; 3],
}

impl PhaseTable {
    /// Tables for every component with `wanted[c]` set.
    pub fn compute(field: &FieldSpec, gauge: GaugeChoice, grid: &Grid, wanted: [bool; 3]) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(Error::InvalidInput("expected a 3D grid".into()));
        }
        let mut theta: [Option<[Vec<f64>; 2]>; 3] = [None, None, None];
        for c in 0..3 {
            if !wanted[c] {
                continue;
            }
            let mut unit = [0.0; 3];
            unit[c] = 1.0;
            let g = FieldGauge::new(field.with_b0(unit), gauge);
            let mut per_axis: Vec<Vec<f64>> = Vec::new();
            for (slot, axis) in [(0usize, 0usize), (1, 2)] {
                let ax = grid.axes[axis];
                let h = ax.h();
                let stride = grid.strides()[axis];
                let vals: Vec<f64> = (0..grid.len())
                    .into_par_iter()
                    .map(|i| {
                        if (i / stride) % ax.n + 1 >= ax.n {
                            return Ok(0.0);
                        }
                        let p = grid.point(i);
                        let mut acc = 0.0;
                        for (t, w) in GAUSS3_T.iter().zip(GAUSS3_W) {
                            let mut x = [p[0], p[1], p[2]];
                            x[axis] += t * h;
                            acc += w * if slot == 0 { g.a1(x)? } else { g.a3(x)? };
                        }
                        Ok(acc * h)
                    })
                    .collect::<Result<_>>()?;
                per_axis.push(vals);
            }
            let a2 = per_axis.pop().unwrap();
            let a0 = per_axis.pop().unwrap();
            theta[c] = Some([a0, a2]);
        }
        Ok(PhaseTable { grid: grid.clone(), gauge, s0: field.s0, rho: [field.rho1, field.rho2], theta })
    }

    /// Which components are available.
    pub fn components(&self) -> [bool; 3] {
        [self.theta[0].is_some(), self.theta[1].is_some(), self.theta[2].is_some()]
    }

    /// Per-axis phases for the field B⁰ (axis 1 carries none).
    pub fn combine(&self, b0: Vec3) -> Result<[Vec<f64>; 2]> {
        let n = self.grid.len();
        let mut out = [vec![0.0; n], vec![0.0; n]];
        for c in 0..3 {
            if b0[c] == 0.0 {
                continue;
            }
            let t = self.theta[c]
                .as_ref()
                .ok_or_else(|| Error::InvalidInput(format!("phase table lacks field component {c}")))?;
            for a in 0..2 {
                for (o, v) in out[a].iter_mut().zip(&t[a]) {
                    *o += b0[c] * v;
                }
            }
        }
        Ok(out)
    }

    /// Binary cache: JSON header line, then little-endian f64 tables.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "{}", serde_json::to_string(self)?)?;
        f.write_all(&[self.theta[0].is_some() as u8, self.theta[1].is_some() as u8, self.theta[2].is_some() as u8])?;
        for t in self.theta.iter().flatten() {
            for v in t.iter().flatten() {
                f.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| Error::InvalidInput("bad phase cache".into()))?;
        let mut table: PhaseTable = serde_json::from_slice(&bytes[..nl])?;
        let mut rest = &bytes[nl + 1..];
        let mut flags = [0u8; 3];
        rest.read_exact(&mut flags)?;
        let n = table.grid.len();
        let mut buf = [0u8; 8];
        for c in 0..3 {
            if flags[c] == 1 {
                let mut arr = [Vec::with_capacity(n), Vec::with_capacity(n)];
                for a in arr.iter_mut() {
                    for _ in 0..n {
                        rest.read_exact(&mut buf)?;
                        a.push(f64::from_le_bytes(buf));
                    }
                }
                table.theta[c] = Some(arr);
            }
        }
        Ok(table)
    }
}

/// Potential and phase tables on a fixed lattice, ready to produce H for any B⁰.
pub struct H3dBuilder {
    pub grid: Grid,
    pub potential: Vec<f64>,
    pub phases: Option<PhaseTable>,
}

impl H3dBuilder {
    pub fn new(grid: &Grid, loc: &TubeLocator, v: &Potential2D, sub: usize) -> Result<Self> {
        Ok(H3dBuilder { grid: grid.clone(), potential: potential_3d(v, loc, grid, sub)?, phases: None })
    }

    pub fn with_phases(mut self, field: &FieldSpec, gauge: GaugeChoice) -> Result<Self> {
        let wanted = [field.b0[0] != 0.0, field.b0[1] != 0.0, field.b0[2] != 0.0];
        self.phases = Some(PhaseTable::compute(field, gauge, &self.grid, wanted)?);
        Ok(self)
    }

    pub fn with_table(mut self, table: PhaseTable) -> Result<Self> {
        if table.grid != self.grid {
            return Err(Error::InvalidInput("phase table grid does not match".into()));
        }
        self.phases = Some(table);
        Ok(self)
    }

    pub fn operator(&self, b0: Vec3) -> Result<LatticeOperator> {
        if b0 == [0.0; 3] || self.phases.is_none() {
            if b0 != [0.0; 3] {
                return Err(Error::InvalidInput("nonzero field without phase tables".into()));
            }
            return Ok(LatticeOperator::new(&self.grid, &self.potential, &[]));
        }
        let [p0, p2] = self.phases.as_ref().unwrap().combine(b0)?;
        Ok(LatticeOperator::new(&self.grid, &self.potential, &[Some(&p0), None, Some(&p2)]))
    }
}

/// One-shot assembly of H for the field's own B⁰.
pub fn assemble_h3d(
    loc: &TubeLocator,
    v: &Potential2D,
    field: &FieldSpec,
    gauge: GaugeChoice,
    grid: &Grid,
    sub: usize,
) -> Result<LatticeOperator> {
    let b = H3dBuilder::new(grid, loc, v, sub)?;
    let b = if field.b0 == [0.0; 3] { b } else { b.with_phases(field, gauge)? };
    b.operator(field.b0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigsolve::dense_fallback;
    use crate::fields::make_field;
    use crate::geometry::{build_curve, CrossSection, CurveSpec, Profile};
    use crate::grid::GridAxis;
    use crate::linalg::{hermiticity_defect, LinearOperator};
    use std::sync::Arc;

    fn small_grid() -> Grid {
        Grid::new(vec![
            GridAxis::new(-2.0, 2.0, 9).unwrap(),
            GridAxis::new(-2.0, 2.0, 9).unwrap(),
            GridAxis::new(-3.0, 3.0, 13).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn free_box_matches_closed_form() {
        let g = small_grid();
        let loc = TubeLocator::new(Arc::new(build_curve(&CurveSpec::new(Profile::Straight)).unwrap()), CrossSection::Disk { radius: 0.5 });
        let op = assemble_h3d(&loc, &Potential2D::Well { depth: 0.0 }, &make_field([0.0; 3], 1.0).unwrap(), GaugeChoice::Landau, &g, 4).unwrap();
        let d = dense_fallback(&op).unwrap();
        let lam = |h: f64, n: usize| 4.0 / (h * h) * (std::f64::consts::PI / (2.0 * (n + 1) as f64)).sin().powi(2);
        let exact = 2.0 * lam(0.4, 9) + lam(6.0 / 14.0, 13);
        assert!((d.eigenvalues[0] - exact).abs() < 1e-10);
    }

    #[test]
    fn landau_and_mirror_spectra_agree() {
        let g = small_grid();
        let loc = TubeLocator::new(Arc::new(build_curve(&CurveSpec::new(Profile::Straight)).unwrap()), CrossSection::Disk { radius: 0.8 });
        let f = make_field([0.3, -0.2, 1.0], 1.0).unwrap();
        let v = Potential2D::Well { depth: 3.0 };
        let a = assemble_h3d(&loc, &v, &f, GaugeChoice::Landau, &g, 4).unwrap();
        let b = assemble_h3d(&loc, &v, &f, GaugeChoice::Mirror, &g, 4).unwrap();
        assert!(hermiticity_defect(&a, 20, 3) < 1e-12);
        let (da, db) = (dense_fallback(&a).unwrap(), dense_fallback(&b).unwrap());
        for j in 0..5 {
            let rel = (da.eigenvalues[j] - db.eigenvalues[j]).abs() / (1.0 + da.eigenvalues[j].abs());
            assert!(rel < 1e-8, "{j}: {rel:e}");
        }
        // and the field really couples
        let z = assemble_h3d(&loc, &v, &f.with_b0([0.0; 3]), GaugeChoice::Landau, &g, 4).unwrap();
        assert!((dense_fallback(&z).unwrap().eigenvalues[0] - da.eigenvalues[0]).abs() > 1e-3);
        assert_eq!(a.dim(), g.len());
    }

    #[test]
    fn phase_cache_roundtrip() {
        let g = small_grid();
        let f = make_field([0.0, 0.0, 1.0], 1.0).unwrap();
        let t = PhaseTable::compute(&f, GaugeChoice::Landau, &g, [false, false, true]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("phases.bin");
        t.write(&p).unwrap();
        let back = PhaseTable::read(&p).unwrap();
        assert_eq!(back.components(), [false, false, true]);
        assert_eq!(back.combine([0.0, 0.0, 2.0]).unwrap(), t.combine([0.0, 0.0, 2.0]).unwrap());
    }
}
