//! Constants of the absorption bound and the side conditions it needs.

use crate::error::{Error, Result};
use crate::geometry::{CrossSection, TubeLocator};
use crate::operators::GroundState2D;
use crate::potential::{lift_potential, Potential2D};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Theorem2Constants {
    /// Slope of the disk ground energy used as α.
    pub alpha: f64,
    pub beta_f: f64,
    pub f_inf: f64,
    /// C = α β_f / (2 ‖f‖∞²).
    pub c: f64,
    pub epsilon: Option<f64>,
    /// 2/(Cε): field strength beyond which the bound guarantees no eigenvalue
    /// below e.
    pub predicted_threshold: Option<f64>,
}

pub fn theorem2_constants(gs: &GroundState2D, alpha: f64, epsilon: Option<f64>) -> Result<Theorem2Constants> {
    if !(gs.beta_f > 0.0) {
        return Err(Error::NotPositive(format!("beta_f = {} (positivity failure of the ground state)", gs.beta_f)));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    let c = alpha * gs.beta_f / (2.0 * gs.f_inf * gs.f_inf);
    if let Some(eps) = epsilon {
        if !(eps > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
        }
    }
    Ok(Theorem2Constants {
        alpha,
        beta_f: gs.beta_f,
        f_inf: gs.f_inf,
        c,
        epsilon,
        predicted_threshold: epsilon.map(|eps| 2.0 / (c * eps)),
    })
}

/// sup_{ω×ω} |V(x) − V(y)| ≤ C·B₃⁰.
pub fn check_assumption2(v: &Potential2D, section: &CrossSection, c: f64, b3: f64) -> bool {
    v.oscillation(section) <= c * b3
}

/// How far the lifted potential departs from V(x₁, x₂) on the ball slab
/// B(0, s₀) ∩ {|x₃| ≤ s₀/√2}, weighted by f².
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialMismatch {
    /// ∫ (Ṽ − V) f² over the slab.
    pub integral: f64,
    /// ∫ |Ṽ − V| f² over the slab.
    pub abs_integral: f64,
    /// Volume of the slab where Ṽ ≠ V at the sample points.
    pub support_volume: f64,
}

/// Midpoint-rule evaluation on the lateral lattice of `gs` times a uniform
/// x₃ lattice of the same spacing.
pub fn potential_mismatch(gs: &GroundState2D, loc: &TubeLocator, v: &Potential2D, s0: f64) -> PotentialMismatch {
    let g = &gs.grid;
    let h = g.spacing();
    let h3 = h[0];
    let zmax = s0 / 2f64.sqrt();
    let nz = (2.0 * zmax / h3).ceil() as usize;
    let dz = 2.0 * zmax / nz as f64;
    let section = loc.section();
    let per_node: Vec<(f64, f64, f64)> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let p = g.point(i);
            let base = v.planar(section, p[0], p[1]);
            let f2 = gs.f[i] * gs.f[i];
            let (mut s, mut a, mut vol) = (0.0, 0.0, 0.0);
            for j in 0..nz {
                let z = -zmax + (j as f64 + 0.5) * dz;
                if p[0] * p[0] + p[1] * p[1] + z * z > s0 * s0 {
                    continue;
                }
                let d = lift_potential(v, loc, [p[0], p[1], z]) - base;
                s += d * f2;
                a += d.abs() * f2;
                if d != 0.0 {
                    vol += 1.0;
                }
            }
            (s, a, vol)
        })
        .collect();
    let w = g.cell_measure() * dz;
    PotentialMismatch {
        integral: w * per_node.iter().map(|t| t.0).sum::<f64>(),
        abs_integral: w * per_node.iter().map(|t| t.1).sum::<f64>(),
        support_volume: w * per_node.iter().map(|t| t.2).sum::<f64>(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn flat_state(value: f64, s0: f64) -> GroundState2D {
        let grid = Grid::square(2.0, 0.5).unwrap();
        let n = grid.len();
        GroundState2D {
            e: -1.0,
            e_next: -0.5,
            f: vec![value; n],
            grid,
            s0,
            beta_f: value * value,
            f_inf: value,
            residual: 0.0,
            raw_min_ratio: 1.0,
            polish_steps: 0,
        }
    }

    #[test]
    fn flat_ground_state_gives_half_alpha() {
        let c = theorem2_constants(&flat_state(0.7, 1.0), 0.59, Some(0.1)).unwrap();
        assert!((c.c - 0.295).abs() < 1e-15);
        let c2 = theorem2_constants(&flat_state(0.7, 1.0), 0.59, Some(0.05)).unwrap();
        let ratio = c2.predicted_threshold.unwrap() / c.predicted_threshold.unwrap();
        assert!((ratio - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_beta_is_rejected() {
        let mut gs = flat_state(0.7, 1.0);
        gs.beta_f = 0.0;
        assert!(theorem2_constants(&gs, 0.59, None).is_err());
    }

    #[test]
    fn assumption2_on_wells() {
        let sec = CrossSection::Disk { radius: 1.0 };
        let v = Potential2D::Well { depth: 10.0 };
        assert!(!check_assumption2(&v, &sec, 0.3, 0.0));
        assert!(check_assumption2(&v, &sec, 0.5, 20.0));
        assert!(!check_assumption2(&v, &sec, 0.5, 19.9));
    }
}
