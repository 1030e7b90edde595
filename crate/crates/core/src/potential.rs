//! Cross-section potentials V ≥ 0 supported in ω, their lift Ṽ to the tube, and
//! cell averages used by the lattice operators.
//!
//! Coordinates: V is a function of the section point p = (r cos θ, r sin θ).
//! On a straight stretch with the inertial frame the tube map sends (s, r, θ) to
//! (−r cos θ, −r sin θ, s), so the lifted potential there reads
//! Ṽ(x₁, x₂, x₃) = V(−x₁, −x₂). [`Potential2D::planar`] applies that reflection,
//! which makes the 2D threshold operator coincide exactly with the tails of the
//! 3D one. For point-symmetric V (all built-ins) the reflection is invisible.

use crate::geometry::{CrossSection, TubeLocator, Vec3};
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub enum Potential2D {
    /// depth · 1_ω; with depth = 1/ε this is the weak-coupling family used by the absorption sweep.
    Well { depth: f64 },
    /// Arbitrary bounded V ≥ 0 on section coordinates (multiplied by 1_ω).
    Custom { f: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>, sup: f64 },
}

impl fmt::Debug for Potential2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential2D::Well { depth } => write!(f, "Well({depth})"),
            Potential2D::Custom { sup, .. } => write!(f, "Custom(sup = {sup})"),
        }
    }
}

impl Potential2D {
    /// V at a section point.
    pub fn eval(&self, section: &CrossSection, p: [f64; 2]) -> f64 {
        if !section.contains(p) {
            return 0.0;
        }
        match self {
            Potential2D::Well { depth } => *depth,
            Potential2D::Custom { f, .. } => f(p).max(0.0),
        }
    }

    /// V seen by the 2D operator at (x₁, x₂): the straight-tail restriction of Ṽ.
    pub fn planar(&self, section: &CrossSection, x1: f64, x2: f64) -> f64 {
        self.eval(section, [-x1, -x2])
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Potential2D::Well { depth } => *depth,
            Potential2D::Custom { sup, .. } => *sup,
        }
    }

    /// True when V is constant on ω, so that only cells cut by ∂ω need
    /// sub-sampling.
    pub fn piecewise_constant(&self) -> bool {
        matches!(self, Potential2D::Well { .. })
    }

    /// sup over ω×ω of |V(x) − V(y)|. Exact for wells; sampled on a 201² grid
    /// over the bounding box otherwise.
    pub fn oscillation(&self, section: &CrossSection) -> f64 {
        match self {
            Potential2D::Well { depth } => *depth,
            Potential2D::Custom { .. } => {
                let r = section.r_max();
                let m = 201;
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for i in 0..m {
                    for j in 0..m {
                        let p = [-r + 2.0 * r * i as f64 / (m - 1) as f64, -r + 2.0 * r * j as f64 / (m - 1) as f64];
                        if section.contains(p) {
                            let v = self.eval(section, p);
                            lo = lo.min(v);
                            hi = hi.max(v);
                        }
                    }
                }
                if hi >= lo {
                    hi - lo
                } else {
                    0.0
                }
            }
        }
    }
}

/// Ṽ(x): V at the section coordinates of x when x lies in the tube, else 0.
pub fn lift_potential(v: &Potential2D, loc: &TubeLocator, x: Vec3) -> f64 {
    match loc.locate(x) {
        Some(c) => v.eval(loc.section(), c.section_point()),
        None => 0.0,
    }
}

fn offsets(sub: usize) -> Vec<f64> {
    (0..sub).map(|j| (j as f64 + 0.5) / sub as f64 - 0.5).collect()
}

/// Mean of V over the lattice cell of size h centred at (x₁, x₂). Cells well
/// inside or outside ω take the centre value.
pub fn cell_average_2d(v: &Potential2D, section: &CrossSection, x: [f64; 2], h: [f64; 2], sub: usize) -> f64 {
    let p = [-x[0], -x[1]];
    let half_diag = 0.5 * h[0].hypot(h[1]);
    if sub <= 1 || (v.piecewise_constant() && section.boundary_distance(p) > 1.5 * half_diag) {
        return v.eval(section, p);
    }
    let o = offsets(sub);
    let mut acc = 0.0;
    for &a in &o {
        for &b in &o {
            acc += v.planar(section, x[0] + a * h[0], x[1] + b * h[1]);
        }
    }
    acc / (sub * sub) as f64
}

/// Mean of Ṽ over the 3D lattice cell of size h centred at x.
pub fn cell_average_3d(v: &Potential2D, loc: &TubeLocator, x: Vec3, h: Vec3, sub: usize) -> f64 {
    let section = loc.section();
    let half_diag = 0.5 * (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    // the tube map distorts lengths by at most 1/(1 − r_max sup|γ|); stay generous
    let margin = 2.0 * half_diag;
    let foot = loc.foot_point(x);
    if sub <= 1 {
        return foot.map_or(0.0, |c| v.eval(section, c.section_point()));
    }
    if v.piecewise_constant() {
        match foot {
            Some(c) if section.boundary_distance(c.section_point()) > margin => {
                return v.eval(section, c.section_point());
            }
            None => {
                // no foot point within r_max: the cell can only graze the tube
                let any_near = [-0.5, 0.5].iter().any(|&a| {
                    [-0.5, 0.5].iter().any(|&b| {
                        [-0.5, 0.5].iter().any(|&c| {
                            loc.foot_point([x[0] + a * h[0], x[1] + b * h[1], x[2] + c * h[2]]).is_some()
                        })
                    })
                });
                if !any_near {
                    return 0.0;
                }
            }
            _ => {}
        }
    }
    let o = offsets(sub);
    let mut acc = 0.0;
    for &a in &o {
        for &b in &o {
            for &c in &o {
                acc += lift_potential(v, loc, [x[0] + a * h[0], x[1] + b * h[1], x[2] + c * h[2]]);
            }
        }
    }
    acc / (sub * sub * sub) as f64
}
