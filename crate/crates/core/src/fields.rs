//! Compactly supported magnetic fields and the two one-sided gauges.
//!
//! The field is B = rot(χ(|x|) A₀) with A₀ = ½ B⁰ × x, which expands to
//!
//! ```text
//! B(x) = B⁰ (χ + ρχ'/2) − (g/2) x (x·B⁰),   ρ = |x|,  g = χ'/ρ.
//! ```
//!
//! It is divergence free by construction, equals B⁰ on ρ ≤ ρ₁ and vanishes on
//! ρ ≥ ρ₂. The cutoff χ = 1 − S((ρ − ρ₁)/(ρ₂ − ρ₁)) uses the septic smoothstep
//! S(t) = 35t⁴ − 84t⁵ + 70t⁶ − 20t⁷, so B is C² and its Jacobian is C¹.
//!
//! Gauges. The Landau gauge anchored at x₃ = 2s₀ has A₂ = 0 and
//!
//! ```text
//! A₁ = ∫_{2s₀}^{x₃}∫₀^{x₂} ∂₁B₁(x₁,y,t) dy dt + ∫_{2s₀}^{x₃} B₂(x₁,x₂,t) dt
//! A₃ = ∫₀^{x₂} B₁(x₁,y,x₃) dy.
//! ```
//!
//! Using div B = 0 to trade ∂₁B₁ for −∂₂B₂ − ∂₃B₃ collapses the double integral:
//!
//! ```text
//! A₁ = ∫_{2s₀}^{x₃} B₂(x₁,0,t) dt − ∫₀^{x₂} B₃(x₁,y,x₃) dy,
//! ```
//!
//! because B vanishes on the plane x₃ = 2s₀ wherever the inner integral reaches.
//! Only one-dimensional line integrals remain; the literal double integral is
//! kept in the tests as an independent check. The mirror gauge is the same
//! construction anchored at −2s₀.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::quadrature::integrate_split;
use serde::{Deserialize, Serialize};

/// Septic smoothstep and its first two derivatives.
fn septic(t: f64) -> (f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let u = 1.0 - t;
    let s = t2 * t2 * (35.0 - 84.0 * t + 70.0 * t2 - 20.0 * t3);
    let ds = 140.0 * t3 * u * u * u;
    let dds = 420.0 * t2 * u * u * (1.0 - 2.0 * t);
    (s, ds, dds)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub b0: Vec3,
    pub s0: f64,
    pub rho1: f64,
    pub rho2: f64,
}

/// The field constant on B(0, s₀) and supported in B(0, 2s₀), with the default
/// shell radii ρ₁ = 1.2s₀, ρ₂ = 1.8s₀.
pub fn make_field(b0: Vec3, s0: f64) -> Result<FieldSpec> {
    FieldSpec::with_shell(b0, s0, 1.2 * s0, 1.8 * s0)
}

impl FieldSpec {
    pub fn with_shell(b0: Vec3, s0: f64, rho1: f64, rho2: f64) -> Result<Self> {
        if !(s0 > 0.0) {
            return Err(Error::InvalidInput(format!("s0 must be positive, got {s0}")));
        }
        if !(s0 <= rho1 && rho1 < rho2 && rho2 <= 2.0 * s0) {
            return Err(Error::InvalidInput(format!(
                "shell radii must satisfy s0 <= rho1 < rho2 <= 2 s0 (got {rho1}, {rho2})"
            )));
        }
        if b0.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("B0 must be finite".into()));
        }
        Ok(FieldSpec { b0, s0, rho1, rho2 })
    }

    pub fn with_b0(&self, b0: Vec3) -> Self {
        FieldSpec { b0, ..*self }
    }

    pub fn b0_norm(&self) -> f64 {
        (self.b0[0] * self.b0[0] + self.b0[1] * self.b0[1] + self.b0[2] * self.b0[2]).sqrt()
    }

    /// Radius beyond which B vanishes identically.
    pub fn support_radius(&self) -> f64 {
        self.rho2
    }

    /// χ(ρ), χ'(ρ), χ''(ρ).
    pub fn cutoff(&self, rho: f64) -> (f64, f64, f64) {
        if rho <= self.rho1 {
            return (1.0, 0.0, 0.0);
        }
        if rho >= self.rho2 {
            return (0.0, 0.0, 0.0);
        }
        let w = self.rho2 - self.rho1;
        let (s, ds, dds) = septic((rho - self.rho1) / w);
        (1.0 - s, -ds / w, -dds / (w * w))
    }

    pub fn b(&self, x: Vec3) -> Vec3 {
        let rho2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        if rho2 <= self.rho1 * self.rho1 {
            return self.b0;
        }
        if rho2 >= self.rho2 * self.rho2 {
            return [0.0; 3];
        }
        let rho = rho2.sqrt();
        let (chi, dchi, _) = self.cutoff(rho);
        let g = dchi / rho;
        let c = chi + 0.5 * rho * dchi;
        let xb = x[0] * self.b0[0] + x[1] * self.b0[1] + x[2] * self.b0[2];
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = self.b0[i] * c - 0.5 * g * x[i] * xb;
        }
        out
    }

    /// Jacobian J[i][j] = ∂B_i/∂x_j in closed form.
    pub fn jacobian(&self, x: Vec3) -> [[f64; 3]; 3] {
        let rho = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let mut j = [[0.0; 3]; 3];
        if rho <= self.rho1 || rho >= self.rho2 {
            return j;
        }
        let (_, d1, d2) = self.cutoff(rho);
        let g = d1 / rho;
        let dg = (d2 * rho - d1) / (rho * rho);
        // c(ρ) = χ + ρχ'/2, c' = 3χ'/2 + ρχ''/2
        let dc = 1.5 * d1 + 0.5 * rho * d2;
        let xb = x[0] * self.b0[0] + x[1] * self.b0[1] + x[2] * self.b0[2];
        for i in 0..3 {
            for k in 0..3 {
                let u = x[k] / rho;
                let delta = if i == k { 1.0 } else { 0.0 };
                j[i][k] = self.b0[i] * dc * u - 0.5 * dg * u * x[i] * xb - 0.5 * g * (delta * xb + x[i] * self.b0[k]);
            }
        }
        j
    }

    /// Central-difference divergence of B with step h.
    pub fn divergence_fd(&self, x: Vec3, h: f64) -> f64 {
        let mut d = 0.0;
        for k in 0..3 {
            let mut p = x;
            let mut m = x;
            p[k] += h;
            m[k] -= h;
            d += (self.b(p)[k] - self.b(m)[k]) / (2.0 * h);
        }
        d
    }

    /// Absolute quadrature tolerance 1e-10·(1 + ‖B⁰‖ s₀²).
    pub fn default_tol(&self) -> f64 {
        1e-10 * (1.0 + self.b0_norm() * self.s0 * self.s0)
    }

    /// ∫ₐᵇ B_comp(p + t e_axis) dt, where p has a zero `axis` coordinate. The range
    /// is clipped to the support ball and split at the shell radii.
    pub fn line_integral(&self, comp: usize, p: Vec3, axis: usize, a: f64, b: f64, tol: f64) -> Result<f64> {
        if a == b || self.b0.iter().all(|&c| c == 0.0) {
            return Ok(0.0);
        }
        let q2: f64 = (0..3).filter(|&k| k != axis).map(|k| p[k] * p[k]).sum();
        let r2 = self.rho2 * self.rho2;
        if q2 >= r2 {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let reach = (r2 - q2).sqrt();
        let (lo, hi) = (lo.max(-reach), hi.min(reach));
        if lo >= hi {
            return Ok(0.0);
        }
        let mut breaks = Vec::with_capacity(3);
        if self.rho1 * self.rho1 > q2 {
            let t = (self.rho1 * self.rho1 - q2).sqrt();
            breaks.push(-t);
            breaks.push(t);
        }
        let f = |t: f64| {
            let mut x = p;
            x[axis] = t;
            self.b(x)[comp]
        };
        Ok(sign * integrate_split(f, lo, hi, &breaks, tol)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeChoice {
    /// Vanishes for x₃ > 2s₀.
    Landau,
    /// Vanishes for x₃ < −2s₀.
    Mirror,
}

/// A vector potential evaluator for one field and one gauge.
#[derive(Clone, Copy, Debug)]
pub struct FieldGauge {
    pub field: FieldSpec,
    pub choice: GaugeChoice,
    pub tol: f64,
}

impl FieldGauge {
    pub fn new(field: FieldSpec, choice: GaugeChoice) -> Self {
        FieldGauge { field, choice, tol: field.default_tol() }
    }

    /// x₃ where the A₁ integration starts.
    pub fn anchor(&self) -> f64 {
        match self.choice {
            GaugeChoice::Landau => 2.0 * self.field.s0,
            GaugeChoice::Mirror => -2.0 * self.field.s0,
        }
    }

    pub fn a1(&self, x: Vec3) -> Result<f64> {
        let f = &self.field;
        let t1 = f.line_integral(1, [x[0], 0.0, 0.0], 2, self.anchor(), x[2], self.tol * 0.5)?;
        let t2 = f.line_integral(2, [x[0], 0.0, x[2]], 1, 0.0, x[1], self.tol * 0.5)?;
        Ok(t1 - t2)
    }

    pub fn a3(&self, x: Vec3) -> Result<f64> {
        self.field.line_integral(0, [x[0], 0.0, x[2]], 1, 0.0, x[1], self.tol)
    }

    pub fn eval(&self, x: Vec3) -> Result<Vec3> {
        Ok([self.a1(x)?, 0.0, self.a3(x)?])
    }
}

pub fn landau_gauge(field: &FieldSpec, x: Vec3) -> Result<Vec3> {
    FieldGauge::new(*field, GaugeChoice::Landau).eval(x)
}

pub fn mirror_gauge(field: &FieldSpec, x: Vec3) -> Result<Vec3> {
    FieldGauge::new(*field, GaugeChoice::Mirror).eval(x)
}

/// Central-difference curl of A minus B at each sample, maximum per component
/// of the curl system ∂₂A₃ − ∂₃A₂ = B₁, ∂₃A₁ − ∂₁A₃ = B₂, ∂₁A₂ − ∂₂A₁ = B₃.
pub fn check_curl_system<G>(field: &FieldSpec, gauge: G, samples: &[Vec3], h: f64) -> Result<[f64; 3]>
where
    G: Fn(Vec3) -> Result<Vec3>,
{
    let mut worst = [0.0f64; 3];
    for &x in samples {
        let mut d = [[0.0; 3]; 3]; // d[j][i] = ∂_j A_i
        for j in 0..3 {
            let (mut p, mut m) = (x, x);
            p[j] += h;
            m[j] -= h;
            let (ap, am) = (gauge(p)?, gauge(m)?);
            for i in 0..3 {
                d[j][i] = (ap[i] - am[i]) / (2.0 * h);
            }
        }
        let curl = [d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]];
        let b = field.b(x);
        for i in 0..3 {
            worst[i] = worst[i].max((curl[i] - b[i]).abs());
        }
    }
    Ok(worst)
}

/// Curl-system residuals over the interior of an n³ lattice on [−L, L]³, with
/// the gauge evaluated once per node and differenced on the lattice itself.
pub fn curl_residual_on_lattice(gauge: &FieldGauge, n: usize, half_extent: f64) -> Result<[f64; 3]> {
    use rayon::prelude::*;
    let h = 2.0 * half_extent / (n - 1) as f64;
    let coord = |i: usize| -half_extent + h * i as f64;
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let a: Vec<[f64; 2]> = (0..n * n * n)
        .into_par_iter()
        .map(|l| {
            let (i, j, k) = (l / (n * n), (l / n) % n, l % n);
            let x = [coord(i), coord(j), coord(k)];
            Ok([gauge.a1(x)?, gauge.a3(x)?])
        })
        .collect::<Result<_>>()?;
    let worst = (1..n - 1)
        .into_par_iter()
        .map(|i| {
            let mut w = [0.0f64; 3];
            for j in 1..n - 1 {
                for k in 1..n - 1 {
                    let x = [coord(i), coord(j), coord(k)];
                    let b = gauge.field.b(x);
                    let d = |p: usize, m: usize, c: usize| (a[p][c] - a[m][c]) / (2.0 * h);
                    // A = (A₁, 0, A₃)
                    let c1 = d(idx(i, j + 1, k), idx(i, j - 1, k), 1);
                    let c2 = d(idx(i, j, k + 1), idx(i, j, k - 1), 0) - d(idx(i + 1, j, k), idx(i - 1, j, k), 1);
                    let c3 = -d(idx(i, j + 1, k), idx(i, j - 1, k), 0);
                    w[0] = w[0].max((c1 - b[0]).abs());
                    w[1] = w[1].max((c2 - b[1]).abs());
                    w[2] = w[2].max((c3 - b[2]).abs());
                }
            }
            w
        })
        .reduce(|| [0.0; 3], |p, q| [p[0].max(q[0]), p[1].max(q[1]), p[2].max(q[2])]);
    Ok(worst)
}

/// Writes `x1,x2,x3,A1,A2,A3` rows on an n³ lattice over [−L, L]³.
pub fn write_gauge_csv<W: std::io::Write>(gauge: &FieldGauge, n: usize, half_extent: f64, mut w: W) -> Result<()> {
    writeln!(w, "x1,x2,x3,A1,A2,A3")?;
    let h = 2.0 * half_extent / (n.max(2) - 1) as f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = [-half_extent + h * i as f64, -half_extent + h * j as f64, -half_extent + h * k as f64];
                let a = gauge.eval(x)?;
                writeln!(w, "{},{},{},{:e},{:e},{:e}", x[0], x[1], x[2], a[0], a[1], a[2])?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn default_field() -> FieldSpec {
        make_field([0.3, -0.2, 1.0], 1.0).unwrap()
    }

    #[test]
    fn constant_inside_zero_outside() {
        let f = default_field();
        assert_eq!(f.b([0.5, -0.3, 0.6]), f.b0);
        assert_eq!(f.b([1.1, 1.1, 1.1]), [0.0; 3]);
        let z = make_field([0.0; 3], 1.0).unwrap();
        assert_eq!(z.b([1.3, 0.2, 0.1]), [0.0; 3]);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let f = default_field();
        let x = [0.9, -0.7, 0.6]; // ρ ≈ 1.29, inside the shell
        let j = f.jacobian(x);
        let h = 1e-5;
        for k in 0..3 {
            let (mut p, mut m) = (x, x);
            p[k] += h;
            m[k] -= h;
            let (bp, bm) = (f.b(p), f.b(m));
            for i in 0..3 {
                let fd = (bp[i] - bm[i]) / (2.0 * h);
                assert!((fd - j[i][k]).abs() < 1e-8, "J[{i}][{k}] {fd} vs {}", j[i][k]);
            }
        }
        let div = j[0][0] + j[1][1] + j[2][2];
        assert!(div.abs() < 1e-13);
    }

    #[test]
    fn gauges_vanish_on_their_half_spaces() {
        let f = default_field();
        for x in [[0.3, 0.1, 2.5], [-1.0, 1.5, 2.01], [0.0, 0.0, 7.0]] {
            assert_eq!(landau_gauge(&f, x).unwrap(), [0.0; 3]);
            assert_eq!(mirror_gauge(&f, [x[0], x[1], -x[2]]).unwrap(), [0.0; 3]);
        }
    }

    /// The literal iterated integral with the analytic ∂₁B₁, evaluated by nested
    /// adaptive quadrature.
    fn literal_a1(f: &FieldSpec, x: Vec3, anchor: f64) -> f64 {
        let inner = |t: f64| integrate(|y: f64| f.jacobian([x[0], y, t])[0][0], 0.0, x[1], 1e-12).unwrap();
        integrate(inner, anchor, x[2], 1e-11).unwrap()
            + integrate(|t: f64| f.b([x[0], x[1], t])[1], anchor, x[2], 1e-12).unwrap()
    }

    #[test]
    fn reduced_formula_matches_double_integral() {
        let f = default_field();
        for x in [[0.4, 0.7, -0.2], [-1.1, 0.3, 0.9], [0.2, -1.3, 1.5]] {
            let a = landau_gauge(&f, x).unwrap()[0];
            assert!((a - literal_a1(&f, x, 2.0)).abs() < 1e-8, "{x:?}");
            let m = mirror_gauge(&f, x).unwrap()[0];
            assert!((m - literal_a1(&f, x, -2.0)).abs() < 1e-8, "{x:?}");
        }
    }

    #[test]
    fn curl_reproduces_field_at_second_order() {
        let f = default_field();
        let pts = [[0.9, -0.7, 0.6], [1.2, 0.4, -0.3], [0.1, 0.2, 0.3], [-0.5, 1.1, 0.9]];
        let g = |x| landau_gauge(&f, x);
        let r1 = check_curl_system(&f, g, &pts, 0.02).unwrap();
        let r2 = check_curl_system(&f, g, &pts, 0.01).unwrap();
        for i in 0..3 {
            assert!(r1[i] < 1e-2, "{r1:?}");
            if r1[i] > 1e-7 {
                assert!(r1[i] / r2[i] > 3.5, "{i}: {} / {}", r1[i], r2[i]);
            }
        }
        let gm = |x| mirror_gauge(&f, x);
        let rm = check_curl_system(&f, gm, &pts, 0.01).unwrap();
        for i in 0..3 {
            assert!((rm[i] - r2[i]).abs() < 1e-3);
        }
    }

    #[test]
    fn gauges_differ_by_a_gradient_of_x1() {
        // A − Ā = (φ'(x₁), 0, 0): the difference must not depend on x₂, x₃
        let f = default_field();
        let d = |x: Vec3| landau_gauge(&f, x).unwrap()[0] - mirror_gauge(&f, x).unwrap()[0];
        let base = d([0.7, 0.0, 0.0]);
        for x in [[0.7, 1.0, -0.5], [0.7, -0.4, 1.9]] {
            assert!((d(x) - base).abs() < 1e-9);
        }
    }

    #[test]
    fn divergence_converges() {
        let f = default_field();
        let x = [0.9, -0.7, 0.6];
        let (a, b) = (f.divergence_fd(x, 0.02).abs(), f.divergence_fd(x, 0.01).abs());
        assert!(a < 5e-3 && b < a / 3.5, "{a} {b}");
    }
}
