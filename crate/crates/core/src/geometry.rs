//! Curves that deform the x₃-axis locally, their Frenet frames, and the tube map
//! x(s, r, θ) = Γ(s) − r[n(s) cos(θ − α) + b(s) sin(θ − α)] with its inverse.
//!
//! Built-in profiles bend the axis inside the x₁x₃-plane. They are described by
//! a signed curvature γ(s); the frame then reads t = (sin φ, 0, cos φ),
//! n = (cos φ, 0, −sin φ), b = (0, 1, 0) with φ' = γ. Allowing the sign keeps the
//! frame smooth through inflection points, where the unsigned Frenet normal
//! would flip.
//!
//! Every profile bends away and comes back: the total turning and the lateral
//! drift both vanish, so both tails lie on the x₃-axis. The bent stretch is
//! shorter along x₃ than in arclength; with Γ₃(0) = 0 the tails read
//! Γ(s) = (0, 0, s ∓ δ) for ±s ≥ d, where δ is the tail offset.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type Vec3 = [f64; 3];

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn mul3(c: f64, a: Vec3) -> Vec3 {
    [c * a[0], c * a[1], c * a[2]]
}

pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// C² smoothstep 10t³ − 15t⁴ + 6t⁵, clamped to [0, 1].
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// Curvature function for user-supplied profiles.
pub type CurvatureFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Deformation families.
#[derive(Clone)]
pub enum Profile {
    Straight,
    /// Tangent angle φ(s) = A·u(1 − u²)³ with u = s/d on |s| < d.
    Bump { amplitude: f64, half_width: f64 },
    /// Smooth square-wave curvature γ = γ_max·c(s/d): bend one way on the
    /// middle part, the other way on the flanks, with C² transitions of width
    /// 2w·d. The switch point is solved so that the total turning vanishes.
    Zigzag { gamma_max: f64, half_width: f64, transition: f64 },
    /// Constant curvature κ on [start, end] with C² ramps of length `ramp` on
    /// either side. Does not return to the axis; used to test frame rotation.
    Arc { kappa: f64, start: f64, end: f64, ramp: f64 },
    /// Arbitrary planar curvature, nonzero only on |s| < half_width.
    Custom { curvature: CurvatureFn, half_width: f64 },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Straight => write!(f, "Straight"),
            Profile::Bump { amplitude, half_width } => {
                write!(f, "Bump {{ amplitude: {amplitude}, half_width: {half_width} }}")
            }
            Profile::Zigzag { gamma_max, half_width, transition } => write!(
                f,
                "Zigzag {{ gamma_max: {gamma_max}, half_width: {half_width}, transition: {transition} }}"
            ),
            Profile::Arc { kappa, start, end, ramp } => {
                write!(f, "Arc {{ kappa: {kappa}, start: {start}, end: {end}, ramp: {ramp} }}")
            }
            Profile::Custom { half_width, .. } => write!(f, "Custom {{ half_width: {half_width} }}"),
        }
    }
}

/// The even unit square wave used by the zigzag profile, on |u| < 1.
pub fn zigzag_shape(u: f64, u1: f64, w: f64) -> f64 {
    let a = u.abs();
    if a >= 1.0 {
        return 0.0;
    }
    1.0 - 2.0 * smoothstep((a - u1 + w) / (2.0 * w)) + smoothstep((a - 1.0 + 2.0 * w) / (2.0 * w))
}

/// Switch point u₁ making ∫₀¹ c(u) du = 0.
pub fn zigzag_switch(w: f64) -> Result<f64> {
    if !(w > 0.0 && w < 0.2) {
        return Err(Error::InvalidInput(format!("zigzag transition {w} must lie in (0, 0.2)")));
    }
    let area = |u1: f64| -> Result<f64> {
        let brk = [u1 - w, u1 + w, 1.0 - 2.0 * w];
        crate::quadrature::integrate_split(|u| zigzag_shape(u, u1, w), 0.0, 1.0, &brk, 1e-14)
    };
    let (mut lo, mut hi) = (w, 1.0 - 3.0 * w);
    let flo = area(lo)?;
    if flo * area(hi)? > 0.0 {
        return Err(Error::InvalidInput(format!("zigzag transition {w}: no balancing switch point")));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if area(mid)? * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Twist angle α(s) of the cross-section.
#[derive(Clone)]
pub enum Twist {
    Zero,
    /// α(s) = A (1 − u²)³ on |u| = |s/d| < 1.
    Bump { amplitude: f64, half_width: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Twist {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Twist::Zero => 0.0,
            Twist::Bump { amplitude, half_width } => {
                let u = s / half_width;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - u * u).powi(3)
                }
            }
            Twist::Custom(f) => f(s),
        }
    }
}

impl fmt::Debug for Twist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Twist::Zero => write!(f, "Zero"),
            Twist::Bump { amplitude, half_width } => write!(f, "Bump({amplitude}, {half_width})"),
            Twist::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CurveSpec {
    pub profile: Profile,
    pub samples_per_unit: usize,
    /// Sampled arclength range is [−extent, extent].
    pub extent: f64,
    pub twist: Twist,
}

impl CurveSpec {
    pub fn new(profile: Profile) -> Self {
        CurveSpec { profile, samples_per_unit: 100, extent: 40.0, twist: Twist::Zero }
    }
}

/// Resolved curvature evaluator (zigzag switch point precomputed).
struct Curvature {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    support: f64,
}

fn curvature_of(p: &Profile) -> Result<Curvature> {
    Ok(match p.clone() {
        Profile::Straight => Curvature { f: Box::new(|_| 0.0), support: 0.0 },
        Profile::Bump { amplitude, half_width: d } => {
            if !(d > 0.0) {
                return Err(Error::InvalidInput("bump half-width must be positive".into()));
            }
            Curvature {
                f: Box::new(move |s| {
                    let u = s / d;
                    if u.abs() >= 1.0 {
                        0.0
                    } else {
                        let q = 1.0 - u * u;
                        amplitude / d * q * q * (1.0 - 7.0 * u * u)
                    }
                }),
                support: d,
            }
        }
        Profile::Zigzag { gamma_max, half_width: d, transition: w } => {
            if !(d > 0.0) {
                return Err(Error::InvalidInput("zigzag half-width must be positive".into()));
            }
            let u1 = zigzag_switch(w)?;
            Curvature { f: Box::new(move |s| gamma_max * zigzag_shape(s / d, u1, w)), support: d }
        }
        Profile::Arc { kappa, start, end, ramp } => {
            if !(end > start && ramp > 0.0) {
                return Err(Error::InvalidInput("arc needs start < end and a positive ramp".into()));
            }
            Curvature {
                f: Box::new(move |s| {
                    if s < start {
                        kappa * smoothstep((s - start + ramp) / ramp)
                    } else if s > end {
                        kappa * (1.0 - smoothstep((s - end) / ramp))
                    } else {
                        kappa
                    }
                }),
                support: start.abs().max(end.abs()) + ramp,
            }
        }
        Profile::Custom { curvature, half_width } => {
            Curvature { f: Box::new(move |s| curvature(s)), support: half_width }
        }
    })
}

/// Arclength-sampled curve with its frame.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameField {
    pub s: Vec<f64>,
    pub gamma_pos: Vec<Vec3>,
    pub t: Vec<Vec3>,
    pub n: Vec<Vec3>,
    pub b: Vec<Vec3>,
    pub curvature: Vec<f64>,
    pub torsion: Vec<f64>,
    pub twist: Vec<f64>,
    pub ds: f64,
    /// Half-width of the deformation in arclength.
    pub support: f64,
    /// δ in Γ(s) = (0, 0, s ∓ δ) on the tails.
    pub tail_offset: f64,
}

/// Frame interpolated at an arbitrary arclength.
#[derive(Clone, Copy, Debug)]
pub struct FramePoint {
    pub pos: Vec3,
    pub t: Vec3,
    pub n: Vec3,
    pub b: Vec3,
    pub curvature: f64,
    pub twist: f64,
}

/// Builds the curve by RK4 on the Serret–Frenet system plus Γ' = t, starting
/// from the inertial frame on the lower straight tail.
pub fn build_curve(spec: &CurveSpec) -> Result<FrameField> {
    if spec.samples_per_unit < 4 {
        return Err(Error::InvalidInput("need at least 4 samples per unit arclength".into()));
    }
    let curv = curvature_of(&spec.profile)?;
    if curv.support >= spec.extent {
        return Err(Error::InvalidInput(format!(
            "deformation half-width {} does not fit in the sampled range ±{}",
            curv.support, spec.extent
        )));
    }
    check_c2(&curv, spec)?;
    let ds = 1.0 / spec.samples_per_unit as f64;
    let half = (spec.extent * spec.samples_per_unit as f64).round() as i64;
    let count = (2 * half + 1) as usize;
    let s: Vec<f64> = (0..count).map(|i| (i as i64 - half) as f64 * ds).collect();

    // state: Γ, t, n, b
    type State = [f64; 12];
    let rhs = |sv: f64, y: &State| -> State {
        let g = (curv.f)(sv);
        let tau = 0.0;
        let mut d = [0.0; 12];
        for k in 0..3 {
            // the position is carried as Γ − (0, 0, s) so the tails stay exact
            d[k] = y[3 + k] - if k == 2 { 1.0 } else { 0.0 };
            d[3 + k] = g * y[6 + k];
            d[6 + k] = -g * y[3 + k] + tau * y[9 + k];
            d[9 + k] = -tau * y[6 + k];
        }
        d
    };
    let mut y: State = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let mut states = Vec::with_capacity(count);
    states.push(y);
    for i in 0..count - 1 {
        let s0 = s[i];
        let k1 = rhs(s0, &y);
        let mut tmp = [0.0; 12];
        for j in 0..12 {
            tmp[j] = y[j] + 0.5 * ds * k1[j];
        }
        let k2 = rhs(s0 + 0.5 * ds, &tmp);
        for j in 0..12 {
            tmp[j] = y[j] + 0.5 * ds * k2[j];
        }
        let k3 = rhs(s0 + 0.5 * ds, &tmp);
        for j in 0..12 {
            tmp[j] = y[j] + ds * k3[j];
        }
        let k4 = rhs(s0 + ds, &tmp);
        for j in 0..12 {
            y[j] += ds / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        states.push(y);
    }
    let mid = half as usize;
    let shift = states[mid][2];
    let v3 = |st: &State, o: usize| [st[o], st[o + 1], st[o + 2]];
    let gamma_pos: Vec<Vec3> =
        states.iter().zip(&s).map(|(st, &sv)| [st[0], st[1], sv + (st[2] - shift)]).collect();
    // δ from the upper tail: Γ₃(s) = s − δ there
    let tail_offset = shift - states[count - 1][2];
    Ok(FrameField {
        curvature: s.iter().map(|&v| (curv.f)(v)).collect(),
        torsion: vec![0.0; count],
        twist: s.iter().map(|&v| spec.twist.eval(v)).collect(),
        t: states.iter().map(|st| v3(st, 3)).collect(),
        n: states.iter().map(|st| v3(st, 6)).collect(),
        b: states.iter().map(|st| v3(st, 9)).collect(),
        gamma_pos,
        s,
        ds,
        support: curv.support,
        tail_offset,
    })
}

/// Rejects curvature profiles whose curve is not C²: the jump between
/// consecutive second differences of Γ must shrink under refinement. For a
/// continuous curvature it halves with the step; across a curvature jump it
/// stays put.
fn check_c2(curv: &Curvature, spec: &CurveSpec) -> Result<()> {
    if curv.support == 0.0 {
        return Ok(());
    }
    // Γ'' = γ n and |n| = 1, so second differences of the planar curve are
    // governed by γ; integrate the tangent angle finely and difference Γ.
    let jump = |h: f64| -> f64 {
        let lim = curv.support + 4.0 * h;
        let m = (2.0 * lim / h).ceil() as usize;
        let mut phi = 0.0;
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(m + 1);
        let mut p = [0.0, -lim];
        pts.push(p);
        let sub = 8;
        let hh = h / sub as f64;
        for i in 0..m {
            for j in 0..sub {
                let s = -lim + i as f64 * h + (j as f64 + 0.5) * hh;
                let phm = phi + 0.5 * hh * (curv.f)(s);
                p[0] += hh * phm.sin();
                p[1] += hh * phm.cos();
                phi += hh * (curv.f)(s);
            }
            pts.push(p);
        }
        let d2: Vec<[f64; 2]> = pts
            .windows(3)
            .map(|w| [(w[2][0] - 2.0 * w[1][0] + w[0][0]) / (h * h), (w[2][1] - 2.0 * w[1][1] + w[0][1]) / (h * h)])
            .collect();
        d2.windows(2)
            .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    };
    let h = 4.0 / spec.samples_per_unit as f64;
    let (j1, j2) = (jump(h), jump(h / 2.0));
    if j2 > 0.75 * j1 && j2 > 1e-3 {
        return Err(Error::NotC2(format!(
            "second differences of the curve jump by {j1:.3e} at h = {h} and {j2:.3e} at h/2; \
             the curvature is discontinuous"
        )));
    }
    Ok(())
}

fn normalize3(a: Vec3) -> Vec3 {
    mul3(1.0 / norm3(a), a)
}

impl FrameField {
    pub fn s_min(&self) -> f64 {
        self.s[0]
    }

    pub fn s_max(&self) -> f64 {
        *self.s.last().unwrap()
    }

    /// Frame at arclength `s`: Γ by cubic Hermite (Γ' = t), frame by linear
    /// interpolation followed by Gram–Schmidt.
    pub fn at(&self, s: f64) -> Result<FramePoint> {
        let (lo, hi) = (self.s_min(), self.s_max());
        if !(s >= lo && s <= hi) {
            return Err(Error::OutOfRange { s, min: lo, max: hi });
        }
        let f = (s - lo) / self.ds;
        let i = (f.floor() as usize).min(self.s.len() - 2);
        let u = f - i as f64;
        let lerp = |a: Vec3, b: Vec3| add3(mul3(1.0 - u, a), mul3(u, b));
        let t = normalize3(lerp(self.t[i], self.t[i + 1]));
        let n0 = lerp(self.n[i], self.n[i + 1]);
        let n = normalize3(sub3(n0, mul3(dot3(n0, t), t)));
        let b = cross3(t, n);
        let (h00, h10, h01, h11) = (
            2.0 * u.powi(3) - 3.0 * u * u + 1.0,
            u.powi(3) - 2.0 * u * u + u,
            -2.0 * u.powi(3) + 3.0 * u * u,
            u.powi(3) - u * u,
        );
        let pos = add3(
            add3(mul3(h00, self.gamma_pos[i]), mul3(h10 * self.ds, self.t[i])),
            add3(mul3(h01, self.gamma_pos[i + 1]), mul3(h11 * self.ds, self.t[i + 1])),
        );
        Ok(FramePoint {
            pos,
            t,
            n,
            b,
            curvature: (1.0 - u) * self.curvature[i] + u * self.curvature[i + 1],
            twist: (1.0 - u) * self.twist[i] + u * self.twist[i + 1],
        })
    }

    /// max over samples of |⟨t,n⟩|, |⟨t,b⟩|, |⟨n,b⟩| and ||t|−1|, ||n|−1|, ||b|−1|.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.s.len() {
            let (t, n, b) = (self.t[i], self.n[i], self.b[i]);
            for v in [dot3(t, n), dot3(t, b), dot3(n, b), norm3(t) - 1.0, norm3(n) - 1.0, norm3(b) - 1.0] {
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    /// max | |Γ(s_{i+1}) − Γ(s_i)| / ds − 1 |: unit speed up to chord error.
    pub fn speed_defect(&self) -> f64 {
        self.gamma_pos
            .windows(2)
            .map(|w| (norm3(sub3(w[1], w[0])) / self.ds - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Writes the CSV dump: s, Γ, t, n, b, γ, τ.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,gx,gy,gz,tx,ty,tz,nx,ny,nz,bx,by,bz,curvature,torsion")?;
        for i in 0..self.s.len() {
            let g = self.gamma_pos[i];
            let (t, n, b) = (self.t[i], self.n[i], self.b[i]);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.s[i], g[0], g[1], g[2], t[0], t[1], t[2], n[0], n[1], n[2], b[0], b[1], b[2],
                self.curvature[i], self.torsion[i]
            )?;
        }
        Ok(())
    }

    /// Largest |Γ₃| reached by the deformed stretch |s| ≤ support.
    pub fn deformed_x3_extent(&self) -> f64 {
        self.s
            .iter()
            .zip(&self.gamma_pos)
            .filter(|(s, _)| s.abs() <= self.support + self.ds)
            .map(|(_, g)| g[2].abs())
            .fold(0.0, f64::max)
    }
}

/// Bounded open cross-section ω ∋ 0, given through a membership oracle on
/// section coordinates p = (r cos θ, r sin θ).
#[derive(Clone)]
pub enum CrossSection {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Square { half_width: f64 },
    Custom { contains: Arc<dyn Fn([f64; 2]) -> bool + Send + Sync>, r_max: f64 },
}

impl fmt::Debug for CrossSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossSection::Disk { radius } => write!(f, "Disk({radius})"),
            CrossSection::Ellipse { a, b } => write!(f, "Ellipse({a}, {b})"),
            CrossSection::Square { half_width } => write!(f, "Square({half_width})"),
            CrossSection::Custom { r_max, .. } => write!(f, "Custom(r_max = {r_max})"),
        }
    }
}

impl CrossSection {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let inside = match self {
            CrossSection::Disk { radius } => p[0] * p[0] + p[1] * p[1] < radius * radius,
            CrossSection::Ellipse { a, b } => (p[0] / a).powi(2) + (p[1] / b).powi(2) < 1.0,
            CrossSection::Square { half_width } => p[0].abs() < *half_width && p[1].abs() < *half_width,
            CrossSection::Custom { contains, .. } => contains(p),
        };
        inside && p[0].hypot(p[1]) <= self.r_max()
    }

    pub fn r_max(&self) -> f64 {
        match self {
            CrossSection::Disk { radius } => *radius,
            CrossSection::Ellipse { a, b } => a.max(*b),
            CrossSection::Square { half_width } => half_width * 2f64.sqrt(),
            CrossSection::Custom { r_max, .. } => *r_max,
        }
    }

    /// Lower bound on the distance from p to the boundary of ω (0 if unknown).
    /// Used to skip sub-cell sampling away from the boundary.
    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        match self {
            CrossSection::Disk { radius } => (p[0].hypot(p[1]) - radius).abs(),
            CrossSection::Square { half_width } => {
                let dx = p[0].abs() - half_width;
                let dy = p[1].abs() - half_width;
                if dx < 0.0 && dy < 0.0 {
                    (-dx).min(-dy)
                } else {
                    dx.max(0.0).hypot(dy.max(0.0))
                }
            }
            CrossSection::Ellipse { a, b } => {
                // |F(p)| / |∇F| with F = (x/a)² + (y/b)² − 1 bounds the distance
                // from below up to a curvature factor; halve it to stay safe
                let f = (p[0] / a).powi(2) + (p[1] / b).powi(2) - 1.0;
                let g = (2.0 * p[0] / (a * a)).hypot(2.0 * p[1] / (b * b)).max(1e-12);
                0.5 * (f.abs() / g).min(a.min(*b))
            }
            CrossSection::Custom { .. } => 0.0,
        }
    }
}

/// Coordinates (s, r, θ) of a tube point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeCoords {
    pub s: f64,
    pub r: f64,
    pub theta: f64,
}

impl TubeCoords {
    /// Point of ω in section coordinates.
    pub fn section_point(&self) -> [f64; 2] {
        [self.r * self.theta.cos(), self.r * self.theta.sin()]
    }
}

/// x(s, r, θ) = Γ(s) − r[n cos(θ − α) + b sin(θ − α)].
pub fn tube_point(frame: &FrameField, s: f64, r: f64, theta: f64) -> Result<Vec3> {
    let fp = frame.at(s)?;
    let a = theta - fp.twist;
    Ok(sub3(fp.pos, mul3(r, add3(mul3(a.cos(), fp.n), mul3(a.sin(), fp.b)))))
}

/// Spatial index over the curve samples by Γ₃ for the inverse map.
#[derive(Clone, Debug)]
pub struct TubeLocator {
    frame: Arc<FrameField>,
    section: CrossSection,
    /// sample indices of the deformed stretch, bucketed by Γ₃
    buckets: Vec<Vec<usize>>,
    z0: f64,
    bucket_width: f64,
    /// beyond this |x₃| only the straight tails can contain x
    straight_beyond: f64,
    max_lateral: f64,
}

const NEWTON_MAX: usize = 60;

impl TubeLocator {
    pub fn new(frame: Arc<FrameField>, section: CrossSection) -> Self {
        let r_max = section.r_max();
        let reach = frame.support + r_max + 2.0 * frame.ds;
        let idx: Vec<usize> = (0..frame.s.len()).filter(|&i| frame.s[i].abs() <= reach).collect();
        let z: Vec<f64> = idx.iter().map(|&i| frame.gamma_pos[i][2]).collect();
        let z0 = z.iter().copied().fold(f64::INFINITY, f64::min) - r_max;
        let z1 = z.iter().copied().fold(f64::NEG_INFINITY, f64::max) + r_max;
        let bucket_width = r_max.max(frame.ds);
        let nb = ((z1 - z0) / bucket_width).ceil() as usize + 1;
        let mut buckets = vec![Vec::new(); nb];
        for (&i, &zi) in idx.iter().zip(&z) {
            let b = ((zi - z0) / bucket_width) as usize;
            buckets[b.min(nb - 1)].push(i);
        }
        let straight_beyond = frame.deformed_x3_extent() + r_max + frame.ds;
        let max_lateral = frame.gamma_pos.iter().map(|g| g[0].hypot(g[1])).fold(0.0, f64::max);
        TubeLocator { frame, section, buckets, z0, bucket_width, straight_beyond, max_lateral }
    }

    pub fn frame(&self) -> &FrameField {
        &self.frame
    }

    pub fn section(&self) -> &CrossSection {
        &self.section
    }

    /// |x₃| beyond which the straight-tail shortcut is exact.
    pub fn straight_beyond(&self) -> f64 {
        self.straight_beyond
    }

    fn coords_at(&self, x: Vec3, s: f64) -> Option<TubeCoords> {
        let fp = self.frame.at(s).ok()?;
        let v = sub3(fp.pos, x);
        let c1 = dot3(v, fp.n);
        let c2 = dot3(v, fp.b);
        Some(TubeCoords { s, r: c1.hypot(c2), theta: c2.atan2(c1) + fp.twist })
    }

    /// Candidate (s, r, θ) without the membership test: the foot point on the
    /// curve closest to x among the solutions of ⟨x − Γ(s), t(s)⟩ = 0 within
    /// reach r_max. `None` if no such foot point exists or Newton fails.
    pub fn foot_point(&self, x: Vec3) -> Option<TubeCoords> {
        let r_max = self.section.r_max();
        if x[2].abs() > self.straight_beyond {
            let s = x[2] + self.frame.tail_offset * x[2].signum();
            let r = x[0].hypot(x[1]);
            if r > r_max {
                return None;
            }
            return Some(TubeCoords { s, r, theta: (-x[1]).atan2(-x[0]) });
        }
        if x[0].hypot(x[1]) > r_max + self.max_lateral {
            return None;
        }
        // candidate samples within reach, gathered from neighbouring buckets
        let b = ((x[2] - self.z0) / self.bucket_width).floor() as i64;
        let mut cand: Vec<usize> = Vec::new();
        for bb in (b - 1)..=(b + 1) {
            if bb >= 0 && (bb as usize) < self.buckets.len() {
                cand.extend(self.buckets[bb as usize].iter().copied());
            }
        }
        let reach = r_max + 2.0 * self.frame.ds;
        cand.retain(|&i| norm3(sub3(x, self.frame.gamma_pos[i])) <= reach);
        // the deformed stretch is bounded; the tails extend it in a straight line
        let mut best: Option<TubeCoords> = None;
        let mut consider = |c: TubeCoords| {
            if best.map_or(true, |bst| c.r < bst.r) {
                best = Some(c);
            }
        };
        cand.sort_unstable();
        let g = |i: usize| dot3(sub3(x, self.frame.gamma_pos[i]), self.frame.t[i]);
        for w in cand.windows(2) {
            if w[1] != w[0] + 1 {
                continue;
            }
            let (ga, gb) = (g(w[0]), g(w[1]));
            if ga == 0.0 {
                if let Some(c) = self.coords_at(x, self.frame.s[w[0]]) {
                    consider(c);
                }
            } else if ga * gb < 0.0 {
                if let Some(s) = self.newton(x, self.frame.s[w[0]], self.frame.s[w[1]], ga) {
                    if let Some(c) = self.coords_at(x, s) {
                        consider(c);
                    }
                }
            }
        }
        // feet on the straight tails beyond the sampled deformed stretch
        for sign in [-1.0, 1.0] {
            let s = x[2] + self.frame.tail_offset * sign;
            if sign * s > self.frame.support + 2.0 * self.frame.ds && s.abs() <= self.frame.s_max() {
                if let Some(c) = self.coords_at(x, s) {
                    consider(c);
                }
            }
        }
        best.filter(|c| c.r <= r_max)
    }

    /// Safeguarded Newton for g(s) = ⟨x − Γ(s), t(s)⟩ on a sign-changing bracket.
    fn newton(&self, x: Vec3, mut a: f64, mut b: f64, ga: f64) -> Option<f64> {
        let gfun = |s: f64| -> Option<(f64, f64)> {
            let fp = self.frame.at(s).ok()?;
            let d = sub3(x, fp.pos);
            Some((dot3(d, fp.t), -1.0 + fp.curvature * dot3(d, fp.n)))
        };
        let mut s = 0.5 * (a + b);
        let sa = ga.signum();
        for _ in 0..NEWTON_MAX {
            let (gv, dg) = gfun(s)?;
            if gv == 0.0 {
                return Some(s);
            }
            if gv.signum() == sa {
                a = s;
            } else {
                b = s;
            }
            let mut next = s - gv / dg;
            if !(next > a.min(b) && next < a.max(b)) || !next.is_finite() {
                next = 0.5 * (a + b);
            }
            if (next - s).abs() < 1e-14 * (1.0 + s.abs()) {
                return Some(next);
            }
            s = next;
        }
        None
    }

    /// Inverse of the tube map: (s, r, θ) if x lies in the tube.
    pub fn locate(&self, x: Vec3) -> Option<TubeCoords> {
        self.foot_point(x).filter(|c| self.section.contains(c.section_point()))
    }
}

/// Convenience wrapper for one-off queries.
pub fn locate_in_tube(frame: &FrameField, section: &CrossSection, x: Vec3) -> Option<TubeCoords> {
    TubeLocator::new(Arc::new(frame.clone()), section.clone()).locate(x)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
}

/// Outcome of [`validate_tube`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TubeDiagnostics {
    /// sup r_max·|γ| < 1
    pub injectivity: Check,
    /// sup |x| over the tube inside the slab |x₃| ≤ s₀/√2, compared with s₀
    pub assumption1: Check,
    /// largest deviation from the straight inertial tube beyond the slab
    pub straight_outside: Check,
}

impl TubeDiagnostics {
    pub fn all_pass(&self) -> bool {
        self.injectivity.pass && self.assumption1.pass && self.straight_outside.pass
    }
}

pub fn validate_tube(frame: &FrameField, section: &CrossSection, s0: f64) -> TubeDiagnostics {
    let r_max = section.r_max();
    let sup_g = frame.curvature.iter().map(|g| g.abs()).fold(0.0, f64::max);
    let injectivity = Check { pass: r_max * sup_g < 1.0, value: r_max * sup_g, limit: 1.0 };

    let slab = s0 / 2f64.sqrt();
    let mut sup_x: f64 = 0.0;
    let n_theta = 96;
    for i in 0..frame.s.len() {
        if frame.gamma_pos[i][2].abs() > slab + r_max {
            continue;
        }
        for j in 0..n_theta {
            let th = 2.0 * PI * j as f64 / n_theta as f64;
            // the disk of radius r_max bounds ω, and |x| is convex along rays
            let a = th - frame.twist[i];
            let x = sub3(
                frame.gamma_pos[i],
                mul3(r_max, add3(mul3(a.cos(), frame.n[i]), mul3(a.sin(), frame.b[i]))),
            );
            if x[2].abs() <= slab {
                sup_x = sup_x.max(norm3(x));
            }
        }
        if frame.gamma_pos[i][2].abs() <= slab {
            sup_x = sup_x.max(norm3(frame.gamma_pos[i]));
        }
    }
    let assumption1 = Check { pass: sup_x < s0, value: sup_x, limit: s0 };

    let mut dev: f64 = 0.0;
    for i in 0..frame.s.len() {
        if frame.s[i].abs() <= slab {
            continue;
        }
        let g = frame.gamma_pos[i];
        dev = dev
            .max(g[0].hypot(g[1]))
            .max(norm3(sub3(frame.t[i], [0.0, 0.0, 1.0])))
            .max(norm3(sub3(frame.n[i], [1.0, 0.0, 0.0])))
            .max(frame.curvature[i].abs())
            .max(frame.torsion[i].abs())
            .max(frame.twist[i].abs());
    }
    let straight_outside = Check { pass: dev <= 1e-9, value: dev, limit: 1e-9 };
    TubeDiagnostics { injectivity, assumption1, straight_outside }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zig() -> FrameField {
        build_curve(&CurveSpec::new(Profile::Zigzag { gamma_max: 0.9, half_width: 3.5, transition: 0.1 })).unwrap()
    }

    #[test]
    fn straight_line() {
        let f = build_curve(&CurveSpec::new(Profile::Straight)).unwrap();
        for i in (0..f.s.len()).step_by(97) {
            assert!(norm3(sub3(f.gamma_pos[i], [0.0, 0.0, f.s[i]])) < 1e-10);
            assert_eq!(f.t[i], [0.0, 0.0, 1.0]);
            assert_eq!(f.n[i], [1.0, 0.0, 0.0]);
            assert_eq!(f.curvature[i], 0.0);
        }
        assert_eq!(f.tail_offset, 0.0);
    }

    #[test]
    fn zigzag_switch_point() {
        let u1 = zigzag_switch(0.1).unwrap();
        assert!((u1 - 0.45).abs() < 1e-9, "{u1}");
    }

    #[test]
    fn zigzag_returns_to_axis() {
        let f = zig();
        let last = f.s.len() - 1;
        assert!(f.gamma_pos[last][0].abs() < 1e-9);
        assert!(norm3(sub3(f.t[last], [0.0, 0.0, 1.0])) < 1e-9);
        assert!(f.tail_offset > 0.0);
        assert!(f.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn tube_point_straight_closed_form() {
        let f = build_curve(&CurveSpec::new(Profile::Straight)).unwrap();
        let x = tube_point(&f, 2.5, 0.7, 0.3).unwrap();
        let e = [-0.7 * 0.3f64.cos(), -0.7 * 0.3f64.sin(), 2.5];
        assert!(norm3(sub3(x, e)) < 1e-13);
    }

    #[test]
    fn roundtrip_in_curved_region() {
        let f = Arc::new(zig());
        let sec = CrossSection::Disk { radius: 1.0 };
        let loc = TubeLocator::new(f.clone(), sec);
        for &(s, r, th) in &[(0.3, 0.5, 1.0), (-2.0, 0.9, -2.5), (1.6, 0.2, 3.0), (3.4, 0.99, 0.1)] {
            let x = tube_point(&f, s, r, th).unwrap();
            let c = loc.locate(x).unwrap();
            assert!((c.s - s).abs() < 1e-8 && (c.r - r).abs() < 1e-8, "{c:?} vs {s} {r}");
            let dth = (c.theta - th).rem_euclid(2.0 * PI);
            assert!(dth.min(2.0 * PI - dth) < 1e-8);
        }
    }

    #[test]
    fn far_point_outside() {
        let f = Arc::new(zig());
        let loc = TubeLocator::new(f, CrossSection::Disk { radius: 1.0 });
        assert!(loc.locate([3.0, 0.0, 20.0]).is_none());
        let c = loc.locate([0.0, 0.0, 20.0]).unwrap();
        assert!(c.r == 0.0);
    }

    #[test]
    fn discontinuous_curvature_rejected() {
        let p = Profile::Custom {
            curvature: Arc::new(|s: f64| if s.abs() < 1.0 { 0.3 } else { 0.0 }),
            half_width: 1.0,
        };
        assert!(matches!(build_curve(&CurveSpec::new(p)), Err(Error::NotC2(_))));
    }
}
