//! One function per experiment kind. Each returns a typed summary; the runner
//! takes care of files, caching, and the report.

use super::{Cache, Summary};
use crate::experiments::{
    bracketing_check, field_sweep, fit_alpha, gap_tolerance, loglog_slope, potential_mismatch, sample_disk,
    theorem2_constants, weyl_residual, check_assumption2, AlphaFit, AlphaSeries, BracketingResult, PotentialMismatch,
    SweepOptions, SweepResult, TailSetup, Theorem2Constants, WeylProbe,
};
use crate::error::{Error, Result};
use crate::fields::{curl_residual_on_lattice, FieldGauge, GaugeChoice};
use crate::geometry::{Check, FrameField, TubeDiagnostics, TubeLocator};
use crate::grid::{Grid, GridAxis};
use crate::linalg::hermiticity_defect;
use crate::operators::{
    assemble_hv, ground_state_2d, lambda1_disk, lowest_lattice_eigs, GroundState2D, H3dBuilder, HvOperator,
};
use crate::scenario::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

pub type Checks = BTreeMap<String, Check>;

fn check(pass: bool, value: f64, limit: f64) -> Check {
    Check { pass, value, limit }
}

/// Lateral lattice axes around the tube: the extent of the curve within the
/// axial window, widened by the section radius and the margin.
pub fn lateral_axes(frame: &FrameField, r_max: f64, z_half: f64, margin: f64, h: f64) -> Result<[GridAxis; 2]> {
    let (mut lo, mut hi) = ([0.0f64; 2], [0.0f64; 2]);
    for g in &frame.gamma_pos {
        if g[2].abs() <= z_half + r_max {
            for d in 0..2 {
                lo[d] = lo[d].min(g[d]);
                hi[d] = hi[d].max(g[d]);
            }
        }
    }
    let w = r_max + margin;
    Ok([
        GridAxis::with_spacing(lo[0] - w, hi[0] + w, h)?,
        GridAxis::with_spacing(lo[1] - w, hi[1] + w, h)?,
    ])
}

/// The 2D ground state on a lateral lattice and its h/2 refinement.
pub struct Threshold {
    pub hv: HvOperator,
    pub gs: GroundState2D,
    pub e_half: f64,
}

impl Threshold {
    pub fn calibration(&self) -> f64 {
        (self.gs.e - self.e_half).abs()
    }
}

pub fn threshold_on(sc: &Scenario, axes: [GridAxis; 2], tol: f64, seed: u64) -> Result<Threshold> {
    let sec = sc.section();
    let v = sc.potential();
    let s0 = sc.fields.s0;
    let grid = Grid::new(axes.to_vec())?;
    let hv = assemble_hv(&v, &sec, &grid, sc.grid.sub)?;
    let gs = ground_state_2d(&hv, s0, tol, seed)?;
    let half: Vec<GridAxis> =
        axes.iter().map(|a| GridAxis::with_spacing(a.lo, a.hi, 0.5 * a.h())).collect::<Result<_>>()?;
    let hv_half = assemble_hv(&v, &sec, &Grid::new(half)?, sc.grid.sub)?;
    let e_half = lowest_lattice_eigs(&hv_half.op, 1, tol, seed, None)?.eigenvalues[0];
    Ok(Threshold { hv, gs, e_half })
}

// ---------------------------------------------------------------- gauge

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaugeSummary {
    pub b0: [f64; 3],
    pub s0: f64,
    pub half_extent: f64,
    pub n: [usize; 2],
    /// Curl residuals of the Landau gauge per equation, at n and 2n.
    pub landau: [[f64; 3]; 2],
    pub mirror: [[f64; 3]; 2],
    pub ratios: [f64; 3],
    /// max |A| over samples with x₃ > 2s₀ (Landau) and x₃ < −2s₀ (mirror).
    pub landau_outside: f64,
    pub mirror_outside: f64,
    pub checks: Checks,
}

pub fn gauge(sc: &Scenario) -> Result<GaugeSummary> {
    let field = sc.field()?;
    let cfg = &sc.experiments.gauge;
    let s0 = field.s0;
    let half = cfg.extent_factor * s0;
    let norm = field.b0_norm();
    let la = FieldGauge::new(field.clone(), GaugeChoice::Landau);
    let mi = FieldGauge::new(field.clone(), GaugeChoice::Mirror);
    let l1 = curl_residual_on_lattice(&la, cfg.n, half)?;
    let l2 = curl_residual_on_lattice(&la, 2 * cfg.n, half)?;
    let m1 = curl_residual_on_lattice(&mi, cfg.n, half)?;
    let m2 = curl_residual_on_lattice(&mi, 2 * cfg.n, half)?;
    let ratios = [l1[0] / l2[0], l1[1] / l2[1], l1[2] / l2[2]];
    let mut rng = ChaCha8Rng::seed_from_u64(sc.derive_seed("gauge"));
    let (mut lo, mut mo) = (0.0f64, 0.0f64);
    for _ in 0..2000 {
        let x1 = rng.gen_range(-half..half);
        let x2 = rng.gen_range(-half..half);
        let z = rng.gen_range(2.0 * s0..=half.max(2.0 * s0) + s0);
        let a = la.eval([x1, x2, z])?;
        let b = mi.eval([x1, x2, -z])?;
        lo = lo.max(a.iter().map(|v| v.abs()).fold(0.0, f64::max));
        mo = mo.max(b.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    let worst = l1.iter().chain(&m1).cloned().fold(0.0, f64::max);
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut checks = Checks::new();
    checks.insert("curl residual at n over norm of B0".into(), check(worst <= 5e-3 * norm, worst / norm.max(1e-300), 5e-3));
    checks.insert("residual ratio n -> 2n".into(), check(min_ratio >= 3.5, min_ratio, 3.5));
    checks.insert("Landau gauge zero beyond 2 s0".into(), check(lo == 0.0, lo, 0.0));
    checks.insert("mirror gauge zero below -2 s0".into(), check(mo == 0.0, mo, 0.0));
    Ok(GaugeSummary {
        b0: field.b0,
        s0,
        half_extent: half,
        n: [cfg.n, 2 * cfg.n],
        landau: [l1, l2],
        mirror: [m1, m2],
        ratios,
        landau_outside: lo,
        mirror_outside: mo,
        checks,
    })
}

// ---------------------------------------------------------------- threshold

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub depth: f64,
    pub half_width: f64,
    pub h: f64,
    pub e: f64,
    pub e_next: f64,
    pub residual: f64,
    pub beta_f: f64,
    pub f_inf: f64,
    pub min_f: f64,
    pub raw_min_ratio: f64,
    pub warnings: Vec<String>,
    /// (x₁, f) along the row of nodes nearest to x₂ = 0.
    pub profile: Vec<[f64; 2]>,
    pub checks: Checks,
}

pub fn threshold(sc: &Scenario) -> Result<ThresholdSummary> {
    let cfg = &sc.experiments.threshold;
    let grid = Grid::square(cfg.half_width, cfg.h)?;
    let v = sc.potential();
    let hv = assemble_hv(&v, &sc.section(), &grid, sc.grid.sub)?;
    let gs = ground_state_2d(&hv, sc.fields.s0, 1e-9, sc.derive_seed("threshold"))?;
    let min_f = gs.f.iter().cloned().fold(f64::INFINITY, f64::min);
    let a = grid.axes[1];
    let j = (0..a.n).min_by(|&p, &q| a.x(p).abs().partial_cmp(&a.x(q).abs()).unwrap()).unwrap();
    let profile = (0..grid.axes[0].n).map(|i| [grid.axes[0].x(i), gs.f[grid.flat(&[i, j])]]).collect();
    let depth = v.sup_norm();
    let mut checks = Checks::new();
    checks.insert("e < 0".into(), check(gs.e < 0.0, gs.e, 0.0));
    checks.insert("e > -sup V".into(), check(gs.e > -depth, gs.e, -depth));
    checks.insert("f > 0 at every node".into(), check(min_f > 0.0, min_f, 0.0));
    Ok(ThresholdSummary {
        depth,
        half_width: cfg.half_width,
        h: cfg.h,
        e: gs.e,
        e_next: gs.e_next,
        residual: gs.residual,
        beta_f: gs.beta_f,
        f_inf: gs.f_inf,
        min_f,
        raw_min_ratio: gs.raw_min_ratio,
        warnings: hv.warnings,
        profile,
        checks,
    })
}

// ---------------------------------------------------------------- essential spectrum

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxSample {
    pub length: f64,
    pub h3: f64,
    pub nodes: usize,
    pub lambda: f64,
    pub lambda_minus_e: f64,
    pub residual: f64,
    pub iterations: usize,
    pub hermiticity_defect: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Theorem1Summary {
    pub e: f64,
    pub e_half: f64,
    pub calibration: f64,
    pub boxes: Vec<BoxSample>,
    pub probes: Vec<WeylProbe>,
    pub slope: f64,
    /// p = 0 and 2p probes at the smallest scale.
    pub probe_p0: WeylProbe,
    pub probe_2p: WeylProbe,
    pub checks: Checks,
}

pub fn theorem1(sc: &Scenario) -> Result<Theorem1Summary> {
    let cfg = &sc.experiments.theorem1;
    let tol = sc.grid.tol;
    let seed = sc.derive_seed("theorem1");
    let lat = GridAxis::with_spacing(-cfg.half_width, cfg.half_width, cfg.h)?;
    let th = threshold_on(sc, [lat, lat], 1e-9, seed)?;
    let e = th.gs.e;
    let cal = th.calibration();
    let frame = Arc::new(sc.frame()?);
    let loc = TubeLocator::new(frame, sc.section());
    let v = sc.potential();
    let field = sc.field()?;
    let mut boxes = Vec::new();
    for &l in &cfg.lengths {
        if l / 2.0 <= 2.0 * field.s0 {
            return Err(Error::Precondition(format!("box length {l} does not contain the field support")));
        }
        let grid = Grid::new(vec![lat, lat, GridAxis::with_spacing(-l / 2.0, l / 2.0, cfg.h3_box)?])?;
        let mut b = H3dBuilder::new(&grid, &loc, &v, sc.grid.sub)?;
        if field.b0 != [0.0; 3] {
            b = b.with_phases(&field, sc.fields.gauge)?;
        }
        let op = b.operator(field.b0)?;
        let rep = lowest_lattice_eigs(&op, 1, tol, seed, None)?;
        boxes.push(BoxSample {
            length: l,
            h3: cfg.h3_box,
            nodes: grid.len(),
            lambda: rep.eigenvalues[0],
            lambda_minus_e: rep.eigenvalues[0] - e,
            residual: rep.residuals[0],
            iterations: rep.iterations,
            hermiticity_defect: hermiticity_defect(&op, 4, seed),
        });
    }
    let setup = TailSetup { loc: &loc, potential: &v, field: &field, gauge: sc.fields.gauge, sub: sc.grid.sub, h3: cfg.h3_weyl };
    let probes: Vec<WeylProbe> = cfg.k.iter().map(|&k| weyl_residual(&th.gs, &setup, cfg.p, k)).collect::<Result<_>>()?;
    let ks: Vec<f64> = probes.iter().map(|p| p.k as f64).collect();
    let rs: Vec<f64> = probes.iter().map(|p| p.residual).collect();
    let slope = loglog_slope(&ks, &rs);
    let probe_p0 = weyl_residual(&th.gs, &setup, 0.0, cfg.k[0])?;
    let probe_2p = weyl_residual(&th.gs, &setup, 2.0 * cfg.p, cfg.k[0])?;

    let mut checks = Checks::new();
    let lowest = boxes.iter().map(|b| b.lambda).fold(f64::INFINITY, f64::min);
    checks.insert("box eigenvalue >= e - 3 calibration".into(), check(lowest >= e - 3.0 * cal, lowest, e - 3.0 * cal));
    let mono = boxes.windows(2).all(|w| w[1].lambda <= w[0].lambda && w[1].lambda >= e - 3.0 * cal);
    checks.insert("box eigenvalue decreases towards e".into(), check(mono, boxes.last().map_or(0.0, |b| b.lambda_minus_e), 0.0));
    checks.insert("quasi-mode log-log slope".into(), check((slope + 1.0).abs() <= 0.15, slope, -1.0));
    let norms: Vec<f64> = probes.iter().map(|p| p.norm).collect();
    let spread = norms.iter().map(|n| (n / norms[0] - 1.0).abs()).fold(0.0, f64::max);
    checks.insert("quasi-mode norm independent of k".into(), check(spread <= 1e-6, spread, 1e-6));
    let decreasing = rs.windows(2).all(|w| w[1] < w[0]);
    checks.insert("residuals decrease in k".into(), check(decreasing, rs[rs.len() - 1], rs[0]));
    Ok(Theorem1Summary { e, e_half: th.e_half, calibration: cal, boxes, probes, slope, probe_p0, probe_2p, checks })
}

// ---------------------------------------------------------------- lemma

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub nr: usize,
    pub series: Vec<AlphaSeries>,
    /// λ₁(R²B̃, 1)/R² for every sample, same order as `series`.
    pub scaled: Vec<Vec<f64>>,
    pub scaling_defect: f64,
    pub fit: AlphaFit,
    /// Slope refit with half the radial resolution.
    pub slope_half_resolution: f64,
    /// λ₁(2B̃_max, R)/λ₁(B̃_max, R) per radius.
    pub doubling: Vec<f64>,
    pub checks: Checks,
}

pub fn lemma(sc: &Scenario) -> Result<LemmaSummary> {
    let cfg = &sc.experiments.lemma;
    let series = sample_disk(&cfg.radii, &cfg.fields, cfg.nr)?;
    let mut scaled = Vec::new();
    let mut defect: f64 = 0.0;
    for s in &series {
        let r2 = s.radius * s.radius;
        let row: Vec<f64> = s
            .b
            .iter()
            .map(|&b| lambda1_disk(r2 * b, 1.0, cfg.nr).map(|g| g.lambda / r2))
            .collect::<Result<_>>()?;
        for (a, b) in s.lambda.iter().zip(&row) {
            defect = defect.max(((a - b) / a).abs());
        }
        scaled.push(row);
    }
    let fit = fit_alpha(&series)?;
    let coarse = fit_alpha(&sample_disk(&cfg.radii, &cfg.fields, cfg.nr / 2)?)?;
    let bmax = cfg.fields.iter().cloned().fold(0.0, f64::max);
    let doubling: Vec<f64> = series
        .iter()
        .map(|s| {
            let top = *s.lambda.last().unwrap();
            lambda1_disk(2.0 * bmax, s.radius, cfg.nr).map(|g| g.lambda / top)
        })
        .collect::<Result<_>>()?;
    let mut checks = Checks::new();
    checks.insert("scaling identity (relative)".into(), check(defect <= 1e-4, defect, 1e-4));
    checks.insert("slope spread across R".into(), check(fit.spread <= 0.02, fit.spread, 0.02));
    checks.insert("lambda1 >= (alpha/2) B on the window".into(), check(fit.lower_bound_holds, fit.lower_bound_margin, 1.0));
    let inv = (coarse.slope / fit.slope - 1.0).abs();
    checks.insert("slope stable under radial refinement".into(), check(inv <= 0.02, inv, 0.02));
    let worst = doubling.iter().map(|d| (d - 2.0).abs() / 2.0).fold(0.0, f64::max);
    checks.insert("doubling B doubles lambda1".into(), check(worst <= 0.05, worst, 0.05));
    let icpt = fit.per_radius.iter().all(|r| r.intercept_ok);
    let worst_icpt = fit.per_radius.iter().map(|r| r.intercept / r.min_lambda).fold(f64::NEG_INFINITY, f64::max);
    checks.insert("intercept <= 0.05 min lambda1".into(), check(icpt, worst_icpt, 0.05));
    Ok(LemmaSummary {
        nr: cfg.nr,
        series,
        scaled,
        scaling_defect: defect,
        slope_half_resolution: coarse.slope,
        fit,
        doubling,
        checks,
    })
}

/// Slope of the disk ground energy from the scenario's lemma settings.
pub fn alpha_slope(sc: &Scenario) -> Result<f64> {
    let cfg = &sc.experiments.lemma;
    Ok(fit_alpha(&sample_disk(&cfg.radii, &cfg.fields, cfg.nr)?)?.slope)
}

// ---------------------------------------------------------------- 3D lattice

/// The lattice of the 3D experiments and its 2D threshold.
pub struct Lattice3 {
    pub grid: Grid,
    pub loc: TubeLocator,
    pub threshold: Threshold,
    pub tube: TubeDiagnostics,
}

pub fn lattice3(sc: &Scenario, seed: u64) -> Result<Lattice3> {
    let frame = Arc::new(sc.frame()?);
    let sec = sc.section();
    let tube = sc.tube_diagnostics(&frame);
    let z = sc.z_half();
    let [a0, a1] = lateral_axes(&frame, sec.r_max(), z, sc.grid.margin, sc.grid.h)?;
    let grid = Grid::new(vec![a0, a1, GridAxis::with_spacing(-z, z, sc.h3())?])?;
    let threshold = threshold_on(sc, [a0, a1], 1e-9, seed)?;
    Ok(Lattice3 { grid, loc: TubeLocator::new(frame, sec), threshold, tube })
}

fn builder(sc: &Scenario, lat: &Lattice3, gauge: GaugeChoice, wanted: [bool; 3], cache: &Cache) -> Result<H3dBuilder> {
    let b = H3dBuilder::new(&lat.grid, &lat.loc, &sc.potential(), sc.grid.sub)?;
    let field = sc.field()?;
    let table = cache.phases(&field, gauge, &lat.grid, wanted)?;
    b.with_table(table)
}

// ---------------------------------------------------------------- absorption sweep

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Theorem2Summary {
    pub epsilon: f64,
    pub nodes: usize,
    pub lateral: [[f64; 2]; 2],
    pub z_half: f64,
    pub h: f64,
    pub h3: f64,
    pub e: f64,
    pub e_half: f64,
    pub tol_gap: f64,
    /// e − λ_min(0).
    pub gap0: f64,
    pub sweep: SweepResult,
    pub alpha: f64,
    /// Constants from a lateral lattice containing the disk of radius s₀.
    pub constants: Theorem2Constants,
    pub constants_half_width: f64,
    /// Whether the oscillation condition holds at B*.
    pub assumption2_at_b_star: Option<bool>,
    pub mismatch: PotentialMismatch,
    pub tube: TubeDiagnostics,
    pub checks: Checks,
}

pub fn theorem2(sc: &Scenario, cache: &Cache) -> Result<Theorem2Summary> {
    let seed = sc.derive_seed("theorem2");
    let lat = lattice3(sc, seed)?;
    let e = lat.threshold.gs.e;
    let tol_gap = gap_tolerance(e, lat.threshold.e_half);
    let cfg = &sc.experiments.theorem2;
    let bp = [sc.fields.b0[0], sc.fields.b0[1]];
    let b = builder(sc, &lat, sc.fields.gauge, [bp[0] != 0.0, bp[1] != 0.0, true], cache)?;

    let s0 = sc.fields.s0;
    let v = sc.potential();
    let eps = sc.potential.epsilon();
    let alpha = alpha_slope(sc)?;
    // β_f needs f on the whole disk of radius s₀
    let half = s0 + 3.0;
    let ax = GridAxis::with_spacing(-half, half, sc.grid.h)?;
    let big = ground_state_2d(&assemble_hv(&v, &sc.section(), &Grid::new(vec![ax, ax])?, sc.grid.sub)?, s0, 1e-9, seed)?;
    let constants = theorem2_constants(&big, alpha, Some(eps))?;

    let opts = SweepOptions { mode: cfg.mode, tol: sc.grid.tol, seed, b_perp: bp, stop_at_crossing: cfg.stop_at_crossing };
    let sweep = field_sweep(&b, &cfg.b3, e, tol_gap, constants.predicted_threshold, &opts)?;
    let gap0 = e - sweep.lambda_min[0];
    let mismatch = potential_mismatch(&lat.threshold.gs, &lat.loc, &v, s0);
    let assumption2_at_b_star = sweep.b_star.map(|bs| check_assumption2(&v, &sc.section(), constants.c, bs));

    let mut checks = Checks::new();
    checks.insert("bound state at B3 = 0 (gap >= 5 tol_gap)".into(), check(gap0 >= 5.0 * tol_gap, gap0, 5.0 * tol_gap));
    let bstar = sweep.b_star.unwrap_or(f64::INFINITY);
    checks.insert("crossing found in the sweep".into(), check(sweep.b_star.is_some(), bstar, *cfg.b3.last().unwrap()));
    let pred = constants.predicted_threshold.unwrap_or(f64::INFINITY);
    checks.insert("B* <= 2/(C eps)".into(), check(bstar <= pred, bstar, pred));
    checks.insert("tube inside B(0, s0) on the slab".into(), check(lat.tube.assumption1.pass, lat.tube.assumption1.value, s0));
    let g = &lat.grid.axes;
    Ok(Theorem2Summary {
        epsilon: eps,
        nodes: lat.grid.len(),
        lateral: [[g[0].lo, g[0].hi], [g[1].lo, g[1].hi]],
        z_half: sc.z_half(),
        h: sc.grid.h,
        h3: sc.h3(),
        e,
        e_half: lat.threshold.e_half,
        tol_gap,
        gap0,
        sweep,
        alpha,
        constants,
        constants_half_width: half,
        assumption2_at_b_star,
        mismatch,
        tube: lat.tube,
        checks,
    })
}

// ---------------------------------------------------------------- bracketing

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketingSummary {
    pub nodes: usize,
    pub e: f64,
    pub calibration: f64,
    pub result: BracketingResult,
    pub hermiticity_defect: f64,
    /// Relative difference of the lowest Landau and mirror eigenvalues.
    pub gauge_invariance: f64,
    pub checks: Checks,
}

pub fn bracketing(sc: &Scenario, cache: &Cache) -> Result<BracketingSummary> {
    let seed = sc.derive_seed("bracketing");
    let lat = lattice3(sc, seed)?;
    let field = sc.field()?;
    let wanted = [field.b0[0] != 0.0, field.b0[1] != 0.0, field.b0[2] != 0.0];
    let la = builder(sc, &lat, GaugeChoice::Landau, wanted, cache)?.operator(field.b0)?;
    let mi = builder(sc, &lat, GaugeChoice::Mirror, wanted, cache)?.operator(field.b0)?;
    let s0 = field.s0;
    let required = crate::operators::bracketing::slice_half_width(&lat.loc, 2.0 * s0);
    let bw = sc.experiments.bracketing.box_half_width.unwrap_or(required + sc.grid.h);
    let tol = sc.grid.tol;
    let result = bracketing_check(&la, &mi, &lat.loc, s0, bw, tol, seed)?;
    let mirror_low = lowest_lattice_eigs(&mi, 1, tol, seed, None)?.eigenvalues[0];
    let gauge_invariance = (mirror_low - result.h.lowest).abs() / (1.0 + result.h.lowest.abs());
    let e = lat.threshold.gs.e;
    let cal = lat.threshold.calibration();
    let t = 3.0 * cal;
    let mut checks = Checks::new();
    checks.insert("min H >= min of pieces - 3 calibration".into(), check(result.h.lowest >= result.lower_bound - t, result.h.lowest, result.lower_bound - t));
    checks.insert("min H1 >= e - 3 calibration".into(), check(result.h1.lowest >= e - t, result.h1.lowest, e - t));
    checks.insert("min H2 >= e - 3 calibration".into(), check(result.h2.lowest >= e - t, result.h2.lowest, e - t));
    checks.insert("min H3^2 >= -1e-8".into(), check(result.h32.lowest >= -1e-8, result.h32.lowest, -1e-8));
    Ok(BracketingSummary {
        nodes: lat.grid.len(),
        e,
        calibration: cal,
        hermiticity_defect: hermiticity_defect(&la, 4, seed).max(hermiticity_defect(&mi, 4, seed)),
        gauge_invariance,
        result,
        checks,
    })
}

impl Summary for GaugeSummary {
    fn checks(&self) -> &Checks {
        &self.checks
    }
    fn csv(&self) -> String {
        let mut s = String::from("gauge,n,r1,r2,r3\n");
        for (name, r) in [("landau", &self.landau), ("mirror", &self.mirror)] {
            for (j, row) in r.iter().enumerate() {
                s += &format!("{name},{},{:e},{:e},{:e}\n", self.n[j], row[0], row[1], row[2]);
            }
        }
        s
    }
}

impl Summary for ThresholdSummary {
    fn checks(&self) -> &Checks {
        &self.checks
    }
    fn csv(&self) -> String {
        let mut s = String::from("x1,f\n");
        for p in &self.profile {
            s += &format!("{},{:e}\n", p[0], p[1]);
        }
        s
    }
}

impl Summary for Theorem1Summary {
    fn checks(&self) -> &Checks {
        &self.checks
    }
    fn csv(&self) -> String {
        let mut s = String::from("kind,parameter,value,residual\n");
        for b in &self.boxes {
            s += &format!("box,{},{:.15e},{:e}\n", b.length, b.lambda, b.residual);
        }
        for p in &self.probes {
            s += &format!("weyl,{},{:.15e},{:e}\n", p.k, p.lambda, p.residual);
        }
        s
    }
}

impl Summary for LemmaSummary {
    fn checks(&self) -> &Checks {
        &self.checks
    }
    fn csv(&self) -> String {
        let mut s = String::from("radius,b,lambda1,m,lambda1_scaled\n");
        for (ser, sc) in self.series.iter().zip(&self.scaled) {
            for j in 0..ser.b.len() {
                s += &format!("{},{},{:.15e},{},{:.15e}\n", ser.radius, ser.b[j], ser.lambda[j], ser.m[j], sc[j]);
            }
        }
        s
    }
}

impl Summary for Theorem2Summary {
    fn checks(&self) -> &Checks {
        &self.checks
    }
    fn csv(&self) -> String {
        let w = &self.sweep;
        let mut s = String::from("b3,lambda_min,gap,residual,iterations\n");
        for j in 0..w.b3.len() {
            s += &format!("{},{:.15e},{:e},{:e},{}\n", w.b3[j], w.lambda_min[j], w.e - w.lambda_min[j], w.residuals[j], w.iterations[j]);
        }
        s
    }
}

impl Summary for BracketingSummary {
    fn checks(&self) -> &Checks {
        &self.checks
    }
    fn csv(&self) -> String {
        let r = &self.result;
        let mut s = String::from("piece,dimension,lowest,residual\n");
        for (name, p) in [("H", &r.h), ("H1", &r.h1), ("H2", &r.h2), ("H3_1", &r.h31), ("H3_2", &r.h32)] {
            s += &format!("{name},{},{:.15e},{:e}\n", p.dimension, p.lowest, p.residual);
        }
        s
    }
}
