//! Scenario files: a TOML tree with one table per module.
//!
//! Parsing fills every default, rejects unknown keys (all of them are listed),
//! and checks the physical side conditions of the selected experiments. The
//! resolved scenario serializes back to TOML, and parsing that dump yields the
//! same hash.

use crate::error::{Error, Result};
use crate::fields::{FieldSpec, GaugeChoice};
use crate::geometry::{build_curve, validate_tube, CrossSection, CurveSpec, FrameField, Profile, TubeDiagnostics, Twist};
use crate::potential::Potential2D;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Curl residuals and one-sided support of both gauges.
    Gauge,
    /// The 2D threshold e and its ground state.
    Threshold,
    /// Essential-spectrum edge: box-length study and quasi-mode residuals.
    Theorem1,
    /// Field sweep and absorption threshold.
    Theorem2,
    /// Slope of the disk Neumann ground energy.
    Lemma,
    /// Neumann-bracketing lower bound.
    Bracketing,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Gauge => "gauge",
            ExperimentKind::Threshold => "threshold",
            ExperimentKind::Theorem1 => "theorem1",
            ExperimentKind::Theorem2 => "theorem2",
            ExperimentKind::Lemma => "lemma",
            ExperimentKind::Bracketing => "bracketing",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileConfig {
    Straight,
    Bump { amplitude: f64, half_width: f64 },
    Zigzag { gamma_max: f64, half_width: f64, #[serde(default = "default_transition")] transition: f64 },
}

fn default_transition() -> f64 {
    0.1
}

impl ProfileConfig {
    fn half_width(&self) -> f64 {
        match self {
            ProfileConfig::Straight => 0.0,
            ProfileConfig::Bump { half_width, .. } | ProfileConfig::Zigzag { half_width, .. } => *half_width,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum SectionConfig {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Square { half_width: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwistConfig {
    /// Peak twist angle (radians); 0 disables the twist.
    pub amplitude: f64,
    pub half_width: f64,
}

impl Default for TwistConfig {
    fn default() -> Self {
        TwistConfig { amplitude: 0.0, half_width: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    pub profile: ProfileConfig,
    pub section: SectionConfig,
    pub twist: TwistConfig,
    pub samples_per_unit: usize,
    /// Arclength range [−extent, extent] of the sampled curve.
    pub extent: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            profile: ProfileConfig::Straight,
            section: SectionConfig::Disk { radius: 1.0 },
            twist: TwistConfig::default(),
            samples_per_unit: 100,
            extent: 40.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PotentialConfig {
    /// Depth of the well V = depth·1_ω.
    pub depth: Option<f64>,
    /// Alternatively V = (1/ε)·1_ω.
    pub epsilon: Option<f64>,
}

impl PotentialConfig {
    pub fn depth(&self) -> f64 {
        self.depth.or(self.epsilon.map(|e| 1.0 / e)).unwrap_or(10.0)
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.depth()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldConfig {
    pub b0: [f64; 3],
    pub s0: f64,
    /// Inner and outer radius of the cutoff shell; default 1.2 s₀ and 1.8 s₀.
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub gauge: GaugeChoice,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig { b0: [0.3, -0.2, 1.0], s0: 1.0, rho1: None, rho2: None, gauge: GaugeChoice::Landau }
    }
}

/// Lattice for the 3D problems (theorem2, bracketing).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Lateral spacing.
    pub h: f64,
    /// Axial spacing; defaults to `h`.
    pub h3: Option<f64>,
    /// Distance from the tube to the lateral faces.
    pub margin: f64,
    /// Axial box [−z_half, z_half]; defaults to 2s₀ + 2 or the deformed stretch
    /// plus the margin, whichever is larger.
    pub z_half: Option<f64>,
    /// Sub-samples per axis for cell averages of V.
    pub sub: usize,
    /// Relative residual target of the eigensolver.
    pub tol: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { h: 0.1, h3: None, margin: 2.0, z_half: None, sub: 4, tol: 1e-7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaugeExperiment {
    /// Lattice nodes per axis; the check is repeated at 2n.
    pub n: usize,
    /// Half-extent of the cube in units of s₀.
    pub extent_factor: f64,
}

impl Default for GaugeExperiment {
    fn default() -> Self {
        GaugeExperiment { n: 64, extent_factor: 2.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdExperiment {
    pub half_width: f64,
    pub h: f64,
}

impl Default for ThresholdExperiment {
    fn default() -> Self {
        ThresholdExperiment { half_width: 12.0, h: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Theorem1Experiment {
    /// Lateral box [−half_width, half_width]² and its spacing.
    pub half_width: f64,
    pub h: f64,
    /// Box lengths for the edge study and their axial spacing.
    pub lengths: Vec<f64>,
    pub h3_box: f64,
    /// Quasi-mode momentum, scales, and axial spacing.
    pub p: f64,
    pub k: Vec<u32>,
    pub h3_weyl: f64,
}

impl Default for Theorem1Experiment {
    fn default() -> Self {
        Theorem1Experiment {
            half_width: 5.0,
            h: 0.2,
            lengths: vec![20.0, 40.0, 80.0],
            h3_box: 0.5,
            p: 2.0,
            k: vec![8, 16, 32, 64],
            h3_weyl: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Theorem2Experiment {
    /// Sampled B₃⁰, strictly increasing from 0.
    pub b3: Vec<f64>,
    pub mode: crate::experiments::SweepMode,
    pub stop_at_crossing: bool,
}

impl Default for Theorem2Experiment {
    fn default() -> Self {
        Theorem2Experiment {
            b3: vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0],
            mode: crate::experiments::SweepMode::Warm,
            stop_at_crossing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LemmaExperiment {
    pub radii: Vec<f64>,
    pub fields: Vec<f64>,
    /// Radial cells per fiber.
    pub nr: usize,
}

impl Default for LemmaExperiment {
    fn default() -> Self {
        LemmaExperiment { radii: vec![0.8, 1.0, 1.4], fields: vec![10.0, 20.0, 40.0, 80.0, 160.0], nr: 2000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BracketingExperiment {
    /// Half-width of the lateral square of H₃¹; defaults to the smallest
    /// admissible one plus one lattice spacing.
    pub box_half_width: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentsConfig {
    pub run: Vec<ExperimentKind>,
    pub gauge: GaugeExperiment,
    pub threshold: ThresholdExperiment,
    pub theorem1: Theorem1Experiment,
    pub theorem2: Theorem2Experiment,
    pub lemma: LemmaExperiment,
    pub bracketing: BracketingExperiment,
}

impl Default for ExperimentsConfig {
    fn default() -> Self {
        ExperimentsConfig {
            run: vec![ExperimentKind::Threshold],
            gauge: Default::default(),
            threshold: Default::default(),
            theorem1: Default::default(),
            theorem2: Default::default(),
            lemma: Default::default(),
            bracketing: Default::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Output root; not part of the hash.
    pub out: String,
    pub geometry: GeometryConfig,
    pub potential: PotentialConfig,
    pub fields: FieldConfig,
    pub grid: GridConfig,
    pub experiments: ExperimentsConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "scenario".into(),
            seed: 1,
            out: "runs".into(),
            geometry: Default::default(),
            potential: Default::default(),
            fields: Default::default(),
            grid: Default::default(),
            experiments: Default::default(),
        }
    }
}

/// Parses and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let de = toml::Deserializer::new(text);
    let mut unknown = Vec::new();
    let sc: Scenario = serde_ignored::deserialize(de, |p| unknown.push(p.to_string()))
        .map_err(|e| Error::Config(format!("malformed scenario: {e}")))?;
    if !unknown.is_empty() {
        return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let sc = sc.resolved();
    sc.validate()?;
    Ok(sc)
}

impl Scenario {
    /// Fills the optional values that have scenario-dependent defaults.
    pub fn resolved(mut self) -> Self {
        let s0 = self.fields.s0;
        self.fields.rho1.get_or_insert(1.2 * s0);
        self.fields.rho2.get_or_insert(1.8 * s0);
        if self.potential.depth.is_none() && self.potential.epsilon.is_none() {
            self.potential.depth = Some(10.0);
        }
        let h = self.grid.h;
        self.grid.h3.get_or_insert(h);
        let deformed = self.geometry.profile.half_width() + self.section_radius();
        let z = (2.0 * s0 + 2.0).max(deformed + self.grid.margin);
        self.grid.z_half.get_or_insert(z);
        self.experiments.run.sort();
        self.experiments.run.dedup();
        self
    }

    fn section_radius(&self) -> f64 {
        self.section().r_max()
    }

    pub fn section(&self) -> CrossSection {
        match self.geometry.section {
            SectionConfig::Disk { radius } => CrossSection::Disk { radius },
            SectionConfig::Ellipse { a, b } => CrossSection::Ellipse { a, b },
            SectionConfig::Square { half_width } => CrossSection::Square { half_width },
        }
    }

    pub fn curve_spec(&self) -> CurveSpec {
        let g = &self.geometry;
        let profile = match g.profile {
            ProfileConfig::Straight => Profile::Straight,
            ProfileConfig::Bump { amplitude, half_width } => Profile::Bump { amplitude, half_width },
            ProfileConfig::Zigzag { gamma_max, half_width, transition } => {
                Profile::Zigzag { gamma_max, half_width, transition }
            }
        };
        let twist = if g.twist.amplitude == 0.0 {
            Twist::Zero
        } else {
            Twist::Bump { amplitude: g.twist.amplitude, half_width: g.twist.half_width }
        };
        CurveSpec { profile, samples_per_unit: g.samples_per_unit, extent: g.extent, twist }
    }

    pub fn frame(&self) -> Result<FrameField> {
        build_curve(&self.curve_spec())
    }

    pub fn potential(&self) -> Potential2D {
        Potential2D::Well { depth: self.potential.depth() }
    }

    pub fn field(&self) -> Result<FieldSpec> {
        let s0 = self.fields.s0;
        FieldSpec::with_shell(
            self.fields.b0,
            s0,
            self.fields.rho1.unwrap_or(1.2 * s0),
            self.fields.rho2.unwrap_or(1.8 * s0),
        )
    }

    pub fn h3(&self) -> f64 {
        self.grid.h3.unwrap_or(self.grid.h)
    }

    pub fn z_half(&self) -> f64 {
        self.grid.z_half.unwrap_or(2.0 * self.fields.s0 + 2.0)
    }

    pub fn selected(&self, k: ExperimentKind) -> bool {
        self.experiments.run.contains(&k)
    }

    /// Checks every sub-spec and the side conditions of the selected experiments.
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.potential.depth.is_some() && self.potential.epsilon.is_some() {
            return cfg("potential: give either depth or epsilon, not both".into());
        }
        let depth = self.potential.depth();
        if !(depth > 0.0 && depth.is_finite()) {
            return cfg(format!("potential: depth must be positive, got {depth}"));
        }
        let f = &self.fields;
        if !(f.s0 > 0.0) {
            return cfg(format!("fields: s0 must be positive, got {}", f.s0));
        }
        self.field().map_err(|e| Error::Config(format!("fields: {e}")))?;
        let g = &self.grid;
        if !(g.h > 0.0 && self.h3() > 0.0 && g.margin >= 0.0 && g.sub >= 1 && g.tol > 0.0) {
            return cfg("grid: spacings and tolerance must be positive, margin nonnegative, sub at least 1".into());
        }
        if self.z_half() < 2.0 * f.s0 + g.h.max(self.h3()) && self.needs_3d() {
            return cfg(format!("grid: z_half = {} must exceed 2 s0 = {}", self.z_half(), 2.0 * f.s0));
        }
        if self.experiments.run.is_empty() {
            return cfg("experiments: run list is empty".into());
        }
        let d = self.geometry.profile.half_width();
        if d > f.s0 / 2f64.sqrt() {
            return cfg(format!(
                "geometry: deformation half-width {d} exceeds s0/sqrt(2) = {:.6}; the curve must be straight outside the strip |x3| <= s0/sqrt(2)",
                f.s0 / 2f64.sqrt()
            ));
        }
        let frame = self.frame().map_err(|e| Error::Config(format!("geometry: {e}")))?;
        let diag = self.tube_diagnostics(&frame);
        if !diag.injectivity.pass {
            return cfg(format!(
                "geometry: tube map not injective, r_max * sup|curvature| = {:.4} >= 1",
                diag.injectivity.value
            ));
        }
        if self.selected(ExperimentKind::Theorem2) && !diag.assumption1.pass {
            return cfg(format!(
                "geometry violates the assumption Ω ∩ (ℝ²×{{|x₃| ≤ s₀/√2}}) ⊂ B(0, s₀) required by theorem2: the tube reaches |x| = {:.4} > s0 = {}",
                diag.assumption1.value, f.s0
            ));
        }
        let e = &self.experiments;
        if self.selected(ExperimentKind::Theorem2) {
            let b = &e.theorem2.b3;
            if b.is_empty() || b[0] != 0.0 || b.windows(2).any(|w| w[1] <= w[0]) {
                return cfg("experiments.theorem2: b3 must start at 0 and increase strictly".into());
            }
        }
        if self.selected(ExperimentKind::Lemma) {
            let l = &e.lemma;
            if l.fields.len() < 5 || l.radii.is_empty() || l.nr < 3 {
                return cfg("experiments.lemma: need at least 5 fields, one radius, nr >= 3".into());
            }
        }
        if self.selected(ExperimentKind::Theorem1) {
            let t = &e.theorem1;
            if t.k.len() < 2 || t.lengths.is_empty() || !(t.h > 0.0 && t.h3_box > 0.0 && t.h3_weyl > 0.0) {
                return cfg("experiments.theorem1: need two scales k, one length, positive spacings".into());
            }
        }
        if self.selected(ExperimentKind::Gauge) && e.gauge.n < 3 {
            return cfg("experiments.gauge: n must be at least 3".into());
        }
        Ok(())
    }

    fn needs_3d(&self) -> bool {
        self.selected(ExperimentKind::Theorem2) || self.selected(ExperimentKind::Bracketing)
    }

    pub fn tube_diagnostics(&self, frame: &FrameField) -> TubeDiagnostics {
        validate_tube(frame, &self.section(), self.fields.s0)
    }

    /// Stable digest of the canonical content (everything but the output root).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = String::new();
        let bytes = serde_json::to_vec(&c).expect("scenario serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// The resolved scenario as TOML.
    pub fn dump(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize scenario: {e}")))
    }

    /// Solver seed for one labelled computation, derived from the scenario seed.
    pub fn derive_seed(&self, label: &str) -> u64 {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(label.as_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let sc = parse_scenario_str("[fields]\nb0 = [0.0, 0.0, 1.0]\n[potential]\ndepth = 5.0\n").unwrap();
        assert_eq!(sc.potential.depth(), 5.0);
        assert_eq!(sc.fields.rho1, Some(1.2));
        assert_eq!(sc.grid.h3, Some(0.1));
        assert_eq!(sc.experiments.run, vec![ExperimentKind::Threshold]);
        let dump = sc.dump().unwrap();
        assert!(dump.contains("rho2"));
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = parse_scenario_str("vortex = 1\n[fields]\ns0 = 1.0\nswirl = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("vortex") && msg.contains("fields.swirl"), "{msg}");
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn dump_roundtrips_the_hash() {
        let text = "name = \"rt\"\n[geometry.profile]\nkind = \"bump\"\namplitude = 0.4\nhalf_width = 1.5\n[fields]\ns0 = 2.5\n[experiments]\nrun = [\"theorem2\", \"lemma\"]\n";
        let sc = parse_scenario_str(text).unwrap();
        let again = parse_scenario_str(&sc.dump().unwrap()).unwrap();
        assert_eq!(sc, again);
        assert_eq!(sc.hash(), again.hash());
    }

    #[test]
    fn assumption1_violation_is_cited() {
        // a unit-radius straight tube reaches |x| = √(1 + s₀²/2) > s₀ on the slab when s₀ = 1.2
        let text = "[fields]\ns0 = 1.2\n[experiments]\nrun = [\"theorem2\"]\n";
        let msg = parse_scenario_str(text).unwrap_err().to_string();
        assert!(msg.contains("Ω ∩ (ℝ²×{|x₃| ≤ s₀/√2}) ⊂ B(0, s₀)"), "{msg}");
        // the same geometry is fine for experiments that do not need it
        assert!(parse_scenario_str(&text.replace("theorem2", "threshold")).is_ok());
    }

    #[test]
    fn seeds_are_derived_deterministically() {
        let sc = Scenario::default();
        assert_eq!(sc.derive_seed("a"), sc.derive_seed("a"));
        assert_ne!(sc.derive_seed("a"), sc.derive_seed("b"));
    }
}
