//! Batch runner: executes the selected experiments of a scenario, caches their
//! results, and writes JSON summaries, CSV traces, and a Markdown report.
//!
//! Layout of an output root:
//!
//! ```text
//! <out>/cache/summary-<key>.json     cached experiment summaries
//! <out>/cache/phases-<key>.bin       Peierls phase tables
//! <out>/<name>-<hash12>/             one directory per scenario
//!     scenario.toml                  resolved scenario
//!     <kind>_<hash12>_<grid>.json    summary
//!     <kind>_<hash12>_<grid>.csv     trace, one row per sample
//!     report.md
//!     run.json                       status and timestamp
//!     errors.json                    only when something failed
//! ```

pub mod suites;

use crate::error::{Error, Result};
use crate::fields::{FieldSpec, GaugeChoice};
use crate::geometry::Check;
use crate::grid::Grid;
use crate::operators::PhaseTable;
use crate::scenario::{ExperimentKind, Scenario};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use suites::Checks;

/// What every experiment summary offers the runner.
pub trait Summary: Serialize + DeserializeOwned {
    fn checks(&self) -> &Checks;
    /// Plot-ready trace, header line first.
    fn csv(&self) -> String;
}

fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

/// Append-only cache under `<out>/cache`.
pub struct Cache {
    dir: PathBuf,
    enabled: bool,
}

impl Cache {
    pub fn new(out: &Path, enabled: bool) -> Result<Self> {
        let dir = out.join("cache");
        if enabled {
            std::fs::create_dir_all(&dir)?;
        }
        Ok(Cache { dir, enabled })
    }

    /// Phase table for (field shell, gauge, lattice), computed on a miss.
    pub fn phases(&self, field: &FieldSpec, gauge: GaugeChoice, grid: &Grid, wanted: [bool; 3]) -> Result<PhaseTable> {
        let key = digest(&[
            &serde_json::to_vec(&(field.s0, field.rho1, field.rho2, gauge))?,
            &serde_json::to_vec(grid)?,
        ]);
        let path = self.dir.join(format!("phases-{}.bin", &key[..24]));
        if self.enabled && path.exists() {
            let t = PhaseTable::read(&path)?;
            let have = t.components();
            if (0..3).all(|c| have[c] || !wanted[c]) {
                return Ok(t);
            }
        }
        let t = PhaseTable::compute(field, gauge, grid, wanted)?;
        if self.enabled {
            t.write(&path)?;
        }
        Ok(t)
    }

    fn summary_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("summary-{}.json", &key[..24]))
    }

    fn get(&self, key: &str) -> Option<Vec<u8>> {
        if !self.enabled {
            return None;
        }
        std::fs::read(self.summary_path(key)).ok()
    }

    fn put(&self, key: &str, bytes: &[u8]) -> Result<()> {
        if self.enabled {
            std::fs::write(self.summary_path(key), bytes)?;
        }
        Ok(())
    }

    pub fn clean(out: &Path) -> Result<usize> {
        let dir = out.join("cache");
        if !dir.exists() {
            return Ok(0);
        }
        let mut n = 0;
        for entry in std::fs::read_dir(&dir)? {
            let p = entry?.path();
            if p.is_file() {
                std::fs::remove_file(&p)?;
                n += 1;
            }
        }
        std::fs::remove_dir(&dir)?;
        Ok(n)
    }
}

/// Grid tag used in file names.
pub fn grid_tag(sc: &Scenario, kind: ExperimentKind) -> String {
    let e = &sc.experiments;
    match kind {
        ExperimentKind::Gauge => format!("n{}", e.gauge.n),
        ExperimentKind::Threshold => format!("h{}", e.threshold.h),
        ExperimentKind::Theorem1 => format!("h{}-h3w{}", e.theorem1.h, e.theorem1.h3_weyl),
        ExperimentKind::Theorem2 | ExperimentKind::Bracketing => format!("h{}-h3{}", sc.grid.h, sc.h3()),
        ExperimentKind::Lemma => format!("nr{}", e.lemma.nr),
    }
}

/// Which statement of the theory an experiment checks.
pub fn checks_statement(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Gauge => "Gauge construction: curl system and one-sided support of the Landau and mirror gauges",
        ExperimentKind::Threshold => "Threshold e = inf σ(h_V) ∈ (−‖V‖∞, 0) and positivity of the ground state",
        ExperimentKind::Theorem1 => "Essential spectrum: σ_ess(H) = [e, ∞) (box-length study and Weyl quasi-modes)",
        ExperimentKind::Theorem2 => "Absorption: a strong enough local field B₃⁰ empties the discrete spectrum below e, with threshold at most 2/(Cε)",
        ExperimentKind::Lemma => "Disk asymptotics: λ₁(B̃, R) = αB̃ + o(B̃) uniformly in R, and λ₁ ≥ αB̃/2",
        ExperimentKind::Bracketing => "Neumann bracketing: H ≥ H₁ ⊕ H₂ ⊕ H₃, the lower bound behind the essential spectrum",
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub kind: ExperimentKind,
    pub summary: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub cached: bool,
    pub checks: Checks,
    pub error: Option<String>,
    /// "config" or "numerical" for failures.
    pub error_kind: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub hash: String,
    pub experiments: Vec<ExperimentRecord>,
}

impl RunOutcome {
    pub fn failed(&self) -> bool {
        self.experiments.iter().any(|e| e.error.is_some())
    }

    pub fn config_failure(&self) -> bool {
        self.experiments.iter().any(|e| e.error_kind.as_deref() == Some("config"))
    }
}

pub struct RunOptions {
    pub out: PathBuf,
    pub use_cache: bool,
}

pub fn run_dir(sc: &Scenario, out: &Path) -> PathBuf {
    out.join(format!("{}-{}", sc.name, &sc.hash()[..12]))
}

fn file_stem(sc: &Scenario, kind: ExperimentKind) -> String {
    format!("{}_{}_{}", kind.name(), &sc.hash()[..12], grid_tag(sc, kind))
}

fn compute(sc: &Scenario, kind: ExperimentKind, cache: &Cache) -> Result<Vec<u8>> {
    fn ser<T: Serialize>(t: &T) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(t)?;
        v.push(b'\n');
        Ok(v)
    }
    match kind {
        ExperimentKind::Gauge => ser(&suites::gauge(sc)?),
        ExperimentKind::Threshold => ser(&suites::threshold(sc)?),
        ExperimentKind::Theorem1 => ser(&suites::theorem1(sc)?),
        ExperimentKind::Theorem2 => ser(&suites::theorem2(sc, cache)?),
        ExperimentKind::Lemma => ser(&suites::lemma(sc)?),
        ExperimentKind::Bracketing => ser(&suites::bracketing(sc, cache)?),
    }
}

fn decode<T: Summary>(bytes: &[u8]) -> Result<(Checks, String)> {
    let t: T = serde_json::from_slice(bytes)?;
    Ok((t.checks().clone(), t.csv()))
}

/// Checks and CSV trace of a serialized summary.
pub fn decode_summary(kind: ExperimentKind, bytes: &[u8]) -> Result<(Checks, String)> {
    use suites::*;
    match kind {
        ExperimentKind::Gauge => decode::<GaugeSummary>(bytes),
        ExperimentKind::Threshold => decode::<ThresholdSummary>(bytes),
        ExperimentKind::Theorem1 => decode::<Theorem1Summary>(bytes),
        ExperimentKind::Theorem2 => decode::<Theorem2Summary>(bytes),
        ExperimentKind::Lemma => decode::<LemmaSummary>(bytes),
        ExperimentKind::Bracketing => decode::<BracketingSummary>(bytes),
    }
}

/// Runs every selected experiment. Failures are recorded and the remaining
/// experiments still run; the returned outcome says whether any failed.
pub fn run(sc: &Scenario, opts: &RunOptions) -> Result<RunOutcome> {
    let dir = run_dir(sc, &opts.out);
    std::fs::create_dir_all(&dir)?;
    let cache = Cache::new(&opts.out, opts.use_cache)?;
    std::fs::write(dir.join("scenario.toml"), sc.dump()?)?;
    let hash = sc.hash();
    let mut records = Vec::new();
    for &kind in &sc.experiments.run {
        let key = digest(&[hash.as_bytes(), kind.name().as_bytes(), grid_tag(sc, kind).as_bytes()]);
        let (bytes, cached) = match cache.get(&key) {
            Some(b) => (Ok(b), true),
            None => (compute(sc, kind, &cache), false),
        };
        let stem = file_stem(sc, kind);
        let rec = match bytes.and_then(|b| decode_summary(kind, &b).map(|d| (b, d))) {
            Ok((b, (checks, csv))) => {
                if !cached {
                    cache.put(&key, &b)?;
                }
                let json_path = dir.join(format!("{stem}.json"));
                let csv_path = dir.join(format!("{stem}.csv"));
                std::fs::write(&json_path, &b)?;
                std::fs::write(&csv_path, csv)?;
                ExperimentRecord { kind, summary: Some(json_path), csv: Some(csv_path), cached, checks, error: None, error_kind: None }
            }
            Err(e) => {
                let ek = if matches!(e, Error::Config(_)) { "config" } else { "numerical" };
                ExperimentRecord {
                    kind,
                    summary: None,
                    csv: None,
                    cached: false,
                    checks: Checks::new(),
                    error: Some(e.to_string()),
                    error_kind: Some(ek.into()),
                }
            }
        };
        records.push(rec);
    }
    let outcome = RunOutcome { dir: dir.clone(), hash, experiments: records };
    std::fs::write(dir.join("report.md"), report(sc, &outcome))?;
    let failures: Vec<_> = outcome
        .experiments
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| (r.kind.name(), r.error_kind.clone().unwrap_or_default(), e.clone())))
        .collect();
    let err_path = dir.join("errors.json");
    if failures.is_empty() {
        if err_path.exists() {
            std::fs::remove_file(&err_path)?;
        }
    } else {
        let list: Vec<_> = failures
            .iter()
            .map(|(k, t, m)| serde_json::json!({ "experiment": k, "kind": t, "message": m }))
            .collect();
        std::fs::write(&err_path, serde_json::to_vec_pretty(&list)?)?;
    }
    let stamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let status = serde_json::json!({
        "scenario": sc.name,
        "hash": outcome.hash,
        "timestamp": stamp,
        "status": if outcome.failed() { "failed" } else { "ok" },
        "experiments": outcome.experiments,
    });
    std::fs::write(dir.join("run.json"), serde_json::to_vec_pretty(&status)?)?;
    Ok(outcome)
}

fn fmt_check(name: &str, c: &Check) -> String {
    format!("| {name} | {:.6e} | {:.6e} | {} |\n", c.value, c.limit, if c.pass { "pass" } else { "FAIL" })
}

/// Human-readable report mapping every result to the statement it checks.
pub fn report(sc: &Scenario, outcome: &RunOutcome) -> String {
    let mut s = format!("# Run report: {}\n\nScenario hash `{}`.\n\n", sc.name, outcome.hash);
    for r in &outcome.experiments {
        s += &format!("## {}\n\n{}\n\n", r.kind.name(), checks_statement(r.kind));
        if let Some(e) = &r.error {
            s += &format!("**Error ({})**: {e}\n\n", r.error_kind.as_deref().unwrap_or("numerical"));
            continue;
        }
        if let Some(p) = &r.summary {
            s += &format!("Summary: `{}`{}\n\n", p.file_name().unwrap().to_string_lossy(), if r.cached { " (cached)" } else { "" });
        }
        s += "| check | value | limit | result |\n|---|---|---|---|\n";
        for (name, c) in &r.checks {
            s += &fmt_check(name, c);
        }
        s += "\n";
    }
    s
}

/// Re-emits the CSV traces of a previous run from its JSON summaries.
pub fn export(sc: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let dir = run_dir(sc, out);
    let mut written = Vec::new();
    for &kind in &sc.experiments.run {
        let stem = file_stem(sc, kind);
        let json = dir.join(format!("{stem}.json"));
        if !json.exists() {
            return Err(Error::InvalidInput(format!("no summary for {} at {}; run the scenario first", kind.name(), json.display())));
        }
        let (_, csv) = decode_summary(kind, &std::fs::read(&json)?)?;
        let p = dir.join(format!("{stem}.csv"));
        std::fs::write(&p, csv)?;
        written.push(p);
    }
    Ok(written)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub experiment: String,
    pub nodes: usize,
    pub memory_mb: f64,
    pub runtime_s: f64,
}

/// Lattice sizes and rough memory/runtime figures, computed without solving.
pub fn dry_run(sc: &Scenario) -> Result<(String, Vec<Estimate>)> {
    let mut est = Vec::new();
    // bytes per node: diagonal, three links, ~30 complex work vectors
    let per_node = 8.0 + 3.0 * 16.0 + 30.0 * 16.0;
    // seconds per node and solver iteration on one core, measured; the 3D
    // figure includes the FFT preconditioner and the block orthogonalization
    let per_node_iter = 1.5e-7;
    let per_node_iter_3d = 2.4e-6;
    let frame = sc.frame()?;
    for &kind in &sc.experiments.run {
        let (nodes, iters) = match kind {
            ExperimentKind::Gauge => {
                let n = sc.experiments.gauge.n;
                (n * n * n + 8 * n * n * n, 3.0)
            }
            ExperimentKind::Threshold => {
                let t = &sc.experiments.threshold;
                let n = (2.0 * t.half_width / t.h) as usize;
                (n * n, 200.0)
            }
            ExperimentKind::Theorem1 => {
                let t = &sc.experiments.theorem1;
                let n = (2.0 * t.half_width / t.h) as usize;
                let boxes: f64 = t.lengths.iter().map(|l| l / t.h3_box).sum();
                (n * n * boxes as usize, 100.0)
            }
            ExperimentKind::Theorem2 | ExperimentKind::Bracketing => {
                let z = sc.z_half();
                let [a0, a1] = suites::lateral_axes(&frame, sc.section().r_max(), z, sc.grid.margin, sc.grid.h)?;
                let nz = (2.0 * z / sc.h3()) as usize;
                let solves = if kind == ExperimentKind::Theorem2 { sc.experiments.theorem2.b3.len() as f64 } else { 6.0 };
                (a0.n * a1.n * nz, 50.0 * solves)
            }
            ExperimentKind::Lemma => {
                let l = &sc.experiments.lemma;
                (l.nr, 0.0)
            }
        };
        let runtime = if kind == ExperimentKind::Lemma {
            let l = &sc.experiments.lemma;
            let fibers: f64 = l.radii.iter().flat_map(|r| l.fields.iter().map(move |b| b * r * r / 2.0 + 25.0)).sum();
            fibers * l.nr as f64 * 60.0 * 4e-9 * 3.0
        } else if kind == ExperimentKind::Gauge {
            nodes as f64 * 2.0e-5
        } else if kind == ExperimentKind::Threshold {
            nodes as f64 * iters * per_node_iter
        } else {
            nodes as f64 * iters * per_node_iter_3d
        };
        est.push(Estimate {
            experiment: kind.name().into(),
            nodes,
            memory_mb: nodes as f64 * per_node / 1e6,
            runtime_s: runtime,
        });
    }
    Ok((sc.dump()?, est))
}

/// Sorted map from experiment name to its checks, for quick inspection.
pub fn check_table(outcome: &RunOutcome) -> BTreeMap<String, Checks> {
    outcome.experiments.iter().map(|r| (r.kind.name().to_string(), r.checks.clone())).collect()
}
