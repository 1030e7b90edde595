//! Sweep of the field strength B₃⁰ and detection of the absorption threshold.

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::operators::{lowest_lattice_eigs, H3dBuilder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Serial, each point started from the previous eigenvector.
    Warm,
    /// Independent cold starts, run in parallel.
    Cold,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOptions {
    pub mode: SweepMode,
    /// Relative residual target of the eigensolver.
    pub tol: f64,
    pub seed: u64,
    /// Fixed transverse components (B₁⁰, B₂⁰) of the inner field.
    pub b_perp: [f64; 2],
    /// Stop at the first crossing (warm mode only).
    pub stop_at_crossing: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { mode: SweepMode::Warm, tol: 1e-7, seed: 1, b_perp: [0.0, 0.0], stop_at_crossing: false }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub b3: Vec<f64>,
    pub lambda_min: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Threshold of the essential spectrum on the lateral lattice.
    pub e: f64,
    pub tol_gap: f64,
    /// First sampled B₃⁰ with λ_min ≥ e − tol_gap.
    pub b_star: Option<f64>,
    /// e − λ_min at the last sample (positive while a bound state remains).
    pub final_gap: f64,
    /// λ_min nondecreasing along the samples, up to the eigenvalue tolerance.
    pub monotone: bool,
    /// Indices j with λ_min[j] < λ_min[j−1] − slack.
    pub violations: Vec<usize>,
    /// 2/(Cε) from the absorption constants, when supplied.
    pub predicted_threshold: Option<f64>,
    pub mode: SweepMode,
}

impl SweepResult {
    pub fn reached(&self) -> bool {
        self.b_star.is_some()
    }
}

/// Lowest eigenvalue of H for each B₃⁰ in `b3` (strictly increasing from 0).
///
/// Fails with a precondition error when there is no bound state at B₃⁰ = 0,
/// i.e. λ_min(0) ≥ e − tol_gap.
pub fn field_sweep(
    builder: &H3dBuilder,
    b3: &[f64],
    e: f64,
    tol_gap: f64,
    predicted_threshold: Option<f64>,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if b3.is_empty() || b3[0] != 0.0 {
        return Err(Error::InvalidInput("the B3 grid must start at 0".into()));
    }
    if b3.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("the B3 grid must be strictly increasing".into()));
    }
    let b0 = |b: f64| [opts.b_perp[0], opts.b_perp[1], b];
    let solve = |b: f64, warm: Option<&[Vec<C64>]>| -> Result<(f64, f64, usize, Vec<C64>)> {
        let op = builder.operator(b0(b))?;
        let mut rep = lowest_lattice_eigs(&op, 1, opts.tol, opts.seed, warm)?;
        let v = rep.vectors.swap_remove(0);
        Ok((rep.eigenvalues[0], rep.residuals[0], rep.iterations, v))
    };

    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    match opts.mode {
        SweepMode::Warm => {
            let mut prev: Option<Vec<C64>> = None;
            for &b in b3 {
                let warm = prev.take().map(|v| vec![v]);
                let (l, r, it, v) = solve(b, warm.as_deref())?;
                if out.is_empty() && l >= e - tol_gap {
                    return Err(no_initial(l, e, tol_gap));
                }
                out.push((l, r, it));
                prev = Some(v);
                if opts.stop_at_crossing && l >= e - tol_gap {
                    break;
                }
            }
        }
        SweepMode::Cold => {
            out = b3
                .par_iter()
                .map(|&b| solve(b, None).map(|(l, r, it, _)| (l, r, it)))
                .collect::<Result<_>>()?;
            if out[0].0 >= e - tol_gap {
                return Err(no_initial(out[0].0, e, tol_gap));
            }
        }
    }
    let n = out.len();
    let lambda_min: Vec<f64> = out.iter().map(|o| o.0).collect();
    // eigenvalue error of a Ritz value is quadratic in the residual, but a
    // linear slack keeps the flag robust to a loose solver tolerance
    let slack = |l: f64| opts.tol * (1.0 + l.abs());
    let violations: Vec<usize> = (1..n).filter(|&j| lambda_min[j] < lambda_min[j - 1] - slack(lambda_min[j])).collect();
    let b_star = (0..n).find(|&j| lambda_min[j] >= e - tol_gap).map(|j| b3[j]);
    Ok(SweepResult {
        b3: b3[..n].to_vec(),
        residuals: out.iter().map(|o| o.1).collect(),
        iterations: out.iter().map(|o| o.2).collect(),
        e,
        tol_gap,
        b_star,
        final_gap: e - lambda_min[n - 1],
        monotone: violations.is_empty(),
        violations,
        predicted_threshold,
        mode: opts.mode,
        lambda_min,
    })
}

fn no_initial(l: f64, e: f64, tol_gap: f64) -> Error {
    Error::Precondition(format!(
        "no initial bound state: lambda_min(0) = {l} is not below e - tol_gap = {}",
        e - tol_gap
    ))
}
