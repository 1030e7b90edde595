//! Linear growth of the disk ground energy in the field strength.

use super::linear_fit;
use crate::error::{Error, Result};
use crate::operators::lambda1_disk;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// (B̃, λ₁) samples at one radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaSeries {
    pub radius: f64,
    pub b: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Minimizing angular momentum per sample.
    pub m: Vec<i64>,
}

/// λ₁(B̃, R) on the full product of `radii` and `fields`.
pub fn sample_disk(radii: &[f64], fields: &[f64], nr: usize) -> Result<Vec<AlphaSeries>> {
    radii
        .iter()
        .map(|&r| {
            let g: Vec<_> = fields.par_iter().map(|&b| lambda1_disk(b, r, nr)).collect::<Result<_>>()?;
            Ok(AlphaSeries {
                radius: r,
                b: fields.to_vec(),
                lambda: g.iter().map(|d| d.lambda).collect(),
                m: g.iter().map(|d| d.m).collect(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusFit {
    pub radius: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Relative slope change between the lower and upper half of the window.
    pub drift: f64,
    pub min_lambda: f64,
    /// Signed check: intercept ≤ 0.05 · min λ₁ over the window.
    pub intercept_ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaFit {
    /// Mean of the per-radius slopes.
    pub slope: f64,
    pub per_radius: Vec<RadiusFit>,
    /// (max − min)/mean of the per-radius slopes.
    pub spread: f64,
    /// λ₁ ≥ (slope/2)·B̃ on every sample.
    pub lower_bound_holds: bool,
    /// Smallest λ₁ / (slope·B̃/2) over all samples.
    pub lower_bound_margin: f64,
}

/// Least-squares slope over the whole sampled window, per radius.
pub fn fit_alpha(series: &[AlphaSeries]) -> Result<AlphaFit> {
    if series.is_empty() {
        return Err(Error::InvalidInput("no sample series".into()));
    }
    let mut per_radius = Vec::new();
    for s in series {
        let n = s.b.len();
        if n < 5 || s.lambda.len() != n {
            return Err(Error::InvalidInput(format!("need at least 5 samples per radius (R = {} has {n})", s.radius)));
        }
        let (slope, intercept) = linear_fit(&s.b, &s.lambda);
        // halves share the middle sample when n is odd
        let h = n.div_ceil(2);
        let (lo, _) = linear_fit(&s.b[..h], &s.lambda[..h]);
        let (hi, _) = linear_fit(&s.b[n - h..], &s.lambda[n - h..]);
        let drift = (hi - lo).abs() / slope.abs();
        if drift > 0.1 {
            return Err(Error::NotAsymptotic(format!(
                "R = {}: slope drifts by {:.1}% across the window halves",
                s.radius,
                100.0 * drift
            )));
        }
        let min_lambda = s.lambda.iter().cloned().fold(f64::INFINITY, f64::min);
        per_radius.push(RadiusFit {
            radius: s.radius,
            slope,
            intercept,
            drift,
            min_lambda,
            intercept_ok: intercept <= 0.05 * min_lambda,
        });
    }
    let slopes: Vec<f64> = per_radius.iter().map(|r| r.slope).collect();
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let spread = (slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - slopes.iter().cloned().fold(f64::INFINITY, f64::min))
        / mean;
    let mut margin = f64::INFINITY;
    for s in series {
        for (b, l) in s.b.iter().zip(&s.lambda) {
            if *b > 0.0 {
                margin = margin.min(l / (0.5 * mean * b));
            }
        }
    }
    Ok(AlphaFit { slope: mean, per_radius, spread, lower_bound_holds: margin >= 1.0, lower_bound_margin: margin })
}
