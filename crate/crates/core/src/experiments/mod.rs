//! Experiment drivers built on the operators: quasi-mode residuals on the
//! straight tails, the B₃⁰ sweep with threshold detection, the slope of the
//! disk ground energy, the constants of the absorption bound, and the
//! Neumann-bracketing check.

pub mod alpha;
pub mod bracket;
pub mod constants;
pub mod sweep;
pub mod weyl;

pub use alpha::{fit_alpha, sample_disk, AlphaFit, AlphaSeries};
pub use bracket::{bracketing_check, BracketingResult};
pub use constants::{check_assumption2, potential_mismatch, theorem2_constants, PotentialMismatch, Theorem2Constants};
pub use sweep::{field_sweep, SweepMode, SweepOptions, SweepResult};
pub use weyl::{bump, loglog_slope, weyl_residual, TailSetup, WeylProbe};

/// Ordinary least squares y ≈ a x + b, returning (a, b).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

/// Gap tolerance for "absorbed into the essential spectrum": three times the
/// h-refinement estimate |e_h − e_{h/2}| of the threshold's discretization error.
pub fn gap_tolerance(e_h: f64, e_half: f64) -> f64 {
    3.0 * (e_h - e_half).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_a_line() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v - 3.0).collect();
        let (a, b) = linear_fit(&x, &y);
        assert!((a - 0.5).abs() < 1e-14 && (b + 3.0).abs() < 1e-13);
    }
}
