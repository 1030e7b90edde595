//! Adaptive Gauss–Kronrod (7/15) quadrature and a fixed 3-point Gauss rule.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7 in XGK).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7–K15 panel: (Kronrod estimate, |K − G|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrates f over [a, b] (either orientation) to absolute tolerance `tol`.
///
/// Interval bisection with a global error budget; fails with the attained estimate
/// after `max_panels` panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let max_panels = 2000;
    let (v, e) = gk15(&f, lo, hi);
    let mut panels = vec![(lo, hi, v, e)];
    let mut total = v;
    let mut err = e;
    while err > tol {
        if panels.len() >= max_panels {
            return Err(Error::Quadrature { a, b, estimate: sign * total, error: err });
        }
        // split the worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, pv, pe) = panels.swap_remove(idx);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&f, pa, m);
        let (v2, e2) = gk15(&f, m, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        panels.push((pa, m, v1, e1));
        panels.push((m, pb, v2, e2));
        // guard against round-off stalling
        if (pb - pa).abs() < 1e-14 * (1.0 + pa.abs()) {
            break;
        }
    }
    Ok(sign * total)
}

/// Integrates piecewise: the breakpoints (inside (a,b)) split the range first so
/// that each panel sees a smooth integrand.
pub fn integrate_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&t| t > lo && t < hi).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.extend(inner);
    pts.push(hi);
    let share = tol / (pts.len() - 1) as f64;
    let mut s = 0.0;
    for w in pts.windows(2) {
        s += integrate(&f, w[0], w[1], share)?;
    }
    Ok(sign * s)
}

/// Three-point Gauss–Legendre nodes on [0, 1] and weights (sum to 1).
pub const GAUSS3_T: [f64; 3] = [
    0.5 - 0.387_298_334_620_741_7,
    0.5,
    0.5 + 0.387_298_334_620_741_7,
];
pub const GAUSS3_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-13).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn reversed_orientation_flips_sign() {
        let a = integrate(f64::sin, 0.0, 2.0, 1e-12).unwrap();
        let b = integrate(f64::sin, 2.0, 0.0, 1e-12).unwrap();
        assert_eq!(a, -b);
        assert!((a - (1.0 - 2f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn kink_handled_by_split() {
        let v = integrate_split(|x: f64| x.abs(), -1.0, 2.0, &[0.0], 1e-13).unwrap();
        assert!((v - 2.5).abs() < 1e-13);
    }

    #[test]
    fn gauss3_degree_five() {
        let s: f64 = GAUSS3_T.iter().zip(GAUSS3_W).map(|(t, w)| w * t.powi(5)).sum();
        assert!((s - 1.0 / 6.0).abs() < 1e-15);
    }
}
