//! Lanczos with full reorthogonalization, plain and shift-inverted.

use super::tridiag::lowest_pairs;
use super::{SolveRequest, SpectrumReport};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, random_vector, relative_residual, scale, LinearOperator, C64, ZERO};
use std::sync::atomic::{AtomicBool, Ordering};

const CHECK_EVERY: usize = 10;

struct RitzOutcome {
    values: Vec<f64>,
    vectors: Vec<Vec<C64>>,
    iterations: usize,
}

/// Core iteration on `op`. `accept` receives candidate Ritz pairs (ascending in
/// `op`'s spectrum) and decides whether they are good enough; it may return an
/// error to abort.
fn run(
    op: &dyn LinearOperator,
    k: usize,
    prefilter_tol: f64,
    max_iter: usize,
    start: Vec<C64>,
    seed: u64,
    accept: &mut dyn FnMut(&[f64], &[Vec<C64>]) -> Result<bool>,
) -> Result<RitzOutcome> {
    let n = op.dim();
    let mmax = max_iter.min(n);
    let mut q: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = start;
    if norm(&v) == 0.0 {
        v = random_vector(n, seed);
    }
    scale(1.0 / norm(&v), &mut v);
    let opnorm = op.norm_bound().max(1e-300);
    let mut w = vec![ZERO; n];
    let mut restarts = 0u64;
    let mut best: (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());

    for j in 0..mmax {
        op.apply(&v, &mut w);
        let a = dot(&v, &w).re;
        axpy(C64::new(-a, 0.0), &v, &mut w);
        if j > 0 {
            axpy(C64::new(-beta[j - 1], 0.0), &q[j - 1], &mut w);
        }
        q.push(std::mem::take(&mut v));
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &w);
                axpy(-c, qi, &mut w);
            }
        }
        alpha.push(a);
        let mut b = norm(&w);
        let m = j + 1;
        let invariant = b < 1e-12 * opnorm;
        if m % CHECK_EVERY == 0 || invariant || m == mmax {
            let kk = k.min(m);
            let (theta, s) = lowest_pairs(&alpha, &beta, kk);
            let est: Vec<f64> = (0..kk).map(|i| b * s[i][m - 1].abs() / (theta[i].abs() + 1.0)).collect();
            best = (theta.clone(), est.clone());
            if kk == k && (invariant || est.iter().all(|&e| e <= prefilter_tol)) {
                let vecs: Vec<Vec<C64>> = (0..k)
                    .map(|i| {
                        let mut x = vec![ZERO; n];
                        for (jj, qj) in q.iter().enumerate() {
                            axpy(C64::new(s[i][jj], 0.0), qj, &mut x);
                        }
                        let nx = norm(&x);
                        scale(1.0 / nx, &mut x);
                        x
                    })
                    .collect();
                if accept(&theta, &vecs)? {
                    return Ok(RitzOutcome { values: theta, vectors: vecs, iterations: m });
                }
            }
        }
        if m == mmax {
            break;
        }
        if invariant {
            // exhausted a Krylov space: continue with a fresh direction
            restarts += 1;
            w = random_vector(n, seed.wrapping_add(0x9e37_79b9 * restarts));
            for _ in 0..2 {
                for qi in &q {
                    let c = dot(qi, &w);
                    axpy(-c, qi, &mut w);
                }
            }
            b = 0.0;
            let nw = norm(&w);
            if nw < 1e-10 {
                break;
            }
            scale(1.0 / nw, &mut w);
        } else {
            scale(1.0 / b, &mut w);
        }
        beta.push(b);
        v = std::mem::replace(&mut w, vec![ZERO; n]);
    }
    Err(Error::NoConvergence { iterations: q.len(), ritz: best.0, residuals: best.1 })
}

pub(super) fn lanczos(req: &SolveRequest<'_>) -> Result<SpectrumReport> {
    let op = req.op;
    let start = start_vector(req);
    let tol = req.tol;
    let mut accept = |vals: &[f64], vecs: &[Vec<C64>]| -> Result<bool> {
        Ok(vals.iter().zip(vecs).all(|(&l, x)| relative_residual(op, x, l) <= tol))
    };
    let out = run(op, req.k, 0.5 * tol, req.max_iter, start, req.seed, &mut accept)?;
    let mut rep = SpectrumReport::new("lanczos", op.dim());
    rep.eigenvalues = out.values;
    rep.vectors = out.vectors;
    rep.iterations = out.iterations;
    Ok(rep)
}

fn start_vector(req: &SolveRequest<'_>) -> Vec<C64> {
    match req.warm_start.and_then(|w| w.first()) {
        Some(v) if v.len() == req.op.dim() => {
            // blend in a little noise so that a warm start orthogonal to the target
            // still has a component along it
            let mut x = v.clone();
            let r = random_vector(x.len(), req.seed);
            let s = 1e-3 * norm(&x) / norm(&r).max(1e-300);
            axpy(C64::new(s, 0.0), &r, &mut x);
            x
        }
        _ => random_vector(req.op.dim(), req.seed),
    }
}

/// −(Op − σ)⁻¹ applied by preconditioned conjugate gradients.
struct InverseOp<'a> {
    op: &'a dyn LinearOperator,
    sigma: f64,
    inv_diag: Vec<f64>,
    rtol: f64,
    max_cg: usize,
    broke: AtomicBool,
}

impl InverseOp<'_> {
    fn cg(&self, b: &[C64], x: &mut [C64]) {
        let n = b.len();
        x.iter_mut().for_each(|v| *v = ZERO);
        let mut r = b.to_vec();
        let mut z: Vec<C64> = r.iter().zip(&self.inv_diag).map(|(ri, d)| ri * d).collect();
        let mut p = z.clone();
        let mut ap = vec![ZERO; n];
        let mut rz = dot(&r, &z).re;
        let bn = norm(b);
        if bn == 0.0 {
            return;
        }
        for _ in 0..self.max_cg {
            self.op.apply(&p, &mut ap);
            axpy(C64::new(-self.sigma, 0.0), &p, &mut ap);
            let pap = dot(&p, &ap).re;
            if !(pap > 0.0) {
                self.broke.store(true, Ordering::Relaxed);
                return;
            }
            let a = rz / pap;
            axpy(C64::new(a, 0.0), &p, x);
            axpy(C64::new(-a, 0.0), &ap, &mut r);
            if norm(&r) <= self.rtol * bn {
                return;
            }
            for ((zi, ri), d) in z.iter_mut().zip(&r).zip(&self.inv_diag) {
                *zi = ri * d;
            }
            let rz_new = dot(&r, &z).re;
            let beta = rz_new / rz;
            rz = rz_new;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        self.broke.store(true, Ordering::Relaxed);
    }
}

impl LinearOperator for InverseOp<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.cg(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    }
    fn diagonal(&self) -> Vec<f64> {
        self.inv_diag.iter().map(|d| -d).collect()
    }
    fn norm_bound(&self) -> f64 {
        // 1 / dist(σ, spectrum), bounded through the lower bound of Op
        1.0 / (self.op.lower_bound() - self.sigma).max(1e-12)
    }
}

pub(super) fn shift_invert(req: &SolveRequest<'_>) -> Result<SpectrumReport> {
    let op = req.op;
    let floor = op.lower_bound();
    let mut sigma = req.shift.unwrap_or(floor - 1.0);
    let diag = op.diagonal();
    for attempt in 0..=3 {
        let inv = InverseOp {
            op,
            sigma,
            inv_diag: diag.iter().map(|d| 1.0 / (d - sigma).abs().max(1e-12)).collect(),
            rtol: 0.01 * req.tol,
            max_cg: 20 * op.dim().max(100),
            broke: AtomicBool::new(false),
        };
        let tol = req.tol;
        let mut accept = |t: &[f64], vecs: &[Vec<C64>]| -> Result<bool> {
            if inv.broke.load(Ordering::Relaxed) {
                return Err(Error::ShiftBreakdown(sigma));
            }
            Ok(t.iter()
                .zip(vecs)
                .all(|(&ti, x)| relative_residual(op, x, sigma - 1.0 / ti) <= tol))
        };
        let result = run(&inv, req.k, 0.01 * req.tol, req.max_iter, start_vector(req), req.seed, &mut accept);
        let broke = inv.broke.load(Ordering::Relaxed);
        match result {
            Ok(out) if !broke && out.values.iter().all(|&t| t < 0.0) => {
                let mut rep = SpectrumReport::new("shift-invert", op.dim());
                rep.eigenvalues = out.values.iter().map(|&t| sigma - 1.0 / t).collect();
                rep.vectors = out.vectors;
                rep.iterations = out.iterations;
                rep.metadata.insert("shift".into(), serde_json::json!(sigma));
                rep.metadata.insert("shift_retries".into(), serde_json::json!(attempt));
                return Ok(rep);
            }
            Err(e @ Error::NoConvergence { .. }) if !broke => return Err(e),
            _ => {
                // σ sits in or above the spectrum: move it below the Gershgorin floor
                let gap = (sigma - floor).abs().max(1.0);
                sigma = floor.min(sigma) - gap;
            }
        }
    }
    Err(Error::ShiftBreakdown(sigma))
}
