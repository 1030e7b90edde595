//! Locally optimal block preconditioned conjugate gradient.
//!
//! The trial space [X, P, W] is kept orthonormal by modified Gram-Schmidt, and
//! every basis vector carries its image under the operator, so each iteration
//! costs one operator application per fresh residual direction. Images obtained
//! by linear recombination drift slowly; they are refreshed every
//! `REFRESH_EVERY` iterations.

use super::{SolveRequest, SpectrumReport};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, random_vector, LinearOperator, C64, ZERO};
use nalgebra::DMatrix;

const GUARD: usize = 2;
const REFRESH_EVERY: usize = 25;

struct Basis {
    v: Vec<Vec<C64>>,
    av: Vec<Vec<C64>>,
}

impl Basis {
    fn new() -> Self {
        Basis { v: Vec::new(), av: Vec::new() }
    }

    /// Orthogonalizes (x, ax) against the basis; appends it if enough survives.
    /// `ax` may be `None`, in which case the image is computed after
    /// orthogonalization.
    fn push(&mut self, mut x: Vec<C64>, mut ax: Option<Vec<C64>>, op: &dyn LinearOperator) -> bool {
        let n0 = norm(&x);
        if n0 == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for (q, aq) in self.v.iter().zip(&self.av) {
                let c = dot(q, &x);
                axpy(-c, q, &mut x);
                if let Some(a) = ax.as_mut() {
                    axpy(-c, aq, a);
                }
            }
        }
        let n1 = norm(&x);
        if n1 < 1e-8 * n0 {
            return false;
        }
        let inv = 1.0 / n1;
        x.iter_mut().for_each(|v| *v *= inv);
        let ax = match ax {
            Some(mut a) => {
                a.iter_mut().for_each(|v| *v *= inv);
                a
            }
            None => {
                let mut a = vec![ZERO; x.len()];
                op.apply(&x, &mut a);
                a
            }
        };
        self.v.push(x);
        self.av.push(ax);
        true
    }

    fn len(&self) -> usize {
        self.v.len()
    }
}

fn combine(vs: &[Vec<C64>], coef: &DMatrix<C64>, col: usize, rows: std::ops::Range<usize>) -> Vec<C64> {
    let n = vs[0].len();
    let mut out = vec![ZERO; n];
    for r in rows {
        let c = coef[(r, col)];
        if c != ZERO {
            axpy(c, &vs[r], &mut out);
        }
    }
    out
}

pub(super) fn lobpcg(req: &SolveRequest<'_>) -> Result<SpectrumReport> {
    let op = req.op;
    let n = op.dim();
    let k = req.k;
    let m = (k + GUARD).min(n);

    // initial block: warm start first, then random fill
    let mut basis = Basis::new();
    if let Some(ws) = req.warm_start {
        for v in ws.iter().filter(|v| v.len() == n).take(m) {
            basis.push(v.clone(), None, op);
        }
    }
    let mut salt = 0u64;
    while basis.len() < m {
        basis.push(random_vector(n, req.seed.wrapping_add(salt)), None, op);
        salt += 1;
        if salt > 100 + m as u64 {
            return Err(Error::InvalidInput("could not build an initial block".into()));
        }
    }
    let (mut x, mut ax) = (basis.v, basis.av);
    let mut p: Vec<Vec<C64>> = Vec::new();
    let mut ap: Vec<Vec<C64>> = Vec::new();
    let mut theta = vec![0.0; m];
    let mut res = vec![f64::INFINITY; m];
    let mut r = vec![ZERO; n];
    let mut w = vec![ZERO; n];

    for it in 0..req.max_iter {
        if it > 0 && it % REFRESH_EVERY == 0 {
            for (xi, axi) in x.iter().zip(ax.iter_mut()) {
                op.apply(xi, axi);
            }
            p.clear();
            ap.clear();
        }
        let mut b = Basis::new();
        for (xi, axi) in x.drain(..).zip(ax.drain(..)) {
            b.push(xi, Some(axi), op);
        }
        let nx = b.len();
        for (pi, api) in p.drain(..).zip(ap.drain(..)) {
            b.push(pi, Some(api), op);
        }
        // residuals and preconditioned directions (only the unconverged ones)
        let mut active = 0;
        for i in 0..m.min(nx) {
            if it > 0 && res[i] <= req.tol * 0.5 && i < k {
                continue;
            }
            let th = theta[i];
            for ((ri, axi), xi) in r.iter_mut().zip(&b.av[i]).zip(&b.v[i]) {
                *ri = axi - th * xi;
            }
            if let Some(pc) = req.precond {
                pc.apply(&r, &mut w);
            } else {
                w.copy_from_slice(&r);
            }
            if b.push(w.clone(), None, op) {
                active += 1;
            }
        }
        // Rayleigh-Ritz on the trial space
        let ns = b.len();
        let mut g = DMatrix::from_element(ns, ns, ZERO);
        for i in 0..ns {
            for j in i..ns {
                let v = dot(&b.v[i], &b.av[j]);
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        for i in 0..ns {
            g[(i, i)] = C64::new(g[(i, i)].re, 0.0);
        }
        let eig = g.symmetric_eigen();
        let mut order: Vec<usize> = (0..ns).collect();
        order.sort_by(|&a, &c| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[c]).unwrap());
        let mut c = DMatrix::from_element(ns, m, ZERO);
        for (col, &o) in order.iter().take(m).enumerate() {
            c.set_column(col, &eig.eigenvectors.column(o));
            theta[col] = eig.eigenvalues[o];
        }
        // new X, AX, and P = contribution of the non-X part
        for col in 0..m {
            x.push(combine(&b.v, &c, col, 0..ns));
            ax.push(combine(&b.av, &c, col, 0..ns));
            if ns > nx {
                p.push(combine(&b.v, &c, col, nx..ns));
                ap.push(combine(&b.av, &c, col, nx..ns));
            }
        }
        for i in 0..m {
            let mut s = 0.0;
            for (axi, xi) in ax[i].iter().zip(&x[i]) {
                s += (axi - theta[i] * xi).norm_sqr();
            }
            res[i] = s.sqrt() / (norm(&x[i]) * (theta[i].abs() + 1.0));
        }
        if res[..k].iter().all(|&e| e <= req.tol * 0.5) {
            // confirm with fresh images
            let mut ok = true;
            for i in 0..k {
                op.apply(&x[i], &mut r);
                let mut s = 0.0;
                for (ri, xi) in r.iter().zip(&x[i]) {
                    s += (ri - theta[i] * xi).norm_sqr();
                }
                let true_res = s.sqrt() / (norm(&x[i]) * (theta[i].abs() + 1.0));
                if true_res > req.tol {
                    ok = false;
                }
                res[i] = true_res;
                ax[i].copy_from_slice(&r);
            }
            if ok {
                let mut rep = SpectrumReport::new("lobpcg", n);
                for i in 0..k {
                    let nx = norm(&x[i]);
                    let v: Vec<C64> = x[i].iter().map(|z| z / nx).collect();
                    rep.eigenvalues.push(theta[i]);
                    rep.vectors.push(v);
                }
                rep.iterations = it + 1;
                return Ok(rep);
            }
        }
        if active == 0 && ns == nx {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: req.max_iter, ritz: theta[..k].to_vec(), residuals: res[..k].to_vec() })
}
