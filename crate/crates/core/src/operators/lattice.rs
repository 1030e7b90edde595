//! Nearest-neighbour lattice operators with Peierls link phases.
//!
//! Row i of the operator reads
//!
//! ```text
//! (Hψ)_i = Σ_j (ψ_i − e^{−iθ_ij} ψ_j)/h_ij² − V_i ψ_i,    θ_ij = ∫_{x_i}^{x_j} A·dl,
//! ```
//!
//! so storing one complex coefficient per forward link is enough: the backward
//! coefficient is its conjugate, which makes the matrix Hermitian by
//! construction.

use crate::grid::{Bc, Grid};
use crate::linalg::{CsrMatrix, LinearOperator, C64, ZERO};
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct LatticeOperator {
    grid: Grid,
    strides: Vec<usize>,
    diag: Vec<f64>,
    /// links[a][i]: coefficient of ψ_{i+s_a} in row i (zero when there is no link)
    links: Vec<Vec<C64>>,
    norm_bound: f64,
    lower_bound: f64,
}

impl LatticeOperator {
    /// `potential` is subtracted on the diagonal. `phases[a]`, when given, holds
    /// θ for the forward link leaving each node along axis a.
    pub fn new(grid: &Grid, potential: &[f64], phases: &[Option<&[f64]>]) -> Self {
        let n = grid.len();
        assert_eq!(potential.len(), n, "potential length");
        let strides = grid.strides();
        let shape = grid.shape();
        let mut diag: Vec<f64> = potential.iter().map(|v| -v).collect();
        let mut links = Vec::with_capacity(grid.dim());
        for (a, ax) in grid.axes.iter().enumerate() {
            let h2 = ax.h() * ax.h();
            let s = strides[a];
            let m = shape[a];
            let ph = phases.get(a).copied().flatten();
            let mut w = vec![ZERO; n];
            for i in 0..n {
                let pos = (i / s) % m;
                if pos + 1 < m {
                    w[i] = match ph {
                        Some(t) => C64::from_polar(-1.0 / h2, -t[i]),
                        None => C64::new(-1.0 / h2, 0.0),
                    };
                    diag[i] += 1.0 / h2;
                    diag[i + s] += 1.0 / h2;
                }
                if pos == 0 && ax.bc[0] == Bc::Dirichlet {
                    diag[i] += 1.0 / h2;
                }
                if pos + 1 == m && ax.bc[1] == Bc::Dirichlet {
                    diag[i] += 1.0 / h2;
                }
            }
            links.push(w);
        }
        let mut op = LatticeOperator { grid: grid.clone(), strides, diag, links, norm_bound: 0.0, lower_bound: 0.0 };
        op.refresh_bounds();
        op
    }

    fn refresh_bounds(&mut self) {
        let n = self.diag.len();
        let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
        for i in 0..n {
            let mut off = 0.0;
            for (w, &s) in self.links.iter().zip(&self.strides) {
                off += w[i].norm();
                if i >= s {
                    off += w[i - s].norm();
                }
            }
            hi = hi.max(self.diag[i].abs() + off);
            lo = lo.min(self.diag[i] - off);
        }
        self.norm_bound = hi;
        self.lower_bound = lo;
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn links(&self) -> &[Vec<C64>] {
        &self.links
    }

    /// Explicit sparse form.
    pub fn to_csr(&self) -> CsrMatrix {
        let n = self.diag.len();
        let mut t = Vec::with_capacity(n * (1 + 2 * self.links.len()));
        for i in 0..n {
            t.push((i, i, C64::new(self.diag[i], 0.0)));
            for (w, &s) in self.links.iter().zip(&self.strides) {
                if w[i] != ZERO {
                    t.push((i, i + s, w[i]));
                    t.push((i + s, i, w[i].conj()));
                }
            }
        }
        CsrMatrix::from_triplets(n, t)
    }
}

impl LinearOperator for LatticeOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.diag.len();
        const CHUNK: usize = 8192;
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, yc)| {
            let base = c * CHUNK;
            for (k, yi) in yc.iter_mut().enumerate() {
                let i = base + k;
                let mut acc = x[i] * self.diag[i];
                for (w, &s) in self.links.iter().zip(&self.strides) {
                    if i + s < n {
                        acc += w[i] * x[i + s];
                    }
                    if i >= s {
                        acc += w[i - s].conj() * x[i - s];
                    }
                }
                *yi = acc;
            }
        });
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }

    fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    fn lower_bound(&self) -> f64 {
        self.lower_bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigsolve::dense_fallback;
    use crate::grid::GridAxis;
    use crate::linalg::hermiticity_defect;

    #[test]
    fn dirichlet_box_closed_form() {
        let g = Grid::new(vec![GridAxis::new(0.0, 2.0, 9).unwrap(), GridAxis::new(0.0, 3.0, 11).unwrap()]).unwrap();
        let op = LatticeOperator::new(&g, &vec![0.0; g.len()], &[]);
        let d = dense_fallback(&op).unwrap();
        let lam = |h: f64, n: usize, j: usize| 4.0 / (h * h) * (std::f64::consts::PI * j as f64 / (2.0 * (n + 1) as f64)).sin().powi(2);
        let exact = lam(0.2, 9, 1) + lam(0.25, 11, 1);
        assert!((d.eigenvalues[0] - exact).abs() < 1e-11);
    }

    #[test]
    fn neumann_box_has_zero_mode_and_matches_csr() {
        let ax = GridAxis::new(0.0, 1.0, 6).unwrap();
        let g = Grid::new(vec![ax, ax]).unwrap().with_bc(0, [Bc::Neumann; 2]).with_bc(1, [Bc::Neumann; 2]);
        let th: Vec<f64> = (0..36).map(|i| 0.1 * (i / 6) as f64).collect();
        let op = LatticeOperator::new(&g, &vec![0.0; 36], &[Some(&th), None]);
        assert!(hermiticity_defect(&op, 20, 1) < 1e-12);
        // 1D phases along an open chain are a pure gauge: spectrum keeps its zero mode
        let d = dense_fallback(&op).unwrap();
        assert!(d.eigenvalues[0].abs() < 1e-10);
        let csr = op.to_csr();
        let x = crate::linalg::random_vector(36, 5);
        let (mut a, mut b) = (vec![ZERO; 36], vec![ZERO; 36]);
        op.apply(&x, &mut a);
        csr.apply(&x, &mut b);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() < 1e-12);
        }
    }
}
