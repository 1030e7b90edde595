//! Complex vector helpers, a compressed sparse row matrix, and the operator trait
//! every eigensolver consumes.
//!
//! Reductions (dot products, norms) are deliberately serial so that results are
//! bit-identical regardless of the thread count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Anything that can act on complex vectors as a Hermitian matrix.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// y = Op x. `y` is overwritten.
    fn apply(&self, x: &[C64], y: &mut [C64]);

    /// Real diagonal, used for Jacobi scaling and shift estimates.
    fn diagonal(&self) -> Vec<f64>;

    /// Upper bound on the spectral radius (Gershgorin is fine).
    fn norm_bound(&self) -> f64;

    /// Lower bound on the spectrum.
    fn lower_bound(&self) -> f64 {
        -self.norm_bound()
    }
}

/// Conjugate-linear in the first argument.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    let mut s = ZERO;
    for (a, b) in x.iter().zip(y) {
        s += a.conj() * b;
    }
    s
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// y += a x
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale(a: f64, x: &mut [C64]) {
    for v in x.iter_mut() {
        *v *= a;
    }
}

/// Normalizes in place and returns the previous norm.
pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale(1.0 / n, x);
    }
    n
}

/// Deterministic complex vector with entries uniform in the unit square.
pub fn random_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Relative residual ‖Op x − λ x‖ / (|λ| + 1) for a normalized x.
pub fn relative_residual<O: LinearOperator + ?Sized>(op: &O, x: &[C64], lambda: f64) -> f64 {
    let mut y = vec![ZERO; x.len()];
    op.apply(x, &mut y);
    let mut r = 0.0;
    for (yi, xi) in y.iter().zip(x) {
        r += (yi - lambda * xi).norm_sqr();
    }
    r.sqrt() / (norm(x) * (lambda.abs() + 1.0))
}

/// Rayleigh quotient ⟨x, Op x⟩ / ⟨x, x⟩.
pub fn rayleigh<O: LinearOperator + ?Sized>(op: &O, x: &[C64]) -> f64 {
    let mut y = vec![ZERO; x.len()];
    op.apply(x, &mut y);
    dot(x, &y).re / dot(x, x).re
}

/// Largest relative defect |⟨x, Op y⟩ − conj⟨y, Op x⟩| over `pairs` random pairs.
pub fn hermiticity_defect<O: LinearOperator + ?Sized>(op: &O, pairs: usize, seed: u64) -> f64 {
    let n = op.dim();
    let mut worst = 0.0f64;
    let mut ax = vec![ZERO; n];
    let mut ay = vec![ZERO; n];
    for p in 0..pairs as u64 {
        let x = random_vector(n, seed.wrapping_add(2 * p));
        let y = random_vector(n, seed.wrapping_add(2 * p + 1));
        op.apply(&x, &mut ax);
        op.apply(&y, &mut ay);
        let lhs = dot(&x, &ay);
        let rhs = dot(&y, &ax).conj();
        let scale = norm(&x) * norm(&ay) + norm(&y) * norm(&ax);
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    worst
}

/// Compressed sparse row storage with complex entries.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds from unsorted triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, C64)>) -> Self {
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            assert!(r < n && c < n, "triplet ({r},{c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { n, indptr, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.n, self.n, ZERO);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut trip = Vec::new();
        for r in 0..n {
            for c in 0..n {
                if m[(r, c)] != ZERO {
                    trip.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(n, trip)
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.par_chunks_mut(4096).enumerate().for_each(|(chunk, ys)| {
            let r0 = chunk * 4096;
            for (k, yr) in ys.iter_mut().enumerate() {
                let r = r0 + k;
                let mut s = ZERO;
                for p in self.indptr[r]..self.indptr[r + 1] {
                    s += self.values[p] * x[self.indices[p]];
                }
                *yr = s;
            }
        });
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (r, c, v) in self.triplets() {
            if r == c {
                d[r] += v.re;
            }
        }
        d
    }

    fn norm_bound(&self) -> f64 {
        (0..self.n)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|p| self.values[p].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn lower_bound(&self) -> f64 {
        (0..self.n)
            .map(|r| {
                let mut d = 0.0;
                let mut off = 0.0;
                for p in self.indptr[r]..self.indptr[r + 1] {
                    if self.indices[p] == r {
                        d += self.values[p].re;
                    } else {
                        off += self.values[p].norm();
                    }
                }
                d - off
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Dense Hermitian matrix wrapper, handy in tests.
pub struct DenseOperator(pub DMatrix<C64>);

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        for r in 0..n {
            let mut s = ZERO;
            for c in 0..n {
                s += self.0[(r, c)] * x[c];
            }
            y[r] = s;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    fn norm_bound(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|r| (0..n).map(|c| self.0[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Shifted view Op − σ, used by shift-invert.
pub struct Shifted<'a, O: LinearOperator + ?Sized> {
    pub op: &'a O,
    pub sigma: f64,
}

impl<O: LinearOperator + ?Sized> LinearOperator for Shifted<'_, O> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.op.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi -= self.sigma * xi;
        }
    }
    fn diagonal(&self) -> Vec<f64> {
        self.op.diagonal().into_iter().map(|d| d - self.sigma).collect()
    }
    fn norm_bound(&self) -> f64 {
        self.op.norm_bound() + self.sigma.abs()
    }
    fn lower_bound(&self) -> f64 {
        self.op.lower_bound() - self.sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(
            2,
            vec![(0, 0, ONE), (1, 0, ONE), (0, 0, ONE), (0, 1, C64::new(0.0, 1.0))],
        );
        assert_eq!(m.nnz(), 3);
        let d = m.to_dense();
        assert_eq!(d[(0, 0)], C64::new(2.0, 0.0));
        assert_eq!(d[(0, 1)], C64::new(0.0, 1.0));
    }

    #[test]
    fn hermitian_matrix_passes_defect_check() {
        let m = CsrMatrix::from_triplets(
            2,
            vec![(0, 1, C64::new(0.0, 1.0)), (1, 0, C64::new(0.0, -1.0)), (0, 0, ONE)],
        );
        assert!(hermiticity_defect(&m, 10, 1) < 1e-14);
        let bad = CsrMatrix::from_triplets(2, vec![(0, 1, ONE)]);
        assert!(hermiticity_defect(&bad, 10, 1) > 1e-3);
    }

    #[test]
    fn random_vector_is_deterministic() {
        assert_eq!(random_vector(16, 7), random_vector(16, 7));
        assert_ne!(random_vector(16, 7), random_vector(16, 8));
    }
}
