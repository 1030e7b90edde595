//! Lowest eigenpairs of Hermitian operators.
//!
//! Four routes share one request/report pair:
//!
//! * `Dense`: full decomposition, the reference answer for small problems.
//! * `Lanczos`: matrix-free, full reorthogonalization.
//! * `ShiftInvert`: Lanczos on −(Op − σ)⁻¹ with conjugate-gradient inner solves.
//! * `Lobpcg`: preconditioned block iteration for the large 3D lattices, where a
//!   Krylov basis of a few hundred vectors no longer fits in memory.
//!
//! `Auto` picks dense for tiny problems, LOBPCG when a preconditioner is supplied,
//! and Lanczos otherwise.

mod dense;
mod lanczos;
mod lobpcg;
pub mod precond;
pub mod report;
pub mod tridiag;

pub use dense::{dense_eigenvalues, dense_fallback};
pub use precond::{JacobiPreconditioner, Preconditioner, SeparablePreconditioner};
pub use report::SpectrumReport;

use crate::error::{Error, Result};
use crate::linalg::{LinearOperator, C64};
use serde::{Deserialize, Serialize};

/// Largest dimension accepted by [`dense_fallback`].
pub const DENSE_LIMIT: usize = 3000;

/// Dimension at or below which `Auto` goes dense.
pub const AUTO_DENSE_LIMIT: usize = 1200;

/// Seed for starting vectors when a request does not override it.
pub const DEFAULT_SEED: u64 = 0x5eed_1234;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Auto,
    Dense,
    Lanczos,
    ShiftInvert,
    Lobpcg,
}

/// Everything an eigensolve needs.
pub struct SolveRequest<'a> {
    pub op: &'a dyn LinearOperator,
    pub k: usize,
    /// Bound on ‖Op x − λx‖ / (|λ| + 1).
    pub tol: f64,
    /// Shift for shift-invert; `None` means just below the Gershgorin floor.
    pub shift: Option<f64>,
    pub max_iter: usize,
    pub mode: Mode,
    pub seed: u64,
    pub precond: Option<&'a dyn Preconditioner>,
    /// Initial block (LOBPCG) or starting vector (Lanczos: first entry).
    pub warm_start: Option<&'a [Vec<C64>]>,
}

impl<'a> SolveRequest<'a> {
    pub fn new(op: &'a dyn LinearOperator, k: usize) -> Self {
        SolveRequest {
            op,
            k,
            tol: 1e-8,
            shift: None,
            max_iter: 3000,
            mode: Mode::Auto,
            seed: DEFAULT_SEED,
            precond: None,
            warm_start: None,
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn shift(mut self, sigma: f64) -> Self {
        self.shift = Some(sigma);
        self
    }

    pub fn max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn precond(mut self, p: &'a dyn Preconditioner) -> Self {
        self.precond = Some(p);
        self
    }

    pub fn warm_start(mut self, v: &'a [Vec<C64>]) -> Self {
        self.warm_start = Some(v);
        self
    }
}

/// Computes the `k` lowest eigenpairs.
pub fn lowest_eigs(req: &SolveRequest<'_>) -> Result<SpectrumReport> {
    if req.k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if !(req.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let n = req.op.dim();
    if req.k > n {
        return Err(Error::InvalidInput(format!("k = {} exceeds dimension {n}", req.k)));
    }
    let mode = match req.mode {
        Mode::Auto if n <= AUTO_DENSE_LIMIT => Mode::Dense,
        Mode::Auto if req.precond.is_some() => Mode::Lobpcg,
        Mode::Auto => Mode::Lanczos,
        m => m,
    };
    let mut rep = match mode {
        Mode::Dense => {
            let mut r = dense_fallback(req.op)?;
            r.truncate(req.k);
            r
        }
        Mode::Lanczos => lanczos::lanczos(req)?,
        Mode::ShiftInvert => lanczos::shift_invert(req)?,
        Mode::Lobpcg => lobpcg::lobpcg(req)?,
        Mode::Auto => unreachable!(),
    };
    rep.seed = req.seed;
    rep.finalize(req.op);
    Ok(rep)
}
