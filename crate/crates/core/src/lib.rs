//! Spectral laboratory for magnetic Schrödinger operators H = (i∇ + A)² − Ṽ whose
//! potential lives in a locally deformed tube around the x₃-axis.
//!
//! Layers, bottom up:
//!
//! * [`geometry`]: curves, Frenet frames, the tube map and its inverse.
//! * [`fields`]: compactly supported divergence-free fields and their two
//!   one-sided gauges.
//! * [`operators`]: Peierls lattice discretizations of the 2D threshold operator,
//!   the disk Neumann operator, the 3D Hamiltonian, and bracketing pieces.
//! * [`eigsolve`]: lowest eigenpairs (dense, Lanczos, shift-invert, LOBPCG).
//! * [`experiments`]: drivers for the threshold, quasi-mode, sweep, and slope
//!   studies.
//! * [`scenario`] and [`runner`]: configuration files and the batch runner.

pub mod eigsolve;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod operators;
pub mod potential;
pub mod quadrature;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};
