//! Solver output and its on-disk forms.
//!
//! JSON carries everything except the vectors. Vectors go to a binary sidecar:
//! little-endian `u64 n`, `u64 k`, then `k` blocks of `n` (re, im) `f64` pairs.

use crate::error::{Error, Result};
use crate::linalg::{dot, relative_residual, LinearOperator, C64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// ‖Op x − λx‖ / (|λ| + 1), recomputed after convergence.
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<Vec<C64>>,
    pub iterations: usize,
    pub mode: String,
    pub seed: u64,
    pub dimension: usize,
    /// Discretization details echoed from the operator (grid, gauge, ...).
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl SpectrumReport {
    pub fn new(mode: &str, dimension: usize) -> Self {
        SpectrumReport {
            eigenvalues: Vec::new(),
            residuals: Vec::new(),
            vectors: Vec::new(),
            iterations: 0,
            mode: mode.to_string(),
            seed: 0,
            dimension,
            metadata: BTreeMap::new(),
        }
    }

    pub fn truncate(&mut self, k: usize) {
        self.eigenvalues.truncate(k);
        self.residuals.truncate(k);
        self.vectors.truncate(k);
    }

    /// Sorts pairs ascending and recomputes residuals from scratch.
    pub(crate) fn finalize(&mut self, op: &dyn LinearOperator) {
        let mut idx: Vec<usize> = (0..self.eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| self.eigenvalues[a].partial_cmp(&self.eigenvalues[b]).unwrap());
        self.eigenvalues = idx.iter().map(|&i| self.eigenvalues[i]).collect();
        if !self.vectors.is_empty() {
            let mut v: Vec<Vec<C64>> = idx.iter().map(|&i| std::mem::take(&mut self.vectors[i])).collect();
            std::mem::swap(&mut v, &mut self.vectors);
            self.residuals = self
                .vectors
                .iter()
                .zip(&self.eigenvalues)
                .map(|(x, &l)| relative_residual(op, x, l))
                .collect();
        }
    }

    /// max |⟨x_i, x_j⟩ − δ_ij| over returned vectors.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.vectors.len() {
            for j in 0..=i {
                let d = dot(&self.vectors[i], &self.vectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).norm());
            }
        }
        worst
    }

    pub fn lowest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(self)?;
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&s)?)
    }

    pub fn write_vectors(&self, path: &Path) -> Result<()> {
        write_vectors(path, &self.vectors)
    }
}

pub fn write_vectors(path: &Path, vectors: &[Vec<C64>]) -> Result<()> {
    let n = vectors.first().map_or(0, |v| v.len());
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidInput("vectors of unequal length".into()));
    }
    let mut buf = Vec::with_capacity(16 + vectors.len() * n * 16);
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&(vectors.len() as u64).to_le_bytes());
    for v in vectors {
        for z in v {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_vectors(path: &Path) -> Result<Vec<Vec<C64>>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 16 {
        return Err(Error::InvalidInput("vector sidecar shorter than its header".into()));
    }
    let word = |i: usize| u64::from_le_bytes(buf[i..i + 8].try_into().unwrap());
    let (n, k) = (word(0) as usize, word(8) as usize);
    if buf.len() != 16 + n * k * 16 {
        return Err(Error::InvalidInput(format!(
            "vector sidecar has {} bytes, header promises {}",
            buf.len(),
            16 + n * k * 16
        )));
    }
    let f = |i: usize| f64::from_le_bytes(buf[i..i + 8].try_into().unwrap());
    Ok((0..k)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let o = 16 + (j * n + i) * 16;
                    C64::new(f(o), f(o + 8))
                })
                .collect()
        })
        .collect())
}
