use super::{SpectrumReport, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::linalg::{LinearOperator, C64, ZERO};
use nalgebra::DMatrix;

/// Materializes the operator column by column through `apply`, symmetrized so
/// the decomposition sees an exactly Hermitian input.
fn materialize(op: &dyn LinearOperator) -> Result<DMatrix<C64>> {
    let n = op.dim();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge(n, DENSE_LIMIT));
    }
    let mut m = DMatrix::from_element(n, n, ZERO);
    let mut e = vec![ZERO; n];
    let mut col = vec![ZERO; n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        e[j] = ZERO;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    Ok((&m + m.adjoint()) * C64::new(0.5, 0.0))
}

/// Full spectrum and eigenvectors by direct Hermitian decomposition.
pub fn dense_fallback(op: &dyn LinearOperator) -> Result<SpectrumReport> {
    let n = op.dim();
    let eig = materialize(op)?.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut rep = SpectrumReport::new("dense", n);
    for &i in &order {
        rep.eigenvalues.push(eig.eigenvalues[i]);
        rep.vectors.push(eig.eigenvectors.column(i).iter().copied().collect());
    }
    rep.residuals = vec![0.0; n];
    Ok(rep)
}

/// Sorted eigenvalues only; several times cheaper than [`dense_fallback`].
pub fn dense_eigenvalues(op: &dyn LinearOperator) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = materialize(op)?.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigsolve::{lowest_eigs, Mode, SolveRequest};
    use crate::linalg::{CsrMatrix, DenseOperator};

    #[test]
    fn pauli_type() {
        let i = C64::new(0.0, 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[ZERO, i, -i, ZERO]);
        let r = dense_fallback(&DenseOperator(m)).unwrap();
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_sorted() {
        let d = [3.0, -1.0, 2.5, 0.0];
        let m = CsrMatrix::from_triplets(4, d.iter().enumerate().map(|(i, &v)| (i, i, C64::new(v, 0.0))).collect());
        let r = dense_fallback(&m).unwrap();
        assert_eq!(r.eigenvalues, vec![-1.0, 0.0, 2.5, 3.0]);
    }

    #[test]
    fn refuses_large() {
        let n = DENSE_LIMIT + 1;
        let m = CsrMatrix::from_triplets(n, (0..n).map(|i| (i, i, C64::new(1.0, 0.0))).collect());
        assert!(matches!(dense_fallback(&m), Err(Error::TooLarge(..))));
        assert!(lowest_eigs(&SolveRequest::new(&m, 1).mode(Mode::Dense)).is_err());
    }
}
