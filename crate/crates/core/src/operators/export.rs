//! Sparse triplet text format for external validation.
//!
//! One header line `# n <dimension> nnz <count>`, then one `row col re im` line
//! per stored entry, zero-based, rows ascending.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, C64};
use std::io::{BufRead, Write};

pub fn write_triplets<W: Write>(a: &CsrMatrix, mut w: W) -> Result<()> {
    writeln!(w, "# n {} nnz {}", a.n, a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{i} {j} {:e} {:e}", v.re, v.im)?;
    }
    Ok(())
}

pub fn read_triplets<R: BufRead>(r: R) -> Result<CsrMatrix> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::InvalidInput("empty triplet file".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 5 || parts[0] != "#" || parts[1] != "n" {
        return Err(Error::InvalidInput(format!("bad triplet header: {header}")));
    }
    let n: usize = parts[2].parse().map_err(|_| Error::InvalidInput("bad dimension".into()))?;
    let mut t = Vec::new();
    for line in lines {
        let line = line?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(Error::InvalidInput(format!("bad triplet line: {line}")));
        }
        let bad = |_| Error::InvalidInput(format!("bad triplet line: {line}"));
        let i: usize = f[0].parse().map_err(|_| Error::InvalidInput(format!("bad row: {line}")))?;
        let j: usize = f[1].parse().map_err(|_| Error::InvalidInput(format!("bad column: {line}")))?;
        let re: f64 = f[2].parse().map_err(bad)?;
        let im: f64 = f[3].parse().map_err(bad)?;
        t.push((i, j, C64::new(re, im)));
    }
    Ok(CsrMatrix::from_triplets(n, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let a = CsrMatrix::from_triplets(
            3,
            vec![(0, 0, C64::new(2.0, 0.0)), (0, 2, C64::new(0.5, -0.25)), (2, 0, C64::new(0.5, 0.25)), (1, 1, C64::new(1.0, 0.0))],
        );
        let mut buf = Vec::new();
        write_triplets(&a, &mut buf).unwrap();
        let b = read_triplets(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.indices, b.indices);
    }
}
