//! Dense symmetric eigendecomposition and small matrix helpers.

use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Largest Hamiltonian dimension any constructor will accept.
pub const DIMENSION_LIMIT: usize = 20_000;

pub(crate) fn check_dimension(dim: usize) -> Result<()> {
    if dim > DIMENSION_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: DIMENSION_LIMIT,
        });
    }
    Ok(())
}

/// Eigenvalues in ascending order with the matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

/// Full eigendecomposition of a real symmetric matrix.
///
/// Only the lower triangle is read. Eigenvectors are orthonormal and their
/// sign is fixed so that the largest-magnitude component is positive.
pub fn eigh(matrix: &Mat<f64>) -> Result<Spectrum> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::EigenSolver {
            dim: n,
            max_abs: max_abs(matrix),
            reason: format!("matrix is {}x{}, not square", n, matrix.ncols()),
        });
    }
    if n == 0 {
        return Ok(Spectrum {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        });
    }
    let evd = matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigenSolver {
            dim: n,
            max_abs: max_abs(matrix),
            reason: format!("{e:?}"),
        })?;
    let s = evd.S().column_vector();
    let u = evd.U();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let values: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenSolver {
            dim: n,
            max_abs: max_abs(matrix),
            reason: "non-finite eigenvalue".into(),
        });
    }
    let mut vectors = Mat::zeros(n, n);
    let mut col = vec![0.0; n];
    for (c, &i) in order.iter().enumerate() {
        for (r, x) in col.iter_mut().enumerate() {
            *x = u[(r, i)];
        }
        fix_sign(&mut col);
        for (r, &x) in col.iter().enumerate() {
            vectors[(r, c)] = x;
        }
    }
    Ok(Spectrum { values, vectors })
}

/// Flips `v` so that its largest-magnitude component is positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        // first index wins ties so the choice is deterministic
        if x.abs() > best * (1.0 + 1e-12) {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn max_abs(m: &Mat<f64>) -> f64 {
    let mut best = 0.0f64;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            best = best.max(m[(r, c)].abs());
        }
    }
    best
}

/// `max |m - m^T|`.
pub fn symmetry_defect(m: &Mat<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for c in 0..n {
        for r in (c + 1)..n {
            worst = worst.max((m[(r, c)] - m[(c, r)]).abs());
        }
    }
    worst
}

/// Frobenius norm.
pub fn frobenius(m: &Mat<f64>) -> f64 {
    let mut acc = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            acc += m[(r, c)] * m[(r, c)];
        }
    }
    acc.sqrt()
}

pub fn commutator(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    a * b - b * a
}
