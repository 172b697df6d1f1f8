//! Dense complex linear algebra kernel.
//!
//! Everything downstream reduces to three primitives: the Hermitian
//! "imaginary part" of a square matrix, positive-semidefiniteness margins
//! read off a Hermitian eigendecomposition, and principal inverse square
//! roots of strictly positive matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from a row-major slice of entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(CoreError::DimensionMismatch {
                context: format!(
                    "expected {} entries for a {}x{} matrix, got {}",
                    rows * cols,
                    rows,
                    cols,
                    entries.len()
                ),
            });
        }
        Self::validated(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix entrywise from a closure.
    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(
        rows: usize,
        cols: usize,
        f: F,
    ) -> Result<Self> {
        Self::validated(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<Complex64>]) -> Result<Self> {
        for (j, col) in cols.iter().enumerate() {
            if col.len() != rows {
                return Err(CoreError::DimensionMismatch {
                    context: format!("column {} has length {}, expected {}", j, col.len(), rows),
                });
            }
        }
        Self::validated(DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i]))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix {
            inner: DMatrix::identity(n, n),
        }
    }

    fn validated(m: DMatrix<Complex64>) -> Result<Self> {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(CoreError::NonFiniteEntry { row: i, col: j });
                }
            }
        }
        Ok(ComplexMatrix { inner: m })
    }

    pub(crate) fn inner(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.inner.column(j).iter().cloned().collect()
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix {
            inner: self.inner.adjoint(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols(),
            rhs.rows(),
            "matrix product dimension mismatch: {}x{} * {}x{}",
            self.rows(),
            self.cols(),
            rhs.rows(),
            rhs.cols()
        );
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols(), v.len(), "matrix-vector dimension mismatch");
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.inner * x).iter().cloned().collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexMatrix {
            inner: &self.inner * c,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0_f64, f64::max)
    }

    /// Frobenius norm of `A - A*`.
    pub fn hermitian_deviation(&self) -> f64 {
        (&self.inner - self.inner.adjoint()).norm()
    }

    /// Copies a contiguous block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, nrows: usize, ncols: usize) -> Self {
        ComplexMatrix {
            inner: self.inner.view((row, col), (nrows, ncols)).into_owned(),
        }
    }

    /// Concatenates columns: `[self | rhs]`.
    pub fn hstack(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows(), rhs.rows(), "hstack row mismatch");
        let mut m = DMatrix::zeros(self.rows(), self.cols() + rhs.cols());
        m.view_mut((0, 0), (self.rows(), self.cols()))
            .copy_from(&self.inner);
        m.view_mut((0, self.cols()), (rhs.rows(), rhs.cols()))
            .copy_from(&rhs.inner);
        ComplexMatrix { inner: m }
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
    hermitian_deviation: f64,
}

impl HermitianDecomposition {
    /// Decomposes `h`, which must be Hermitian up to [`HERMITIAN_TOL`] relative
    /// to its norm. The input is symmetrized before decomposition and the
    /// deviation is recorded on the result.
    pub fn of(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(CoreError::NonSquare {
                rows: h.rows(),
                cols: h.cols(),
            });
        }
        let scale = h.frobenius_norm().max(1.0);
        let deviation = h.hermitian_deviation();
        if deviation > HERMITIAN_TOL * scale {
            return Err(CoreError::NotHermitian {
                deviation: deviation / scale,
                tol: HERMITIAN_TOL,
            });
        }
        let sym = (&h.inner + h.inner.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        let n = h.rows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(HermitianDecomposition {
            eigenvalues,
            eigenvectors: ComplexMatrix { inner: vectors },
            hermitian_deviation: deviation,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Deviation `||H - H*||_F` of the original input, reported rather than
    /// silently discarded.
    pub fn hermitian_deviation(&self) -> f64 {
        self.hermitian_deviation
    }

    /// Applies a real function to the spectrum: `U diag(f(lambda)) U*`.
    pub fn spectral_map<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let diag = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(f(self.eigenvalues[i]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let u = &self.eigenvectors.inner;
        ComplexMatrix {
            inner: u * diag * u.adjoint(),
        }
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.spectral_map(|x| x)
    }
}

/// Hermitian matrix realizing `f -> Im<f, Bf>`, namely `(B - B*) / (2i)`.
pub fn imaginary_part(b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !b.is_square() {
        return Err(CoreError::NonSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    let two_i = Complex64::new(0.0, 2.0);
    let m = (&b.inner - b.inner.adjoint()) / two_i;
    Ok(ComplexMatrix { inner: m })
}

/// Minimum eigenvalue of a Hermitian matrix; callers interpret
/// `>= -tol` as positive semidefinite.
pub fn psd_margin(h: &ComplexMatrix) -> Result<f64> {
    Ok(HermitianDecomposition::of(h)?.min_eigenvalue())
}

/// Principal inverse square root of a Hermitian matrix whose spectrum lies
/// at or above `epsilon`. The floor must be strictly positive: the
/// construction is meaningless on a merely semidefinite matrix.
pub fn inv_sqrt_pd(h: &ComplexMatrix, epsilon: f64) -> Result<ComplexMatrix> {
    let dec = HermitianDecomposition::of(h)?;
    let min = dec.min_eigenvalue();
    if epsilon.is_nan() || epsilon <= 0.0 || min < epsilon {
        return Err(CoreError::StrictPositivityViolated {
            min_eigenvalue: min,
            epsilon,
        });
    }
    Ok(dec.spectral_map(|x| 1.0 / x.sqrt()))
}

/// Modified Gram-Schmidt orthonormalization of `raw` columns, optionally
/// projecting off the column span of `against` first.
///
/// Returns `(q, r)` with `raw_projected = q * r`, `q` having orthonormal
/// columns orthogonal to `against`, and `r` upper triangular. Rank loss
/// (a column falling inside the span built so far) is an error.
pub fn orthonormalize(
    raw: &ComplexMatrix,
    against: Option<&ComplexMatrix>,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = raw.rows();
    let k = raw.cols();
    if k == 0 {
        return Err(CoreError::EmptyExtension);
    }
    let mut work: Vec<nalgebra::DVector<Complex64>> = (0..k)
        .map(|j| nalgebra::DVector::from_iterator(n, raw.inner.column(j).iter().cloned()))
        .collect();
    let input_scale = raw.frobenius_norm().max(1.0);
    if let Some(d) = against {
        assert_eq!(d.rows(), n, "projection basis row mismatch");
        for w in work.iter_mut() {
            let coeffs = d.inner.adjoint() * &*w;
            *w -= &d.inner * coeffs;
        }
    }
    let mut q_cols: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(k);
    let mut r = DMatrix::<Complex64>::zeros(k, k);
    for j in 0..k {
        let mut v = work[j].clone();
        for (i, q) in q_cols.iter().enumerate() {
            let c: Complex64 = (q.adjoint() * &v)[(0, 0)];
            r[(i, j)] = c;
            v -= q * c;
        }
        // re-orthogonalize once for numerical safety
        for (i, q) in q_cols.iter().enumerate() {
            let c: Complex64 = (q.adjoint() * &v)[(0, 0)];
            r[(i, j)] += c;
            v -= q * c;
        }
        let norm = v.norm();
        if norm <= 1e-10 * input_scale {
            return Err(CoreError::DegenerateComplement { column: j });
        }
        r[(j, j)] = Complex64::new(norm, 0.0);
        q_cols.push(v / Complex64::new(norm, 0.0));
    }
    let q = DMatrix::from_fn(n, k, |i, j| q_cols[j][i]);
    Ok((ComplexMatrix { inner: q }, ComplexMatrix { inner: r }))
}

/// Solves `X R = B` for upper triangular invertible `R` (i.e. `X = B R^{-1}`).
pub fn solve_upper_triangular_right(b: &ComplexMatrix, r: &ComplexMatrix) -> ComplexMatrix {
    let k = r.rows();
    assert!(
        r.is_square() && b.cols() == k,
        "triangular solve shape mismatch"
    );
    let m = b.rows();
    let mut x = DMatrix::<Complex64>::zeros(m, k);
    for j in 0..k {
        for i in 0..m {
            let mut acc = b.inner[(i, j)];
            for l in 0..j {
                acc -= x[(i, l)] * r.inner[(l, j)];
            }
            x[(i, j)] = acc / r.inner[(j, j)];
        }
    }
    ComplexMatrix { inner: x }
}
