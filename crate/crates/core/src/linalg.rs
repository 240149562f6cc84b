//! Small dense linear-algebra helpers shared by every module.

use ndarray::{Array1, Array2, ArrayView2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn dagger(a: &ArrayView2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn max_abs(a: &ArrayView2<C64>) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// `max |A - B|` over entries.
pub fn max_abs_diff(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

pub fn hermiticity_defect(a: &ArrayView2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag(&Array1::from_elem(n, C64::new(1.0, 0.0)))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &ArrayView2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigh on a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    // LAPACK gets column-major storage.
    let mut work = Array2::zeros(a.raw_dim().f());
    work.assign(a);
    let (values, vectors) = work
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Eigensolver(e.to_string()))?;
    Ok((values.to_vec(), vectors))
}

/// Diagonal of `A B` without forming the product.
pub fn diag_of_product(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Vec<C64> {
    let n = a.nrows();
    (0..n)
        .map(|i| {
            a.row(i)
                .iter()
                .zip(b.column(i).iter())
                .map(|(x, y)| x * y)
                .sum()
        })
        .collect()
}

/// Diagonal of `[A, B]`.
pub fn diag_of_commutator(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Vec<C64> {
    let ab = diag_of_product(a, b);
    let ba = diag_of_product(b, a);
    ab.into_iter().zip(ba).map(|(x, y)| x - y).collect()
}

/// `D A` for a real diagonal `D`.
pub fn scale_rows(diag: &[f64], a: &ArrayView2<C64>) -> Array2<C64> {
    let mut out = a.to_owned();
    for (mut row, &d) in out.axis_iter_mut(Axis(0)).zip(diag) {
        row.mapv_inplace(|z| z * d);
    }
    out
}

/// `A D` for a real diagonal `D`.
pub fn scale_cols(a: &ArrayView2<C64>, diag: &[f64]) -> Array2<C64> {
    let mut out = a.to_owned();
    for (mut col, &d) in out.axis_iter_mut(Axis(1)).zip(diag) {
        col.mapv_inplace(|z| z * d);
    }
    out
}

/// `[D, A]` for a real diagonal `D`: entries `(d_i - d_j) a_ij`.
pub fn diagonal_commutator(diag: &[f64], a: &ArrayView2<C64>) -> Array2<C64> {
    Array2::from_shape_fn(a.dim(), |(i, j)| a[[i, j]] * (diag[i] - diag[j]))
}

/// `V^dagger D V` for a real diagonal `D` and a frame `V` (n x r).
pub fn compress_diagonal(frame: &ArrayView2<C64>, diag: &[f64]) -> Array2<C64> {
    let scaled = scale_rows(diag, frame);
    dagger(frame).dot(&scaled)
}

/// Largest singular value of a Hermitian matrix.
pub fn spectral_norm_hermitian(a: &ArrayView2<C64>) -> Result<f64> {
    let (values, _) = eigh(a)?;
    Ok(values.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// `f(A)` for Hermitian `A` via its spectral decomposition.
pub fn hermitian_function(a: &ArrayView2<C64>, f: impl Fn(f64) -> f64) -> Result<Array2<C64>> {
    let (values, vectors) = eigh(a)?;
    let mapped: Vec<f64> = values.iter().map(|&v| f(v)).collect();
    let scaled = scale_cols(&vectors.view(), &mapped);
    Ok(scaled.dot(&dagger(&vectors.view())))
}

/// Projector `V V^dagger` onto the span of orthonormal columns.
pub fn frame_projector(frame: &ArrayView2<C64>) -> Array2<C64> {
    frame.dot(&dagger(frame))
}
