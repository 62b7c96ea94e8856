//! Small dense-linear-algebra toolbox on top of nalgebra.
//!
//! Everything here works on `DMatrix<f64>` / `DVector<f64>`. Rank decisions
//! are always made relative to the largest singular value, so callers pass
//! *relative* tolerances. Eigenvalues of symmetric matrices are returned in
//! ascending order together with the matching eigenvector columns.

use nalgebra::{DMatrix, DVector};

/// Eigendecomposition of a (numerically) symmetric matrix.
///
/// The input is symmetrized as `(m + m^T)/2` before factorization to wash out
/// round-off asymmetry. Returns `(values, vectors)` with `values` ascending and
/// `vectors.column(i)` the unit eigenvector for `values[i]`.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "sym_eigen needs a square matrix");
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(n, n);
    for (i, &j) in order.iter().enumerate() {
        vectors.set_column(i, &eig.eigenvectors.column(j));
    }
    (values, vectors)
}

/// Applies `f` to the spectrum of a symmetric matrix: `V f(diag) V^T`.
pub fn sym_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    sym_apply_eigen(values.as_slice(), &vectors, f)
}

/// Same as [`sym_apply`] for an already-computed eigendecomposition.
pub fn sym_apply_eigen(
    values: &[f64],
    vectors: &DMatrix<f64>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<f64> {
    let scaled = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
        vectors[(i, j)] * f(values[j])
    });
    &scaled * vectors.transpose()
}

/// Largest singular value (operator norm). Zero for empty matrices.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Two-norm condition number; `f64::INFINITY` when numerically singular.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Orthonormal basis of the column span, keeping singular directions with
/// `sigma > tol_rel * sigma_max`. Returns an `n x r` matrix with orthonormal
/// columns (possibly zero columns for a zero input).
pub fn orthonormal_span(m: &DMatrix<f64>, tol_rel: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd with compute_u");
    let sv = &svd.singular_values;
    let cutoff = tol_rel * sv.max();
    let r = sv.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    u.columns(0, r).into_owned()
}

/// Orthonormal basis of the kernel `{x : m x = 0}`, with the same relative
/// singular-value threshold as [`orthonormal_span`].
pub fn orthonormal_kernel(m: &DMatrix<f64>, tol_rel: f64) -> DMatrix<f64> {
    let ncols = m.ncols();
    if ncols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(ncols, ncols);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd with compute_v");
    let sv = &svd.singular_values;
    let cutoff = tol_rel * sv.max();
    // v_t has min(nrows, ncols) rows; directions beyond them are exact kernel.
    let mut kernel_cols: Vec<DVector<f64>> = Vec::new();
    for i in 0..sv.len() {
        if sv[i] <= cutoff {
            kernel_cols.push(v_t.row(i).transpose());
        }
    }
    if ncols > sv.len() {
        // Complete v_t's row space to find the untouched directions.
        let vt_full = orthonormal_complement(&v_t.transpose(), 1e-13);
        for c in 0..vt_full.ncols() {
            kernel_cols.push(vt_full.column(c).into_owned());
        }
    }
    let mut out = DMatrix::zeros(ncols, kernel_cols.len());
    for (i, c) in kernel_cols.iter().enumerate() {
        out.set_column(i, c);
    }
    // Re-orthonormalize: the branches above are individually orthonormal but
    // not necessarily jointly so.
    orthonormal_span(&out, 1e-13)
}

/// Rank with a relative singular-value threshold.
pub fn rank(m: &DMatrix<f64>, tol_rel: f64) -> usize {
    orthonormal_span(m, tol_rel).ncols()
}

/// Orthogonal projector `B B^T` onto the span of an orthonormal-column basis.
pub fn projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    if basis.ncols() == 0 {
        return DMatrix::zeros(basis.nrows(), basis.nrows());
    }
    basis * basis.transpose()
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` inside the
/// full ambient space. `basis` need not be orthonormal.
pub fn orthonormal_complement(basis: &DMatrix<f64>, tol_rel: f64) -> DMatrix<f64> {
    let n = basis.nrows();
    let on = orthonormal_span(basis, tol_rel);
    let p = DMatrix::identity(n, n) - projector(&on);
    // Eigenvectors of the complement projector with eigenvalue near 1.
    let (values, vectors) = sym_eigen(&p);
    let mut cols: Vec<usize> = (0..n).filter(|&i| values[i] > 0.5).collect();
    cols.sort_unstable();
    let mut out = DMatrix::zeros(n, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        out.set_column(k, &vectors.column(i));
    }
    out
}

/// Orthonormal basis of the intersection of two spans via projector algebra: the
/// intersection is the eigenspace of `P_a + P_b` at eigenvalue 2.
pub fn intersect_spans(a: &DMatrix<f64>, b: &DMatrix<f64>, tol_rel: f64) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, b.nrows(), "intersect_spans: ambient dims differ");
    let pa = projector(&orthonormal_span(a, tol_rel));
    let pb = projector(&orthonormal_span(b, tol_rel));
    let sum = &pa + &pb;
    let (values, vectors) = sym_eigen(&sum);
    // Eigenvalues live in [0, 2]; only exact intersections reach 2. The gap
    // scales with the squared principal angle, so take a generous threshold
    // derived from the rank tolerance.
    let cut = 2.0 - (tol_rel.sqrt()).max(1e-9);
    let cols: Vec<usize> = (0..n).filter(|&i| values[i] > cut).collect();
    let mut out = DMatrix::zeros(n, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        out.set_column(k, &vectors.column(i));
    }
    out
}

/// Symmetric positive-definite inverse square root via the spectrum.
/// Panics if an eigenvalue is non-positive: callers validate first.
pub fn spd_inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(m, |l| {
        assert!(l > 0.0, "spd_inv_sqrt: non-positive eigenvalue {l}");
        1.0 / l.sqrt()
    })
}

/// Frobenius distance between two matrices, convenient for invariant checks.
pub fn dist(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm()
}
