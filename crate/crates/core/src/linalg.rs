//! Small dense helpers on top of nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

/// Singular values (descending) and the full right singular basis of `a`.
///
/// Columns of the returned `v` are ordered to match the singular values;
/// the trailing `cols - rows` columns of a wide matrix belong to zero singular
/// values.
pub fn svd_right(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(cols, order.len(), |r, c| v_t[(order[c], r)]);
    (values, v)
}

fn numerical_rank(values: &[f64], rel_tol: f64) -> usize {
    let top = values.first().copied().unwrap_or(0.0);
    if top <= f64::MIN_POSITIVE {
        return 0;
    }
    values.iter().filter(|&&s| s > rel_tol * top).count()
}

pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let (values, _) = svd_right(a);
    numerical_rank(&values, rel_tol)
}

/// Orthonormal basis (as columns) of `{x : a x = 0}`.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let cols = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    let (values, v) = svd_right(a);
    let r = numerical_rank(&values, rel_tol);
    v.columns(r, cols - r).into_owned()
}

/// Orthonormal basis of the column space of `a`.
pub fn column_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let (_, v) = svd_right(&a.transpose());
    let r = rank(a, rel_tol);
    v.columns(0, r).into_owned()
}

/// Columns scaled to unit length; zero columns are left alone.
pub fn normalize_columns(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = a.clone();
    for mut c in out.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c /= n;
        }
    }
    out
}

pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn from_columns(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols.len(), |r, c| cols[c][r])
}
