//! Forms frozen at a point.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::MultiIndex;
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct NumForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<(MultiIndex, f64)>,
}

impl NumForm {
    pub fn new(dim: usize, degree: usize, coeffs: Vec<(MultiIndex, f64)>) -> Self {
        Self {
            dim,
            degree,
            coeffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[(MultiIndex, f64)] {
        &self.coeffs
    }

    pub fn coeff(&self, idx: MultiIndex) -> f64 {
        self.coeffs
            .iter()
            .find(|(i, _)| *i == idx)
            .map_or(0.0, |(_, c)| *c)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    /// Components of a 1-form as a dense vector.
    pub fn as_covector(&self) -> Vec<f64> {
        assert_eq!(self.degree, 1, "as_covector on a {}-form", self.degree);
        let mut out = vec![0.0; self.dim];
        for (idx, c) in &self.coeffs {
            out[idx.indices()[0]] = *c;
        }
        out
    }

    pub fn evaluate(&self, vectors: &[Vec<f64>]) -> f64 {
        debug_assert_eq!(vectors.len(), self.degree);
        self.coeffs
            .iter()
            .map(|(idx, c)| {
                let rows = idx.indices();
                let k = rows.len();
                if k == 0 {
                    return *c;
                }
                let m = DMatrix::from_fn(k, k, |r, col| vectors[col][rows[r]]);
                c * m.determinant()
            })
            .sum()
    }

    pub fn interior(&self, v: &[f64]) -> NumForm {
        assert!(self.degree > 0, "interior product of a 0-form");
        let mut acc: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (idx, c) in &self.coeffs {
            for (pos, i) in idx.indices().into_iter().enumerate() {
                if v[i] == 0.0 {
                    continue;
                }
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                *acc.entry(idx.without(i)).or_insert(0.0) += sign * v[i] * c;
            }
        }
        NumForm::new(self.dim, self.degree - 1, acc.into_iter().collect())
    }

    /// Matrix of `v -> i_v w`, one row per `(k-1)`-index that can occur.
    pub fn contraction_matrix(&self) -> DMatrix<f64> {
        let mut rows: BTreeMap<MultiIndex, usize> = BTreeMap::new();
        for (idx, _) in &self.coeffs {
            for i in idx.indices() {
                let next = rows.len();
                rows.entry(idx.without(i)).or_insert(next);
            }
        }
        let mut m = DMatrix::zeros(rows.len(), self.dim);
        for (idx, c) in &self.coeffs {
            for (pos, i) in idx.indices().into_iter().enumerate() {
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                m[(rows[&idx.without(i)], i)] += sign * c;
            }
        }
        m
    }

    /// Orthonormal basis of `{v : i_v w = 0}` as matrix columns.
    pub fn kernel(&self, rel_tol: f64) -> DMatrix<f64> {
        if self.degree == 0 {
            return DMatrix::identity(self.dim, self.dim);
        }
        linalg::null_space(&self.contraction_matrix(), rel_tol)
    }

    /// Restriction to the span of `basis` columns, as a `k`-form on `R^{ncols}`.
    pub fn restrict(&self, basis: &DMatrix<f64>) -> NumForm {
        let m = basis.ncols();
        let mut coeffs = Vec::new();
        for idx in super::multi_indices(m, self.degree) {
            let vectors: Vec<Vec<f64>> = idx
                .indices()
                .into_iter()
                .map(|j| basis.column(j).iter().copied().collect())
                .collect();
            let c = self.evaluate(&vectors);
            if c != 0.0 {
                coeffs.push((idx, c));
            }
        }
        NumForm::new(m, self.degree, coeffs)
    }

    /// Gram matrix `w(e_i, e_j)` of a 2-form.
    pub fn bilinear_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.degree, 2, "bilinear_matrix on a {}-form", self.degree);
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (idx, c) in &self.coeffs {
            let ij = idx.indices();
            m[(ij[0], ij[1])] += c;
            m[(ij[1], ij[0])] -= c;
        }
        m
    }
}
