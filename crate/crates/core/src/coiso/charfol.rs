//! Characteristic foliation `ker(lambda ^ (d lambda)^{k-n-1})` of a graph in
//! any codimension.
//!
//! With `omega = lambda ^ (d lambda)^{k-n-1}` the distribution `ker omega` is
//! involutive iff `i_Y i_X d omega = 0` for all `X, Y` in `ker omega`, and
//! `d omega = (d lambda)^{k-n}`. That contraction is the integrability
//! residual reported here. Two further numbers are reported: the restriction
//! of `(d lambda)^{k-n}` to `Y_xi = ker lambda`, which vanishes on coisotropic
//! graphs, and its value on all of `TY`, which in general does not.

use nalgebra::DMatrix;

use super::scan::HitCriterion;
use super::GraphSubmanifold;
use crate::error::Result;
use crate::forms::DiffForm;
use crate::linalg;

pub const KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CharFoliation {
    y: GraphSubmanifold,
    omega: DiffForm,
    d_omega: DiffForm,
    lambda: DiffForm,
    singular: HitCriterion,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CharFoliationPoint {
    pub singular: bool,
    pub kernel_dim: usize,
    pub expected_dim: usize,
    /// `max |i_Y i_X d omega|` over orthonormal kernel pairs.
    pub integrability: f64,
    /// `max |(d lambda)^{k-n}|` on `ker lambda`.
    pub restricted_power: f64,
    /// `max |(d lambda)^{k-n}|` on the whole tangent space.
    pub full_power: f64,
}

impl CharFoliation {
    pub fn new(y: &GraphSubmanifold, singular_tol: f64) -> Result<Self> {
        let (n, k) = (y.n(), y.k());
        let lambda = y.lambda().clone();
        let dlambda = lambda.exterior_d()?;
        let omega = lambda.wedge(&dlambda.power(k - n - 1)?)?;
        let d_omega = dlambda.power(k - n)?;
        Ok(Self {
            y: y.clone(),
            omega,
            d_omega,
            lambda,
            singular: HitCriterion::new(y, singular_tol)?,
        })
    }

    /// `lambda ^ (d lambda)^{k-n-1}` on the source chart.
    pub fn form(&self) -> &DiffForm {
        &self.omega
    }

    pub fn expected_dim(&self) -> usize {
        2 * self.y.n() - self.y.k() + 1
    }

    pub fn at(&self, point: &[f64]) -> Result<CharFoliationPoint> {
        self.y.source().check_point(point)?;
        let kernel = self.omega.at(point).kernel(KERNEL_TOL);
        let dw = self.d_omega.at(point);
        let integrability = pairwise_contraction(&dw, &kernel);
        let ker_lambda = self.lambda.at(point).kernel(KERNEL_TOL);
        let restricted_power = if dw.degree() > ker_lambda.ncols() {
            0.0
        } else {
            dw.restrict(&ker_lambda).max_abs()
        };
        Ok(CharFoliationPoint {
            singular: self.singular.is_hit(point),
            kernel_dim: kernel.ncols(),
            expected_dim: self.expected_dim(),
            integrability,
            restricted_power,
            full_power: dw.max_abs(),
        })
    }
}

fn pairwise_contraction(form: &crate::forms::NumForm, kernel: &DMatrix<f64>) -> f64 {
    let cols: Vec<Vec<f64>> = kernel
        .column_iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    let mut worst: f64 = 0.0;
    for (i, x) in cols.iter().enumerate() {
        let ix = form.interior(x);
        for y in &cols[i + 1..] {
            worst = worst.max(ix.interior(y).max_abs());
        }
    }
    worst
}

/// Dimension of `ker` of a numeric form as a standalone helper.
pub fn kernel_dimension(form: &DiffForm, point: &[f64]) -> usize {
    linalg::null_space(&form.at(point).contraction_matrix(), KERNEL_TOL).ncols()
}
