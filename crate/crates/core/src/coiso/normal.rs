//! Local structure at singular points: the normal data of `d lambda` and the
//! perturbation that removes a Legendrian singular component.

use nalgebra::{DMatrix, DVector};

use super::scan::HitCriterion;
use super::GraphSubmanifold;
use crate::error::{Error, Result};
use crate::fields::Expr;
use crate::linalg;

/// A perturbation `z = z(y1)` of the Legendrian normal form.
#[derive(Debug, Clone)]
pub struct Bump {
    /// Expression on the source chart `x1..xn, y1` depending on `y1` only.
    pub expr: Expr,
    /// Declared bound on `sup |z|`.
    pub delta: f64,
    /// `y1`-interval on which the sup-norm is sampled.
    pub window: (f64, f64),
}

const SUP_SAMPLES: usize = 2001;

fn is_legendrian_normal_form(y: &GraphSubmanifold) -> bool {
    let n = y.n();
    let mut expected: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    expected.push("y1".into());
    y.source().names() == expected.as_slice()
        && (0..y.ambient().dim())
            .filter(|i| !y.free_indices().contains(i))
            .all(|i| y.embedding().comps[i].is_zero())
}

/// Replaces `z = 0` by `z = bump(y1)`, giving `lambda = z'(y1) dy1 - y1 dx1`.
pub fn perturb_legendrian(y: &GraphSubmanifold, bump: &Bump) -> Result<GraphSubmanifold> {
    if !is_legendrian_normal_form(y) {
        return Err(Error::InvalidInput(
            "perturbation needs the Legendrian normal form {z = y2 = ... = yn = 0} over x1..xn, y1"
                .into(),
        ));
    }
    let n = y.n();
    let y1 = n;
    if (0..n).any(|i| bump.expr.depends_on(i)) {
        return Err(Error::InvalidInput("bump must depend on y1 only".into()));
    }
    if bump.expr.max_var().is_some_and(|v| v > y1) {
        return Err(Error::UnknownVariable(format!(
            "#{}",
            bump.expr.max_var().unwrap()
        )));
    }
    if bump.expr.is_zero() {
        return Ok(y.clone());
    }
    let origin = vec![0.0; n + 1];
    let slope = bump.expr.diff(y1).eval(&origin);
    if !(slope.abs() > 1e-12) {
        return Err(Error::PerturbationInsufficient);
    }
    let (lo, hi) = bump.window;
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!(
            "empty bump window [{lo}, {hi}]"
        )));
    }
    let mut p = origin;
    let mut sup: f64 = 0.0;
    for i in 0..SUP_SAMPLES {
        p[y1] = lo + (hi - lo) * i as f64 / (SUP_SAMPLES - 1) as f64;
        sup = sup.max(bump.expr.eval(&p).abs());
    }
    if !(sup <= bump.delta) {
        return Err(Error::PerturbationTooLarge {
            sup,
            bound: bump.delta,
        });
    }
    y.with_component("z", bump.expr.clone())
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct NormalData {
    /// Rank of `d lambda_p` on `T_p Y`.
    pub rank: usize,
    pub kernel_dim: usize,
    /// `d lambda(e1, e2)` on the co-oriented normal plane, when the rank is 2.
    pub normal_value: Option<f64>,
    pub sign: Option<i8>,
}

/// Normal data of `d lambda` at a singular point.
///
/// Without an explicit `co_orientation` the normal plane (the orthogonal
/// complement of `ker d lambda_p`) is oriented by Gram–Schmidt on the
/// projected coordinate vectors, taken in chart order.
pub fn singular_normal_data(
    y: &GraphSubmanifold,
    point: &[f64],
    co_orientation: Option<[DVector<f64>; 2]>,
    tol: f64,
) -> Result<NormalData> {
    y.source().check_point(point)?;
    let crit = HitCriterion::new(y, tol)?;
    if !crit.is_hit(point) {
        return Err(Error::NotSingular(format!(
            "|lambda| = {:e} at {point:?}",
            crit.lambda_norm(point)
        )));
    }
    let m = y.lambda().exterior_d()?.at(point).bilinear_matrix();
    let rank = linalg::rank(&m, 1e-9);
    let kernel = linalg::null_space(&m, 1e-9);
    let kernel_dim = kernel.ncols();
    if rank != 2 {
        return Ok(NormalData {
            rank,
            kernel_dim,
            normal_value: None,
            sign: None,
        });
    }
    let [e1, e2] = match co_orientation {
        Some(pair) => pair,
        None => default_normal_frame(&kernel),
    };
    let value = (e1.transpose() * &m * &e2)[(0, 0)];
    Ok(NormalData {
        rank,
        kernel_dim,
        normal_value: Some(value),
        sign: Some(if value > 0.0 {
            1
        } else if value < 0.0 {
            -1
        } else {
            0
        }),
    })
}

fn default_normal_frame(kernel: &DMatrix<f64>) -> [DVector<f64>; 2] {
    let dim = kernel.nrows();
    let proj = DMatrix::identity(dim, dim) - kernel * kernel.transpose();
    let mut frame: Vec<DVector<f64>> = Vec::new();
    for j in 0..dim {
        let mut v = proj.column(j).into_owned();
        for u in &frame {
            v -= u * u.dot(&v);
        }
        let norm = v.norm();
        if norm > 1e-9 {
            frame.push(v / norm);
            if frame.len() == 2 {
                break;
            }
        }
    }
    [frame[0].clone(), frame[1].clone()]
}
