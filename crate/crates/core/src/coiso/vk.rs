//! The commuting isotropic frame `V_1..V_{n-1}` of a coisotropic `k = n + 1`
//! graph and the identities it satisfies.
//!
//! On the source chart
//! `V~_k = d/dx_k - (dy_k/dy_n) d/dx_n + (dy_k/dx_n) d/dy_n`,
//! and `V_k` is its pushforward along the embedding.

use nalgebra::DVector;

use super::residuals::{require_standard_hypersurface_layout, ResidualSystem};
use super::GraphSubmanifold;
use crate::error::{Error, Result};
use crate::fields::{lie_bracket, Expr, VectorField};
use crate::forms::{standard_contact_form, DiffForm};
use crate::par;

#[derive(Debug, Clone)]
pub struct VkFields {
    /// `V~_k` on the source chart.
    pub source: Vec<VectorField>,
    /// Ambient components of `V_k = f_* V~_k`, as functions on the source.
    pub ambient: Vec<Vec<Expr>>,
}

pub fn build_vk(y: &GraphSubmanifold) -> Result<VkFields> {
    require_standard_hypersurface_layout(y, "build_vk")?;
    let n = y.n();
    let chart = y.source();
    let mut source = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        let yk = y.component(&format!("y{k}"))?;
        let mut comps = vec![Expr::zero(); n + 1];
        comps[k - 1] = Expr::one();
        comps[n - 1] = yk.diff(n).neg();
        comps[n] = yk.diff(n - 1);
        source.push(VectorField::new(chart.clone(), comps)?);
    }
    let ambient = source
        .iter()
        .map(|v| y.embedding().pushforward_field(v))
        .collect::<Result<_>>()?;
    Ok(VkFields { source, ambient })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct ClaimResiduals {
    /// `max_k |alpha(V_k)|`.
    pub i_alpha: f64,
    /// `max_k |i_{V_k} d lambda|`.
    pub i_dlambda: f64,
    /// `max_{k<l} |[V_k, V_l]|`.
    pub bracket: f64,
    /// `max_k |L_{V_k} lambda|`.
    pub lie: f64,
    /// `max_{a<b} |Lambda_ab|`.
    pub lambda_ab: f64,
}

impl ClaimResiduals {
    pub fn max(&self) -> f64 {
        self.i_alpha
            .max(self.i_dlambda)
            .max(self.bracket)
            .max(self.lie)
            .max(self.lambda_ab)
    }

    fn merge(self, o: ClaimResiduals) -> ClaimResiduals {
        ClaimResiduals {
            i_alpha: self.i_alpha.max(o.i_alpha),
            i_dlambda: self.i_dlambda.max(o.i_dlambda),
            bracket: self.bracket.max(o.bracket),
            lie: self.lie.max(o.lie),
            lambda_ab: self.lambda_ab.max(o.lambda_ab),
        }
    }
}

/// Symbolic residual expressions, built once and evaluated per sample.
#[derive(Debug, Clone)]
pub struct ClaimSystem {
    y: GraphSubmanifold,
    pub vk: VkFields,
    residuals: ResidualSystem,
    i_alpha: Vec<Expr>,
    i_dlambda: Vec<DiffForm>,
    brackets: Vec<VectorField>,
    lie: Vec<DiffForm>,
}

impl ClaimSystem {
    pub fn new(y: &GraphSubmanifold) -> Result<Self> {
        let vk = build_vk(y)?;
        let residuals = ResidualSystem::new(y)?;
        let alpha = standard_contact_form(y.n());
        let alpha_on_y: Vec<Expr> = (0..alpha.chart().dim())
            .map(|i| {
                alpha
                    .coeff_of(&[i])
                    .map(|c| c.substitute(&y.embedding().comps))
            })
            .collect::<Result<_>>()?;
        let i_alpha = vk
            .ambient
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&alpha_on_y)
                    .fold(Expr::zero(), |acc, (vi, ai)| acc.add(&vi.mul(ai)))
            })
            .collect();
        let dlambda = y.lambda().exterior_d()?;
        let i_dlambda = vk
            .source
            .iter()
            .map(|v| dlambda.interior(v))
            .collect::<Result<_>>()?;
        let mut brackets = Vec::new();
        for (i, v) in vk.source.iter().enumerate() {
            for w in &vk.source[i + 1..] {
                brackets.push(lie_bracket(v, w)?);
            }
        }
        let lie = vk
            .source
            .iter()
            .map(|v| y.lambda().lie_derivative(v))
            .collect::<Result<_>>()?;
        Ok(Self {
            y: y.clone(),
            vk,
            residuals,
            i_alpha,
            i_dlambda,
            brackets,
            lie,
        })
    }

    /// Largest non-redundant foliation-equation residual at `point`.
    pub fn foliation_residual(&self, point: &[f64]) -> f64 {
        self.residuals.eval(point).max_foliation()
    }

    pub fn eval(&self, point: &[f64]) -> ClaimResiduals {
        let jac = self.y.embedding().jacobian(point);
        let bracket = self.brackets.iter().fold(0.0_f64, |m, b| {
            let pushed = &jac * DVector::from_vec(b.eval(point));
            m.max(pushed.amax())
        });
        ClaimResiduals {
            i_alpha: self
                .i_alpha
                .iter()
                .fold(0.0, |m, e| m.max(e.eval(point).abs())),
            i_dlambda: self
                .i_dlambda
                .iter()
                .fold(0.0, |m, f| m.max(f.at(point).max_abs())),
            bracket,
            lie: self
                .lie
                .iter()
                .fold(0.0, |m, f| m.max(f.at(point).max_abs())),
            lambda_ab: self.residuals.eval(point).max_lambda(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ClaimReport {
    pub samples: usize,
    pub max: ClaimResiduals,
    /// Largest foliation residual seen while checking the precondition.
    pub max_foliation: f64,
}

/// Checks the foliation equations at every sample first and refuses if any
/// exceeds `precondition_tol`; otherwise reports the claim residual maxima.
pub fn verify_claim(
    y: &GraphSubmanifold,
    points: &[Vec<f64>],
    precondition_tol: f64,
) -> Result<ClaimReport> {
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for p in points {
        y.source().check_point(p)?;
    }
    let sys = ClaimSystem::new(y)?;
    let foliation = par::map(points, |p| sys.foliation_residual(p));
    let failing: Vec<(Vec<f64>, f64)> = points
        .iter()
        .zip(&foliation)
        .filter(|(_, r)| !(r.abs() <= precondition_tol))
        .map(|(p, r)| (p.clone(), *r))
        .collect();
    if !failing.is_empty() {
        let (points, residuals) = failing.into_iter().unzip();
        return Err(Error::NotCoisotropic { points, residuals });
    }
    let max = par::map(points, |p| sys.eval(p))
        .into_iter()
        .fold(ClaimResiduals::default(), ClaimResiduals::merge);
    Ok(ClaimReport {
        samples: points.len(),
        max,
        max_foliation: foliation.iter().fold(0.0, |m, r| m.max(r.abs())),
    })
}
