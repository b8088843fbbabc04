//! Germs of contact structures along foliated submanifolds: the tautological
//! construction for nonsingular foliations, the CCL construction near a
//! singular locus, and the scans that certify them.

mod build;
mod check;

use crate::error::{Error, Result};
use crate::fields::{Chart, Expr, SmoothMap, VectorField};
use crate::forms::{DiffForm, MultiIndex};
use crate::grid::Grid;
use crate::par;

pub use build::{build_nonsingular_germ, build_singular_germ, invariant_extension};
pub use check::{
    interpolation_contactness, zero_section_foliation_check, InterpolationOptions,
    InterpolationReport, ZeroSectionReport,
};

/// Above this `beta ^ d beta` counts as non-integrable.
pub const FROBENIUS_TOL: f64 = 1e-8;

/// Largest `|beta ^ d beta|` on coordinate 3-frames over the grid.
pub fn frobenius_residual(beta: &DiffForm, grid: &Grid) -> Result<f64> {
    if beta.degree() != 1 {
        return Err(Error::InvalidInput(format!(
            "expected a 1-form, got degree {}",
            beta.degree()
        )));
    }
    if beta.chart().dim() < 3 {
        return Ok(0.0);
    }
    let w = beta.wedge(&beta.exterior_d()?)?;
    let points = grid.points()?;
    Ok(par::map(&points, |p| w.at(p).max_abs())
        .into_iter()
        .fold(0.0, f64::max))
}

/// A codimension-1 foliation `ker beta` on a chart `(t, x1..xn)` with a
/// transverse line field, sampled on `region`.
#[derive(Debug, Clone)]
pub struct FoliatedInput {
    beta: DiffForm,
    line_field: VectorField,
    region: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FoliatedCheck {
    pub frobenius: f64,
    pub min_beta: f64,
    pub min_beta_on_line: f64,
}

impl FoliatedInput {
    pub fn new(beta: DiffForm, line_field: VectorField, region: Grid) -> Result<Self> {
        let chart = beta.chart().clone();
        crate::fields::same_chart(&chart, &line_field.chart)?;
        if beta.degree() != 1 {
            return Err(Error::InvalidInput(
                "a foliation is defined by a 1-form".into(),
            ));
        }
        if chart.dim() < 2 {
            return Err(Error::InvalidInput(
                "a foliated chart needs t and at least one x".into(),
            ));
        }
        if region.dim() != chart.dim() {
            return Err(Error::Dimension(format!(
                "region has dimension {}, chart has {}",
                region.dim(),
                chart.dim()
            )));
        }
        Ok(Self {
            beta,
            line_field,
            region,
        })
    }

    /// Chart names, defining form and line-field components as strings.
    pub fn from_strs(
        names: &[&str],
        beta: &str,
        line_field: &[&str],
        region: Grid,
    ) -> Result<Self> {
        let chart = Chart::new(names.iter().copied())?;
        let beta = crate::forms::parse_form(&chart, beta)?;
        let comps = line_field
            .iter()
            .map(|s| chart.parse_expr(s).map(|f| f.expr))
            .collect::<Result<Vec<_>>>()?;
        let line = VectorField::new(chart, comps)?;
        Self::new(beta, line, region)
    }

    pub fn chart(&self) -> &Chart {
        self.beta.chart()
    }

    /// Leaf dimension `n`.
    pub fn n(&self) -> usize {
        self.chart().dim() - 1
    }

    pub fn beta(&self) -> &DiffForm {
        &self.beta
    }

    pub fn line_field(&self) -> &VectorField {
        &self.line_field
    }

    pub fn region(&self) -> &Grid {
        &self.region
    }

    pub fn check(&self) -> Result<FoliatedCheck> {
        let points = self.region.points()?;
        let frobenius = frobenius_residual(&self.beta, &self.region)?;
        let beta_l = self.beta.interior(&self.line_field)?;
        let vals = par::map(&points, |p| {
            (
                self.beta.at(p).max_abs(),
                beta_l.at(p).coeff(MultiIndex::from_bits(0)),
            )
        });
        let min_beta = vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
        let min_beta_on_line = vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        Ok(FoliatedCheck {
            frobenius,
            min_beta,
            min_beta_on_line,
        })
    }

    /// [`FoliatedInput::check`] turned into an error on the first violated invariant.
    pub fn validate(&self) -> Result<FoliatedCheck> {
        let c = self.check()?;
        if !(c.frobenius <= FROBENIUS_TOL) {
            return Err(Error::InvalidInput(format!(
                "beta is not integrable: |beta ^ d beta| reaches {:e}",
                c.frobenius
            )));
        }
        if !(c.min_beta > 0.0) {
            return Err(Error::FormVanishes);
        }
        if !(c.min_beta_on_line > 0.0) {
            return Err(Error::LineFieldNotTransverse(format!(
                "min beta(L) = {:e}",
                c.min_beta_on_line
            )));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GermKind {
    Standard,
    Nonsingular,
    Singular,
}

/// A contact form on a neighbourhood of a zero section. The zero-section
/// coordinates come first in the total chart, fiber coordinates after.
#[derive(Debug, Clone)]
pub struct GermForm {
    pub kind: GermKind,
    pub alpha: DiffForm,
    /// Coordinate indices of the frame `alpha ^ (d alpha)^n` is evaluated on.
    pub frame: Vec<usize>,
    pub zero_section: SmoothMap,
    /// `alpha ^ (d alpha)^n` on the frame, when known in closed form.
    pub expected_volume: Option<Expr>,
}

impl GermForm {
    /// `dz - sum y_i dx_i` on Darboux coordinates; the zero section is the
    /// Legendrian `x`-plane.
    pub fn standard(n: usize) -> Self {
        let chart = Chart::darboux(n);
        let alpha = crate::forms::standard_contact_form(n);
        let xs = Chart::new((1..=n).map(|i| format!("x{i}"))).expect("valid names");
        let mut comps: Vec<Expr> = (0..n).map(Expr::var).collect();
        comps.extend(std::iter::repeat_n(Expr::zero(), n + 1));
        let zero_section = SmoothMap::new(xs, chart, comps).expect("valid zero section");
        let mut frame: Vec<usize> = (0..n).flat_map(|i| [i, n + i]).collect();
        frame.push(2 * n);
        Self {
            kind: GermKind::Standard,
            alpha,
            frame,
            zero_section,
            expected_volume: Some(Expr::constant(factorial(n))),
        }
    }

    pub fn chart(&self) -> &Chart {
        self.alpha.chart()
    }

    /// Half the fiber-free dimension: the total chart has dimension `2n + 1`.
    pub fn n(&self) -> usize {
        (self.chart().dim() - 1) / 2
    }

    /// Same germ with `alpha` replaced, keeping frame and zero section.
    pub fn with_alpha(&self, alpha: DiffForm) -> Result<Self> {
        crate::fields::same_chart(alpha.chart(), self.chart())?;
        Ok(Self {
            alpha,
            expected_volume: None,
            ..self.clone()
        })
    }

    /// `alpha` pulled back to the zero section.
    pub fn restricted(&self) -> Result<DiffForm> {
        self.alpha.pullback(&self.zero_section)
    }

    pub fn top_form(&self) -> Result<DiffForm> {
        top_form(&self.alpha)
    }

    /// Lattice or random cloud over the zero-section `base`, with every fiber
    /// coordinate in `[-radius, radius]`.
    pub fn neighborhood(&self, base: &Grid, radius: f64, fiber_divisions: usize) -> Result<Grid> {
        let base_dim = self.zero_section.source.dim();
        if base.dim() != base_dim {
            return Err(Error::Dimension(format!(
                "base grid has dimension {}, zero section has {base_dim}",
                base.dim()
            )));
        }
        base.extended(
            -radius,
            radius,
            self.chart().dim() - base_dim,
            fiber_divisions,
        )
    }

    /// Coefficients of `alpha` as strings, for reports.
    pub fn describe(&self) -> String {
        self.alpha.to_string()
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

pub(crate) fn top_form(alpha: &DiffForm) -> Result<DiffForm> {
    let dim = alpha.chart().dim();
    if dim.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "contact charts are odd-dimensional, got {dim}"
        )));
    }
    alpha.wedge(&alpha.exterior_d()?.power((dim - 1) / 2)?)
}

/// `top(e_frame[0], ..., e_frame[2n])` at `p`.
pub(crate) fn frame_value(top: &DiffForm, frame: &[usize], p: &[f64]) -> f64 {
    let dim = top.chart().dim();
    let vectors: Vec<Vec<f64>> = frame
        .iter()
        .map(|&i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    top.at(p).evaluate(&vectors)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ContactnessReport {
    pub samples: usize,
    pub min_abs: f64,
    pub max_abs: f64,
    /// `+1`/`-1` when every sample has that sign, `0` otherwise.
    pub sign: i8,
    pub threshold: f64,
    pub passed: bool,
}

pub const CONTACT_THRESHOLD: f64 = 1e-8;

pub fn contactness_scan(g: &GermForm, grid: &Grid) -> Result<ContactnessReport> {
    if grid.dim() != g.chart().dim() {
        return Err(Error::Dimension(format!(
            "grid has dimension {}, germ chart has {}",
            grid.dim(),
            g.chart().dim()
        )));
    }
    let top = g.top_form()?;
    let points = grid.points()?;
    let values = par::map(&points, |p| frame_value(&top, &g.frame, p));
    Ok(summarize(&values, CONTACT_THRESHOLD))
}

pub(crate) fn summarize(values: &[f64], threshold: f64) -> ContactnessReport {
    let min_abs = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let max_abs = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let sign = if values.iter().all(|&v| v > 0.0) {
        1
    } else if values.iter().all(|&v| v < 0.0) {
        -1
    } else {
        0
    };
    ContactnessReport {
        samples: values.len(),
        min_abs,
        max_abs,
        sign,
        threshold,
        passed: sign != 0 && min_abs > threshold,
    }
}

/// Largest `|alpha ^ (d alpha)^n - expected_volume|` over the points.
pub fn volume_identity_residual(g: &GermForm, points: &[Vec<f64>]) -> Result<f64> {
    let expected = g
        .expected_volume
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("germ has no closed-form volume".into()))?;
    let top = g.top_form()?;
    let diffs = par::map(points, |p| {
        (frame_value(&top, &g.frame, p) - expected.eval(p)).abs()
    });
    Ok(diffs.into_iter().fold(0.0, f64::max))
}
