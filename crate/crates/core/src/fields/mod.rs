//! Scalar fields, vector fields and smooth maps on coordinate charts.
//!
//! Every coefficient is an [`Expr`] tree over the chart's coordinates, so
//! partial derivatives are exact and can be taken to any order. The
//! finite-difference routine [`fd_partial`] exists only as an independent
//! check on the symbolic engine and is never called by it.

pub mod expr;
pub mod parse;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
pub use expr::{Expr, Node};
use parse::{parse_ast, Ast, BinOp, SyntaxError};

/// An ordered list of coordinate names with optional periods.
#[derive(Clone)]
pub struct Chart(Arc<ChartData>);

#[derive(Debug, PartialEq)]
struct ChartData {
    names: Vec<String>,
    periods: Vec<Option<f64>>,
}

impl Chart {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let periods = vec![None; names.len()];
        Self::with_periods(names, periods)
    }

    pub fn with_periods(names: Vec<String>, periods: Vec<Option<f64>>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidChart(
                "a chart needs at least one coordinate".into(),
            ));
        }
        if names.len() != periods.len() {
            return Err(Error::InvalidChart("one period slot per coordinate".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if !is_identifier(name) {
                return Err(Error::InvalidChart(format!(
                    "`{name}` is not an identifier"
                )));
            }
            if names[..i].contains(name) {
                return Err(Error::InvalidChart(format!(
                    "duplicate coordinate `{name}`"
                )));
            }
        }
        for (name, p) in names.iter().zip(&periods) {
            if let Some(p) = p {
                if !(p.is_finite() && *p > 0.0) {
                    return Err(Error::InvalidChart(format!(
                        "period of `{name}` must be positive, got {p}"
                    )));
                }
            }
        }
        Ok(Chart(Arc::new(ChartData { names, periods })))
    }

    /// Darboux coordinates `x1..xn, y1..yn, z` of standard contact space.
    pub fn darboux(n: usize) -> Self {
        let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        names.extend((1..=n).map(|i| format!("y{i}")));
        names.push("z".into());
        Self::new(names).expect("darboux names are valid")
    }

    pub fn dim(&self) -> usize {
        self.0.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.0.names[index]
    }

    pub fn periods(&self) -> &[Option<f64>] {
        &self.0.periods
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.0.names.iter().position(|n| n == name)
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.position(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Reduces periodic coordinates into `[0, period)`.
    pub fn reduce(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(&self.0.periods)
            .map(|(&x, p)| match p {
                Some(p) => x.rem_euclid(*p),
                None => x,
            })
            .collect()
    }

    pub fn is_periodic(&self) -> bool {
        self.0.periods.iter().any(Option::is_some)
    }

    pub fn parse_expr(&self, src: &str) -> Result<ExprField> {
        let ast = parse_ast(src)?;
        let expr = lower_scalar(&ast, self)?;
        Ok(ExprField {
            chart: self.clone(),
            expr,
        })
    }

    pub(crate) fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chart({})", self.0.names.join(","))
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn same_chart(a: &Chart, b: &Chart) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ChartMismatch(format!("{a:?} vs {b:?}")))
    }
}

/// Lowers a syntax tree to a scalar expression on `chart`.
pub fn lower_scalar(ast: &Ast, chart: &Chart) -> Result<Expr, SyntaxError> {
    Ok(match ast {
        Ast::Num(v, _) => Expr::constant(*v),
        Ast::Ident(name, span) => match chart.position(name) {
            Some(i) => Expr::var(i),
            None if name == "pi" => Expr::constant(std::f64::consts::PI),
            None => {
                return Err(SyntaxError {
                    message: format!("unknown identifier `{name}`"),
                    span: *span,
                })
            }
        },
        Ast::Neg(inner, _) => lower_scalar(inner, chart)?.neg(),
        Ast::Binary(op, a, b, _) => {
            let lhs = lower_scalar(a, chart)?;
            if *op == BinOp::Pow {
                return Ok(lhs.powi(integer_exponent(b, chart)?));
            }
            let rhs = lower_scalar(b, chart)?;
            match op {
                BinOp::Add => lhs.add(&rhs),
                BinOp::Sub => lhs.sub(&rhs),
                BinOp::Mul => lhs.mul(&rhs),
                BinOp::Div => lhs.div(&rhs),
                BinOp::Pow => unreachable!(),
            }
        }
        Ast::Call(name, arg, span) => {
            let a = lower_scalar(arg, chart)?;
            match name.as_str() {
                "sin" => a.sin(),
                "cos" => a.cos(),
                "exp" => a.exp(),
                _ => {
                    return Err(SyntaxError {
                        message: format!("unknown function `{name}`"),
                        span: *span,
                    })
                }
            }
        }
    })
}

pub(crate) fn integer_exponent(ast: &Ast, chart: &Chart) -> Result<i32, SyntaxError> {
    let e = lower_scalar(ast, chart)?;
    match e.as_const() {
        Some(c) if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 => Ok(c as i32),
        _ => Err(SyntaxError {
            message: "exponent must be an integer constant".into(),
            span: ast.span(),
        }),
    }
}

/// A real-valued expression on a chart.
#[derive(Clone, PartialEq)]
pub struct ExprField {
    pub chart: Chart,
    pub expr: Expr,
}

impl ExprField {
    pub fn new(chart: Chart, expr: Expr) -> Result<Self> {
        if let Some(v) = expr.max_var() {
            if v >= chart.dim() {
                return Err(Error::UnknownVariable(format!("#{v}")));
            }
        }
        Ok(Self { chart, expr })
    }

    pub fn constant(chart: &Chart, c: f64) -> Self {
        Self {
            chart: chart.clone(),
            expr: Expr::constant(c),
        }
    }

    pub fn coordinate(chart: &Chart, name: &str) -> Result<Self> {
        Ok(Self {
            chart: chart.clone(),
            expr: Expr::var(chart.index(name)?),
        })
    }

    pub fn differentiate(&self, var: &str) -> Result<ExprField> {
        let i = self.chart.index(var)?;
        Ok(self.partial(i))
    }

    pub fn partial(&self, index: usize) -> ExprField {
        ExprField {
            chart: self.chart.clone(),
            expr: self.expr.diff(index),
        }
    }

    /// Value at `point`, with periodic coordinates reduced first.
    pub fn eval(&self, point: &[f64]) -> f64 {
        if self.chart.is_periodic() {
            self.expr.eval(&self.chart.reduce(point))
        } else {
            self.expr.eval(point)
        }
    }

    pub fn try_eval(&self, point: &[f64]) -> Result<f64> {
        self.chart.check_point(point)?;
        let v = self.eval(point);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("{} at {point:?}", self)))
        }
    }
}

impl fmt::Display for ExprField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr.display(self.chart.names()))
    }
}

impl fmt::Debug for ExprField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExprField({self})")
    }
}

/// Central difference `(f(p + h e) - f(p - h e)) / 2h` along coordinate `var`.
pub fn fd_partial(field: &ExprField, point: &[f64], var: &str, step: f64) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    let i = field.chart.index(var)?;
    field.chart.check_point(point)?;
    let mut p = point.to_vec();
    p[i] = point[i] + step;
    let plus = field.try_eval(&p)?;
    p[i] = point[i] - step;
    let minus = field.try_eval(&p)?;
    Ok((plus - minus) / (2.0 * step))
}

/// A vector field `sum_i V^i d/dx_i`.
#[derive(Clone, PartialEq)]
pub struct VectorField {
    pub chart: Chart,
    pub comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: Chart, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::Dimension(format!(
                "vector field has {} components on a {}-dimensional chart",
                comps.len(),
                chart.dim()
            )));
        }
        for c in &comps {
            ExprField::new(chart.clone(), c.clone())?;
        }
        Ok(Self { chart, comps })
    }

    pub fn zero(chart: &Chart) -> Self {
        Self {
            chart: chart.clone(),
            comps: vec![Expr::zero(); chart.dim()],
        }
    }

    /// The coordinate frame field `d/dx_index`.
    pub fn coordinate(chart: &Chart, index: usize) -> Self {
        let mut comps = vec![Expr::zero(); chart.dim()];
        comps[index] = Expr::one();
        Self {
            chart: chart.clone(),
            comps,
        }
    }

    pub fn coordinate_named(chart: &Chart, name: &str) -> Result<Self> {
        Ok(Self::coordinate(chart, chart.index(name)?))
    }

    pub fn eval(&self, point: &[f64]) -> Vec<f64> {
        let p = self.chart.reduce(point);
        self.comps.iter().map(|c| c.eval(&p)).collect()
    }

    /// Directional derivative `V(f)`.
    pub fn apply(&self, f: &Expr) -> Expr {
        self.comps
            .iter()
            .enumerate()
            .fold(Expr::zero(), |acc, (j, vj)| acc.add(&vj.mul(&f.diff(j))))
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|c| c.mul(f)).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        same_chart(&self.chart, &other.chart)?;
        Ok(VectorField {
            chart: self.chart.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        same_chart(&self.chart, &other.chart)?;
        Ok(VectorField {
            chart: self.chart.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.chart.names();
        let terms: Vec<String> = self
            .comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({})*d/d{}", c.display(names), names[i]))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// `[V, W]^i = V(W^i) - W(V^i)`.
pub fn lie_bracket(v: &VectorField, w: &VectorField) -> Result<VectorField> {
    same_chart(&v.chart, &w.chart)?;
    let comps = v
        .comps
        .iter()
        .zip(&w.comps)
        .map(|(vi, wi)| v.apply(wi).sub(&w.apply(vi)))
        .collect();
    Ok(VectorField {
        chart: v.chart.clone(),
        comps,
    })
}

/// A smooth map between charts, one expression on `source` per target coordinate.
#[derive(Clone, PartialEq, Debug)]
pub struct SmoothMap {
    pub source: Chart,
    pub target: Chart,
    pub comps: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(source: Chart, target: Chart, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != target.dim() {
            return Err(Error::Dimension(format!(
                "map has {} components, target chart has dimension {}",
                comps.len(),
                target.dim()
            )));
        }
        for c in &comps {
            ExprField::new(source.clone(), c.clone())?;
        }
        Ok(Self {
            source,
            target,
            comps,
        })
    }

    pub fn identity(chart: &Chart) -> Self {
        Self {
            source: chart.clone(),
            target: chart.clone(),
            comps: (0..chart.dim()).map(Expr::var).collect(),
        }
    }

    pub fn eval(&self, point: &[f64]) -> Vec<f64> {
        let p = self.source.reduce(point);
        self.comps.iter().map(|c| c.eval(&p)).collect()
    }

    /// Symbolic Jacobian, `[target][source]`.
    pub fn jacobian_exprs(&self) -> Vec<Vec<Expr>> {
        self.comps
            .iter()
            .map(|c| (0..self.source.dim()).map(|j| c.diff(j)).collect())
            .collect()
    }

    pub fn jacobian(&self, point: &[f64]) -> DMatrix<f64> {
        let p = self.source.reduce(point);
        let jac = self.jacobian_exprs();
        DMatrix::from_fn(self.target.dim(), self.source.dim(), |i, j| {
            jac[i][j].eval(&p)
        })
    }

    /// Components of `f_* V` along the map, as expressions on the source.
    pub fn pushforward_field(&self, v: &VectorField) -> Result<Vec<Expr>> {
        same_chart(&self.source, &v.chart)?;
        Ok(self.comps.iter().map(|c| v.apply(c)).collect())
    }

    /// `f: A -> B` composed after `inner: S -> A`.
    pub fn compose(&self, inner: &SmoothMap) -> Result<SmoothMap> {
        same_chart(&self.source, &inner.target)?;
        Ok(SmoothMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            comps: self
                .comps
                .iter()
                .map(|c| c.substitute(&inner.comps))
                .collect(),
        })
    }
}

/// Jacobian of `map` at `point` applied to `V(point)`.
pub fn pushforward(map: &SmoothMap, v: &VectorField, point: &[f64]) -> Result<DVector<f64>> {
    same_chart(&map.source, &v.chart)?;
    map.source.check_point(point)?;
    let jac = map.jacobian(point);
    let vec = DVector::from_vec(v.eval(point));
    Ok(jac * vec)
}
