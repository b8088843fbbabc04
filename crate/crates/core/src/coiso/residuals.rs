//! Coisotropy of `k = n + 1` graphs through the foliation equations obtained
//! by evaluating `alpha ^ d alpha` on frame triples, and pointwise through
//! symplectic linear algebra.
//!
//! Equation labels follow the order of the frame triples:
//! `XXX` uses `(x_a, x_b, x_c)`, `XXN` uses `(x_a, x_b, x_n)`, `XXY` uses
//! `(x_a, x_b, y_n)` and `XNY` uses `(x_a, x_n, y_n)`, with `a, b, c < n`.
//! `Lambda` is the auxiliary identity `Lambda_ab = 0`.

use nalgebra::DVector;

use super::{GraphSubmanifold, Layout};
use crate::error::{Error, Result};
use crate::fields::Expr;
use crate::forms::standard_contact_form;
use crate::linalg;
use crate::symplin::{classify_subspace, contact_hyperplane, Classification, LinSubspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Equation {
    Xxx,
    Xxn,
    Xxy,
    Xny,
    Lambda,
}

impl Equation {
    /// The triple equation implied by the other three.
    pub fn redundant(self) -> bool {
        self == Equation::Xxx
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResidualEntry {
    pub equation: Equation,
    /// One-based indices `a, b, c` as in the equations.
    pub indices: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Residuals {
    pub entries: Vec<ResidualEntry>,
}

impl Residuals {
    /// Largest `|value|` among the non-redundant foliation equations.
    pub fn max_foliation(&self) -> f64 {
        self.max_where(|e| !e.redundant() && e != Equation::Lambda)
    }

    pub fn max_lambda(&self) -> f64 {
        self.max_where(|e| e == Equation::Lambda)
    }

    pub fn max_redundant(&self) -> f64 {
        self.max_where(Equation::redundant)
    }

    fn max_where(&self, keep: impl Fn(Equation) -> bool) -> f64 {
        self.entries
            .iter()
            .filter(|e| keep(e.equation))
            .fold(0.0, |m, e| m.max(e.value.abs()))
    }
}

/// The residual expressions of a standard-layout `k = n + 1` graph.
#[derive(Debug, Clone)]
pub struct ResidualSystem {
    terms: Vec<(Equation, Vec<usize>, Expr)>,
}

struct Partials {
    n: usize,
    /// `y_1..y_{n-1}` as functions on the source.
    y: Vec<Expr>,
    z: Expr,
}

impl Partials {
    /// `d y_a / d x_b` (both one-based).
    fn yx(&self, a: usize, b: usize) -> Expr {
        self.y[a - 1].diff(b - 1)
    }
    fn yy(&self, a: usize) -> Expr {
        self.y[a - 1].diff(self.n)
    }
    fn zx(&self, b: usize) -> Expr {
        self.z.diff(b - 1)
    }
    fn zy(&self) -> Expr {
        self.z.diff(self.n)
    }
    /// `dz/dx_a - y_a`, with `y_n` the free coordinate.
    fn p(&self, a: usize) -> Expr {
        let ya = if a == self.n {
            Expr::var(self.n)
        } else {
            self.y[a - 1].clone()
        };
        self.zx(a).sub(&ya)
    }
    fn curl(&self, a: usize, b: usize) -> Expr {
        self.yx(a, b).sub(&self.yx(b, a))
    }
}

pub(crate) fn require_standard_hypersurface_layout(y: &GraphSubmanifold, what: &str) -> Result<()> {
    if y.k() != y.n() + 1 {
        return Err(Error::Unsupported(format!(
            "{what} needs k = n + 1 (got n = {}, k = {}); use pointwise_coisotropy",
            y.n(),
            y.k()
        )));
    }
    if y.layout() != Layout::Standard {
        return Err(Error::Unsupported(format!(
            "{what} needs free coordinates x1..xn, yn"
        )));
    }
    Ok(())
}

impl ResidualSystem {
    pub fn new(y: &GraphSubmanifold) -> Result<Self> {
        require_standard_hypersurface_layout(y, "coisotropy_residuals")?;
        let n = y.n();
        let d = Partials {
            n,
            y: (1..n)
                .map(|a| y.component(&format!("y{a}")))
                .collect::<Result<_>>()?,
            z: y.component("z")?,
        };
        let mut terms = Vec::new();
        for a in 1..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let e = d
                        .p(a)
                        .mul(&d.curl(b, c))
                        .sub(&d.p(b).mul(&d.curl(a, c)))
                        .add(&d.p(c).mul(&d.curl(a, b)));
                    terms.push((Equation::Xxx, vec![a, b, c], e));
                }
            }
        }
        for a in 1..n {
            for b in a + 1..n {
                let e = d
                    .p(a)
                    .mul(&d.yx(b, n))
                    .sub(&d.p(b).mul(&d.yx(a, n)))
                    .add(&d.p(n).mul(&d.curl(a, b)));
                terms.push((Equation::Xxn, vec![a, b], e));
            }
        }
        for a in 1..n {
            for b in a + 1..n {
                let e = d
                    .p(a)
                    .mul(&d.yy(b))
                    .sub(&d.p(b).mul(&d.yy(a)))
                    .add(&d.zy().mul(&d.curl(a, b)));
                terms.push((Equation::Xxy, vec![a, b], e));
            }
        }
        for a in 1..n {
            let e = d
                .zx(a)
                .sub(&d.p(n).mul(&d.yy(a)))
                .add(&d.zy().mul(&d.yx(a, n)))
                .sub(&d.y[a - 1]);
            terms.push((Equation::Xny, vec![a], e));
        }
        for a in 1..n {
            for b in a + 1..n {
                let e = d
                    .yy(a)
                    .mul(&d.yx(b, n))
                    .sub(&d.yy(b).mul(&d.yx(a, n)))
                    .add(&d.curl(a, b));
                terms.push((Equation::Lambda, vec![a, b], e));
            }
        }
        Ok(Self { terms })
    }

    pub fn eval(&self, point: &[f64]) -> Residuals {
        Residuals {
            entries: self
                .terms
                .iter()
                .map(|(equation, indices, e)| ResidualEntry {
                    equation: *equation,
                    indices: indices.clone(),
                    value: e.eval(point),
                })
                .collect(),
        }
    }
}

pub fn coisotropy_residuals(y: &GraphSubmanifold, point: &[f64]) -> Result<Residuals> {
    y.source().check_point(point)?;
    Ok(ResidualSystem::new(y)?.eval(point))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCoisotropy {
    /// `T_p Y` lies inside `xi_p`.
    pub tangent_to_xi: bool,
    /// Dimension of `Y_xi(p) = T_p Y ∩ xi_p`.
    pub dim: usize,
    pub classification: Classification,
}

impl PointCoisotropy {
    pub fn coisotropic(&self) -> bool {
        self.classification.coisotropic
    }
}

/// Classifies `Y_xi(p)` inside `(xi_p, d alpha)`.
pub fn pointwise_coisotropy(y: &GraphSubmanifold, point: &[f64]) -> Result<PointCoisotropy> {
    y.source().check_point(point)?;
    let q = y.embedding().eval(point);
    let alpha = standard_contact_form(y.n());
    let hyper = contact_hyperplane(&alpha, &q)?;
    let tangent = linalg::normalize_columns(&y.embedding().jacobian(point));
    let a = DVector::from_vec(alpha.at(&q).as_covector());
    let row = a.transpose() * &tangent;
    let coeffs = linalg::null_space(
        &nalgebra::DMatrix::from_row_slice(1, row.len(), row.as_slice()),
        1e-12,
    );
    let tangent_to_xi = coeffs.ncols() == tangent.ncols();
    let y_xi = LinSubspace::span_of(&(&tangent * coeffs));
    let local = hyper.coords_of(&y_xi);
    Ok(PointCoisotropy {
        tangent_to_xi,
        dim: local.dim(),
        classification: classify_subspace(&local, &hyper.omega),
    })
}
