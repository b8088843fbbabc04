//! Expression trees over chart coordinates.
//!
//! Nodes are reference counted and immutable, so cloning an [`Expr`] is cheap
//! and derivative trees share the subtrees they were built from. The smart
//! constructors fold constants and absorb `0`/`1`; nothing else is rewritten.

use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
}

impl Expr {
    fn wrap(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Self {
        Self::wrap(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(index: usize) -> Self {
        Self::wrap(Node::Var(index))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Self::wrap(Node::Neg(self.clone())),
        }
    }

    pub fn add(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(0.0), _) => rhs.clone(),
            (_, Some(0.0)) => self.clone(),
            _ => match rhs.node() {
                Node::Neg(inner) => Self::wrap(Node::Sub(self.clone(), inner.clone())),
                _ => Self::wrap(Node::Add(self.clone(), rhs.clone())),
            },
        }
    }

    pub fn sub(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (Some(0.0), _) => rhs.neg(),
            (_, Some(0.0)) => self.clone(),
            _ => match rhs.node() {
                Node::Neg(inner) => Self::wrap(Node::Add(self.clone(), inner.clone())),
                _ => Self::wrap(Node::Sub(self.clone(), rhs.clone())),
            },
        }
    }

    pub fn mul(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(0.0), _) => Expr::zero(),
            (_, Some(0.0)) => Expr::zero(),
            (Some(1.0), _) => rhs.clone(),
            (_, Some(1.0)) => self.clone(),
            (Some(-1.0), _) => rhs.neg(),
            (_, Some(-1.0)) => self.neg(),
            _ => Self::wrap(Node::Mul(self.clone(), rhs.clone())),
        }
    }

    pub fn div(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::constant(a / b),
            (Some(0.0), _) => Expr::zero(),
            (_, Some(1.0)) => self.clone(),
            _ => Self::wrap(Node::Div(self.clone(), rhs.clone())),
        }
    }

    pub fn powi(&self, exp: i32) -> Expr {
        match (self.as_const(), exp) {
            (_, 0) => Expr::one(),
            (_, 1) => self.clone(),
            (Some(c), e) => Expr::constant(c.powi(e)),
            _ => Self::wrap(Node::Pow(self.clone(), exp)),
        }
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Self::wrap(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Self::wrap(Node::Cos(self.clone())),
        }
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Self::wrap(Node::Exp(self.clone())),
        }
    }

    /// Exact partial derivative with respect to coordinate `var`.
    pub fn diff(&self, var: usize) -> Expr {
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => a.diff(var).neg(),
            Node::Add(a, b) => a.diff(var).add(&b.diff(var)),
            Node::Sub(a, b) => a.diff(var).sub(&b.diff(var)),
            Node::Mul(a, b) => a.diff(var).mul(b).add(&a.mul(&b.diff(var))),
            Node::Div(a, b) => {
                let da = a.diff(var);
                let db = b.diff(var);
                da.div(b).sub(&a.mul(&db).div(&b.powi(2)))
            }
            Node::Pow(a, e) => {
                let da = a.diff(var);
                Expr::constant(*e as f64).mul(&a.powi(e - 1)).mul(&da)
            }
            Node::Sin(a) => a.cos().mul(&a.diff(var)),
            Node::Cos(a) => a.sin().neg().mul(&a.diff(var)),
            Node::Exp(a) => self.mul(&a.diff(var)),
        }
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        match self.node() {
            Node::Const(c) => *c,
            Node::Var(i) => point[*i],
            Node::Neg(a) => -a.eval(point),
            Node::Add(a, b) => a.eval(point) + b.eval(point),
            Node::Sub(a, b) => a.eval(point) - b.eval(point),
            Node::Mul(a, b) => a.eval(point) * b.eval(point),
            Node::Div(a, b) => a.eval(point) / b.eval(point),
            Node::Pow(a, e) => a.eval(point).powi(*e),
            Node::Sin(a) => a.eval(point).sin(),
            Node::Cos(a) => a.eval(point).cos(),
            Node::Exp(a) => a.eval(point).exp(),
        }
    }

    /// Replaces every `Var(i)` by `values[i]`.
    pub fn substitute(&self, values: &[Expr]) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => values[*i].clone(),
            Node::Neg(a) => a.substitute(values).neg(),
            Node::Add(a, b) => a.substitute(values).add(&b.substitute(values)),
            Node::Sub(a, b) => a.substitute(values).sub(&b.substitute(values)),
            Node::Mul(a, b) => a.substitute(values).mul(&b.substitute(values)),
            Node::Div(a, b) => a.substitute(values).div(&b.substitute(values)),
            Node::Pow(a, e) => a.substitute(values).powi(*e),
            Node::Sin(a) => a.substitute(values).sin(),
            Node::Cos(a) => a.substitute(values).cos(),
            Node::Exp(a) => a.substitute(values).exp(),
        }
    }

    /// Highest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self.node() {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Pow(a, _) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) => {
                a.max_var()
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) | Node::Pow(a, _) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) => {
                a.depends_on(var)
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
        }
    }

    /// Renders the tree with the given coordinate names, in a form the
    /// expression parser reads back to the same tree.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }

    pub(crate) fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl ExprDisplay<'_> {
    fn child<'b>(&'b self, e: &'b Expr) -> ExprDisplay<'b> {
        ExprDisplay {
            expr: e,
            names: self.names,
        }
    }

    fn write_operand(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if e.precedence() < min_prec {
            write!(f, "({})", self.child(e))
        } else {
            write!(f, "{}", self.child(e))
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr.node() {
            Node::Const(c) => {
                if *c < 0.0 {
                    write!(f, "-{}", fmt_number(-c))
                } else {
                    write!(f, "{}", fmt_number(*c))
                }
            }
            Node::Var(i) => match self.names.get(*i) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "#{i}"),
            },
            Node::Neg(a) => {
                write!(f, "-")?;
                self.write_operand(f, a, 4)
            }
            Node::Add(a, b) => {
                self.write_operand(f, a, 1)?;
                write!(f, " + ")?;
                self.write_operand(f, b, 2)
            }
            Node::Sub(a, b) => {
                self.write_operand(f, a, 1)?;
                write!(f, " - ")?;
                self.write_operand(f, b, 2)
            }
            Node::Mul(a, b) => {
                self.write_operand(f, a, 2)?;
                write!(f, "*")?;
                self.write_operand(f, b, 3)
            }
            Node::Div(a, b) => {
                self.write_operand(f, a, 2)?;
                write!(f, "/")?;
                self.write_operand(f, b, 3)
            }
            Node::Pow(a, e) => {
                self.write_operand(f, a, 5)?;
                if *e < 0 {
                    write!(f, "^({e})")
                } else {
                    write!(f, "^{e}")
                }
            }
            Node::Sin(a) => write!(f, "sin({})", self.child(a)),
            Node::Cos(a) => write!(f, "cos({})", self.child(a)),
            Node::Exp(a) => write!(f, "exp({})", self.child(a)),
        }
    }
}

/// Shortest decimal that parses back to the same `f64`, never in exponent form.
fn fmt_number(c: f64) -> String {
    let s = format!("{c}");
    if s.contains('e') || s.contains("inf") || s.contains("NaN") {
        format!("{c:e}")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var(0)
    }
    fn y() -> Expr {
        Expr::var(1)
    }

    #[test]
    fn constant_folding_and_absorption() {
        assert!(Expr::constant(2.0).mul(&Expr::zero()).is_zero());
        assert_eq!(x().mul(&Expr::one()), x());
        assert_eq!(Expr::zero().add(&y()), y());
        assert_eq!(
            Expr::constant(3.0).add(&Expr::constant(4.0)).as_const(),
            Some(7.0)
        );
        assert_eq!(x().neg().neg(), x());
        assert!(x().powi(0).is_one());
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        assert!(Expr::constant(5.0).diff(0).is_zero());
    }

    #[test]
    fn product_rule() {
        let e = x().mul(&y());
        assert_eq!(e.diff(0).eval(&[3.0, 2.0]), 2.0);
        assert_eq!(e.diff(1).eval(&[3.0, 2.0]), 3.0);
    }

    #[test]
    fn chain_rule_for_transcendentals() {
        let e = x().mul(&y()).sin();
        let d = e.diff(0).eval(&[1.0, std::f64::consts::PI]);
        assert!((d + std::f64::consts::PI).abs() < 1e-12);
        let q = x().div(&y().add(&Expr::constant(2.0)));
        let dq = q.diff(1).eval(&[3.0, 1.0]);
        assert!((dq + 3.0 / 9.0).abs() < 1e-15);
        let p = x().powi(-2);
        assert!((p.diff(0).eval(&[2.0]) + 2.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn substitution_composes() {
        let e = x().mul(&x()).add(&y());
        let s = e.substitute(&[y().exp(), Expr::constant(1.0)]);
        assert!((s.eval(&[0.0, 0.5]) - (1.0f64.exp() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn display_is_parenthesized_by_precedence() {
        let names = vec!["x".to_string(), "y".to_string()];
        let e = x().add(&y()).mul(&x().sub(&y())).powi(2);
        assert_eq!(e.display(&names).to_string(), "((x + y)*(x - y))^2");
        let e = x().sub(&y().sub(&x()));
        assert_eq!(e.display(&names).to_string(), "x - (y - x)");
        assert_eq!(
            Expr::constant(-0.5).mul(&x()).display(&names).to_string(),
            "-0.5*x"
        );
    }
}
