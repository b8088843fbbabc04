//! Lowering of the shared infix grammar to differential forms.
//!
//! On top of the scalar grammar, `d<name>` denotes the differential of a chart
//! coordinate, `d(expr)` the exterior derivative of a sub-expression and `^`
//! between two forms is the wedge product.

use super::DiffForm;
use crate::error::{Error, Result};
use crate::fields::parse::{parse_ast, Ast, BinOp, Span, SyntaxError};
use crate::fields::{integer_exponent, Chart, Expr};

enum Value {
    Scalar(Expr),
    Form(DiffForm),
}

impl Value {
    fn into_form(self, chart: &Chart) -> DiffForm {
        match self {
            Value::Scalar(e) => DiffForm::scalar_expr(chart, e),
            Value::Form(f) => f,
        }
    }
}

fn err(message: impl Into<String>, span: Span) -> Error {
    Error::Syntax(SyntaxError {
        message: message.into(),
        span,
    })
}

fn located(e: Error, span: Span) -> Error {
    match e {
        Error::Syntax(_) => e,
        other => err(other.to_string(), span),
    }
}

/// Parses a form such as `dz - y1*dx1` or `x1*dx1^dy1` on `chart`.
pub fn parse_form(chart: &Chart, src: &str) -> Result<DiffForm> {
    let ast = parse_ast(src)?;
    Ok(lower(&ast, chart)?.into_form(chart))
}

fn lower(ast: &Ast, chart: &Chart) -> Result<Value> {
    Ok(match ast {
        Ast::Num(v, _) => Value::Scalar(Expr::constant(*v)),
        Ast::Ident(name, span) => {
            if let Some(i) = chart.position(name) {
                Value::Scalar(Expr::var(i))
            } else if name == "pi" {
                Value::Scalar(Expr::constant(std::f64::consts::PI))
            } else if let Some(i) = name.strip_prefix('d').and_then(|rest| chart.position(rest)) {
                Value::Form(DiffForm::basis(chart, &[i])?)
            } else {
                return Err(err(format!("unknown identifier `{name}`"), *span));
            }
        }
        Ast::Neg(inner, _) => match lower(inner, chart)? {
            Value::Scalar(e) => Value::Scalar(e.neg()),
            Value::Form(f) => Value::Form(f.neg()),
        },
        Ast::Binary(op, a, b, span) => {
            let span = *span;
            if *op == BinOp::Pow {
                let lhs = lower(a, chart)?;
                return match lhs {
                    Value::Scalar(e) => match lower(b, chart)? {
                        Value::Scalar(_) => Ok(Value::Scalar(e.powi(integer_exponent(b, chart)?))),
                        Value::Form(_) => Err(err("wedge needs a form on the left", span)),
                    },
                    Value::Form(f) => match lower(b, chart)? {
                        Value::Form(g) => {
                            Ok(Value::Form(f.wedge(&g).map_err(|e| located(e, span))?))
                        }
                        Value::Scalar(_) => Err(err(
                            "wedge needs a form on the right; powers of forms are not supported",
                            span,
                        )),
                    },
                };
            }
            let lhs = lower(a, chart)?;
            let rhs = lower(b, chart)?;
            match (op, lhs, rhs) {
                (BinOp::Add, Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x.add(&y)),
                (BinOp::Sub, Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x.sub(&y)),
                (BinOp::Mul, Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x.mul(&y)),
                (BinOp::Div, Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x.div(&y)),
                (BinOp::Add | BinOp::Sub, x, y) => {
                    let (x, y) = (x.into_form(chart), y.into_form(chart));
                    let out = if *op == BinOp::Add {
                        x.add(&y)
                    } else {
                        x.sub(&y)
                    };
                    Value::Form(out.map_err(|e| located(e, span))?)
                }
                (BinOp::Mul, Value::Scalar(s), Value::Form(f))
                | (BinOp::Mul, Value::Form(f), Value::Scalar(s)) => Value::Form(f.scale(&s)),
                (BinOp::Mul, Value::Form(_), Value::Form(_)) => {
                    return Err(err("use `^` to multiply two forms", span))
                }
                (BinOp::Div, Value::Form(f), Value::Scalar(s)) => {
                    Value::Form(f.scale(&Expr::one().div(&s)))
                }
                (BinOp::Div, _, Value::Form(_)) => {
                    return Err(err("cannot divide by a form", span))
                }
                (BinOp::Pow, ..) => unreachable!(),
            }
        }
        Ast::Call(name, arg, span) => {
            let inner = lower(arg, chart)?;
            match (name.as_str(), inner) {
                ("d", v) => {
                    let f = v.into_form(chart);
                    Value::Form(f.exterior_d().map_err(|e| located(e, *span))?)
                }
                (f @ ("sin" | "cos" | "exp"), Value::Scalar(e)) => Value::Scalar(match f {
                    "sin" => e.sin(),
                    "cos" => e.cos(),
                    _ => e.exp(),
                }),
                ("sin" | "cos" | "exp", Value::Form(_)) => {
                    return Err(err(format!("`{name}` of a form"), *span))
                }
                _ => return Err(err(format!("unknown function `{name}`"), *span)),
            }
        }
    })
}
