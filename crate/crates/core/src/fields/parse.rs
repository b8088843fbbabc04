//! Infix expression grammar shared by scalar fields and differential forms.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```
//!
//! The parser only builds a syntax tree with byte spans; lowering to an
//! [`Expr`](super::Expr) or a form happens against a chart so unknown names can
//! be reported at their source position.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntaxError {
    pub message: String,
    pub span: Span,
}

impl SyntaxError {
    fn new(message: impl Into<String>, span: Span) -> Self {
        Self {
            message: message.into(),
            span,
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}", self.message, self.span.start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Num(f64, Span),
    Ident(String, Span),
    Neg(Box<Ast>, Span),
    Binary(BinOp, Box<Ast>, Box<Ast>, Span),
    Call(String, Box<Ast>, Span),
}

impl Ast {
    pub fn span(&self) -> Span {
        match self {
            Ast::Num(_, s)
            | Ast::Ident(_, s)
            | Ast::Neg(_, s)
            | Ast::Binary(_, _, _, s)
            | Ast::Call(_, _, s) => *s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| {
                SyntaxError::new(format!("malformed number `{text}`"), Span { start, end: i })
            })?;
            out.push((Tok::Num(value), Span { start, end: i }));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((
                Tok::Ident(src[start..i].to_string()),
                Span { start, end: i },
            ));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    let end = start + c.len_utf8();
                    return Err(SyntaxError::new(
                        format!("unexpected character `{c}`"),
                        Span { start, end },
                    ));
                }
            };
            i += 1;
            out.push((tok, Span { start, end: i }));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn eof_span(&self) -> Span {
        Span {
            start: self.len,
            end: self.len,
        }
    }

    fn next(&mut self) -> Option<(Tok, Span)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn sum(&mut self) -> Result<Ast, SyntaxError> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            let (_, op_span) = self.next().unwrap();
            if self.peek().is_none() {
                return Err(SyntaxError::new(
                    format!("expected an operand after trailing `{op}`"),
                    op_span,
                ));
            }
            let rhs = self.product()?;
            let span = Span {
                start: lhs.span().start,
                end: rhs.span().end,
            };
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Ast, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            let (_, op_span) = self.next().unwrap();
            if self.peek().is_none() {
                return Err(SyntaxError::new(
                    format!("expected an operand after trailing `{op}`"),
                    op_span,
                ));
            }
            let rhs = self.unary()?;
            let span = Span {
                start: lhs.span().start,
                end: rhs.span().end,
            };
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast, SyntaxError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                let (_, s) = self.next().unwrap();
                let inner = self.unary()?;
                let span = Span {
                    start: s.start,
                    end: inner.span().end,
                };
                Ok(Ast::Neg(Box::new(inner), span))
            }
            Some(Tok::Op('+')) => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast, SyntaxError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            let (_, op_span) = self.next().unwrap();
            if self.peek().is_none() {
                return Err(SyntaxError::new(
                    "expected an operand after trailing `^`",
                    op_span,
                ));
            }
            let exp = self.unary()?;
            let span = Span {
                start: base.span().start,
                end: exp.span().end,
            };
            return Ok(Ast::Binary(BinOp::Pow, Box::new(base), Box::new(exp), span));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, SyntaxError> {
        let eof = self.eof_span();
        match self.next() {
            Some((Tok::Num(v), s)) => Ok(Ast::Num(v, s)),
            Some((Tok::Ident(name), s)) => {
                if let Some(Tok::LParen) = self.peek() {
                    self.next();
                    let arg = self.sum()?;
                    match self.next() {
                        Some((Tok::RParen, close)) => Ok(Ast::Call(
                            name,
                            Box::new(arg),
                            Span {
                                start: s.start,
                                end: close.end,
                            },
                        )),
                        Some((_, bad)) => Err(SyntaxError::new("expected `)`", bad)),
                        None => Err(SyntaxError::new("unclosed `(`", eof)),
                    }
                } else {
                    Ok(Ast::Ident(name, s))
                }
            }
            Some((Tok::LParen, _)) => {
                let inner = self.sum()?;
                match self.next() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    Some((_, bad)) => Err(SyntaxError::new("expected `)`", bad)),
                    None => Err(SyntaxError::new("unclosed `(`", eof)),
                }
            }
            Some((Tok::Op(c), s)) => Err(SyntaxError::new(format!("unexpected `{c}`"), s)),
            Some((Tok::RParen, s)) => Err(SyntaxError::new("unexpected `)`", s)),
            None => Err(SyntaxError::new("unexpected end of expression", eof)),
        }
    }
}

/// Parses `src` into a syntax tree.
pub fn parse_ast(src: &str) -> Result<Ast, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        len: src.len(),
    };
    let ast = p.sum()?;
    if let Some((_, s)) = p.next() {
        return Err(SyntaxError::new("unexpected trailing input", s));
    }
    Ok(ast)
}
