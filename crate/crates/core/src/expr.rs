//! A small arithmetic expression language.
//!
//! Grammar: numbers, identifiers (`x`, `y`, `pi`, `e` and any caller-bound
//! name), `+ - * / ^`, unary minus, the functions `sin cos exp log abs sqrt`
//! and parentheses. `^` is right-associative and binds tighter than unary
//! minus, so `-2^2 = -4`.
//!
//! Scenario files use it for data fields; bound reports use it to write their
//! final formula in terms of the traced constants so that the trace can be
//! audited independently of the code that produced it.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Abs => v.abs(),
            Func::Sqrt => v.sqrt(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn parse_error(pos: usize, message: impl Into<String>) -> Error {
    Error::Parse { location: format!("column {}", pos + 1), message: message.into() }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
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
            let v: f64 = text.parse().map_err(|_| parse_error(start, format!("bad number `{text}`")))?;
            out.push((start, Token::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(src[start..i].to_string())));
        } else if "+-*/^".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else if c == '(' {
            out.push((i, Token::LParen));
            i += 1;
        } else if c == ')' {
            out.push((i, Token::RParen));
            i += 1;
        } else {
            return Err(parse_error(i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { Op::Add } else { Op::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { Op::Mul } else { Op::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if let Some(Token::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.here();
        let Some((_, tok)) = self.tokens.get(self.pos).cloned() else {
            return Err(parse_error(at, "unexpected end of expression"));
        };
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if self.peek() != Some(&Token::LParen) {
                        return Err(parse_error(self.here(), format!("`{name}` must be followed by `(`")));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Token::Op(c) => Err(parse_error(at, format!("unexpected operator `{c}`"))),
            Token::RParen => Err(parse_error(at, "unexpected `)`")),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&Token::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            Err(parse_error(self.here(), "expected `)`"))
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut parser = Parser { tokens, pos: 0, end: src.len() };
        let e = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(parse_error(parser.here(), "trailing input"));
        }
        Ok(e)
    }

    /// Evaluates with `lookup` resolving every identifier other than `pi` and `e`.
    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(name) => match name.as_str() {
                "pi" => std::f64::consts::PI,
                "e" => std::f64::consts::E,
                _ => lookup(name).ok_or_else(|| Error::Parse {
                    location: format!("identifier `{name}`"),
                    message: "unknown variable".into(),
                })?,
            },
            Expr::Neg(inner) => -inner.eval_with(lookup)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval_with(lookup)?, b.eval_with(lookup)?);
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, arg) => f.apply(arg.eval_with(lookup)?),
        })
    }

    pub fn eval_map(&self, vars: &HashMap<String, f64>) -> Result<f64> {
        self.eval_with(&|name| vars.get(name).copied())
    }

    /// Evaluates with `x`, `y` bound to a point and nothing else.
    pub fn eval_xy(&self, x: f64, y: f64) -> Result<f64> {
        self.eval_with(&|name| match name {
            "x" => Some(x),
            "y" => Some(y),
            _ => None,
        })
    }

    /// Every free identifier, excluding the built-in constants.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(n) if n == "pi" || n == "e" => {}
            Expr::Var(n) => out.push(n.clone()),
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(n) => f.write_str(n),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    Op::Add => "+",
                    Op::Sub => "-",
                    Op::Mul => "*",
                    Op::Div => "/",
                    Op::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
