//! Coordinate expressions from scenario documents.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter than
//! unary minus):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Names are either constants (`pi`, `e`), functions, or variables from the
//! list handed to [`Expr::parse`]. Evaluation is generic over [`Scalar`], so
//! every expression is differentiable to any order.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Asin,
    Acos,
    Atan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "asin" => Func::Asin,
            "acos" => Func::Acos,
            "atan" => Func::Atan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Asin => x.asin(),
            Func::Acos => x.acos(),
            Func::Atan => x.atan(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    PowI(Box<Node>, i32),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with its source text and variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    vars: Vec<String>,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens: &tokens, pos: 0, vars };
        let root = p.expr()?;
        if p.pos != tokens.len() {
            return Err(Error::ConfigParse(format!(
                "unexpected `{}` in expression `{src}`",
                tokens[p.pos]
            )));
        }
        Ok(Expr {
            source: src.to_string(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            root,
        })
    }

    /// Parses with variables `prefix0 .. prefix{count-1}`.
    pub fn parse_indexed(src: &str, prefix: &str, count: usize) -> Result<Expr> {
        let names: Vec<String> = (0..count).map(|i| format!("{prefix}{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Expr::parse(src, &refs)
    }

    pub fn constant(v: f64) -> Expr {
        Expr { source: format!("{v}"), vars: Vec::new(), root: Node::Num(v) }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        eval(&self.root, x)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl crate::diff::ScalarFn for Expr {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        Expr::eval(self, x)
    }
}

fn eval<S: Scalar>(n: &Node, x: &[S]) -> S {
    match n {
        Node::Num(v) => S::from_f64(*v),
        Node::Var(i) => x[*i],
        Node::Neg(a) => -eval(a, x),
        Node::Add(a, b) => eval(a, x) + eval(b, x),
        Node::Sub(a, b) => eval(a, x) - eval(b, x),
        Node::Mul(a, b) => eval(a, x) * eval(b, x),
        Node::Div(a, b) => eval(a, x) / eval(b, x),
        Node::PowI(a, k) => eval(a, x).powi(*k),
        Node::Pow(a, b) => eval(a, x).powf(eval(b, x)),
        Node::Call(f, a) => f.apply(eval(a, x)),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "{v}"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Op(c) => write!(f, "{c}"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::ConfigParse(format!("bad number `{text}` in `{src}`")))?;
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::ConfigParse(format!("unexpected character `{c}` in `{src}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Tok],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_op() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::ConfigParse(format!("expected `{c}` at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            if let Node::Num(v) = exp {
                if v.fract() == 0.0 && v.abs() <= 64.0 {
                    return Ok(Node::PowI(Box::new(base), v as i32));
                }
            }
            if let Node::Neg(inner) = &exp {
                if let Node::Num(v) = **inner {
                    if v.fract() == 0.0 && v.abs() <= 64.0 {
                        return Ok(Node::PowI(Box::new(base), -(v as i32)));
                    }
                }
            }
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::ConfigParse("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => Err(Error::ConfigParse(format!(
                        "unknown name `{name}` (variables: {:?})",
                        self.vars
                    ))),
                }
            }
            Tok::Op(c) => Err(Error::ConfigParse(format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Dual;

    #[test]
    fn precedence_and_power() {
        let e = Expr::parse("1 + 2*x^2 - -3", &["x"]).unwrap();
        assert_eq!(e.eval(&[2.0]), 12.0);
        let e = Expr::parse("-x^2", &["x"]).unwrap();
        assert_eq!(e.eval(&[3.0]), -9.0);
        let e = Expr::parse("2^3^2", &[]).unwrap();
        assert!((e.eval::<f64>(&[]) - 512.0).abs() < 1e-9);
    }

    #[test]
    fn functions_constants_and_derivatives() {
        let e = Expr::parse("sin(pi*t)*exp(t) + sqrt(1+u0^2)", &["t", "u0"]).unwrap();
        let t = 0.3;
        let u = 0.7;
        let want = (std::f64::consts::PI * t).sin() * t.exp() + (1.0 + u * u).sqrt();
        assert!((e.eval(&[t, u]) - want).abs() < 1e-15);
        let d = e.eval(&[Dual::constant(t), Dual::variable(u)]);
        assert!((d.eps - u / (1.0 + u * u).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn scientific_notation_and_errors() {
        let e = Expr::parse("1.5e-1*x", &["x"]).unwrap();
        assert!((e.eval(&[2.0]) - 0.3).abs() < 1e-15);
        assert!(matches!(Expr::parse("y+1", &["x"]), Err(Error::ConfigParse(_))));
        assert!(matches!(Expr::parse("(x", &["x"]), Err(Error::ConfigParse(_))));
        assert!(matches!(Expr::parse("x $ 2", &["x"]), Err(Error::ConfigParse(_))));
    }

    #[test]
    fn indexed_variables() {
        let e = Expr::parse_indexed("x0*x2 - x1", "x", 3).unwrap();
        assert_eq!(e.arity(), 3);
        assert_eq!(e.eval(&[2.0, 1.0, 4.0]), 7.0);
    }
}
