//! Arithmetic expressions for user-defined fields.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | atom
//! atom   := number | variable | constant | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp
//! const  := pi | e
//! var    := x1 .. xN | u | v
//! ```
//!
//! `×`, `÷` and `−` are accepted as synonyms of `*`, `/` and `-`.
//! Coordinates are 1-based: `x1` is the first chart coordinate.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("expression error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// 0-based chart coordinate.
    Coord(usize),
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let mut p = Parser { src, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Evaluates with chart coordinates `x` and torus parameters `(u, v)`.
    /// Unbound variables evaluate to NaN; use [`Expr::check_vars`] first.
    pub fn eval(&self, x: &[f64], uv: (f64, f64)) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var(Var::Coord(i)) => x.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Var(Var::U) => uv.0,
            Expr::Var(Var::V) => uv.1,
            Expr::Neg(a) => -a.eval(x, uv),
            Expr::Add(a, b) => a.eval(x, uv) + b.eval(x, uv),
            Expr::Sub(a, b) => a.eval(x, uv) - b.eval(x, uv),
            Expr::Mul(a, b) => a.eval(x, uv) * b.eval(x, uv),
            Expr::Div(a, b) => a.eval(x, uv) / b.eval(x, uv),
            Expr::Call(f, a) => {
                let v = a.eval(x, uv);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
        }
    }

    fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Neg(a) | Expr::Call(_, a) => a.visit_vars(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Rejects coordinates beyond `dim` and, unless `allow_uv`, `u`/`v`.
    pub fn check_vars(&self, dim: usize, allow_uv: bool) -> Result<(), String> {
        let mut bad = None;
        self.visit_vars(&mut |v| match v {
            Var::Coord(i) if i >= dim => bad = Some(format!("x{} used on a {dim}-dimensional chart", i + 1)),
            Var::U | Var::V if !allow_uv => bad = Some("u, v are only available in torus maps".into()),
            _ => {}
        });
        bad.map_or(Ok(()), Err)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var(Var::Coord(i)) => write!(f, "x{}", i + 1),
            Expr::Var(Var::U) => f.write_str("u"),
            Expr::Var(Var::V) => f.write_str("v"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: &str) -> ParseError {
        ParseError { pos: self.pos, msg: msg.into() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    /// Consumes one of `options` after whitespace.
    fn eat(&mut self, options: &[&str]) -> bool {
        self.skip_ws();
        for o in options {
            if self.rest().starts_with(o) {
                self.pos += o.len();
                return true;
            }
        }
        false
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&["+"]) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&["-", "−"]) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&["*", "×"]) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(&["/", "÷"]) {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&["-", "−"]) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let c = match self.rest().chars().next() {
            Some(c) => c,
            None => return Err(self.error("unexpected end of expression")),
        };
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(&[")"]) {
                return Err(self.error("expected ')'"));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if !c.is_ascii_alphabetic() {
            return Err(self.error(&format!("unexpected character '{c}'")));
        }
        let len = self.rest().find(|c: char| !c.is_ascii_alphanumeric() && c != '_').unwrap_or(self.rest().len());
        let word = &self.rest()[..len];
        self.pos += len;
        let func = match word {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        };
        if let Some(f) = func {
            if !self.eat(&["("]) {
                return Err(self.error(&format!("expected '(' after {word}")));
            }
            let arg = self.expr()?;
            if !self.eat(&[")"]) {
                return Err(self.error("expected ')'"));
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        match word {
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "e" => Ok(Expr::Num(std::f64::consts::E)),
            "u" => Ok(Expr::Var(Var::U)),
            "v" => Ok(Expr::Var(Var::V)),
            w if w.starts_with('x') => match w[1..].parse::<usize>() {
                Ok(i) if i >= 1 => Ok(Expr::Var(Var::Coord(i - 1))),
                _ => Err(ParseError { pos: start, msg: format!("bad coordinate name '{w}' (use x1, x2, ...)") }),
            },
            w => Err(ParseError { pos: start, msg: format!("unknown name '{w}'") }),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let bytes = self.rest().as_bytes();
        let mut end = 0;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.rest()[..end];
        let value = text.parse::<f64>().map_err(|_| self.error(&format!("bad number '{text}'")))?;
        self.pos += end;
        Ok(Expr::Num(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: &[f64]) -> f64 {
        Expr::parse(s).unwrap().eval(x, (0.5, 0.25))
    }

    #[test]
    fn precedence_and_functions() {
        assert_eq!(ev("1 + 2 * 3", &[]), 7.0);
        assert_eq!(ev("(1 + 2) * 3", &[]), 9.0);
        assert_eq!(ev("8 / 2 / 2", &[]), 2.0);
        assert_eq!(ev("2 - 3 - 4", &[]), -5.0);
        assert_eq!(ev("-x1 * 2", &[1.5]), -3.0);
        assert_eq!(ev("2 × 3 ÷ 4 − 1", &[]), 0.5);
        assert!((ev("0.2*sin(x1)", &[1.0]) - 0.2 * 1f64.sin()).abs() < 1e-16);
        assert!((ev("exp(2*x2) + cos(pi)", &[0.0, 0.3]) - (0.6f64.exp() - 1.0)).abs() < 1e-15);
        assert_eq!(ev("u + v", &[]), 0.75);
        assert_eq!(ev("1.5e-1 + 2E1", &[]), 20.15);
        assert_eq!(ev("e", &[]), std::f64::consts::E);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "1 +", "sin x1", "(1", "x0", "foo(1)", "1 2", "#"] {
            assert!(Expr::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn variable_checks() {
        let e = Expr::parse("x3 + u").unwrap();
        assert!(e.check_vars(3, true).is_ok());
        assert!(e.check_vars(2, true).is_err());
        assert!(e.check_vars(3, false).is_err());
    }

    #[test]
    fn display_round_trips() {
        let e = Expr::parse("0.2 * sin(x1) - -exp(u / 2)").unwrap();
        let again = Expr::parse(&e.to_string()).unwrap();
        assert_eq!(e.eval(&[0.7], (0.3, 0.0)), again.eval(&[0.7], (0.3, 0.0)));
    }
}
