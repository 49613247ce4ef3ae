//! Text syntax for polynomials: integer or rational coefficients times
//! monomials in named variables, e.g. `u0^3 + 3*d0*u0 - p`. Names that are
//! not declared variables resolve to field constants (`p`, `pi`, uniformizer
//! names, `t1..tm`, `w`).

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::gauss::{GaussPoly, VarSet};

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(i128),
    Name(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i128),
    Name(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let txt: String = cs[st..i].iter().collect();
            let v = txt.parse::<i128>().map_err(|_| Error::Parse(format!("number too large: {}", txt)))?;
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Name(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character `{}`", c)));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = if self.eat('-') {
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.power()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.power()?));
            } else if matches!(self.peek(), Some(Tok::Name(_)) | Some(Tok::Op('('))) {
                // implicit multiplication, e.g. `3u0` or `2(x+1)`
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Num(n)) if n >= 0 && n <= u32::MAX as i128 => {
                    self.pos += 1;
                    Ok(Expr::Pow(Box::new(base), n as u32))
                }
                _ => Err(Error::Parse("exponent must be a non-negative integer".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Name(s)) => {
                self.pos += 1;
                Ok(Expr::Name(s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing `)`".into()));
                }
                Ok(e)
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.power()?)))
            }
            other => Err(Error::Parse(format!("unexpected token {:?}", other))),
        }
    }
}

/// Parses polynomial text into an expression tree.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(e)
}

impl Expr {
    /// Degree in the named variable (other names count as constants).
    pub fn degree_in(&self, var: &str) -> Result<usize> {
        Ok(match self {
            Expr::Num(_) => 0,
            Expr::Name(n) => usize::from(n == var),
            Expr::Add(a, b) | Expr::Sub(a, b) => a.degree_in(var)?.max(b.degree_in(var)?),
            Expr::Mul(a, b) => a.degree_in(var)? + b.degree_in(var)?,
            Expr::Div(a, b) => {
                if b.degree_in(var)? > 0 {
                    return Err(Error::Parse(format!("division by an expression involving `{}`", var)));
                }
                a.degree_in(var)?
            }
            Expr::Pow(a, k) => a.degree_in(var)? * (*k as usize),
            Expr::Neg(a) => a.degree_in(var)?,
        })
    }

    /// Names occurring in the expression.
    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_names(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Name(n) => out.push(n.clone()),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Expr::Pow(a, _) | Expr::Neg(a) => a.collect_names(out),
        }
    }
}

/// Degree of polynomial text in `var`.
pub fn degree_in(text: &str, var: &str) -> Result<usize> {
    parse_expr(text)?.degree_in(var)
}

fn eval(e: &Expr, field: &Field, vars: &Arc<VarSet>, trunc: Option<u32>) -> Result<GaussPoly> {
    let konst = |c: Elem| GaussPoly::constant(field, vars, trunc, c);
    match e {
        Expr::Num(n) => konst(Elem::from_int(field, *n)),
        Expr::Name(n) => {
            if vars.index(n).is_some() {
                GaussPoly::var(field, vars, trunc, n)
            } else if let Some(c) = field.constant(n) {
                konst(c)
            } else {
                Err(Error::Parse(format!("unknown name `{}`", n)))
            }
        }
        Expr::Add(a, b) => eval(a, field, vars, trunc)?.add(&eval(b, field, vars, trunc)?),
        Expr::Sub(a, b) => eval(a, field, vars, trunc)?.sub(&eval(b, field, vars, trunc)?),
        Expr::Mul(a, b) => eval(a, field, vars, trunc)?.mul(&eval(b, field, vars, trunc)?),
        Expr::Div(a, b) => {
            let den = eval(b, field, vars, trunc)?;
            if !den.is_constant() {
                return Err(Error::Parse("division by a non-constant".into()));
            }
            let inv = den.constant_term().inv().map_err(|_| Error::Parse("division by zero".into()))?;
            Ok(eval(a, field, vars, trunc)?.scale(&inv))
        }
        Expr::Pow(a, k) => eval(a, field, vars, trunc)?.pow(*k),
        Expr::Neg(a) => Ok(eval(a, field, vars, trunc)?.neg()),
    }
}

/// Parses `text` as a polynomial over `field` in the declared variables.
pub fn parse_poly(field: &Field, text: &str, vars: &Arc<VarSet>, trunc: Option<u32>) -> Result<GaussPoly> {
    eval(&parse_expr(text)?, field, vars, trunc)
}

/// Dense coefficients (constant first) of a univariate polynomial text.
pub fn univariate_over(field: &Field, text: &str, var: &str) -> Result<Vec<Elem>> {
    let vars = VarSet::new(&[var]);
    parse_poly(field, text, &vars, None)?.univariate_coeffs(0)
}

/// Renders an integer polynomial (constant first) in the text syntax.
pub fn int_poly_text(coeffs: &[i64], var: &str) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (i, c) in coeffs.iter().enumerate().rev() {
        if *c == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{}^{}", var, i),
        };
        let mag = c.unsigned_abs();
        let body = if mono.is_empty() {
            format!("{}", mag)
        } else if mag == 1 {
            mono
        } else {
            format!("{}*{}", mag, mono)
        };
        if parts.is_empty() {
            parts.push(if *c < 0 { format!("-{}", body) } else { body });
        } else {
            parts.push(format!("{} {}", if *c < 0 { "-" } else { "+" }, body));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldDescription};

    #[test]
    fn parses_and_evaluates() {
        let k = make_field(&FieldDescription::qp(3, 20)).unwrap();
        let vars = VarSet::new(&["u0", "d0"]);
        let g = parse_poly(&k, "u0^3 + 3*d0*u0 - p", &vars, None).unwrap();
        assert_eq!(g.num_terms(), 3);
        assert_eq!(degree_in("T^3 + pi*T^2 - pi", "T").unwrap(), 3);
        assert_eq!(int_poly_text(&[-3, 0, 1], "x"), "x^2 - 3");
        assert!(parse_expr("x +").is_err());
    }
}
