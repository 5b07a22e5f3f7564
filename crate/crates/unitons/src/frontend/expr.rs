//! Polynomial expressions in z and z̄ used to specify uniton frames.
//!
//! Grammar (usual precedence, left association, ^ binds tightest):
//!
//!   expr  := term  (('+' | '-') term)*
//!   term  := unary ('*' unary)*
//!   unary := '-' unary | power
//!   power := atom ('^' nat)*
//!   atom  := number | number 'i' | 'i' | 'z' | 'zbar' | '(' expr ')'
//!
//! Exponents must be nonnegative integer literals; there is no division,
//! so evaluation is exact polynomial arithmetic in z and z̄.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Complex64),
    Z,
    ZBar,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Expr::Lit(c) => *c,
            Expr::Z => z,
            Expr::ZBar => z.conj(),
            Expr::Neg(e) => -e.eval(z),
            Expr::Add(a, b) => a.eval(z) + b.eval(z),
            Expr::Sub(a, b) => a.eval(z) - b.eval(z),
            Expr::Mul(a, b) => a.eval(z) * b.eval(z),
            Expr::Pow(b, k) => b.eval(z).powu(*k),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let wrap = self.prec() < min;
        if wrap {
            write!(f, "(")?;
        }
        match self {
            Expr::Lit(c) => write_literal(f, *c)?,
            Expr::Z => write!(f, "z")?,
            Expr::ZBar => write!(f, "zbar")?,
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 3)?;
            }
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Pow(b, k) => {
                b.fmt_prec(f, 5)?;
                write!(f, "^{k}")?;
            }
        }
        if wrap {
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        if c.im == 1.0 {
            write!(f, "i")
        } else {
            write!(f, "{}i", c.im)
        }
    } else {
        // Mixed literals re-parse as a sum with the same value.
        write!(f, "({} + {}i)", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Z,
    ZBar,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let start = i;
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                toks.push((start, Tok::Plus));
                i += 1;
            }
            '-' => {
                toks.push((start, Tok::Minus));
                i += 1;
            }
            '*' => {
                toks.push((start, Tok::Star));
                i += 1;
            }
            '^' => {
                toks.push((start, Tok::Caret));
                i += 1;
            }
            '(' => {
                toks.push((start, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((start, Tok::RParen));
                i += 1;
            }
            '0'..='9' | '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        j = k;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let text: String = chars[i..j].iter().collect();
                let value: f64 = text.parse().map_err(|_| Error::Parse {
                    pos: start,
                    msg: format!("bad number literal '{text}'"),
                })?;
                if j < chars.len() && chars[j] == 'i' {
                    toks.push((start, Tok::Imag(value)));
                    i = j + 1;
                } else {
                    toks.push((start, Tok::Num(value)));
                    i = j;
                }
            }
            'a'..='z' | 'A'..='Z' => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_alphabetic() {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.as_str() {
                    "z" => Tok::Z,
                    "zbar" => Tok::ZBar,
                    "i" => Tok::Imag(1.0),
                    _ => {
                        return Err(Error::Parse {
                            pos: start,
                            msg: format!("unknown name '{word}' (expected z, zbar, or i)"),
                        })
                    }
                };
                toks.push((start, tok));
                i = j;
            }
            _ => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|&(p, _)| p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.atom()?;
        while self.peek() == Some(&Tok::Caret) {
            self.bump();
            let pos = self.here();
            match self.bump() {
                Some(Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                    base = Expr::Pow(Box::new(base), v as u32);
                }
                Some(Tok::Minus) => {
                    return Err(Error::Parse {
                        pos,
                        msg: "negative exponents are not allowed".into(),
                    })
                }
                _ => {
                    return Err(Error::Parse {
                        pos,
                        msg: "exponent must be a nonnegative integer literal".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Lit(Complex64::new(v, 0.0))),
            Some(Tok::Imag(v)) => Ok(Expr::Lit(Complex64::new(0.0, v))),
            Some(Tok::Z) => Ok(Expr::Z),
            Some(Tok::ZBar) => Ok(Expr::ZBar),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                if self.bump() != Some(Tok::RParen) {
                    return Err(Error::Parse {
                        pos: self.here(),
                        msg: "expected ')'".into(),
                    });
                }
                Ok(inner)
            }
            Some(tok) => Err(Error::Parse {
                pos,
                msg: format!("unexpected token {tok:?}"),
            }),
            None => Err(Error::Parse {
                pos,
                msg: "unexpected end of expression".into(),
            }),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse {
            pos: p.here(),
            msg: "trailing input after expression".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(text: &str, z: Complex64) -> Complex64 {
        parse_expr(text).unwrap().eval(z)
    }

    #[test]
    fn evaluates_examples() {
        let z = Complex64::new(1.0, 0.0);
        assert_eq!(ev("z^2 + (1+2i)*zbar", z), Complex64::new(2.0, 2.0));
        assert_eq!(ev("1", Complex64::new(5.0, -3.0)), Complex64::new(1.0, 0.0));
        assert_eq!(
            ev("z*zbar", Complex64::new(0.0, 2.0)),
            Complex64::new(4.0, 0.0)
        );
    }

    #[test]
    fn precedence_and_association() {
        let z = Complex64::new(2.0, 0.0);
        assert_eq!(ev("1 - 2 - 3", z).re, -4.0);
        assert_eq!(ev("2*z^2", z).re, 8.0);
        assert_eq!(ev("-z^2", z).re, -4.0);
        assert_eq!(ev("(1-2)*z", z).re, -2.0);
        assert_eq!(ev("z^2^3", z).re, 64.0);
        assert_eq!(ev("2i*i", z), Complex64::new(-2.0, 0.0));
        assert_eq!(ev("0.5e1 + z", z).re, 7.0);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["z^-1", "z^zbar", "z^0.5", "w", "1 +", "(z", "2 z", "z№"] {
            let err = parse_expr(bad).unwrap_err();
            match err {
                Error::Parse { .. } => {}
                other => panic!("expected parse error for '{bad}', got {other}"),
            }
        }
    }

    #[test]
    fn error_positions_point_at_the_problem() {
        match parse_expr("z + w") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse_expr("z^(2)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "z^2 + (1 + 2i)*zbar",
            "-(z*zbar)",
            "(z + zbar)^3*-z",
            "1 - 2 - 3",
            "(z^2)^3",
        ] {
            let e = parse_expr(text).unwrap();
            let printed = e.to_string();
            let reparsed = parse_expr(&printed).unwrap();
            assert_eq!(e, reparsed, "'{text}' printed as '{printed}'");
        }
    }
}
