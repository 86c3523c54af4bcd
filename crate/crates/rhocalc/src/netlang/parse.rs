//! Recursive-descent parser for net expressions.
//!
//! Grammar (whitespace insensitive):
//! ```text
//! expr     := term { ("+" | "-") term }
//! term     := factor { ("*" | "/") factor }
//! factor   := [ "-" ] base [ "^" exponent ]
//! base     := number | "(" int "/" int ")" | "i" | "eps" | "rho"
//!           | func "(" expr ")" | "param" "(" ident ")"
//!           | "piecewise" "(" ident "," expr "," expr ")"
//!           | "(" expr ")"
//! exponent := [ "-" ] int | "(" [ "-" ] int "/" int ")"
//! ```
//! Numbers are decimal literals (`2`, `0.5`, `1e-3`); they always denote exact
//! rationals. Exponents must be integers or explicit `(p/q)` rationals —
//! anything else is a parse error, since non-rational powers have no
//! principal-branch normal form here.

use super::{Func, NetExpr, Rat};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    let mut line = 1usize;
    let mut col = 1usize;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok, out: &mut Vec<Spanned>| {
            out.push(Spanned {
                tok,
                line: tline,
                col: tcol,
            })
        };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '+' => push(Tok::Plus, &mut out),
            '-' => push(Tok::Minus, &mut out),
            '*' => push(Tok::Star, &mut out),
            '/' => push(Tok::Slash, &mut out),
            '^' => push(Tok::Caret, &mut out),
            '(' => push(Tok::LParen, &mut out),
            ')' => push(Tok::RParen, &mut out),
            ',' => push(Tok::Comma, &mut out),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let mut frac_len = 0usize;
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    let fs = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    frac_len = i - fs;
                    if frac_len == 0 {
                        return Err(Error::Parse {
                            line,
                            col,
                            msg: "digits expected after decimal point".into(),
                        });
                    }
                }
                let mant_end = i;
                let mut exp10: i32 = 0;
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    // Only a scientific suffix if followed by a (signed) digit;
                    // otherwise the `e` starts an identifier such as `eps`.
                    let mut j = i + 1;
                    let mut sign = 1i32;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        if chars[j] == '-' {
                            sign = -1;
                        }
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        let es = j;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        let digits: String = chars[es..j].iter().collect();
                        exp10 = sign
                            * digits.parse::<i32>().map_err(|_| Error::Parse {
                                line,
                                col,
                                msg: "exponent out of range".into(),
                            })?;
                        i = j;
                    }
                }
                let text: String = chars[start..mant_end]
                    .iter()
                    .filter(|c| c.is_ascii_digit())
                    .collect();
                let mantissa: i64 = text.parse().map_err(|_| Error::Parse {
                    line,
                    col,
                    msg: format!("number literal too large: {text}"),
                })?;
                let mut r = Rat::from_integer(mantissa);
                let net_exp = exp10 - frac_len as i32;
                let scale = |p: u32| -> Result<i64> {
                    10i64.checked_pow(p).ok_or_else(|| Error::Parse {
                        line,
                        col,
                        msg: "number literal out of range".into(),
                    })
                };
                if net_exp > 0 {
                    r *= Rat::from_integer(scale(net_exp as u32)?);
                } else if net_exp < 0 {
                    r /= Rat::from_integer(scale(net_exp.unsigned_abs())?);
                }
                col += i - start;
                out.push(Spanned {
                    tok: Tok::Num(r),
                    line: tline,
                    col: tcol,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let ident: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Spanned {
                    tok: Tok::Ident(ident),
                    line: tline,
                    col: tcol,
                });
                continue;
            }
            other => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end_line: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Tok> {
        self.toks.get(self.pos + ahead).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<NetExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = NetExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = NetExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<NetExpr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = NetExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = NetExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<NetExpr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let inner = self.powered_base()?;
            return Ok(NetExpr::Neg(Box::new(inner)));
        }
        self.powered_base()
    }

    fn powered_base(&mut self) -> Result<NetExpr> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let r = self.exponent()?;
            return Ok(NetExpr::Pow(Box::new(base), r));
        }
        Ok(base)
    }

    fn int_tok(&mut self, what: &str) -> Result<i64> {
        match self.bump() {
            Some(Tok::Num(r)) if r.is_integer() => Ok(*r.numer()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err(format!("expected {what}")))
            }
        }
    }

    fn exponent(&mut self) -> Result<Rat> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                let n = self.int_tok("an integer exponent")?;
                Ok(Rat::from_integer(-n))
            }
            Some(Tok::Num(r)) if r.is_integer() => {
                let n = *r.numer();
                self.pos += 1;
                Ok(Rat::from_integer(n))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let neg = if self.peek() == Some(&Tok::Minus) {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                let p = self.int_tok("an integer numerator in a rational exponent")?;
                self.expect(Tok::Slash, "`/` in a rational exponent")?;
                let q = self.int_tok("an integer denominator in a rational exponent")?;
                self.expect(Tok::RParen, "`)` closing a rational exponent")?;
                if q == 0 {
                    return Err(self.err("rational exponent has zero denominator"));
                }
                let r = Rat::new(p, q);
                Ok(if neg { -r } else { r })
            }
            _ => Err(self.err("exponent must be an integer or a (p/q) rational")),
        }
    }

    /// `(p/q)` immediately after an opening paren parses as a single rational
    /// literal, so that printed non-integer literals round-trip structurally.
    fn rational_literal(&mut self) -> Option<NetExpr> {
        let mut k = 1usize;
        let neg = if self.peek_at(k) == Some(&Tok::Minus) {
            k += 1;
            true
        } else {
            false
        };
        let p = match self.peek_at(k) {
            Some(Tok::Num(r)) if r.is_integer() => *r.numer(),
            _ => return None,
        };
        if self.peek_at(k + 1) != Some(&Tok::Slash) {
            return None;
        }
        let q = match self.peek_at(k + 2) {
            Some(Tok::Num(r)) if r.is_integer() && r.numer() != &0 => *r.numer(),
            _ => return None,
        };
        if self.peek_at(k + 3) != Some(&Tok::RParen) {
            return None;
        }
        self.pos += k + 4;
        let r = Rat::new(p, q);
        Some(if neg {
            NetExpr::Neg(Box::new(NetExpr::Num(r)))
        } else {
            NetExpr::Num(r)
        })
    }

    fn ident_arg(&mut self, what: &str) -> Result<String> {
        match self.bump() {
            Some(Tok::Ident(name)) => Ok(name),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err(format!("expected {what}")))
            }
        }
    }

    fn base(&mut self) -> Result<NetExpr> {
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(NetExpr::Num(r))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "i" => Ok(NetExpr::ImagUnit),
                    "eps" => Ok(NetExpr::Eps),
                    "rho" => Ok(NetExpr::Rho),
                    "param" => {
                        self.expect(Tok::LParen, "`(` after `param`")?;
                        let p = self.ident_arg("a parameter name")?;
                        self.expect(Tok::RParen, "`)` after parameter name")?;
                        Ok(NetExpr::Param(p))
                    }
                    "piecewise" => {
                        self.expect(Tok::LParen, "`(` after `piecewise`")?;
                        let set = self.ident_arg("an index-set name")?;
                        self.expect(Tok::Comma, "`,` after index-set name")?;
                        let a = self.expr()?;
                        self.expect(Tok::Comma, "`,` between piecewise branches")?;
                        let b = self.expr()?;
                        self.expect(Tok::RParen, "`)` closing piecewise")?;
                        Ok(NetExpr::Piecewise(set, Box::new(a), Box::new(b)))
                    }
                    other => {
                        if let Some(func) = Func::from_name(other) {
                            self.expect(Tok::LParen, &format!("`(` after `{other}`"))?;
                            let a = self.expr()?;
                            self.expect(Tok::RParen, &format!("`)` closing `{other}`"))?;
                            Ok(NetExpr::Apply(func, Box::new(a)))
                        } else if matches!(self.peek(), Some(Tok::LParen)) {
                            self.pos -= 1;
                            Err(self.err(format!("unknown function `{other}`")))
                        } else {
                            // Any other bare identifier is a free parameter.
                            Ok(NetExpr::Param(other.to_string()))
                        }
                    }
                }
            }
            Some(Tok::LParen) => {
                if let Some(lit) = self.rational_literal() {
                    return Ok(lit);
                }
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(_) => Err(self.err("expected a number, name, or `(`")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parse a net expression from source text.
pub fn parse(src: &str) -> Result<NetExpr> {
    let toks = lex(src)?;
    let end_line = src.lines().count().max(1);
    let end_col = src.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    let mut p = Parser {
        toks,
        pos: 0,
        end_line,
        end_col,
    };
    if p.peek().is_none() {
        return Err(p.err("empty expression"));
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(src: &str) -> NetExpr {
        let e = parse(src).unwrap();
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        assert_eq!(e, back, "round-trip failed: {src} -> {printed}");
        back
    }

    #[test]
    fn literals() {
        assert_eq!(parse("2.5").unwrap(), NetExpr::Num(Rat::new(5, 2)));
        assert_eq!(parse("1e-3").unwrap(), NetExpr::Num(Rat::new(1, 1000)));
        assert_eq!(parse("(3/4)").unwrap(), NetExpr::Num(Rat::new(3, 4)));
        assert_eq!(
            parse("(-3/4)").unwrap(),
            NetExpr::Neg(Box::new(NetExpr::Num(Rat::new(3, 4))))
        );
    }

    #[test]
    fn precedence_shapes() {
        let e = parse("eps + rho*eps^2").unwrap();
        match e {
            NetExpr::Add(_, rhs) => match *rhs {
                NetExpr::Mul(_, pow) => assert!(matches!(*pow, NetExpr::Pow(..))),
                other => panic!("expected Mul, got {other:?}"),
            },
            other => panic!("expected Add, got {other:?}"),
        }
        roundtrip("eps - -rho");
        roundtrip("-(eps + rho)*i");
        roundtrip("(eps + 1)^-2");
        roundtrip("rho^(1/2)*log(1/eps)");
        roundtrip("piecewise(L, eps^2, -exp(-1/eps))");
        roundtrip("(1/2) + (-5/7)*param(z)");
    }

    #[test]
    fn scientific_vs_identifier() {
        // `2e-3` is scientific; `2*eps` must not lex `2e` as a number prefix.
        assert_eq!(parse("2e-3").unwrap(), NetExpr::Num(Rat::new(1, 500)));
        let e = parse("2eps").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("trailing") || msg.contains("unknown"), "{msg}");
    }

    #[test]
    fn error_positions() {
        let err = parse("eps + \n  ^2").unwrap_err();
        match err {
            crate::Error::Parse { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse("eps^0.5").is_err(), "fractional exponent literal");
        assert!(parse("foo(eps)").is_err());
        assert!(parse("eps +").is_err());
    }
}
