//! The closed net-expression grammar.
//!
//! Nets are written in a tiny language over `eps` (the index), `rho` (the
//! gauge), rational/decimal literals, `i`, the functions
//! `log exp sin cos abs conj`, arithmetic with rational powers, grid-indexed
//! `piecewise(indexset, a, b)` and free `param(name)` slots. Expressions are
//! the *symbolic* representation of generalized numbers; everything else in
//! the crate (orders, verdicts, certificates) consumes them.
//!
//! `parse` and the `Display` printer are exact inverses on syntax trees:
//! `parse(print(e)) == e` structurally.

mod deriv;
mod eval;
pub mod gen;
pub mod normal;
mod parse;

pub use deriv::derivative;
pub use eval::{eval, EvalCtx, IndexSetLookup};
pub use parse::parse;

use std::fmt;

pub type Rat = num_rational::Ratio<i64>;

/// Function symbols of the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Log,
    Exp,
    Sin,
    Cos,
    Abs,
    Conj,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Conj => "conj",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "log" => Func::Log,
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "conj" => Func::Conj,
            _ => return None,
        })
    }
}

/// Syntax tree of a net expression.
///
/// Invariant kept by the parser and expected by the printer: `Num` literals
/// are nonnegative (a leading minus parses as `Neg`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NetExpr {
    Num(Rat),
    ImagUnit,
    Eps,
    Rho,
    Param(String),
    Neg(Box<NetExpr>),
    Add(Box<NetExpr>, Box<NetExpr>),
    Sub(Box<NetExpr>, Box<NetExpr>),
    Mul(Box<NetExpr>, Box<NetExpr>),
    Div(Box<NetExpr>, Box<NetExpr>),
    /// Principal-branch rational power of a base expression.
    Pow(Box<NetExpr>, Rat),
    Apply(Func, Box<NetExpr>),
    /// `piecewise(L, a, b)`: `a` on grid indices in the set named `L`, else `b`.
    Piecewise(String, Box<NetExpr>, Box<NetExpr>),
}

impl NetExpr {
    pub fn num_int(n: i64) -> NetExpr {
        if n < 0 {
            NetExpr::Neg(Box::new(NetExpr::Num(Rat::from_integer(-n))))
        } else {
            NetExpr::Num(Rat::from_integer(n))
        }
    }

    pub fn num_rat(r: Rat) -> NetExpr {
        if r < Rat::from_integer(0) {
            NetExpr::Neg(Box::new(NetExpr::Num(-r)))
        } else {
            NetExpr::Num(r)
        }
    }

    /// Replace every occurrence of `rho` by the given expression.
    pub fn subst_rho(&self, rho: &NetExpr) -> NetExpr {
        self.map_leaves(&|e| match e {
            NetExpr::Rho => Some(rho.clone()),
            _ => None,
        })
    }

    /// Replace `param(name)` by the given expression.
    pub fn subst_param(&self, name: &str, value: &NetExpr) -> NetExpr {
        self.map_leaves(&|e| match e {
            NetExpr::Param(p) if p == name => Some(value.clone()),
            _ => None,
        })
    }

    fn map_leaves(&self, f: &impl Fn(&NetExpr) -> Option<NetExpr>) -> NetExpr {
        if let Some(r) = f(self) {
            return r;
        }
        match self {
            NetExpr::Num(_)
            | NetExpr::ImagUnit
            | NetExpr::Eps
            | NetExpr::Rho
            | NetExpr::Param(_) => self.clone(),
            NetExpr::Neg(a) => NetExpr::Neg(Box::new(a.map_leaves(f))),
            NetExpr::Add(a, b) => {
                NetExpr::Add(Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f)))
            }
            NetExpr::Sub(a, b) => {
                NetExpr::Sub(Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f)))
            }
            NetExpr::Mul(a, b) => {
                NetExpr::Mul(Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f)))
            }
            NetExpr::Div(a, b) => {
                NetExpr::Div(Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f)))
            }
            NetExpr::Pow(a, r) => NetExpr::Pow(Box::new(a.map_leaves(f)), *r),
            NetExpr::Apply(func, a) => NetExpr::Apply(*func, Box::new(a.map_leaves(f))),
            NetExpr::Piecewise(n, a, b) => NetExpr::Piecewise(
                n.clone(),
                Box::new(a.map_leaves(f)),
                Box::new(b.map_leaves(f)),
            ),
        }
    }

    /// Free parameter names, in first-occurrence order.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let NetExpr::Param(p) = e {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    pub fn uses_rho(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, NetExpr::Rho) {
                found = true;
            }
        });
        found
    }

    fn walk(&self, f: &mut impl FnMut(&NetExpr)) {
        f(self);
        match self {
            NetExpr::Neg(a) | NetExpr::Pow(a, _) | NetExpr::Apply(_, a) => a.walk(f),
            NetExpr::Add(a, b)
            | NetExpr::Sub(a, b)
            | NetExpr::Mul(a, b)
            | NetExpr::Div(a, b)
            | NetExpr::Piecewise(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            _ => {}
        }
    }

    fn prec(&self) -> u8 {
        match self {
            NetExpr::Add(..) | NetExpr::Sub(..) => 1,
            NetExpr::Mul(..) | NetExpr::Div(..) => 2,
            NetExpr::Neg(_) => 3,
            NetExpr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let me = self.prec();
        if me < min {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            NetExpr::Num(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "({}/{})", r.numer(), r.denom())
                }
            }
            NetExpr::ImagUnit => write!(f, "i"),
            NetExpr::Eps => write!(f, "eps"),
            NetExpr::Rho => write!(f, "rho"),
            NetExpr::Param(p) => {
                // Print bare when the name re-parses as a parameter; fall
                // back to the explicit form for reserved or odd names.
                let plain = !p.is_empty()
                    && p.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                    && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                    && !matches!(p.as_str(), "i" | "eps" | "rho" | "param" | "piecewise")
                    && Func::from_name(p).is_none();
                if plain {
                    write!(f, "{p}")
                } else {
                    write!(f, "param({p})")
                }
            }
            NetExpr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 4)
            }
            NetExpr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)
            }
            NetExpr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)
            }
            NetExpr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)
            }
            NetExpr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)
            }
            NetExpr::Pow(b, r) => {
                b.fmt_prec(f, 5)?;
                if r.is_integer() {
                    write!(f, "^{}", r.numer())
                } else {
                    write!(f, "^({}/{})", r.numer(), r.denom())
                }
            }
            NetExpr::Apply(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")
            }
            NetExpr::Piecewise(n, a, b) => {
                write!(f, "piecewise({n}, ")?;
                a.fmt_prec(f, 0)?;
                write!(f, ", ")?;
                b.fmt_prec(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for NetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Smart constructors with light zero/one folding, used when building
/// expressions programmatically (derivatives, embeddings, remainders).
pub mod ex {
    use super::{Func, NetExpr, Rat};

    pub fn num(n: i64) -> NetExpr {
        NetExpr::num_int(n)
    }

    pub fn rat(p: i64, q: i64) -> NetExpr {
        NetExpr::num_rat(Rat::new(p, q))
    }

    /// Exact expression for a finite double: `m · 2^k` with integer mantissa,
    /// so no precision is lost even for extreme exponents.
    pub fn num_f64(v: f64) -> NetExpr {
        if v == 0.0 {
            return num(0);
        }
        if !v.is_finite() {
            panic!("cannot represent a non-finite value as a net expression");
        }
        if v.fract() == 0.0 && v.abs() < 9.0e15 {
            return num(v as i64);
        }
        let (m, k) = {
            let bits = v.to_bits();
            let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
            let exp = ((bits >> 52) & 0x7ff) as i64;
            let frac = bits & ((1u64 << 52) - 1);
            let (mant, e) = if exp == 0 {
                (frac, -1074i64)
            } else {
                (frac | (1u64 << 52), exp - 1075)
            };
            (sign * mant as i64, e)
        };
        // Strip trailing zero bits into the exponent.
        let tz = m.trailing_zeros().min(52);
        let (m, k) = (m >> tz, k + tz as i64);
        if (-62..=0).contains(&k) {
            return NetExpr::num_rat(Rat::new(m, 1i64 << (-k)));
        }
        mul(num(m), pow(num(2), Rat::from_integer(k)))
    }

    pub fn is_zero(e: &NetExpr) -> bool {
        matches!(e, NetExpr::Num(r) if r.numer() == &0)
    }

    pub fn is_one(e: &NetExpr) -> bool {
        matches!(e, NetExpr::Num(r) if r == &Rat::from_integer(1))
    }

    pub fn add(a: NetExpr, b: NetExpr) -> NetExpr {
        if is_zero(&a) {
            b
        } else if is_zero(&b) {
            a
        } else {
            NetExpr::Add(Box::new(a), Box::new(b))
        }
    }

    pub fn sub(a: NetExpr, b: NetExpr) -> NetExpr {
        if is_zero(&b) {
            a
        } else if is_zero(&a) {
            neg(b)
        } else {
            NetExpr::Sub(Box::new(a), Box::new(b))
        }
    }

    pub fn neg(a: NetExpr) -> NetExpr {
        match a {
            NetExpr::Neg(inner) => *inner,
            other => NetExpr::Neg(Box::new(other)),
        }
    }

    pub fn mul(a: NetExpr, b: NetExpr) -> NetExpr {
        if is_zero(&a) || is_zero(&b) {
            num(0)
        } else if is_one(&a) {
            b
        } else if is_one(&b) {
            a
        } else {
            NetExpr::Mul(Box::new(a), Box::new(b))
        }
    }

    pub fn div(a: NetExpr, b: NetExpr) -> NetExpr {
        if is_zero(&a) {
            num(0)
        } else if is_one(&b) {
            a
        } else {
            NetExpr::Div(Box::new(a), Box::new(b))
        }
    }

    pub fn pow(a: NetExpr, r: Rat) -> NetExpr {
        if r == Rat::from_integer(1) {
            a
        } else if r == Rat::from_integer(0) {
            num(1)
        } else {
            NetExpr::Pow(Box::new(a), r)
        }
    }

    pub fn powi(a: NetExpr, n: i64) -> NetExpr {
        pow(a, Rat::from_integer(n))
    }

    pub fn app(f: Func, a: NetExpr) -> NetExpr {
        NetExpr::Apply(f, Box::new(a))
    }

    pub fn param(name: &str) -> NetExpr {
        NetExpr::Param(name.to_string())
    }

    pub fn eps() -> NetExpr {
        NetExpr::Eps
    }

    pub fn rho() -> NetExpr {
        NetExpr::Rho
    }

    pub fn imag() -> NetExpr {
        NetExpr::ImagUnit
    }

    /// `re(e) = (e + conj(e))/2`
    pub fn re(e: NetExpr) -> NetExpr {
        div(add(e.clone(), app(Func::Conj, e)), num(2))
    }

    /// `im(e) = (e - conj(e))/(2i)`
    pub fn im(e: NetExpr) -> NetExpr {
        div(sub(e.clone(), app(Func::Conj, e)), mul(num(2), imag()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printer_basics() {
        let e = NetExpr::Add(
            Box::new(NetExpr::Pow(Box::new(NetExpr::Rho), Rat::from_integer(3))),
            Box::new(NetExpr::Pow(Box::new(NetExpr::Rho), Rat::from_integer(5))),
        );
        assert_eq!(e.to_string(), "rho^3 + rho^5");
        let f = NetExpr::Mul(
            Box::new(NetExpr::Num(Rat::new(1, 2))),
            Box::new(NetExpr::Neg(Box::new(NetExpr::Eps))),
        );
        assert_eq!(f.to_string(), "(1/2)*-eps");
    }

    #[test]
    fn subst_param_replaces() {
        let e = parse("param(z)^2 + rho*param(z)").unwrap();
        let s = e.subst_param("z", &parse("1 + i").unwrap());
        assert_eq!(s.to_string(), "(1 + i)^2 + rho*(1 + i)");
    }
}
