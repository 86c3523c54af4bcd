//! Pointwise evaluation of net expressions at one grid index.
//!
//! Evaluation is total except for genuine domain errors: division by an exact
//! zero, `log` of zero or of a negative real, overflowing trigonometric
//! arguments, and `piecewise` without a grid index. Values are [`WideComplex`],
//! so magnitudes far outside f64 range (routine for nets like `rho^-40` or
//! `exp(-1/eps)`) stay finite and exact-in-log.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::wide::WideComplex;

use super::{Func, NetExpr};

/// Resolver for named index sets used by `piecewise`.
///
/// `contains(name, k)` answers whether grid index `k` belongs to the set;
/// `None` means the name is unknown.
pub trait IndexSetLookup {
    fn contains(&self, name: &str, grid_index: usize) -> Option<bool>;
}

/// A no-set environment; any `piecewise` reference fails.
impl IndexSetLookup for () {
    fn contains(&self, _name: &str, _grid_index: usize) -> Option<bool> {
        None
    }
}

/// Membership tables by name, the common concrete environment.
impl IndexSetLookup for BTreeMap<String, Vec<bool>> {
    fn contains(&self, name: &str, grid_index: usize) -> Option<bool> {
        self.get(name)
            .map(|mask| grid_index < mask.len() && mask[grid_index])
    }
}

/// Everything `eval` needs to know about one grid point.
#[derive(Clone, Copy)]
pub struct EvalCtx<'a> {
    /// The index value ε at this grid point.
    pub eps: f64,
    /// The gauge value ρ_ε at this grid point.
    pub rho: WideComplex,
    /// Position in the evaluation grid, if the point belongs to one.
    /// Required by `piecewise`.
    pub grid_index: Option<usize>,
    /// Values for `param(...)` slots.
    pub bindings: Option<&'a BTreeMap<String, WideComplex>>,
    /// Named index sets for `piecewise`.
    pub sets: Option<&'a dyn IndexSetLookup>,
}

impl<'a> EvalCtx<'a> {
    pub fn new(eps: f64, rho: WideComplex) -> Self {
        EvalCtx {
            eps,
            rho,
            grid_index: None,
            bindings: None,
            sets: None,
        }
    }

    pub fn at_index(mut self, k: usize) -> Self {
        self.grid_index = Some(k);
        self
    }

    pub fn with_bindings(mut self, b: &'a BTreeMap<String, WideComplex>) -> Self {
        self.bindings = Some(b);
        self
    }

    pub fn with_sets(mut self, s: &'a dyn IndexSetLookup) -> Self {
        self.sets = Some(s);
        self
    }

    fn fail(&self, expr: &NetExpr, msg: impl Into<String>) -> Error {
        Error::Eval {
            eps: self.eps,
            msg: msg.into(),
            expr: expr.to_string(),
        }
    }
}

/// Evaluate `expr` at one grid point.
pub fn eval(expr: &NetExpr, ctx: &EvalCtx<'_>) -> Result<WideComplex> {
    match expr {
        NetExpr::Num(r) => Ok(WideComplex::from_f64(
            *r.numer() as f64 / *r.denom() as f64,
        )),
        NetExpr::ImagUnit => Ok(WideComplex::I),
        NetExpr::Eps => Ok(WideComplex::from_f64(ctx.eps)),
        NetExpr::Rho => Ok(ctx.rho),
        NetExpr::Param(p) => ctx
            .bindings
            .and_then(|b| b.get(p))
            .copied()
            .ok_or_else(|| ctx.fail(expr, format!("unbound parameter `{p}`"))),
        NetExpr::Neg(a) => Ok(eval(a, ctx)?.neg()),
        NetExpr::Add(a, b) => Ok(eval(a, ctx)?.add(eval(b, ctx)?)),
        NetExpr::Sub(a, b) => Ok(eval(a, ctx)?.sub(eval(b, ctx)?)),
        NetExpr::Mul(a, b) => Ok(eval(a, ctx)?.mul(eval(b, ctx)?)),
        NetExpr::Div(a, b) => {
            let den = eval(b, ctx)?;
            if den.is_zero() {
                return Err(ctx.fail(expr, "division by zero"));
            }
            Ok(eval(a, ctx)?.div(den))
        }
        NetExpr::Pow(b, r) => {
            let base = eval(b, ctx)?;
            if base.is_zero() {
                if *r.numer() < 0 {
                    return Err(ctx.fail(expr, "zero raised to a negative power"));
                }
                if *r.numer() == 0 {
                    return Ok(WideComplex::ONE);
                }
                return Ok(WideComplex::ZERO);
            }
            Ok(base.pow_rat(*r.numer(), *r.denom()))
        }
        NetExpr::Apply(f, a) => {
            let v = eval(a, ctx)?;
            match f {
                Func::Log => {
                    if v.is_zero() {
                        return Err(ctx.fail(expr, "log of zero"));
                    }
                    if v.is_negative_real() {
                        return Err(ctx.fail(expr, "log of a negative real"));
                    }
                    Ok(v.ln())
                }
                Func::Exp => {
                    let r = v.exp();
                    if r.is_indeterminate() {
                        return Err(ctx.fail(expr, "exp of an argument with overflowing phase"));
                    }
                    Ok(r)
                }
                Func::Sin => v
                    .sin()
                    .ok_or_else(|| ctx.fail(expr, "sin argument overflows")),
                Func::Cos => v
                    .cos()
                    .ok_or_else(|| ctx.fail(expr, "cos argument overflows")),
                Func::Abs => Ok(v.abs()),
                Func::Conj => Ok(v.conj()),
            }
        }
        NetExpr::Piecewise(name, a, b) => {
            let k = ctx.grid_index.ok_or_else(|| {
                ctx.fail(expr, "piecewise expression evaluated off the grid")
            })?;
            let sets = ctx
                .sets
                .ok_or_else(|| ctx.fail(expr, "no index sets in scope"))?;
            match sets.contains(name, k) {
                Some(true) => eval(a, ctx),
                Some(false) => eval(b, ctx),
                None => Err(ctx.fail(expr, format!("unknown index set `{name}`"))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlang::parse;
    use num_complex::Complex64;

    fn ev(src: &str, eps: f64) -> Result<WideComplex> {
        let e = parse(src).unwrap();
        let ctx = EvalCtx::new(eps, WideComplex::from_f64(eps));
        eval(&e, &ctx)
    }

    #[test]
    fn arithmetic_matches_f64() {
        let v = ev("(1 + 2*eps)/(3 - eps)", 0.25).unwrap();
        let want = (1.0 + 2.0 * 0.25) / (3.0 - 0.25);
        assert_eq!(v.to_complex_lossy(), Complex64::new(want, 0.0));
    }

    #[test]
    fn wide_range_survives() {
        // rho^-500 at rho = 1e-3 is 1e1500, far beyond f64.
        let v = ev("rho^-500", 1e-3).unwrap();
        assert!((v.lm() - 500.0 * 3.0 * std::f64::consts::LN_10).abs() < 1e-6);
        let w = ev("exp(-1/eps)", 1e-3).unwrap();
        assert!((w.lm() + 1000.0).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(ev("1/(eps - eps)", 0.5), Err(Error::Eval { .. })));
        assert!(ev("log(eps - 1)", 0.5).is_err(), "log of negative real");
        assert!(ev("log(i*eps)", 0.5).is_ok(), "complex log is fine");
        assert!(ev("sin(exp(1/eps))", 1e-4).is_err(), "sin overflow");
        assert!(
            ev("piecewise(L, 1, 2)", 0.5).is_err(),
            "piecewise off the grid"
        );
    }

    #[test]
    fn piecewise_uses_sets() {
        let e = parse("piecewise(L, eps, -eps)").unwrap();
        let mut sets = BTreeMap::new();
        sets.insert("L".to_string(), vec![true, false, true]);
        let base = EvalCtx::new(0.5, WideComplex::from_f64(0.5)).with_sets(&sets);
        let v0 = eval(&e, &base.at_index(0)).unwrap();
        let v1 = eval(&e, &base.at_index(1)).unwrap();
        assert_eq!(v0.to_complex_lossy().re, 0.5);
        assert_eq!(v1.to_complex_lossy().re, -0.5);
    }
}
