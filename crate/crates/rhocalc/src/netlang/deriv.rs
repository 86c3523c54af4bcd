//! Symbolic differentiation of net expressions with respect to a parameter.
//!
//! Differentiation is with respect to the *complex* parameter slot, so it is
//! only defined on the holomorphic fragment of the grammar: `abs` and `conj`
//! applied to anything containing the parameter are rejected. `piecewise`
//! differentiates branchwise (the index-set split does not depend on the
//! parameter).

use crate::error::{Error, Result};

use super::ex;
use super::{Func, NetExpr, Rat};

fn depends_on(e: &NetExpr, param: &str) -> bool {
    e.params().iter().any(|p| p == param)
}

/// `d expr / d param(name)` as a new expression.
pub fn derivative(expr: &NetExpr, name: &str) -> Result<NetExpr> {
    if !depends_on(expr, name) {
        return Ok(ex::num(0));
    }
    Ok(match expr {
        NetExpr::Num(_) | NetExpr::ImagUnit | NetExpr::Eps | NetExpr::Rho => ex::num(0),
        NetExpr::Param(p) => {
            if p == name {
                ex::num(1)
            } else {
                ex::num(0)
            }
        }
        NetExpr::Neg(a) => ex::neg(derivative(a, name)?),
        NetExpr::Add(a, b) => ex::add(derivative(a, name)?, derivative(b, name)?),
        NetExpr::Sub(a, b) => ex::sub(derivative(a, name)?, derivative(b, name)?),
        NetExpr::Mul(a, b) => {
            let da = derivative(a, name)?;
            let db = derivative(b, name)?;
            ex::add(
                ex::mul(da, (**b).clone()),
                ex::mul((**a).clone(), db),
            )
        }
        NetExpr::Div(a, b) => {
            let da = derivative(a, name)?;
            let db = derivative(b, name)?;
            let num = ex::sub(
                ex::mul(da, (**b).clone()),
                ex::mul((**a).clone(), db),
            );
            ex::div(num, ex::powi((**b).clone(), 2))
        }
        NetExpr::Pow(b, r) => {
            let db = derivative(b, name)?;
            let down = ex::pow((**b).clone(), *r - Rat::from_integer(1));
            ex::mul(ex::mul(NetExpr::num_rat(*r), down), db)
        }
        NetExpr::Apply(f, a) => {
            let da = derivative(a, name)?;
            match f {
                Func::Exp => ex::mul(ex::app(Func::Exp, (**a).clone()), da),
                Func::Log => ex::div(da, (**a).clone()),
                Func::Sin => ex::mul(ex::app(Func::Cos, (**a).clone()), da),
                Func::Cos => ex::neg(ex::mul(ex::app(Func::Sin, (**a).clone()), da)),
                Func::Abs | Func::Conj => {
                    return Err(Error::Invalid(format!(
                        "`{}` is not differentiable in `param({name})`",
                        f.name()
                    )))
                }
            }
        }
        NetExpr::Piecewise(set, a, b) => NetExpr::Piecewise(
            set.clone(),
            Box::new(derivative(a, name)?),
            Box::new(derivative(b, name)?),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlang::parse;

    #[test]
    fn polynomial_rule() {
        let e = parse("param(z)^3 + rho*param(z)").unwrap();
        let d = derivative(&e, "z").unwrap();
        assert_eq!(d.to_string(), "3*z^2 + rho");
    }

    #[test]
    fn chain_and_quotient() {
        let e = parse("exp(param(z)^2)").unwrap();
        let d = derivative(&e, "z").unwrap();
        assert_eq!(d.to_string(), "exp(z^2)*(2*z)");

        let q = parse("1/param(z)").unwrap();
        let dq = derivative(&q, "z").unwrap();
        assert_eq!(dq.to_string(), "-1/z^2");
    }

    #[test]
    fn conj_rejected_but_constants_pass() {
        let e = parse("conj(param(z))").unwrap();
        assert!(derivative(&e, "z").is_err());
        // conj of something not involving the parameter is a constant.
        let c = parse("conj(i*rho)*param(z)").unwrap();
        let d = derivative(&c, "z").unwrap();
        assert_eq!(d.to_string(), "conj(i*rho)");
    }
}
