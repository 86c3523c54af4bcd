//! Seeded random net expressions, for randomized identity checks and
//! parser round-trip tests.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{ex, Func, NetExpr, Rat};

/// Shape of the expressions produced by [`random_expr`].
#[derive(Clone, Debug)]
pub struct GenCfg {
    pub max_depth: usize,
    /// Allow `piecewise(L, ..)` nodes referring to these set names.
    pub piecewise_sets: Vec<String>,
    /// Allow `param(..)` leaves with these names.
    pub params: Vec<String>,
    /// Allow `log exp sin cos abs conj` applications.
    pub funcs: bool,
    /// Allow division and negative/fractional powers.
    pub division: bool,
    /// Keep arguments of `exp`/`sin`/`cos` bounded (wrap in a `rho*…` factor)
    /// so that evaluation cannot overflow on a standard grid.
    pub tame: bool,
}

impl Default for GenCfg {
    fn default() -> Self {
        GenCfg {
            max_depth: 5,
            piecewise_sets: Vec::new(),
            params: Vec::new(),
            funcs: true,
            division: true,
            tame: true,
        }
    }
}

pub fn rng_from_seed(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn leaf(rng: &mut StdRng, cfg: &GenCfg) -> NetExpr {
    let mut choices = vec![0, 1, 2, 3];
    if !cfg.params.is_empty() {
        choices.push(4);
    }
    match choices[rng.random_range(0..choices.len())] {
        0 => {
            // small exact literals: integers and simple fractions
            if rng.random_bool(0.5) {
                NetExpr::Num(Rat::from_integer(rng.random_range(0..=9)))
            } else {
                let p = rng.random_range(1..=9);
                let q = rng.random_range(2..=9);
                NetExpr::Num(Rat::new(p, q))
            }
        }
        1 => NetExpr::Eps,
        2 => NetExpr::Rho,
        3 => NetExpr::ImagUnit,
        _ => {
            let k = rng.random_range(0..cfg.params.len());
            NetExpr::Param(cfg.params[k].clone())
        }
    }
}

/// Draw one expression of depth at most `cfg.max_depth`.
pub fn random_expr(rng: &mut StdRng, cfg: &GenCfg) -> NetExpr {
    go(rng, cfg, cfg.max_depth)
}

fn go(rng: &mut StdRng, cfg: &GenCfg, depth: usize) -> NetExpr {
    if depth == 0 || rng.random_bool(0.22) {
        return leaf(rng, cfg);
    }
    let mut kinds: Vec<u8> = vec![0, 0, 1, 2, 2, 3, 6];
    if cfg.division {
        kinds.push(4);
    }
    if cfg.funcs {
        kinds.push(5);
        kinds.push(5);
    }
    if !cfg.piecewise_sets.is_empty() {
        kinds.push(7);
    }
    match kinds[rng.random_range(0..kinds.len())] {
        0 => NetExpr::Add(
            Box::new(go(rng, cfg, depth - 1)),
            Box::new(go(rng, cfg, depth - 1)),
        ),
        1 => NetExpr::Sub(
            Box::new(go(rng, cfg, depth - 1)),
            Box::new(go(rng, cfg, depth - 1)),
        ),
        2 => NetExpr::Mul(
            Box::new(go(rng, cfg, depth - 1)),
            Box::new(go(rng, cfg, depth - 1)),
        ),
        3 => {
            let r = if cfg.division {
                let opts = [
                    Rat::from_integer(2),
                    Rat::from_integer(3),
                    Rat::from_integer(-1),
                    Rat::from_integer(-2),
                    Rat::new(1, 2),
                    Rat::new(3, 2),
                ];
                opts[rng.random_range(0..opts.len())]
            } else {
                Rat::from_integer(rng.random_range(2..=4))
            };
            NetExpr::Pow(Box::new(go(rng, cfg, depth - 1)), r)
        }
        4 => NetExpr::Div(
            Box::new(go(rng, cfg, depth - 1)),
            Box::new(go(rng, cfg, depth - 1)),
        ),
        5 => {
            let funcs = [Func::Log, Func::Exp, Func::Sin, Func::Cos, Func::Abs, Func::Conj];
            let f = funcs[rng.random_range(0..funcs.len())];
            let arg = go(rng, cfg, depth - 1);
            let arg = match f {
                // log(1 + abs(..)) and exp/sin/cos(rho * ..) stay in range and
                // in domain for every grid point when `tame` is on.
                Func::Log if cfg.tame => ex::add(
                    ex::num(1),
                    NetExpr::Apply(Func::Abs, Box::new(arg)),
                ),
                Func::Exp | Func::Sin | Func::Cos if cfg.tame => {
                    ex::mul(NetExpr::Rho, arg)
                }
                _ => arg,
            };
            NetExpr::Apply(f, Box::new(arg))
        }
        6 => NetExpr::Neg(Box::new(go(rng, cfg, depth - 1))),
        _ => {
            let k = rng.random_range(0..cfg.piecewise_sets.len());
            NetExpr::Piecewise(
                cfg.piecewise_sets[k].clone(),
                Box::new(go(rng, cfg, depth - 1)),
                Box::new(go(rng, cfg, depth - 1)),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlang::parse;

    #[test]
    fn generated_expressions_roundtrip() {
        let mut rng = rng_from_seed(7);
        let cfg = GenCfg {
            params: vec!["z".into()],
            piecewise_sets: vec!["L".into()],
            ..GenCfg::default()
        };
        for _ in 0..500 {
            let e = random_expr(&mut rng, &cfg);
            let printed = e.to_string();
            let back = parse(&printed).unwrap_or_else(|err| {
                panic!("printed form failed to parse: {printed}\n{err}")
            });
            assert_eq!(e, back, "round trip changed the tree for `{printed}`");
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = GenCfg::default();
        let a: Vec<String> = {
            let mut rng = rng_from_seed(42);
            (0..10).map(|_| random_expr(&mut rng, &cfg).to_string()).collect()
        };
        let b: Vec<String> = {
            let mut rng = rng_from_seed(42);
            (0..10).map(|_| random_expr(&mut rng, &cfg).to_string()).collect()
        };
        assert_eq!(a, b);
    }
}
