//! Asymptotic order analysis.
//!
//! The order of a net `x` relative to a gauge ρ is the liminf of
//! `log|x_ε| / log ρ_ε` as ε → 0: `+∞` means negligible, any finite value
//! means moderate, `−∞` means not moderate. The symbolic engine computes this
//! exactly for a large fragment of the net language by tracking *leading
//! asymptotics* in the scale `ε^p · L^b` (with `L = log(1/ε)`), plus
//! exponential scales `exp(a · ε^p L^b)` and bounded-envelope oscillations.
//! Everything it cannot certify degrades to [`Lead::Unknown`], which callers
//! resolve by sampling (see [`linear_fit`]). A symbolic answer is a proof; a
//! sampled answer is an estimate with a confidence interval.
//!
//! The gauge is substituted for `rho` *before* analysis, so gauge-dependent
//! cancellations (like `eps*rho - rho^2` over ρ_ε = ε) collapse structurally.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::cmp::Ordering;

use crate::gauge::Gauge;
use crate::netlang::normal::{normalize, Atom, GaussRat, Mono, Nf, Poly};
use crate::netlang::{Func, NetExpr, Rat};

fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// The polynomial-logarithmic scale ε^p · L^b, L = log(1/ε).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScaleTerm {
    pub p: Rat,
    pub b: Rat,
}

impl ScaleTerm {
    pub fn one() -> ScaleTerm {
        ScaleTerm {
            p: Rat::from_integer(0),
            b: Rat::from_integer(0),
        }
    }

    pub fn eps() -> ScaleTerm {
        ScaleTerm {
            p: Rat::from_integer(1),
            b: Rat::from_integer(0),
        }
    }

    pub fn log_inv_eps() -> ScaleTerm {
        ScaleTerm {
            p: Rat::from_integer(0),
            b: Rat::from_integer(1),
        }
    }

    pub fn is_one(&self) -> bool {
        self.p.numer() == &0 && self.b.numer() == &0
    }

    /// → +∞ as ε → 0.
    pub fn grows(&self) -> bool {
        self.p < Rat::from_integer(0)
            || (self.p.numer() == &0 && self.b > Rat::from_integer(0))
    }

    /// → 0 as ε → 0.
    pub fn vanishes(&self) -> bool {
        self.p > Rat::from_integer(0)
            || (self.p.numer() == &0 && self.b < Rat::from_integer(0))
    }

    pub fn mul(&self, o: &ScaleTerm) -> ScaleTerm {
        ScaleTerm {
            p: self.p + o.p,
            b: self.b + o.b,
        }
    }

    pub fn pow(&self, r: Rat) -> ScaleTerm {
        ScaleTerm {
            p: self.p * r,
            b: self.b * r,
        }
    }

    /// Compare magnitudes as ε → 0: `Greater` means `self` → ∞ relative to `o`.
    pub fn cmp_magnitude(&self, o: &ScaleTerm) -> Ordering {
        match self.p.cmp(&o.p) {
            Ordering::Less => Ordering::Greater,
            Ordering::Greater => Ordering::Less,
            Ordering::Equal => self.b.cmp(&o.b),
        }
    }
}

/// Leading coefficient of a [`Lead::Mono`]: approximate value, the exact
/// Gaussian rational when available (needed to recognize exact cancellation
/// in scale ties), and sign information for real values.
#[derive(Clone, Debug)]
pub struct Coeff {
    pub approx: Complex64,
    pub exact: Option<GaussRat>,
    pub real: bool,
    pub positive: Option<bool>,
}

impl Coeff {
    pub fn one() -> Coeff {
        Coeff::from_gauss(&GaussRat::one())
    }

    pub fn from_gauss(g: &GaussRat) -> Coeff {
        let (re, im) = g.to_f64_pair();
        let real = g.is_real();
        let positive = if real {
            Some(g.re > num_rational::Ratio::from_integer(num_bigint::BigInt::from(0)))
        } else {
            None
        };
        Coeff {
            approx: Complex64::new(re, im),
            exact: Some(g.clone()),
            real,
            positive,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(&self.exact, Some(g) if g.is_zero())
    }

    fn neg(&self) -> Coeff {
        Coeff {
            approx: -self.approx,
            exact: self.exact.as_ref().map(|g| g.neg()),
            real: self.real,
            positive: self.positive.map(|p| !p),
        }
    }

    fn conj(&self) -> Coeff {
        Coeff {
            approx: self.approx.conj(),
            exact: self.exact.as_ref().map(|g| g.conj()),
            real: self.real,
            positive: self.positive,
        }
    }

    fn abs(&self) -> Coeff {
        let exact = self.exact.as_ref().and_then(|g| {
            if g.is_real() {
                let mut a = g.clone();
                if a.re < num_rational::Ratio::from_integer(num_bigint::BigInt::from(0)) {
                    a = a.neg();
                }
                Some(a)
            } else {
                None
            }
        });
        Coeff {
            approx: Complex64::new(self.approx.norm(), 0.0),
            exact,
            real: true,
            positive: Some(true),
        }
    }

    fn mul(&self, o: &Coeff) -> Coeff {
        let exact = match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => Some(a.mul(b)),
            _ => None,
        };
        let real = self.real && o.real;
        let positive = match (self.real && o.real, self.positive, o.positive) {
            (true, Some(a), Some(b)) => Some(a == b),
            _ => None,
        };
        Coeff {
            approx: self.approx * o.approx,
            exact,
            real,
            positive,
        }
    }

    /// Sum, when its sign/zeroness can be certified: both exact, or both real
    /// with the same sign.
    fn add_certified(&self, o: &Coeff) -> Option<Coeff> {
        if let (Some(a), Some(b)) = (&self.exact, &o.exact) {
            let s = a.add(b);
            return Some(Coeff::from_gauss(&s));
        }
        if self.real && o.real && self.positive.is_some() && self.positive == o.positive {
            return Some(Coeff {
                approx: self.approx + o.approx,
                exact: None,
                real: true,
                positive: self.positive,
            });
        }
        None
    }

    fn pow_rat(&self, r: Rat) -> Coeff {
        if r.is_integer() {
            let n = *r.numer();
            let exact = self.exact.as_ref().and_then(|g| g.pow_int(n));
            let approx = self.approx.powi(n as i32);
            let positive = match (self.real, self.positive) {
                (true, Some(p)) => Some(p || n % 2 == 0),
                _ => None,
            };
            return Coeff {
                approx,
                exact,
                real: self.real,
                positive,
            };
        }
        // Principal fractional power; exact only for positive rationals with
        // perfect roots.
        if self.real && self.positive == Some(true) {
            let exact = self.exact.as_ref().and_then(|g| {
                crate::netlang::normal::bigrat_pow_exact(&g.re, r).map(|re| GaussRat {
                    re,
                    im: num_rational::Ratio::from_integer(num_bigint::BigInt::from(0)),
                })
            });
            return Coeff {
                approx: Complex64::new(self.approx.re.powf(rat_f64(r)), 0.0),
                exact,
                real: true,
                positive: Some(true),
            };
        }
        Coeff {
            approx: self.approx.powf(rat_f64(r)),
            exact: None,
            real: false,
            positive: None,
        }
    }
}

/// Leading asymptotic behavior of a net as ε → 0.
#[derive(Clone, Debug)]
pub enum Lead {
    /// Identically zero.
    Zero,
    /// `c · ε^p L^b · (1 + o(1))`, c ≠ 0.
    Mono { s: ScaleTerm, c: Coeff },
    /// `exp(a · ε^p L^b · (1 + o(1)))` with the scale growing; `a ≠ 0`, so the
    /// log-magnitude is `a·M(ε)` up to relatively vanishing corrections.
    BigExp {
        a: f64,
        /// `a` as an exact rational, when symbolically available.
        a_rat: Option<Rat>,
        exact: bool,
        s: ScaleTerm,
        /// The value itself is real (resp. eventually of this sign).
        real: bool,
        positive: Option<bool>,
    },
    /// `|x| ≤ C·env` eventually, with flags describing how tight that is:
    /// `upper_attained`: `|x| ≥ c·env` on a cofinal set of ε;
    /// `lower_positive`: `|x| ≥ c·env` for *all* small ε;
    /// `dips_below_all`: for every q, `|x| ≤ env·ε^q` on a cofinal set.
    Osc {
        env: ScaleTerm,
        upper_attained: bool,
        lower_positive: bool,
        dips_below_all: bool,
        real: bool,
    },
    /// Different asymptotics on the two branches of a named index-set split.
    Branch(String, Box<Lead>, Box<Lead>),
    /// No certified asymptotics; fall back to sampling.
    Unknown,
}

/// Dominant term of `log|x|`, used to compare magnitudes across lead kinds.
enum LogLead {
    MinusInf,
    Const,
    /// `a · ln L` (from pure `L^a` factors).
    LogL(Rat),
    /// `a · ε^{s.p} L^{s.b}` with a growing scale.
    Term { a: f64, a_rat: Option<Rat>, s: ScaleTerm },
}

enum DomCmp {
    FirstBigger,
    SecondBigger,
    TieSameScale,
    TooClose,
}

fn log_lead(l: &Lead) -> Option<LogLead> {
    Some(match l {
        Lead::Zero => LogLead::MinusInf,
        Lead::Mono { s, .. } => {
            if s.p.numer() != &0 {
                LogLead::Term {
                    a: -rat_f64(s.p),
                    a_rat: Some(-s.p),
                    s: ScaleTerm::log_inv_eps(),
                }
            } else if s.b.numer() != &0 {
                LogLead::LogL(s.b)
            } else {
                LogLead::Const
            }
        }
        Lead::BigExp { a, a_rat, s, .. } => LogLead::Term {
            a: *a,
            a_rat: *a_rat,
            s: *s,
        },
        // Envelope only; callers must handle oscillation flags themselves.
        Lead::Osc { env, .. } => {
            if env.p.numer() != &0 {
                LogLead::Term {
                    a: -rat_f64(env.p),
                    a_rat: Some(-env.p),
                    s: ScaleTerm::log_inv_eps(),
                }
            } else if env.b.numer() != &0 {
                LogLead::LogL(env.b)
            } else {
                LogLead::Const
            }
        }
        Lead::Branch(..) | Lead::Unknown => return None,
    })
}

fn dom_cmp(l1: &LogLead, l2: &LogLead) -> DomCmp {
    use LogLead::*;
    match (l1, l2) {
        (MinusInf, MinusInf) => DomCmp::TieSameScale,
        (MinusInf, _) => DomCmp::SecondBigger,
        (_, MinusInf) => DomCmp::FirstBigger,
        (Const, Const) => DomCmp::TieSameScale,
        (Const, LogL(b)) | (LogL(b), Const) => {
            let first_is_logl = matches!(l1, LogL(_));
            let logl_bigger = *b > Rat::from_integer(0);
            if first_is_logl == logl_bigger {
                DomCmp::FirstBigger
            } else {
                DomCmp::SecondBigger
            }
        }
        (LogL(b1), LogL(b2)) => match b1.cmp(b2) {
            Ordering::Greater => DomCmp::FirstBigger,
            Ordering::Less => DomCmp::SecondBigger,
            Ordering::Equal => DomCmp::TieSameScale,
        },
        (Term { a, .. }, Const | LogL(_)) => {
            if *a > 0.0 {
                DomCmp::FirstBigger
            } else {
                DomCmp::SecondBigger
            }
        }
        (Const | LogL(_), Term { a, .. }) => {
            if *a > 0.0 {
                DomCmp::SecondBigger
            } else {
                DomCmp::FirstBigger
            }
        }
        (
            Term { a: a1, a_rat: r1, s: s1 },
            Term { a: a2, a_rat: r2, s: s2 },
        ) => match s1.cmp_magnitude(s2) {
            Ordering::Greater => {
                if *a1 > 0.0 {
                    DomCmp::FirstBigger
                } else {
                    DomCmp::SecondBigger
                }
            }
            Ordering::Less => {
                if *a2 > 0.0 {
                    DomCmp::SecondBigger
                } else {
                    DomCmp::FirstBigger
                }
            }
            Ordering::Equal => {
                if let (Some(x), Some(y)) = (r1, r2) {
                    match x.cmp(y) {
                        Ordering::Greater => DomCmp::FirstBigger,
                        Ordering::Less => DomCmp::SecondBigger,
                        Ordering::Equal => DomCmp::TieSameScale,
                    }
                } else {
                    let tol = 1e-9 * a1.abs().max(a2.abs()).max(1.0);
                    if (a1 - a2).abs() <= tol {
                        DomCmp::TooClose
                    } else if a1 > a2 {
                        DomCmp::FirstBigger
                    } else {
                        DomCmp::SecondBigger
                    }
                }
            }
        },
    }
}

fn branch2(
    l1: Lead,
    l2: Lead,
    f: &impl Fn(Lead, Lead) -> Lead,
) -> Option<Lead> {
    match (&l1, &l2) {
        (Lead::Branch(n, a, b), _) => {
            let (n, a, b) = (n.clone(), (**a).clone(), (**b).clone());
            Some(Lead::Branch(
                n,
                Box::new(f(a, l2.clone())),
                Box::new(f(b, l2)),
            ))
        }
        (_, Lead::Branch(n, a, b)) => {
            let (n, a, b) = (n.clone(), (**a).clone(), (**b).clone());
            Some(Lead::Branch(
                n,
                Box::new(f(l1.clone(), a)),
                Box::new(f(l1, b)),
            ))
        }
        _ => None,
    }
}

/// Lead of a sum, keeping only certifiable information.
pub fn lead_add(l1: Lead, l2: Lead) -> Lead {
    if let Some(r) = branch2(l1.clone(), l2.clone(), &lead_add) {
        return r;
    }
    match (&l1, &l2) {
        (Lead::Unknown, _) | (_, Lead::Unknown) => return Lead::Unknown,
        (Lead::Zero, _) => return l2,
        (_, Lead::Zero) => return l1,
        _ => {}
    }
    let (g1, g2) = match (log_lead(&l1), log_lead(&l2)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Lead::Unknown,
    };
    match dom_cmp(&g1, &g2) {
        DomCmp::TooClose => Lead::Unknown,
        DomCmp::FirstBigger => absorb(l1, &l2),
        DomCmp::SecondBigger => absorb(l2, &l1),
        DomCmp::TieSameScale => tie_add(l1, l2),
    }
}

/// `big + small` where `|small| / |big| → 0`: the lead is `big`'s, except that
/// oscillation dips are floored by the small term.
fn absorb(big: Lead, small: &Lead) -> Lead {
    match big {
        Lead::Osc {
            env,
            upper_attained,
            lower_positive,
            real,
            ..
        } => Lead::Osc {
            env,
            upper_attained,
            lower_positive,
            dips_below_all: false,
            real: real && lead_is_real(small),
        },
        Lead::Mono { s, c } => {
            // The (1+o(1)) of the dominant term absorbs the small one, but
            // realness of the *value* is a joint property.
            let real = c.real && lead_is_real(small);
            let positive = if real { c.positive } else { None };
            Lead::Mono {
                s,
                c: Coeff {
                    real,
                    positive,
                    ..c
                },
            }
        }
        Lead::BigExp {
            a,
            a_rat,
            exact,
            s,
            real,
            positive,
        } => {
            let real = real && lead_is_real(small);
            Lead::BigExp {
                a,
                a_rat,
                exact,
                s,
                real,
                positive: if real { positive } else { None },
            }
        }
        other => other,
    }
}

fn lead_is_real(l: &Lead) -> bool {
    match l {
        Lead::Zero => true,
        Lead::Mono { c, .. } => c.real,
        Lead::BigExp { real, .. } => *real,
        Lead::Osc { real, .. } => *real,
        Lead::Branch(_, a, b) => lead_is_real(a) && lead_is_real(b),
        Lead::Unknown => false,
    }
}

fn tie_add(l1: Lead, l2: Lead) -> Lead {
    match (l1, l2) {
        (Lead::Mono { s: s1, c: c1 }, Lead::Mono { s: s2, c: c2 }) => {
            if s1 != s2 {
                // Same dominant log (e.g. ε·L^b ties are impossible here since
                // the L exponent enters the log lead only at lower order), so
                // differing scale terms mean an L-power mismatch: the larger b
                // wins with its own coefficient.
                let (s, c) = if s1.cmp_magnitude(&s2) == Ordering::Greater {
                    (s1, c1)
                } else {
                    (s2, c2)
                };
                return Lead::Mono { s, c };
            }
            match c1.add_certified(&c2) {
                Some(c) if c.is_zero() => Lead::Unknown,
                Some(c) => Lead::Mono { s: s1, c },
                None => Lead::Unknown,
            }
        }
        (
            Lead::BigExp {
                a,
                a_rat,
                exact: e1,
                s,
                real: r1,
                positive: p1,
            },
            Lead::BigExp {
                exact: e2,
                real: r2,
                positive: p2,
                ..
            },
        ) => {
            // Same leading exponent from different atoms: the sub-exponential
            // factors are unknown, but a sum of values of one strict sign
            // keeps the same log lead.
            if r1 && r2 && p1.is_some() && p1 == p2 {
                Lead::BigExp {
                    a,
                    a_rat,
                    exact: e1 && e2,
                    s,
                    real: true,
                    positive: p1,
                }
            } else {
                Lead::Unknown
            }
        }
        (Lead::Osc { env, real: r1, .. }, l2 @ (Lead::Mono { .. } | Lead::BigExp { .. }))
        | (l2 @ (Lead::Mono { .. } | Lead::BigExp { .. }), Lead::Osc { env, real: r1, .. }) => {
            // Oscillation plus a comparable term: only the envelope survives.
            Lead::Osc {
                env,
                upper_attained: false,
                lower_positive: false,
                dips_below_all: false,
                real: r1 && lead_is_real(&l2),
            }
        }
        (
            Lead::Osc {
                env: e1, real: r1, ..
            },
            Lead::Osc {
                env: e2, real: r2, ..
            },
        ) => {
            let env = if e1.cmp_magnitude(&e2) == Ordering::Less {
                e2
            } else {
                e1
            };
            Lead::Osc {
                env,
                upper_attained: false,
                lower_positive: false,
                dips_below_all: false,
                real: r1 && r2,
            }
        }
        (Lead::Mono { s, c }, Lead::BigExp { real, positive, .. })
        | (Lead::BigExp { real, positive, .. }, Lead::Mono { s, c }) => {
            // ε^{-a} against exp(aL + o(L)): same log lead. A shared strict
            // sign keeps the scale; anything else may cancel.
            if c.real && real && c.positive.is_some() && c.positive == positive {
                Lead::BigExp {
                    a: -rat_f64(s.p),
                    a_rat: Some(-s.p),
                    exact: false,
                    s: ScaleTerm::log_inv_eps(),
                    real: true,
                    positive,
                }
            } else {
                Lead::Unknown
            }
        }
        _ => Lead::Unknown,
    }
}

pub fn lead_mul(l1: Lead, l2: Lead) -> Lead {
    if let Some(r) = branch2(l1.clone(), l2.clone(), &lead_mul) {
        return r;
    }
    match (l1, l2) {
        (Lead::Unknown, _) | (_, Lead::Unknown) => Lead::Unknown,
        (Lead::Zero, _) | (_, Lead::Zero) => Lead::Zero,
        (Lead::Mono { s: s1, c: c1 }, Lead::Mono { s: s2, c: c2 }) => Lead::Mono {
            s: s1.mul(&s2),
            c: c1.mul(&c2),
        },
        (Lead::Mono { s, c }, Lead::BigExp { a, a_rat, exact, s: m, real, positive })
        | (Lead::BigExp { a, a_rat, exact, s: m, real, positive }, Lead::Mono { s, c }) => {
            // exp(aM)·ε^p L^b: if M strictly dominates L the polynomial factor
            // is absorbed; if M is the L scale itself, fold into the exponent.
            if m == ScaleTerm::log_inv_eps() {
                let real2 = real && c.real;
                let positive2 = match (real2, positive, c.positive) {
                    (true, Some(x), Some(y)) => Some(x == y),
                    _ => None,
                };
                let a2_rat = a_rat.map(|r| r - s.p);
                Lead::BigExp {
                    a: a - rat_f64(s.p),
                    a_rat: a2_rat,
                    exact,
                    s: m,
                    real: real2,
                    positive: positive2,
                }
            } else if m.cmp_magnitude(&ScaleTerm::log_inv_eps()) == Ordering::Greater {
                let real2 = real && c.real;
                let positive2 = match (real2, positive, c.positive) {
                    (true, Some(x), Some(y)) => Some(x == y),
                    _ => None,
                };
                Lead::BigExp {
                    a,
                    a_rat,
                    exact,
                    s: m,
                    real: real2,
                    positive: positive2,
                }
            } else {
                // Sub-L exponential scales interleave with polynomial ones;
                // the product's lead is still exp-dominated only in log terms
                // we cannot represent against both scales. Give up.
                Lead::Unknown
            }
        }
        (
            Lead::BigExp { a: a1, a_rat: r1, exact: e1, s: s1, real: x1, positive: p1 },
            Lead::BigExp { a: a2, a_rat: r2, exact: e2, s: s2, real: x2, positive: p2 },
        ) => {
            let real = x1 && x2;
            let positive = match (real, p1, p2) {
                (true, Some(a), Some(b)) => Some(a == b),
                _ => None,
            };
            match s1.cmp_magnitude(&s2) {
                Ordering::Greater => Lead::BigExp {
                    a: a1,
                    a_rat: r1,
                    exact: e1,
                    s: s1,
                    real,
                    positive,
                },
                Ordering::Less => Lead::BigExp {
                    a: a2,
                    a_rat: r2,
                    exact: e2,
                    s: s2,
                    real,
                    positive,
                },
                Ordering::Equal => {
                    let a = a1 + a2;
                    let a_rat = match (r1, r2) {
                        (Some(x), Some(y)) => Some(x + y),
                        _ => None,
                    };
                    let zero = match a_rat {
                        Some(r) => r.numer() == &0,
                        None => a.abs() <= 1e-9 * (a1.abs() + a2.abs()).max(1.0),
                    };
                    if zero {
                        // exp(o(M)) remains, which can be anything.
                        Lead::Unknown
                    } else {
                        Lead::BigExp {
                            a,
                            a_rat,
                            exact: e1 && e2,
                            s: s1,
                            real,
                            positive,
                        }
                    }
                }
            }
        }
        (Lead::Mono { s, c }, Lead::Osc { env, upper_attained, lower_positive, dips_below_all, real })
        | (Lead::Osc { env, upper_attained, lower_positive, dips_below_all, real }, Lead::Mono { s, c }) => {
            Lead::Osc {
                env: env.mul(&s),
                upper_attained,
                lower_positive,
                dips_below_all,
                real: real && c.real,
            }
        }
        (
            Lead::Osc { env: e1, upper_attained: u1, lower_positive: lp1, dips_below_all: d1, real: r1 },
            Lead::Osc { env: e2, upper_attained: _, lower_positive: lp2, dips_below_all: d2, real: r2 },
        ) => Lead::Osc {
            env: e1.mul(&e2),
            upper_attained: false,
            lower_positive: lp1 && lp2,
            dips_below_all: (d1 && lp2) || (d2 && lp1),
            real: r1 && r2,
        },
        (Lead::BigExp { .. }, Lead::Osc { .. }) | (Lead::Osc { .. }, Lead::BigExp { .. }) => {
            Lead::Unknown
        }
        _ => Lead::Unknown,
    }
}

pub fn lead_pow(l: Lead, r: Rat) -> Lead {
    if r.numer() == &0 {
        return Lead::Mono {
            s: ScaleTerm::one(),
            c: Coeff::one(),
        };
    }
    match l {
        Lead::Branch(n, a, b) => Lead::Branch(
            n,
            Box::new(lead_pow(*a, r)),
            Box::new(lead_pow(*b, r)),
        ),
        Lead::Unknown => Lead::Unknown,
        Lead::Zero => {
            if r > Rat::from_integer(0) {
                Lead::Zero
            } else {
                Lead::Unknown
            }
        }
        Lead::Mono { s, c } => Lead::Mono {
            s: s.pow(r),
            c: c.pow_rat(r),
        },
        Lead::BigExp { a, a_rat, exact, s, real, positive } => {
            let rf = rat_f64(r);
            let real2 = real && positive == Some(true);
            Lead::BigExp {
                a: a * rf,
                a_rat: a_rat.map(|x| x * r),
                exact,
                s,
                real: real2 || r.is_integer() && real,
                positive: if real2 {
                    Some(true)
                } else if r.is_integer() && real {
                    positive.map(|p| p || r.numer() % 2 == 0)
                } else {
                    None
                },
            }
        }
        Lead::Osc { env, upper_attained, lower_positive, dips_below_all, real } => {
            let neg = r < Rat::from_integer(0);
            if neg && !lower_positive {
                // Inverting something that dips toward zero produces spikes
                // with no envelope.
                return Lead::Unknown;
            }
            Lead::Osc {
                env: env.pow(r),
                // With a two-sided bound c·env ≤ |x| ≤ C·env, every power is
                // again two-sided.
                upper_attained: if neg { true } else { upper_attained },
                lower_positive,
                dips_below_all: dips_below_all && !neg,
                real: real && r.is_integer(),
            }
        }
    }
}

fn lead_conj(l: Lead) -> Lead {
    match l {
        Lead::Mono { s, c } => Lead::Mono { s, c: c.conj() },
        Lead::Branch(n, a, b) => {
            Lead::Branch(n, Box::new(lead_conj(*a)), Box::new(lead_conj(*b)))
        }
        other => other,
    }
}

fn lead_abs(l: Lead) -> Lead {
    match l {
        Lead::Zero => Lead::Zero,
        Lead::Mono { s, c } => Lead::Mono { s, c: c.abs() },
        Lead::BigExp { a, a_rat, exact, s, .. } => Lead::BigExp {
            a,
            a_rat,
            exact,
            s,
            real: true,
            positive: Some(true),
        },
        Lead::Osc { env, upper_attained, lower_positive, dips_below_all, .. } => Lead::Osc {
            env,
            upper_attained,
            lower_positive,
            dips_below_all,
            real: true,
        },
        Lead::Branch(n, a, b) => {
            Lead::Branch(n, Box::new(lead_abs(*a)), Box::new(lead_abs(*b)))
        }
        Lead::Unknown => Lead::Unknown,
    }
}

fn analyze_atom(atom: &Atom) -> Lead {
    match atom {
        Atom::Eps => Lead::Mono {
            s: ScaleTerm::eps(),
            c: Coeff::one(),
        },
        // The gauge must be substituted before analysis; a residual `rho` has
        // no asymptotics of its own.
        Atom::Rho => Lead::Unknown,
        Atom::Param(_) => Lead::Unknown,
        Atom::App(f, x) => analyze_app(*f, x),
        Atom::PowBase(b, r) => lead_pow(analyze_nf(b), *r),
        Atom::Piece(n, a, b) => Lead::Branch(
            n.clone(),
            Box::new(analyze_nf(a)),
            Box::new(analyze_nf(b)),
        ),
    }
}

fn analyze_app(f: Func, x: &Nf) -> Lead {
    let xl = analyze_nf(x);
    match f {
        Func::Exp => exp_lead(x, xl),
        Func::Log => log_lead_of(x, xl),
        Func::Sin => trig_lead(xl, true),
        Func::Cos => trig_lead(xl, false),
        Func::Abs => lead_abs(xl),
        Func::Conj => lead_conj(xl),
    }
}

fn exp_lead(x: &Nf, xl: Lead) -> Lead {
    // Purely imaginary argument: |exp| = 1 exactly.
    let times_minus_i = x.mul(&Nf::constant(GaussRat {
        re: num_rational::Ratio::from_integer(num_bigint::BigInt::from(0)),
        im: num_rational::Ratio::from_integer(num_bigint::BigInt::from(-1)),
    }));
    if !x.is_zero() && times_minus_i.is_real() {
        return Lead::Osc {
            env: ScaleTerm::one(),
            upper_attained: true,
            lower_positive: true,
            dips_below_all: false,
            real: false,
        };
    }
    let arg_real = x.is_real();
    match xl {
        Lead::Zero => Lead::Mono {
            s: ScaleTerm::one(),
            c: Coeff::one(),
        },
        Lead::Mono { s, c } => {
            if s.grows() {
                let a = c.approx.re;
                if a == 0.0 {
                    // Leading coefficient purely imaginary but lower-order real
                    // parts unknown.
                    return Lead::Unknown;
                }
                let a_rat = c.exact.as_ref().and_then(|g| {
                    let n = g.re.numer().to_i64()?;
                    let d = g.re.denom().to_i64()?;
                    Some(Rat::new(n, d))
                });
                Lead::BigExp {
                    a,
                    a_rat,
                    exact: c.exact.is_some(),
                    s,
                    real: arg_real,
                    positive: if arg_real { Some(true) } else { None },
                }
            } else if s.vanishes() {
                Lead::Mono {
                    s: ScaleTerm::one(),
                    c: Coeff {
                        approx: Complex64::new(1.0, 0.0),
                        exact: Some(GaussRat::one()),
                        real: arg_real,
                        positive: if arg_real { Some(true) } else { None },
                    },
                }
            } else {
                // Constant argument c: exp(c)(1+o(1)), never zero.
                let v = c.approx.exp();
                Lead::Mono {
                    s: ScaleTerm::one(),
                    c: Coeff {
                        approx: v,
                        exact: None,
                        real: c.real,
                        positive: if c.real { Some(true) } else { None },
                    },
                }
            }
        }
        Lead::BigExp { a, real, .. } => {
            if a < 0.0 {
                // exp(vanishing) → 1.
                let r = real || arg_real;
                Lead::Mono {
                    s: ScaleTerm::one(),
                    c: Coeff {
                        approx: Complex64::new(1.0, 0.0),
                        exact: Some(GaussRat::one()),
                        real: r,
                        positive: if r { Some(true) } else { None },
                    },
                }
            } else {
                // exp(±e^{M}) is outside the representable scales.
                Lead::Unknown
            }
        }
        Lead::Osc { env, real, .. } => {
            if real && (env.vanishes() || env.is_one()) {
                // exp of a bounded real oscillation: bounded above and below.
                Lead::Osc {
                    env: ScaleTerm::one(),
                    upper_attained: false,
                    lower_positive: true,
                    dips_below_all: false,
                    real: true,
                }
            } else {
                Lead::Unknown
            }
        }
        Lead::Branch(n, p, q) => Lead::Branch(
            n,
            Box::new(exp_lead(x, *p)),
            Box::new(exp_lead(x, *q)),
        ),
        Lead::Unknown => Lead::Unknown,
    }
}

fn log_lead_of(x: &Nf, xl: Lead) -> Lead {
    match xl {
        Lead::Zero | Lead::Unknown => Lead::Unknown,
        Lead::Mono { s, c } => {
            if s.p.numer() != &0 {
                // log = -p·L + O(log L): exact rational leading coefficient.
                Lead::Mono {
                    s: ScaleTerm::log_inv_eps(),
                    c: Coeff::from_gauss(&GaussRat::from_rat(-s.p)),
                }
            } else if s.b.numer() != &0 {
                // log = b·ln L + O(1): below every representable scale but
                // still unbounded; too fine to matter against a gauge, and
                // treatable as an L^0 envelope is wrong. Give up cleanly.
                Lead::Unknown
            } else {
                // Constant argument: log(c)(1+o(1)) unless c = 1, where the
                // vanishing correction decides; recurse on x - 1.
                match &c.exact {
                    Some(g) if *g == GaussRat::one() => {
                        let shifted = x.sub(&Nf::one());
                        if shifted.is_zero() {
                            Lead::Zero
                        } else {
                            analyze_nf(&shifted)
                        }
                    }
                    Some(g) => {
                        // log of an exact Gaussian rational ≠ 1 is never zero.
                        let (re, im) = g.to_f64_pair();
                        let v = Complex64::new(re, im);
                        let pos_real = c.real && c.positive == Some(true);
                        Lead::Mono {
                            s: ScaleTerm::one(),
                            c: Coeff {
                                approx: v.ln(),
                                exact: None,
                                real: pos_real,
                                positive: if pos_real { Some(re > 1.0) } else { None },
                            },
                        }
                    }
                    None => Lead::Unknown,
                }
            }
        }
        Lead::BigExp { a, a_rat, exact, s, .. } => {
            // log(exp(aM(1+o))) = aM(1+o) + bounded phase.
            Lead::Mono {
                s,
                c: Coeff {
                    approx: Complex64::new(a, 0.0),
                    exact: match (exact, a_rat) {
                        (true, Some(r)) => Some(GaussRat::from_rat(r)),
                        _ => None,
                    },
                    real: true,
                    positive: Some(a > 0.0),
                },
            }
        }
        Lead::Osc { .. } => Lead::Unknown,
        Lead::Branch(n, p, q) => Lead::Branch(
            n,
            Box::new(log_lead_of(x, *p)),
            Box::new(log_lead_of(x, *q)),
        ),
    }
}

fn trig_lead(xl: Lead, is_sin: bool) -> Lead {
    match xl {
        Lead::Zero => {
            if is_sin {
                Lead::Zero
            } else {
                Lead::Mono {
                    s: ScaleTerm::one(),
                    c: Coeff::one(),
                }
            }
        }
        Lead::Mono { s, c } => {
            if s.vanishes() {
                if is_sin {
                    // sin(y) = y(1+o(1)): keeps the exact coefficient.
                    Lead::Mono { s, c }
                } else {
                    Lead::Mono {
                        s: ScaleTerm::one(),
                        c: Coeff {
                            approx: Complex64::new(1.0, 0.0),
                            exact: Some(GaussRat::one()),
                            real: c.real,
                            positive: if c.real { Some(true) } else { None },
                        },
                    }
                }
            } else if s.is_one() {
                // Constant argument: sin(c)/cos(c); nonzero is certified only
                // for exact Gaussian rationals (never a zero of sin/cos except
                // sin at 0, excluded).
                match &c.exact {
                    Some(g) => {
                        let (re, im) = g.to_f64_pair();
                        let z = Complex64::new(re, im);
                        let v = if is_sin { z.sin() } else { z.cos() };
                        Lead::Mono {
                            s: ScaleTerm::one(),
                            c: Coeff {
                                approx: v,
                                exact: None,
                                real: c.real,
                                positive: if c.real {
                                    Some(v.re > 0.0)
                                } else {
                                    None
                                },
                            },
                        }
                    }
                    None => Lead::Unknown,
                }
            } else if c.real {
                // Real argument → ±∞: unit-envelope oscillation that attains
                // its envelope and dips below every polynomial scale
                // cofinally (the argument sweeps the continuum).
                Lead::Osc {
                    env: ScaleTerm::one(),
                    upper_attained: true,
                    lower_positive: false,
                    dips_below_all: true,
                    real: true,
                }
            } else if c.approx.im != 0.0 && c.exact.is_some() {
                // |sin(x+iy)| ~ e^{|y|}/2 as |y| → ∞.
                let aim = c.approx.im.abs();
                let a_rat = c.exact.as_ref().and_then(|g| {
                    let n = g.im.numer().to_i64()?;
                    let d = g.im.denom().to_i64()?;
                    let r = Rat::new(n, d);
                    Some(if r < Rat::from_integer(0) { -r } else { r })
                });
                Lead::BigExp {
                    a: aim,
                    a_rat,
                    exact: true,
                    s,
                    real: false,
                    positive: None,
                }
            } else {
                Lead::Unknown
            }
        }
        Lead::BigExp { a, a_rat, exact, s, real, .. } => {
            if a < 0.0 {
                // Argument vanishes superpolynomially; sin keeps the scale,
                // cos tends to 1.
                if is_sin {
                    Lead::BigExp {
                        a,
                        a_rat,
                        exact,
                        s,
                        real,
                        positive: None,
                    }
                } else {
                    Lead::Mono {
                        s: ScaleTerm::one(),
                        c: Coeff {
                            approx: Complex64::new(1.0, 0.0),
                            exact: Some(GaussRat::one()),
                            real,
                            positive: if real { Some(true) } else { None },
                        },
                    }
                }
            } else if real {
                Lead::Osc {
                    env: ScaleTerm::one(),
                    upper_attained: true,
                    lower_positive: false,
                    dips_below_all: true,
                    real: true,
                }
            } else {
                Lead::Unknown
            }
        }
        Lead::Osc { env, real, .. } => {
            if real && (env.vanishes() || env.is_one()) {
                Lead::Osc {
                    env: ScaleTerm::one(),
                    upper_attained: false,
                    lower_positive: false,
                    dips_below_all: false,
                    real: true,
                }
            } else {
                Lead::Unknown
            }
        }
        Lead::Branch(n, p, q) => Lead::Branch(
            n,
            Box::new(trig_lead(*p, is_sin)),
            Box::new(trig_lead(*q, is_sin)),
        ),
        Lead::Unknown => Lead::Unknown,
    }
}

fn analyze_mono_term(m: &Mono, c: &GaussRat) -> Lead {
    let mut acc = Lead::Mono {
        s: ScaleTerm::one(),
        c: Coeff::from_gauss(c),
    };
    for (atom, e) in &m.0 {
        let al = lead_pow(analyze_atom(atom), *e);
        acc = lead_mul(acc, al);
    }
    acc
}

pub fn analyze_poly(p: &Poly) -> Lead {
    if p.is_zero() {
        return Lead::Zero;
    }
    let mut acc = Lead::Zero;
    for (m, c) in &p.0 {
        acc = lead_add(acc, analyze_mono_term(m, c));
    }
    acc
}

pub fn analyze_nf(nf: &Nf) -> Lead {
    let num = analyze_poly(&nf.num);
    if matches!(num, Lead::Zero) {
        return Lead::Zero;
    }
    let den = analyze_poly(&nf.den);
    lead_mul(num, lead_pow(den, Rat::from_integer(-1)))
}

/// Lead of an expression over a gauge: gauge substituted, then normalized.
pub fn lead_of_expr(e: &NetExpr, gauge: &Gauge) -> Lead {
    let sub = gauge.subst_into(e);
    match normalize(&sub) {
        Ok(nf) => analyze_nf(&nf),
        Err(_) => Lead::Unknown,
    }
}

/// Structural realness of an expression over a gauge.
pub fn expr_is_real(e: &NetExpr, gauge: &Gauge) -> bool {
    let sub = gauge.subst_into(e);
    normalize(&sub).map(|nf| nf.is_real()).unwrap_or(false)
}

/// `log ρ_ε ~ -c · ε^p L^b` for the gauge, when derivable.
#[derive(Clone, Copy, Debug)]
pub struct GaugeAsym {
    pub c: f64,
    pub c_rat: Option<Rat>,
    pub exact: bool,
    pub s: ScaleTerm,
}

pub fn gauge_asym(gauge: &Gauge) -> Option<GaugeAsym> {
    let log_expr = NetExpr::Apply(Func::Log, Box::new(gauge.expr.clone()));
    let nf = normalize(&log_expr).ok()?;
    match analyze_nf(&nf) {
        Lead::Mono { s, c } if s.grows() && c.real && c.positive == Some(false) => {
            let c_rat = c.exact.as_ref().and_then(|g| {
                let n = g.re.numer().to_i64()?;
                let d = g.re.denom().to_i64()?;
                Some(-Rat::new(n, d))
            });
            Some(GaugeAsym {
                c: -c.approx.re,
                c_rat,
                exact: c.exact.is_some(),
                s,
            })
        }
        _ => None,
    }
}

/// A point of the extended order line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum OrderValue {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl OrderValue {
    pub fn min(self, o: OrderValue) -> OrderValue {
        use OrderValue::*;
        match (self, o) {
            (NegInfinity, _) | (_, NegInfinity) => NegInfinity,
            (Finite(a), Finite(b)) => Finite(a.min(b)),
            (Finite(a), PosInfinity) | (PosInfinity, Finite(a)) => Finite(a),
            (PosInfinity, PosInfinity) => PosInfinity,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, OrderValue::Finite(_))
    }
}

/// Symbolic order result: the liminf of `log|x|/log ρ`, either pinned exactly
/// or bounded from below.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymOrder {
    Exact(OrderValue),
    AtLeast(OrderValue),
    Unknown,
}

fn scale_order(s: &ScaleTerm, g: &GaugeAsym) -> OrderValue {
    // Order contribution of ε^p L^b alone.
    if s.p.numer() == &0 {
        return OrderValue::Finite(0.0);
    }
    let ell = ScaleTerm::log_inv_eps();
    match g.s.cmp_magnitude(&ell) {
        Ordering::Equal => OrderValue::Finite(rat_f64(s.p) / g.c),
        Ordering::Greater => OrderValue::Finite(0.0),
        Ordering::Less => {
            if s.p > Rat::from_integer(0) {
                OrderValue::PosInfinity
            } else {
                OrderValue::NegInfinity
            }
        }
    }
}

/// Order of a lead against a gauge's log asymptotics.
pub fn ord_of_lead(lead: &Lead, g: &GaugeAsym) -> SymOrder {
    match lead {
        Lead::Zero => SymOrder::Exact(OrderValue::PosInfinity),
        Lead::Mono { s, .. } => SymOrder::Exact(scale_order(s, g)),
        Lead::BigExp { a, s, .. } => match s.cmp_magnitude(&g.s) {
            Ordering::Equal => SymOrder::Exact(OrderValue::Finite(-a / g.c)),
            Ordering::Greater => {
                if *a < 0.0 {
                    SymOrder::Exact(OrderValue::PosInfinity)
                } else {
                    SymOrder::Exact(OrderValue::NegInfinity)
                }
            }
            Ordering::Less => SymOrder::Exact(OrderValue::Finite(0.0)),
        },
        Lead::Osc { env, upper_attained, .. } => {
            let q = scale_order(env, g);
            if *upper_attained {
                SymOrder::Exact(q)
            } else {
                SymOrder::AtLeast(q)
            }
        }
        Lead::Branch(_, a, b) => {
            // Both branch index sets are taken to be cofinal; the liminf over
            // the union is the minimum.
            match (ord_of_lead(a, g), ord_of_lead(b, g)) {
                (SymOrder::Exact(x), SymOrder::Exact(y)) => SymOrder::Exact(x.min(y)),
                (SymOrder::Exact(x), SymOrder::AtLeast(y))
                | (SymOrder::AtLeast(x), SymOrder::Exact(y))
                | (SymOrder::AtLeast(x), SymOrder::AtLeast(y)) => {
                    SymOrder::AtLeast(x.min(y))
                }
                _ => SymOrder::Unknown,
            }
        }
        Lead::Unknown => SymOrder::Unknown,
    }
}

/// Everything classification needs from a lead, with `None` for undecided.
#[derive(Clone, Debug, Default)]
pub struct SymClass {
    pub is_zero_net: bool,
    pub infinitesimal: Option<bool>,
    pub finite: Option<bool>,
    pub infinite: Option<bool>,
    /// The limit of the net when it exists and is known.
    pub limit: Option<(f64, f64)>,
    pub limit_exists: Option<bool>,
    /// `Some(q)`: certified `|x| ≥ c·ρ^q` eventually (two-sided scale control).
    pub lower_order: Option<OrderValue>,
    /// Eventual sign, when the net is real: −1, 0, +1.
    pub sign: Option<i8>,
}

pub fn class_of_lead(lead: &Lead, g: Option<&GaugeAsym>) -> SymClass {
    match lead {
        Lead::Zero => SymClass {
            is_zero_net: true,
            infinitesimal: Some(true),
            finite: Some(true),
            infinite: Some(false),
            limit: Some((0.0, 0.0)),
            limit_exists: Some(true),
            lower_order: None,
            sign: Some(0),
        },
        Lead::Mono { s, c } => {
            let lower = g.map(|g| scale_order(s, g));
            if s.vanishes() {
                SymClass {
                    is_zero_net: false,
                    infinitesimal: Some(true),
                    finite: Some(true),
                    infinite: Some(false),
                    limit: Some((0.0, 0.0)),
                    limit_exists: Some(true),
                    lower_order: lower,
                    sign: sign_of_coeff(c),
                }
            } else if s.is_one() {
                SymClass {
                    is_zero_net: false,
                    infinitesimal: Some(false),
                    finite: Some(true),
                    infinite: Some(false),
                    limit: Some((c.approx.re, c.approx.im)),
                    limit_exists: Some(true),
                    lower_order: lower,
                    sign: sign_of_coeff(c),
                }
            } else {
                SymClass {
                    is_zero_net: false,
                    infinitesimal: Some(false),
                    finite: Some(false),
                    infinite: Some(true),
                    limit: None,
                    limit_exists: Some(false),
                    lower_order: lower,
                    sign: sign_of_coeff(c),
                }
            }
        }
        Lead::BigExp { a, s, real, positive, .. } => {
            let lower = g.map(|g| match ord_of_lead(lead, g) {
                SymOrder::Exact(v) | SymOrder::AtLeast(v) => v,
                SymOrder::Unknown => OrderValue::Finite(f64::NAN),
            });
            if *a < 0.0 {
                SymClass {
                    is_zero_net: false,
                    infinitesimal: Some(true),
                    finite: Some(true),
                    infinite: Some(false),
                    limit: Some((0.0, 0.0)),
                    limit_exists: Some(true),
                    lower_order: lower,
                    sign: if *real {
                        positive.map(|p| if p { 1 } else { -1 })
                    } else {
                        None
                    },
                }
            } else {
                SymClass {
                    is_zero_net: false,
                    infinitesimal: Some(false),
                    finite: Some(false),
                    infinite: Some(true),
                    limit: None,
                    limit_exists: Some(false),
                    lower_order: lower,
                    sign: if *real {
                        positive.map(|p| if p { 1 } else { -1 })
                    } else {
                        None
                    },
                }
            }
        }
        Lead::Osc { env, upper_attained, lower_positive, dips_below_all, .. } => {
            let lower = match (lower_positive, g) {
                (true, Some(g)) => Some(scale_order(env, g)),
                _ => None,
            };
            if env.vanishes() {
                SymClass {
                    is_zero_net: false,
                    infinitesimal: Some(true),
                    finite: Some(true),
                    infinite: Some(false),
                    limit: Some((0.0, 0.0)),
                    limit_exists: Some(true),
                    lower_order: lower,
                    sign: None,
                }
            } else if env.is_one() {
                SymClass {
                    is_zero_net: false,
                    infinitesimal: if *upper_attained { Some(false) } else { None },
                    finite: Some(true),
                    infinite: Some(false),
                    limit: None,
                    limit_exists: None,
                    lower_order: lower,
                    sign: None,
                }
            } else {
                SymClass {
                    is_zero_net: false,
                    infinitesimal: Some(false),
                    finite: if *upper_attained { Some(false) } else { None },
                    infinite: if *dips_below_all {
                        Some(false)
                    } else if *lower_positive {
                        Some(true)
                    } else {
                        None
                    },
                    limit: None,
                    limit_exists: Some(false),
                    lower_order: lower,
                    sign: None,
                }
            }
        }
        Lead::Branch(_, a, b) => {
            let ca = class_of_lead(a, g);
            let cb = class_of_lead(b, g);
            fn join<T: PartialEq + Copy>(x: Option<T>, y: Option<T>) -> Option<T> {
                match (x, y) {
                    (Some(a), Some(b)) if a == b => Some(a),
                    _ => None,
                }
            }
            SymClass {
                is_zero_net: ca.is_zero_net && cb.is_zero_net,
                infinitesimal: join(ca.infinitesimal, cb.infinitesimal),
                finite: join(ca.finite, cb.finite),
                infinite: join(ca.infinite, cb.infinite),
                limit: join(ca.limit, cb.limit),
                limit_exists: join(ca.limit_exists, cb.limit_exists),
                lower_order: match (ca.lower_order, cb.lower_order) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    _ => None,
                },
                sign: join(ca.sign, cb.sign),
            }
        }
        Lead::Unknown => SymClass::default(),
    }
}

fn sign_of_coeff(c: &Coeff) -> Option<i8> {
    if !c.real {
        return None;
    }
    c.positive.map(|p| if p { 1 } else { -1 })
}

/// Ordinary least squares fit `y = slope·x + intercept` with the slope's
/// standard error, for tail regressions of `log|x_ε|` against `log ρ_ε`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub used: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<TailFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (*x, *y))
        .collect();
    let n = pts.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let dof = (n - 2) as f64;
    let se = (ss_res / dof / sxx).sqrt();
    Some(TailFit {
        slope,
        intercept,
        se_slope: se,
        used: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{EpsGrid, Gauge};
    use crate::netlang::parse;

    fn std_gauge() -> std::sync::Arc<Gauge> {
        Gauge::standard()
    }

    fn exp_gauge() -> Gauge {
        Gauge::parse_new("sigma", "exp(-1/eps)", EpsGrid::default()).unwrap()
    }

    fn ord(src: &str, g: &Gauge) -> SymOrder {
        let e = parse(src).unwrap();
        let lead = lead_of_expr(&e, g);
        let ga = gauge_asym(g).unwrap();
        ord_of_lead(&lead, &ga)
    }

    #[test]
    fn polynomial_orders() {
        let g = std_gauge();
        assert_eq!(ord("rho^3 + rho^5", &g), SymOrder::Exact(OrderValue::Finite(3.0)));
        assert_eq!(
            ord("(2*eps^3 - eps^5)/(1 + eps)", &g),
            SymOrder::Exact(OrderValue::Finite(3.0))
        );
        assert_eq!(ord("eps^-2", &g), SymOrder::Exact(OrderValue::Finite(-2.0)));
        assert_eq!(ord("eps - eps", &g), SymOrder::Exact(OrderValue::PosInfinity));
    }

    #[test]
    fn gauge_power_net_is_negligible_over_both_gauges() {
        // rho^{1/eps}, written with exp/log since exponents are rational.
        let src = "exp(log(rho)/eps)";
        for g in [&*std_gauge(), &exp_gauge()] {
            match ord(src, g) {
                SymOrder::Exact(OrderValue::PosInfinity) => {}
                other => panic!("expected +inf order over {}, got {other:?}", g.name),
            }
        }
    }

    #[test]
    fn two_pow_inverse_eps_regauges() {
        let src = "exp(-log(2)/eps)";
        // Over rho = eps it is negligible …
        assert_eq!(
            ord(src, &std_gauge()),
            SymOrder::Exact(OrderValue::PosInfinity)
        );
        // … over sigma = exp(-1/eps) it has finite order log 2 and is a
        // strictly positive real.
        let g = exp_gauge();
        match ord(src, &g) {
            SymOrder::Exact(OrderValue::Finite(v)) => {
                assert!((v - std::f64::consts::LN_2).abs() < 1e-12, "v = {v}");
            }
            other => panic!("expected finite order, got {other:?}"),
        }
        let lead = lead_of_expr(&parse(src).unwrap(), &g);
        match lead {
            Lead::BigExp { real, positive, .. } => {
                assert!(real);
                assert_eq!(positive, Some(true));
            }
            other => panic!("expected BigExp, got {other:?}"),
        }
    }

    #[test]
    fn oscillating_net_classification() {
        let g = std_gauge();
        let e = parse("eps^-1*sin(eps^-1)").unwrap();
        let lead = lead_of_expr(&e, &g);
        let class = class_of_lead(&lead, gauge_asym(&g).as_ref());
        assert_eq!(class.infinitesimal, Some(false));
        assert_eq!(class.finite, Some(false));
        assert_eq!(class.infinite, Some(false));
    }

    #[test]
    fn unit_modulus_exponential() {
        let g = std_gauge();
        let e = parse("exp(i/eps)").unwrap();
        let lead = lead_of_expr(&e, &g);
        let ga = gauge_asym(&g).unwrap();
        assert_eq!(ord_of_lead(&lead, &ga), SymOrder::Exact(OrderValue::Finite(0.0)));
        let class = class_of_lead(&lead, Some(&ga));
        assert_eq!(class.infinitesimal, Some(false));
        assert_eq!(class.finite, Some(true));
        assert_eq!(class.lower_order, Some(OrderValue::Finite(0.0)));
    }

    #[test]
    fn cancellation_of_inexact_ties_degrades() {
        let g = std_gauge();
        let e = parse("sin(eps)^2 + cos(eps)^2 - 1").unwrap();
        let lead = lead_of_expr(&e, &g);
        assert!(matches!(lead, Lead::Unknown | Lead::Osc { .. }));
    }

    #[test]
    fn log_near_one_recurses() {
        let g = std_gauge();
        // log(1 + eps) ~ eps.
        assert_eq!(ord("log(1 + eps)", &g), SymOrder::Exact(OrderValue::Finite(1.0)));
    }

    #[test]
    fn fit_recovers_slope() {
        let xs: Vec<f64> = (0..12).map(|k| -(k as f64)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x + 0.3).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!(fit.se_slope < 1e-12);
    }
}
