//! Exact normal form for net expressions.
//!
//! An expression is flattened to a ratio of multivariate Laurent polynomials
//! over the Gaussian rationals. Variables are *atoms*: `eps`, `rho`, `param`
//! slots, and opaque wrappers for function applications, non-distributable
//! rational powers, and piecewise splits (each carrying its argument in
//! normal form, so structural equality reaches inside them). Zero difference
//! of cross products is then a *proof* of pointwise equality of the two nets
//! on their common domain; a nonzero difference proves nothing and callers
//! fall back to sampling.
//!
//! Soundness around principal branches: rational powers distribute over a
//! product only when every factor is known nonnegative real (then the
//! argument of the product is the argument of its one general factor), and
//! `x^a · x^b → x^(a+b)` is used only at the atom level where both sides are
//! powers of the *same* principal logarithm. `(x^a)^b → x^(ab)` is never used
//! except under the same nonnegativity guard.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

use super::{Func, NetExpr, Rat};

pub type BigRat = num_rational::Ratio<BigInt>;

fn bigrat_from_rat(r: Rat) -> BigRat {
    BigRat::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Exact complex rational `re + im·i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussRat {
    pub re: BigRat,
    pub im: BigRat,
}

impl GaussRat {
    pub fn zero() -> Self {
        GaussRat {
            re: BigRat::zero(),
            im: BigRat::zero(),
        }
    }

    pub fn one() -> Self {
        GaussRat {
            re: BigRat::from(BigInt::from(1)),
            im: BigRat::zero(),
        }
    }

    pub fn i() -> Self {
        GaussRat {
            re: BigRat::zero(),
            im: BigRat::from(BigInt::from(1)),
        }
    }

    pub fn from_rat(r: Rat) -> Self {
        GaussRat {
            re: bigrat_from_rat(r),
            im: BigRat::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_positive_real(&self) -> bool {
        self.im.is_zero() && self.re.is_positive()
    }

    pub fn add(&self, o: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn neg(&self) -> GaussRat {
        GaussRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn mul(&self, o: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn conj(&self) -> GaussRat {
        GaussRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn abs2(&self) -> BigRat {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<GaussRat> {
        if self.is_zero() {
            return None;
        }
        let d = self.abs2();
        Some(GaussRat {
            re: &self.re / &d,
            im: -self.im.clone() / &d,
        })
    }

    pub fn pow_int(&self, n: i64) -> Option<GaussRat> {
        if n < 0 {
            return self.inv().and_then(|v| v.pow_int(-n));
        }
        let mut base = self.clone();
        let mut acc = GaussRat::one();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        Some(acc)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

fn bigint_root_exact(x: &BigInt, n: u32) -> Option<BigInt> {
    if x.is_negative() {
        if n % 2 == 0 {
            return None;
        }
        return bigint_root_exact(&-x, n).map(|r| -r);
    }
    let r = x.nth_root(n);
    if num_traits::pow(r.clone(), n as usize) == *x {
        Some(r)
    } else {
        None
    }
}

fn bigrat_pow_int(c: &BigRat, n: i64) -> Option<BigRat> {
    if n < 0 {
        if c.is_zero() {
            return None;
        }
        return bigrat_pow_int(&c.recip(), -n);
    }
    Some(num_traits::pow(c.clone(), n as usize))
}

/// Exact `c^r` for positive rational `c`, if the root is rational.
pub fn bigrat_pow_exact(c: &BigRat, r: Rat) -> Option<BigRat> {
    if r.is_integer() {
        return bigrat_pow_int(c, *r.numer());
    }
    if !c.is_positive() {
        return None;
    }
    let b = *r.denom() as u32;
    let rn = bigint_root_exact(c.numer(), b)?;
    let rd = bigint_root_exact(c.denom(), b)?;
    bigrat_pow_int(&BigRat::new(rn, rd), *r.numer())
}

/// A variable of the polynomial ring. `App`, `PowBase`, and `Piece` carry
/// their arguments in normal form, so identical subexpressions collapse to
/// the same atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Eps,
    Rho,
    Param(String),
    App(Func, Box<Nf>),
    /// Principal `base^r` left opaque because the base is not a monomial of
    /// nonnegative-real factors.
    PowBase(Box<Nf>, Rat),
    Piece(String, Box<Nf>, Box<Nf>),
}

impl Atom {
    /// Known to take nonnegative real values wherever it is defined.
    fn is_nonneg_real(&self) -> bool {
        match self {
            Atom::Eps | Atom::Rho => true,
            Atom::Param(_) => false,
            Atom::App(Func::Abs, _) => true,
            Atom::App(Func::Exp, a) => a.is_real(),
            Atom::App(_, _) => false,
            Atom::PowBase(b, _) => b.is_nonneg_real(),
            Atom::Piece(_, a, b) => a.is_nonneg_real() && b.is_nonneg_real(),
        }
    }

    /// Known to take real values wherever it is defined.
    fn is_real(&self) -> bool {
        match self {
            Atom::Eps | Atom::Rho => true,
            Atom::Param(_) => false,
            Atom::App(Func::Abs, _) => true,
            Atom::App(Func::Exp | Func::Sin | Func::Cos, a) => a.is_real(),
            Atom::App(Func::Log, a) => a.is_nonneg_real(),
            Atom::App(Func::Conj, a) => a.is_real(),
            Atom::PowBase(b, _) => b.is_nonneg_real(),
            Atom::Piece(_, a, b) => a.is_real() && b.is_real(),
        }
    }
}

/// Product of atom powers with rational exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Mono(pub BTreeMap<Atom, Rat>);

impl Mono {
    pub fn one() -> Mono {
        Mono(BTreeMap::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atom(a: Atom) -> Mono {
        let mut m = BTreeMap::new();
        m.insert(a, Rat::from_integer(1));
        Mono(m)
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut out = self.0.clone();
        for (a, e) in &o.0 {
            let cur = out.entry(a.clone()).or_insert_with(|| Rat::from_integer(0));
            *cur += *e;
            if cur.numer() == &0 {
                out.remove(a);
            }
        }
        Mono(out)
    }

    fn scale_exponents(&self, r: Rat) -> Mono {
        Mono(self.0.iter().map(|(a, e)| (a.clone(), *e * r)).collect())
    }
}

/// Sum of monomials with Gaussian-rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly(pub BTreeMap<Mono, GaussRat>);

impl Poly {
    pub fn zero() -> Poly {
        Poly(BTreeMap::new())
    }

    pub fn one() -> Poly {
        Poly::constant(GaussRat::one())
    }

    pub fn constant(c: GaussRat) -> Poly {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(Mono::one(), c);
        }
        Poly(m)
    }

    pub fn from_mono(m: Mono, c: GaussRat) -> Poly {
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert(m, c);
        }
        Poly(t)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.0.clone();
        for (m, c) in &o.0 {
            match out.get_mut(m) {
                Some(cur) => {
                    *cur = cur.add(c);
                    if cur.is_zero() {
                        out.remove(m);
                    }
                }
                None => {
                    out.insert(m.clone(), c.clone());
                }
            }
        }
        Poly(out)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c.neg())).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out: BTreeMap<Mono, GaussRat> = BTreeMap::new();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &o.0 {
                let m = m1.mul(m2);
                let c = c1.mul(c2);
                match out.get_mut(&m) {
                    Some(cur) => {
                        *cur = cur.add(&c);
                        if cur.is_zero() {
                            out.remove(&m);
                        }
                    }
                    None => {
                        if !c.is_zero() {
                            out.insert(m, c);
                        }
                    }
                }
            }
        }
        Poly(out)
    }

    pub fn pow_usize(&self, n: usize) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// The unique `(monomial, coefficient)` term, if there is exactly one.
    pub fn single(&self) -> Option<(&Mono, &GaussRat)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    fn scale(&self, c: &GaussRat) -> Poly {
        Poly(
            self.0
                .iter()
                .map(|(m, v)| (m.clone(), v.mul(c)))
                .collect(),
        )
    }

    fn is_nonneg_real(&self) -> bool {
        self.0.iter().all(|(m, c)| {
            c.is_positive_real() && m.0.keys().all(|a| a.is_nonneg_real())
        })
    }

    fn is_real(&self) -> bool {
        self.0
            .iter()
            .all(|(m, c)| c.is_real() && m.0.keys().all(|a| a.is_real()))
    }
}

/// Normal form: a canonicalized ratio of polynomials.
///
/// Canonical shape: zero is `0/1`; each atom's minimum exponent across all
/// monomials of numerator and denominator is zero (so exponents are
/// nonnegative and no common monomial factor remains); the denominator's
/// leading coefficient is 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Nf {
    pub num: Poly,
    pub den: Poly,
}

impl Nf {
    pub fn zero() -> Nf {
        Nf {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Nf {
        Nf::constant(GaussRat::one())
    }

    pub fn constant(c: GaussRat) -> Nf {
        Nf {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn atom(a: Atom) -> Nf {
        Nf {
            num: Poly::from_mono(Mono::atom(a), GaussRat::one()),
            den: Poly::one(),
        }
    }

    fn make(num: Poly, den: Poly) -> Nf {
        debug_assert!(!den.is_zero(), "normal form with zero denominator");
        if num.is_zero() {
            return Nf::zero();
        }
        // Strip the common monomial content: shift every atom so that its
        // minimum exponent over all monomials (numerator and denominator,
        // absent = 0) becomes zero.
        let mut min_exp: BTreeMap<Atom, Rat> = BTreeMap::new();
        let all_monos = num.0.keys().chain(den.0.keys());
        let mut seen_any = false;
        for m in all_monos {
            if !seen_any {
                for (a, e) in &m.0 {
                    min_exp.insert(a.clone(), *e);
                }
                seen_any = true;
            } else {
                min_exp.retain(|a, cur| {
                    let e = m.0.get(a).copied().unwrap_or_else(|| Rat::from_integer(0));
                    if e < *cur {
                        *cur = e;
                    }
                    true
                });
                for (a, e) in &m.0 {
                    min_exp
                        .entry(a.clone())
                        .or_insert_with(|| Rat::from_integer(0).min(*e));
                }
            }
        }
        min_exp.retain(|_, e| e.numer() != &0);
        let strip = |p: &Poly| -> Poly {
            if min_exp.is_empty() {
                return p.clone();
            }
            Poly(
                p.0.iter()
                    .map(|(m, c)| {
                        let mut mm = m.0.clone();
                        for (a, shift) in &min_exp {
                            let cur = mm.entry(a.clone()).or_insert_with(|| Rat::from_integer(0));
                            *cur -= *shift;
                            if cur.numer() == &0 {
                                mm.remove(a);
                            }
                        }
                        (Mono(mm), c.clone())
                    })
                    .collect(),
            )
        };
        let mut num = strip(&num);
        let mut den = strip(&den);
        // Hmm: stripping by per-atom minima over *all* monomials never makes
        // an exponent negative, and at least one monomial hits zero for each
        // stripped atom.
        let lead = den
            .0
            .values()
            .next()
            .expect("nonzero denominator")
            .clone();
        if lead != GaussRat::one() {
            let inv = lead.inv().expect("nonzero leading coefficient");
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Nf { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The exact constant value, if the normal form is a constant.
    pub fn as_constant(&self) -> Option<GaussRat> {
        if self.is_zero() {
            return Some(GaussRat::zero());
        }
        let (nm, nc) = self.num.single()?;
        let (dm, dc) = self.den.single()?;
        if nm.is_one() && dm.is_one() {
            Some(nc.mul(&dc.inv()?))
        } else {
            None
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c == GaussRat::one()).unwrap_or(false)
    }

    pub fn add(&self, o: &Nf) -> Nf {
        if self.den == o.den {
            return Nf::make(self.num.add(&o.num), self.den.clone());
        }
        Nf::make(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn neg(&self) -> Nf {
        Nf {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &Nf) -> Nf {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Nf) -> Nf {
        Nf::make(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    /// Division; errors on a structurally zero divisor.
    pub fn div(&self, o: &Nf) -> Result<Nf> {
        if o.is_zero() {
            return Err(Error::Invalid(
                "division by a structurally zero expression".into(),
            ));
        }
        Ok(Nf::make(self.num.mul(&o.den), self.den.mul(&o.num)))
    }

    pub fn is_nonneg_real(&self) -> bool {
        self.num.is_nonneg_real() && self.den.is_nonneg_real()
    }

    pub fn is_real(&self) -> bool {
        self.num.is_real() && self.den.is_real()
    }

    /// Principal `self^r`.
    pub fn pow_rat(&self, r: Rat) -> Result<Nf> {
        if self.is_zero() {
            if r.numer() > &0 {
                return Ok(Nf::zero());
            }
            if r.numer() == &0 {
                return Ok(Nf::one());
            }
            return Err(Error::Invalid(
                "zero base raised to a negative power".into(),
            ));
        }
        if r.is_integer() {
            let n = *r.numer();
            let (num, den) = if n >= 0 {
                (self.num.clone(), self.den.clone())
            } else {
                (self.den.clone(), self.num.clone())
            };
            let k = n.unsigned_abs() as usize;
            return Ok(Nf::make(num.pow_usize(k), den.pow_usize(k)));
        }
        // Fractional power. A pure atom to the first power picks up the
        // exponent directly (same principal logarithm by definition).
        if let (Some((nm, nc)), Some((dm, dc))) = (self.num.single(), self.den.single()) {
            let coeff = nc.mul(&dc.inv().expect("nonzero"));
            let mono = nm.mul(&dm.scale_exponents(Rat::from_integer(-1)));
            if coeff == GaussRat::one() && mono.0.len() == 1 {
                let (a, e) = mono.0.iter().next().expect("single atom");
                if *e == Rat::from_integer(1) {
                    return Ok(Nf::make(
                        Poly::from_mono(Mono::atom(a.clone()).scale_exponents(r), GaussRat::one()),
                        Poly::one(),
                    ));
                }
            }
            // A monomial of nonnegative-real atoms: the argument of the value
            // is the argument of the coefficient, so the power distributes.
            if mono.0.keys().all(|a| a.is_nonneg_real()) {
                let mut out = mono.scale_exponents(r);
                let out_coeff = if coeff.is_positive_real() {
                    match bigrat_pow_exact(&coeff.re, r) {
                        Some(c) => GaussRat {
                            re: c,
                            im: BigRat::zero(),
                        },
                        None => {
                            let inner = Nf::constant(coeff.clone());
                            let cur = out
                                .0
                                .entry(Atom::PowBase(Box::new(inner), r))
                                .or_insert_with(|| Rat::from_integer(0));
                            *cur += Rat::from_integer(1);
                            GaussRat::one()
                        }
                    }
                } else {
                    let inner = Nf::constant(coeff.clone());
                    let cur = out
                        .0
                        .entry(Atom::PowBase(Box::new(inner), r))
                        .or_insert_with(|| Rat::from_integer(0));
                    *cur += Rat::from_integer(1);
                    GaussRat::one()
                };
                return Ok(Nf::make(Poly::from_mono(out, out_coeff), Poly::one()));
            }
        }
        Ok(Nf::atom(Atom::PowBase(Box::new(self.clone()), r)))
    }

    /// If this is exactly one application `f(x)` (coefficient 1), return `x`.
    fn as_single_app(&self, f: Func) -> Option<Nf> {
        let (nm, nc) = self.num.single()?;
        let (dm, dc) = self.den.single()?;
        if !dm.is_one() || nc != &GaussRat::one() || dc != &GaussRat::one() {
            return None;
        }
        if nm.0.len() != 1 {
            return None;
        }
        let (a, e) = nm.0.iter().next()?;
        if *e != Rat::from_integer(1) {
            return None;
        }
        match a {
            Atom::App(g, inner) if *g == f => Some((**inner).clone()),
            _ => None,
        }
    }

    /// Complex conjugate, distributed through the fraction.
    pub fn conj(&self) -> Result<Nf> {
        let num = conj_poly(&self.num)?;
        let den = conj_poly(&self.den)?;
        num.div(&den)
    }
}

fn conj_poly(p: &Poly) -> Result<Nf> {
    let mut acc = Nf::zero();
    for (m, c) in &p.0 {
        let mut term = Nf::constant(c.conj());
        for (a, e) in &m.0 {
            let factor = conj_atom(a)?.pow_rat(*e)?;
            term = term.mul(&factor);
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

fn conj_atom(a: &Atom) -> Result<Nf> {
    Ok(match a {
        Atom::Eps => Nf::atom(Atom::Eps),
        Atom::Rho => Nf::atom(Atom::Rho),
        Atom::Param(p) => Nf::atom(Atom::App(
            Func::Conj,
            Box::new(Nf::atom(Atom::Param(p.clone()))),
        )),
        Atom::App(Func::Abs, x) => Nf::atom(Atom::App(Func::Abs, x.clone())),
        Atom::App(Func::Conj, x) => (**x).clone(),
        // exp, sin, cos, and principal log commute with conjugation on the
        // domain where the expression is defined (off the log branch cut).
        Atom::App(f, x) => apply_fold(*f, x.conj()?)?,
        Atom::PowBase(b, r) => b.conj()?.pow_rat(*r)?,
        Atom::Piece(n, x, y) => {
            let cx = x.conj()?;
            let cy = y.conj()?;
            if cx == cy {
                cx
            } else {
                Nf::atom(Atom::Piece(n.clone(), Box::new(cx), Box::new(cy)))
            }
        }
    })
}

fn apply_fold(f: Func, a: Nf) -> Result<Nf> {
    Ok(match f {
        Func::Exp => {
            if a.is_zero() {
                Nf::one()
            } else if let Some(x) = a.as_single_app(Func::Log) {
                x
            } else {
                Nf::atom(Atom::App(Func::Exp, Box::new(a)))
            }
        }
        Func::Log => {
            if a.is_one() {
                Nf::zero()
            } else {
                Nf::atom(Atom::App(Func::Log, Box::new(a)))
            }
        }
        Func::Sin => {
            if a.is_zero() {
                Nf::zero()
            } else {
                Nf::atom(Atom::App(Func::Sin, Box::new(a)))
            }
        }
        Func::Cos => {
            if a.is_zero() {
                Nf::one()
            } else {
                Nf::atom(Atom::App(Func::Cos, Box::new(a)))
            }
        }
        Func::Conj => a.conj()?,
        Func::Abs => abs_fold(a)?,
    })
}

fn abs_fold(a: Nf) -> Result<Nf> {
    if let Some(c) = a.as_constant() {
        if c.is_real() {
            return Ok(Nf::constant(GaussRat {
                re: c.re.abs(),
                im: BigRat::zero(),
            }));
        }
        if let Some(m) = bigint_sqrt_ratio(&c.abs2()) {
            return Ok(Nf::constant(GaussRat {
                re: m,
                im: BigRat::zero(),
            }));
        }
        return Ok(Nf::atom(Atom::App(Func::Abs, Box::new(a))));
    }
    if a.is_nonneg_real() {
        return Ok(a);
    }
    // |c·Πxᵢ^eᵢ| = |c|·Π|xᵢ|^eᵢ for real exponents.
    if let (Some((nm, nc)), Some((dm, dc))) = (a.num.single(), a.den.single()) {
        let coeff = nc.mul(&dc.inv().expect("nonzero"));
        let mono = nm.mul(&dm.scale_exponents(Rat::from_integer(-1)));
        let abs_coeff = if coeff.is_real() {
            Some(GaussRat {
                re: coeff.re.abs(),
                im: BigRat::zero(),
            })
        } else {
            bigint_sqrt_ratio(&coeff.abs2()).map(|m| GaussRat {
                re: m,
                im: BigRat::zero(),
            })
        };
        if let Some(abs_coeff) = abs_coeff {
            let mut out = Nf::constant(abs_coeff);
            for (atom, e) in &mono.0 {
                let factor = if atom.is_nonneg_real() {
                    Nf::atom(atom.clone())
                } else {
                    Nf::atom(Atom::App(Func::Abs, Box::new(Nf::atom(atom.clone()))))
                };
                out = out.mul(&factor.pow_rat(*e)?);
            }
            return Ok(out);
        }
    }
    Ok(Nf::atom(Atom::App(Func::Abs, Box::new(a))))
}

fn bigint_sqrt_ratio(x: &BigRat) -> Option<BigRat> {
    if x.is_negative() {
        return None;
    }
    let n = bigint_root_exact(x.numer(), 2)?;
    let d = bigint_root_exact(x.denom(), 2)?;
    Some(BigRat::new(n, d))
}

/// Flatten an expression to normal form. Errors mirror the evaluator's
/// structural domain errors (zero divisor, zero base with negative power).
pub fn normalize(e: &NetExpr) -> Result<Nf> {
    Ok(match e {
        NetExpr::Num(r) => Nf::constant(GaussRat::from_rat(*r)),
        NetExpr::ImagUnit => Nf::constant(GaussRat::i()),
        NetExpr::Eps => Nf::atom(Atom::Eps),
        NetExpr::Rho => Nf::atom(Atom::Rho),
        NetExpr::Param(p) => Nf::atom(Atom::Param(p.clone())),
        NetExpr::Neg(a) => normalize(a)?.neg(),
        NetExpr::Add(a, b) => normalize(a)?.add(&normalize(b)?),
        NetExpr::Sub(a, b) => normalize(a)?.sub(&normalize(b)?),
        NetExpr::Mul(a, b) => normalize(a)?.mul(&normalize(b)?),
        NetExpr::Div(a, b) => normalize(a)?.div(&normalize(b)?)?,
        NetExpr::Pow(b, r) => normalize(b)?.pow_rat(*r)?,
        NetExpr::Apply(f, a) => apply_fold(*f, normalize(a)?)?,
        NetExpr::Piecewise(n, a, b) => {
            let na = normalize(a)?;
            let nb = normalize(b)?;
            if na == nb {
                na
            } else {
                Nf::atom(Atom::Piece(n.clone(), Box::new(na), Box::new(nb)))
            }
        }
    })
}

/// Structural proof that two expressions denote the same net wherever both
/// are defined: the cross product of their normal forms cancels exactly.
pub fn proves_equal(a: &NetExpr, b: &NetExpr) -> Result<bool> {
    let na = normalize(a)?;
    let nb = normalize(b)?;
    Ok(nf_equal(&na, &nb))
}

pub fn nf_equal(a: &Nf, b: &Nf) -> bool {
    if a == b {
        return true;
    }
    a.num.mul(&b.den).sub(&b.num.mul(&a.den)).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlang::parse;

    fn nf(src: &str) -> Nf {
        normalize(&parse(src).unwrap()).unwrap()
    }

    fn eq(a: &str, b: &str) -> bool {
        nf_equal(&nf(a), &nf(b))
    }

    #[test]
    fn ring_identities_cancel() {
        assert!(eq("(eps + rho)^2", "eps^2 + 2*eps*rho + rho^2"));
        assert!(eq("(eps - rho)*(eps + rho)", "eps^2 - rho^2"));
        assert!(eq("1/(1/eps)", "eps"));
        assert!(eq("eps/rho + rho/eps", "(eps^2 + rho^2)/(eps*rho)"));
        assert!(!eq("eps + rho", "eps*rho"));
    }

    #[test]
    fn gaussian_arithmetic() {
        assert!(eq("i*i", "-1"));
        assert!(eq("(1 + i)*(1 - i)", "2"));
        assert!(eq("conj(conj(param(z)))", "param(z)"));
        assert!(eq("conj(i*eps)", "-i*eps"));
        assert!(eq("abs(-3*eps)", "3*eps"));
        assert!(eq("abs((3 + 4*i)*eps)", "5*eps"));
    }

    #[test]
    fn principal_powers_guarded() {
        // Positive base: the power distributes and roots fold exactly.
        assert!(eq("(4*eps^2)^(1/2)", "2*eps"));
        assert!(eq("(8*rho^3)^(2/3)", "4*rho^2"));
        // eps^(1/2) squared collapses back (same principal log).
        assert!(eq("eps^(1/2)*eps^(1/2)", "eps"));
        // A complex base must *not* distribute: (i·eps)^(1/2) stays opaque,
        // and in particular is not i^(1/2)·eps^(1/2) structurally.
        let opaque = nf("(i*eps)^(1/2)");
        let (m, _) = opaque.num.single().expect("single term");
        assert!(m.0.keys().any(|a| matches!(a, Atom::PowBase(..))));
        // (x^2)^(1/2) is not merged to x.
        assert!(!eq("(param(z)^2)^(1/2)", "param(z)"));
    }

    #[test]
    fn function_folds() {
        assert!(eq("exp(log(eps + 1))", "eps + 1"));
        assert!(eq("exp(0)", "1"));
        assert!(eq("cos(eps - eps)", "1"));
        assert!(eq("conj(exp(i*eps))", "exp(-i*eps)"));
        assert!(eq(
            "piecewise(L, eps + eps, 2*eps)",
            "2*eps"
        ));
        assert!(!eq("sin(eps)^2 + cos(eps)^2", "1"), "not a ring identity");
    }

    #[test]
    fn gauge_substitution_cancels() {
        // eps*rho - rho^2 over the gauge rho = eps collapses to zero.
        let e = parse("eps*rho - rho^2").unwrap();
        let sub = e.subst_rho(&parse("eps").unwrap());
        assert!(normalize(&sub).unwrap().is_zero());
    }
}
