//! Wide-range complex arithmetic.
//!
//! Nets routinely take values like `rho_eps^-40` or `exp(-1/eps^2)` that are
//! far outside `f64` range. [`WideComplex`] keeps a plain `Complex64` while
//! the value fits (so that in-range computations are bit-identical to naive
//! complex arithmetic) and switches to a log-polar representation
//! `(log-magnitude, phase)` on overflow or total underflow.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Upper bound on `ln|z|` for demoting a log-polar value back to `Std`.
const DEMOTE_LM: f64 = 600.0;

/// A complex number that may live far outside `f64` range.
#[derive(Clone, Copy, Debug)]
pub enum WideComplex {
    /// Ordinary double-precision complex value.
    Std(Complex64),
    /// `sign-free` log-polar form: the value `exp(lm) * exp(i*ph)`.
    /// `lm` may be `+inf` (overflow marker); zero is always `Std(0)`.
    Log { lm: f64, ph: f64 },
}

pub use WideComplex::{Log, Std};

/// Log-sum-exp of two log-magnitude bounds: `ln(e^a + e^b)` without
/// overflow. Used to combine uncertainty bounds.
pub(crate) fn lse2(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if lo == f64::NEG_INFINITY || hi - lo > 40.0 {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Wrap a phase into `(-pi, pi]`.
pub fn wrap_phase(ph: f64) -> f64 {
    if ph > -PI && ph <= PI {
        return ph;
    }
    let mut x = ph % TAU;
    if x <= -PI {
        x += TAU;
    } else if x > PI {
        x -= TAU;
    }
    x
}

impl WideComplex {
    pub const ZERO: WideComplex = Std(Complex64::new(0.0, 0.0));
    pub const ONE: WideComplex = Std(Complex64::new(1.0, 0.0));
    pub const I: WideComplex = Std(Complex64::new(0.0, 1.0));

    pub fn from_f64(x: f64) -> Self {
        Std(Complex64::new(x, 0.0))
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            Std(z)
        } else {
            Log { lm: f64::INFINITY, ph: 0.0 }
        }
    }

    /// Build from log-magnitude and phase.
    pub fn from_log(lm: f64, ph: f64) -> Self {
        if lm == f64::NEG_INFINITY {
            return WideComplex::ZERO;
        }
        let v = Log { lm, ph: wrap_phase(ph) };
        v.maybe_demote()
    }

    fn maybe_demote(self) -> Self {
        match self {
            Log { lm, ph } if lm.abs() <= DEMOTE_LM => {
                Std(Complex64::from_polar(lm.exp(), ph))
            }
            other => other,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Std(z) => z.re == 0.0 && z.im == 0.0,
            Log { .. } => false,
        }
    }

    /// `ln |z|`; `-inf` for zero, `+inf` for the overflow marker.
    pub fn lm(&self) -> f64 {
        match self {
            Std(z) => {
                let n = z.norm();
                if n == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    n.ln()
                }
            }
            Log { lm, .. } => *lm,
        }
    }

    pub fn phase(&self) -> f64 {
        match self {
            Std(z) => z.arg(),
            Log { ph, .. } => *ph,
        }
    }

    /// `true` if the value overflowed past representable magnitude.
    pub fn is_overflow(&self) -> bool {
        matches!(self, Log { lm, .. } if *lm == f64::INFINITY)
    }

    /// `true` if the value lost its phase or magnitude entirely (NaN parts).
    pub fn is_indeterminate(&self) -> bool {
        match self {
            Std(z) => z.re.is_nan() || z.im.is_nan(),
            Log { lm, ph } => lm.is_nan() || ph.is_nan(),
        }
    }

    /// Exactly on the negative real axis (zero excluded).
    pub fn is_negative_real(&self) -> bool {
        match self {
            Std(z) => z.im == 0.0 && z.re < 0.0,
            Log { ph, .. } => *ph == std::f64::consts::PI,
        }
    }

    /// Materialize as `Complex64` when the magnitude fits.
    pub fn try_to_complex(&self) -> Option<Complex64> {
        match self {
            Std(z) => Some(*z),
            Log { lm, ph } => {
                if *lm < 709.0 {
                    Some(Complex64::from_polar(lm.exp(), *ph))
                } else {
                    None
                }
            }
        }
    }

    /// Best-effort `Complex64`, saturating overflow to infinity.
    pub fn to_complex_lossy(&self) -> Complex64 {
        self.try_to_complex().unwrap_or_else(|| {
            let ph = self.phase();
            Complex64::new(f64::INFINITY * ph.cos().signum(), f64::INFINITY * ph.sin().signum())
        })
    }

    pub fn re_lossy(&self) -> f64 {
        match self {
            Std(z) => z.re,
            Log { lm, ph } => {
                if *lm < 709.0 {
                    lm.exp() * ph.cos()
                } else {
                    f64::INFINITY * ph.cos().signum()
                }
            }
        }
    }

    pub fn neg(self) -> Self {
        match self {
            Std(z) => Std(-z),
            Log { lm, ph } => Log { lm, ph: wrap_phase(ph + PI) },
        }
    }

    pub fn conj(self) -> Self {
        match self {
            Std(z) => Std(z.conj()),
            Log { lm, ph } => Log { lm, ph: wrap_phase(-ph) },
        }
    }

    pub fn abs(self) -> Self {
        match self {
            Std(z) => Std(Complex64::new(z.norm(), 0.0)),
            Log { lm, .. } => Log { lm, ph: 0.0 },
        }
    }

    pub fn add(self, other: Self) -> Self {
        if let (Std(a), Std(b)) = (self, other) {
            let s = a + b;
            if s.re.is_finite() && s.im.is_finite() {
                return Std(s);
            }
        }
        // log-pivot path
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (la, pa) = (self.lm(), self.phase());
        let (lb, pb) = (other.lm(), other.phase());
        let (big_l, big_p, small_l, small_p) =
            if la >= lb { (la, pa, lb, pb) } else { (lb, pb, la, pa) };
        if big_l == f64::INFINITY {
            return Log { lm: f64::INFINITY, ph: big_p };
        }
        let d = small_l - big_l; // <= 0
        let w = Complex64::from_polar(1.0, big_p)
            + Complex64::from_polar(if d < -745.0 { 0.0 } else { d.exp() }, small_p);
        let wn = w.norm();
        if wn == 0.0 {
            return WideComplex::ZERO;
        }
        WideComplex::from_log(big_l + wn.ln(), w.arg())
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    pub fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return WideComplex::ZERO;
        }
        if let (Std(a), Std(b)) = (self, other) {
            let p = a * b;
            if p.re.is_finite() && p.im.is_finite() && !(p.re == 0.0 && p.im == 0.0) {
                return Std(p);
            }
        }
        WideComplex::from_log(self.lm() + other.lm(), self.phase() + other.phase())
    }

    /// Division; caller must ensure `other` is nonzero.
    pub fn div(self, other: Self) -> Self {
        if self.is_zero() {
            return WideComplex::ZERO;
        }
        if let (Std(a), Std(b)) = (self, other) {
            let q = a / b;
            if q.re.is_finite() && q.im.is_finite() && !(q.re == 0.0 && q.im == 0.0) {
                return Std(q);
            }
        }
        WideComplex::from_log(self.lm() - other.lm(), self.phase() - other.phase())
    }

    /// Integer power by binary powering (shared with the reference evaluator).
    pub fn powi(self, n: i64) -> Self {
        if n == 0 {
            return WideComplex::ONE;
        }
        if self.is_zero() {
            return if n > 0 { WideComplex::ZERO } else { Log { lm: f64::INFINITY, ph: 0.0 } };
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = WideComplex::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(base);
            }
        }
        if n < 0 {
            WideComplex::ONE.div(acc)
        } else {
            acc
        }
    }

    /// Principal rational power `z^(p/q) = exp((p/q) ln z)`.
    pub fn pow_rat(self, p: i64, q: i64) -> Self {
        debug_assert!(q > 0);
        if q == 1 {
            return self.powi(p);
        }
        if self.is_zero() {
            return if p > 0 { WideComplex::ZERO } else if p == 0 { WideComplex::ONE } else {
                Log { lm: f64::INFINITY, ph: 0.0 }
            };
        }
        let r = p as f64 / q as f64;
        if let Std(z) = self {
            let w = (z.ln() * r).exp();
            if w.re.is_finite() && w.im.is_finite() && !(w.re == 0.0 && w.im == 0.0) {
                return Std(w);
            }
        }
        WideComplex::from_log(r * self.lm(), r * self.phase())
    }

    pub fn exp(self) -> Self {
        let z = match self {
            Std(z) => z,
            Log { lm, ph } => {
                if lm >= 709.0 {
                    // |argument| overflows f64: only the sign of the real part matters
                    let c = ph.cos();
                    if c < 0.0 {
                        return WideComplex::ZERO;
                    } else if c > 0.0 {
                        return Log { lm: f64::INFINITY, ph: 0.0 };
                    } else {
                        return Log { lm: f64::NAN, ph: 0.0 };
                    }
                }
                Complex64::from_polar(lm.exp(), ph)
            }
        };
        if z.re > -700.0 && z.re < 700.0 {
            let w = z.exp();
            if w.re.is_finite() && w.im.is_finite() {
                return Std(w);
            }
        }
        WideComplex::from_log(z.re, z.im)
    }

    /// Principal logarithm. Caller must ensure the value is nonzero.
    pub fn ln(self) -> Self {
        match self {
            Std(z) => Std(z.ln()),
            Log { lm, ph } => Std(Complex64::new(lm, ph)),
        }
    }

    pub fn sin(self) -> Option<Self> {
        match self.try_to_complex() {
            Some(z) => {
                if z.im.abs() > 700.0 {
                    // sin(x+iy) ~ (e^{|y|}/2)(sin x + i sign(y) cos x)
                    let w = Complex64::new(z.re.sin(), z.im.signum() * z.re.cos());
                    Some(WideComplex::from_log(z.im.abs() - std::f64::consts::LN_2 + w.norm().ln(), w.arg()))
                } else {
                    let w = z.sin();
                    if w.re.is_finite() && w.im.is_finite() {
                        Some(Std(w))
                    } else {
                        None
                    }
                }
            }
            None => None,
        }
    }

    pub fn cos(self) -> Option<Self> {
        match self.try_to_complex() {
            Some(z) => {
                if z.im.abs() > 700.0 {
                    // cos(x+iy) ~ (e^{|y|}/2)(cos x - i sign(y) sin x)
                    let w = Complex64::new(z.re.cos(), -z.im.signum() * z.re.sin());
                    Some(WideComplex::from_log(z.im.abs() - std::f64::consts::LN_2 + w.norm().ln(), w.arg()))
                } else {
                    let w = z.cos();
                    if w.re.is_finite() && w.im.is_finite() {
                        Some(Std(w))
                    } else {
                        None
                    }
                }
            }
            None => None,
        }
    }

    /// Numerically stable sum: pivot on the largest magnitude.
    pub fn sum(items: impl IntoIterator<Item = WideComplex>) -> WideComplex {
        let items: Vec<WideComplex> = items.into_iter().collect();
        let max_lm = items.iter().map(|x| x.lm()).fold(f64::NEG_INFINITY, f64::max);
        if max_lm == f64::NEG_INFINITY {
            return WideComplex::ZERO;
        }
        if max_lm == f64::INFINITY {
            return Log { lm: f64::INFINITY, ph: 0.0 };
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for x in &items {
            let d = x.lm() - max_lm;
            if d > -745.0 {
                acc += Complex64::from_polar(d.exp(), x.phase());
            }
        }
        let n = acc.norm();
        if n == 0.0 {
            return WideComplex::ZERO;
        }
        WideComplex::from_log(max_lm + n.ln(), acc.arg())
    }

    /// Relative closeness test in wide range: true when
    /// `|a-b| <= rel * max(|a|,|b|)`.
    pub fn approx_eq(self, other: Self, rel: f64) -> bool {
        let d = self.sub(other);
        if d.is_zero() {
            return true;
        }
        let scale = self.lm().max(other.lm());
        d.lm() <= scale + rel.ln()
    }
}

/// A wide-range signed real: `sign * exp(lm)`.
#[derive(Clone, Copy, Debug)]
pub struct SignedLog {
    pub sign: i8,
    pub lm: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, lm: f64::NEG_INFINITY };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog { sign: if x > 0.0 { 1 } else { -1 }, lm: x.abs().ln() }
        }
    }

    pub fn from_log(sign: i8, lm: f64) -> Self {
        if sign == 0 || lm == f64::NEG_INFINITY {
            SignedLog::ZERO
        } else {
            SignedLog { sign, lm }
        }
    }

    pub fn to_f64_lossy(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.lm.exp()
        }
    }

    pub fn neg(self) -> Self {
        SignedLog { sign: -self.sign, lm: self.lm }
    }

    pub fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.lm >= other.lm { (self, other) } else { (other, self) };
        let d = small.lm - big.lm; // <= 0
        let t = if d < -745.0 { 0.0 } else { d.exp() };
        if big.sign == small.sign {
            SignedLog { sign: big.sign, lm: big.lm + (1.0 + t).ln() }
        } else {
            let m = 1.0 - t;
            if m <= 0.0 {
                SignedLog::ZERO
            } else {
                SignedLog { sign: big.sign, lm: big.lm + m.ln() }
            }
        }
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    /// Total order consistent with the represented real values.
    pub fn cmp_val(self, other: Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self.sign, other.sign) {
            (0, 0) => Equal,
            (a, b) if a < b => Less,
            (a, b) if a > b => Greater,
            (1, 1) => self.lm.partial_cmp(&other.lm).unwrap_or(Equal),
            _ => other.lm.partial_cmp(&self.lm).unwrap_or(Equal),
        }
    }

    pub fn min_val(self, other: Self) -> Self {
        if self.cmp_val(other) == std::cmp::Ordering::Greater { other } else { self }
    }

    pub fn max_val(self, other: Self) -> Self {
        if self.cmp_val(other) == std::cmp::Ordering::Less { other } else { self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())), "{a} vs {b}");
    }

    #[test]
    fn in_range_ops_match_complex64() {
        let a = Complex64::new(1.25, -0.5);
        let b = Complex64::new(-3.0, 0.125);
        let wa = Std(a);
        let wb = Std(b);
        assert_eq!(wa.add(wb).try_to_complex().unwrap(), a + b);
        assert_eq!(wa.mul(wb).try_to_complex().unwrap(), a * b);
        assert_eq!(wa.div(wb).try_to_complex().unwrap(), a / b);
        assert_eq!(wa.powi(3).try_to_complex().unwrap(), a * a * a);
    }

    #[test]
    fn underflow_products_survive() {
        let tiny = WideComplex::from_f64(1e-200);
        let p = tiny.mul(tiny).mul(tiny); // 1e-600, below f64
        close(p.lm(), 3.0 * (1e-200f64).ln(), 1e-12);
        let back = p.div(tiny).div(tiny);
        close(back.lm(), (1e-200f64).ln(), 1e-12);
    }

    #[test]
    fn overflow_roundtrip() {
        let big = WideComplex::from_f64(1e300);
        let p = big.mul(big); // 1e600
        assert!(p.try_to_complex().is_none());
        close(p.lm(), 600.0 * std::f64::consts::LN_10, 1e-9);
        let q = p.div(big);
        close(q.try_to_complex().unwrap().re, 1e300, 1e-9);
    }

    #[test]
    fn exp_of_huge_negative_real_is_zero_free_log() {
        let x = WideComplex::from_f64(-5.0e7);
        let e = x.exp();
        close(e.lm(), -5.0e7, 1e-9);
        assert!(!e.is_zero());
    }

    #[test]
    fn exp_of_log_form_argument() {
        // exp(-1/eps^2) at eps = 1e-200: argument magnitude 1e400 (log form), negative real
        let arg = WideComplex::from_f64(-1.0).div(WideComplex::from_f64(1e-200).powi(2));
        let e = arg.exp();
        assert!(e.is_zero()); // below representable log-magnitude: collapses to exact zero
    }

    #[test]
    fn add_cancellation_of_log_forms() {
        let a = WideComplex::from_log(2000.0, 0.3);
        let b = a.neg();
        assert!(a.add(b).is_zero());
        let c = WideComplex::from_log(2000.0, 0.3 + 1e-8);
        let d = a.sub(c);
        // |a - c| ~ |a| * 1e-8
        close(d.lm(), 2000.0 + (1e-8f64).ln(), 1e-6);
    }

    #[test]
    fn pow_rat_principal_branch() {
        let minus_one = WideComplex::from_f64(-1.0);
        let r = minus_one.pow_rat(1, 2);
        let z = r.try_to_complex().unwrap();
        close(z.re, 0.0, 1e-15);
        close(z.im, 1.0, 1e-15);
    }

    #[test]
    fn signed_log_orders_values() {
        let a = SignedLog::from_f64(-2.0);
        let b = SignedLog::from_f64(1e-300);
        let c = SignedLog::from_f64(3.0);
        assert_eq!(a.cmp_val(b), std::cmp::Ordering::Less);
        assert_eq!(c.cmp_val(b), std::cmp::Ordering::Greater);
        let s = a.add(c); // 1.0
        close(s.to_f64_lossy(), 1.0, 1e-12);
        let tiny_diff = b.sub(b);
        assert_eq!(tiny_diff.sign, 0);
    }

    #[test]
    fn wide_sum_pivots() {
        let items = vec![
            WideComplex::from_log(1000.0, 0.0),
            WideComplex::from_log(999.0, PI),
            WideComplex::from_f64(1.0),
        ];
        let s = WideComplex::sum(items);
        // e^1000 - e^999 = e^999 (e - 1)
        close(s.lm(), 999.0 + (std::f64::consts::E - 1.0f64).ln(), 1e-9);
    }
}
