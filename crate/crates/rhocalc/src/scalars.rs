//! Generalized scalars: the ring of moderate nets modulo negligible nets over
//! a gauge, with decision procedures that are symbolic-first and fall back to
//! sampled estimates carrying confidence information.
//!
//! A [`GenNumber`] keeps either its defining expression (so equalities and
//! orders can be *proved* via the exact normal form and the lead calculus) or
//! a vector of sampled values on the gauge's ε-grid, optionally with per-point
//! uncertainty bounds from upstream quadrature. Every verdict says which path
//! decided it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::netlang::normal::{normalize, proves_equal};
use crate::netlang::{eval, ex, EvalCtx, NetExpr, Rat};
use crate::order::{
    class_of_lead, gauge_asym, lead_of_expr, linear_fit, ord_of_lead, Lead, OrderValue, SymClass,
    SymOrder,
};
use crate::par;
use crate::wide::WideComplex;

/// Relative noise floor (in log scale) assumed for plain expression
/// evaluation; uncertainty attached by quadrature pipelines comes on top.
const LN_REL_FLOOR: f64 = -29.933606208922594; // ln(1e-13)

/// How many trailing grid points enter tail regressions.
pub const TAIL_POINTS: usize = 12;

/// Default decision order for equality-style tests.
pub const DEFAULT_ORDER: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictValue {
    True,
    False,
    Undecidable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Symbolic,
    Sampled,
}

/// Outcome of a three-valued decision procedure.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub value: VerdictValue,
    /// The order the decision was taken at: `None` means the symbolic proof
    /// holds at every order.
    pub decided_at_order: Option<f64>,
    pub method: Method,
    pub detail: String,
}

impl Verdict {
    pub fn symbolic(value: VerdictValue, detail: impl Into<String>) -> Verdict {
        Verdict {
            value,
            decided_at_order: None,
            method: Method::Symbolic,
            detail: detail.into(),
        }
    }

    pub fn sampled(value: VerdictValue, at: f64, detail: impl Into<String>) -> Verdict {
        Verdict {
            value,
            decided_at_order: Some(at),
            method: Method::Sampled,
            detail: detail.into(),
        }
    }

    pub fn is_true(&self) -> bool {
        self.value == VerdictValue::True
    }

    pub fn is_false(&self) -> bool {
        self.value == VerdictValue::False
    }

    pub fn is_undecidable(&self) -> bool {
        self.value == VerdictValue::Undecidable
    }
}

impl fmt::Display for VerdictValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self {
            VerdictValue::True => "true",
            VerdictValue::False => "false",
            VerdictValue::Undecidable => "undecidable",
        };
        f.write_str(v)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = &self.value;
        let m = match self.method {
            Method::Symbolic => "symbolic",
            Method::Sampled => "sampled",
        };
        match self.decided_at_order {
            Some(n) => write!(f, "{v} [{m}, order {n}] {}", self.detail),
            None => write!(f, "{v} [{m}] {}", self.detail),
        }
    }
}

/// Asymptotic order of a generalized number: liminf of log|x_ε|/log ρ_ε.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticOrder {
    pub value: OrderValue,
    /// Symbolically certified (versus estimated from samples).
    pub exact: bool,
    /// Half-width of the sampled confidence interval (2 standard errors).
    pub ci: Option<f64>,
    pub method: Method,
    pub detail: String,
}

/// A cofinal-index-set abstraction: a named subset of the ε-grid standing in
/// for a subset of (0, 1].
#[derive(Clone, Debug, Serialize)]
pub struct IndexSet {
    pub name: String,
    pub mask: Vec<bool>,
    /// Whether the set (resp. its complement) is treated as cofinal in the
    /// idealized index set (0, 1]; on the grid this is read off from whether
    /// the mask hits the last few points.
    pub idealized_cofinal: bool,
    pub complement_cofinal: bool,
    pub description: String,
}

impl IndexSet {
    pub fn from_mask(name: impl Into<String>, mask: Vec<bool>, description: impl Into<String>) -> IndexSet {
        let tail = 3.min(mask.len());
        let idealized_cofinal = mask.iter().rev().take(tail).any(|b| *b);
        let complement_cofinal = mask.iter().rev().take(tail).any(|b| !*b);
        IndexSet {
            name: name.into(),
            mask,
            idealized_cofinal,
            complement_cofinal,
            description: description.into(),
        }
    }

    /// Alternating even/odd split of the grid.
    pub fn alternating(name: impl Into<String>, len: usize) -> IndexSet {
        let mask: Vec<bool> = (0..len).map(|k| k % 2 == 0).collect();
        IndexSet::from_mask(name, mask, "alternating grid indices")
    }

    pub fn complement(&self, name: impl Into<String>) -> IndexSet {
        IndexSet {
            name: name.into(),
            mask: self.mask.iter().map(|b| !b).collect(),
            idealized_cofinal: self.complement_cofinal,
            complement_cofinal: self.idealized_cofinal,
            description: format!("complement of {}", self.name),
        }
    }
}

type SetReg = BTreeMap<String, Vec<bool>>;

#[derive(Clone, Debug)]
enum Rep {
    Symbolic(NetExpr),
    Sampled(Arc<Vec<WideComplex>>),
}

/// An element of the generalized-scalar ring over a fixed gauge.
#[derive(Clone, Debug)]
pub struct GenNumber {
    gauge: Arc<Gauge>,
    rep: Rep,
    /// Per-grid-point log-magnitude bounds on accumulated evaluation error
    /// beyond the default relative floor (attached by quadrature pipelines).
    uncertainty: Option<Arc<Vec<f64>>>,
    /// Masks for the piecewise index sets appearing in the expression.
    sets: Option<Arc<SetReg>>,
}

impl GenNumber {
    // ----- constructors ---------------------------------------------------

    pub fn from_expr(expr: NetExpr, gauge: Arc<Gauge>) -> Result<GenNumber> {
        let params = expr.params();
        if !params.is_empty() {
            return Err(Error::invalid(format!(
                "expression has unbound parameters {:?}",
                params
            )));
        }
        let x = GenNumber {
            gauge,
            rep: Rep::Symbolic(expr),
            uncertainty: None,
            sets: None,
        };
        x.check_moderate()?;
        Ok(x)
    }

    pub fn parse(src: &str, gauge: Arc<Gauge>) -> Result<GenNumber> {
        GenNumber::from_expr(crate::netlang::parse(src)?, gauge)
    }

    pub fn from_samples(vals: Vec<WideComplex>, gauge: Arc<Gauge>) -> Result<GenNumber> {
        if vals.len() != gauge.len() {
            return Err(Error::invalid(format!(
                "sample count {} does not match grid size {}",
                vals.len(),
                gauge.len()
            )));
        }
        let x = GenNumber {
            gauge,
            rep: Rep::Sampled(Arc::new(vals)),
            uncertainty: None,
            sets: None,
        };
        x.check_moderate()?;
        Ok(x)
    }

    pub fn from_samples_with_uncertainty(
        vals: Vec<WideComplex>,
        unc_lm: Vec<f64>,
        gauge: Arc<Gauge>,
    ) -> Result<GenNumber> {
        if unc_lm.len() != vals.len() {
            return Err(Error::invalid("uncertainty vector length mismatch"));
        }
        let mut x = GenNumber::from_samples(vals, gauge)?;
        x.uncertainty = Some(Arc::new(unc_lm));
        Ok(x)
    }

    pub fn constant(v: Complex64, gauge: Arc<Gauge>) -> GenNumber {
        let expr = if v.im == 0.0 {
            ex::num_f64(v.re)
        } else {
            ex::add(
                ex::num_f64(v.re),
                ex::mul(ex::num_f64(v.im), ex::imag()),
            )
        };
        GenNumber {
            gauge,
            rep: Rep::Symbolic(expr),
            uncertainty: None,
            sets: None,
        }
    }

    pub fn zero(gauge: Arc<Gauge>) -> GenNumber {
        GenNumber::constant(Complex64::new(0.0, 0.0), gauge)
    }

    pub fn one(gauge: Arc<Gauge>) -> GenNumber {
        GenNumber::constant(Complex64::new(1.0, 0.0), gauge)
    }

    /// The gauge itself as a generalized number, dρ = [ρ_ε].
    pub fn drho(gauge: Arc<Gauge>) -> GenNumber {
        GenNumber {
            gauge,
            rep: Rep::Symbolic(ex::rho()),
            uncertainty: None,
            sets: None,
        }
    }

    // ----- accessors --------------------------------------------------------

    pub fn gauge(&self) -> &Arc<Gauge> {
        &self.gauge
    }

    pub fn expr(&self) -> Option<&NetExpr> {
        match &self.rep {
            Rep::Symbolic(e) => Some(e),
            Rep::Sampled(_) => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.rep, Rep::Symbolic(_))
    }

    pub fn sets(&self) -> Option<&Arc<SetReg>> {
        self.sets.as_ref()
    }

    /// Values on the gauge's ε-grid.
    pub fn values(&self) -> Result<Arc<Vec<WideComplex>>> {
        match &self.rep {
            Rep::Sampled(v) => Ok(v.clone()),
            Rep::Symbolic(e) => {
                let sets = self.sets.clone();
                let vals: Vec<Result<WideComplex>> =
                    par::map_indexed(self.gauge.len(), |k| {
                        let ctx = self.gauge.ctx(k);
                        let ctx = match &sets {
                            Some(s) => ctx.with_sets(s.as_ref()),
                            None => ctx,
                        };
                        eval(e, &ctx)
                    });
                let mut out = Vec::with_capacity(vals.len());
                for v in vals {
                    out.push(v?);
                }
                Ok(Arc::new(out))
            }
        }
    }

    /// Attached log-magnitude uncertainty at grid point `k`, without the
    /// relative floor. `NEG_INFINITY` when the number is exact.
    pub(crate) fn sample_unc_lm(&self, k: usize) -> f64 {
        match &self.uncertainty {
            Some(u) => u[k],
            None => f64::NEG_INFINITY,
        }
    }

    /// Combined log-magnitude uncertainty bound at grid point `k` for the
    /// value `v`: attached bound plus the default relative floor.
    fn unc_lm_at(&self, k: usize, v: &WideComplex) -> f64 {
        let floor = if v.is_zero() {
            f64::NEG_INFINITY
        } else {
            v.lm() + LN_REL_FLOOR
        };
        match &self.uncertainty {
            Some(u) => lse(u[k], floor),
            None => floor,
        }
    }

    fn check_gauge(&self, o: &GenNumber) -> Result<()> {
        if self.gauge.same_as(&o.gauge) {
            Ok(())
        } else {
            Err(Error::GaugeMismatch(format!(
                "gauges {} and {} differ",
                self.gauge.name, o.gauge.name
            )))
        }
    }

    fn merge_sets(&self, o: &GenNumber) -> Result<Option<Arc<SetReg>>> {
        match (&self.sets, &o.sets) {
            (None, None) => Ok(None),
            (Some(s), None) => Ok(Some(s.clone())),
            (None, Some(s)) => Ok(Some(s.clone())),
            (Some(a), Some(b)) => {
                let mut m = (**a).clone();
                for (k, v) in b.iter() {
                    if let Some(prev) = m.get(k) {
                        if prev != v {
                            return Err(Error::invalid(format!(
                                "index set `{k}` bound to two different masks"
                            )));
                        }
                    } else {
                        m.insert(k.clone(), v.clone());
                    }
                }
                Ok(Some(Arc::new(m)))
            }
        }
    }

    // ----- moderateness -----------------------------------------------------

    fn check_moderate(&self) -> Result<()> {
        if let Rep::Symbolic(e) = &self.rep {
            if let Some(ga) = gauge_asym(&self.gauge) {
                let lead = lead_of_expr(e, &self.gauge);
                if let SymOrder::Exact(OrderValue::NegInfinity) = ord_of_lead(&lead, &ga) {
                    return Err(Error::NotModerate(format!(
                        "{e} grows faster than every power of the gauge"
                    )));
                }
                if !matches!(lead, Lead::Unknown) {
                    return Ok(());
                }
            }
        }
        // Sampled check: the order ratio log|x|/log ρ must not diverge to -∞
        // across the tail.
        let vals = self.values()?;
        let logr = self.gauge.log_rho_points();
        let tail = TAIL_POINTS.min(vals.len());
        let start = vals.len() - tail;
        let ratios: Vec<f64> = (start..vals.len())
            .filter(|&k| !vals[k].is_zero())
            .map(|k| vals[k].lm() / logr[k])
            .collect();
        if ratios.len() >= 4 {
            let first = ratios[..ratios.len() / 2]
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            let last = ratios[ratios.len() / 2..]
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if last < -100.0 && last < 2.0 * first.min(0.0) {
                return Err(Error::NotModerate(format!(
                    "sampled order ratio falls to {last:.1} across the grid tail"
                )));
            }
        }
        Ok(())
    }

    // ----- arithmetic -------------------------------------------------------

    fn binary(
        &self,
        o: &GenNumber,
        sym: impl Fn(NetExpr, NetExpr) -> NetExpr,
        num: impl Fn(&WideComplex, &WideComplex) -> WideComplex,
        unc: UncRule,
    ) -> Result<GenNumber> {
        self.check_gauge(o)?;
        let sets = self.merge_sets(o)?;
        if let (Rep::Symbolic(a), Rep::Symbolic(b), None, None) =
            (&self.rep, &o.rep, &self.uncertainty, &o.uncertainty)
        {
            return Ok(GenNumber {
                gauge: self.gauge.clone(),
                rep: Rep::Symbolic(sym(a.clone(), b.clone())),
                uncertainty: None,
                sets,
            });
        }
        let va = self.values()?;
        let vb = o.values()?;
        let vals: Vec<WideComplex> = va.iter().zip(vb.iter()).map(|(a, b)| num(a, b)).collect();
        let u: Vec<f64> = (0..vals.len())
            .map(|k| {
                let ua = self.unc_lm_at(k, &va[k]);
                let ub = o.unc_lm_at(k, &vb[k]);
                match unc {
                    UncRule::Add => lse(ua, ub),
                    UncRule::Mul => lse(ua + vb[k].lm(), ub + va[k].lm()),
                }
            })
            .collect();
        Ok(GenNumber {
            gauge: self.gauge.clone(),
            rep: Rep::Sampled(Arc::new(vals)),
            uncertainty: Some(Arc::new(u)),
            sets,
        })
    }

    pub fn add(&self, o: &GenNumber) -> Result<GenNumber> {
        self.binary(o, ex::add, |a, b| a.add(*b), UncRule::Add)
    }

    pub fn sub(&self, o: &GenNumber) -> Result<GenNumber> {
        self.binary(o, ex::sub, |a, b| a.sub(*b), UncRule::Add)
    }

    pub fn mul(&self, o: &GenNumber) -> Result<GenNumber> {
        self.binary(o, ex::mul, |a, b| a.mul(*b), UncRule::Mul)
    }

    fn unary(
        &self,
        sym: impl Fn(NetExpr) -> NetExpr,
        num: impl Fn(&WideComplex) -> WideComplex,
    ) -> GenNumber {
        match &self.rep {
            Rep::Symbolic(e) if self.uncertainty.is_none() => GenNumber {
                gauge: self.gauge.clone(),
                rep: Rep::Symbolic(sym(e.clone())),
                uncertainty: None,
                sets: self.sets.clone(),
            },
            _ => {
                let vals = self
                    .values()
                    .expect("sampled representation always evaluates");
                GenNumber {
                    gauge: self.gauge.clone(),
                    rep: Rep::Sampled(Arc::new(vals.iter().map(num).collect())),
                    uncertainty: self.uncertainty.clone(),
                    sets: self.sets.clone(),
                }
            }
        }
    }

    pub fn neg(&self) -> GenNumber {
        self.unary(ex::neg, |v| v.neg())
    }

    pub fn conj(&self) -> GenNumber {
        self.unary(|e| ex::app(crate::netlang::Func::Conj, e), |v| v.conj())
    }

    pub fn abs(&self) -> GenNumber {
        self.unary(|e| ex::app(crate::netlang::Func::Abs, e), |v| v.abs())
    }

    pub fn re(&self) -> GenNumber {
        self.unary(ex::re, |v| {
            WideComplex::from_f64(v.to_complex_lossy().re)
        })
    }

    pub fn im(&self) -> GenNumber {
        self.unary(ex::im, |v| {
            WideComplex::from_f64(v.to_complex_lossy().im)
        })
    }

    pub fn powi(&self, n: i64) -> Result<GenNumber> {
        self.pow_rat(Rat::from_integer(n))
    }

    pub fn pow_rat(&self, r: Rat) -> Result<GenNumber> {
        if r < Rat::from_integer(0) {
            let inv = self.is_invertible();
            if !inv.is_true() {
                return Err(Error::NotInvertible(format!(
                    "negative power of a number not certified invertible: {inv}"
                )));
            }
        }
        let out = match &self.rep {
            Rep::Symbolic(e) if self.uncertainty.is_none() => GenNumber {
                gauge: self.gauge.clone(),
                rep: Rep::Symbolic(ex::pow(e.clone(), r)),
                uncertainty: None,
                sets: self.sets.clone(),
            },
            _ => {
                let vals = self.values()?;
                GenNumber {
                    gauge: self.gauge.clone(),
                    rep: Rep::Sampled(Arc::new(
                        vals.iter()
                            .map(|v| v.pow_rat(*r.numer(), *r.denom()))
                            .collect(),
                    )),
                    uncertainty: self.uncertainty.clone(),
                    sets: self.sets.clone(),
                }
            }
        };
        Ok(out)
    }

    pub fn div(&self, o: &GenNumber) -> Result<GenNumber> {
        let inv = o.is_invertible();
        if !inv.is_true() {
            return Err(Error::NotInvertible(format!(
                "division by a number not certified invertible: {inv}"
            )));
        }
        self.binary(o, ex::div, |a, b| a.div(*b), UncRule::Mul)
    }

    pub fn invert(&self) -> Result<GenNumber> {
        GenNumber::one(self.gauge.clone()).div(self)
    }

    // ----- order and classification ----------------------------------------

    fn symbolic_lead(&self) -> Option<Lead> {
        match &self.rep {
            Rep::Symbolic(e) => Some(lead_of_expr(e, &self.gauge)),
            Rep::Sampled(_) => None,
        }
    }

    /// Tail regression of log|x_ε| against log ρ_ε.
    fn sampled_fit(&self) -> Result<SampledFit> {
        let vals = self.values()?;
        let logr = self.gauge.log_rho_points();
        let n = vals.len();
        let tail = TAIL_POINTS.min(n);
        let start = n - tail;
        let mut xs = Vec::with_capacity(tail);
        let mut ys = Vec::with_capacity(tail);
        let mut below_floor = 0usize;
        for k in start..n {
            let v = &vals[k];
            let u = self.unc_lm_at(k, v);
            if v.is_zero() || (u.is_finite() && v.lm() <= u) {
                below_floor += 1;
                continue;
            }
            xs.push(logr[k]);
            ys.push(v.lm());
        }
        Ok(SampledFit {
            fit: linear_fit(&xs, &ys),
            below_floor,
            tail,
        })
    }

    /// The asymptotic order of the number relative to its gauge.
    pub fn order(&self) -> Result<AsymptoticOrder> {
        if let Some(lead) = self.symbolic_lead() {
            if let Some(ga) = gauge_asym(&self.gauge) {
                match ord_of_lead(&lead, &ga) {
                    SymOrder::Exact(v) => {
                        return Ok(AsymptoticOrder {
                            value: v,
                            exact: true,
                            ci: None,
                            method: Method::Symbolic,
                            detail: "certified by lead analysis".into(),
                        })
                    }
                    SymOrder::AtLeast(v) => {
                        // Report the sampled estimate but keep the certified
                        // lower bound in the detail.
                        let mut ord = self.sampled_order()?;
                        ord.detail = format!(
                            "{}; symbolic lower bound {:?}",
                            ord.detail, v
                        );
                        return Ok(ord);
                    }
                    SymOrder::Unknown => {}
                }
            }
        }
        self.sampled_order()
    }

    fn sampled_order(&self) -> Result<AsymptoticOrder> {
        let sf = self.sampled_fit()?;
        if sf.below_floor == sf.tail {
            return Ok(AsymptoticOrder {
                value: OrderValue::PosInfinity,
                exact: false,
                ci: None,
                method: Method::Sampled,
                detail: "all tail values at or below the evaluation noise floor".into(),
            });
        }
        match sf.fit {
            Some(f) => Ok(AsymptoticOrder {
                value: OrderValue::Finite(f.slope),
                exact: false,
                ci: Some(2.0 * f.se_slope),
                method: Method::Sampled,
                detail: format!(
                    "tail regression over {} points{}",
                    f.used,
                    if sf.below_floor > 0 {
                        format!(" ({} at noise floor skipped)", sf.below_floor)
                    } else {
                        String::new()
                    }
                ),
            }),
            None => Ok(AsymptoticOrder {
                value: OrderValue::Finite(f64::NAN),
                exact: false,
                ci: None,
                method: Method::Sampled,
                detail: "too few usable tail points for a regression".into(),
            }),
        }
    }

    /// Structural realness (symbolic) or phase check (sampled).
    pub fn is_real(&self) -> Result<bool> {
        match &self.rep {
            Rep::Symbolic(e) => {
                if crate::order::expr_is_real(e, &self.gauge) {
                    return Ok(true);
                }
                // Imaginary parts can still be negligible-or-zero numerically.
                self.sampled_real()
            }
            Rep::Sampled(_) => self.sampled_real(),
        }
    }

    fn sampled_real(&self) -> Result<bool> {
        let vals = self.values()?;
        Ok(vals.iter().enumerate().all(|(k, v)| {
            if v.is_zero() {
                return true;
            }
            let im_lm = match v.try_to_complex() {
                Some(z) if z.im == 0.0 => f64::NEG_INFINITY,
                Some(z) => z.im.abs().ln(),
                None => v.lm() + v.phase().sin().abs().max(1e-300).ln(),
            };
            im_lm <= self.unc_lm_at(k, v)
        }))
    }

    /// Classification into infinitesimal / finite / infinite, plus the
    /// standard part when the number is near-standard.
    pub fn classify(&self) -> Result<Classification> {
        let ga = gauge_asym(&self.gauge);
        let sym: SymClass = match self.symbolic_lead() {
            Some(lead) => class_of_lead(&lead, ga.as_ref()),
            None => SymClass::default(),
        };
        let mut sampled: Option<SampledClass> = None;
        let mut want = |this: &GenNumber, s: &mut Option<SampledClass>| -> Result<SampledClass> {
            if let Some(c) = s {
                return Ok(c.clone());
            }
            let c = this.sampled_class()?;
            *s = Some(c.clone());
            Ok(c)
        };

        let infinitesimal = match sym.infinitesimal {
            Some(v) => Verdict::symbolic(bool_v(v), "lead analysis"),
            None => want(self, &mut sampled)?.infinitesimal,
        };
        let finite = match sym.finite {
            Some(v) => Verdict::symbolic(bool_v(v), "lead analysis"),
            None => want(self, &mut sampled)?.finite,
        };
        let infinite = match sym.infinite {
            Some(v) => Verdict::symbolic(bool_v(v), "lead analysis"),
            None => want(self, &mut sampled)?.infinite,
        };
        let near_standard = match (sym.limit_exists, sym.limit) {
            (Some(true), Some(l)) => Some(Complex64::new(l.0, l.1)),
            (Some(false), _) => None,
            _ => want(self, &mut sampled)?.near_standard,
        };
        Ok(Classification {
            infinitesimal,
            finite,
            infinite,
            near_standard,
            order: self.order()?,
        })
    }

    fn sampled_class(&self) -> Result<SampledClass> {
        let vals = self.values()?;
        let n = vals.len();
        let tail = TAIL_POINTS.min(n);
        let start = n - tail;
        let lms: Vec<f64> = (start..n)
            .map(|k| if vals[k].is_zero() { f64::NEG_INFINITY } else { vals[k].lm() })
            .collect();
        if lms.iter().all(|m| *m == f64::NEG_INFINITY) {
            return Ok(SampledClass {
                infinitesimal: Verdict::sampled(VerdictValue::True, 0.0, "all tail values zero"),
                finite: Verdict::sampled(VerdictValue::True, 0.0, "all tail values zero"),
                infinite: Verdict::sampled(VerdictValue::False, 0.0, "all tail values zero"),
                near_standard: Some(Complex64::new(0.0, 0.0)),
            });
        }
        let sf = self.sampled_fit()?;
        let (slope, ci) = match sf.fit {
            Some(f) => (f.slope, 2.0 * f.se_slope),
            None => (f64::NAN, f64::INFINITY),
        };
        let spread = {
            let fin: Vec<f64> = lms.iter().cloned().filter(|m| m.is_finite()).collect();
            let hi = fin.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = fin.iter().cloned().fold(f64::INFINITY, f64::min);
            hi - lo
        };
        let flat = spread < 1.0;

        let infinitesimal = if slope - ci > 0.0 {
            Verdict::sampled(VerdictValue::True, slope, "magnitude decays with positive order")
        } else if slope + ci < 0.0 {
            Verdict::sampled(VerdictValue::False, slope, "magnitude grows")
        } else if flat {
            let last = *lms.last().unwrap();
            if last < LN_REL_FLOOR {
                Verdict::sampled(VerdictValue::True, 0.0, "magnitude flat at noise level")
            } else {
                Verdict::sampled(VerdictValue::False, 0.0, "magnitude flat and bounded away from zero")
            }
        } else {
            Verdict::sampled(VerdictValue::Undecidable, slope, "order CI straddles zero")
        };
        let finite = if slope - ci > 0.0 || flat {
            Verdict::sampled(VerdictValue::True, slope.max(0.0), "magnitude bounded across tail")
        } else if slope + ci < 0.0 {
            Verdict::sampled(VerdictValue::False, slope, "magnitude grows along the tail")
        } else {
            Verdict::sampled(VerdictValue::Undecidable, slope, "order CI straddles zero")
        };
        let infinite = if slope + ci < 0.0 && ci < 0.5 {
            Verdict::sampled(VerdictValue::True, slope, "magnitude grows with negative order")
        } else if slope - ci > 0.0 || flat {
            Verdict::sampled(VerdictValue::False, slope.max(0.0), "magnitude bounded across tail")
        } else {
            Verdict::sampled(VerdictValue::Undecidable, slope, "growth not uniform across tail")
        };
        // Near-standard: the deviation from a standard candidate must be
        // infinitesimal. The deepest sample is the candidate; values that
        // approach their limit like a positive gauge power (plus quadrature
        // noise covered by the attached uncertainty) certify cleanly.
        let near_standard = if infinitesimal.is_true() {
            Some(Complex64::new(0.0, 0.0))
        } else if finite.is_true() || flat {
            match vals[n - 1].try_to_complex() {
                Some(c) if c.re.is_finite() && c.im.is_finite() => {
                    let cand = GenNumber::constant(c, self.gauge.clone());
                    if self.eq_at(&cand, 0.0)?.is_true() {
                        Some(c)
                    } else {
                        None
                    }
                }
                _ => None,
            }
        } else {
            None
        };
        Ok(SampledClass {
            infinitesimal,
            finite,
            infinite,
            near_standard,
        })
    }

    // ----- equality and comparison ------------------------------------------

    pub fn eq(&self, o: &GenNumber) -> Result<Verdict> {
        self.eq_at(o, DEFAULT_ORDER)
    }

    /// Ring equality `self = o`, i.e. negligibility of the difference, tested
    /// at decision order `n` on the sampled path.
    pub fn eq_at(&self, o: &GenNumber, n: f64) -> Result<Verdict> {
        self.check_gauge(o)?;
        // Structural proof first: identical normal forms decide equality
        // without any asymptotics.
        if let (Rep::Symbolic(a), Rep::Symbolic(b)) = (&self.rep, &o.rep) {
            let sa = self.gauge.subst_into(a);
            let sb = self.gauge.subst_into(b);
            if let Ok(true) = proves_equal(&sa, &sb) {
                return Ok(Verdict::symbolic(
                    VerdictValue::True,
                    "identical exact normal forms",
                ));
            }
        }
        let mut d = self.sub(o)?;
        if d.uncertainty.is_none() {
            // Arithmetic noise floor from the operand scales: a difference
            // sitting at the rounding level of the inputs cannot witness
            // inequality, whatever its fitted order.
            let va = self.values()?;
            let vb = o.values()?;
            let unc: Vec<f64> = (0..va.len())
                .map(|k| lse(self.unc_lm_at(k, &va[k]), o.unc_lm_at(k, &vb[k])))
                .collect();
            d.uncertainty = Some(Arc::new(unc));
        }
        d.negligible_at(n)
    }

    pub fn is_zero_at(&self, n: f64) -> Result<Verdict> {
        self.negligible_at(n)
    }

    fn negligible_at(&self, n: f64) -> Result<Verdict> {
        if let Some(lead) = self.symbolic_lead() {
            if matches!(lead, Lead::Zero) {
                return Ok(Verdict::symbolic(VerdictValue::True, "zero normal form"));
            }
            if let Some(ga) = gauge_asym(&self.gauge) {
                match ord_of_lead(&lead, &ga) {
                    SymOrder::Exact(OrderValue::PosInfinity) => {
                        return Ok(Verdict::symbolic(
                            VerdictValue::True,
                            "order +infinity certified by lead analysis",
                        ))
                    }
                    SymOrder::Exact(OrderValue::Finite(q)) => {
                        // Negligible *at decision order n*: certified order
                        // beyond n counts as zero at this resolution.
                        let value = if q > n {
                            VerdictValue::True
                        } else {
                            VerdictValue::False
                        };
                        return Ok(Verdict {
                            value,
                            decided_at_order: Some(n),
                            method: Method::Symbolic,
                            detail: format!("certified finite order {q}"),
                        });
                    }
                    SymOrder::Exact(OrderValue::NegInfinity) => {
                        return Ok(Verdict::symbolic(
                            VerdictValue::False,
                            "difference is not moderate",
                        ))
                    }
                    SymOrder::AtLeast(OrderValue::PosInfinity) => {
                        return Ok(Verdict::symbolic(
                            VerdictValue::True,
                            "order bounded below by +infinity",
                        ))
                    }
                    SymOrder::AtLeast(OrderValue::Finite(q)) if q > n => {
                        return Ok(Verdict {
                            value: VerdictValue::True,
                            decided_at_order: Some(n),
                            method: Method::Symbolic,
                            detail: format!("certified order at least {q}"),
                        });
                    }
                    _ => {}
                }
            }
        }
        let sf = self.sampled_fit()?;
        if sf.below_floor == sf.tail {
            return Ok(Verdict::sampled(
                VerdictValue::True,
                n,
                "within arithmetic/quadrature tolerance at every tail point",
            ));
        }
        match sf.fit {
            Some(f) => {
                let ci = 2.0 * f.se_slope;
                if f.slope - ci > n {
                    Ok(Verdict::sampled(
                        VerdictValue::True,
                        n,
                        format!("sampled order {:.2} ± {:.2} exceeds {n}", f.slope, ci),
                    ))
                } else if f.slope + ci < n {
                    Ok(Verdict::sampled(
                        VerdictValue::False,
                        n,
                        format!("sampled order {:.2} ± {:.2} falls below {n}", f.slope, ci),
                    ))
                } else {
                    Ok(Verdict::sampled(
                        VerdictValue::Undecidable,
                        n,
                        format!(
                            "sampled order {:.2} ± {:.2} straddles the decision order {n}",
                            f.slope, ci
                        ),
                    ))
                }
            }
            None => Ok(Verdict::sampled(
                VerdictValue::Undecidable,
                n,
                "not enough usable tail points",
            )),
        }
    }

    /// `self ≤ o` in the order of real generalized numbers.
    pub fn leq(&self, o: &GenNumber) -> Result<Verdict> {
        self.leq_at(o, DEFAULT_ORDER)
    }

    pub fn leq_at(&self, o: &GenNumber, n: f64) -> Result<Verdict> {
        self.check_gauge(o)?;
        let d = o.sub(self)?; // d ≥ 0 ⟺ self ≤ o
        d.nonneg_at(n)
    }

    /// `self < o` strictly: the difference is positive and invertible.
    pub fn lt(&self, o: &GenNumber) -> Result<Verdict> {
        self.check_gauge(o)?;
        let d = o.sub(self)?;
        let nn = d.nonneg_at(DEFAULT_ORDER)?;
        if !nn.is_true() {
            return Ok(match nn.value {
                VerdictValue::False => nn,
                _ => Verdict {
                    value: VerdictValue::Undecidable,
                    ..nn
                },
            });
        }
        let inv = d.is_invertible();
        Ok(match inv.value {
            VerdictValue::True => Verdict {
                value: VerdictValue::True,
                decided_at_order: inv.decided_at_order,
                method: if nn.method == Method::Symbolic && inv.method == Method::Symbolic {
                    Method::Symbolic
                } else {
                    Method::Sampled
                },
                detail: format!("nonnegative ({}) and invertible ({})", nn.detail, inv.detail),
            },
            _ => Verdict {
                value: inv.value,
                decided_at_order: inv.decided_at_order,
                method: inv.method,
                detail: format!("difference nonnegative but invertibility: {}", inv.detail),
            },
        })
    }

    /// `self ≥ 0` for real numbers: there is a nonnegative representative,
    /// equivalently the negative part is negligible.
    pub fn nonneg_at(&self, n: f64) -> Result<Verdict> {
        if !self.is_real()? {
            return Err(Error::invalid(
                "positivity applies to real generalized numbers",
            ));
        }
        if let Some(lead) = self.symbolic_lead() {
            let ga = gauge_asym(&self.gauge);
            let class = class_of_lead(&lead, ga.as_ref());
            match class.sign {
                Some(0) => {
                    return Ok(Verdict::symbolic(VerdictValue::True, "zero normal form"))
                }
                Some(1) => {
                    return Ok(Verdict::symbolic(
                        VerdictValue::True,
                        "eventually positive by lead analysis",
                    ))
                }
                Some(-1) => {
                    // Negative lead sign still allows x ≥ 0 when x is
                    // negligible (x = 0 in the ring).
                    let z = self.negligible_at(n)?;
                    if z.is_true() {
                        return Ok(z);
                    }
                    if matches!(
                        z.value,
                        VerdictValue::False
                    ) {
                        return Ok(Verdict {
                            value: VerdictValue::False,
                            decided_at_order: z.decided_at_order,
                            method: z.method,
                            detail: "eventually negative and not negligible".into(),
                        });
                    }
                    return Ok(z);
                }
                _ => {}
            }
        }
        // Sampled: the negative part must sit below the ρ^n slack.
        let vals = self.values()?;
        let logr = self.gauge.log_rho_points();
        let tail = TAIL_POINTS.min(vals.len());
        let start = vals.len() - tail;
        let mut worst: Option<f64> = None; // log-magnitude of deepest violation minus slack
        let mut violations = 0usize;
        for k in start..vals.len() {
            let v = &vals[k];
            if v.is_zero() {
                continue;
            }
            let z = v.to_complex_lossy();
            if z.re >= 0.0 {
                continue;
            }
            let neg_lm = z.re.abs().ln();
            let slack = lse(self.unc_lm_at(k, v), n * logr[k]);
            if neg_lm > slack {
                violations += 1;
                let excess = neg_lm - slack;
                worst = Some(worst.map_or(excess, |w: f64| w.max(excess)));
            }
        }
        if violations == 0 {
            Ok(Verdict::sampled(
                VerdictValue::True,
                n,
                "negative part within negligibility slack at every tail point",
            ))
        } else if violations == tail || worst.unwrap_or(0.0) > 2.0 {
            Ok(Verdict::sampled(
                VerdictValue::False,
                n,
                format!("{violations} tail points violate the slack"),
            ))
        } else {
            Ok(Verdict::sampled(
                VerdictValue::Undecidable,
                n,
                format!("{violations} borderline violations in the tail"),
            ))
        }
    }

    /// Four equivalent characterizations of nonnegativity, each decided by its
    /// own procedure:
    /// 1. eventual-sign/lead analysis (`nonneg_at`),
    /// 2. for every q, `x ≥ −dρ^q` (representative shift),
    /// 3. `x = |x|`,
    /// 4. `x` has a real square root: `(√x)² = x` with `√` taken pointwise on
    ///    the clipped positive part.
    pub fn positivity_procedures(&self, n: f64) -> Result<[Verdict; 4]> {
        let p1 = self.nonneg_at(n)?;

        // 2: x + dρ^q nonnegative pointwise for a ladder of q.
        let p2 = {
            let vals = self.values()?;
            let logr = self.gauge.log_rho_points();
            let tail = TAIL_POINTS.min(vals.len());
            let start = vals.len() - tail;
            let qs = [n, n / 2.0, 2.0 * n];
            let mut ok = true;
            'outer: for q in qs {
                for k in start..vals.len() {
                    let z = vals[k].to_complex_lossy();
                    let shift = (q * logr[k]).exp();
                    let floor = self.unc_lm_at(k, &vals[k]);
                    let tol = if floor.is_finite() { floor.exp() } else { 0.0 };
                    if z.re + shift < -tol {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            if ok {
                Verdict::sampled(
                    VerdictValue::True,
                    n,
                    "x + dρ^q stays nonnegative for the sampled q ladder",
                )
            } else {
                Verdict::sampled(VerdictValue::False, n, "x + dρ^q dips negative")
            }
        };

        // 3: x equals its absolute value.
        let p3 = self.eq_at(&self.abs(), n)?;

        // 4: the pointwise square root of the clipped positive part squares
        // back to x.
        let p4 = {
            let vals = self.values()?;
            let roots: Vec<WideComplex> = vals
                .iter()
                .map(|v| {
                    let z = v.to_complex_lossy();
                    if z.re > 0.0 {
                        WideComplex::from_f64(z.re.sqrt())
                    } else {
                        WideComplex::ZERO
                    }
                })
                .collect();
            let y = GenNumber {
                gauge: self.gauge.clone(),
                rep: Rep::Sampled(Arc::new(roots)),
                uncertainty: None,
                sets: None,
            };
            let y2 = y.mul(&y)?;
            y2.eq_at(self, n)?
        };
        Ok([p1, p2, p3, p4])
    }

    /// Invertibility: |x| ≥ ρ^m eventually for some m.
    pub fn is_invertible(&self) -> Verdict {
        if let Some(lead) = self.symbolic_lead() {
            let ga = gauge_asym(&self.gauge);
            let class = class_of_lead(&lead, ga.as_ref());
            if class.is_zero_net {
                return Verdict::symbolic(VerdictValue::False, "zero normal form");
            }
            match class.lower_order {
                Some(OrderValue::Finite(q)) => {
                    return Verdict {
                        value: VerdictValue::True,
                        decided_at_order: Some(q),
                        method: Method::Symbolic,
                        detail: format!("two-sided scale control at order {q:.4}"),
                    }
                }
                Some(OrderValue::PosInfinity) => {
                    return Verdict::symbolic(
                        VerdictValue::False,
                        "magnitude falls below every gauge power",
                    )
                }
                _ => {}
            }
            if let Some(ga) = &ga {
                if let SymOrder::Exact(OrderValue::PosInfinity) = ord_of_lead(&lead, ga) {
                    return Verdict::symbolic(VerdictValue::False, "negligible");
                }
            }
            if let Lead::Osc {
                dips_below_all: true,
                ..
            } = &lead
            {
                // Certified dips below every gauge power on a cofinal set:
                // no finite sample grid can refute them.
                return Verdict::symbolic(
                    VerdictValue::Undecidable,
                    "oscillation dips below every gauge power on a cofinal set",
                );
            }
        }
        // Sampled: the order ratio of |x| must stay bounded along the tail
        // with no below-floor dropouts (dips suggest zeros).
        match self.sampled_fit() {
            Ok(sf) => {
                if sf.below_floor == sf.tail {
                    return Verdict::sampled(
                        VerdictValue::False,
                        DEFAULT_ORDER,
                        "all tail values at the noise floor",
                    );
                }
                if sf.below_floor > 0 {
                    return Verdict::sampled(
                        VerdictValue::Undecidable,
                        DEFAULT_ORDER,
                        "some tail values dip to the noise floor",
                    );
                }
                match sf.fit {
                    Some(f) if 2.0 * f.se_slope < 1.0 => Verdict::sampled(
                        VerdictValue::True,
                        f.slope,
                        format!("stable sampled order {:.2}", f.slope),
                    ),
                    Some(f) => Verdict::sampled(
                        VerdictValue::Undecidable,
                        f.slope,
                        "sampled order too noisy to certify a lower bound",
                    ),
                    None => Verdict::sampled(
                        VerdictValue::Undecidable,
                        DEFAULT_ORDER,
                        "not enough tail points",
                    ),
                }
            }
            Err(e) => Verdict::sampled(
                VerdictValue::Undecidable,
                DEFAULT_ORDER,
                format!("evaluation failed: {e}"),
            ),
        }
    }

    /// Replace `self` inside the sharp ball of radius `r` by an invertible
    /// point: wherever `|x_ε| < r_ε/2`, move to `r_ε/2`. The result is within
    /// `r` of `self` and certified invertible whenever `r` is.
    pub fn make_invertible_near(&self, r: &GenNumber) -> Result<GenNumber> {
        self.check_gauge(r)?;
        if !r.is_real()? {
            return Err(Error::invalid("radius must be a real generalized number"));
        }
        let rinv = r.is_invertible();
        if !rinv.is_true() {
            return Err(Error::NotInvertible(format!(
                "radius must be invertible: {rinv}"
            )));
        }
        let vals = self.values()?;
        let rv = r.values()?;
        let out: Vec<WideComplex> = vals
            .iter()
            .zip(rv.iter())
            .map(|(x, rr)| {
                let half_lm = rr.lm() - std::f64::consts::LN_2;
                if x.is_zero() || x.lm() < half_lm {
                    WideComplex::from_log(half_lm, 0.0)
                } else {
                    *x
                }
            })
            .collect();
        GenNumber::from_samples(out, self.gauge.clone())
    }

    /// Nearest-integer net ⌊x_ε + 1/2⌋ (half rounds up); requires real values
    /// in double range.
    pub fn ni(&self) -> Result<GenNumber> {
        if !self.is_real()? {
            return Err(Error::invalid(
                "nearest-integer net applies to real generalized numbers",
            ));
        }
        let vals = self.values()?;
        let out: Vec<WideComplex> = vals
            .iter()
            .map(|v| {
                v.try_to_complex()
                    .map(|z| WideComplex::from_f64((z.re + 0.5).floor()))
                    .ok_or_else(|| {
                        Error::invalid("nearest-integer net requires values in double range")
                    })
            })
            .collect::<Result<_>>()?;
        GenNumber::from_samples(out, self.gauge.clone())
    }

    /// Restriction to the index set: `x` on the set, `0` off it.
    pub fn restrict(&self, set: &IndexSet) -> Result<GenNumber> {
        if set.mask.len() != self.gauge.len() {
            return Err(Error::invalid("index-set mask does not match the grid"));
        }
        if let Some(reg) = &self.sets {
            if let Some(prev) = reg.get(&set.name) {
                if prev != &set.mask {
                    return Err(Error::invalid(format!(
                        "index set `{}` already bound to a different mask",
                        set.name
                    )));
                }
            }
        }
        match &self.rep {
            Rep::Symbolic(e) if self.uncertainty.is_none() => {
                let mut reg: SetReg = self.sets.as_deref().cloned().unwrap_or_default();
                reg.insert(set.name.clone(), set.mask.clone());
                Ok(GenNumber {
                    gauge: self.gauge.clone(),
                    rep: Rep::Symbolic(NetExpr::Piecewise(
                        set.name.clone(),
                        Box::new(e.clone()),
                        Box::new(ex::num(0)),
                    )),
                    uncertainty: None,
                    sets: Some(Arc::new(reg)),
                })
            }
            _ => {
                let vals = self.values()?;
                let out: Vec<WideComplex> = vals
                    .iter()
                    .zip(set.mask.iter())
                    .map(|(v, on)| if *on { *v } else { WideComplex::ZERO })
                    .collect();
                let mut x = GenNumber::from_samples(out, self.gauge.clone())?;
                x.uncertainty = self.uncertainty.clone();
                Ok(x)
            }
        }
    }

    /// Subpoint strict comparison: find a cofinal index set on which
    /// `self < o` holds pointwise (beyond noise), if one exists on the grid.
    pub fn sbpt_lt(&self, o: &GenNumber) -> Result<(Verdict, Option<IndexSet>)> {
        self.check_gauge(o)?;
        if !self.is_real()? || !o.is_real()? {
            return Err(Error::invalid("subpoint comparison applies to real numbers"));
        }
        let va = self.values()?;
        let vb = o.values()?;
        let mask: Vec<bool> = (0..va.len())
            .map(|k| {
                let a = va[k].to_complex_lossy().re;
                let b = vb[k].to_complex_lossy().re;
                let tol = lse(
                    self.unc_lm_at(k, &va[k]),
                    o.unc_lm_at(k, &vb[k]),
                );
                let tol = if tol.is_finite() { tol.exp() } else { 0.0 };
                a + tol < b
            })
            .collect();
        let set = IndexSet::from_mask(
            format!("lt_{}", fresh_set_id()),
            mask,
            "grid points where the strict comparison holds",
        );
        if set.idealized_cofinal {
            Ok((
                Verdict::sampled(
                    VerdictValue::True,
                    DEFAULT_ORDER,
                    "strict comparison holds on a cofinal sampled subset",
                ),
                Some(set),
            ))
        } else if set.mask.iter().any(|b| *b) {
            Ok((
                Verdict::sampled(
                    VerdictValue::Undecidable,
                    DEFAULT_ORDER,
                    "comparison holds only on a non-cofinal sampled subset",
                ),
                Some(set),
            ))
        } else {
            Ok((
                Verdict::sampled(VerdictValue::False, DEFAULT_ORDER, "no subpoint found"),
                None,
            ))
        }
    }

    /// Subpoint equality: cofinal index set with `|self − o|` at noise level.
    pub fn sbpt_eq(&self, o: &GenNumber) -> Result<(Verdict, Option<IndexSet>)> {
        self.check_gauge(o)?;
        let d = self.sub(o)?;
        let vals = d.values()?;
        let logr = self.gauge.log_rho_points();
        let mask: Vec<bool> = (0..vals.len())
            .map(|k| {
                let v = &vals[k];
                v.is_zero()
                    || v.lm() <= lse(d.unc_lm_at(k, v), DEFAULT_ORDER * logr[k])
            })
            .collect();
        let set = IndexSet::from_mask(
            format!("eq_{}", fresh_set_id()),
            mask,
            "grid points where the difference is negligible-size",
        );
        if set.idealized_cofinal {
            Ok((
                Verdict::sampled(
                    VerdictValue::True,
                    DEFAULT_ORDER,
                    "difference negligible on a cofinal sampled subset",
                ),
                Some(set),
            ))
        } else if set.mask.iter().any(|b| *b) {
            Ok((
                Verdict::sampled(
                    VerdictValue::Undecidable,
                    DEFAULT_ORDER,
                    "agreement only on a non-cofinal sampled subset",
                ),
                Some(set),
            ))
        } else {
            Ok((
                Verdict::sampled(VerdictValue::False, DEFAULT_ORDER, "no agreement subpoint"),
                None,
            ))
        }
    }

    /// Reinterpret the same net over another gauge. Symbolic representations
    /// substitute the old gauge for `rho` first, so the underlying ε-net is
    /// unchanged; sampled representations require identical grids.
    pub fn regauge(&self, new_gauge: Arc<Gauge>) -> Result<GenNumber> {
        match &self.rep {
            Rep::Symbolic(e) => {
                let concrete = if e.uses_rho() {
                    self.gauge.subst_into(e)
                } else {
                    e.clone()
                };
                if self.gauge.eps_points() != new_gauge.eps_points() {
                    return Err(Error::GaugeMismatch(
                        "regauge requires the same ε-grid".into(),
                    ));
                }
                let mut x = GenNumber::from_expr(concrete, new_gauge)?;
                x.sets = self.sets.clone();
                Ok(x)
            }
            Rep::Sampled(v) => {
                if self.gauge.eps_points() != new_gauge.eps_points() {
                    return Err(Error::GaugeMismatch(
                        "regauge requires the same ε-grid".into(),
                    ));
                }
                let mut x = GenNumber::from_samples((**v).clone(), new_gauge)?;
                x.uncertainty = self.uncertainty.clone();
                Ok(x)
            }
        }
    }
}

enum UncRule {
    Add,
    Mul,
}

struct SampledFit {
    fit: Option<crate::order::TailFit>,
    below_floor: usize,
    tail: usize,
}

#[derive(Clone)]
struct SampledClass {
    infinitesimal: Verdict,
    finite: Verdict,
    infinite: Verdict,
    near_standard: Option<Complex64>,
}

/// Classification of a generalized number per the limit semantics: the three
/// properties are not mutually exclusive nor exhaustive.
#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub infinitesimal: Verdict,
    pub finite: Verdict,
    pub infinite: Verdict,
    #[serde(serialize_with = "ser_opt_complex")]
    pub near_standard: Option<Complex64>,
    pub order: AsymptoticOrder,
}

fn ser_opt_complex<S: serde::Serializer>(
    v: &Option<Complex64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(z) => s.serialize_some(&[z.re, z.im]),
        None => s.serialize_none(),
    }
}

fn bool_v(b: bool) -> VerdictValue {
    if b {
        VerdictValue::True
    } else {
        VerdictValue::False
    }
}

/// log(e^a + e^b) without overflow.
fn lse(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn fresh_set_id() -> u64 {
    use std::sync::atomic::{AtomicU64, Ordering};
    static NEXT: AtomicU64 = AtomicU64::new(0);
    NEXT.fetch_add(1, Ordering::Relaxed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::EpsGrid;

    fn g() -> Arc<Gauge> {
        Gauge::standard()
    }

    fn num(src: &str) -> GenNumber {
        GenNumber::parse(src, g()).unwrap()
    }

    #[test]
    fn ring_identities_prove_symbolically() {
        let a = num("1 + eps");
        let b = num("rho^2 - 3");
        let left = a.add(&b).unwrap().mul(&a.sub(&b).unwrap()).unwrap();
        let right = a.mul(&a).unwrap().sub(&b.mul(&b).unwrap()).unwrap();
        let v = left.eq(&right).unwrap();
        assert!(v.is_true(), "{v}");
        assert_eq!(v.method, Method::Symbolic);
    }

    #[test]
    fn negligible_versus_finite_order() {
        let x = num("exp(log(rho)/eps)");
        let v = x.is_zero_at(10.0).unwrap();
        assert!(v.is_true(), "{v}");
        assert_eq!(v.method, Method::Symbolic);

        let y = num("rho^3");
        let v = y.is_zero_at(10.0).unwrap();
        assert!(v.is_false(), "{v}");
        let ord = y.order().unwrap();
        assert!(ord.exact);
        assert_eq!(ord.value, OrderValue::Finite(3.0));
    }

    #[test]
    fn regauge_changes_the_verdicts() {
        let x = num("exp(-log(2)/eps)");
        assert!(x.is_zero_at(10.0).unwrap().is_true());

        let sigma = Arc::new(
            Gauge::parse_new("sigma", "exp(-1/eps)", EpsGrid::default()).unwrap(),
        );
        let y = x.regauge(sigma.clone()).unwrap();
        let v = y.is_zero_at(10.0).unwrap();
        assert!(v.is_false(), "{v}");
        let pos = GenNumber::zero(sigma).lt(&y).unwrap();
        assert!(pos.is_true(), "{pos}");
        assert_eq!(pos.method, Method::Symbolic);
    }

    #[test]
    fn moderateness_rejects_exploding_nets() {
        let e = crate::netlang::parse("exp(1/eps)").unwrap();
        let err = GenNumber::from_expr(e, g()).unwrap_err();
        assert!(matches!(err, Error::NotModerate(_)), "{err}");
    }

    #[test]
    fn classification_of_oscillating_net() {
        let x = num("eps^-1*sin(eps^-1)");
        let c = x.classify().unwrap();
        assert!(c.infinitesimal.is_false());
        assert!(c.finite.is_false());
        assert!(c.infinite.is_false());
        assert_eq!(c.infinitesimal.method, Method::Symbolic);
    }

    #[test]
    fn near_standard_part() {
        let x = num("3 + eps^2 + i*rho");
        let c = x.classify().unwrap();
        let ns = c.near_standard.expect("near-standard");
        assert!((ns.re - 3.0).abs() < 1e-12 && ns.im.abs() < 1e-12);
    }

    #[test]
    fn positivity_procedures_agree() {
        for src in ["eps^2", "2 + sin(eps)", "rho*(3 - rho)"] {
            let x = num(src);
            let ps = x.positivity_procedures(10.0).unwrap();
            for (i, p) in ps.iter().enumerate() {
                assert!(p.is_true(), "procedure {i} on {src}: {p}");
            }
        }
        let neg = num("-eps");
        let ps = neg.positivity_procedures(10.0).unwrap();
        for (i, p) in ps.iter().enumerate() {
            assert!(p.is_false(), "procedure {i} on -eps: {p}");
        }
    }

    #[test]
    fn invertibility_and_density_repair() {
        let x = num("rho^4");
        assert!(x.is_invertible().is_true());
        assert!(x.invert().is_ok());

        let z = GenNumber::zero(g());
        assert!(z.is_invertible().is_false());
        let r = num("rho^2");
        let repaired = z.make_invertible_near(&r).unwrap();
        let v = repaired.is_invertible();
        assert!(v.is_true(), "{v}");
        // The repair stays within r of the original.
        let d = repaired.sub(&z).unwrap().abs();
        let within = d.leq(&r).unwrap();
        assert!(within.is_true(), "{within}");
    }

    #[test]
    fn nearest_integer_net_rounds_half_up() {
        let x = num("(5/2) + 0*eps");
        let n = x.ni().unwrap();
        let vals = n.values().unwrap();
        for v in vals.iter() {
            assert_eq!(v.to_complex_lossy().re, 3.0);
        }
        let y = num("-(1/2)");
        let nv = y.ni().unwrap().values().unwrap();
        for v in nv.iter() {
            assert_eq!(v.to_complex_lossy().re, 0.0);
        }
    }

    #[test]
    fn restriction_and_subpoints() {
        let x = num("eps");
        let set = IndexSet::alternating("evens", x.gauge().len());
        let xr = x.restrict(&set).unwrap();
        assert!(xr.is_symbolic());
        let vals = xr.values().unwrap();
        for (k, v) in vals.iter().enumerate() {
            if k % 2 == 0 {
                assert!(!v.is_zero());
            } else {
                assert!(v.is_zero());
            }
        }
        // x restricted differs from x on a cofinal set but agrees on one too.
        let (veq, weq) = xr.sbpt_eq(&x).unwrap();
        assert!(veq.is_true(), "{veq}");
        assert!(weq.is_some());
        let (vlt, _) = xr.sbpt_lt(&x).unwrap();
        assert!(vlt.is_true(), "{vlt}");
    }

    #[test]
    fn tolerance_equality_for_floating_point_noise() {
        let x = num("sin(eps)^2 + cos(eps)^2");
        let one = GenNumber::one(g());
        let v = x.eq(&one).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn division_requires_certified_invertibility() {
        let one = GenNumber::one(g());
        let z = GenNumber::zero(g());
        assert!(one.div(&z).is_err());
        let x = num("eps^-1*sin(eps^-1)");
        assert!(one.div(&x).is_err());
    }
}
