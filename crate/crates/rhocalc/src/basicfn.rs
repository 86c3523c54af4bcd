//! Basic functions: generalized functions `f(z) = [f_ε(z_ε)]` defined by
//! nets of ordinary functions, together with the limit calculus of the sharp
//! topology — sharp limits with witness radii, weak little-oh on invertible
//! probes, and the ε-wise ("strong") little-oh that underlies
//! differentiability certificates.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::netlang::{self, ex, NetExpr};
use crate::scalars::{GenNumber, Verdict, VerdictValue, DEFAULT_ORDER};
use crate::sets::{RegionNet, SharpBall};
use crate::wide::WideComplex;

/// Per-index evaluator table: `(k, z_ε) → (value, log-magnitude uncertainty)`.
/// Exact evaluators report `f64::NEG_INFINITY` uncertainty.
pub type TableFn = dyn Fn(usize, WideComplex) -> Result<(WideComplex, f64)> + Send + Sync;

/// Two-parameter evaluator table for remainders: `(k, z_ε, h_ε) → value`.
pub type Table2Fn =
    dyn Fn(usize, WideComplex, WideComplex) -> Result<(WideComplex, f64)> + Send + Sync;

/// How the defining net of a function is given.
#[derive(Clone)]
pub enum FnBody {
    /// Closed form in the parameter `z` (may also mention `eps`/`rho`).
    Expr(NetExpr),
    /// Opaque per-index callable (e.g. a quadrature).
    Table(Arc<TableFn>),
}

impl fmt::Debug for FnBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FnBody::Expr(e) => write!(f, "Expr({e})"),
            FnBody::Table(_) => write!(f, "Table(..)"),
        }
    }
}

/// A net of ordinary functions over a gauge's ε-grid.
#[derive(Clone, Debug)]
pub struct FunctionNet {
    pub name: String,
    pub gauge: Arc<Gauge>,
    pub body: FnBody,
}

impl FunctionNet {
    pub fn from_expr(name: impl Into<String>, expr: NetExpr, gauge: Arc<Gauge>) -> Result<FunctionNet> {
        let params = expr.params();
        if params.iter().any(|p| p != "z") {
            return Err(Error::invalid(format!(
                "function body may only use the parameter `z`, found {params:?}"
            )));
        }
        Ok(FunctionNet {
            name: name.into(),
            gauge,
            body: FnBody::Expr(expr),
        })
    }

    pub fn parse(name: impl Into<String>, src: &str, gauge: Arc<Gauge>) -> Result<FunctionNet> {
        FunctionNet::from_expr(name, netlang::parse(src)?, gauge)
    }

    pub fn from_table(
        name: impl Into<String>,
        gauge: Arc<Gauge>,
        f: impl Fn(usize, WideComplex) -> Result<(WideComplex, f64)> + Send + Sync + 'static,
    ) -> FunctionNet {
        FunctionNet {
            name: name.into(),
            gauge,
            body: FnBody::Table(Arc::new(f)),
        }
    }

    pub fn expr(&self) -> Option<&NetExpr> {
        match &self.body {
            FnBody::Expr(e) => Some(e),
            FnBody::Table(_) => None,
        }
    }

    /// Closed-form derivative in `z`, when the body is an expression.
    pub fn derivative_expr(&self) -> Option<NetExpr> {
        match &self.body {
            FnBody::Expr(e) => netlang::derivative(e, "z").ok(),
            FnBody::Table(_) => None,
        }
    }

    /// Evaluate the defining net at one grid index.
    pub fn eval_at(&self, k: usize, z: WideComplex) -> Result<(WideComplex, f64)> {
        match &self.body {
            FnBody::Expr(e) => {
                let mut binds = BTreeMap::new();
                binds.insert("z".to_string(), z);
                let ctx = self.gauge.ctx(k);
                let ctx = ctx.with_bindings(&binds);
                Ok((netlang::eval(e, &ctx)?, f64::NEG_INFINITY))
            }
            FnBody::Table(f) => f(k, z),
        }
    }

    /// Evaluate at a generalized point. Symbolic inputs with symbolic bodies
    /// stay symbolic (parameter substitution); anything else is sampled, with
    /// table uncertainties attached to the result.
    pub fn eval(&self, z: &GenNumber) -> Result<GenNumber> {
        if !z.gauge().same_as(&self.gauge) {
            return Err(Error::GaugeMismatch(format!(
                "function `{}` and its argument live over different gauges",
                self.name
            )));
        }
        if let (FnBody::Expr(body), Some(ze), None) = (&self.body, z.expr(), z.sets()) {
            let composed = body.subst_param("z", ze);
            return GenNumber::from_expr(composed, self.gauge.clone());
        }
        let zs = z.values()?;
        let n = self.gauge.len();
        let results: Vec<Result<(WideComplex, f64)>> =
            crate::par::map_indexed(n, |k| self.eval_at(k, zs[k]));
        let mut vals = Vec::with_capacity(n);
        let mut unc = Vec::with_capacity(n);
        let mut any_unc = false;
        for r in results {
            let (v, u) = r?;
            any_unc |= u.is_finite();
            vals.push(v);
            unc.push(u);
        }
        if any_unc {
            GenNumber::from_samples_with_uncertainty(vals, unc, self.gauge.clone())
        } else {
            GenNumber::from_samples(vals, self.gauge.clone())
        }
    }
}

/// Where a basic function is declared to live.
#[derive(Clone, Debug)]
pub enum Domain {
    FullPlane,
    Ball(SharpBall),
    Region(Arc<RegionNet>),
}

impl Domain {
    pub fn member(&self, z: &GenNumber) -> Result<Verdict> {
        match self {
            Domain::FullPlane => Ok(Verdict::symbolic(VerdictValue::True, "full plane")),
            Domain::Ball(b) => b.member(z),
            Domain::Region(r) => r.member_strongly(z),
        }
    }

    /// A per-ε length scale of the domain (ball radius, or 1/2 by default),
    /// used to size probe offsets.
    pub fn scale_at(&self, k: usize) -> f64 {
        match self {
            Domain::Ball(b) => match b.radius.values() {
                Ok(v) => {
                    let r = v[k].to_complex_lossy().norm();
                    if r.is_finite() && r > 0.0 {
                        r.min(0.5)
                    } else {
                        0.5
                    }
                }
                Err(_) => 0.5,
            },
            _ => 0.5,
        }
    }
}

/// A function net together with its declared domain and a cached
/// well-definedness spot-check.
#[derive(Clone, Debug)]
pub struct BasicFunction {
    pub net: FunctionNet,
    pub domain: Domain,
    well_def: OnceLock<Verdict>,
}

impl BasicFunction {
    pub fn new(net: FunctionNet, domain: Domain) -> BasicFunction {
        BasicFunction {
            net,
            domain,
            well_def: OnceLock::new(),
        }
    }

    pub fn on_full_plane(net: FunctionNet) -> BasicFunction {
        BasicFunction::new(net, Domain::FullPlane)
    }

    pub fn gauge(&self) -> &Arc<Gauge> {
        &self.net.gauge
    }

    /// Evaluate at a generalized point after checking domain membership.
    pub fn eval(&self, z: &GenNumber) -> Result<GenNumber> {
        let m = self.domain.member(z)?;
        if m.is_false() {
            return Err(Error::OutsideDomain(format!(
                "probe rejected by domain of `{}`: {m}",
                self.net.name
            )));
        }
        self.net.eval(z)
    }

    /// Spot-check of well-definedness at a probe: representatives perturbed
    /// by negligible offsets (order ρ^{N+2} with N the default order) must
    /// give ρ-equivalent values. A function with a large derivative at the
    /// probe amplifies the perturbation by a fixed power, so a failed first
    /// round measures that amplification and retries once with a perturbation
    /// deep enough that only genuine representative dependence can fail.
    /// Cached after the first run.
    pub fn well_definedness(&self, z: &GenNumber, seed: u64) -> Result<Verdict> {
        if let Some(v) = self.well_def.get() {
            return Ok(v.clone());
        }
        let base = self.eval(z)?;
        let depth = DEFAULT_ORDER + 2.0;
        let (mut out, amp) = self.well_def_round(z, &base, depth, seed)?;
        if !out.is_true() && amp > 0.0 {
            let deeper = (DEFAULT_ORDER + 4.0 + amp).min(200.0);
            let (retry, _) = self.well_def_round(z, &base, deeper, seed ^ 0x9e37)?;
            out = retry;
        }
        let out = Verdict {
            detail: format!(
                "representative independence at 3 perturbed probes: {}",
                out.detail
            ),
            ..out
        };
        let _ = self.well_def.set(out.clone());
        Ok(out)
    }

    /// One round of perturbation probes at the given depth. Returns the worst
    /// verdict together with the observed amplification: how many orders the
    /// perturbation lost passing through the function (0 when none did).
    fn well_def_round(
        &self,
        z: &GenNumber,
        base: &GenNumber,
        depth: f64,
        seed: u64,
    ) -> Result<(Verdict, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: Option<Verdict> = None;
        let mut amp: f64 = 0.0;
        for _ in 0..3 {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let c = GenNumber::constant(Complex64::from_polar(1.0, theta), self.gauge().clone());
            let eta = GenNumber::drho(self.gauge().clone())
                .powi(depth as i64)?
                .mul(&c)?;
            let perturbed = self.eval(&z.add(&eta)?)?;
            let v = base.eq_at(&perturbed, DEFAULT_ORDER)?;
            if !v.is_true() {
                if let crate::order::OrderValue::Finite(q_hat) =
                    base.sub(&perturbed)?.order()?.value
                {
                    amp = amp.max(depth - q_hat);
                }
            }
            let is_worse = match &worst {
                None => true,
                Some(w) => verdict_rank(&v) > verdict_rank(w),
            };
            if is_worse {
                worst = Some(v);
            }
        }
        Ok((worst.expect("at least one perturbation probe"), amp))
    }

    /// Lipschitz certificate on the ball of radius `dρ^q` around `z0`: finds
    /// a moderate net `L_ε` bounding the slope there. Closed-form bodies use
    /// the derivative bound over probe points; tables use pairwise slopes.
    pub fn lipschitz_certify(&self, z0: &GenNumber, q: f64, seed: u64) -> Result<LipschitzCert> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gauge = self.gauge().clone();
        let n = gauge.len();
        let probes = 12usize;

        // Per-index slope estimates.
        let mut best = vec![f64::NEG_INFINITY; n]; // log-magnitudes of L_ε
        let z0s = z0.values()?;
        for _ in 0..probes {
            let t1: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let t2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let m1: f64 = rng.random_range(0.05..1.0);
            let m2: f64 = rng.random_range(0.05..1.0);
            for k in 0..n {
                let r = (q * gauge.log_rho(k)).exp(); // ρ_ε^q
                let a = WideComplex::from_complex(Complex64::from_polar(m1 * r, t1));
                let b = WideComplex::from_complex(Complex64::from_polar(m2 * r, t2));
                let za = z0s[k].add(a);
                let zb = z0s[k].add(b);
                let slope_lm = match &self.net.derivative_expr() {
                    Some(d) => {
                        // sup |f'| over the two probe points
                        let mut binds = BTreeMap::new();
                        binds.insert("z".to_string(), za);
                        let va = netlang::eval(d, &gauge.ctx(k).with_bindings(&binds))?;
                        let mut binds = BTreeMap::new();
                        binds.insert("z".to_string(), zb);
                        let vb = netlang::eval(d, &gauge.ctx(k).with_bindings(&binds))?;
                        va.lm().max(vb.lm())
                    }
                    None => {
                        let (fa, _) = self.net.eval_at(k, za)?;
                        let (fb, _) = self.net.eval_at(k, zb)?;
                        let df = fa.sub(fb);
                        let dz = za.sub(zb);
                        if dz.is_zero() || df.is_zero() {
                            f64::NEG_INFINITY
                        } else {
                            df.lm() - dz.lm()
                        }
                    }
                };
                if slope_lm > best[k] {
                    best[k] = slope_lm;
                }
            }
        }
        // L = 2 × the worst observed slope (log-space +ln 2).
        let vals: Vec<WideComplex> = best
            .iter()
            .map(|lm| {
                if lm.is_finite() {
                    WideComplex::from_log(lm + std::f64::consts::LN_2, 0.0)
                } else {
                    WideComplex::ZERO
                }
            })
            .collect();
        let l = GenNumber::from_samples(vals, gauge.clone());
        match l {
            Ok(l) => {
                let ord = l.order()?;
                let verdict = Verdict::sampled(
                    VerdictValue::True,
                    DEFAULT_ORDER,
                    format!(
                        "Lipschitz net of order {:?} on the dρ^{q} ball ({} slope probes)",
                        ord.value, probes
                    ),
                );
                Ok(LipschitzCert { l, q, verdict })
            }
            Err(Error::NotModerate(d)) => Ok(LipschitzCert {
                l: GenNumber::zero(gauge),
                q,
                verdict: Verdict::sampled(
                    VerdictValue::False,
                    DEFAULT_ORDER,
                    format!("no moderate Lipschitz net found: {d}"),
                ),
            }),
            Err(e) => Err(e),
        }
    }
}

fn verdict_rank(v: &Verdict) -> u8 {
    match v.value {
        VerdictValue::True => 0,
        VerdictValue::Undecidable => 1,
        VerdictValue::False => 2,
    }
}

/// Combine sub-verdicts: the worst value wins; details are joined.
pub fn join_verdicts(parts: &[(&str, &Verdict)]) -> Verdict {
    let mut worst = 0u8;
    let mut at: Option<f64> = None;
    let mut any_sampled = false;
    let mut details = Vec::new();
    for (name, v) in parts {
        worst = worst.max(verdict_rank(v));
        if let Some(a) = v.decided_at_order {
            at = Some(at.map_or(a, |b: f64| b.min(a)));
        }
        any_sampled |= v.method == crate::scalars::Method::Sampled;
        details.push(format!("{name}: {v}"));
    }
    let value = match worst {
        0 => VerdictValue::True,
        1 => VerdictValue::Undecidable,
        _ => VerdictValue::False,
    };
    let detail = details.join("; ");
    if any_sampled {
        Verdict::sampled(value, at.unwrap_or(DEFAULT_ORDER), detail)
    } else {
        Verdict::symbolic(value, detail)
    }
}

/// Lipschitz certificate: the slope net `L`, the ball order `q`, and the
/// moderateness verdict.
#[derive(Clone, Debug)]
pub struct LipschitzCert {
    pub l: GenNumber,
    pub q: f64,
    pub verdict: Verdict,
}

/// A probe-level map of generalized numbers. Returning `None` marks the
/// probe as undefined (e.g. a denominator without certified invertibility),
/// which the limit machinery skips rather than judges.
pub type ProbeFn<'a> = dyn Fn(&GenNumber) -> Result<Option<GenNumber>> + 'a;

/// Witness for one target order: all probes with `0 < |h − z0| < dρ^h_order`
/// satisfied `|R(h) − λ| ≤ dρ^q_prime`.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct LimitWitness {
    pub q_prime: i64,
    pub h_order: i64,
}

#[derive(Clone, Debug)]
pub struct SharpLimitReport {
    pub verdict: Verdict,
    pub witnesses: Vec<LimitWitness>,
}

/// Sharp-topology limit `lim_{h→z0} R(h) = λ`, certified order by order: for
/// each `q′ ≤ q` a witness radius `H = dρ^j` is searched such that sampled
/// probes `0 < |h − z0| < H` satisfy `|R(h) − λ| ≤ dρ^{q′}`. Probes are
/// invertible by construction (exact gauge powers times unit constants).
pub fn sharp_limit(
    r: &ProbeFn<'_>,
    gauge: &Arc<Gauge>,
    z0: &GenNumber,
    lambda: &GenNumber,
    q: i64,
    seed: u64,
) -> Result<SharpLimitReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witnesses: Vec<LimitWitness> = Vec::new();
    let mut start_j = 1i64;
    let j_cap = 2 * q.max(1) + 8;
    for q_prime in 1..=q.max(1) {
        let mut found = None;
        let mut saw_undecidable = false;
        let mut last_failure = String::new();
        let mut j = start_j;
        while j <= j_cap {
            let mut all_true = true;
            let mut any_probe = false;
            // Probes strictly inside H = dρ^j: depths j+1 and j+2.
            'batch: for depth in [j + 1, j + 2] {
                for mag in [1.0, 0.5, 0.25] {
                    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let c = GenNumber::constant(
                        Complex64::from_polar(mag, theta),
                        gauge.clone(),
                    );
                    let h = z0.add(&GenNumber::drho(gauge.clone()).powi(depth)?.mul(&c)?)?;
                    let rv = match r(&h)? {
                        Some(v) => v,
                        None => continue,
                    };
                    any_probe = true;
                    let dev = rv.sub(lambda)?.abs();
                    let bound = GenNumber::drho(gauge.clone()).powi(q_prime)?;
                    let v = dev.leq(&bound)?;
                    match v.value {
                        VerdictValue::True => {}
                        VerdictValue::False => {
                            all_true = false;
                            last_failure = format!(
                                "|R(h)−λ| > dρ^{q_prime} at h = z0 + {mag:.2}e^{theta:.2}i·dρ^{depth}: {}",
                                v.detail
                            );
                            break 'batch;
                        }
                        VerdictValue::Undecidable => {
                            all_true = false;
                            saw_undecidable = true;
                            last_failure =
                                format!("undecidable at probe depth {depth}: {}", v.detail);
                            break 'batch;
                        }
                    }
                }
            }
            if !any_probe {
                return Ok(SharpLimitReport {
                    verdict: Verdict::sampled(
                        VerdictValue::Undecidable,
                        q as f64,
                        format!("no admissible probes below dρ^{j} (all branches undefined)"),
                    ),
                    witnesses,
                });
            }
            if all_true {
                found = Some(j);
                break;
            }
            j += 1;
        }
        match found {
            Some(j) => {
                witnesses.push(LimitWitness {
                    q_prime,
                    h_order: j,
                });
                start_j = j; // witness radii shrink monotonically
            }
            None => {
                let value = if saw_undecidable {
                    VerdictValue::Undecidable
                } else {
                    VerdictValue::False
                };
                return Ok(SharpLimitReport {
                    verdict: Verdict::sampled(
                        value,
                        q_prime as f64,
                        format!(
                            "no witness radius down to dρ^{j_cap} for target dρ^{q_prime}; {last_failure}"
                        ),
                    ),
                    witnesses,
                });
            }
        }
    }
    let wit = witnesses
        .iter()
        .map(|w| format!("dρ^{}→dρ^{}", w.h_order, w.q_prime))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(SharpLimitReport {
        verdict: Verdict::sampled(
            VerdictValue::True,
            q as f64,
            format!("witness radii: {wit}"),
        ),
        witnesses,
    })
}

/// Convenience wrapper: sharp limit of a basic function at `z0`.
pub fn sharp_limit_of(
    f: &BasicFunction,
    z0: &GenNumber,
    lambda: &GenNumber,
    q: i64,
    seed: u64,
) -> Result<SharpLimitReport> {
    let probe: Box<ProbeFn<'_>> = Box::new(|h: &GenNumber| match f.eval(h) {
        Ok(v) => Ok(Some(v)),
        Err(Error::OutsideDomain(_)) => Ok(None),
        Err(e) => Err(e),
    });
    sharp_limit(probe.as_ref(), f.gauge(), z0, lambda, q, seed)
}

/// Weak little-oh `f1(h) = ō(f2(h))` as `h → 0`: the ratio `f1/f2` is formed
/// on probes where `f2` is certified invertible and must have sharp limit 0.
pub fn weak_little_oh(
    f1: &ProbeFn<'_>,
    f2: &ProbeFn<'_>,
    gauge: &Arc<Gauge>,
    q: i64,
    seed: u64,
) -> Result<Verdict> {
    let ratio: Box<ProbeFn<'_>> = Box::new(|h: &GenNumber| {
        let num = match f1(h)? {
            Some(v) => v,
            None => return Ok(None),
        };
        let den = match f2(h)? {
            Some(v) => v,
            None => return Ok(None),
        };
        if !den.is_invertible().is_true() {
            return Ok(None);
        }
        Ok(Some(num.div(&den)?))
    });
    let zero = GenNumber::zero(gauge.clone());
    let rep = sharp_limit(ratio.as_ref(), gauge, &zero, &zero, q, seed)?;
    Ok(rep.verdict)
}

/// Which linearization identity a strong-little-oh certificate checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LittleOhVariant {
    /// `f_ε(z+h) = f_ε(z) + h·m_ε + h·r_ε(z,h)` — differentiability.
    Linearization,
    /// `f_ε(z+h) = f_ε(z) + r_ε(z,h)` — sharp continuity.
    Continuity,
}

/// Remainder net `r_ε(z, h)`.
#[derive(Clone)]
pub struct RemainderNet {
    pub body: Fn2Body,
    pub zero_at_zero: bool,
}

#[derive(Clone)]
pub enum Fn2Body {
    /// Closed form in parameters `z` and `h`.
    Expr(NetExpr),
    Table(Arc<Table2Fn>),
}

impl fmt::Debug for RemainderNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Fn2Body::Expr(e) => write!(f, "RemainderNet({e})"),
            Fn2Body::Table(_) => write!(f, "RemainderNet(table)"),
        }
    }
}

impl RemainderNet {
    pub fn from_expr(expr: NetExpr) -> Result<RemainderNet> {
        let params = expr.params();
        if params.iter().any(|p| p != "z" && p != "h") {
            return Err(Error::invalid(format!(
                "remainder body may only use `z` and `h`, found {params:?}"
            )));
        }
        Ok(RemainderNet {
            body: Fn2Body::Expr(expr),
            zero_at_zero: true,
        })
    }

    pub fn parse(src: &str) -> Result<RemainderNet> {
        RemainderNet::from_expr(netlang::parse(src)?)
    }

    /// Tabulated remainder; the closure returns the value together with a
    /// log-magnitude uncertainty bound (`NEG_INFINITY` when exact).
    pub fn from_table(
        f: impl Fn(usize, WideComplex, WideComplex) -> Result<(WideComplex, f64)>
            + Send
            + Sync
            + 'static,
    ) -> RemainderNet {
        RemainderNet {
            body: Fn2Body::Table(Arc::new(f)),
            zero_at_zero: true,
        }
    }

    pub fn eval_at(
        &self,
        gauge: &Gauge,
        k: usize,
        z: WideComplex,
        h: WideComplex,
    ) -> Result<(WideComplex, f64)> {
        match &self.body {
            Fn2Body::Expr(e) => {
                let mut binds = BTreeMap::new();
                binds.insert("z".to_string(), z);
                binds.insert("h".to_string(), h);
                let ctx = gauge.ctx(k);
                Ok((netlang::eval(e, &ctx.with_bindings(&binds))?, f64::NEG_INFINITY))
            }
            Fn2Body::Table(f) => f(k, z, h),
        }
    }

    /// Remainder at generalized points, as a probe-level map.
    pub fn eval(&self, gauge: &Arc<Gauge>, z: &GenNumber, h: &GenNumber) -> Result<GenNumber> {
        if let (Fn2Body::Expr(e), Some(ze), Some(he)) = (&self.body, z.expr(), h.expr()) {
            if z.sets().is_none() && h.sets().is_none() {
                let composed = e.subst_param("z", ze).subst_param("h", he);
                return GenNumber::from_expr(composed, gauge.clone());
            }
        }
        let zs = z.values()?;
        let hs = h.values()?;
        let vals: Vec<Result<(WideComplex, f64)>> = crate::par::map_indexed(gauge.len(), |k| {
            self.eval_at(gauge, k, zs[k], hs[k])
        });
        let mut out = Vec::with_capacity(gauge.len());
        let mut unc = Vec::with_capacity(gauge.len());
        for v in vals {
            let (v, u) = v?;
            out.push(v);
            unc.push(u);
        }
        if unc.iter().all(|u| *u == f64::NEG_INFINITY) {
            GenNumber::from_samples(out, gauge.clone())
        } else {
            GenNumber::from_samples_with_uncertainty(out, unc, gauge.clone())
        }
    }
}

/// Report of a strong-little-oh certification: the exact ε-wise identity,
/// the `r(z,0) = 0` condition, the ε-wise vanishing of the remainder, and
/// its sharp limit.
#[derive(Clone, Debug)]
pub struct StrongLittleOhReport {
    pub variant: LittleOhVariant,
    pub identity: Verdict,
    pub at_zero: Verdict,
    pub epswise: Verdict,
    pub sharp: Verdict,
    pub verdict: Verdict,
}

/// Relative tolerance for the exact ε-wise identity: the identity holds in
/// exact arithmetic, floating point does not.
const ID_REL_TOL: f64 = 1e-12;

/// Strong little-oh certificate for `f` at the probes `zs`: checks the exact
/// ε-wise identity at randomized increments, `r(z,0) = 0`, the ε-wise limit
/// `r_ε(z_ε, h) → 0` for fixed ε, and the sharp limit of `h ↦ r(z0, h)`.
/// `m = None` selects the continuity variant (no linear term).
pub fn strong_little_oh(
    f: &BasicFunction,
    zs: &[GenNumber],
    m: Option<&GenNumber>,
    r: &RemainderNet,
    q: i64,
    seed: u64,
) -> Result<StrongLittleOhReport> {
    let variant = if m.is_some() {
        LittleOhVariant::Linearization
    } else {
        LittleOhVariant::Continuity
    };
    if zs.is_empty() {
        return Err(Error::invalid("strong little-oh needs at least one probe point"));
    }
    let gauge = f.gauge().clone();
    let n = gauge.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut identity = Verdict::sampled(
        VerdictValue::True,
        q as f64,
        format!("ε-wise identity within {ID_REL_TOL:.0e} relative"),
    );
    let mut at_zero = Verdict::sampled(VerdictValue::True, q as f64, "r(z, 0) = 0".to_string());

    'outer: for z in zs {
        let zvals = z.values()?;
        let mvals = match m {
            Some(mv) => Some(mv.values()?),
            None => None,
        };
        for k in 0..n {
            let scale = f.domain.scale_at(k);
            let rho = gauge.rho(k).to_complex_lossy().norm();
            // r(z, 0) must vanish identically (up to declared table noise).
            let (r0, ur0) = r.eval_at(&gauge, k, zvals[k], WideComplex::ZERO)?;
            let (fz, ufz) = f.net.eval_at(k, zvals[k])?;
            if !r0.is_zero() && r0.lm() > ur0 + 2.0 {
                let ref_lm = fz.lm().max(0.0);
                if r0.lm() > ref_lm + ID_REL_TOL.ln() {
                    at_zero = Verdict::sampled(
                        VerdictValue::False,
                        q as f64,
                        format!(
                            "r(z, 0) ≠ 0 at grid index {k}: log-magnitude {:.3}",
                            r0.lm()
                        ),
                    );
                    break 'outer;
                }
            }
            // Exact identity at randomized increments.
            for mag in [0.6 * scale, scale * rho, scale * rho * rho] {
                let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let h = WideComplex::from_complex(Complex64::from_polar(mag, theta));
                let (fzh, ufzh) = f.net.eval_at(k, zvals[k].add(h))?;
                let (rv, urv) = r.eval_at(&gauge, k, zvals[k], h)?;
                let linear = match &mvals {
                    Some(ms) => h.mul(ms[k]),
                    None => WideComplex::ZERO,
                };
                let rterm = match variant {
                    LittleOhVariant::Linearization => h.mul(rv),
                    LittleOhVariant::Continuity => rv,
                };
                let residual = fzh.sub(fz).sub(linear).sub(rterm);
                if residual.is_zero() {
                    continue;
                }
                let scale_lm = [fzh.lm(), fz.lm(), linear.lm(), rterm.lm()]
                    .into_iter()
                    .filter(|x| x.is_finite())
                    .fold(f64::NEG_INFINITY, f64::max);
                // Declared numeric noise of the evaluations: two function
                // values plus the remainder term (scaled by |h| in the
                // linearization variant).
                let urterm = match variant {
                    LittleOhVariant::Linearization => urv + h.lm(),
                    LittleOhVariant::Continuity => urv,
                };
                let noise_lm = ufz.max(ufzh).max(urterm);
                let threshold = (scale_lm + ID_REL_TOL.ln()).max(noise_lm + 32f64.ln());
                if residual.lm() > threshold {
                    identity = Verdict::sampled(
                        VerdictValue::False,
                        q as f64,
                        format!(
                            "identity residual at grid index {k}, |h| = {mag:.3e}: \
                             relative size exp({:.2})",
                            residual.lm() - scale_lm
                        ),
                    );
                    break 'outer;
                }
            }
        }
    }

    // ε-wise limit of r_ε(z_ε, h) as h → 0 for a few fixed ε.
    let z0 = &zs[0];
    let z0vals = z0.values()?;
    let mut epswise = Verdict::sampled(
        VerdictValue::True,
        q as f64,
        "r_ε(z_ε, h) → 0 at fixed ε (decade scan)".to_string(),
    );
    for &k in &[0usize, n / 2, n - 1] {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (big, _) = r.eval_at(
            &gauge,
            k,
            z0vals[k],
            WideComplex::from_complex(Complex64::from_polar(1e-2, theta)),
        )?;
        let (small, usmall) = r.eval_at(
            &gauge,
            k,
            z0vals[k],
            WideComplex::from_complex(Complex64::from_polar(1e-9, theta)),
        )?;
        let big_n = big.to_complex_lossy().norm();
        let small_n = small.to_complex_lossy().norm();
        let noise_floor = if usmall.is_finite() {
            8.0 * usmall.exp()
        } else {
            0.0
        };
        if !(small_n <= (1e-2 * big_n).max(1e-12).max(noise_floor)) {
            epswise = Verdict::sampled(
                VerdictValue::False,
                q as f64,
                format!(
                    "no ε-wise decay at grid index {k}: |r| = {big_n:.3e} at |h|=1e-2 \
                     vs {small_n:.3e} at |h|=1e-9"
                ),
            );
            break;
        }
    }

    // Sharp limit of h ↦ r(z0, h).
    let probe: Box<ProbeFn<'_>> = Box::new(|h: &GenNumber| r.eval(&gauge, z0, h).map(Some));
    let zero = GenNumber::zero(gauge.clone());
    let sharp = sharp_limit(probe.as_ref(), &gauge, &zero, &zero, q, seed ^ 0x517)?.verdict;

    let verdict = join_verdicts(&[
        ("identity", &identity),
        ("r(·,0)=0", &at_zero),
        ("ε-wise", &epswise),
        ("sharp", &sharp),
    ]);
    Ok(StrongLittleOhReport {
        variant,
        identity,
        at_zero,
        epswise,
        sharp,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Arc<Gauge> {
        Gauge::standard()
    }

    fn num(src: &str) -> GenNumber {
        GenNumber::parse(src, g()).unwrap()
    }

    fn probe_of(f: &BasicFunction) -> Box<ProbeFn<'_>> {
        Box::new(move |h: &GenNumber| match f.eval(h) {
            Ok(v) => Ok(Some(v)),
            Err(Error::OutsideDomain(_)) => Ok(None),
            Err(e) => Err(e),
        })
    }

    #[test]
    fn symbolic_evaluation_composes_expressions() {
        let f = FunctionNet::parse("square", "z^2", g()).unwrap();
        let v = f.eval(&num("rho")).unwrap();
        assert!(v.is_symbolic());
        assert!(v.eq(&num("rho^2")).unwrap().is_true());
    }

    #[test]
    fn domain_rejects_outside_probes() {
        let net = FunctionNet::parse("inv", "1/z", g()).unwrap();
        let ball = SharpBall::new(num("1"), num("(1/2)"));
        let f = BasicFunction::new(net, Domain::Ball(ball));
        assert!(f.eval(&num("1 + (1/4)")).is_ok());
        match f.eval(&num("2")) {
            Err(Error::OutsideDomain(_)) => {}
            other => panic!("expected domain rejection, got {other:?}"),
        }
    }

    #[test]
    fn well_definedness_spot_check_passes_for_polynomials() {
        let f = BasicFunction::on_full_plane(FunctionNet::parse("cube", "z^3", g()).unwrap());
        let v = f.well_definedness(&num("1"), 7).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn sharp_limit_with_witness_radii() {
        // R(h) = h/dρ: |R| = dρ^{j-1} below |h| < dρ^j, so the witness for
        // target q' is H = dρ^{q'+1}.
        let f = BasicFunction::on_full_plane(
            FunctionNet::parse("scaled", "z/rho", g()).unwrap(),
        );
        let rep = sharp_limit_of(&f, &num("0"), &num("0"), 6, 11).unwrap();
        assert!(rep.verdict.is_true(), "{}", rep.verdict);
        for w in &rep.witnesses {
            assert!(w.h_order >= w.q_prime, "{w:?}");
        }
    }

    #[test]
    fn sharp_limit_rejects_wrong_candidate() {
        let f = BasicFunction::on_full_plane(FunctionNet::parse("one", "1 + z", g()).unwrap());
        let rep = sharp_limit_of(&f, &num("0"), &num("0"), 4, 11).unwrap();
        assert!(rep.verdict.is_false(), "{}", rep.verdict);
        // ... and accepts the right one.
        let rep = sharp_limit_of(&f, &num("0"), &num("1"), 4, 11).unwrap();
        assert!(rep.verdict.is_true(), "{}", rep.verdict);
    }

    #[test]
    fn limit_uniqueness_on_shared_witnesses() {
        let f = BasicFunction::on_full_plane(FunctionNet::parse("lin", "z*2", g()).unwrap());
        let l1 = num("0");
        let rep1 = sharp_limit_of(&f, &num("0"), &l1, 5, 3).unwrap();
        assert!(rep1.verdict.is_true());
        // any competing candidate certified by the same machinery must be equal
        let l2 = num("exp(log(rho)/eps)"); // negligible ≠ 0 representative
        let rep2 = sharp_limit_of(&f, &num("0"), &l2, 5, 3).unwrap();
        assert!(rep2.verdict.is_true());
        assert!(l1.eq(&l2).unwrap().is_true());
    }

    #[test]
    fn weak_little_oh_accepts_quadratic() {
        let f1 = BasicFunction::on_full_plane(FunctionNet::parse("sq", "z^2", g()).unwrap());
        let f2 = BasicFunction::on_full_plane(FunctionNet::parse("id", "z", g()).unwrap());
        let v = weak_little_oh(probe_of(&f1).as_ref(), probe_of(&f2).as_ref(), &g(), 6, 5).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn weak_little_oh_rejects_order_violation() {
        // dρ·h is not ō(h²): the ratio dρ/h blows up along h = dρ^k.
        let f1 = BasicFunction::on_full_plane(FunctionNet::parse("num", "rho*z", g()).unwrap());
        let f2 = BasicFunction::on_full_plane(FunctionNet::parse("den", "z^2", g()).unwrap());
        let v = weak_little_oh(probe_of(&f1).as_ref(), probe_of(&f2).as_ref(), &g(), 4, 5).unwrap();
        assert!(v.is_false(), "{v}");
    }

    #[test]
    fn indicator_pathology_is_weakly_flat() {
        // i(z)·z − z where i is the indicator of infinitesimals: on every
        // infinitesimal probe the difference vanishes identically, so it is
        // weak little-oh of h — the linearization of i(z)·z at 0 has slope 1
        // even though the function is 0 at all non-infinitesimal points.
        // The indicator exists only as a probe-level oracle.
        let gauge = g();
        let f1: Box<ProbeFn<'_>> = Box::new(|h: &GenNumber| {
            let c = h.classify()?;
            let ih = if c.infinitesimal.is_true() {
                h.clone()
            } else {
                GenNumber::zero(h.gauge().clone())
            };
            Ok(Some(ih.sub(h)?))
        });
        let f2: Box<ProbeFn<'_>> = Box::new(|h: &GenNumber| Ok(Some(h.clone())));
        let v = weak_little_oh(f1.as_ref(), f2.as_ref(), &gauge, 8, 5).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn weak_little_oh_sum_closure() {
        // f = z² and g = z³/(1+z) are both ō(z); so is their sum.
        let gauge = g();
        let sum: Box<ProbeFn<'_>> = Box::new(|h: &GenNumber| {
            let a = h.powi(2)?;
            let b = h.powi(3)?.div(&GenNumber::one(h.gauge().clone()).add(h)?)?;
            Ok(Some(a.add(&b)?))
        });
        let id: Box<ProbeFn<'_>> = Box::new(|h: &GenNumber| Ok(Some(h.clone())));
        let v = weak_little_oh(sum.as_ref(), id.as_ref(), &gauge, 5, 9).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn strong_little_oh_certifies_square() {
        // f(z) = z² at z₀: f(z+h) = f(z) + 2z·h + h·h, so m = 2z₀, r = h.
        let f = BasicFunction::on_full_plane(FunctionNet::parse("sq", "z^2", g()).unwrap());
        let z0 = num("1 + rho");
        let m = num("2*(1 + rho)");
        let r = RemainderNet::parse("h").unwrap();
        let rep = strong_little_oh(&f, &[z0], Some(&m), &r, 6, 13).unwrap();
        assert!(rep.verdict.is_true(), "{}", rep.verdict);
    }

    #[test]
    fn strong_little_oh_rejects_conjugate() {
        // conj has no complex-linear term: the identity fails for every m.
        let f = BasicFunction::on_full_plane(FunctionNet::parse("cj", "conj(z)", g()).unwrap());
        let z0 = num("1");
        for m_src in ["0", "1", "i"] {
            let m = num(m_src);
            let r = RemainderNet::parse("0").unwrap();
            let rep = strong_little_oh(&f, &[z0.clone()], Some(&m), &r, 4, 17).unwrap();
            assert!(rep.verdict.is_false(), "m = {m_src}: {}", rep.verdict);
        }
    }

    #[test]
    fn continuity_variant_passes_for_smooth_net() {
        let f = BasicFunction::on_full_plane(FunctionNet::parse("exp", "exp(z)", g()).unwrap());
        let z0 = num("0");
        // r(z,h) = exp(z+h) − exp(z)
        let r = RemainderNet::parse("exp(z+h) - exp(z)").unwrap();
        let rep = strong_little_oh(&f, &[z0], None, &r, 5, 19).unwrap();
        assert!(rep.verdict.is_true(), "{}", rep.verdict);
    }

    #[test]
    fn lipschitz_certificate_for_square_and_constant() {
        let f = BasicFunction::on_full_plane(FunctionNet::parse("sq", "z^2", g()).unwrap());
        let cert = f.lipschitz_certify(&num("0"), 0.0, 23).unwrap();
        assert!(cert.verdict.is_true(), "{}", cert.verdict);
        // L ≈ 2·sup|z| ≤ 2 on the unit-scale ball: finite, not infinitesimal.
        let cls = cert.l.classify().unwrap();
        assert!(cls.finite.is_true(), "{}", cls.finite);

        let c = BasicFunction::on_full_plane(FunctionNet::parse("const", "5", g()).unwrap());
        let cert = c.lipschitz_certify(&num("0"), 0.0, 23).unwrap();
        assert!(cert.verdict.is_true());
        assert!(cert.l.eq(&num("0")).unwrap().is_true());
    }

    #[test]
    fn lipschitz_implies_sharp_continuity_at_probe() {
        let f = BasicFunction::on_full_plane(FunctionNet::parse("sq", "z^2", g()).unwrap());
        let z0 = num("1");
        let cert = f.lipschitz_certify(&z0, 0.0, 29).unwrap();
        assert!(cert.verdict.is_true());
        let fz0 = f.eval(&z0).unwrap();
        let rep = sharp_limit_of(&f, &z0, &fz0, 5, 29).unwrap();
        assert!(rep.verdict.is_true(), "{}", rep.verdict);
    }

    #[test]
    fn table_bodies_attach_uncertainty() {
        let gauge = g();
        let f = FunctionNet::from_table("noisy", gauge.clone(), |_k, z| {
            Ok((z.mul(z), z.lm() * 2.0 + (1e-10f64).ln()))
        });
        let v = f.eval(&num("1 + rho")).unwrap();
        // the value is z² up to the declared 1e-10 band, so eq at order 10
        // against the closed form must hold within tolerance
        let exact = num("(1 + rho)^2");
        assert!(v.eq_at(&exact, 6.0).unwrap().is_true());
    }
}
