//! Generalized holomorphic functions: ℂ̃-differentiability certificates with
//! integral-form remainders, Cauchy-quadrature derivatives and Taylor jets
//! with moderateness bounds, Cauchy–Riemann residuals, and the function
//! algebra (sum, product, quotient, composition) with derivative identities.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basicfn::{
    strong_little_oh, BasicFunction, Domain, FnBody, FunctionNet, RemainderNet,
};
use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::netlang::{self, ex, NetExpr};
use crate::order::linear_fit;
use crate::scalars::{GenNumber, Verdict, VerdictValue, DEFAULT_ORDER};
use crate::sets::SharpBall;
use crate::wide::WideComplex;

/// Default node count for circle quadratures.
pub const CIRCLE_NODES: usize = 256;
/// Relative target for node-doubling control on circles.
pub const CIRCLE_TOL: f64 = 1e-10;
const MAX_CIRCLE_NODES: usize = 1 << 14;

/// How a function's per-ε holomorphy was established.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HolomorphyEvidence {
    /// The body is built from the analytic expression grammar (no `abs`,
    /// no `conj`, integer powers of `z`).
    ClosedFormAnalytic,
    /// Holomorphy is supported numerically; the detail names the check
    /// (Cauchy–Riemann residual orders, Montel bound, ...).
    NumericallyCertified(String),
}

/// Differentiability witness at the certification probe.
#[derive(Clone, Debug)]
pub struct DiffWitness {
    /// The derivative at the probe.
    pub m: GenNumber,
    /// Integral-form remainder net `r(z,h) = ∫₀¹ f′(z+ht) dt − f′(z)`.
    pub remainder: RemainderNet,
    /// Strong-little-oh verdict of the linearization.
    pub little_oh: Verdict,
}

/// A certified generalized holomorphic function: the defining net, its
/// derivative net, the certification ball and the witness.
#[derive(Clone, Debug)]
pub struct Ghf {
    pub base: BasicFunction,
    pub deriv: FunctionNet,
    pub ball: SharpBall,
    pub evidence: HolomorphyEvidence,
    pub witness: DiffWitness,
}

/// Taylor jet with fitted moderateness bounds: `|coeff_n| ≤ dρ^{−nQ−R}`.
#[derive(Clone, Debug)]
pub struct TaylorJet {
    pub center: GenNumber,
    /// `coeffs[n] = f⁽ⁿ⁾(center)/n!`.
    pub coeffs: Vec<GenNumber>,
    pub q: f64,
    pub r: f64,
    pub bound_verdict: Verdict,
}

/// The four ℝ̃-partial derivatives at a probe and the Cauchy–Riemann
/// residuals `∂₁u − ∂₂v` and `∂₂u + ∂₁v`.
#[derive(Clone, Debug)]
pub struct PartialDerivativeRecord {
    pub d1u: GenNumber,
    pub d2u: GenNumber,
    pub d1v: GenNumber,
    pub d2v: GenNumber,
    pub residual1: GenNumber,
    pub residual2: GenNumber,
    pub negligible1: Verdict,
    pub negligible2: Verdict,
    /// `f′ = ∂₁u + i·∂₁v`, for cross-checks against circle quadrature.
    pub fprime: GenNumber,
}

// ---------------------------------------------------------------------------
// analytic grammar
// ---------------------------------------------------------------------------

/// Whether the expression defines, per ε, an ordinary holomorphic function
/// of `z` on its evaluation domain: no `abs`/`conj` applied to anything
/// depending on `z`, and only integer powers of `z`-dependent bases.
pub fn expr_is_analytic_in_z(e: &NetExpr) -> bool {
    fn depends_on_z(e: &NetExpr) -> bool {
        e.params().iter().any(|p| p == "z")
    }
    match e {
        NetExpr::Num(_) | NetExpr::ImagUnit | NetExpr::Eps | NetExpr::Rho | NetExpr::Param(_) => {
            true
        }
        NetExpr::Neg(a) => expr_is_analytic_in_z(a),
        NetExpr::Add(a, b) | NetExpr::Sub(a, b) | NetExpr::Mul(a, b) | NetExpr::Div(a, b) => {
            expr_is_analytic_in_z(a) && expr_is_analytic_in_z(b)
        }
        NetExpr::Pow(a, r) => {
            expr_is_analytic_in_z(a) && (!depends_on_z(a) || r.is_integer())
        }
        NetExpr::Apply(f, a) => {
            let inner = expr_is_analytic_in_z(a);
            match f {
                netlang::Func::Abs | netlang::Func::Conj => !depends_on_z(a),
                netlang::Func::Log => inner && !depends_on_z(a),
                _ => inner,
            }
        }
        NetExpr::Piecewise(_, a, b) => expr_is_analytic_in_z(a) && expr_is_analytic_in_z(b),
    }
}

// ---------------------------------------------------------------------------
// circle quadrature
// ---------------------------------------------------------------------------

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

/// Taylor coefficients `f⁽ⁿ⁾(z0)/n!` for all requested `n` at a single grid
/// index, by trapezoid sums over the circle of log-radius `a_lm`, with node
/// doubling until every coefficient is stable to `tol` (relative to the
/// largest sampled value). Returns one `(coefficient, uncertainty)` pair per
/// requested order; uncertainties are log-magnitudes of absolute error.
fn circle_coeffs_at(
    f: &FunctionNet,
    k: usize,
    z0: WideComplex,
    a_lm: f64,
    orders: &[i64],
    start_nodes: usize,
    tol: f64,
) -> Result<Vec<(WideComplex, f64)>> {
    let radius = WideComplex::from_log(a_lm, 0.0);
    let mut nodes = start_nodes.max(16);
    let mut prev: Option<Vec<WideComplex>> = None;
    loop {
        let mut samples = Vec::with_capacity(nodes);
        let mut table_unc = f64::NEG_INFINITY;
        let mut max_term_lm = f64::NEG_INFINITY;
        for j in 0..nodes {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
            let e = WideComplex::from_complex(Complex64::from_polar(1.0, theta));
            let (v, u) = f.eval_at(k, z0.add(radius.mul(e)))?;
            if u.is_finite() && u > table_unc {
                table_unc = u;
            }
            if !v.is_zero() && v.lm() > max_term_lm {
                max_term_lm = v.lm();
            }
            samples.push((theta, v));
        }
        let sums: Vec<WideComplex> = orders
            .iter()
            .map(|&n| {
                let terms = samples.iter().map(|&(theta, v)| {
                    let e = WideComplex::from_complex(Complex64::from_polar(
                        1.0,
                        -(n as f64) * theta,
                    ));
                    v.mul(e)
                });
                WideComplex::sum(terms).mul(WideComplex::from_f64(1.0 / nodes as f64))
            })
            .collect();
        if let Some(p) = &prev {
            let mut worst = f64::NEG_INFINITY;
            let mut ok = true;
            for (a, b) in p.iter().zip(sums.iter()) {
                let diff = b.sub(*a);
                if diff.is_zero() {
                    continue;
                }
                worst = worst.max(diff.lm());
                if !(diff.lm() <= max_term_lm + tol.ln()) {
                    ok = false;
                }
            }
            if ok {
                // absolute error estimate: last doubling delta, floored by
                // arithmetic noise on the samples
                let noise = if max_term_lm.is_finite() {
                    max_term_lm + (1e-15f64).ln()
                } else {
                    f64::NEG_INFINITY
                };
                let base_unc = worst.max(noise).max(table_unc);
                return Ok(orders
                    .iter()
                    .zip(sums.iter())
                    .map(|(&n, s)| {
                        let scale = radius.powi(-n);
                        (s.mul(scale), base_unc + (-(n as f64)) * a_lm)
                    })
                    .collect());
            }
        }
        prev = Some(sums);
        if nodes * 2 > MAX_CIRCLE_NODES {
            return Err(Error::Quadrature(format!(
                "circle quadrature at grid index {k} did not stabilise below \
                 {tol:.1e} within {MAX_CIRCLE_NODES} nodes"
            )));
        }
        nodes *= 2;
    }
}

fn check_circle_inside(f: &BasicFunction, z0: &GenNumber, radius: &GenNumber) -> Result<()> {
    let pos = GenNumber::zero(z0.gauge().clone()).lt(radius)?;
    if !pos.is_true() {
        return Err(Error::NotInvertible(format!(
            "circle radius must be strictly positive (invertible): {pos}"
        )));
    }
    let ok = match &f.domain {
        Domain::FullPlane => Verdict::symbolic(VerdictValue::True, "full plane"),
        Domain::Ball(b) => {
            let reach = z0.sub(&b.center)?.abs().add(radius)?;
            reach.leq(&b.radius)?
        }
        Domain::Region(r) => {
            r.ball_inside_strongly(&SharpBall::new(z0.clone(), radius.clone()))?
        }
    };
    if ok.is_false() {
        return Err(Error::OutsideDomain(format!(
            "closed circle of integration not contained in the domain: {ok}"
        )));
    }
    Ok(())
}

/// `n`-th derivative by Cauchy's formula: per-ε trapezoid quadrature of
/// `(n!/2πi) ∮ f(ζ)/(ζ−z0)^{n+1} dζ` on the circle of radius `radius_ε`,
/// with node doubling; the quadrature delta is attached as uncertainty.
pub fn cauchy_derivative(
    f: &BasicFunction,
    z0: &GenNumber,
    n: u32,
    radius: &GenNumber,
    nodes: usize,
) -> Result<GenNumber> {
    check_circle_inside(f, z0, radius)?;
    let gauge = f.gauge().clone();
    let z0s = z0.values()?;
    let rs = radius.values()?;
    let fact = factorial(n);
    let per: Vec<Result<(WideComplex, f64)>> = crate::par::map_indexed(gauge.len(), |k| {
        let got = circle_coeffs_at(
            &f.net,
            k,
            z0s[k],
            rs[k].lm(),
            &[n as i64],
            nodes,
            CIRCLE_TOL,
        )?;
        let (c, u) = got[0];
        Ok((c.mul(WideComplex::from_f64(fact)), u + fact.ln()))
    });
    let mut vals = Vec::with_capacity(gauge.len());
    let mut unc = Vec::with_capacity(gauge.len());
    for r in per {
        let (v, u) = r?;
        vals.push(v);
        unc.push(u);
    }
    GenNumber::from_samples_with_uncertainty(vals, unc, gauge)
}

// ---------------------------------------------------------------------------
// derivative nets and integral-form remainders
// ---------------------------------------------------------------------------

/// The derivative net of a function net: symbolic differentiation for
/// closed forms, otherwise a per-evaluation Cauchy circle quadrature with
/// radius half the domain scale.
pub fn derivative_net(f: &FunctionNet, domain: &Domain) -> FunctionNet {
    if let FnBody::Expr(e) = &f.body {
        if let Ok(d) = netlang::derivative(e, "z") {
            return FunctionNet::from_expr(format!("{}'", f.name), d, f.gauge.clone())
                .expect("derivative of a z-expression is a z-expression");
        }
    }
    let inner = f.clone();
    let dom = domain.clone();
    FunctionNet::from_table(format!("{}'", f.name), f.gauge.clone(), move |k, z| {
        let a = 0.5 * dom.scale_at(k);
        let got = circle_coeffs_at(&inner, k, z, a.ln(), &[1], 64, 1e-11)?;
        Ok(got[0])
    })
}

/// The integral-form remainder `r(z,h) = ∫₀¹ f′(z+ht) dt − f′(z)`, with the
/// line integral computed by adaptive Gauss–Legendre panels on `[0,1]`.
pub fn int_form_remainder(deriv: &FunctionNet) -> RemainderNet {
    let d = deriv.clone();
    RemainderNet::from_table(move |k, z, h| {
        let (at_z, u_z) = d.eval_at(k, z)?;
        if h.is_zero() {
            return Ok((WideComplex::ZERO, f64::NEG_INFINITY));
        }
        let (integral, u_int) = segment_mean(&d, k, z, h)?;
        let r = integral.sub(at_z);
        // The subtraction cancels near-equal quantities when `h` is tiny, so
        // the result carries arithmetic noise relative to the operand scale.
        let scale = integral.lm().max(at_z.lm());
        let noise = if scale.is_finite() {
            scale + (5e-15f64).ln()
        } else {
            f64::NEG_INFINITY
        };
        let unc = crate::wide::lse2(crate::wide::lse2(u_z, u_int), noise);
        Ok((r, unc))
    })
}

/// Mean of `f′(z + h t)` over `t ∈ [0,1]` by adaptive 16/32-node panels.
/// Returns the mean with a log-magnitude uncertainty bound that includes
/// both the panel stabilisation tolerance and the table noise of the
/// underlying evaluations.
fn segment_mean(
    d: &FunctionNet,
    k: usize,
    z: WideComplex,
    h: WideComplex,
) -> Result<(WideComplex, f64)> {
    const MAX_PANELS: usize = 256;
    let mut stack = vec![(0.0f64, 1.0f64)];
    let mut acc: Vec<WideComplex> = Vec::new();
    let mut unc = f64::NEG_INFINITY;
    let mut used = 0usize;
    while let Some((t0, t1)) = stack.pop() {
        used += 1;
        if used > MAX_PANELS {
            return Err(Error::Quadrature(
                "segment integral of the remainder did not stabilise".into(),
            ));
        }
        let (coarse, _) = segment_panel(d, k, z, h, t0, t1, 16)?;
        let (fine, u_fine) = segment_panel(d, k, z, h, t0, t1, 32)?;
        let diff = fine.sub(coarse);
        // Evaluation noise carried into the panel integral: per-node
        // uncertainty times the total node weight (the panel width).
        let noise_lm = u_fine + (t1 - t0).ln();
        let ok = diff.is_zero()
            || fine.is_zero()
            || diff.lm() <= fine.lm().max(coarse.lm()) + (1e-13f64).ln()
            || diff.lm() <= noise_lm + 3.0f64.ln()
            || (t1 - t0) < 1e-6;
        if ok {
            // Panel error: stabilisation residue plus evaluation noise,
            // weighted by the panel width.
            let width_lm = (t1 - t0).ln();
            let panel_unc = crate::wide::lse2(
                if diff.is_zero() { f64::NEG_INFINITY } else { diff.lm() },
                u_fine,
            ) + width_lm;
            unc = crate::wide::lse2(unc, panel_unc);
            acc.push(fine);
        } else {
            let tm = 0.5 * (t0 + t1);
            stack.push((t0, tm));
            stack.push((tm, t1));
        }
    }
    let total = WideComplex::sum(acc);
    // Floor the reported uncertainty at the arithmetic noise of the sum.
    let noise = if total.is_zero() {
        f64::NEG_INFINITY
    } else {
        total.lm() + (1e-15f64).ln()
    };
    Ok((total, crate::wide::lse2(unc, noise)))
}

fn segment_panel(
    d: &FunctionNet,
    k: usize,
    z: WideComplex,
    h: WideComplex,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<(WideComplex, f64)> {
    let rule = crate::quad::gauss_legendre(n);
    let half = 0.5 * (t1 - t0);
    let mid = 0.5 * (t0 + t1);
    let mut terms = Vec::with_capacity(n);
    let mut unc = f64::NEG_INFINITY;
    for (x, w) in rule.0.iter().zip(rule.1.iter()) {
        let t = mid + half * x;
        let (v, u) = d.eval_at(k, z.add(h.mul(WideComplex::from_f64(t))))?;
        unc = unc.max(u);
        terms.push(v.mul(WideComplex::from_f64(w * half)));
    }
    Ok((WideComplex::sum(terms), unc))
}

// ---------------------------------------------------------------------------
// certification
// ---------------------------------------------------------------------------

impl Ghf {
    /// Assemble and certify a GHF from a function net and its derivative
    /// net on a sharp ball: evaluates the derivative at the center (checking
    /// moderateness), builds the integral-form remainder, and runs the
    /// strong-little-oh verifier. Fails on a `False` linearization verdict.
    pub fn assemble(
        net: FunctionNet,
        deriv: FunctionNet,
        eval_domain: Domain,
        ball: SharpBall,
        q: i64,
        seed: u64,
        evidence: HolomorphyEvidence,
    ) -> Result<Ghf> {
        let m = deriv.eval(&ball.center)?;
        let remainder = int_form_remainder(&deriv);
        // run the linearization check with ball-sized probes
        let probe_fn = BasicFunction::new(net.clone(), Domain::Ball(ball.clone()));
        let rep = strong_little_oh(
            &probe_fn,
            &[ball.center.clone()],
            Some(&m),
            &remainder,
            q,
            seed,
        )?;
        if rep.verdict.is_false() {
            return Err(Error::Certify(format!(
                "linearization is not a strong little-oh: {}",
                rep.verdict
            )));
        }
        Ok(Ghf {
            base: BasicFunction::new(net, eval_domain),
            deriv,
            ball,
            evidence,
            witness: DiffWitness {
                m,
                remainder,
                little_oh: rep.verdict,
            },
        })
    }

    pub fn gauge(&self) -> &Arc<Gauge> {
        self.base.gauge()
    }

    pub fn eval(&self, z: &GenNumber) -> Result<GenNumber> {
        self.base.eval(z)
    }

    /// Derivative at the certification probe (the witness slope).
    pub fn derivative_at_center(&self) -> &GenNumber {
        &self.witness.m
    }
}

/// Certify a function net as a GHF on the ball `B_{dρ^q}(z)`:
/// (1) the ball must sit strongly inside the ambient domain,
/// (2) the net must be holomorphic per ε (closed-form grammar, or numeric
///     Cauchy–Riemann evidence) and basic (representative spot-check),
/// (3) the derivative net must be moderate at probes.
pub fn certify_eps_diff(
    netf: &FunctionNet,
    ambient: &Domain,
    z: &GenNumber,
    q: f64,
    seed: u64,
) -> Result<Ghf> {
    let gauge = netf.gauge.clone();
    let radius = rho_power(&gauge, q)?;
    let ball = SharpBall::new(z.clone(), radius);

    // (1) ball inside the ambient domain
    let inside = match ambient {
        Domain::FullPlane => Verdict::symbolic(VerdictValue::True, "full plane"),
        Domain::Ball(b) => {
            let reach = z.sub(&b.center)?.abs().add(&ball.radius)?;
            reach.leq(&b.radius)?
        }
        Domain::Region(r) => r.ball_inside_strongly(&ball)?,
    };
    if !inside.is_true() {
        return Err(Error::Certify(format!(
            "condition (1): ball B_dρ^{q}(z) not strongly inside the domain: {inside}"
        )));
    }

    // (2) holomorphic per ε + basic
    let evidence = match netf.expr() {
        Some(e) if expr_is_analytic_in_z(e) => HolomorphyEvidence::ClosedFormAnalytic,
        Some(e) => {
            return Err(Error::Certify(format!(
                "condition (2): body `{e}` uses non-holomorphic operations on z"
            )));
        }
        None => {
            let probe = BasicFunction::new(netf.clone(), Domain::Ball(ball.clone()));
            let rec = cre_residual(&probe, z)?;
            if rec.negligible1.is_false() || rec.negligible2.is_false() {
                return Err(Error::Certify(format!(
                    "condition (2): Cauchy–Riemann residuals not negligible: {} / {}",
                    rec.negligible1, rec.negligible2
                )));
            }
            HolomorphyEvidence::NumericallyCertified(format!(
                "CRE residuals at the probe: {} / {}",
                rec.negligible1, rec.negligible2
            ))
        }
    };
    let basic = BasicFunction::new(netf.clone(), Domain::Ball(ball.clone()));
    // A value that outgrows every gauge power at the probe is a moderateness
    // failure, which is the subject of condition (3).
    let wd = match basic.well_definedness(z, seed ^ 0x9e37) {
        Ok(w) => w,
        Err(Error::NotModerate(d)) => {
            return Err(Error::Certify(format!(
                "condition (3): net not moderate at the probe: {d}"
            )));
        }
        Err(e) => return Err(e),
    };
    if wd.is_false() {
        return Err(Error::Certify(format!(
            "condition (2): net is not basic (representative dependence): {wd}"
        )));
    }

    // (3) derivative moderateness at probes
    let deriv = derivative_net(netf, &Domain::Ball(ball.clone()));
    for frac in [0.0, 0.5] {
        let c = z.add(&ball.radius.mul(&GenNumber::constant(
            Complex64::new(frac, 0.3 * frac),
            gauge.clone(),
        ))?)?;
        match deriv.eval(&c) {
            Ok(_) => {}
            Err(Error::NotModerate(d)) => {
                return Err(Error::Certify(format!(
                    "condition (3): derivative net not moderate at a probe: {d}"
                )));
            }
            Err(e) => return Err(e),
        }
    }

    match Ghf::assemble(
        netf.clone(),
        deriv,
        ambient.clone(),
        ball,
        DEFAULT_ORDER as i64,
        seed,
        evidence,
    ) {
        Err(Error::NotModerate(d)) => Err(Error::Certify(format!(
            "condition (3): net not moderate at the probe: {d}"
        ))),
        other => other,
    }
}

/// `dρ^q` as a generalized number: exact gauge power for integer `q`,
/// sampled otherwise.
pub fn rho_power(gauge: &Arc<Gauge>, q: f64) -> Result<GenNumber> {
    if q == 0.0 {
        return Ok(GenNumber::one(gauge.clone()));
    }
    if q.fract() == 0.0 && q.abs() < 1e6 {
        return GenNumber::drho(gauge.clone()).powi(q as i64);
    }
    let vals: Vec<WideComplex> = (0..gauge.len())
        .map(|k| WideComplex::from_log(q * gauge.log_rho(k), 0.0))
        .collect();
    GenNumber::from_samples(vals, gauge.clone())
}

/// The derivative as a GHF in its own right (same ball), with the remainder
/// rebuilt from the second derivative net.
pub fn derivative(f: &Ghf, q: i64, seed: u64) -> Result<Ghf> {
    let dnet = f.deriv.clone();
    let ddnet = derivative_net(&dnet, &Domain::Ball(f.ball.clone()));
    Ghf::assemble(
        dnet,
        ddnet,
        f.base.domain.clone(),
        f.ball.clone(),
        q,
        seed,
        f.evidence.clone(),
    )
}

// ---------------------------------------------------------------------------
// Taylor jets
// ---------------------------------------------------------------------------

/// Taylor jet of `f` at its certification center: coefficients
/// `f⁽ⁿ⁾/n!` for `n ≤ n_max` via one shared circle quadrature per grid
/// index (radius: half the certified ball), and moderateness bounds
/// `|coeff_n| ≤ dρ^{−nQ−R}` fitted over the log-inequalities.
pub fn taylor_jet(f: &Ghf, n_max: usize) -> Result<TaylorJet> {
    if n_max > 40 {
        return Err(Error::invalid("jet order capped at 40"));
    }
    let gauge = f.gauge().clone();
    let center = f.ball.center.clone();
    let half = f
        .ball
        .radius
        .mul(&GenNumber::constant(Complex64::new(0.5, 0.0), gauge.clone()))?;
    check_circle_inside(&f.base, &center, &half)?;
    let z0s = center.values()?;
    let rs = half.values()?;
    let orders: Vec<i64> = (0..=n_max as i64).collect();
    let per: Vec<Result<Vec<(WideComplex, f64)>>> = crate::par::map_indexed(gauge.len(), |k| {
        circle_coeffs_at(&f.base.net, k, z0s[k], rs[k].lm(), &orders, CIRCLE_NODES, CIRCLE_TOL)
    });
    let mut rows = Vec::with_capacity(gauge.len());
    for r in per {
        rows.push(r?);
    }
    let mut coeffs = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let vals: Vec<WideComplex> = rows.iter().map(|row| row[n].0).collect();
        let unc: Vec<f64> = rows.iter().map(|row| row[n].1).collect();
        coeffs.push(GenNumber::from_samples_with_uncertainty(
            vals,
            unc,
            gauge.clone(),
        )?);
    }

    // Fit (Q, R): per coefficient, the tightest order bound over the grid is
    // b_n = max_k lm|c_n|/|log ρ|, and the constraints read nQ + R ≥ b_n.
    let mut xs = Vec::new();
    let mut bs = Vec::new();
    for n in 0..=n_max {
        let mut b = f64::NEG_INFINITY;
        for (k, row) in rows.iter().enumerate() {
            let (v, unc) = row[n];
            // coefficients indistinguishable from quadrature noise carry no
            // asymptotic information and would skew the fit
            if v.is_zero() || v.lm() <= unc + 2.3 {
                continue;
            }
            b = b.max(v.lm() / -gauge.log_rho(k));
        }
        if b.is_finite() {
            xs.push(n as f64);
            bs.push(b);
        }
    }
    let (q, r) = match linear_fit(&xs, &bs) {
        Some(fit) if xs.len() >= 3 => {
            let q = fit.slope.max(0.0);
            let r = xs
                .iter()
                .zip(bs.iter())
                .map(|(n, b)| b - n * q)
                .fold(f64::NEG_INFINITY, f64::max);
            (q, r + 0.02)
        }
        _ => {
            // degenerate jets (constants, zero functions)
            let r = bs.iter().copied().fold(0.0f64, f64::max);
            (0.0, r + 0.02)
        }
    };

    // Verify every inequality |c_n| ≤ dρ^{−nQ−R} as an honest verdict.
    let mut parts: Vec<Verdict> = Vec::new();
    for (n, c) in coeffs.iter().enumerate() {
        let bound_vals: Vec<WideComplex> = (0..gauge.len())
            .map(|k| WideComplex::from_log(-(n as f64 * q + r) * gauge.log_rho(k), 0.0))
            .collect();
        let bound = GenNumber::from_samples(bound_vals, gauge.clone())?;
        parts.push(c.abs().leq(&bound)?);
    }
    let worst = parts
        .iter()
        .max_by_key(|v| match v.value {
            VerdictValue::True => 0,
            VerdictValue::Undecidable => 1,
            VerdictValue::False => 2,
        })
        .cloned()
        .unwrap_or_else(|| Verdict::symbolic(VerdictValue::True, "empty jet"));
    let bound_verdict = Verdict {
        detail: format!(
            "all {} coefficient bounds |c_n| ≤ dρ^(−{q:.3}n−{r:.3}): worst {}",
            parts.len(),
            worst.detail
        ),
        ..worst
    };
    Ok(TaylorJet {
        center,
        coeffs,
        q,
        r,
        bound_verdict,
    })
}

/// Taylor-tail remainder `r(z0,h) = Σ_{n=2}^{N} coeff_n · h^{n−1}` built
/// from a jet, for comparison against the integral form.
pub fn taylor_tail_remainder(jet: &TaylorJet) -> Result<RemainderNet> {
    let mut coeff_vals: Vec<Arc<Vec<WideComplex>>> = Vec::new();
    let mut coeff_unc: Vec<Vec<f64>> = Vec::new();
    for c in &jet.coeffs {
        coeff_vals.push(c.values()?);
        coeff_unc.push((0..c.gauge().len()).map(|k| c.sample_unc_lm(k)).collect());
    }
    Ok(RemainderNet::from_table(move |k, _z, h| {
        if h.is_zero() || coeff_vals.len() < 3 {
            return Ok((WideComplex::ZERO, f64::NEG_INFINITY));
        }
        // Horner over n = N..2 of  Σ c_n h^{n-1}, with the circle-sum
        // uncertainty of each coefficient carried along.
        let hl = h.lm();
        let mut acc = WideComplex::ZERO;
        let mut unc = f64::NEG_INFINITY;
        for n in (2..coeff_vals.len()).rev() {
            acc = acc.mul(h).add(coeff_vals[n][k]);
            unc = crate::wide::lse2(unc, coeff_unc[n][k] + (n as f64 - 1.0) * hl);
        }
        Ok((acc.mul(h), unc))
    }))
}

// ---------------------------------------------------------------------------
// algebra
// ---------------------------------------------------------------------------

fn net_binary(
    name: String,
    a: &FunctionNet,
    b: &FunctionNet,
    op: BinOp,
) -> Result<FunctionNet> {
    if let (FnBody::Expr(ea), FnBody::Expr(eb)) = (&a.body, &b.body) {
        let e = match op {
            BinOp::Add => ex::add(ea.clone(), eb.clone()),
            BinOp::Mul => ex::mul(ea.clone(), eb.clone()),
            BinOp::Div => ex::div(ea.clone(), eb.clone()),
        };
        return FunctionNet::from_expr(name, e, a.gauge.clone());
    }
    let (fa, fb) = (a.clone(), b.clone());
    Ok(FunctionNet::from_table(
        name,
        a.gauge.clone(),
        move |k, z| {
            let (va, ua) = fa.eval_at(k, z)?;
            let (vb, ub) = fb.eval_at(k, z)?;
            let v = match op {
                BinOp::Add => va.add(vb),
                BinOp::Mul => va.mul(vb),
                BinOp::Div => {
                    if vb.is_zero() {
                        return Err(Error::NotInvertible(format!(
                            "division by a vanishing net value at grid index {k}"
                        )));
                    }
                    va.div(vb)
                }
            };
            Ok((v, ua.max(ub)))
        },
    ))
}

#[derive(Clone, Copy)]
enum BinOp {
    Add,
    Mul,
    Div,
}

fn net_compose(name: String, outer: &FunctionNet, inner: &FunctionNet) -> Result<FunctionNet> {
    if let (FnBody::Expr(eo), FnBody::Expr(ei)) = (&outer.body, &inner.body) {
        return FunctionNet::from_expr(name, eo.subst_param("z", ei), outer.gauge.clone());
    }
    let (fo, fi) = (outer.clone(), inner.clone());
    Ok(FunctionNet::from_table(
        name,
        outer.gauge.clone(),
        move |k, z| {
            let (w, ui) = fi.eval_at(k, z)?;
            let (v, uo) = fo.eval_at(k, w)?;
            Ok((v, ui.max(uo)))
        },
    ))
}

fn joint_evidence(f: &Ghf, g: &Ghf) -> HolomorphyEvidence {
    match (&f.evidence, &g.evidence) {
        (HolomorphyEvidence::ClosedFormAnalytic, HolomorphyEvidence::ClosedFormAnalytic) => {
            HolomorphyEvidence::ClosedFormAnalytic
        }
        _ => HolomorphyEvidence::NumericallyCertified("combined from mixed evidence".into()),
    }
}

fn shared_ball(f: &Ghf, g: &Ghf) -> Result<SharpBall> {
    let same = f.ball.center.eq(&g.ball.center)?;
    if !same.is_true() {
        return Err(Error::invalid(
            "function algebra requires certificates at a shared center",
        ));
    }
    let radius = if f.ball.radius.leq(&g.ball.radius)?.is_true() {
        f.ball.radius.clone()
    } else {
        g.ball.radius.clone()
    };
    Ok(SharpBall::new(f.ball.center.clone(), radius))
}

/// Sum of two certified functions; derivative net is the sum of derivative
/// nets and the identity `(f+g)′ = f′ + g′` is inherited by construction.
pub fn add(f: &Ghf, g: &Ghf, q: i64, seed: u64) -> Result<Ghf> {
    let ball = shared_ball(f, g)?;
    let net = net_binary(
        format!("({})+({})", f.base.net.name, g.base.net.name),
        &f.base.net,
        &g.base.net,
        BinOp::Add,
    )?;
    let deriv = net_binary(
        format!("({})'+({})'", f.base.net.name, g.base.net.name),
        &f.deriv,
        &g.deriv,
        BinOp::Add,
    )?;
    Ghf::assemble(net, deriv, f.base.domain.clone(), ball, q, seed, joint_evidence(f, g))
}

/// Product, with the product-rule derivative net `f′g + fg′`.
pub fn mul(f: &Ghf, g: &Ghf, q: i64, seed: u64) -> Result<Ghf> {
    let ball = shared_ball(f, g)?;
    let net = net_binary(
        format!("({})*({})", f.base.net.name, g.base.net.name),
        &f.base.net,
        &g.base.net,
        BinOp::Mul,
    )?;
    let fg = net_binary("t1".into(), &f.deriv, &g.base.net, BinOp::Mul)?;
    let gf = net_binary("t2".into(), &f.base.net, &g.deriv, BinOp::Mul)?;
    let deriv = net_binary(
        format!("({})*({}) rule", f.base.net.name, g.base.net.name),
        &fg,
        &gf,
        BinOp::Add,
    )?;
    Ghf::assemble(net, deriv, f.base.domain.clone(), ball, q, seed, joint_evidence(f, g))
}

/// Quotient: requires `g` invertible at the shared center, derivative
/// `(f′g − fg′)/g²`.
pub fn div(f: &Ghf, g: &Ghf, q: i64, seed: u64) -> Result<Ghf> {
    let ball = shared_ball(f, g)?;
    let gc = g.eval(&ball.center)?;
    let inv = gc.is_invertible();
    if !inv.is_true() {
        return Err(Error::NotInvertible(format!(
            "quotient denominator at the center: {inv}"
        )));
    }
    let net = net_binary(
        format!("({})/({})", f.base.net.name, g.base.net.name),
        &f.base.net,
        &g.base.net,
        BinOp::Div,
    )?;
    let t1 = net_binary("t1".into(), &f.deriv, &g.base.net, BinOp::Mul)?;
    let t2 = net_binary("t2".into(), &f.base.net, &g.deriv, BinOp::Mul)?;
    let neg_t2 = match &t2.body {
        FnBody::Expr(e) => FunctionNet::from_expr("nt2", ex::neg(e.clone()), t2.gauge.clone())?,
        FnBody::Table(_) => {
            let inner = t2.clone();
            FunctionNet::from_table("nt2", t2.gauge.clone(), move |k, z| {
                let (v, u) = inner.eval_at(k, z)?;
                Ok((v.neg(), u))
            })
        }
    };
    let num = net_binary("qnum".into(), &t1, &neg_t2, BinOp::Add)?;
    let g2 = net_binary("g2".into(), &g.base.net, &g.base.net, BinOp::Mul)?;
    let deriv = net_binary(
        format!("({})/({}) rule", f.base.net.name, g.base.net.name),
        &num,
        &g2,
        BinOp::Div,
    )?;
    Ghf::assemble(net, deriv, f.base.domain.clone(), ball, q, seed, joint_evidence(f, g))
}

/// Composition `g ∘ f`: checks that sampled values of `f` on the ball land
/// inside `g`'s certified ball, and uses the chain-rule derivative net
/// `(g′ ∘ f) · f′`.
pub fn compose(g: &Ghf, f: &Ghf, q: i64, seed: u64) -> Result<Ghf> {
    // range containment spot-check at the center and two ball probes
    let gauge = f.gauge().clone();
    for frac in [0.0, 0.5, -0.4] {
        let p = f.ball.center.add(&f.ball.radius.mul(&GenNumber::constant(
            Complex64::new(frac, -0.2 * frac),
            gauge.clone(),
        ))?)?;
        let w = f.eval(&p)?;
        let inside = w.sub(&g.ball.center)?.abs().leq(&g.ball.radius)?;
        if inside.is_false() {
            return Err(Error::OutsideDomain(format!(
                "range of inner function leaves the outer certificate ball: {inside}"
            )));
        }
    }
    let net = net_compose(
        format!("({})∘({})", g.base.net.name, f.base.net.name),
        &g.base.net,
        &f.base.net,
    )?;
    let gprime_f = net_compose("g'∘f".into(), &g.deriv, &f.base.net)?;
    let deriv = net_binary("chain".into(), &gprime_f, &f.deriv, BinOp::Mul)?;
    Ghf::assemble(
        net,
        deriv,
        f.base.domain.clone(),
        f.ball.clone(),
        q,
        seed,
        joint_evidence(f, g),
    )
}

// ---------------------------------------------------------------------------
// Cauchy–Riemann residuals
// ---------------------------------------------------------------------------

/// Central-difference partial derivative of the net along direction `dir`
/// (1 = real axis, i = imaginary axis), Richardson-extrapolated over a
/// dyadic step ladder. Returns the extrapolated value and an uncertainty
/// log-magnitude covering both the extrapolation tail and cancellation
/// noise.
pub(crate) fn partial_at(
    f: &FunctionNet,
    k: usize,
    z: WideComplex,
    dir: Complex64,
    scale: f64,
) -> Result<(WideComplex, f64)> {
    // dyadic steps: exactly representable, so linear nets difference exactly
    let s2 = scale.log2().round().exp2();
    let mut estimates = Vec::new();
    let mut fz_lm = f64::NEG_INFINITY;
    let mut eval_unc = f64::NEG_INFINITY;
    let mut h_min = f64::INFINITY;
    for j in 0..5u32 {
        let h = s2 * (0.5f64).powi(10 + j as i32);
        h_min = h_min.min(h);
        let step = WideComplex::from_complex(dir * h);
        let (fp, up) = f.eval_at(k, z.add(step))?;
        let (fm, um) = f.eval_at(k, z.sub(step))?;
        fz_lm = fz_lm.max(fp.lm()).max(fm.lm());
        eval_unc = eval_unc.max(up).max(um);
        estimates.push(fp.sub(fm).mul(WideComplex::from_f64(0.5 / h)));
    }
    let (value, corr_lm) = romberg(&estimates);
    // noise floor: the larger of arithmetic cancellation |f|·ε_mach and any
    // per-evaluation (quadrature) uncertainty, divided by the smallest step
    let abs_floor = if fz_lm.is_finite() {
        (fz_lm + (f64::EPSILON).ln()).max(eval_unc)
    } else {
        eval_unc
    };
    let noise_lm = abs_floor - (2.0 * h_min).ln();
    Ok((value, corr_lm.max(noise_lm)))
}

/// Richardson extrapolation of an O(h²) central-difference ladder with step
/// ratio 2 (Romberg weights). Returns the diagonal value and the
/// log-magnitude of the last correction.
pub(crate) fn romberg(vals: &[WideComplex]) -> (WideComplex, f64) {
    let mut cur = vals.to_vec();
    let mut m = 1i32;
    let mut last_diag = *cur.last().expect("nonempty ladder");
    let mut corr = f64::NEG_INFINITY;
    while cur.len() > 1 {
        let p = 4f64.powi(m);
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let t = cur[j + 1]
                .mul(WideComplex::from_f64(p / (p - 1.0)))
                .sub(cur[j].mul(WideComplex::from_f64(1.0 / (p - 1.0))));
            next.push(t);
        }
        let diag = *next.last().expect("nonempty");
        let delta = diag.sub(last_diag);
        corr = if delta.is_zero() {
            corr
        } else {
            corr.max(delta.lm())
        };
        last_diag = diag;
        cur = next;
        m += 1;
    }
    (cur[0], corr)
}

/// The four ℝ̃-partial derivatives of `f = u + iv` at `z0`, the
/// Cauchy–Riemann residuals with negligibility verdicts, and `f′` from the
/// partials. Closed forms in the analytic grammar short-circuit to exact
/// zero residuals.
pub fn cre_residual(f: &BasicFunction, z0: &GenNumber) -> Result<PartialDerivativeRecord> {
    let gauge = f.gauge().clone();
    if let Some(e) = f.net.expr() {
        if expr_is_analytic_in_z(e) && z0.is_symbolic() && z0.sets().is_none() {
            // ∂₁f = f′, ∂₂f = i f′ symbolically; residuals vanish identically.
            let d = netlang::derivative(e, "z")?;
            let fp = d.subst_param("z", z0.expr().expect("symbolic"));
            let fprime = GenNumber::from_expr(fp, gauge.clone())?;
            let zero = GenNumber::zero(gauge.clone());
            let valid = Verdict::symbolic(
                VerdictValue::True,
                "analytic closed form: Cauchy–Riemann residuals vanish identically",
            );
            return Ok(PartialDerivativeRecord {
                d1u: fprime.re(),
                d2u: fprime.im().neg(),
                d1v: fprime.im(),
                d2v: fprime.re(),
                residual1: zero.clone(),
                residual2: zero,
                negligible1: valid.clone(),
                negligible2: valid,
                fprime,
            });
        }
    }

    let z0s = z0.values()?;
    let n = gauge.len();
    let per: Vec<Result<[(WideComplex, f64); 2]>> = crate::par::map_indexed(n, |k| {
        let scale = f.domain.scale_at(k);
        let dx = partial_at(&f.net, k, z0s[k], Complex64::new(1.0, 0.0), scale)?;
        let dy = partial_at(&f.net, k, z0s[k], Complex64::new(0.0, 1.0), scale)?;
        Ok([dx, dy])
    });
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    let mut u1 = Vec::with_capacity(n);
    let mut u2 = Vec::with_capacity(n);
    for r in per {
        let [dx, dy] = r?;
        d1.push(dx.0);
        u1.push(dx.1);
        d2.push(dy.0);
        u2.push(dy.1);
    }
    let d1f = GenNumber::from_samples_with_uncertainty(d1, u1, gauge.clone())?;
    let d2f = GenNumber::from_samples_with_uncertainty(d2, u2, gauge.clone())?;
    let d1u = d1f.re();
    let d1v = d1f.im();
    let d2u = d2f.re();
    let d2v = d2f.im();
    let residual1 = d1u.sub(&d2v)?;
    let residual2 = d2u.add(&d1v)?;
    let negligible1 = residual1.is_zero_at(DEFAULT_ORDER)?;
    let negligible2 = residual2.is_zero_at(DEFAULT_ORDER)?;
    let fprime = d1f.clone();
    Ok(PartialDerivativeRecord {
        d1u,
        d2u,
        d1v,
        d2v,
        residual1,
        residual2,
        negligible1,
        negligible2,
        fprime,
    })
}

// ---------------------------------------------------------------------------
// Goursat / Montel certification from real and imaginary parts
// ---------------------------------------------------------------------------

fn check_cre_symbolic(u: &NetExpr, v: &NetExpr) -> Result<Option<(NetExpr, NetExpr)>> {
    for (e, name) in [(u, "u"), (v, "v")] {
        let params = e.params();
        if params.iter().any(|p| p != "x" && p != "y") {
            return Err(Error::invalid(format!(
                "{name} must be an expression in `x`, `y`; found parameters {params:?}"
            )));
        }
    }
    let ux = netlang::derivative(u, "x")?;
    let uy = netlang::derivative(u, "y")?;
    let vx = netlang::derivative(v, "x")?;
    let vy = netlang::derivative(v, "y")?;
    let r1 = ex::sub(ux.clone(), vy);
    let r2 = ex::add(uy.clone(), vx);
    let ok1 = crate::netlang::normal::normalize(&r1).map(|nf| nf.is_zero());
    let ok2 = crate::netlang::normal::normalize(&r2).map(|nf| nf.is_zero());
    match (ok1, ok2) {
        (Ok(true), Ok(true)) => Ok(Some((ux, uy))),
        (Ok(false), _) => Err(Error::Certify(format!(
            "Cauchy–Riemann identity ∂₁u = ∂₂v fails symbolically: residual `{r1}`"
        ))),
        (_, Ok(false)) => Err(Error::Certify(format!(
            "Cauchy–Riemann identity ∂₂u = −∂₁v fails symbolically: residual `{r2}`"
        ))),
        _ => Ok(None),
    }
}

/// Goursat-style certification: `u`, `v` are closed forms in `(x, y)` whose
/// partials satisfy the Cauchy–Riemann equations identically per ε. The GHF
/// `f = u + iv` is assembled with derivative `∂₁u − i·∂₂u`.
pub fn goursat_certify(
    u: &NetExpr,
    v: &NetExpr,
    gauge: Arc<Gauge>,
    ball: SharpBall,
    q: i64,
    seed: u64,
) -> Result<Ghf> {
    let sym = check_cre_symbolic(u, v)?;
    let (ux, uy, evidence) = match sym {
        Some((ux, uy)) => (
            ux,
            uy,
            HolomorphyEvidence::ClosedFormAnalytic,
        ),
        None => {
            // the normal form could not decide; fall back to probe residuals
            let ux = netlang::derivative(u, "x")?;
            let uy = netlang::derivative(u, "y")?;
            let vx = netlang::derivative(v, "x")?;
            let vy = netlang::derivative(v, "y")?;
            let mut worst: f64 = 0.0;
            for k in [0usize, gauge.len() / 2, gauge.len() - 1] {
                for (px, py) in [(0.3, -0.2), (-0.7, 0.45), (0.11, 0.89)] {
                    let mut binds = std::collections::BTreeMap::new();
                    binds.insert("x".to_string(), WideComplex::from_f64(px));
                    binds.insert("y".to_string(), WideComplex::from_f64(py));
                    let ctx = gauge.ctx(k);
                    let ctx = ctx.with_bindings(&binds);
                    let r1 = netlang::eval(&ex::sub(ux.clone(), vy.clone()), &ctx)?;
                    let r2 = netlang::eval(&ex::add(uy.clone(), vx.clone()), &ctx)?;
                    worst = worst
                        .max(r1.to_complex_lossy().norm())
                        .max(r2.to_complex_lossy().norm());
                }
            }
            if worst > 1e-12 {
                return Err(Error::Certify(format!(
                    "Cauchy–Riemann residual {worst:.3e} at probe points"
                )));
            }
            (
                ux,
                uy,
                HolomorphyEvidence::NumericallyCertified(format!(
                    "CRE residual ≤ {worst:.1e} at probe points"
                )),
            )
        }
    };

    let net = real_pair_net("u+iv", u, v, gauge.clone());
    // f′ = ∂₁u − i ∂₂u
    let dexpr = ex::sub(ux, ex::mul(ex::imag(), uy));
    let deriv = real_pair_net_single("f'", &dexpr, gauge.clone());
    Ghf::assemble(
        net,
        deriv,
        Domain::Ball(ball.clone()),
        ball,
        q,
        seed,
        evidence,
    )
}

/// Montel-style certification: ε-wise Cauchy–Riemann plus a sharp bound
/// `|f| ≤ M` on probes of the closed ball (no continuity assumption on the
/// partials is used).
pub fn montel_certify(
    u: &NetExpr,
    v: &NetExpr,
    m_bound: &GenNumber,
    gauge: Arc<Gauge>,
    ball: SharpBall,
    q: i64,
    seed: u64,
) -> Result<Ghf> {
    check_cre_symbolic(u, v)?.ok_or_else(|| {
        Error::Certify("Cauchy–Riemann identities undecidable in the normal form".into())
    })?;
    let net = real_pair_net("u+iv", u, v, gauge.clone());
    let f = BasicFunction::new(net.clone(), Domain::Ball(ball.clone()));
    // sharp bound on the closed ball: center, interior and boundary probes
    for (frac, theta) in [
        (0.0, 0.0),
        (0.5, 1.1),
        (0.9, 2.7),
        (1.0, 0.3),
        (1.0, 4.0),
    ] {
        let c = GenNumber::constant(Complex64::from_polar(frac, theta), gauge.clone());
        let p = ball.center.add(&ball.radius.mul(&c)?)?;
        let b = f.eval(&p)?.abs().leq(m_bound)?;
        if !b.is_true() {
            return Err(Error::Certify(format!(
                "sharp bound |f| ≤ M violated at a ball probe: {b}"
            )));
        }
    }
    let ux = netlang::derivative(u, "x")?;
    let uy = netlang::derivative(u, "y")?;
    let dexpr = ex::sub(ux, ex::mul(ex::imag(), uy));
    let deriv = real_pair_net_single("f'", &dexpr, gauge.clone());
    Ghf::assemble(
        net,
        deriv,
        Domain::Ball(ball.clone()),
        ball,
        q,
        seed,
        HolomorphyEvidence::NumericallyCertified(
            "ε-wise Cauchy–Riemann + sharp bound on the closed ball".into(),
        ),
    )
}

/// Function net `z ↦ u(x,y) + i·v(x,y)` from two real closed forms.
fn real_pair_net(name: &str, u: &NetExpr, v: &NetExpr, gauge: Arc<Gauge>) -> FunctionNet {
    let combined = ex::add(u.clone(), ex::mul(ex::imag(), v.clone()));
    real_pair_net_single(name, &combined, gauge)
}

/// Function net from a single closed form in `(x, y)`, evaluated with
/// `x = Re z`, `y = Im z`.
fn real_pair_net_single(name: &str, body: &NetExpr, gauge: Arc<Gauge>) -> FunctionNet {
    let e = body.clone();
    let g = gauge.clone();
    FunctionNet::from_table(name.to_string(), gauge, move |k, z| {
        let zc = z.to_complex_lossy();
        if !zc.re.is_finite() || !zc.im.is_finite() {
            return Err(Error::invalid(
                "real/imaginary-part nets require representable probe values",
            ));
        }
        let mut binds = std::collections::BTreeMap::new();
        binds.insert("x".to_string(), WideComplex::from_f64(zc.re));
        binds.insert("y".to_string(), WideComplex::from_f64(zc.im));
        let ctx = g.ctx(k);
        let v = netlang::eval(&e, &ctx.with_bindings(&binds))?;
        Ok((v, f64::NEG_INFINITY))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlang::parse;

    fn g() -> Arc<Gauge> {
        Gauge::standard()
    }

    fn num(src: &str) -> GenNumber {
        GenNumber::parse(src, g()).unwrap()
    }

    fn certify(src: &str, at: &str, q: f64) -> Ghf {
        let net = FunctionNet::parse(src, src, g()).unwrap();
        certify_eps_diff(&net, &Domain::FullPlane, &num(at), q, 42).unwrap()
    }

    #[test]
    fn cauchy_second_derivative_of_square_is_two() {
        let f = BasicFunction::on_full_plane(FunctionNet::parse("sq", "z^2", g()).unwrap());
        let d2 = cauchy_derivative(&f, &num("0"), 2, &num("(1/4)"), 64).unwrap();
        let v = d2.eq_at(&num("2"), 10.0).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn cauchy_zeroth_derivative_recovers_value() {
        let f = BasicFunction::on_full_plane(
            FunctionNet::parse("poly", "z^3 - 2*z + 1", g()).unwrap(),
        );
        let at = num("(1/2) + (1/4)*i");
        let v0 = cauchy_derivative(&f, &at, 0, &num("(1/4)"), 64).unwrap();
        let direct = f.eval(&at).unwrap();
        assert!(v0.eq_at(&direct, 10.0).unwrap().is_true());
    }

    #[test]
    fn cauchy_matches_closed_form_derivative_on_rationals() {
        let f = BasicFunction::on_full_plane(
            FunctionNet::parse("rat", "1/(1+z)", g()).unwrap(),
        );
        let d = cauchy_derivative(&f, &num("0"), 1, &num("(1/4)"), CIRCLE_NODES).unwrap();
        // closed form: -1/(1+z)^2 at 0 → -1
        let v = d.eq_at(&num("-1"), 10.0).unwrap();
        assert!(v.is_true(), "{v}");
        // per-ε relative error below 1e-9
        let vals = d.values().unwrap();
        for v in vals.iter() {
            let c = v.to_complex_lossy();
            assert!((c + Complex64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn certify_polynomial_and_differentiate() {
        let f = certify("z^2", "0", 0.0);
        assert_eq!(f.evidence, HolomorphyEvidence::ClosedFormAnalytic);
        assert!(f.witness.little_oh.is_true(), "{}", f.witness.little_oh);
        assert!(f
            .derivative_at_center()
            .eq(&num("0"))
            .unwrap()
            .is_true());
        let fp = derivative(&f, 6, 1).unwrap();
        assert!(fp.eval(&num("3")).unwrap().eq(&num("6")).unwrap().is_true());
    }

    #[test]
    fn certify_at_nonstandard_probe() {
        // 1/z is fine on a ball of radius dρ^2 around dρ.
        let net = FunctionNet::parse("inv", "1/z", g()).unwrap();
        let f = certify_eps_diff(&net, &Domain::FullPlane, &num("rho"), 2.0, 7).unwrap();
        let d = f.derivative_at_center();
        let v = d.eq_at(&num("-(rho^-2)"), 10.0).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn non_moderate_derivative_fails_condition_3() {
        let net = FunctionNet::parse("wild", "exp(z/rho^2)", g()).unwrap();
        match certify_eps_diff(&net, &Domain::FullPlane, &num("1"), 0.0, 7) {
            Err(Error::Certify(msg)) => assert!(msg.contains("condition (3)"), "{msg}"),
            other => panic!("expected condition (3) failure, got {other:?}"),
        }
    }

    #[test]
    fn conjugate_fails_condition_2() {
        let net = FunctionNet::parse("cj", "conj(z)", g()).unwrap();
        match certify_eps_diff(&net, &Domain::FullPlane, &num("0"), 0.0, 7) {
            Err(Error::Certify(msg)) => assert!(msg.contains("condition (2)"), "{msg}"),
            other => panic!("expected condition (2) failure, got {other:?}"),
        }
    }

    #[test]
    fn jet_of_cubic_is_unit_coefficient() {
        let f = certify("z^3", "0", 0.0);
        let jet = taylor_jet(&f, 6).unwrap();
        assert!(jet.bound_verdict.is_true(), "{}", jet.bound_verdict);
        for (n, c) in jet.coeffs.iter().enumerate() {
            let expect = if n == 3 { "1" } else { "0" };
            let v = c.eq_at(&num(expect), 8.0).unwrap();
            assert!(v.is_true(), "coeff {n}: {v}");
        }
    }

    #[test]
    fn chain_rule_on_composition() {
        let inner = certify("z + 1", "0", 0.0);
        let outer = certify("z^2", "1", 0.0);
        let c = compose(&outer, &inner, 6, 5).unwrap();
        // value at 0 is 1, derivative is 2·(z+1)·1 = 2
        assert!(c.eval(&num("0")).unwrap().eq(&num("1")).unwrap().is_true());
        let expect = num("2");
        let v = c.derivative_at_center().eq_at(&expect, 10.0).unwrap();
        assert!(v.is_true(), "{v}");
        // chain-rule identity against the independent quadrature derivative
        let quad = cauchy_derivative(&c.base, &num("0"), 1, &num("(1/4)"), 128).unwrap();
        assert!(quad.eq_at(&expect, 10.0).unwrap().is_true());
    }

    #[test]
    fn product_rule_identity() {
        let f = certify("z^2 + 1", "(1/2)", 0.0);
        let h = certify("z - 2", "(1/2)", 0.0);
        let p = mul(&f, &h, 6, 5).unwrap();
        // (f·g)′ = 2z(z−2) + (z²+1) at 1/2 = (1)(−3/2) + 5/4 = −1/4
        let v = p.derivative_at_center().eq_at(&num("-(1/4)"), 10.0).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn quotient_requires_invertible_denominator() {
        let f = certify("1", "0", 0.0);
        let h = certify("z", "0", 0.0);
        match div(&f, &h, 6, 5) {
            Err(Error::NotInvertible(_)) => {}
            other => panic!("expected invertibility failure, got {other:?}"),
        }
        let h2 = certify("z + 1", "0", 0.0);
        let q = div(&f, &h2, 6, 5).unwrap();
        let v = q.derivative_at_center().eq_at(&num("-1"), 10.0).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn cre_residuals_vanish_symbolically_for_analytic_expr() {
        let f = BasicFunction::on_full_plane(FunctionNet::parse("sq", "z^2", g()).unwrap());
        let rec = cre_residual(&f, &num("1 + i")).unwrap();
        assert!(rec.negligible1.is_true());
        assert!(rec.negligible2.is_true());
        assert!(rec.fprime.eq(&num("2*(1+i)")).unwrap().is_true());
    }

    #[test]
    fn cre_residual_of_conjugate_is_two() {
        let f = BasicFunction::on_full_plane(FunctionNet::parse("cj", "conj(z)", g()).unwrap());
        let rec = cre_residual(&f, &num("1")).unwrap();
        assert!(rec.negligible1.is_false(), "{}", rec.negligible1);
        let r1 = rec.residual1.classify().unwrap();
        let ns = r1.near_standard.expect("residual is near-standard");
        assert!((ns - Complex64::new(2.0, 0.0)).norm() < 1e-10, "{ns}");
    }

    #[test]
    fn goursat_recovers_square_from_parts() {
        // u = x² − y², v = 2xy
        let u = parse("x^2 - y^2").unwrap();
        let v = parse("2*x*y").unwrap();
        let ball = SharpBall::new(num("1"), num("(1/4)"));
        let f = goursat_certify(&u, &v, g(), ball, 6, 3).unwrap();
        assert_eq!(f.evidence, HolomorphyEvidence::ClosedFormAnalytic);
        let val = f.eval(&num("1 + (1/8)*i")).unwrap();
        let expect = num("(1 + (1/8)*i)^2");
        assert!(val.eq_at(&expect, 10.0).unwrap().is_true());
        // f′ = 2z at the center
        let v = f.derivative_at_center().eq_at(&num("2"), 10.0).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn goursat_rejects_non_cre_pair() {
        let u = parse("x").unwrap();
        let v = parse("y").unwrap(); // f = x + iy is fine; break it:
        let w = parse("0 - y").unwrap(); // f = x − iy = conj(z)
        let ball = SharpBall::new(num("0"), num("(1/4)"));
        assert!(goursat_certify(&u, &v, g(), ball.clone(), 4, 3).is_ok());
        match goursat_certify(&u, &w, g(), ball, 4, 3) {
            Err(Error::Certify(msg)) => assert!(msg.contains("Cauchy–Riemann"), "{msg}"),
            other => panic!("expected CRE failure, got {other:?}"),
        }
    }

    #[test]
    fn montel_certifies_bounded_cre_pair() {
        let u = parse("x^2 - y^2").unwrap();
        let v = parse("2*x*y").unwrap();
        let ball = SharpBall::new(num("0"), num("1"));
        let bound = num("5");
        let f = montel_certify(&u, &v, &bound, g(), ball, 5, 3).unwrap();
        assert!(matches!(f.evidence, HolomorphyEvidence::NumericallyCertified(_)));
        // infinite bounds are allowed too
        let u2 = parse("(x^2 - y^2)/rho").unwrap();
        let v2 = parse("2*x*y/rho").unwrap();
        let ball2 = SharpBall::new(num("0"), num("1"));
        let big = num("5/rho");
        assert!(montel_certify(&u2, &v2, &big, g(), ball2, 5, 3).is_ok());
    }

    #[test]
    fn integral_remainder_matches_taylor_tail() {
        let f = certify("exp(z)", "0", 0.0);
        let jet = taylor_jet(&f, 12).unwrap();
        let tail = taylor_tail_remainder(&jet).unwrap();
        let int_form = &f.witness.remainder;
        let gauge = g();
        for depth in [1i64, 2, 3] {
            let h = GenNumber::drho(gauge.clone()).powi(depth).unwrap();
            let a = int_form.eval(&gauge, &num("0"), &h).unwrap();
            let b = tail.eval(&gauge, &num("0"), &h).unwrap();
            let v = a.eq_at(&b, 8.0).unwrap();
            assert!(v.is_true(), "depth {depth}: {v}");
        }
    }
}
