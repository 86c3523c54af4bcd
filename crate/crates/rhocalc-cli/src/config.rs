//! Experiment configurations: the JSON model, reference validation, and the
//! execution engine that turns a task list into a report bundle.
//!
//! A configuration declares a gauge, named objects (numbers, function nets,
//! distributions, mollifiers), and an ordered task list. Tasks may `bind`
//! their value result under a new name for later tasks, so references are
//! acyclic by construction: a task may only mention declared objects or
//! bindings made by *earlier* tasks. Every task yields a primary verdict;
//! tasks carrying `"assert": true` (or `false`) fail the run when the verdict
//! does not match.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use rhocalc::basicfn::{join_verdicts, BasicFunction, Domain, FunctionNet};
use rhocalc::embed::{
    self, iota_embed, iota_ghf, jmath_embed, mollifier_uniqueness_check, standard_part,
    CompactDistribution, LocIntFunction, Mollifier,
};
use rhocalc::holo::{cauchy_derivative, certify_eps_diff, cre_residual, rho_power, taylor_jet};
use rhocalc::netlang;
use rhocalc::report::{trace_number, Report, TraceRow};
use rhocalc::{EpsGrid, Error, Gauge, GenNumber, Verdict, VerdictValue};

// ---------------------------------------------------------------------------
// JSON model
// ---------------------------------------------------------------------------

fn default_order() -> f64 {
    rhocalc::scalars::DEFAULT_ORDER
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub gauge: GaugeDecl,
    #[serde(default)]
    pub seed: u64,
    /// Default decision order for verdict tasks that do not name one.
    #[serde(default = "default_order")]
    pub order: f64,
    #[serde(default)]
    pub objects: Objects,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct GaugeDecl {
    #[serde(default = "GaugeDecl::default_name")]
    pub name: String,
    /// Defining expression in `eps`, e.g. `"eps"` or `"exp(-1/eps)"`.
    #[serde(default = "GaugeDecl::default_expr")]
    pub expr: String,
    #[serde(default)]
    pub grid: GridDecl,
}

impl GaugeDecl {
    fn default_name() -> String {
        "rho".into()
    }
    fn default_expr() -> String {
        "eps".into()
    }

    pub fn build(&self) -> Result<Arc<Gauge>, Error> {
        let grid = EpsGrid {
            eps0: self.grid.eps0,
            ratio: self.grid.ratio,
            count: self.grid.count,
        };
        Ok(Arc::new(Gauge::parse_new(&*self.name, &self.expr, grid)?))
    }
}

impl Default for GaugeDecl {
    fn default() -> Self {
        GaugeDecl {
            name: Self::default_name(),
            expr: Self::default_expr(),
            grid: GridDecl::default(),
        }
    }
}

#[derive(Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct GridDecl {
    pub eps0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for GridDecl {
    fn default() -> Self {
        let g = EpsGrid::default();
        GridDecl {
            eps0: g.eps0,
            ratio: g.ratio,
            count: g.count,
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Objects {
    /// Net expressions in `eps`/`rho`, e.g. `"rho^2 + i*eps"`.
    #[serde(default)]
    pub numbers: BTreeMap<String, String>,
    /// Function-net expressions in `z` (and `eps`/`rho`).
    #[serde(default)]
    pub functions: BTreeMap<String, String>,
    /// Inline distribution declarations:
    /// `{"terms": [{"alpha": [a,b], "point": [x,y], "coeff": [re,im]}
    ///             | {"alpha": [a,b], "g": "<expr in x,y>", "support": r}]}`.
    #[serde(default)]
    pub distributions: BTreeMap<String, serde_json::Value>,
    /// Aliases into the mollifier registry (`gauss`, `radialgauss`, `fejer`,
    /// `bumpfourier`).
    #[serde(default)]
    pub mollifiers: BTreeMap<String, String>,
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "Outputs::default_report")]
    pub report: String,
    #[serde(default = "Outputs::default_traces")]
    pub traces: String,
}

impl Outputs {
    fn default_report() -> String {
        "report.json".into()
    }
    fn default_traces() -> String {
        "traces".into()
    }
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            report: Self::default_report(),
            traces: Self::default_traces(),
        }
    }
}

#[derive(Deserialize)]
pub struct Task {
    pub name: String,
    /// Fail the run (exit 1) unless the primary verdict matches: `true`
    /// demands True, `false` demands False. Absent: informational.
    #[serde(default)]
    pub assert: Option<bool>,
    /// Bind the task's value result as a named number for later tasks.
    #[serde(default)]
    pub bind: Option<String>,
    /// Per-task seed override (default: derived from the config seed and the
    /// task position).
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub op: TaskOp,
}

#[derive(Deserialize, Clone, Copy, Default)]
#[serde(deny_unknown_fields)]
pub struct ClassExpect {
    #[serde(default)]
    pub infinitesimal: Option<bool>,
    #[serde(default)]
    pub finite: Option<bool>,
    #[serde(default)]
    pub infinite: Option<bool>,
}

fn default_limit_tol() -> f64 {
    1e-9
}
fn default_nodes() -> usize {
    256
}
fn default_rtol() -> f64 {
    1e-9
}
fn default_jet_n() -> usize {
    12
}
fn default_ball_exponent() -> i64 {
    1
}
fn default_uniq_q() -> f64 {
    1.0
}
fn default_uniq_n() -> usize {
    8
}
fn default_omega() -> f64 {
    3.0
}
fn default_jmath_tol() -> f64 {
    1e-6
}

#[derive(Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TaskOp {
    /// Classify a number; `expect` turns chosen flags into the verdict.
    Classify {
        number: String,
        #[serde(default)]
        expect: Option<ClassExpect>,
    },
    /// Equality at a decision order.
    Eq {
        lhs: String,
        rhs: String,
        #[serde(default)]
        order: Option<f64>,
    },
    /// Order relation at a decision order.
    Leq {
        lhs: String,
        rhs: String,
        #[serde(default)]
        order: Option<f64>,
    },
    Invertible {
        number: String,
    },
    /// Standard part: exists, and optionally equals `value` within `tol`.
    Limit {
        number: String,
        #[serde(default)]
        value: Option<[f64; 2]>,
        #[serde(default = "default_limit_tol")]
        tol: f64,
    },
    /// Certify differentiability of a function net at a point on the ball
    /// of radius `dρ^ball_exponent`; the derivative value can be bound.
    Diff {
        function: String,
        at: String,
        #[serde(default)]
        ball_exponent: f64,
    },
    /// Circle-quadrature derivative, optionally compared against a closed
    /// form with a per-point relative tolerance and an equality order.
    CauchyDerivative {
        function: String,
        at: String,
        #[serde(default = "default_nodes")]
        nodes: usize,
        #[serde(default)]
        radius_exponent: f64,
        #[serde(default)]
        closed_form: Option<String>,
        #[serde(default = "default_rtol")]
        rtol: f64,
        #[serde(default)]
        order: Option<f64>,
    },
    /// Cauchy–Riemann residuals at a probe; `value` checks the first
    /// residual against a complex constant instead of negligibility.
    CreResidual {
        function: String,
        at: String,
        #[serde(default)]
        value: Option<[f64; 2]>,
        #[serde(default = "default_limit_tol")]
        tol: f64,
    },
    /// Evaluate a mollifier embedding at a point; optional equality check.
    EmbedEval {
        distribution: String,
        mollifier: String,
        at: String,
        #[serde(default)]
        expect: Option<String>,
        #[serde(default)]
        order: Option<f64>,
    },
    /// Run the embedding and report moderateness + holomorphy records.
    EmbedCheck {
        distribution: String,
        mollifier: String,
    },
    /// The delta value identity: ι(δ)(0) = μ(0)·dρ⁻², exactly.
    DeltaValue {
        mollifier: String,
    },
    /// ι(δ) vanishes at real probes away from the origin.
    DeltaVanishes {
        mollifier: String,
        probes: Vec<f64>,
        #[serde(default)]
        order: Option<f64>,
    },
    /// Planar delta vs. scaled one-dimensional delta on real probes.
    DeltaLink {
        mollifier: String,
        probes: Vec<f64>,
        #[serde(default)]
        order: Option<f64>,
    },
    /// ι(∂^α T) = ∂^α ι(T) at probes.
    DerivativePreservation {
        distribution: String,
        mollifier: String,
        alpha: [u8; 2],
        #[serde(default)]
        probes: Vec<String>,
        #[serde(default)]
        order: Option<f64>,
    },
    /// Taylor jet of the certified embedding with fitted growth exponents.
    Jet {
        distribution: String,
        mollifier: String,
        #[serde(default = "default_jet_n")]
        n_max: usize,
        #[serde(default)]
        q_range: Option<[f64; 2]>,
        #[serde(default = "default_ball_exponent")]
        ball_exponent: i64,
    },
    /// Strong gauge-equivalence of two mollifier embeddings of the delta.
    Uniqueness {
        mollifier1: String,
        mollifier2: String,
        #[serde(default = "default_uniq_q")]
        q: f64,
        #[serde(default)]
        r: f64,
        #[serde(default = "default_uniq_n")]
        n_max: usize,
    },
    /// Embed a locally integrable function (after the distributional
    /// Cauchy–Riemann pre-test) and compare standard parts at probes.
    JmathEval {
        function: String,
        #[serde(default = "default_omega")]
        omega_radius: f64,
        #[serde(default)]
        probes: Vec<String>,
        #[serde(default = "default_jmath_tol")]
        tol: f64,
        /// The pre-test is expected to refuse the function.
        #[serde(default)]
        expect_reject: bool,
    },
    /// Append per-ε CSV trace rows for a number.
    Trace {
        number: String,
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        quantity: Option<String>,
    },
    Note {
        text: String,
    },
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

/// Names accepted as distributions without a declaration.
const BUILTIN_DISTRIBUTIONS: [&str; 4] = ["delta", "delta_dx", "delta_dy", "bump"];

fn builtin_distribution(name: &str) -> Option<CompactDistribution> {
    match name {
        "delta" => Some(CompactDistribution::delta()),
        "delta_dx" => Some(CompactDistribution::delta_deriv((1, 0))),
        "delta_dy" => Some(CompactDistribution::delta_deriv((0, 1))),
        "bump" => CompactDistribution::density(
            "bump",
            "exp(1 - 1/(1 - (x^2 + y^2)/4))",
            2.0,
        )
        .ok(),
        _ => None,
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

impl ConfigFile {
    pub fn from_json(src: &str) -> Result<ConfigFile, Error> {
        let cfg: ConfigFile = serde_json::from_str(src)
            .map_err(|e| config_err(format!("config JSON: {e}")))?;
        cfg.check_references()?;
        Ok(cfg)
    }

    /// Static reference check: every name a task mentions must be a declared
    /// object, a binding made by an earlier task, or a standalone expression
    /// that parses. Guarantees the task graph is acyclic.
    fn check_references(&self) -> Result<(), Error> {
        let mut numbers: BTreeSet<&str> =
            self.objects.numbers.keys().map(|s| s.as_str()).collect();
        let mut names_seen: BTreeSet<&str> = BTreeSet::new();

        let check_expr = |what: &str, src: &str, task: &str, known: &BTreeSet<&str>| {
            if known.contains(src) {
                return Ok(());
            }
            netlang::parse(src).map(|_| ()).map_err(|e| {
                config_err(format!(
                    "task `{task}`: {what} `{src}` is neither a known name nor a \
                     well-formed expression ({e})"
                ))
            })
        };
        let check_fn = |src: &str, task: &str| {
            if self.objects.functions.contains_key(src) {
                return Ok(());
            }
            netlang::parse(src).map(|_| ()).map_err(|e| {
                config_err(format!(
                    "task `{task}`: function `{src}` is neither a declared function \
                     nor a well-formed expression ({e})"
                ))
            })
        };
        let check_dist = |name: &str, task: &str| {
            if self.objects.distributions.contains_key(name)
                || BUILTIN_DISTRIBUTIONS.contains(&name)
            {
                Ok(())
            } else {
                Err(config_err(format!(
                    "task `{task}`: unknown distribution `{name}` (declare it or use \
                     one of {BUILTIN_DISTRIBUTIONS:?})"
                )))
            }
        };
        let check_mu = |name: &str, task: &str| {
            let target = self
                .objects
                .mollifiers
                .get(name)
                .map(|s| s.as_str())
                .unwrap_or(name);
            embed::mollifier(target).map(|_| ()).map_err(|_| {
                config_err(format!(
                    "task `{task}`: unknown mollifier `{name}` (registry: {:?})",
                    embed::mollifier_names()
                ))
            })
        };

        for t in &self.tasks {
            if t.name.is_empty() {
                return Err(config_err("every task needs a non-empty name"));
            }
            if !names_seen.insert(&t.name) {
                return Err(config_err(format!("duplicate task name `{}`", t.name)));
            }
            let task = t.name.as_str();
            match &t.op {
                TaskOp::Classify { number, .. }
                | TaskOp::Invertible { number }
                | TaskOp::Limit { number, .. }
                | TaskOp::Trace { number, .. } => {
                    check_expr("number", number, task, &numbers)?;
                }
                TaskOp::Eq { lhs, rhs, .. } | TaskOp::Leq { lhs, rhs, .. } => {
                    check_expr("left operand", lhs, task, &numbers)?;
                    check_expr("right operand", rhs, task, &numbers)?;
                }
                TaskOp::Diff { function, at, .. } => {
                    check_fn(function, task)?;
                    check_expr("probe", at, task, &numbers)?;
                }
                TaskOp::CauchyDerivative {
                    function,
                    at,
                    closed_form,
                    ..
                } => {
                    check_fn(function, task)?;
                    check_expr("probe", at, task, &numbers)?;
                    if let Some(cf) = closed_form {
                        check_fn(cf, task)?;
                    }
                }
                TaskOp::CreResidual { function, at, .. } => {
                    check_fn(function, task)?;
                    check_expr("probe", at, task, &numbers)?;
                }
                TaskOp::EmbedEval {
                    distribution,
                    mollifier,
                    at,
                    expect,
                    ..
                } => {
                    check_dist(distribution, task)?;
                    check_mu(mollifier, task)?;
                    check_expr("probe", at, task, &numbers)?;
                    if let Some(e) = expect {
                        check_expr("expected value", e, task, &numbers)?;
                    }
                }
                TaskOp::EmbedCheck {
                    distribution,
                    mollifier,
                } => {
                    check_dist(distribution, task)?;
                    check_mu(mollifier, task)?;
                }
                TaskOp::DeltaValue { mollifier }
                | TaskOp::DeltaVanishes { mollifier, .. }
                | TaskOp::DeltaLink { mollifier, .. } => check_mu(mollifier, task)?,
                TaskOp::DerivativePreservation {
                    distribution,
                    mollifier,
                    probes,
                    ..
                } => {
                    check_dist(distribution, task)?;
                    check_mu(mollifier, task)?;
                    for p in probes {
                        check_expr("probe", p, task, &numbers)?;
                    }
                }
                TaskOp::Jet {
                    distribution,
                    mollifier,
                    ..
                } => {
                    check_dist(distribution, task)?;
                    check_mu(mollifier, task)?;
                }
                TaskOp::Uniqueness {
                    mollifier1,
                    mollifier2,
                    ..
                } => {
                    check_mu(mollifier1, task)?;
                    check_mu(mollifier2, task)?;
                }
                TaskOp::JmathEval {
                    function, probes, ..
                } => {
                    check_fn(function, task)?;
                    for p in probes {
                        check_expr("probe", p, task, &numbers)?;
                    }
                }
                TaskOp::Note { .. } => {}
            }
            if let Some(b) = &t.bind {
                let has_value = matches!(
                    t.op,
                    TaskOp::EmbedEval { .. }
                        | TaskOp::CauchyDerivative { .. }
                        | TaskOp::Diff { .. }
                );
                if !has_value {
                    return Err(config_err(format!(
                        "task `{task}`: `bind` requires a value-producing op \
                         (embed_eval, cauchy_derivative, diff)"
                    )));
                }
                if !numbers.insert(b.as_str()) {
                    return Err(config_err(format!(
                        "task `{task}`: bind `{b}` shadows an existing number"
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// execution
// ---------------------------------------------------------------------------

pub struct AssertResult {
    pub name: String,
    pub passed: bool,
    pub line: String,
}

pub struct RunOutcome {
    pub report: Report,
    pub traces: Vec<TraceRow>,
    /// Name and verdict line of the first asserted task that failed.
    pub first_failure: Option<(String, String)>,
    pub assert_results: Vec<AssertResult>,
    pub total_tasks: usize,
}

impl RunOutcome {
    pub fn failed_asserts(&self) -> usize {
        self.assert_results.iter().filter(|r| !r.passed).count()
    }
}

pub struct Engine {
    pub gauge: Arc<Gauge>,
    pub seed: u64,
    default_order: f64,
    numbers: BTreeMap<String, GenNumber>,
    functions: BTreeMap<String, String>,
    distributions: BTreeMap<String, CompactDistribution>,
    mollifiers: BTreeMap<String, String>,
}

/// Negate a verdict: swaps True and False, keeps Undecidable.
fn negated(v: &Verdict) -> Verdict {
    let value = match v.value {
        VerdictValue::True => VerdictValue::False,
        VerdictValue::False => VerdictValue::True,
        VerdictValue::Undecidable => VerdictValue::Undecidable,
    };
    Verdict {
        value,
        ..v.clone()
    }
}

fn plain_verdict(value: VerdictValue, detail: impl Into<String>) -> Verdict {
    Verdict {
        value,
        decided_at_order: None,
        method: rhocalc::scalars::Method::Sampled,
        detail: detail.into(),
    }
}

impl Engine {
    pub fn new(cfg: &ConfigFile) -> Result<Engine, Error> {
        let gauge = cfg.gauge.build()?;
        let mut numbers = BTreeMap::new();
        for (name, src) in &cfg.objects.numbers {
            let x = GenNumber::parse(src, gauge.clone())
                .map_err(|e| config_err(format!("number `{name}`: {e}")))?;
            numbers.insert(name.clone(), x);
        }
        for (name, src) in &cfg.objects.functions {
            FunctionNet::parse(name.clone(), src, gauge.clone())
                .map_err(|e| config_err(format!("function `{name}`: {e}")))?;
        }
        let mut distributions = BTreeMap::new();
        for (name, decl) in &cfg.objects.distributions {
            let t = CompactDistribution::from_json(&decl.to_string())
                .map_err(|e| config_err(format!("distribution `{name}`: {e}")))?;
            distributions.insert(name.clone(), t);
        }
        for (name, target) in &cfg.objects.mollifiers {
            embed::mollifier(target)
                .map_err(|e| config_err(format!("mollifier `{name}`: {e}")))?;
        }
        Ok(Engine {
            gauge,
            seed: cfg.seed,
            default_order: cfg.order,
            numbers,
            functions: cfg.objects.functions.clone(),
            distributions,
            mollifiers: cfg.objects.mollifiers.clone(),
        })
    }

    fn number(&self, src: &str) -> Result<GenNumber, Error> {
        if let Some(x) = self.numbers.get(src) {
            return Ok(x.clone());
        }
        GenNumber::parse(src, self.gauge.clone())
    }

    fn function(&self, src: &str) -> Result<FunctionNet, Error> {
        if let Some(decl) = self.functions.get(src) {
            return FunctionNet::parse(src.to_string(), decl, self.gauge.clone());
        }
        FunctionNet::parse("f".to_string(), src, self.gauge.clone())
    }

    fn distribution(&self, name: &str) -> Result<CompactDistribution, Error> {
        if let Some(t) = self.distributions.get(name) {
            return Ok(t.clone());
        }
        builtin_distribution(name)
            .ok_or_else(|| config_err(format!("unknown distribution `{name}`")))
    }

    fn mollifier(&self, name: &str) -> Result<Arc<Mollifier>, Error> {
        let target = self
            .mollifiers
            .get(name)
            .map(|s| s.as_str())
            .unwrap_or(name);
        embed::mollifier(target)
    }

    /// Execute the whole task list. Task errors inside asserted tasks count
    /// as assertion failures; elsewhere they are recorded and skipped.
    pub fn run(&mut self, cfg: &ConfigFile) -> Result<RunOutcome, Error> {
        let mut report = Report::new(&self.gauge).with_seed(self.seed);
        let mut traces: Vec<TraceRow> = Vec::new();
        let mut first_failure: Option<(String, String)> = None;
        let mut assert_results: Vec<AssertResult> = Vec::new();

        for (idx, task) in cfg.tasks.iter().enumerate() {
            let seed = task
                .seed
                .unwrap_or_else(|| self.seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let outcome = self.run_task(task, seed, &mut report, &mut traces);
            let verdict_line = match outcome {
                Ok(Some(v)) => {
                    if let Some(b) = &task.bind {
                        if let Some(x) = self.numbers.get(b) {
                            let _ = report.push_number(format!("{} -> {b}", task.name), x);
                        }
                    }
                    report.push_verdict(&task.name, v.clone());
                    Some(v)
                }
                Ok(None) => None,
                Err(e) => {
                    let v = plain_verdict(VerdictValue::Undecidable, format!("error: {e}"));
                    report.push_verdict(&task.name, v.clone());
                    Some(v)
                }
            };
            if let Some(want) = task.assert {
                let got = verdict_line
                    .as_ref()
                    .map(|v| v.value)
                    .unwrap_or(VerdictValue::Undecidable);
                let pass = match want {
                    true => got == VerdictValue::True,
                    false => got == VerdictValue::False,
                };
                let line = verdict_line
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "no verdict produced".into());
                if !pass && first_failure.is_none() {
                    first_failure = Some((task.name.clone(), line.clone()));
                }
                assert_results.push(AssertResult {
                    name: task.name.clone(),
                    passed: pass,
                    line,
                });
            }
        }
        Ok(RunOutcome {
            report,
            traces,
            first_failure,
            assert_results,
            total_tasks: cfg.tasks.len(),
        })
    }

    fn order_of(&self, o: &Option<f64>) -> f64 {
        o.unwrap_or(self.default_order)
    }

    fn run_task(
        &mut self,
        task: &Task,
        seed: u64,
        report: &mut Report,
        traces: &mut Vec<TraceRow>,
    ) -> Result<Option<Verdict>, Error> {
        let name = task.name.as_str();
        match &task.op {
            TaskOp::Classify { number, expect } => {
                let x = self.number(number)?;
                report.push_number(format!("{name}: value"), &x)?;
                let c = x.classify()?;
                let mut parts: Vec<(String, Verdict)> = Vec::new();
                if let Some(e) = expect {
                    for (label, want, v) in [
                        ("infinitesimal", e.infinitesimal, &c.infinitesimal),
                        ("finite", e.finite, &c.finite),
                        ("infinite", e.infinite, &c.infinite),
                    ] {
                        if let Some(w) = want {
                            let vv = if w { v.clone() } else { negated(v) };
                            parts.push((format!("{label} = {w}"), vv));
                        }
                    }
                } else {
                    parts.push((
                        "classified".into(),
                        plain_verdict(
                            VerdictValue::True,
                            format!(
                                "infinitesimal {}, finite {}, infinite {}, order {}",
                                c.infinitesimal.value,
                                c.finite.value,
                                c.infinite.value,
                                c.order.detail
                            ),
                        ),
                    ));
                }
                let refs: Vec<(&str, &Verdict)> =
                    parts.iter().map(|(s, v)| (s.as_str(), v)).collect();
                Ok(Some(join_verdicts(&refs)))
            }
            TaskOp::Eq { lhs, rhs, order } => {
                let a = self.number(lhs)?;
                let b = self.number(rhs)?;
                Ok(Some(a.eq_at(&b, self.order_of(order))?))
            }
            TaskOp::Leq { lhs, rhs, order } => {
                let a = self.number(lhs)?;
                let b = self.number(rhs)?;
                Ok(Some(a.leq_at(&b, self.order_of(order))?))
            }
            TaskOp::Invertible { number } => {
                let x = self.number(number)?;
                Ok(Some(x.is_invertible()))
            }
            TaskOp::Limit { number, value, tol } => {
                let x = self.number(number)?;
                report.push_number(format!("{name}: value"), &x)?;
                let st = standard_part(&x)?;
                let v = match (st, value) {
                    (Some(s), Some(t)) => {
                        let target = Complex64::new(t[0], t[1]);
                        let d = (s - target).norm();
                        plain_verdict(
                            if d <= *tol {
                                VerdictValue::True
                            } else {
                                VerdictValue::False
                            },
                            format!("standard part {s}, |Δ| = {d:.3e} vs tol {tol:.1e}"),
                        )
                    }
                    (Some(s), None) => plain_verdict(
                        VerdictValue::True,
                        format!("standard part exists: {s}"),
                    ),
                    (None, _) => plain_verdict(VerdictValue::False, "no standard part"),
                };
                Ok(Some(v))
            }
            TaskOp::Diff {
                function,
                at,
                ball_exponent,
            } => {
                let net = self.function(function)?;
                let z = self.number(at)?;
                match certify_eps_diff(&net, &Domain::FullPlane, &z, *ball_exponent, seed) {
                    Ok(ghf) => {
                        let m = ghf.derivative_at_center().clone();
                        report.push_number(format!("{name}: derivative"), &m)?;
                        if let Some(b) = &task.bind {
                            self.numbers.insert(b.clone(), m);
                        }
                        Ok(Some(plain_verdict(
                            VerdictValue::True,
                            format!("certified; evidence: {:?}", ghf.evidence),
                        )))
                    }
                    Err(Error::Certify(msg)) => {
                        Ok(Some(plain_verdict(VerdictValue::False, msg)))
                    }
                    Err(e) => Err(e),
                }
            }
            TaskOp::CauchyDerivative {
                function,
                at,
                nodes,
                radius_exponent,
                closed_form,
                rtol,
                order,
            } => {
                let net = self.function(function)?;
                let f = BasicFunction::on_full_plane(net);
                let z = self.number(at)?;
                let radius = rho_power(&self.gauge, *radius_exponent)?;
                let d = cauchy_derivative(&f, &z, 1, &radius, *nodes)?;
                report.push_number(format!("{name}: derivative"), &d)?;
                if let Some(b) = &task.bind {
                    self.numbers.insert(b.clone(), d.clone());
                }
                let Some(cf) = closed_form else {
                    return Ok(Some(plain_verdict(VerdictValue::True, "computed")));
                };
                let expected = self.function(cf)?.eval(&z)?;
                let dv = d.values()?;
                let ev = expected.values()?;
                let mut worst = 0.0f64;
                for k in 0..dv.len() {
                    let diff = dv[k].sub(ev[k]);
                    let denom = ev[k].lm().exp().max(1e-300);
                    let rel = if diff.is_zero() {
                        0.0
                    } else {
                        (diff.lm().exp()) / denom
                    };
                    worst = worst.max(rel);
                }
                let per_eps = plain_verdict(
                    if worst < *rtol {
                        VerdictValue::True
                    } else {
                        VerdictValue::False
                    },
                    format!("worst per-point relative error {worst:.3e} vs {rtol:.1e}"),
                );
                let eqv = d.eq_at(&expected, self.order_of(order))?;
                Ok(Some(join_verdicts(&[
                    ("per-point", &per_eps),
                    ("equality", &eqv),
                ])))
            }
            TaskOp::CreResidual {
                function,
                at,
                value,
                tol,
            } => {
                let net = self.function(function)?;
                let f = BasicFunction::on_full_plane(net);
                let z = self.number(at)?;
                let rec = cre_residual(&f, &z)?;
                report.push_cauchy_riemann(format!("{name}: residuals"), &rec)?;
                let v = if let Some(t) = value {
                    let target = Complex64::new(t[0], t[1]);
                    match standard_part(&rec.residual1)? {
                        Some(s) => {
                            let dnorm = (s - target).norm();
                            plain_verdict(
                                if dnorm <= *tol {
                                    VerdictValue::True
                                } else {
                                    VerdictValue::False
                                },
                                format!("residual {s} vs {target}, |Δ| = {dnorm:.3e}"),
                            )
                        }
                        None => plain_verdict(
                            VerdictValue::False,
                            "first residual has no standard part",
                        ),
                    }
                } else {
                    join_verdicts(&[
                        ("residual 1 negligible", &rec.negligible1),
                        ("residual 2 negligible", &rec.negligible2),
                    ])
                };
                Ok(Some(v))
            }
            TaskOp::EmbedEval {
                distribution,
                mollifier,
                at,
                expect,
                order,
            } => {
                let t = self.distribution(distribution)?;
                let mu = self.mollifier(mollifier)?;
                let emb = iota_embed(&t, &mu, &self.gauge)?;
                let z = self.number(at)?;
                let v = emb.function.eval(&z)?;
                report.push_number(format!("{name}: value"), &v)?;
                traces.extend(trace_number(name, "embedded value", &v)?);
                if let Some(b) = &task.bind {
                    self.numbers.insert(b.clone(), v.clone());
                }
                match expect {
                    Some(e) => {
                        let target = self.number(e)?;
                        Ok(Some(v.eq_at(&target, self.order_of(order))?))
                    }
                    None => Ok(Some(plain_verdict(VerdictValue::True, "evaluated"))),
                }
            }
            TaskOp::EmbedCheck {
                distribution,
                mollifier,
            } => {
                let t = self.distribution(distribution)?;
                let mu = self.mollifier(mollifier)?;
                let emb = iota_embed(&t, &mu, &self.gauge)?;
                report.push_cauchy_riemann(format!("{name}: residuals"), &emb.cre)?;
                report.push_note(
                    format!("{name}: holomorphy"),
                    format!(
                        "evidence {:?}; fitted order {}; declared growth {}",
                        emb.holomorphy, emb.fitted_order.detail, emb.declared_growth
                    ),
                );
                Ok(Some(emb.moderate.clone()))
            }
            TaskOp::DeltaValue { mollifier } => {
                let mu = self.mollifier(mollifier)?;
                let t = CompactDistribution::delta();
                let emb = iota_embed(&t, &mu, &self.gauge)?;
                let zero = GenNumber::constant(Complex64::new(0.0, 0.0), self.gauge.clone());
                let v = emb.function.eval(&zero)?;
                let mu0 = GenNumber::constant(mu.taylor0[0], self.gauge.clone());
                let expected = GenNumber::drho(self.gauge.clone())
                    .powi(-2)?
                    .mul(&mu0)?;
                report.push_number(format!("{name}: ι(δ)(0)"), &v)?;
                Ok(Some(v.eq(&expected)?))
            }
            TaskOp::DeltaVanishes {
                mollifier,
                probes,
                order,
            } => {
                let mu = self.mollifier(mollifier)?;
                let t = CompactDistribution::delta();
                let emb = iota_embed(&t, &mu, &self.gauge)?;
                let n = self.order_of(order);
                let mut parts: Vec<(String, Verdict)> = Vec::new();
                for &x in probes {
                    let p = GenNumber::constant(Complex64::new(x, 0.0), self.gauge.clone());
                    let v = emb.function.eval(&p)?.is_zero_at(n)?;
                    parts.push((format!("x = {x}"), v));
                }
                let refs: Vec<(&str, &Verdict)> =
                    parts.iter().map(|(s, v)| (s.as_str(), v)).collect();
                Ok(Some(join_verdicts(&refs)))
            }
            TaskOp::DeltaLink {
                mollifier,
                probes,
                order,
            } => {
                let mu = self.mollifier(mollifier)?;
                let ps: Vec<GenNumber> = probes
                    .iter()
                    .map(|&x| GenNumber::constant(Complex64::new(x, 0.0), self.gauge.clone()))
                    .collect();
                Ok(Some(embed::delta_1d_link_check(
                    &mu,
                    &self.gauge,
                    &ps,
                    self.order_of(order),
                )?))
            }
            TaskOp::DerivativePreservation {
                distribution,
                mollifier,
                alpha,
                probes,
                order,
            } => {
                let t = self.distribution(distribution)?;
                let mu = self.mollifier(mollifier)?;
                let ps: Vec<GenNumber> = if probes.is_empty() {
                    default_probes(&self.gauge, seed, 5)
                } else {
                    probes
                        .iter()
                        .map(|p| self.number(p))
                        .collect::<Result<_, _>>()?
                };
                Ok(Some(embed::derivative_preservation_check(
                    &t,
                    (alpha[0], alpha[1]),
                    &mu,
                    &self.gauge,
                    &ps,
                    self.order_of(order),
                )?))
            }
            TaskOp::Jet {
                distribution,
                mollifier,
                n_max,
                q_range,
                ball_exponent,
            } => {
                let t = self.distribution(distribution)?;
                let mu = self.mollifier(mollifier)?;
                let ghf = iota_ghf(
                    &t,
                    &mu,
                    &self.gauge,
                    Complex64::new(0.0, 0.0),
                    *ball_exponent,
                    6,
                    seed,
                )?;
                let jet = taylor_jet(&ghf, *n_max)?;
                report.push_jet(format!("{name}: jet"), &jet)?;
                let mut parts: Vec<(String, Verdict)> =
                    vec![("bounds".into(), jet.bound_verdict.clone())];
                if let Some([lo, hi]) = q_range {
                    let inside = jet.q >= *lo && jet.q <= *hi;
                    parts.push((
                        "growth exponent".into(),
                        plain_verdict(
                            if inside {
                                VerdictValue::True
                            } else {
                                VerdictValue::False
                            },
                            format!("fitted Q = {:.4} vs [{lo}, {hi}]", jet.q),
                        ),
                    ));
                }
                let refs: Vec<(&str, &Verdict)> =
                    parts.iter().map(|(s, v)| (s.as_str(), v)).collect();
                Ok(Some(join_verdicts(&refs)))
            }
            TaskOp::Uniqueness {
                mollifier1,
                mollifier2,
                q,
                r,
                n_max,
            } => {
                let m1 = self.mollifier(mollifier1)?;
                let m2 = self.mollifier(mollifier2)?;
                let findings =
                    mollifier_uniqueness_check(&m1, &m2, &self.gauge, *n_max, &[(*q, *r)]);
                let f = findings.into_iter().next().ok_or_else(|| {
                    config_err("uniqueness check returned no findings")
                })?;
                if let Some(w) = &f.witness {
                    report.push_note(
                        format!("{name}: witness"),
                        format!("derivative order n = {}, from ε = {:.3e}", w.n, w.eps),
                    );
                }
                Ok(Some(f.verdict))
            }
            TaskOp::JmathEval {
                function,
                omega_radius,
                probes,
                tol,
                expect_reject,
            } => {
                let src = self
                    .functions
                    .get(function)
                    .cloned()
                    .unwrap_or_else(|| function.clone());
                let lif = LocIntFunction::parse(name, &src, *omega_radius)?;
                match jmath_embed(&lif, &self.gauge, seed) {
                    Err(Error::Certify(msg)) => Ok(Some(plain_verdict(
                        if *expect_reject {
                            VerdictValue::True
                        } else {
                            VerdictValue::False
                        },
                        format!("pre-test refused: {msg}"),
                    ))),
                    Err(e) => Err(e),
                    Ok(j) if *expect_reject => Ok(Some(plain_verdict(
                        VerdictValue::False,
                        format!(
                            "embedding accepted (pre-test worst {:.2e}) but rejection \
                             was expected",
                            j.pretest_worst
                        ),
                    ))),
                    Ok(j) => {
                        let reference = self.function(&src)?;
                        let mut parts: Vec<(String, Verdict)> = Vec::new();
                        for p in probes {
                            let z = self.number(p)?;
                            let got = standard_part(&j.ghf.eval(&z)?)?;
                            let want = standard_part(&reference.eval(&z)?)?;
                            let v = match (got, want) {
                                (Some(a), Some(b)) => {
                                    let d = (a - b).norm();
                                    plain_verdict(
                                        if d <= *tol {
                                            VerdictValue::True
                                        } else {
                                            VerdictValue::False
                                        },
                                        format!("|Δ| = {d:.3e} vs tol {tol:.1e}"),
                                    )
                                }
                                _ => plain_verdict(
                                    VerdictValue::False,
                                    "standard part missing on a probe",
                                ),
                            };
                            parts.push((format!("probe {p}"), v));
                        }
                        if parts.is_empty() {
                            parts.push((
                                "accepted".into(),
                                plain_verdict(
                                    VerdictValue::True,
                                    format!("pre-test worst {:.2e}", j.pretest_worst),
                                ),
                            ));
                        }
                        let refs: Vec<(&str, &Verdict)> =
                            parts.iter().map(|(s, v)| (s.as_str(), v)).collect();
                        Ok(Some(join_verdicts(&refs)))
                    }
                }
            }
            TaskOp::Trace {
                number,
                label,
                quantity,
            } => {
                let x = self.number(number)?;
                let object = label.clone().unwrap_or_else(|| name.to_string());
                let quantity = quantity.clone().unwrap_or_else(|| "value".to_string());
                traces.extend(trace_number(&object, &quantity, &x)?);
                Ok(None)
            }
            TaskOp::Note { text } => {
                report.push_note(name, text.clone());
                Ok(None)
            }
        }
    }
}

/// Seeded standard probes in the unit square, used when a task leaves its
/// probe list empty.
fn default_probes(gauge: &Arc<Gauge>, seed: u64, n: usize) -> Vec<GenNumber> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x50b3);
    (0..n)
        .map(|_| {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            GenNumber::constant(Complex64::new(re, im), gauge.clone())
        })
        .collect()
}
