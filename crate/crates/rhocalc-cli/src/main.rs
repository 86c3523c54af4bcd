//! `rhocalc` — batch experiment runner and report emitter for generalized
//! numbers, generalized holomorphic functions, and mollifier embeddings.
//!
//! One-shot subcommands (`classify`, `limit`, `diff`, `embed`) answer a
//! single question from the command line; `run` executes a JSON experiment
//! configuration and writes a report plus per-ε CSV traces; `verify` executes
//! a configuration's assertions without writing anything.
//!
//! Exit codes: 0 on success, 1 when an asserted task fails (the first
//! failing task is named on stderr), 2 on configuration or usage errors.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ConfigFile, Engine, GaugeDecl, GridDecl, Outputs, RunOutcome, Task, TaskOp};
use rhocalc::report::{csv_string, TraceRow};

const EXIT_ASSERT: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "rhocalc",
    version,
    about = "Rigorous desk-scale computations in gauge-parametrized rings of \
             generalized numbers"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Csv,
    Both,
}

impl Emit {
    fn json(self) -> bool {
        matches!(self, Emit::Json | Emit::Both)
    }
    fn csv(self) -> bool {
        matches!(self, Emit::Csv | Emit::Both)
    }
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Gauge expression in `eps`, e.g. "eps" or "exp(-1/eps)"
    #[arg(long, default_value = "eps")]
    gauge: String,
    /// Evaluation grid as eps0:ratio:count
    #[arg(long, default_value = "0.5:0.7:24")]
    grid: String,
    /// Default decision order for verdicts
    #[arg(long, default_value_t = 10.0)]
    order: f64,
    /// Seed for randomized probes
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// What to emit: json (stdout), csv (files under --out), or both
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    emit: Emit,
    /// Output directory for CSV traces
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a generalized number given by a net expression
    Classify {
        /// Net expression in eps/rho, e.g. "rho^2 + i*eps"
        expr: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Standard part of a generalized number, with an optional target value
    Limit {
        expr: String,
        /// Expected value as "re,im"
        #[arg(long, value_parser = parse_pair)]
        value: Option<(f64, f64)>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Certify differentiability of a function net at a probe
    Diff {
        /// Function expression in z, e.g. "z^3 + rho*z"
        function: String,
        /// Probe expression, e.g. "1" or "i*rho"
        #[arg(long, default_value = "0")]
        at: String,
        /// Certification ball radius exponent: radius = drho^q
        #[arg(long, default_value_t = 0.0)]
        ball_exponent: f64,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Embed a distribution by mollifier convolution and evaluate it
    Embed {
        /// Distribution: a builtin name (delta, delta_dx, delta_dy, bump) or
        /// a path to a JSON declaration
        #[arg(long, default_value = "delta")]
        distribution: String,
        /// Mollifier registry name
        #[arg(long, default_value = "gauss")]
        mollifier: String,
        /// Probe expressions (repeatable)
        #[arg(long = "at", default_value = "0")]
        at: Vec<String>,
        /// Also fit a Taylor jet up to this order
        #[arg(long)]
        jet: Option<usize>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Execute a configuration's assertions without writing outputs
    Verify {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Execute a configuration and write report.json plus CSV traces
    Run {
        config: PathBuf,
        /// Output directory (report and trace paths from the config are
        /// resolved against it)
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Emit::Both)]
        emit: Emit,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re] => Ok((re.trim().parse().map_err(|e| format!("{e}"))?, 0.0)),
        [re, im] => Ok((
            re.trim().parse().map_err(|e| format!("{e}"))?,
            im.trim().parse().map_err(|e| format!("{e}"))?,
        )),
        _ => Err("expected `re` or `re,im`".into()),
    }
}

fn parse_grid(s: &str) -> Result<GridDecl, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [eps0, ratio, count] = parts.as_slice() else {
        return Err(format!("grid `{s}` must be eps0:ratio:count"));
    };
    Ok(GridDecl {
        eps0: eps0.parse().map_err(|e| format!("grid eps0: {e}"))?,
        ratio: ratio.parse().map_err(|e| format!("grid ratio: {e}"))?,
        count: count.parse().map_err(|e| format!("grid count: {e}"))?,
    })
}

fn main() -> ExitCode {
    if let Ok(s) = std::env::var("RHOCALC_THREADS") {
        match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rhocalc::par::set_threads(n) {
                    eprintln!("warning: RHOCALC_THREADS not applied: {e}");
                }
            }
            _ => eprintln!("warning: RHOCALC_THREADS=`{s}` ignored (want a positive integer)"),
        }
    }
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<u8, Box<dyn std::error::Error>> {
    match cmd {
        Cmd::Classify { expr, opts } => one_shot(
            &opts,
            vec![Task {
                name: "classify".into(),
                assert: None,
                bind: None,
                seed: None,
                op: TaskOp::Classify {
                    number: expr,
                    expect: None,
                },
            }],
            BTreeMap::new(),
        ),
        Cmd::Limit {
            expr,
            value,
            tol,
            opts,
        } => one_shot(
            &opts,
            vec![Task {
                name: "limit".into(),
                assert: None,
                bind: None,
                seed: None,
                op: TaskOp::Limit {
                    number: expr,
                    value: value.map(|(re, im)| [re, im]),
                    tol,
                },
            }],
            BTreeMap::new(),
        ),
        Cmd::Diff {
            function,
            at,
            ball_exponent,
            opts,
        } => {
            let tasks = vec![Task {
                name: "diff".into(),
                assert: Some(true),
                bind: None,
                seed: None,
                op: TaskOp::Diff {
                    function,
                    at,
                    ball_exponent,
                },
            }];
            one_shot(&opts, tasks, BTreeMap::new())
        }
        Cmd::Embed {
            distribution,
            mollifier,
            at,
            jet,
            opts,
        } => {
            let mut distributions = BTreeMap::new();
            let dist_name = if Path::new(&distribution).is_file() {
                let body = std::fs::read_to_string(&distribution)?;
                let decl: serde_json::Value = serde_json::from_str(&body)?;
                distributions.insert("T".to_string(), decl);
                "T".to_string()
            } else {
                distribution
            };
            let mut tasks: Vec<Task> = at
                .iter()
                .enumerate()
                .map(|(i, probe)| Task {
                    name: format!("embed {i} at {probe}"),
                    assert: None,
                    bind: None,
                    seed: None,
                    op: TaskOp::EmbedEval {
                        distribution: dist_name.clone(),
                        mollifier: mollifier.clone(),
                        at: probe.clone(),
                        expect: None,
                        order: None,
                    },
                })
                .collect();
            if let Some(n_max) = jet {
                tasks.push(Task {
                    name: "jet".into(),
                    assert: None,
                    bind: None,
                    seed: None,
                    op: TaskOp::Jet {
                        distribution: dist_name,
                        mollifier,
                        n_max,
                        q_range: None,
                        ball_exponent: 1,
                    },
                });
            }
            one_shot(&opts, tasks, distributions)
        }
        Cmd::Verify { config, seed } => {
            let cfg = load_config(&config, seed)?;
            let mut engine = Engine::new(&cfg)?;
            let outcome = engine.run(&cfg)?;
            for r in &outcome.assert_results {
                let tag = if r.passed { "[PASS]" } else { "[FAIL]" };
                println!("{tag} {}: {}", r.name, r.line);
            }
            println!(
                "{} tasks, {} asserted, {} failed",
                outcome.total_tasks,
                outcome.assert_results.len(),
                outcome.failed_asserts()
            );
            finish(&outcome)
        }
        Cmd::Run {
            config,
            out,
            seed,
            emit,
        } => {
            let cfg = load_config(&config, seed)?;
            let mut engine = Engine::new(&cfg)?;
            let outcome = engine.run(&cfg)?;
            write_outputs(&out, &cfg.outputs, &outcome, emit)?;
            println!(
                "{} tasks, {} asserted, {} failed",
                outcome.total_tasks,
                outcome.assert_results.len(),
                outcome.failed_asserts()
            );
            finish(&outcome)
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ConfigFile, Box<dyn std::error::Error>> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut cfg = ConfigFile::from_json(&body)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Build a single-command configuration from CLI flags and execute it.
fn one_shot(
    opts: &CommonOpts,
    tasks: Vec<Task>,
    distributions: BTreeMap<String, serde_json::Value>,
) -> Result<u8, Box<dyn std::error::Error>> {
    let cfg = ConfigFile {
        gauge: GaugeDecl {
            name: "rho".into(),
            expr: opts.gauge.clone(),
            grid: parse_grid(&opts.grid)?,
        },
        seed: opts.seed,
        order: opts.order,
        objects: config::Objects {
            numbers: BTreeMap::new(),
            functions: BTreeMap::new(),
            distributions,
            mollifiers: BTreeMap::new(),
        },
        tasks,
        outputs: Outputs::default(),
    };
    let mut engine = Engine::new(&cfg)?;
    let outcome = engine.run(&cfg)?;
    if opts.emit.json() {
        println!("{}", outcome.report.to_json()?);
    }
    if opts.emit.csv() {
        let dir = opts.out.join("traces");
        for (path, _) in write_traces(&dir, &outcome.traces)? {
            eprintln!("wrote {}", path.display());
        }
    }
    if let Some((name, line)) = &outcome.first_failure {
        eprintln!("assertion failed in task `{name}`: {line}");
        return Ok(EXIT_ASSERT);
    }
    Ok(0)
}

fn finish(outcome: &RunOutcome) -> Result<u8, Box<dyn std::error::Error>> {
    if let Some((name, line)) = &outcome.first_failure {
        eprintln!("assertion failed in task `{name}`: {line}");
        return Ok(EXIT_ASSERT);
    }
    Ok(0)
}

/// Group trace rows by object and write one CSV per object.
fn write_traces(
    dir: &Path,
    rows: &[TraceRow],
) -> Result<Vec<(PathBuf, usize)>, Box<dyn std::error::Error>> {
    let mut by_object: BTreeMap<&str, Vec<TraceRow>> = BTreeMap::new();
    for r in rows {
        by_object.entry(&r.object).or_default().push(r.clone());
    }
    let mut written = Vec::new();
    if by_object.is_empty() {
        return Ok(written);
    }
    std::fs::create_dir_all(dir)?;
    for (object, group) in by_object {
        let stem: String = object
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '_' })
            .collect();
        let path = dir.join(format!("{stem}.csv"));
        std::fs::write(&path, csv_string(&group))?;
        written.push((path, group.len()));
    }
    Ok(written)
}

fn write_outputs(
    out: &Path,
    outputs: &Outputs,
    outcome: &RunOutcome,
    emit: Emit,
) -> Result<(), Box<dyn std::error::Error>> {
    std::fs::create_dir_all(out)?;
    if emit.json() {
        let path = out.join(&outputs.report);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, outcome.report.to_json()?)?;
        eprintln!("wrote {}", path.display());
    }
    if emit.csv() {
        let dir = out.join(&outputs.traces);
        for (path, _) in write_traces(&dir, &outcome.traces)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}
