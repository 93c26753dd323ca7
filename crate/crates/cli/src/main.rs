//! `dupdiv` command-line front end.
//!
//! Exit status: 0 on success, 2 on invalid input (bad flags, unreadable or
//! malformed config), 3 when a checked tolerance is not met, 1 otherwise.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dupdiv::forward::{discrete_recursion, quasi_stationarity_check};
use dupdiv::graph::{census_to_distribution, run_graph};
use dupdiv::model::{classify, q1, q2, ModelConfig, ModelSpec, Process};
use dupdiv::stats::{run_suite, Status, Suite};
use dupdiv::tagged::{
    build_coupled_pair, quantile_couple, simulate_basic_fast, simulate_ctmc, simulate_discrete_tagged,
    simulate_rewiring_pair, DiscreteOptions, DiscreteVariant, PathSample, DEFAULT_EVENT_CAP,
};
use dupdiv::TaggedVariant;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use config::RunConfig;
use output::{Format, Sink};

/// Input problems: reported with exit status 2.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

/// A checked tolerance was not met: exit status 3.
struct Outcome {
    tolerance_failed: bool,
}

impl Outcome {
    fn ok() -> Self {
        Self { tolerance_failed: false }
    }
}

#[derive(Parser, Debug)]
#[command(name = "dupdiv", version, about = "Duplication-divergence graphs and tagged-degree processes")]
struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// JSON run config (model, params, seed, output).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed; overrides DD_SEED and the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file, or a bare format name (csv, json) to write that format to stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regime of X*, X̃ (and X*_b with multi-births) and the phase region.
    Classify {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Region label over a grid of cell centers in (0, 1] x [0, 1).
    PhaseDiagram {
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Degree censuses of the full graph process.
    SimulateGraph {
        #[arg(long)]
        target_m: usize,
        /// Comma-separated sizes; defaults to target_m.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        /// Size of the complete starting graph when the config has no edge list.
        #[arg(long)]
        m0: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Tagged-degree paths, one JSON line per checkpoint per path.
    SimulateTagged {
        #[arg(long, value_enum, default_value_t = VariantArg::Base)]
        variant: VariantArg,
        #[arg(long, default_value_t = 1)]
        x0: u64,
        /// Horizon for continuous variants.
        #[arg(long)]
        t_max: Option<f64>,
        /// Final graph size for discrete variants.
        #[arg(long)]
        m_max: Option<u64>,
        /// Starting graph size for discrete variants.
        #[arg(long, default_value_t = 1)]
        m0: u64,
        /// Comma-separated checkpoints; defaults to the horizon.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        paths: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Expected degree distribution by the forward recursion.
    Expected {
        #[arg(long)]
        m0: Option<usize>,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        trunc: usize,
        /// Largest acceptable mass lost above the truncation.
        #[arg(long, default_value_t = 1e-6)]
        max_deficit: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Quasi-stationarity identity between X and X̃ by dual uniformization.
    QuasiCheck {
        #[arg(long, value_delimiter = ',', default_values_t = [1usize])]
        i: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 3.0])]
        t_grid: Vec<f64>,
        #[arg(long, default_value_t = 400)]
        trunc: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1e-250)]
        floor: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite and write its JSON report.
    Verify {
        /// Suite name, or `all`.
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Couplings: time shift between X and Y, quantile pairs, rewiring pairs.
    Couple {
        #[arg(long, value_enum, default_value_t = CoupleKind::TimeShift)]
        kind: CoupleKind,
        #[arg(long, default_value_t = 1)]
        j0: u64,
        #[arg(long, default_value_t = 2)]
        m0: u64,
        #[arg(long, default_value_t = 1000)]
        jumps: usize,
        #[arg(long, default_value_t = 1)]
        pairs: u64,
        /// Quantile coupling: current size, rate and phi.
        #[arg(long, default_value_t = 1000)]
        m: u64,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        #[arg(long, default_value_t = 0.95)]
        phi: f64,
        /// Rewiring pairs run from m0 to m_end.
        #[arg(long)]
        m_end: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VariantArg {
    Base,
    Weighted,
    Deaths,
    MultiBirth,
    RewiringLimit,
    /// Catastrophe-skeleton sampler for the basic model.
    Fast,
    DiscretePlain,
    DiscreteWeighted,
    DiscreteRewiring,
    DiscreteRewiringLimit,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CoupleKind {
    TimeShift,
    Quantile,
    Rewiring,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(cli.command) {
        Ok(o) if o.tolerance_failed => ExitCode::from(3),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Loaded config plus the effective seed and output sink.
struct Ctx {
    config: RunConfig,
    seed: u64,
    sink: Sink,
}

fn context(common: &Common, default_format: Format) -> Result<Ctx> {
    let config = match &common.config {
        Some(path) => config::load(path).map_err(|e| invalid(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    let env_seed = match std::env::var("DD_SEED") {
        Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| invalid(format!("DD_SEED is not a 64-bit integer: {s:?}")))?),
        Err(_) => None,
    };
    let seed = common.seed.or(env_seed).unwrap_or(config.seed);
    let sink = Sink::resolve(common.out.as_deref(), config.output.as_ref(), default_format).map_err(|e| invalid(e.to_string()))?;
    Ok(Ctx { config, seed, sink })
}

fn build_spec(model: &ModelConfig) -> Result<ModelSpec> {
    model.build().map_err(|e| invalid(format!("model: {e}")))
}

fn require_model(ctx: &Ctx) -> Result<ModelSpec> {
    let model = ctx.config.model.as_ref().ok_or_else(|| invalid("this command needs a config with a `model` section"))?;
    build_spec(model)
}

/// Digest of everything that determines the output.
fn digest(command: &str, args: serde_json::Value, ctx: &Ctx) -> String {
    dupdiv::stats::config_digest(&json!({
        "command": command,
        "args": args,
        "model": ctx.config.model,
        "graph": ctx.config.graph,
        "seed": ctx.seed,
    }))
}

fn label<T: Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Classify { p, q, common } => cmd_classify(p, q, &common),
        Command::PhaseDiagram { grid, common } => cmd_phase_diagram(grid, &common),
        Command::SimulateGraph { target_m, checkpoints, replicas, m0, common } => {
            cmd_simulate_graph(target_m, checkpoints, replicas, m0, &common)
        }
        Command::SimulateTagged { variant, x0, t_max, m_max, m0, checkpoints, paths, common } => {
            cmd_simulate_tagged(variant, x0, t_max, m_max, m0, checkpoints, paths, &common)
        }
        Command::Expected { m0, m, trunc, max_deficit, common } => cmd_expected(m0, m, trunc, max_deficit, &common),
        Command::QuasiCheck { i, t_grid, trunc, tol, floor, common } => cmd_quasi(&i, &t_grid, trunc, tol, floor, &common),
        Command::Verify { suite, common } => cmd_verify(&suite, &common),
        Command::Couple { kind, j0, m0, jumps, pairs, m, b, phi, m_end, common } => {
            cmd_couple(kind, j0, m0, jumps, pairs, m, b, phi, m_end, &common)
        }
    }
}

fn cmd_classify(p: Option<f64>, q: Option<f64>, common: &Common) -> Result<Outcome> {
    let ctx = context(common, Format::Csv)?;
    let spec = match (p, q, &ctx.config.model) {
        (Some(p), Some(q), _) => build_spec(&ModelConfig::basic(p, q))?,
        (Some(p), None, None) => build_spec(&ModelConfig::basic(p, 0.0))?,
        (None, None, Some(model)) => build_spec(model)?,
        (None, None, None) => bail!(invalid("give --p and --q, or a config with a model")),
        _ => {
            let mut model = ctx.config.model.clone().ok_or_else(|| invalid("--q needs --p"))?;
            if let Some(p) = p {
                model.p = p;
            }
            if q.is_some() {
                model.q = q;
            }
            build_spec(&model)?
        }
    };
    let mut processes = vec![Process::XStar, Process::XTilde];
    if spec.multi_births().is_some() {
        processes.push(Process::XStarB);
    }
    let dg = digest("classify", json!({ "p": p, "q": q }), &ctx);
    let mut w = ctx.sink.open(&dg)?;
    w.header(&["process", "verdict", "margin", "eta_star", "region"])?;
    for proc in processes {
        let r = classify(&spec, proc);
        w.row(&[
            label(&r.process),
            label(&r.verdict),
            format!("{}", r.margin),
            r.eta_star.map_or(String::new(), |e| format!("{e}")),
            r.region.as_ref().map_or(String::new(), label),
        ])?;
    }
    w.finish()?;
    Ok(Outcome::ok())
}

fn cmd_phase_diagram(grid: usize, common: &Common) -> Result<Outcome> {
    if grid == 0 {
        bail!(invalid("--grid must be positive"));
    }
    let ctx = context(common, Format::Csv)?;
    let dg = digest("phase-diagram", json!({ "grid": grid }), &ctx);
    let mut w = ctx.sink.open(&dg)?;
    w.header(&["p", "q", "region", "q1", "q2"])?;
    for i in 0..grid {
        let p = (i as f64 + 0.5) / grid as f64;
        for j in 0..grid {
            let q = (j as f64 + 0.5) / grid as f64;
            let spec = build_spec(&ModelConfig::basic(p, q))?;
            let region = classify(&spec, Process::XStar).region;
            w.row(&[
                format!("{p}"),
                format!("{q}"),
                region.as_ref().map_or(String::new(), label),
                format!("{}", q1(p)),
                format!("{}", q2(p)),
            ])?;
        }
    }
    w.finish()?;
    Ok(Outcome::ok())
}

fn cmd_simulate_graph(
    target_m: usize,
    mut checkpoints: Vec<usize>,
    replicas: u64,
    m0: Option<usize>,
    common: &Common,
) -> Result<Outcome> {
    let ctx = context(common, Format::Csv)?;
    let spec = require_model(&ctx)?;
    let initial = config::initial_graph(ctx.config.graph.as_ref(), m0).map_err(|e| invalid(e.to_string()))?;
    if target_m < initial.vertex_count() {
        bail!(invalid(format!("--target-m {target_m} is below the initial size {}", initial.vertex_count())));
    }
    if checkpoints.is_empty() {
        checkpoints.push(target_m);
    }
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let censuses = (0..replicas)
        .into_par_iter()
        .map(|rep| run_graph(&initial, &spec, target_m, &checkpoints, ctx.seed, rep))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| invalid(e.to_string()))?;
    let dg = digest(
        "simulate-graph",
        json!({ "target_m": target_m, "checkpoints": checkpoints, "replicas": replicas, "m0": m0 }),
        &ctx,
    );
    let mut w = ctx.sink.open(&dg)?;
    w.header(&["replica", "m", "degree", "count"])?;
    for (rep, list) in censuses.iter().enumerate() {
        for c in list {
            for (k, n) in &c.counts {
                w.row(&[rep.to_string(), c.m.to_string(), k.to_string(), n.to_string()])?;
            }
        }
    }
    w.finish()?;
    Ok(Outcome::ok())
}

#[derive(Serialize)]
struct PathRecord {
    path: u64,
    t: f64,
    state: String,
    z: u64,
    absorbed: bool,
    status: String,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate_tagged(
    variant: VariantArg,
    x0: u64,
    t_max: Option<f64>,
    m_max: Option<u64>,
    m0: u64,
    checkpoints: Vec<f64>,
    paths: u64,
    common: &Common,
) -> Result<Outcome> {
    let ctx = context(common, Format::JsonLines)?;
    let spec = require_model(&ctx)?;
    let discrete = match variant {
        VariantArg::DiscretePlain => Some(DiscreteVariant::Plain),
        VariantArg::DiscreteWeighted => Some(DiscreteVariant::Weighted),
        VariantArg::DiscreteRewiring => Some(DiscreteVariant::RewiringInhomogeneous),
        VariantArg::DiscreteRewiringLimit => Some(DiscreteVariant::RewiringLimit),
        _ => None,
    };
    let horizon = match (discrete, t_max, m_max) {
        (Some(_), _, Some(m)) => m as f64,
        (Some(_), _, None) => bail!(invalid("discrete variants need --m-max")),
        (None, Some(t), _) if t >= 0.0 && t.is_finite() => t,
        (None, Some(t), _) => bail!(invalid(format!("--t-max must be finite and nonnegative, got {t}"))),
        (None, None, _) => bail!(invalid("continuous variants need --t-max")),
    };
    let mut marks = if checkpoints.is_empty() { vec![horizon] } else { checkpoints.clone() };
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    if let Some(&bad) = marks.iter().find(|&&c| c.is_nan() || c < 0.0 || c > horizon) {
        bail!(invalid(format!("checkpoint {bad} lies outside [0, {horizon}]")));
    }
    let skeleton: Option<Vec<u64>> = discrete.map(|_| marks.iter().map(|&c| c as u64).collect());
    if discrete.is_some() && marks.iter().any(|&c| c.fract() != 0.0 || (c as u64) < m0) {
        bail!(invalid("discrete checkpoints must be integer sizes at or above --m0"));
    }

    let run = |i: u64| -> Result<PathSample, dupdiv::tagged::SimError> {
        if let Some(dv) = discrete {
            let opts = DiscreteOptions { relaxed_start: true, skeleton: skeleton.clone() };
            return simulate_discrete_tagged(&spec, dv, x0, m0, horizon as u64, ctx.seed, i, &opts);
        }
        let tv = match variant {
            VariantArg::Fast => return simulate_basic_fast(&spec, x0 as u128, horizon, &marks, ctx.seed, i),
            VariantArg::Weighted => TaggedVariant::Weighted,
            VariantArg::Deaths => TaggedVariant::Deaths,
            VariantArg::MultiBirth => TaggedVariant::MultiBirth,
            VariantArg::RewiringLimit => TaggedVariant::RewiringLimit,
            _ => TaggedVariant::Base,
        };
        simulate_ctmc(&spec, tv, x0, horizon, ctx.seed, i, DEFAULT_EVENT_CAP)
    };
    let samples = (0..paths)
        .into_par_iter()
        .map(run)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| invalid(e.to_string()))?;

    let dg = digest(
        "simulate-tagged",
        json!({ "variant": variant, "x0": x0, "horizon": horizon, "m0": m0, "checkpoints": marks, "paths": paths }),
        &ctx,
    );
    let mut w = ctx.sink.open(&dg)?;
    for (i, s) in samples.iter().enumerate() {
        for &t in &marks {
            w.record(&PathRecord {
                path: i as u64,
                t,
                state: s.state_at(t).to_string(),
                z: s.z_at(t),
                absorbed: s.absorbed_at.is_some_and(|a| a <= t),
                status: label(&s.status),
            })?;
        }
    }
    w.finish()?;
    Ok(Outcome::ok())
}

fn cmd_expected(m0: Option<usize>, m: usize, trunc: usize, max_deficit: f64, common: &Common) -> Result<Outcome> {
    let ctx = context(common, Format::Csv)?;
    let spec = require_model(&ctx)?;
    let initial = config::initial_graph(ctx.config.graph.as_ref(), m0).map_err(|e| invalid(e.to_string()))?;
    let start_m = initial.vertex_count();
    if m < start_m {
        bail!(invalid(format!("--m {m} is below the initial size {start_m}")));
    }
    let start = census_to_distribution(&initial.census(), Some(trunc)).map_err(|e| invalid(e.to_string()))?;
    let law = discrete_recursion(&start, &spec, start_m, m, trunc).map_err(|e| invalid(e.to_string()))?;
    let dg = digest("expected", json!({ "m0": start_m, "m": m, "trunc": trunc }), &ctx);
    let mut w = ctx.sink.open(&dg)?;
    w.header(&["k", "mass"])?;
    for (k, x) in law.mass().iter().enumerate() {
        w.row(&[k.to_string(), format!("{x:e}")])?;
    }
    w.finish()?;
    let deficit = law.deficit();
    eprintln!("deficit above K = {trunc}: {deficit:e}");
    Ok(Outcome { tolerance_failed: deficit > max_deficit })
}

fn cmd_quasi(starts: &[usize], t_grid: &[f64], trunc: usize, tol: f64, floor: f64, common: &Common) -> Result<Outcome> {
    let ctx = context(common, Format::Csv)?;
    let spec = require_model(&ctx)?;
    let dg = digest("quasi-check", json!({ "i": starts, "t_grid": t_grid, "trunc": trunc, "tol": tol, "floor": floor }), &ctx);
    let mut rows = Vec::new();
    let mut failed = false;
    for &i in starts {
        let q = quasi_stationarity_check(&spec, i, t_grid, trunc, tol, floor).map_err(|e| invalid(e.to_string()))?;
        failed |= q.max_rel_error > tol || !q.reliable;
        for &(t, err) in &q.per_time {
            rows.push([
                i.to_string(),
                format!("{t}"),
                format!("{err:e}"),
                format!("{:e}", q.deficit_x),
                format!("{:e}", q.deficit_tilde),
                q.reliable.to_string(),
            ]);
        }
    }
    let mut w = ctx.sink.open(&dg)?;
    w.header(&["i", "t", "max_rel_error", "deficit_x", "deficit_tilde", "reliable"])?;
    for r in &rows {
        w.row(r)?;
    }
    w.finish()?;
    Ok(Outcome { tolerance_failed: failed })
}

fn cmd_verify(suite: &str, common: &Common) -> Result<Outcome> {
    let ctx = context(common, Format::Json)?;
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![Suite::parse(suite).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
            invalid(format!("unknown suite {suite:?}; expected one of {} or all", names.join(", ")))
        })?]
    };
    let mut failed = false;
    let mut reports = Vec::new();
    for s in suites {
        let rep = run_suite(s, ctx.config.model.as_ref(), &ctx.config.params, ctx.seed).map_err(|e| match e {
            dupdiv::stats::StatError::RegimeMismatch(_) | dupdiv::stats::StatError::InvalidArgument(_) => invalid(e.to_string()),
            dupdiv::stats::StatError::Model(_) => invalid(e.to_string()),
            other => anyhow!(other),
        })?;
        match rep.status {
            Status::Fail => {
                failed = true;
                for c in rep.checks.iter().filter(|c| !c.pass) {
                    eprintln!("{}: {} = {} (needs {} {})", rep.experiment, c.name, c.value, c.relation, c.tolerance);
                }
            }
            Status::Inconclusive => eprintln!("{}: inconclusive; see notes in the report", rep.experiment),
            Status::Pass => {}
        }
        reports.push(rep);
    }
    let text = if reports.len() == 1 {
        reports[0].to_json()
    } else {
        serde_json::to_string_pretty(&reports).context("serializing reports")?
    };
    ctx.sink.write_all(&format!("{text}\n"))?;
    Ok(Outcome { tolerance_failed: failed })
}

#[allow(clippy::too_many_arguments)]
fn cmd_couple(
    kind: CoupleKind,
    j0: u64,
    m0: u64,
    jumps: usize,
    pairs: u64,
    m: u64,
    b: f64,
    phi: f64,
    m_end: Option<u64>,
    common: &Common,
) -> Result<Outcome> {
    let ctx = context(common, Format::Csv)?;
    let args = json!({ "kind": kind, "j0": j0, "m0": m0, "jumps": jumps, "pairs": pairs, "m": m, "b": b, "phi": phi, "m_end": m_end });
    let dg = digest("couple", args, &ctx);
    match kind {
        CoupleKind::TimeShift => {
            let spec = require_model(&ctx)?;
            let built = (0..pairs)
                .into_par_iter()
                .map(|i| build_coupled_pair(&spec, j0, m0, jumps, ctx.seed, i))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| invalid(e.to_string()))?;
            let mut w = ctx.sink.open(&dg)?;
            w.header(&["pair", "n", "state", "s", "s_tilde", "size", "delta"])?;
            for (i, pair) in built.iter().enumerate() {
                for n in 0..=pair.jumps() {
                    w.row(&[
                        i.to_string(),
                        n.to_string(),
                        pair.states[n].to_string(),
                        format!("{}", pair.s[n]),
                        format!("{}", pair.s_tilde[n]),
                        format!("{}", pair.sizes[n]),
                        format!("{}", pair.delta_n(n)),
                    ])?;
                }
            }
            w.finish()?;
        }
        CoupleKind::Quantile => {
            let mut rng = dupdiv::rng::stream_rng(ctx.seed, 0, dupdiv::rng::Stream::Coupling);
            let mut w = ctx.sink.open(&dg)?;
            w.header(&["sample", "e_b", "v", "landing"])?;
            for i in 0..pairs {
                let d = quantile_couple(m, 0.0, b, rng.random::<f64>(), phi).map_err(|e| invalid(e.to_string()))?;
                w.row(&[i.to_string(), format!("{}", d.e_b), format!("{}", d.v), format!("{}", d.landing())])?;
            }
            w.finish()?;
        }
        CoupleKind::Rewiring => {
            let spec = require_model(&ctx)?;
            let end = m_end.unwrap_or(100 * m0);
            let outcomes = (0..pairs)
                .into_par_iter()
                .map(|i| simulate_rewiring_pair(&spec, j0, m0, end, ctx.seed, i))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| invalid(e.to_string()))?;
            let mut w = ctx.sink.open(&dg)?;
            w.header(&["pair", "diverged", "diverged_at", "state"])?;
            for (i, o) in outcomes.iter().enumerate() {
                w.row(&[
                    i.to_string(),
                    o.diverged.to_string(),
                    o.diverged_at.map_or(String::new(), |s| s.to_string()),
                    o.state.to_string(),
                ])?;
            }
            w.finish()?;
        }
    }
    Ok(Outcome::ok())
}
