use serde::{Deserialize, Serialize};

use super::*;
use crate::forward::quasi_stationarity_check;
use crate::model::{classify, ModelConfig, ModelSpec, Process, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Absorption,
    Clt,
    WLimit,
    Stationary,
    Quasi,
    Coupling,
    Rewiring,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Absorption, Suite::Clt, Suite::WLimit, Suite::Stationary, Suite::Quasi, Suite::Coupling, Suite::Rewiring];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Absorption => "absorption",
            Suite::Clt => "clt",
            Suite::WLimit => "w-limit",
            Suite::Stationary => "stationary",
            Suite::Quasi => "quasi",
            Suite::Coupling => "coupling",
            Suite::Rewiring => "rewiring",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    /// Model used when the config does not give one.
    pub fn default_model(self) -> ModelConfig {
        match self {
            Suite::Stationary => ModelConfig::basic(0.2, 0.0),
            Suite::Quasi => ModelConfig::basic(0.3, 0.0),
            Suite::Rewiring => {
                let mut m = ModelConfig::basic(0.5, 0.2);
                m.r = Some(1.0);
                m
            }
            _ => ModelConfig::basic(0.4, 0.55),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbsorptionParams {
    pub x0_list: Vec<u64>,
    pub horizons: Vec<f64>,
    pub paths: u64,
    pub threshold: f64,
    pub event_cap: u64,
}

impl Default for AbsorptionParams {
    fn default() -> Self {
        Self { x0_list: vec![1, 2, 4, 8], horizons: vec![5.0, 10.0, 20.0, 40.0], paths: 4000, threshold: 50.0, event_cap: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CltParams {
    pub x0: u64,
    pub t: f64,
    pub paths: u64,
    pub tolerance: f64,
    pub discrete_m: u64,
    pub discrete_paths: u64,
    pub discrete_tolerance: f64,
    pub anchor_paths: u64,
}

impl Default for CltParams {
    fn default() -> Self {
        Self {
            x0: 1,
            t: 100.0,
            paths: 50_000,
            tolerance: 0.02,
            discrete_m: 1_000_000,
            discrete_paths: 50_000,
            discrete_tolerance: 0.03,
            anchor_paths: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WLimitParams {
    pub x0: u64,
    pub horizons: Vec<f64>,
    pub paths: u64,
    pub threshold: f64,
    pub discrete_sizes: Vec<u64>,
    pub discrete_paths: u64,
    pub discrete_threshold: f64,
}

impl Default for WLimitParams {
    fn default() -> Self {
        Self {
            x0: 1,
            horizons: vec![40.0, 80.0, 160.0],
            paths: 10_000,
            threshold: 50.0,
            discrete_sizes: vec![1_000, 10_000, 100_000],
            discrete_paths: 10_000,
            discrete_threshold: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationaryParams {
    pub burn_in: u64,
    pub run_len: u64,
    pub k_max: usize,
    pub t: f64,
    pub mc_paths: u64,
    pub discrete_m: u64,
    pub discrete_paths: u64,
    pub occupation_tolerance: f64,
    pub solver_tolerance: f64,
    pub mc_tolerance: f64,
    pub discrete_tolerance: f64,
}

impl Default for StationaryParams {
    fn default() -> Self {
        Self {
            burn_in: 10_000,
            run_len: 10_000_000,
            k_max: 600,
            t: 60.0,
            mc_paths: 100_000,
            discrete_m: 10_000_000_000_000,
            discrete_paths: 20_000,
            occupation_tolerance: 0.01,
            solver_tolerance: 1e-3,
            mc_tolerance: 0.01,
            discrete_tolerance: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuasiParams {
    pub starts: Vec<usize>,
    pub times: Vec<f64>,
    pub k_max: usize,
    pub tolerance: f64,
    /// Entries where both sides fall below this are skipped.
    pub floor: f64,
}

impl Default for QuasiParams {
    fn default() -> Self {
        Self { starts: vec![1, 3, 5], times: vec![0.5, 1.0, 2.0, 3.0], k_max: 400, tolerance: 1e-6, floor: 1e-250 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingParams {
    /// (m, b) cases for the mean check.
    pub cases: Vec<(u64, f64)>,
    pub samples: u64,
    pub slope_sizes: Vec<u64>,
    pub slope_rate: f64,
    pub slope_samples: u64,
    pub slope_target: f64,
    pub slope_tolerance: f64,
    pub phi: f64,
    pub pairs: u64,
    pub jumps: usize,
    pub n0s: Vec<usize>,
}

impl Default for CouplingParams {
    fn default() -> Self {
        Self {
            cases: vec![(10, 0.5), (1_000, 0.5), (100_000, 0.9)],
            samples: 1_000_000,
            slope_sizes: vec![100, 1_000, 10_000, 100_000],
            slope_rate: 0.5,
            slope_samples: 200_000,
            slope_target: -2.0,
            slope_tolerance: 0.1,
            phi: 0.95,
            pairs: 1_000,
            jumps: 4_000,
            n0s: vec![10, 100, 1_000],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewiringParams {
    pub j1: u64,
    pub m1s: Vec<u64>,
    pub horizon_factor: u64,
    pub pairs: u64,
    pub max_slope: f64,
    pub tv_k_max: usize,
    pub tv_m_max: usize,
}

impl Default for RewiringParams {
    fn default() -> Self {
        Self { j1: 2, m1s: vec![100, 1_000, 10_000], horizon_factor: 100, pairs: 20_000, max_slope: -0.8, tv_k_max: 50, tv_m_max: 1_000 }
    }
}

/// Experiment parameters for every suite; omitted sections take the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteParams {
    pub absorption: AbsorptionParams,
    pub clt: CltParams,
    pub w_limit: WLimitParams,
    pub stationary: StationaryParams,
    pub quasi: QuasiParams,
    pub coupling: CouplingParams,
    pub rewiring: RewiringParams,
}

#[derive(Serialize)]
struct DigestInput<'a, T: Serialize> {
    suite: &'static str,
    model: &'a ModelConfig,
    params: &'a T,
}

/// Runs one suite and returns its report.
pub fn run_suite(suite: Suite, model: Option<&ModelConfig>, params: &SuiteParams, seed: u64) -> Result<ExperimentReport, StatError> {
    let default_model = suite.default_model();
    let model = model.unwrap_or(&default_model);
    let spec = model.build()?;
    let digest = match suite {
        Suite::Absorption => config_digest(&DigestInput { suite: suite.name(), model, params: &params.absorption }),
        Suite::Clt => config_digest(&DigestInput { suite: suite.name(), model, params: &params.clt }),
        Suite::WLimit => config_digest(&DigestInput { suite: suite.name(), model, params: &params.w_limit }),
        Suite::Stationary => config_digest(&DigestInput { suite: suite.name(), model, params: &params.stationary }),
        Suite::Quasi => config_digest(&DigestInput { suite: suite.name(), model, params: &params.quasi }),
        Suite::Coupling => config_digest(&DigestInput { suite: suite.name(), model, params: &params.coupling }),
        Suite::Rewiring => config_digest(&DigestInput { suite: suite.name(), model, params: &params.rewiring }),
    };
    let mut rep = ExperimentReport::new(suite.name(), digest, seed);
    match suite {
        Suite::Absorption => absorption(&mut rep, &spec, &params.absorption, seed)?,
        Suite::Clt => clt(&mut rep, &spec, &params.clt, seed)?,
        Suite::WLimit => wlimit(&mut rep, &spec, &params.w_limit, seed)?,
        Suite::Stationary => stationary(&mut rep, &spec, &params.stationary, seed)?,
        Suite::Quasi => quasi(&mut rep, &spec, &params.quasi)?,
        Suite::Coupling => coupling(&mut rep, &spec, &params.coupling, seed)?,
        Suite::Rewiring => rewiring(&mut rep, &spec, &params.rewiring, seed)?,
    }
    Ok(rep)
}

fn absorption(rep: &mut ExperimentReport, spec: &ModelSpec, p: &AbsorptionParams, seed: u64) -> Result<(), StatError> {
    let x0 = *p.x0_list.first().ok_or(StatError::InvalidArgument("x0_list is empty"))?;
    let by_horizon = p
        .horizons
        .iter()
        .map(|&h| absorption_probability(spec, x0, h, p.threshold, p.paths, seed, p.event_cap))
        .collect::<Result<Vec<_>, _>>()?;
    let t_max = p.horizons.iter().copied().fold(0.0, f64::max);
    let by_x0 = p
        .x0_list
        .iter()
        .map(|&x| absorption_probability(spec, x, t_max, p.threshold, p.paths, seed.wrapping_add(x), p.event_cap))
        .collect::<Result<Vec<_>, _>>()?;
    rep.sample_size = p.paths * (p.horizons.len() + p.x0_list.len()) as u64;
    let horizon_trend = by_horizon.windows(2).all(|w| w[1].estimate >= w[0].estimate);
    rep.check(Check::holds("absorption nondecreasing in horizon", horizon_trend));
    let report = classify(spec, Process::XStar);
    if report.verdict == Verdict::Transient {
        let trend = by_x0.windows(2).all(|w| w[1].estimate <= w[0].ci_high);
        rep.check(Check::holds("absorption nonincreasing in x0", trend));
        rep.check(Check::at_least("survival at largest x0", 1.0 - by_x0.last().unwrap().estimate, 1e-9));
    } else {
        let last = by_horizon.last().unwrap();
        rep.check(Check::at_least("absorption upper CI at largest horizon", last.ci_high, 0.95));
    }
    rep.stat("verdict_x_star", report.verdict);
    rep.stat("horizons", &p.horizons);
    rep.stat("by_horizon", &by_horizon);
    rep.stat("x0_list", &p.x0_list);
    rep.stat("by_x0", &by_x0);
    rep.notes.push("survival beyond the horizon is not observed; estimates are upper bounds on survival".into());
    Ok(())
}

fn clt(rep: &mut ExperimentReport, spec: &ModelSpec, p: &CltParams, seed: u64) -> Result<(), StatError> {
    let cont = clt_test(spec, p.x0, p.t, p.paths, seed)?;
    let disc = clt_test_discrete(spec, 1, 1, p.discrete_m, p.discrete_paths, seed.wrapping_add(1))?;
    let anchor = berry_esseen_anchor(spec.beta(), spec.p(), p.t, p.anchor_paths, seed.wrapping_add(2))?;
    rep.sample_size = p.paths + p.discrete_paths + p.anchor_paths;
    rep.check(Check::at_most("continuous max deviation", cont.max_deviation, p.tolerance));
    rep.check(Check::at_most("discrete max deviation", disc.max_deviation, p.discrete_tolerance));
    rep.check(Check::at_most("Poisson anchor max deviation", anchor.max_deviation, anchor.tolerance));
    rep.stat("continuous", &cont);
    rep.stat("discrete", &disc);
    rep.stat("anchor", &anchor);
    rep.notes.push("targets use the plug-in survival fraction at the horizon".into());
    rep.notes.push("discrete chain starts at (j0, m0) = (1, 1) with the relaxed start".into());
    Ok(())
}

fn wlimit(rep: &mut ExperimentReport, spec: &ModelSpec, p: &WLimitParams, seed: u64) -> Result<(), StatError> {
    let cont = w_stabilization(spec, p.x0, &p.horizons, p.paths, seed, p.threshold)?;
    let disc = w_stabilization_discrete(spec, 1, 1, &p.discrete_sizes, p.discrete_paths, seed.wrapping_add(1), p.discrete_threshold)?;
    rep.sample_size = p.paths + p.discrete_paths;
    if !cont.conclusive || !disc.conclusive {
        rep.inconclusive("fewer than 100 survivors");
    } else {
        rep.check(Check::holds("continuous medians strictly decreasing", cont.strictly_decreasing));
        rep.check(Check::holds("discrete medians strictly decreasing", disc.strictly_decreasing));
    }
    rep.stat("continuous", &cont);
    rep.stat("discrete", &disc);
    rep.notes.push(format!(
        "survivors: X_T >= {} (continuous), Y_m >= {} (discrete) at the largest horizon",
        p.threshold, p.discrete_threshold
    ));
    Ok(())
}

fn stationary(rep: &mut ExperimentReport, spec: &ModelSpec, p: &StationaryParams, seed: u64) -> Result<(), StatError> {
    let occ = stationary_agreement(spec, p.burn_in, p.run_len, p.k_max, seed)?;
    let cond = conditional_agreement(spec, p.t, p.mc_paths, p.k_max, seed.wrapping_add(1))?;
    let disc = discrete_weighted_agreement(spec, p.discrete_m, p.discrete_paths, p.k_max, seed.wrapping_add(2))?;
    rep.sample_size = p.run_len + p.mc_paths + p.discrete_paths;
    rep.check(Check::at_most("occupation vs stationary sup-norm", occ, p.occupation_tolerance));
    rep.check(Check::at_most("conditional law at t, solver vs limit", cond.solver_sup, p.solver_tolerance));
    rep.check(Check::at_most("conditional law at t, Monte Carlo vs limit", cond.mc_sup, p.mc_tolerance));
    rep.check(Check::at_most("discrete weighted chain vs stationary", disc, p.discrete_tolerance));
    rep.stat("occupation_sup", occ);
    rep.stat("conditional", &cond);
    rep.stat("discrete_sup", disc);
    rep.notes.push("slot K is excluded from sup-norms: simulations lump states >= K there, the solver reflects".into());
    rep.notes.push("the discrete chain advances on the clock ln m, so discrete_m sets an effective horizon near ln(discrete_m)".into());
    Ok(())
}

fn quasi(rep: &mut ExperimentReport, spec: &ModelSpec, p: &QuasiParams) -> Result<(), StatError> {
    let mut worst = 0.0f64;
    let mut per_start = Vec::new();
    for &i in &p.starts {
        let q = quasi_stationarity_check(spec, i, &p.times, p.k_max, p.tolerance, p.floor)?;
        worst = worst.max(q.max_rel_error);
        per_start.push((i, q));
    }
    rep.check(Check::at_most("max relative error", worst, p.tolerance));
    rep.stat("per_start", &per_start);
    Ok(())
}

fn coupling(rep: &mut ExperimentReport, spec: &ModelSpec, p: &CouplingParams, seed: u64) -> Result<(), StatError> {
    let mut means = Vec::new();
    for (i, &(m, b)) in p.cases.iter().enumerate() {
        let q = quantile_mean(m, b, p.phi, p.samples, seed.wrapping_add(i as u64))?;
        rep.check(Check::at_most(&format!("|z| for E V at m={m}, b={b}"), q.z_score.abs(), 4.0));
        rep.check(Check::at_most(&format!("sandwich violations at m={m}, b={b}"), q.sandwich_violations as f64, 0.0));
        means.push(q);
    }
    let slope = second_moment_slope(&p.slope_sizes, p.slope_rate, p.phi, p.slope_samples, seed.wrapping_add(100))?;
    rep.check(Check::at_most("|second-moment slope + 2|", (slope.slope - p.slope_target).abs(), p.slope_tolerance));
    let delta = delta_cauchy(spec, 1, 2, &p.n0s, p.jumps, p.pairs, seed.wrapping_add(200))?;
    rep.check(Check::holds("Y^(h)_t = X_(t + Delta(t)) on every pair", delta.identity_holds));
    rep.check(Check::holds(
        "median sup |Delta_n - Delta_n0| decreasing in n0",
        delta.complete_pairs >= 10 && delta.medians.windows(2).all(|w| w[1] < w[0]),
    ));
    rep.sample_size = p.samples * p.cases.len() as u64 + p.slope_samples * p.slope_sizes.len() as u64 + p.pairs;
    rep.stat("phi", p.phi);
    rep.stat("means", &means);
    rep.stat("second_moment", &slope);
    rep.stat("delta", &delta);
    Ok(())
}

fn rewiring(rep: &mut ExperimentReport, spec: &ModelSpec, p: &RewiringParams, seed: u64) -> Result<(), StatError> {
    let tv = kernel_tv_sweep(spec, p.tv_k_max, p.tv_m_max)?;
    let exp = rewiring_coupling_experiment(spec, p.j1, &p.m1s, p.horizon_factor, p.pairs, seed)?;
    rep.sample_size = p.pairs * p.m1s.len() as u64;
    rep.check(Check::at_most("rows above r(k+2)/(m(m+1))", tv.violations as f64, 0.0));
    rep.check(Check::at_most("max TV / r(2k+3)/(m(m+1))", tv.corrected_worst_ratio, 1.0));
    rep.check(Check::at_most("log-log slope of divergence fraction", exp.slope, p.max_slope));
    rep.check(Check::holds("divergence fraction nonincreasing in m1 (within CI)", exp.monotone));
    rep.stat("tv", &tv);
    rep.stat("divergence", &exp);
    Ok(())
}
