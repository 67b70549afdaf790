//! Seeded experiment runner.
//!
//! An experiment is described by a TOML config (schema below), run under a
//! master seed, and emits plot-ready CSV: per-repetition draw files, a
//! summary table, tuning traces, and ACF series. Reruns with the same
//! config and seed are byte-identical when wall-time recording is turned
//! off (`record_wall_time = false`); with it on, only the timing columns
//! differ.
//!
//! ```toml
//! [model]
//! name = "sv_latent"        # std_normal | mvn_ar1 | sv_latent | cox_latent
//! t = 200
//! beta = 0.65
//! sigma = 0.15
//! phi = 0.98
//! data_seed = 7
//!
//! [sampler]
//! method = "hams_a"
//! epsilon = 0.5
//!
//! [run]
//! burn_in = 2000
//! n_collect = 2000
//! repetitions = 3
//! precondition = true
//! seed = 1234
//!
//! [tuning]                  # optional; enables burn-in adaptation
//! window = 250
//!
//! [bench]                   # optional; drives the bench subcommand
//! methods = ["hams_a", "hams_b", "udl", "pmala", "pmala_star", "rwm"]
//! ```
//!
//! Unknown keys anywhere in the config are rejected.

mod output;

pub use output::{
    read_draws_csv, ChainRecordRow, FileHeader, RepSummaryRow, SummaryRow,
};

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::diagnostics::{acf, summarize_chain};
use crate::error::{Error, Result};
use crate::models::{
    simulate_cox_data, simulate_sv_data, sv_closed_form_covariance, CoxLatentTarget, MvnTarget,
    SvLatentTarget, SvParams,
};
use crate::precondition::Preconditioner;
use crate::rng::RngStream;
use crate::samplers::driver::{ChainDriver, Method, MethodConfig};
use crate::target::{AugmentedState, Target};
use crate::tuning::{tune_chain, TuningPolicy};

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub sigma2: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub data_seed: Option<u64>,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub method: String,
    pub epsilon: f64,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub nleap: Option<usize>,
}

fn default_reps() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_acf_lag() -> usize {
    100
}
fn default_cutoff() -> usize {
    3000
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub burn_in: usize,
    pub n_collect: usize,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default)]
    pub precondition: bool,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
    /// Per-iteration draw files can dominate disk usage on large benches;
    /// summaries and traces are always written.
    #[serde(default = "default_true")]
    pub write_draws: bool,
    #[serde(default)]
    pub acf_coords: Vec<usize>,
    #[serde(default = "default_acf_lag")]
    pub acf_max_lag: usize,
    #[serde(default = "default_cutoff")]
    pub ess_cutoff: usize,
}

#[derive(Clone, Debug, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSpec {
    #[serde(default)]
    pub target_rate: Option<f64>,
    #[serde(default)]
    pub band_halfwidth: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub window: Option<usize>,
}

impl TuningSpec {
    /// Materialize the policy; RWM defaults to the 30% target when no
    /// explicit rate is configured.
    pub fn policy_for(&self, method: Method) -> TuningPolicy {
        let base = if method == Method::Rwm { TuningPolicy::rwm() } else { TuningPolicy::default() };
        TuningPolicy {
            target_rate: self.target_rate.unwrap_or(base.target_rate),
            band_halfwidth: self.band_halfwidth.unwrap_or(base.band_halfwidth),
            delta: self.delta.unwrap_or(base.delta),
            window: self.window.unwrap_or(base.window),
        }
    }
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub methods: Vec<String>,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub sampler: Option<SamplerSpec>,
    pub run: RunSpec,
    #[serde(default)]
    pub tuning: Option<TuningSpec>,
    #[serde(default)]
    pub bench: Option<BenchSpec>,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
}

/// Short hash of the canonical JSON form of the config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// Model building
// ---------------------------------------------------------------------------

/// A target with everything an experiment needs around it.
pub struct BuiltModel {
    pub name: String,
    pub target: Box<dyn Target>,
    /// Mass-matrix preconditioner from the model's expected Hessian.
    pub precond: Option<Preconditioner>,
    /// Prior covariance for pCNL, where the model has a Gaussian-prior
    /// decomposition.
    pub pcnl_prior: Option<Preconditioner>,
    pub init_x: DVector<f64>,
}

fn need<T: Copy>(v: Option<T>, what: &str, model: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("model '{model}' needs field '{what}'")))
}

/// Build the target named by the spec, simulating data where the model
/// calls for it. `with_pcnl` controls whether the (possibly expensive)
/// prior factorization is prepared.
pub fn build_model(spec: &ModelSpec, precondition: bool, with_pcnl: bool) -> Result<BuiltModel> {
    let data_seed = spec.data_seed.unwrap_or(1);
    let (target, pcnl_prior): (Box<dyn Target>, Option<Preconditioner>) = match spec.name.as_str()
    {
        "std_normal" => {
            let k = need(spec.dim, "dim", "std_normal")?;
            let t = MvnTarget::standard(k);
            let prior = with_pcnl.then(|| Preconditioner::identity(k));
            (Box::new(t), prior)
        }
        "mvn_ar1" => {
            let k = need(spec.dim, "dim", "mvn_ar1")?;
            let rho = spec.rho.unwrap_or(0.9);
            let t = MvnTarget::ar1(k, rho);
            let prior = if with_pcnl {
                Some(Preconditioner::from_covariance(t.covariance())?)
            } else {
                None
            };
            (Box::new(t), prior)
        }
        "sv_latent" => {
            let t_len = need(spec.t, "t", "sv_latent")?;
            let params = SvParams::new(
                spec.beta.unwrap_or(0.65),
                spec.sigma.unwrap_or(0.15),
                spec.phi.unwrap_or(0.98),
            )?;
            let mut rng = RngStream::new(data_seed, 0);
            let (_x, y) = simulate_sv_data(t_len, params.beta, params.sigma, params.phi, &mut rng)?;
            let target = SvLatentTarget::new(&y, &params)?;
            let prior = if with_pcnl {
                let c = sv_closed_form_covariance(t_len, params.sigma, params.phi);
                Some(Preconditioner::from_covariance(&c)?)
            } else {
                None
            };
            (Box::new(target), prior)
        }
        "cox_latent" => {
            let m = need(spec.m, "m", "cox_latent")?;
            let sigma2 = spec.sigma2.unwrap_or(1.91);
            let beta = spec.beta.unwrap_or(0.3);
            let mu = spec.mu.unwrap_or(126f64.ln() - 0.5 * 1.91);
            let mut rng = RngStream::new(data_seed, 0);
            let (_x, y) = simulate_cox_data(m, sigma2, beta, mu, &mut rng)?;
            let target = CoxLatentTarget::new(m, sigma2, beta, mu, &y)?;
            let prior = if with_pcnl {
                let c = crate::models::cox_covariance(m, sigma2, beta)?;
                Some(Preconditioner::from_covariance(&c)?)
            } else {
                None
            };
            (Box::new(target), prior)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown model '{other}' (expected std_normal, mvn_ar1, sv_latent, cox_latent)"
            )))
        }
    };
    let precond = if precondition {
        let m = target.expected_hessian().ok_or_else(|| {
            Error::Config(format!("model '{}' offers no expected Hessian", spec.name))
        })?;
        Some(Preconditioner::from_mass(m)?)
    } else {
        None
    };
    let init_x = DVector::zeros(target.dim());
    Ok(BuiltModel { name: spec.name.clone(), target, precond, pcnl_prior, init_x })
}

fn method_config(spec: &SamplerSpec, method: Method, precondition: bool) -> MethodConfig {
    let mut cfg = MethodConfig::new(method, spec.epsilon);
    if let Some(n) = spec.nleap {
        cfg = cfg.with_nleap(n);
    }
    // Without preconditioning the carryover is pinned (0.76 matches long
    // leapfrog trajectories); with it, the default translation from the
    // step size applies unless the config pins a value.
    match spec.c {
        Some(c) => cfg = cfg.with_carryover(c),
        None if !precondition => cfg = cfg.with_carryover(0.76),
        None => {}
    }
    cfg
}

// ---------------------------------------------------------------------------
// Chain execution
// ---------------------------------------------------------------------------

/// Everything measured from one repetition of one method.
pub struct ChainRun {
    pub method: Method,
    pub rep: usize,
    pub rows: Vec<ChainRecordRow>,
    pub accepted: usize,
    pub iterations: usize,
    pub epsilon: f64,
    pub tune_trace: Vec<(f64, f64)>,
    pub wall_time: f64,
    pub ess: crate::diagnostics::EssReport,
}

impl ChainRun {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.iterations as f64
    }
}

/// Run burn-in (with optional tuning) plus collection for one chain.
pub fn run_chain(
    built: &BuiltModel,
    spec: &SamplerSpec,
    run: &RunSpec,
    tuning: Option<&TuningSpec>,
    method: Method,
    rep: usize,
    rng: &mut RngStream,
) -> Result<ChainRun> {
    let cfg = method_config(spec, method, run.precondition);
    let precond_for_method = if method == Method::Pcnl {
        Some(built.pcnl_prior.as_ref().ok_or_else(|| {
            Error::Config(format!("model '{}' has no pCNL prior covariance", built.name))
        })?)
    } else {
        built.precond.as_ref()
    };
    let u0 = rng.standard_normal_vector(built.target.dim())?;
    let init = AugmentedState::new(built.init_x.clone(), u0)?;
    let mut driver = ChainDriver::new(cfg, built.target.as_ref(), precond_for_method, init)?;

    // burn-in, optionally adapting the step size per window
    let mut tune_trace = Vec::new();
    match tuning {
        Some(tspec) if run.burn_in > 0 => {
            let policy = tspec.policy_for(method);
            if run.burn_in < policy.window {
                return Err(Error::Config(format!(
                    "burn_in {} is shorter than one tuning window {}",
                    run.burn_in, policy.window
                )));
            }
            let outcome = tune_chain(
                |eps, r| {
                    driver.set_epsilon(eps);
                    driver.step(r).map(|i| i.accepted)
                },
                &policy,
                spec.epsilon,
                run.burn_in,
                rng,
            )?;
            driver.set_epsilon(outcome.epsilon);
            tune_trace = outcome.trace;
        }
        _ => {
            for _ in 0..run.burn_in {
                driver.step(rng)?;
            }
        }
    }

    // collection
    let started = Instant::now();
    let mut rows = Vec::with_capacity(run.n_collect);
    let mut accepted = 0usize;
    for iter in 0..run.n_collect {
        let info = driver.step(rng)?;
        accepted += info.accepted as usize;
        let x = driver.current_x();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                iteration: iter,
                detail: format!("{} produced a non-finite draw", method.name()),
            });
        }
        let time_s =
            if run.record_wall_time { started.elapsed().as_secs_f64() } else { 0.0 };
        rows.push(ChainRecordRow { iter, accepted: info.accepted, log_rho: info.log_rho, time_s, x });
    }
    let wall_time = if run.record_wall_time { started.elapsed().as_secs_f64() } else { 0.0 };

    let draws: Vec<DVector<f64>> = rows.iter().map(|r| r.x.clone()).collect();
    let ess = summarize_chain(&draws, wall_time, run.ess_cutoff)?;
    Ok(ChainRun {
        method,
        rep,
        rows,
        accepted,
        iterations: run.n_collect,
        epsilon: driver.epsilon(),
        tune_trace,
        wall_time,
        ess,
    })
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

/// In-memory results of a bench/sample invocation.
pub struct BenchResult {
    pub summary: Vec<SummaryRow>,
    pub reps: Vec<RepSummaryRow>,
    /// `per_method_min_ess[m][r]` is the min-ESS of repetition `r`.
    pub per_method_min_ess: Vec<(Method, Vec<f64>)>,
    pub out_dir: PathBuf,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if values.is_empty() {
        f64::NAN
    } else if values.len() % 2 == 1 {
        values[values.len() / 2]
    } else {
        0.5 * (values[values.len() / 2 - 1] + values[values.len() / 2])
    }
}

/// Run `methods` by `repetitions`, write all output files under `out_dir`,
/// and return the aggregate. Deterministic given the master seed: chain
/// `(method_index, rep)` draws from stream `method_index * 10_000 + rep + 1`
/// of the master seed (stream 0 is reserved for data simulation).
pub fn run_methods(
    cfg: &ExperimentConfig,
    methods: &[Method],
    out_dir: &Path,
) -> Result<BenchResult> {
    std::fs::create_dir_all(out_dir)?;
    for (i, m) in methods.iter().enumerate() {
        if methods[..i].contains(m) {
            return Err(Error::Config(format!("method '{}' listed twice", m.name())));
        }
    }
    let spec = cfg
        .sampler
        .clone()
        .unwrap_or(SamplerSpec { method: "hams_a".into(), epsilon: 0.5, c: None, nleap: None });
    let with_pcnl = methods.contains(&Method::Pcnl);
    let built = build_model(&cfg.model, cfg.run.precondition, with_pcnl)?;
    let hash = config_hash(cfg);
    let header = FileHeader::new(&hash, cfg.run.seed);

    let mut jobs: Vec<(usize, Method, usize)> = Vec::new();
    for (mi, m) in methods.iter().enumerate() {
        for rep in 0..cfg.run.repetitions.max(1) {
            jobs.push((mi, *m, rep));
        }
    }

    let runs: Result<Vec<ChainRun>> = jobs
        .par_iter()
        .map(|&(mi, method, rep)| {
            let stream = (mi as u64) * 10_000 + rep as u64 + 1;
            let mut rng = RngStream::new(cfg.run.seed, stream);
            run_chain(&built, &spec, &cfg.run, cfg.tuning.as_ref(), method, rep, &mut rng)
        })
        .collect();
    let runs = runs?;

    // files: draws, tuning trace, acf per (method, rep)
    for r in &runs {
        let tag = format!("{}_rep{}", r.method.name(), r.rep);
        if cfg.run.write_draws {
            output::write_draws_csv(&out_dir.join(format!("draws_{tag}.csv")), &header, &r.rows)?;
        }
        if !r.tune_trace.is_empty() {
            output::write_tuning_csv(
                &out_dir.join(format!("tuning_{tag}.csv")),
                &header,
                &r.tune_trace,
            )?;
        }
        let coords: Vec<usize> = if cfg.run.acf_coords.is_empty() {
            vec![0]
        } else {
            cfg.run.acf_coords.clone()
        };
        let max_lag = cfg.run.acf_max_lag.min(r.rows.len().saturating_sub(2)).max(1);
        let mut series = Vec::new();
        for &c in &coords {
            if c >= built.target.dim() {
                return Err(Error::Config(format!(
                    "acf coordinate {c} out of range for dimension {}",
                    built.target.dim()
                )));
            }
            let col: Vec<f64> = r.rows.iter().map(|row| row.x[c]).collect();
            series.push(acf(&col, max_lag)?);
        }
        output::write_acf_csv(&out_dir.join(format!("acf_{tag}.csv")), &header, &coords, &series)?;
    }

    // summaries
    let mut reps = Vec::new();
    for r in &runs {
        reps.push(RepSummaryRow {
            method: r.method.name().to_string(),
            rep: r.rep,
            time_s: r.wall_time,
            ess_min: r.ess.min,
            ess_median: r.ess.median,
            ess_max: r.ess.max,
            min_ess_per_time: r.ess.min_ess_per_second,
            acceptance_rate: r.acceptance_rate(),
            epsilon: r.epsilon,
        });
    }
    let mut summary = Vec::new();
    let mut per_method_min_ess = Vec::new();
    for m in methods {
        let mine: Vec<&ChainRun> = runs.iter().filter(|r| r.method == *m).collect();
        let mut mins: Vec<f64> = mine.iter().map(|r| r.ess.min).collect();
        let mut meds: Vec<f64> = mine.iter().map(|r| r.ess.median).collect();
        let mut maxs: Vec<f64> = mine.iter().map(|r| r.ess.max).collect();
        let total_time: f64 = mine.iter().map(|r| r.wall_time).sum();
        let mean_time = total_time / mine.len() as f64;
        let total_accepted: usize = mine.iter().map(|r| r.accepted).sum();
        let total_iters: usize = mine.iter().map(|r| r.iterations).sum();
        per_method_min_ess.push((*m, mins.clone()));
        let ess_min = median(&mut mins);
        let ess_median = median(&mut meds);
        let ess_max = median(&mut maxs);
        summary.push(SummaryRow {
            method: m.name().to_string(),
            time_s: mean_time,
            ess_min,
            ess_median,
            ess_max,
            min_ess_per_time: if mean_time > 0.0 { ess_min / mean_time } else { 0.0 },
            acceptance_rate: total_accepted as f64 / total_iters as f64,
        });
    }
    output::write_summary_csv(&out_dir.join("summary.csv"), &header, &summary)?;
    output::write_rep_summary_csv(&out_dir.join("summary_reps.csv"), &header, &reps)?;

    Ok(BenchResult { summary, reps, per_method_min_ess, out_dir: out_dir.to_path_buf() })
}

/// `sample`: one method (from `[sampler]`), full pipeline.
pub fn run_sample(cfg: &ExperimentConfig, out_dir: &Path) -> Result<BenchResult> {
    let spec = cfg
        .sampler
        .as_ref()
        .ok_or_else(|| Error::Config("sample needs a [sampler] section".into()))?;
    let method = Method::parse(&spec.method)?;
    run_methods(cfg, &[method], out_dir)
}

/// `bench`: the method list from `[bench]`.
pub fn run_bench(cfg: &ExperimentConfig, out_dir: &Path) -> Result<BenchResult> {
    let bench = cfg
        .bench
        .as_ref()
        .ok_or_else(|| Error::Config("bench needs a [bench] section".into()))?;
    let methods: Result<Vec<Method>> = bench.methods.iter().map(|m| Method::parse(m)).collect();
    run_methods(cfg, &methods?, out_dir)
}

/// `tune`: burn-in adaptation only; writes the trace and returns
/// `(final_epsilon, final_rate)`.
pub fn run_tune(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(f64, f64)> {
    std::fs::create_dir_all(out_dir)?;
    let spec = cfg
        .sampler
        .as_ref()
        .ok_or_else(|| Error::Config("tune needs a [sampler] section".into()))?;
    let method = Method::parse(&spec.method)?;
    let tspec = cfg.tuning.clone().unwrap_or_default();
    let built = build_model(&cfg.model, cfg.run.precondition, method == Method::Pcnl)?;
    let mcfg = method_config(spec, method, cfg.run.precondition);
    let precond_for_method = if method == Method::Pcnl {
        built.pcnl_prior.as_ref()
    } else {
        built.precond.as_ref()
    };
    let mut rng = RngStream::new(cfg.run.seed, 1);
    let u0 = rng.standard_normal_vector(built.target.dim())?;
    let init = AugmentedState::new(built.init_x.clone(), u0)?;
    let mut driver = ChainDriver::new(mcfg, built.target.as_ref(), precond_for_method, init)?;
    let policy = tspec.policy_for(method);
    let outcome = tune_chain(
        |eps, r| {
            driver.set_epsilon(eps);
            driver.step(r).map(|i| i.accepted)
        },
        &policy,
        spec.epsilon,
        cfg.run.burn_in,
        &mut rng,
    )?;
    let header = FileHeader::new(&config_hash(cfg), cfg.run.seed);
    output::write_tuning_csv(
        &out_dir.join(format!("tuning_{}.csv", method.name())),
        &header,
        &outcome.trace,
    )?;
    let final_rate = outcome.trace.last().map(|t| t.1).unwrap_or(0.0);
    Ok((outcome.epsilon, final_rate))
}

/// `diagnose`: ESS/ACF report from an existing draws file.
pub struct DiagnoseReport {
    pub header: FileHeader,
    pub ess: crate::diagnostics::EssReport,
    pub acceptance_rate: f64,
}

pub fn run_diagnose(draws_path: &Path, cutoff: usize) -> Result<DiagnoseReport> {
    let (header, draws, accepted, last_time) = read_draws_csv(draws_path)?;
    let n = draws.len();
    if n == 0 {
        return Err(Error::Parse("draws file holds no rows".into()));
    }
    let rate = accepted.iter().filter(|&&a| a).count() as f64 / n as f64;
    let ess = summarize_chain(&draws, last_time, cutoff)?;
    Ok(DiagnoseReport { header, ess, acceptance_rate: rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = r#"
        [model]
        name = "mvn_ar1"
        dim = 4
        rho = 0.7
        [sampler]
        method = "hams_a"
        epsilon = 0.6
        [run]
        burn_in = 300
        n_collect = 400
        repetitions = 2
        precondition = true
        seed = 99
        record_wall_time = false
        [tuning]
        window = 100
    "#;

    #[test]
    fn config_round_trip_and_unknown_key_rejection() {
        let cfg = parse_config(CONFIG).unwrap();
        assert_eq!(cfg.run.repetitions, 2);
        assert!(!cfg.run.record_wall_time);
        let bad = format!("{CONFIG}\nnonsense = 3");
        assert!(parse_config(&bad).is_err());
        let bad2 = CONFIG.replace("rho = 0.7", "rho = 0.7\ntypo_field = 1");
        assert!(parse_config(&bad2).is_err());
    }

    #[test]
    fn sample_writes_deterministic_outputs() {
        let cfg = parse_config(CONFIG).unwrap();
        let dir1 = std::env::temp_dir().join("hams_exp_det_1");
        let dir2 = std::env::temp_dir().join("hams_exp_det_2");
        for d in [&dir1, &dir2] {
            if d.exists() {
                std::fs::remove_dir_all(d).unwrap();
            }
        }
        run_sample(&cfg, &dir1).unwrap();
        run_sample(&cfg, &dir2).unwrap();
        for name in
            ["draws_hams_a_rep0.csv", "draws_hams_a_rep1.csv", "summary.csv", "summary_reps.csv"]
        {
            let a = std::fs::read(dir1.join(name)).unwrap();
            let b = std::fs::read(dir2.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
        std::fs::remove_dir_all(&dir1).ok();
        std::fs::remove_dir_all(&dir2).ok();
    }

    #[test]
    fn diagnose_reads_back_what_sample_wrote() {
        let cfg = parse_config(CONFIG).unwrap();
        let dir = std::env::temp_dir().join("hams_exp_diag");
        if dir.exists() {
            std::fs::remove_dir_all(&dir).unwrap();
        }
        let result = run_sample(&cfg, &dir).unwrap();
        let rep = run_diagnose(&dir.join("draws_hams_a_rep0.csv"), 3000).unwrap();
        let from_run = &result.reps[0];
        assert!((rep.ess.min - from_run.ess_min).abs() <= 1e-9 * from_run.ess_min);
        assert!((rep.acceptance_rate - from_run.acceptance_rate).abs() <= 1e-12);
        std::fs::remove_dir_all(&dir).ok();
    }
}
