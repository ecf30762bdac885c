//! Monte Carlo experiment runner.
//!
//! Replication `r` of every grid point draws from `stream(master_seed, r)`,
//! so neighbouring grid points share random numbers and the output does not
//! depend on the number of worker threads.

use nalgebra::DVector;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{ChiSquared, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corr::{
    make_correlation, tau_profile, CorrelationMatrix, MvnSampler, ShiftProfile, StructureKind,
    StructureSpec,
};
use crate::dist::DistributionKind;
use crate::error::{Error, Result};
use crate::procedures::{
    pvalues_from_observations, PreparedProcedure, ProcedureId, Setting, StepUpResult,
};
use crate::regression::{
    KnockoffAnalysis, OlsAnalysis, PairedOptions, PairedProcedure, RegressionData, SRule,
    VarianceMode,
};
use crate::rng::{mix, stream, Stream};
use crate::shift::{self, null_tail_probability_ln, BoundFunction, CalibrationMethod};

pub const DEFAULT_REPLICATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Means,
    Varsel,
    Knockoff,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Means => "means",
            Scenario::Varsel => "varsel",
            Scenario::Knockoff => "knockoff",
        }
    }
}

/// Which of signal strength or null proportion is varied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Regime {
    FixedNull {
        #[serde(default = "default_null_frac")]
        null_frac: f64,
        #[serde(default = "default_mu_grid")]
        mu_grid: Vec<f64>,
    },
    FixedSignal {
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(default = "default_null_frac_grid")]
        null_frac_grid: Vec<f64>,
    },
}

fn default_null_frac() -> f64 {
    0.75
}
fn default_mu_grid() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0, 5.0]
}
fn default_mu() -> f64 {
    2.0
}
fn default_null_frac_grid() -> Vec<f64> {
    vec![0.5, 0.6, 0.7, 0.8, 0.9]
}

impl Default for Regime {
    fn default() -> Self {
        Regime::FixedNull {
            null_frac: default_null_frac(),
            mu_grid: default_mu_grid(),
        }
    }
}

impl Regime {
    /// `(mu, null_frac)` for every grid point.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self {
            Regime::FixedNull { null_frac, mu_grid } => {
                mu_grid.iter().map(|&m| (m, *null_frac)).collect()
            }
            Regime::FixedSignal { mu, null_frac_grid } => {
                null_frac_grid.iter().map(|&f| (*mu, f)).collect()
            }
        }
    }
}

/// Signs of the nonzero means or coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    #[default]
    Positive,
    Random,
}

/// A procedure name from either catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnyProcedure {
    Mean(ProcedureId),
    Paired(PairedProcedure),
}

impl std::fmt::Display for AnyProcedure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnyProcedure::Mean(p) => p.fmt(f),
            AnyProcedure::Paired(p) => p.fmt(f),
        }
    }
}

impl std::str::FromStr for AnyProcedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<ProcedureId>()
            .map(AnyProcedure::Mean)
            .or_else(|_| s.parse::<PairedProcedure>().map(AnyProcedure::Paired))
            .map_err(|_| Error::Config(format!("unknown procedure `{s}`")))
    }
}

/// A full experiment description. Optional fields are filled by
/// [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub d: usize,
    /// Sample size for the regression scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub structure: StructureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    /// Signal count; overrides the null fraction of the regime.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub procedures: Vec<String>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub variance: VarianceMode,
    /// Degrees of freedom of the variance estimate in the means scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<u32>,
    #[serde(default)]
    pub signs: SignMode,
    /// Redraw random structures (sparse, prefixed) every replication.
    #[serde(default)]
    pub resample_structure: bool,
    #[serde(default)]
    pub paired: PairedOptions,
}

fn default_alphas() -> Vec<f64> {
    vec![0.05]
}
fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, d: usize, structure: StructureKind) -> Self {
        ExperimentConfig {
            scenario,
            d,
            n: None,
            structure,
            regime: None,
            k: None,
            procedures: Vec::new(),
            alphas: default_alphas(),
            replications: DEFAULT_REPLICATIONS,
            seed: 0,
            variance: VarianceMode::Known,
            nu: None,
            signs: SignMode::Positive,
            resample_structure: false,
            paired: PairedOptions::default(),
        }
    }

    /// Fills scenario-dependent defaults and validates. The result is what
    /// gets echoed into the sidecar, so re-reading it reproduces the run.
    pub fn resolve(mut self) -> Result<Self> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.d < 2 {
            return cfg(format!("d must be at least 2, got {}", self.d));
        }
        if self.replications == 0 {
            return cfg("replications must be at least 1".into());
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return cfg(format!(
                "alphas must be nonempty and inside (0, 1): {:?}",
                self.alphas
            ));
        }
        match self.scenario {
            Scenario::Means => {
                if self.n.is_some() {
                    return cfg("`n` is only used by the varsel and knockoff scenarios".into());
                }
                if self.variance == VarianceMode::Estimated && self.nu.is_none() {
                    self.nu = Some(2 * self.d as u32);
                }
            }
            Scenario::Varsel | Scenario::Knockoff => {
                let n = self.n.ok_or_else(|| {
                    Error::Config(format!(
                        "missing field `n` for scenario {}",
                        self.scenario.name()
                    ))
                })?;
                let min = if self.scenario == Scenario::Knockoff {
                    2 * self.d
                } else {
                    self.d + 1
                };
                if n < min {
                    return cfg(format!(
                        "n = {n} too small for d = {} (need n >= {min})",
                        self.d
                    ));
                }
                if self.nu.is_some() {
                    return cfg("`nu` is only used by the means scenario".into());
                }
            }
        }
        if self.regime.is_none() {
            self.regime = Some(match self.scenario {
                Scenario::Knockoff => Regime::FixedNull {
                    null_frac: 0.8,
                    mu_grid: default_mu_grid(),
                },
                _ => Regime::default(),
            });
        }
        let regime = self.regime.as_ref().unwrap();
        let points = regime.points();
        if points.is_empty() {
            return cfg("regime grid is empty".into());
        }
        for &(mu, frac) in &points {
            if !mu.is_finite() {
                return cfg(format!("signal strength {mu} is not finite"));
            }
            if self.k.is_none() && !(frac > 0.0 && frac < 1.0) {
                return cfg(format!("null_frac {frac} must lie in (0, 1)"));
            }
        }
        if let Some(k) = self.k {
            if k > self.d {
                return cfg(format!("k = {k} exceeds d = {}", self.d));
            }
        }
        if self.procedures.is_empty() {
            self.procedures = match self.scenario {
                Scenario::Means | Scenario::Varsel => ProcedureId::catalog()
                    .iter()
                    .map(|p| p.to_string())
                    .collect(),
                Scenario::Knockoff => PairedProcedure::catalog()
                    .iter()
                    .filter(|&&p| p != PairedProcedure::Knockoff)
                    .map(|p| p.to_string())
                    .collect(),
            };
        }
        self.parsed_procedures()?;
        // validates parameters of the structure
        make_correlation(&StructureSpec::new(self.structure, self.d))
            .map_err(|e| Error::Config(format!("structure: {e}")))?;
        Ok(self)
    }

    pub fn parsed_procedures(&self) -> Result<Vec<AnyProcedure>> {
        self.procedures
            .iter()
            .map(|s| {
                let p: AnyProcedure = s.parse()?;
                match (self.scenario, p) {
                    (Scenario::Knockoff, AnyProcedure::Mean(_))
                    | (Scenario::Means | Scenario::Varsel, AnyProcedure::Paired(_)) => {
                        Err(Error::Config(format!(
                            "procedure `{s}` is not available in scenario {}",
                            self.scenario.name()
                        )))
                    }
                    _ => Ok(p),
                }
            })
            .collect()
    }

    fn signal_count(&self, null_frac: f64) -> usize {
        self.k
            .unwrap_or_else(|| (self.d as f64 * (1.0 - null_frac)).round() as usize)
    }
}

/// Aggregated result of one `(grid point, procedure, alpha)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub scenario: String,
    pub procedure: String,
    pub structure: String,
    pub rho: Option<f64>,
    pub d: usize,
    pub n: Option<usize>,
    pub mu: f64,
    pub null_frac: f64,
    pub alpha: f64,
    pub fdr_hat: f64,
    pub fdr_se: f64,
    pub power_hat: f64,
    pub power_se: f64,
    pub mean_rejections: f64,
    pub replications: usize,
    pub seed: u64,
    /// Set when the standard errors rest on a single replication.
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub cells: Vec<CellRecord>,
}

/// One replication's outcome for one procedure.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Outcome {
    pub fdp: f64,
    pub power: f64,
    pub rejections: usize,
}

impl Outcome {
    /// `V / max(R, 1)` and `|rejected & signals| / |signals|` (0 without signals).
    pub fn score(result: &StepUpResult, is_signal: &[bool]) -> Self {
        let r = result.rejected.len();
        let true_pos = result.rejected.iter().filter(|&&i| is_signal[i]).count();
        let k = is_signal.iter().filter(|&&s| s).count();
        Outcome {
            fdp: (r - true_pos) as f64 / r.max(1) as f64,
            power: if k == 0 {
                0.0
            } else {
                true_pos as f64 / k as f64
            },
            rejections: r,
        }
    }
}

/// Means and standard errors `sd / sqrt(reps)` (zero for one replication).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellEstimate {
    pub fdr_hat: f64,
    pub fdr_se: f64,
    pub power_hat: f64,
    pub power_se: f64,
    pub mean_rejections: f64,
    pub replications: usize,
    pub low_confidence: bool,
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn estimate_cell(outcomes: &[Outcome]) -> CellEstimate {
    assert!(
        !outcomes.is_empty(),
        "estimate_cell needs at least one replication"
    );
    let (fdr_hat, fdr_se) = mean_se(outcomes.iter().map(|o| o.fdp));
    let (power_hat, power_se) = mean_se(outcomes.iter().map(|o| o.power));
    let mean_rejections =
        outcomes.iter().map(|o| o.rejections as f64).sum::<f64>() / outcomes.len() as f64;
    CellEstimate {
        fdr_hat,
        fdr_se,
        power_hat,
        power_se,
        mean_rejections,
        replications: outcomes.len(),
        low_confidence: outcomes.len() < 2,
    }
}

/// Runs `f` on `threads` workers (the global pool when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs the configured scenario. `threads = None` uses rayon's global pool.
pub fn run_experiment(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentSummary> {
    let config = config.clone().resolve()?;
    let cells = with_threads(threads, || match config.scenario {
        Scenario::Means => run_means_cells(&config),
        Scenario::Varsel => run_regression_cells(&config),
        Scenario::Knockoff => run_regression_cells(&config),
    })??;
    Ok(ExperimentSummary { config, cells })
}

pub fn run_means(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentSummary> {
    expect_scenario(config, Scenario::Means)?;
    run_experiment(config, threads)
}

pub fn run_varsel(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentSummary> {
    expect_scenario(config, Scenario::Varsel)?;
    run_experiment(config, threads)
}

pub fn run_knockoff(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentSummary> {
    expect_scenario(config, Scenario::Knockoff)?;
    run_experiment(config, threads)
}

fn expect_scenario(config: &ExperimentConfig, s: Scenario) -> Result<()> {
    if config.scenario == s {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "expected scenario {}, got {}",
            s.name(),
            config.scenario.name()
        )))
    }
}

/// The structure used by replication `r`.
fn structure_for(config: &ExperimentConfig, r: u64) -> StructureKind {
    if config.resample_structure && config.structure.is_random() {
        let base = match config.structure {
            StructureKind::Sparse { seed, .. } | StructureKind::Prefixed { seed, .. } => seed,
            _ => 0,
        };
        config.structure.with_seed(mix(base, r + 1))
    } else {
        config.structure
    }
}

/// Random `k`-subset and per-coordinate signal values.
fn draw_signals(
    d: usize,
    k: usize,
    mu: f64,
    signs: SignMode,
    rng: &mut Stream,
) -> (Vec<bool>, Vec<f64>) {
    let mut is_signal = vec![false; d];
    let mut values = vec![0.0; d];
    for i in sample_indices(rng, d, k).into_iter() {
        is_signal[i] = true;
        values[i] = match signs {
            SignMode::Positive => mu,
            SignMode::Random if rng.random::<bool>() => mu,
            SignMode::Random => -mu,
        };
    }
    (is_signal, values)
}

fn point_label(config: &ExperimentConfig, mu: f64, frac: f64, alpha: f64) -> String {
    format!(
        "{} {} mu={mu} null_frac={frac} alpha={alpha}",
        config.scenario.name(),
        config.structure.name()
    )
}

fn numeric_context(config: &ExperimentConfig, mu: f64, frac: f64, alpha: f64, e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Domain(format!(
            "cell [{}]: {other}",
            point_label(config, mu, frac, alpha)
        )),
    }
}

fn record(
    config: &ExperimentConfig,
    proc_name: String,
    mu: f64,
    null_frac: f64,
    alpha: f64,
    est: CellEstimate,
) -> CellRecord {
    CellRecord {
        scenario: config.scenario.name().to_string(),
        procedure: proc_name,
        structure: config.structure.name().to_string(),
        rho: config.structure.rho(),
        d: config.d,
        n: config.n,
        mu,
        null_frac,
        alpha,
        fdr_hat: est.fdr_hat,
        fdr_se: est.fdr_se,
        power_hat: est.power_hat,
        power_se: est.power_se,
        mean_rejections: est.mean_rejections,
        replications: est.replications,
        seed: config.seed,
        low_confidence: est.low_confidence,
    }
}

/// Reported null fraction of a grid point.
fn reported_null_frac(config: &ExperimentConfig, frac: f64) -> f64 {
    match config.k {
        Some(k) => 1.0 - k as f64 / config.d as f64,
        None => frac,
    }
}

fn dist_for(config: &ExperimentConfig) -> DistributionKind {
    match (config.variance, config.nu) {
        (VarianceMode::Estimated, Some(nu)) => DistributionKind::ScaledF { nu },
        _ => DistributionKind::ChiSq1,
    }
}

/// Procedures with their constants fixed for one `(profile, alpha)`.
fn prepare_all(
    ids: &[ProcedureId],
    profile: &ShiftProfile,
    alphas: &[f64],
    dist: DistributionKind,
) -> Result<Vec<Vec<PreparedProcedure>>> {
    alphas
        .iter()
        .map(|&a| {
            ids.iter()
                .map(|&id| PreparedProcedure::prepare(id, profile, a, dist))
                .collect()
        })
        .collect()
}

fn mean_ids(procs: &[AnyProcedure]) -> Vec<ProcedureId> {
    procs
        .iter()
        .filter_map(|p| match p {
            AnyProcedure::Mean(id) => Some(*id),
            AnyProcedure::Paired(_) => None,
        })
        .collect()
}

fn run_means_cells(config: &ExperimentConfig) -> Result<Vec<CellRecord>> {
    let procs = config.parsed_procedures()?;
    let ids = mean_ids(&procs);
    let dist = dist_for(config);
    let setting_nu = config.nu;
    let d = config.d;

    let fixed = if config.resample_structure && config.structure.is_random() {
        None
    } else {
        let sigma = make_correlation(&StructureSpec::new(config.structure, d))?;
        let profile = tau_profile(&sigma)?;
        let prepared = prepare_all(&ids, &profile, &config.alphas, dist)?;
        Some((MvnSampler::new(&sigma)?, prepared))
    };

    let mut cells = Vec::new();
    for (mu, frac) in config.regime.as_ref().unwrap().points() {
        let k = config.signal_count(frac);
        let reps: Vec<Result<Vec<Outcome>>> = (0..config.replications as u64)
            .into_par_iter()
            .map(|r| {
                let owned;
                let (sampler, prepared) = match &fixed {
                    Some((s, p)) => (s, p),
                    None => {
                        let sigma =
                            make_correlation(&StructureSpec::new(structure_for(config, r), d))?;
                        let profile = tau_profile(&sigma)?;
                        owned = (
                            MvnSampler::new(&sigma)?,
                            prepare_all(&ids, &profile, &config.alphas, dist)?,
                        );
                        (&owned.0, &owned.1)
                    }
                };
                let mut rng = stream(config.seed, r);
                let (is_signal, mean) = draw_signals(d, k, mu, config.signs, &mut rng);
                let x = sampler.sample(&mean, &mut rng)?;
                let setting = match setting_nu {
                    Some(nu) if config.variance == VarianceMode::Estimated => {
                        let chi =
                            ChiSquared::new(nu as f64).map_err(|e| Error::Domain(e.to_string()))?;
                        Setting::Unknown {
                            v: rng.sample(chi),
                            nu,
                        }
                    }
                    _ => Setting::Known,
                };
                let p = pvalues_from_observations(&x, setting)?;
                let mut out = Vec::with_capacity(prepared.len() * ids.len());
                for per_alpha in prepared {
                    for proc in per_alpha {
                        out.push(Outcome::score(&proc.apply(&p)?, &is_signal));
                    }
                }
                Ok(out)
            })
            .collect();
        let reps = reps
            .into_iter()
            .collect::<Result<Vec<_>>>()
            .map_err(|e| numeric_context(config, mu, frac, config.alphas[0], e))?;
        for (ai, &alpha) in config.alphas.iter().enumerate() {
            for (pi, id) in ids.iter().enumerate() {
                let col: Vec<Outcome> = reps.iter().map(|o| o[ai * ids.len() + pi]).collect();
                cells.push(record(
                    config,
                    id.to_string(),
                    mu,
                    reported_null_frac(config, frac),
                    alpha,
                    estimate_cell(&col),
                ));
            }
        }
    }
    Ok(cells)
}

/// One replication's regression data: design with unit-norm columns,
/// response `X beta + eps` with `eps ~ N(0, I)`.
pub fn simulate_regression(
    sampler: &MvnSampler,
    n: usize,
    k: usize,
    mu: f64,
    signs: SignMode,
    rng: &mut Stream,
) -> Result<(RegressionData, Vec<bool>)> {
    let d = sampler.dim();
    let (is_signal, beta) = draw_signals(d, k, mu, signs, rng);
    let x = sampler.sample_rows(n, rng);
    let noise = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let pre = RegressionData::new(x, DVector::zeros(n))?;
    let y = pre.x() * DVector::from_vec(beta) + noise;
    Ok((pre.with_response(y)?, is_signal))
}

fn run_regression_cells(config: &ExperimentConfig) -> Result<Vec<CellRecord>> {
    let procs = config.parsed_procedures()?;
    let n = config.n.expect("resolved config has n");
    let d = config.d;
    let fixed = if config.resample_structure && config.structure.is_random() {
        None
    } else {
        Some(MvnSampler::new(&make_correlation(&StructureSpec::new(
            config.structure,
            d,
        ))?)?)
    };
    let needs_profile = procs
        .iter()
        .any(|p| matches!(p, AnyProcedure::Paired(q) if q.needs_beta1_profile()));

    let mut cells = Vec::new();
    for (mu, frac) in config.regime.as_ref().unwrap().points() {
        let k = config.signal_count(frac);
        let reps: Vec<Result<Vec<Outcome>>> = (0..config.replications as u64)
            .into_par_iter()
            .map(|r| {
                let owned;
                let sampler = match &fixed {
                    Some(s) => s,
                    None => {
                        owned = MvnSampler::new(&make_correlation(&StructureSpec::new(
                            structure_for(config, r),
                            d,
                        ))?)?;
                        &owned
                    }
                };
                let mut rng = stream(config.seed, r);
                let (data, is_signal) =
                    simulate_regression(sampler, n, k, mu, config.signs, &mut rng)?;
                let mut out = Vec::with_capacity(config.alphas.len() * procs.len());
                match config.scenario {
                    Scenario::Varsel => {
                        let ols = OlsAnalysis::new(&data, config.variance)?;
                        for &alpha in &config.alphas {
                            for p in &procs {
                                let AnyProcedure::Mean(id) = p else {
                                    unreachable!()
                                };
                                out.push(Outcome::score(&ols.run(*id, alpha)?, &is_signal));
                            }
                        }
                    }
                    _ => {
                        let opts = PairedOptions {
                            variance: config.variance,
                            ..config.paired
                        };
                        let mut analysis = KnockoffAnalysis::new(&data, &SRule::Equi, opts)?;
                        if needs_profile {
                            analysis = analysis.with_profile()?;
                        }
                        for &alpha in &config.alphas {
                            for p in &procs {
                                let AnyProcedure::Paired(q) = p else {
                                    unreachable!()
                                };
                                out.push(Outcome::score(&analysis.run(*q, alpha)?, &is_signal));
                            }
                        }
                    }
                }
                Ok(out)
            })
            .collect();
        let reps = reps
            .into_iter()
            .collect::<Result<Vec<_>>>()
            .map_err(|e| numeric_context(config, mu, frac, config.alphas[0], e))?;
        for (ai, &alpha) in config.alphas.iter().enumerate() {
            for (pi, p) in procs.iter().enumerate() {
                let col: Vec<Outcome> = reps.iter().map(|o| o[ai * procs.len() + pi]).collect();
                cells.push(record(
                    config,
                    p.to_string(),
                    mu,
                    reported_null_frac(config, frac),
                    alpha,
                    estimate_cell(&col),
                ));
            }
        }
    }
    Ok(cells)
}

/// Empirical all-null FDR of a procedure against the bound
/// `sum_i Pr(P~_i <= tilde_alpha / d)` evaluated in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundDiagnostic {
    pub procedure: String,
    pub empirical_fdr: f64,
    pub se: f64,
    pub bound: f64,
    /// `d * H(tilde_alpha / d)` through the calibrated bound function.
    pub bound_via_h: f64,
    pub replications: usize,
    pub pass: bool,
}

pub fn tail_bound_oracle(
    sigma: &CorrelationMatrix,
    id: ProcedureId,
    alpha: f64,
    replications: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<TailBoundDiagnostic> {
    if replications == 0 {
        return Err(Error::Config("replications must be at least 1".into()));
    }
    let d = sigma.dim();
    let dist = DistributionKind::ChiSq1;
    let profile = tau_profile(sigma)?;
    let prepared = PreparedProcedure::prepare(id, &profile, alpha, dist)?;
    let ln_u = prepared.constants.ln_unit;
    let ln_tilde = prepared.constants.ln_tilde_alpha();
    let (bound, bound_via_h) = match prepared.shift {
        None => {
            let b = d as f64 * ln_u.exp();
            (b, b)
        }
        Some(shift::ShiftMode::Global(tau)) => {
            let b = profile
                .tau
                .iter()
                .map(|&ti| null_tail_probability_ln(ln_u, ti, tau, ln_tilde, dist))
                .sum();
            let h = BoundFunction::new(&profile, tau, dist, CalibrationMethod::Gsbh)?
                .eval(ln_u.exp())?;
            (b, d as f64 * h)
        }
        Some(shift::ShiftMode::PerCoordinate(ref taus)) => {
            let b = taus
                .iter()
                .map(|&ti| shift::h_tau(ln_u.exp(), ti, dist))
                .sum::<Result<f64>>()?;
            let h = BoundFunction::new(&profile, 1.0, dist, CalibrationMethod::Sbh1)?
                .eval(ln_u.exp())?;
            (b, d as f64 * h)
        }
    };
    let sampler = MvnSampler::new(sigma)?;
    let zero = vec![0.0; d];
    let fdps: Vec<Result<f64>> = with_threads(threads, || {
        (0..replications as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream(seed, r);
                let x = sampler.sample(&zero, &mut rng)?;
                let p = pvalues_from_observations(&x, Setting::Known)?;
                Ok(if prepared.apply(&p)?.rejections > 0 {
                    1.0
                } else {
                    0.0
                })
            })
            .collect()
    })?;
    let fdps = fdps.into_iter().collect::<Result<Vec<_>>>()?;
    let (empirical_fdr, se) = mean_se(fdps.iter().copied());
    Ok(TailBoundDiagnostic {
        procedure: id.to_string(),
        empirical_fdr,
        se,
        bound,
        bound_via_h,
        replications,
        pass: empirical_fdr <= bound + 3.0 * se,
    })
}
