use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use super::metrics::{generalization_error, misclassification_rate};
use super::targets::{generate_dataset, TargetFunction, TargetKind};
use crate::baselines::{train_fixed_rff, train_sgd_with_observer, FixedRffConfig, SgdConfig};
use crate::dataset::{
    normalize_dataset_common_scale, normalize_dataset_with, ConstantColumns, Dataset,
    NormalizationStats,
};
use crate::error::{Error, Result};
use crate::features::ActivationKind;
use crate::model::FourierModel;
use crate::sampler::{train_with_observer, AdaptiveCovConfig, Checkpoint, SamplerConfig};

/// The four benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    /// Regularized step, `d = 1`.
    One,
    /// Regularized step in `d = 5`.
    Two,
    /// Anisotropic Gaussian, `d = 2`.
    Three,
    /// MNIST digits, `d = 784`.
    Mnist,
}

impl CaseId {
    pub fn number(self) -> u8 {
        match self {
            CaseId::One => 1,
            CaseId::Two => 2,
            CaseId::Three => 3,
            CaseId::Mnist => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(CaseId::One),
            2 => Some(CaseId::Two),
            3 => Some(CaseId::Three),
            4 => Some(CaseId::Mnist),
            _ => None,
        }
    }

    /// Input dimension before any bias column.
    pub fn dim(self) -> usize {
        match self {
            CaseId::One => 1,
            CaseId::Two => 5,
            CaseId::Three => 2,
            CaseId::Mnist => 784,
        }
    }

    /// Synthetic target, `None` for MNIST.
    pub fn target(self) -> Option<TargetFunction> {
        let kind = match self {
            CaseId::One => TargetKind::SiGauss1D { a: 1e-3 },
            CaseId::Two => TargetKind::SiGauss5D { a: 1e-1 },
            CaseId::Three => TargetKind::AnisoGauss2D,
            CaseId::Mnist => return None,
        };
        Some(TargetFunction::new(kind))
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for CaseId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.trim()
            .parse::<u8>()
            .ok()
            .and_then(CaseId::from_number)
            .ok_or_else(|| format!("unknown case `{s}` (expected 1, 2, 3 or 4)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodKind {
    Arff,
    ArffAdaptiveCov,
    FixedRff,
    Sgd,
    ArffSigmoid,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Arff,
        MethodKind::ArffAdaptiveCov,
        MethodKind::FixedRff,
        MethodKind::Sgd,
        MethodKind::ArffSigmoid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Arff => "arff",
            MethodKind::ArffAdaptiveCov => "arff_adaptive_cov",
            MethodKind::FixedRff => "fixed_rff",
            MethodKind::Sgd => "sgd",
            MethodKind::ArffSigmoid => "arff_sigmoid",
        }
    }

    pub fn activation(self) -> ActivationKind {
        match self {
            MethodKind::ArffSigmoid => ActivationKind::Sigmoid,
            _ => ActivationKind::Fourier,
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        MethodKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodParams {
    Sampler(SamplerConfig),
    FixedRff(FixedRffConfig),
    Sgd(SgdConfig),
}

/// One trainer with its parameters. `K` and the seed are filled in per run.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub name: String,
    pub kind: MethodKind,
    pub params: MethodParams,
}

impl MethodSpec {
    /// Published parameter choices for `kind` on `case`, with generic
    /// defaults where the combination was not run.
    pub fn defaults(case: CaseId, kind: MethodKind) -> Self {
        let d = case.dim();
        let sampler = |dim: usize, delta: f64, iterations: usize, m: usize| {
            let mut c = SamplerConfig::new(dim, 1).with_delta(delta).with_iterations(iterations);
            c.refresh_every = m;
            c
        };
        let adaptive = |mut c: SamplerConfig| {
            c.adaptive_cov = Some(AdaptiveCovConfig {
                burn_in: c.iterations() / 10,
                omega_max: f64::INFINITY,
            });
            c
        };
        let generic = 2.4 * 2.4 / d as f64;
        let params = match (kind, case) {
            (MethodKind::Arff, CaseId::One) => MethodParams::Sampler(sampler(d, generic, 1000, 10)),
            (MethodKind::Arff, CaseId::Two) => {
                MethodParams::Sampler(sampler(d, generic / 10.0, 2500, 25))
            }
            (MethodKind::Arff, CaseId::Three) => MethodParams::Sampler(sampler(d, 0.5, 10_000, 100)),
            (MethodKind::Arff, CaseId::Mnist) => MethodParams::Sampler(sampler(d, 0.1, 100, 101)),
            (MethodKind::ArffAdaptiveCov, CaseId::Three) => {
                MethodParams::Sampler(adaptive(sampler(d, 0.1, 10_000, 100)))
            }
            (MethodKind::ArffAdaptiveCov, _) => {
                MethodParams::Sampler(adaptive(sampler(d, 0.1, 5000, 50)))
            }
            (MethodKind::ArffSigmoid, _) => {
                MethodParams::Sampler(sampler(d + 1, 2.4 * 2.4 / (d + 1) as f64, 10_000, 100))
            }
            (MethodKind::FixedRff, _) => MethodParams::FixedRff(FixedRffConfig::new(1, 1.0)),
            (MethodKind::Sgd, CaseId::Two) => MethodParams::Sgd(lambda_free_sgd(3e-4, 10_000_000)),
            (MethodKind::Sgd, CaseId::Three) => {
                MethodParams::Sgd(lambda_free_sgd(1.5e-3, 30_000_000))
            }
            (MethodKind::Sgd, _) => MethodParams::Sgd(lambda_free_sgd(1.5e-4, 10_000_000)),
        };
        Self {
            name: kind.as_str().to_string(),
            kind,
            params,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let kind_ok = matches!(
            (&self.kind, &self.params),
            (
                MethodKind::Arff | MethodKind::ArffAdaptiveCov | MethodKind::ArffSigmoid,
                MethodParams::Sampler(_)
            ) | (MethodKind::FixedRff, MethodParams::FixedRff(_))
                | (MethodKind::Sgd, MethodParams::Sgd(_))
        );
        if !kind_ok {
            return Err(Error::validation(&self.name, "parameters do not match the method"));
        }
        if self.name.is_empty() || self.name.contains([',', '"', '\n', ']', '[', '#']) {
            return Err(Error::validation("name", "must be non-empty without , \" [ ] # or newlines"));
        }
        match &self.params {
            MethodParams::Sampler(c) => {
                if (self.kind == MethodKind::ArffAdaptiveCov) != c.adaptive_cov.is_some() {
                    return Err(Error::validation(
                        "t0",
                        "adaptive covariance settings belong to arff_adaptive_cov only",
                    ));
                }
                with_k(c.clone(), 1).validate()
            }
            MethodParams::FixedRff(c) => FixedRffConfig { num_features: 1, ..c.clone() }.validate(),
            MethodParams::Sgd(c) => SgdConfig { num_features: 1, ..c.clone() }.validate(),
        }
    }
}

fn lambda_free_sgd(dt: f64, iterations: usize) -> SgdConfig {
    SgdConfig::new(1, dt, iterations)
}

fn with_k(mut c: SamplerConfig, k: usize) -> SamplerConfig {
    c.num_features = k;
    c
}

/// Everything needed to run one case.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub case: CaseId,
    pub k_grid: Vec<usize>,
    pub n_train: usize,
    pub n_test: usize,
    /// Independent replicas per `(method, K)`, M̄.
    pub replicas: usize,
    pub seed: u64,
    pub methods: Vec<MethodSpec>,
    /// Record test error at every amplitude refresh or SGD loss checkpoint.
    pub checkpoints: bool,
}

impl ExperimentConfig {
    /// Published setup for `case` running the adaptive sampler only.
    pub fn defaults(case: CaseId) -> Self {
        let (k_max, n_train, replicas) = match case {
            CaseId::One => (11, 10_000, 10),
            CaseId::Two => (10, 10_000, 10),
            CaseId::Three => (8, 10_000, 1),
            CaseId::Mnist => (13, 60_000, 1),
        };
        let k_grid = if case == CaseId::Three {
            vec![256]
        } else {
            (1..=k_max).map(|i| 1usize << i).collect()
        };
        Self {
            case,
            k_grid,
            n_train,
            n_test: 10_000,
            replicas,
            seed: 0,
            methods: vec![MethodSpec::defaults(case, MethodKind::Arff)],
            checkpoints: case == CaseId::Three,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_grid.is_empty() || self.k_grid.contains(&0) {
            return Err(Error::validation("k_grid", "needs at least one positive K"));
        }
        if self.n_train < 2 {
            return Err(Error::validation("n_train", "must be at least 2"));
        }
        if self.n_test < 1 {
            return Err(Error::validation("n_test", "must be at least 1"));
        }
        if self.replicas < 1 {
            return Err(Error::validation("replicas", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::validation("methods", "at least one method is required"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            m.validate()?;
            if self.methods[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::validation(
                    "name",
                    format!("method name `{}` is used twice", m.name),
                ));
            }
            if self.case == CaseId::Mnist && matches!(m.kind, MethodKind::Sgd | MethodKind::ArffSigmoid) {
                return Err(Error::validation(
                    "method",
                    format!("`{}` is not supported for classification", m.kind),
                ));
            }
        }
        Ok(())
    }
}

/// Parses `a..b geometric` (powers of two from a to b), `a..b` (same) or a
/// comma list.
pub fn parse_k_grid(spec: &str) -> std::result::Result<Vec<usize>, String> {
    let spec = spec.trim().trim_matches('"');
    let bad = || format!("bad K grid `{spec}`");
    if let Some((lo, rest)) = spec.split_once("..") {
        let mut parts = rest.split_whitespace();
        let hi = parts.next().ok_or_else(bad)?;
        match parts.next() {
            None | Some("geometric") => {}
            Some(_) => return Err(bad()),
        }
        if parts.next().is_some() {
            return Err(bad());
        }
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.parse().map_err(|_| bad())?;
        if lo == 0 || !lo.is_power_of_two() || !hi.is_power_of_two() || lo > hi {
            return Err(format!("K grid bounds in `{spec}` must be powers of two with lo <= hi"));
        }
        let mut out = vec![lo];
        while *out.last().unwrap() < hi {
            out.push(out.last().unwrap() * 2);
        }
        return Ok(out);
    }
    spec.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
        .collect()
}

/// Renders a grid so that [`parse_k_grid`] reads it back.
pub fn format_k_grid(grid: &[usize]) -> String {
    let geometric = grid.len() > 1
        && grid[0].is_power_of_two()
        && grid.windows(2).all(|w| w[1] == 2 * w[0]);
    if geometric {
        format!("{}..{} geometric", grid[0], grid[grid.len() - 1])
    } else {
        grid.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// One finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub case: String,
    pub method: String,
    pub k: usize,
    pub replica: usize,
    /// Generalization error, or percent misclassified for MNIST.
    pub error: f64,
    pub wall_seconds: f64,
    pub acceptance_rate: Option<f64>,
    pub seed: u64,
}

/// Test error recorded during training.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointRow {
    pub method: String,
    pub k: usize,
    pub replica: usize,
    pub iteration: usize,
    pub elapsed_seconds: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub checkpoints: Vec<CheckpointRow>,
}

/// Data source for a sweep.
#[derive(Debug, Clone, Copy)]
pub enum CaseData<'a> {
    /// Fresh training and test sets per replica.
    Synthetic(TargetFunction),
    /// Fixed sets shared by every replica (MNIST). Only the first
    /// `n_train` / `n_test` rows are used.
    Fixed { train: &'a Dataset, test: &'a Dataset },
}

impl CaseData<'_> {
    pub fn for_case(case: CaseId) -> Option<CaseData<'static>> {
        case.target().map(CaseData::Synthetic)
    }
}

/// Normalized training and test data for one replica.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub stats: NormalizationStats,
}

impl PreparedData {
    /// Normalizes the training set and maps the test set with its statistics.
    /// Constant input columns are centered only.
    pub fn new(train: Dataset, test: Dataset) -> Result<Self> {
        let (train, stats) = normalize_dataset_with(train, ConstantColumns::CenterOnly)?;
        let test = stats.apply(test)?;
        Ok(Self { train, test, stats })
    }

    /// Centers each pixel and divides every pixel by the common 8-bit range.
    pub fn pixels(train: Dataset, test: Dataset) -> Result<Self> {
        let (train, stats) = normalize_dataset_common_scale(train, PIXEL_SCALE)?;
        let test = stats.apply(test)?;
        Ok(Self { train, test, stats })
    }
}

/// Divisor of MNIST pixel values.
pub const PIXEL_SCALE: f64 = 255.0;

/// splitmix64 finalizer folded over the parts.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    for p in parts {
        state = mix(state ^ mix(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    state
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

const DATA_STREAM: u64 = 0xDA7A;

/// Builds the normalized data of replica `replica`.
pub fn prepare_replica(
    config: &ExperimentConfig,
    data: &CaseData<'_>,
    replica: usize,
) -> Result<PreparedData> {
    match data {
        CaseData::Synthetic(target) => {
            let seed = |stream| derive_seed(&[config.seed, replica as u64, DATA_STREAM, stream]);
            let train = generate_dataset(target, config.n_train, seed(0))?;
            let test = generate_dataset(target, config.n_test, seed(1))?;
            PreparedData::new(train, test)
        }
        CaseData::Fixed { train, test } => {
            let (train, test) = (train.head(config.n_train)?, test.head(config.n_test)?);
            if config.case == CaseId::Mnist {
                PreparedData::pixels(train, test)
            } else {
                PreparedData::new(train, test)
            }
        }
    }
}

/// Runs every `(method, K, replica)` combination on the current rayon pool.
/// Rows come back sorted by method, `K` and replica.
pub fn sweep_k(config: &ExperimentConfig, data: &CaseData<'_>) -> Result<SweepOutput> {
    config.validate()?;
    // MNIST replicas share one data set
    let distinct = match data {
        CaseData::Synthetic(_) => config.replicas,
        CaseData::Fixed { .. } => 1,
    };
    let prepared = (0..distinct)
        .into_par_iter()
        .map(|r| prepare_replica(config, data, r))
        .collect::<Result<Vec<_>>>()?;

    let mut tasks = Vec::new();
    for method in &config.methods {
        for &k in &config.k_grid {
            for replica in 0..config.replicas {
                tasks.push((method, k, replica));
            }
        }
    }
    let outcomes = tasks
        .into_par_iter()
        .map(|(method, k, replica)| {
            let data = &prepared[replica.min(distinct - 1)];
            run_task(config, method, k, replica, data)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = SweepOutput::default();
    for (row, cps) in outcomes {
        out.rows.push(row);
        out.checkpoints.extend(cps);
    }
    sort_rows(&mut out.rows);
    Ok(out)
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        (&a.case, &a.method, a.k, a.replica).cmp(&(&b.case, &b.method, b.k, b.replica))
    });
}

/// Seed of the training run for one `(method, K, replica)`.
pub fn task_seed(base: u64, method: &str, k: usize, replica: usize) -> u64 {
    derive_seed(&[base, replica as u64, k as u64, name_hash(method)])
}

fn score(case: CaseId, model: &FourierModel, test: &Dataset) -> Result<f64> {
    if case == CaseId::Mnist {
        Ok(100.0 * misclassification_rate(model, test)?)
    } else {
        generalization_error(model, test)
    }
}

/// Trains one model and scores it on the replica's test set.
pub fn run_task(
    config: &ExperimentConfig,
    method: &MethodSpec,
    k: usize,
    replica: usize,
    data: &PreparedData,
) -> Result<(ResultRow, Vec<CheckpointRow>)> {
    let seed = task_seed(config.seed, &method.name, k, replica);
    let activation = method.kind.activation();
    let (train, test) = if activation.uses_bias() {
        (data.train.clone().with_bias(), data.test.clone().with_bias())
    } else {
        (data.train.clone(), data.test.clone())
    };
    let start = Instant::now();
    let mut checkpoints = Vec::new();
    let mut record = |cp: &Checkpoint<'_>| -> Result<()> {
        if !config.checkpoints {
            return Ok(());
        }
        let model =
            FourierModel::new(cp.omega.clone(), cp.beta.clone(), activation, data.stats.clone())?;
        let error = score(config.case, &model, &test)?;
        log::info!(
            "{} K={k} replica {replica}: iteration {} at {:.3}s, error {error:.6e}",
            method.name,
            cp.iteration,
            cp.elapsed.as_secs_f64()
        );
        checkpoints.push(CheckpointRow {
            method: method.name.clone(),
            k,
            replica,
            iteration: cp.iteration,
            elapsed_seconds: cp.elapsed.as_secs_f64(),
            error,
        });
        Ok(())
    };
    let mut observer_error = None;
    let mut observer = |cp: &Checkpoint<'_>| {
        if observer_error.is_none() {
            if let Err(e) = record(cp) {
                observer_error = Some(e);
            }
        }
    };

    let (model, acceptance_rate) = match &method.params {
        MethodParams::Sampler(c) => {
            let c = SamplerConfig {
                num_features: k,
                seed,
                ..c.clone()
            };
            let (model, trace) = train_with_observer(&train, &data.stats, &c, activation, &mut observer)?;
            (model, Some(trace.mean_acceptance()))
        }
        MethodParams::FixedRff(c) => {
            let c = FixedRffConfig {
                num_features: k,
                seed,
                ..c.clone()
            };
            (train_fixed_rff(&train, &data.stats, &c, activation)?, None)
        }
        MethodParams::Sgd(c) => {
            let c = SgdConfig {
                num_features: k,
                seed,
                ..c.clone()
            };
            let (model, _) = train_sgd_with_observer(&train, &data.stats, &c, activation, &mut observer)?;
            (model, None)
        }
    };
    if let Some(e) = observer_error {
        return Err(e);
    }
    let wall_seconds = start.elapsed().as_secs_f64();
    let error = score(config.case, &model, &test)?;
    log::info!(
        "case {} {} K={k} replica {replica}: error {error:.6e} in {wall_seconds:.2}s",
        config.case,
        method.name
    );
    let row = ResultRow {
        case: config.case.to_string(),
        method: method.name.clone(),
        k,
        replica,
        error,
        wall_seconds,
        acceptance_rate,
        seed,
    };
    Ok((row, checkpoints))
}

/// Fixed-distribution RFF on a noisy Gaussian, swept over the frequency
/// standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSweepConfig {
    pub sigmas: Vec<f64>,
    pub dim: usize,
    pub num_features: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub lambda: f64,
    pub noise_std: f64,
    pub replicas: usize,
    pub seed: u64,
}

impl Default for SigmaSweepConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            dim: 7,
            num_features: 500,
            n_train: 100_000,
            n_test: 10_000,
            lambda: 0.01,
            noise_std: 0.1,
            replicas: 10,
            seed: 0,
        }
    }
}

impl SigmaSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigmas.is_empty() || self.sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::validation("sigmas", "need at least one positive value"));
        }
        if self.dim < 1 || self.num_features < 1 || self.replicas < 1 {
            return Err(Error::validation("dim", "dim, K and replicas must be positive"));
        }
        if self.n_train < 2 || self.n_test < 1 {
            return Err(Error::validation("n_train", "need at least two training points"));
        }
        if !(self.lambda >= 0.0) || !(self.noise_std >= 0.0) {
            return Err(Error::validation("lambda", "lambda and noise_std must be >= 0"));
        }
        Ok(())
    }

    pub fn method_name(sigma: f64) -> String {
        format!("fixed_rff_sigma_{sigma}")
    }
}

/// One row per `(σ, replica)`, case label `sigma`.
pub fn sweep_sigma_omega(config: &SigmaSweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let target = TargetFunction::new(TargetKind::Gauss { dim: config.dim }).with_noise(config.noise_std);
    let prepared = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let seed = |stream| derive_seed(&[config.seed, r as u64, DATA_STREAM, stream]);
            let train = generate_dataset(&target, config.n_train, seed(0))?;
            let test = generate_dataset(&target, config.n_test, seed(1))?;
            PreparedData::new(train, test)
        })
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(f64, usize)> = config
        .sigmas
        .iter()
        .flat_map(|&s| (0..config.replicas).map(move |r| (s, r)))
        .collect();
    let mut rows = tasks
        .into_par_iter()
        .map(|(sigma, replica)| {
            let name = SigmaSweepConfig::method_name(sigma);
            let seed = task_seed(config.seed, &name, config.num_features, replica);
            let rff = FixedRffConfig {
                sigma_omega: sigma,
                lambda: config.lambda,
                num_features: config.num_features,
                seed,
            };
            let data = &prepared[replica];
            let start = Instant::now();
            let model = train_fixed_rff(&data.train, &data.stats, &rff, ActivationKind::Fourier)?;
            let error = generalization_error(&model, &data.test)?;
            log::info!("sigma {sigma} replica {replica}: error {error:.6e}");
            Ok(ResultRow {
                case: "sigma".into(),
                method: name,
                k: config.num_features,
                replica,
                error,
                wall_seconds: start.elapsed().as_secs_f64(),
                acceptance_rate: None,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_grid_syntax() {
        assert_eq!(parse_k_grid("2..2048 geometric").unwrap(), (1..=11).map(|i| 1 << i).collect::<Vec<_>>());
        assert_eq!(parse_k_grid("2..256").unwrap().len(), 8);
        assert_eq!(parse_k_grid("256").unwrap(), vec![256]);
        assert_eq!(parse_k_grid("3, 5,7").unwrap(), vec![3, 5, 7]);
        assert!(parse_k_grid("3..16").is_err());
        assert!(parse_k_grid("2..16 linear").is_err());
        assert!(parse_k_grid("a,b").is_err());
        for g in [vec![2, 4, 8], vec![256], vec![3, 5]] {
            assert_eq!(parse_k_grid(&format_k_grid(&g)).unwrap(), g);
        }
    }

    #[test]
    fn published_defaults() {
        let c = ExperimentConfig::defaults(CaseId::One);
        assert_eq!(c.k_grid.last(), Some(&2048));
        let MethodParams::Sampler(s) = &c.methods[0].params else { panic!() };
        assert_eq!((s.iterations(), s.refresh_every, s.gamma, s.lambda), (1000, 10, 1.0, 0.1));
        assert!((s.delta - 5.76).abs() < 1e-15);

        let MethodParams::Sampler(s) = MethodSpec::defaults(CaseId::Two, MethodKind::Arff).params else { panic!() };
        assert!((s.delta - 0.1152).abs() < 1e-15);
        assert_eq!((s.iterations(), s.refresh_every, s.gamma), (2500, 25, 13.0));

        let MethodParams::Sampler(s) =
            MethodSpec::defaults(CaseId::One, MethodKind::ArffAdaptiveCov).params
        else {
            panic!()
        };
        assert_eq!(s.iterations(), 5000);
        assert_eq!(s.adaptive_cov.unwrap().burn_in, 500);

        let MethodParams::Sampler(s) = MethodSpec::defaults(CaseId::Mnist, MethodKind::Arff).params else { panic!() };
        assert_eq!((s.iterations(), s.refresh_every, s.gamma), (100, 101, 2350.0));

        let MethodParams::Sgd(s) = MethodSpec::defaults(CaseId::Three, MethodKind::Sgd).params else { panic!() };
        assert_eq!((s.dt, s.iterations), (1.5e-3, 30_000_000));
        assert_eq!(ExperimentConfig::defaults(CaseId::Mnist).n_train, 60_000);
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut c = ExperimentConfig::defaults(CaseId::One);
        c.methods.push(c.methods[0].clone());
        assert!(c.validate().is_err());
        c.methods[1].name = "arff_b".into();
        assert!(c.validate().is_ok());
    }

    #[test]
    fn seeds_differ_across_parts() {
        let a = task_seed(1, "arff", 2, 0);
        assert_ne!(a, task_seed(1, "arff", 2, 1));
        assert_ne!(a, task_seed(1, "arff", 4, 0));
        assert_ne!(a, task_seed(1, "fixed_rff", 2, 0));
        assert_ne!(a, task_seed(2, "arff", 2, 0));
        assert_eq!(a, task_seed(1, "arff", 2, 0));
    }

    #[test]
    fn small_sweep_is_deterministic_and_sorted() {
        let mut c = ExperimentConfig::defaults(CaseId::One);
        c.k_grid = vec![4, 2];
        c.n_train = 200;
        c.n_test = 100;
        c.replicas = 2;
        let mut fixed = MethodSpec::defaults(CaseId::One, MethodKind::FixedRff);
        fixed.name = "a_fixed".into();
        c.methods = vec![
            MethodSpec {
                params: match &c.methods[0].params {
                    MethodParams::Sampler(s) => MethodParams::Sampler(s.clone().with_iterations(20)),
                    _ => unreachable!(),
                },
                ..c.methods[0].clone()
            },
            fixed,
        ];
        let data = CaseData::for_case(CaseId::One).unwrap();
        let a = sweep_k(&c, &data).unwrap();
        let b = sweep_k(&c, &data).unwrap();
        assert_eq!(a.rows.len(), 8);
        let key = |r: &ResultRow| (r.method.clone(), r.k, r.replica, r.error.to_bits(), r.seed);
        assert_eq!(a.rows.iter().map(key).collect::<Vec<_>>(), b.rows.iter().map(key).collect::<Vec<_>>());
        assert_eq!(a.rows[0].method, "a_fixed");
        assert_eq!((a.rows[0].k, a.rows[1].k, a.rows[2].k), (2, 2, 4));
        assert!(a.rows.iter().all(|r| r.error >= 0.0));
        assert!(a.rows.iter().filter(|r| r.method == "arff").all(|r| r.acceptance_rate.is_some()));
    }
}
