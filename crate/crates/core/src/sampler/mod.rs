//! Adaptive random Fourier features: frequencies follow a random-walk
//! Metropolis chain whose acceptance test compares amplitude magnitudes, and
//! amplitudes come from the regularized least-squares fit.
//!
//! With [`AdaptiveCovConfig`] set, the proposal covariance tracks the
//! empirical covariance of all visited frequencies once the burn-in is over,
//! and proposals outside `omega_max` are rejected.

mod covariance;
mod metropolis;
mod proposal;

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use covariance::{covariance_update, RunningCovariance};
pub use metropolis::metropolis_accept;
pub use proposal::{propose, ProposalFactor};

use crate::dataset::{Dataset, NormalizationStats};
use crate::error::{Error, Result};
use crate::features::{build_design_matrix, rebuild_design_matrix, ActivationKind};
use crate::model::FourierModel;
use crate::solver::{objective, solve_amplitudes, SolveOptions};
use crate::Complex64;
use metropolis::{accept_by_norms, row_norm};

/// Burn-in and radius cap of the adaptive-covariance variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveCovConfig {
    /// Iterations before the proposal covariance switches to the running one (t₀).
    pub burn_in: usize,
    /// Proposals with `|ω'_k| >= omega_max` are rejected. May be infinite.
    pub omega_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Sampling time `T`; the chain runs `floor(T / δ²)` iterations.
    pub sampling_time: f64,
    /// Proposal step length δ.
    pub delta: f64,
    /// Metropolis exponent γ.
    pub gamma: f64,
    /// Tikhonov weight λ.
    pub lambda: f64,
    /// Full amplitude re-solve every `m` iterations.
    pub refresh_every: usize,
    /// Number of hidden nodes `K`.
    pub num_features: usize,
    pub seed: u64,
    pub adaptive_cov: Option<AdaptiveCovConfig>,
    /// Keep a copy of the frequencies at every refresh.
    pub keep_history: bool,
}

impl SamplerConfig {
    /// Defaults for inputs of dimension `dim`: δ = 2.4²/d, γ = 3d - 2,
    /// λ = 0.1, m = 10 and 1000 iterations.
    pub fn new(dim: usize, num_features: usize) -> Self {
        let d = dim.max(1) as f64;
        let delta = 2.4 * 2.4 / d;
        Self {
            sampling_time: 1000.0 * delta * delta,
            delta,
            gamma: 3.0 * d - 2.0,
            lambda: 0.1,
            refresh_every: 10,
            num_features,
            seed: 0,
            adaptive_cov: None,
            keep_history: false,
        }
    }

    /// Sets δ, keeping the iteration count.
    pub fn with_delta(mut self, delta: f64) -> Self {
        let m = self.iterations();
        self.delta = delta;
        self.with_iterations(m)
    }

    /// Sets `T = M δ²` for the current δ.
    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.sampling_time = iterations as f64 * self.delta * self.delta;
        self
    }

    /// `M = floor(T / δ²)`.
    pub fn iterations(&self) -> usize {
        let ratio = self.sampling_time / (self.delta * self.delta);
        if !ratio.is_finite() || ratio < 0.0 {
            return 0;
        }
        // guard against T = M δ² landing one ulp under M
        (ratio * (1.0 + 4.0 * f64::EPSILON)).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::validation("delta", "must be positive"));
        }
        if !(self.sampling_time > 0.0) {
            return Err(Error::validation("sampling_time", "must be positive"));
        }
        if self.iterations() < 1 {
            return Err(Error::validation(
                "sampling_time",
                "T / delta^2 must be at least 1",
            ));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::validation("gamma", "must be positive"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::validation("lambda", "must be >= 0"));
        }
        if self.refresh_every < 1 {
            return Err(Error::validation("m", "must be at least 1"));
        }
        if self.num_features < 1 {
            return Err(Error::validation("K", "must be at least 1"));
        }
        if let Some(ac) = &self.adaptive_cov {
            if ac.burn_in >= self.iterations() {
                return Err(Error::validation("t0", "burn-in must be below M"));
            }
            if !(ac.omega_max > 0.0) {
                return Err(Error::validation("omega_max", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Per-run diagnostics.
#[derive(Debug, Clone, Default)]
pub struct TrainTrace {
    /// Fraction of nodes accepted, one entry per iteration.
    pub acceptance: Vec<f64>,
    /// `(iteration, objective)` after every full amplitude re-solve.
    pub refresh_loss: Vec<(usize, f64)>,
    /// Coefficient of variation of `{|β_k|}` after each iteration.
    pub amplitude_cv: Vec<f64>,
    /// Frequencies at every refresh, when requested.
    pub omega_history: Vec<(usize, DMatrix<f64>)>,
    pub elapsed: Duration,
}

impl TrainTrace {
    pub fn mean_acceptance(&self) -> f64 {
        if self.acceptance.is_empty() {
            return 0.0;
        }
        self.acceptance.iter().sum::<f64>() / self.acceptance.len() as f64
    }
}

/// State handed to a training observer after each amplitude refresh.
#[derive(Debug)]
pub struct Checkpoint<'a> {
    pub iteration: usize,
    pub omega: &'a DMatrix<f64>,
    pub beta: &'a DMatrix<Complex64>,
    pub elapsed: Duration,
}

/// Coefficient of variation (population std / mean) of the node amplitude norms.
pub fn amplitude_cv(beta: &DMatrix<Complex64>) -> f64 {
    let norms: Vec<f64> = (0..beta.nrows()).map(|k| row_norm(beta, k)).collect();
    let n = norms.len() as f64;
    let mean = norms.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = norms.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Trains on normalized (and, for sigmoid, bias-augmented) data.
pub fn train(
    data: &Dataset,
    stats: &NormalizationStats,
    config: &SamplerConfig,
    activation: ActivationKind,
) -> Result<(FourierModel, TrainTrace)> {
    train_with_observer(data, stats, config, activation, |_| {})
}

/// [`train`] with a callback after every amplitude refresh and at the end.
pub fn train_with_observer<F>(
    data: &Dataset,
    stats: &NormalizationStats,
    config: &SamplerConfig,
    activation: ActivationKind,
    mut observer: F,
) -> Result<(FourierModel, TrainTrace)>
where
    F: FnMut(&Checkpoint<'_>),
{
    config.validate()?;
    let start = Instant::now();
    let (x, y) = (data.x(), data.y());
    let (d, k) = (data.dim(), config.num_features);
    let iterations = config.iterations();
    let opts = SolveOptions::new(config.lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = TrainTrace::default();

    let mut omega = DMatrix::<f64>::zeros(k, d);
    // reused across iterations: fresh N × 2K buffers cost page faults each time
    let mut design = build_design_matrix(x, &omega, activation)?;
    let mut beta = solve_amplitudes(&design, y, &opts)?;
    let mut factor = ProposalFactor::identity(d);
    let mut running = config.adaptive_cov.map(|_| RunningCovariance::new(d));
    let omega_max = config.adaptive_cov.map_or(f64::INFINITY, |ac| ac.omega_max);
    let mut last_refresh = 0;
    let mut row = vec![0.0; d];

    for i in 1..=iterations {
        let proposal = propose(&omega, config.delta, &factor, &mut rng);
        rebuild_design_matrix(&mut design, x, &proposal, activation)?;
        let beta_prop = solve_amplitudes(&design, y, &opts)?;
        let mut accepted = 0usize;
        for node in 0..k {
            let r_u: f64 = rng.random();
            let inside = omega_max.is_infinite()
                || proposal.row(node).norm() < omega_max;
            if inside
                && accept_by_norms(
                    row_norm(&beta, node),
                    row_norm(&beta_prop, node),
                    config.gamma,
                    r_u,
                )
            {
                omega.set_row(node, &proposal.row(node));
                beta.set_row(node, &beta_prop.row(node));
                accepted += 1;
            }
            if let Some(acc) = running.as_mut() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = omega[(node, j)];
                }
                acc.update(&row);
            }
        }
        trace.acceptance.push(accepted as f64 / k as f64);

        if let (Some(acc), Some(ac)) = (running.as_ref(), config.adaptive_cov.as_ref()) {
            if i > ac.burn_in {
                factor = ProposalFactor::from_covariance(&acc.covariance())?;
            }
        }

        if i % config.refresh_every == 0 {
            rebuild_design_matrix(&mut design, x, &omega, activation)?;
            beta = solve_amplitudes(&design, y, &opts)?;
            last_refresh = i;
            trace.refresh_loss.push((i, objective(&design, y, &beta, config.lambda)?));
            if config.keep_history {
                trace.omega_history.push((i, omega.clone()));
            }
            log::debug!(
                "iteration {i}/{iterations}: acceptance {:.3}, loss {:.6e}",
                trace.acceptance.last().copied().unwrap_or(0.0),
                trace.refresh_loss.last().map_or(f64::NAN, |v| v.1)
            );
            observer(&Checkpoint {
                iteration: i,
                omega: &omega,
                beta: &beta,
                elapsed: start.elapsed(),
            });
        }
        trace.amplitude_cv.push(amplitude_cv(&beta));
    }

    // the final re-solve is a no-op when the last iteration already refreshed
    if last_refresh != iterations {
        let s = build_design_matrix(x, &omega, activation)?;
        beta = solve_amplitudes(&s, y, &opts)?;
        trace
            .refresh_loss
            .push((iterations, objective(&s, y, &beta, config.lambda)?));
        if config.keep_history {
            trace.omega_history.push((iterations, omega.clone()));
        }
        observer(&Checkpoint {
            iteration: iterations,
            omega: &omega,
            beta: &beta,
            elapsed: start.elapsed(),
        });
    }
    trace.elapsed = start.elapsed();

    let model = FourierModel::new(omega, beta, activation, stats.clone())?;
    Ok((model, trace))
}
