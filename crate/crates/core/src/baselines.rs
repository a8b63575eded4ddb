//! Reference trainers: random Fourier features with a fixed Gaussian
//! frequency law, and plain stochastic gradient descent on all parameters.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Dataset, NormalizationStats};
use crate::error::{Error, Result};
use crate::features::{build_design_matrix, ActivationKind};
use crate::model::FourierModel;
use crate::sampler::Checkpoint;
use crate::solver::{solve_amplitudes, SolveOptions};
use crate::Complex64;

/// Loss growth factor over the initial loss that counts as divergence.
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedRffConfig {
    /// Standard deviation of the frequency components.
    pub sigma_omega: f64,
    pub lambda: f64,
    pub num_features: usize,
    pub seed: u64,
}

impl FixedRffConfig {
    pub fn new(num_features: usize, sigma_omega: f64) -> Self {
        Self {
            sigma_omega,
            lambda: 0.1,
            num_features,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_omega > 0.0 && self.sigma_omega.is_finite()) {
            return Err(Error::validation("sigma_omega", "must be positive"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::validation("lambda", "must be >= 0"));
        }
        if self.num_features < 1 {
            return Err(Error::validation("K", "must be at least 1"));
        }
        Ok(())
    }
}

/// Draws `ω_k ~ N(0, σ² I)` once and fits the amplitudes.
pub fn train_fixed_rff(
    data: &Dataset,
    stats: &NormalizationStats,
    config: &FixedRffConfig,
    activation: ActivationKind,
) -> Result<FourierModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let law = Normal::new(0.0, config.sigma_omega).expect("validated sigma");
    let omega = gaussian_rows(config.num_features, data.dim(), &law, &mut rng);
    let s = build_design_matrix(data.x(), &omega, activation)?;
    let beta = solve_amplitudes(&s, data.y(), &SolveOptions::new(config.lambda))?;
    FourierModel::new(omega, beta, activation, stats.clone())
}

fn gaussian_rows<R: Rng>(k: usize, d: usize, law: &Normal<f64>, rng: &mut R) -> DMatrix<f64> {
    // row-major draw order, matching the sampler's proposals
    let draws: Vec<f64> = (0..k * d).map(|_| law.sample(rng)).collect();
    DMatrix::from_row_slice(k, d, &draws)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    /// Learning rate Δt.
    pub dt: f64,
    pub iterations: usize,
    /// Points per step; a batch at least as large as the data set uses every
    /// point each step.
    pub batch_size: usize,
    /// Standard deviation of the initial frequencies.
    pub init_sigma: f64,
    pub num_features: usize,
    pub seed: u64,
    /// When false only the amplitudes move.
    pub update_frequencies: bool,
    /// Full-data loss is evaluated every this many steps. 0 picks one pass
    /// over the data or `iterations / 1000`, whichever is larger.
    pub loss_every: usize,
}

impl SgdConfig {
    pub fn new(num_features: usize, dt: f64, iterations: usize) -> Self {
        Self {
            dt,
            iterations,
            batch_size: 1,
            init_sigma: 1.0,
            num_features,
            seed: 0,
            update_frequencies: true,
            loss_every: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt >= 0.0 && self.dt.is_finite()) {
            return Err(Error::validation("dt", "must be >= 0"));
        }
        if self.iterations < 1 {
            return Err(Error::validation("M", "must be at least 1"));
        }
        if self.batch_size < 1 {
            return Err(Error::validation("batch_size", "must be at least 1"));
        }
        if !(self.init_sigma > 0.0 && self.init_sigma.is_finite()) {
            return Err(Error::validation("init_sigma", "must be positive"));
        }
        if self.num_features < 1 {
            return Err(Error::validation("K", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SgdTrace {
    /// `(step, full-data loss)`, starting with step 0.
    pub loss: Vec<(usize, f64)>,
    pub elapsed: Duration,
}

/// Gradient of the empirical loss. `beta[(k, c)]` holds `∂/∂a + i ∂/∂b` for
/// `β_kc = a + i b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub omega: DMatrix<f64>,
    pub beta: DMatrix<Complex64>,
}

/// Loss `|B|⁻¹ Σ_{n∈B} Σ_c |Σ_k β_kc s(ω_k·x_n) - y_nc|²` and its gradient
/// over the rows `B` (all rows when `rows` is `None`).
pub fn loss_and_gradient(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    beta: &DMatrix<Complex64>,
    activation: ActivationKind,
    rows: Option<&[usize]>,
) -> Result<(f64, Gradient)> {
    check_shapes(x, y, omega, beta)?;
    let (k, d) = omega.shape();
    let c = y.ncols();
    let mut grad = Gradient {
        omega: DMatrix::zeros(k, d),
        beta: DMatrix::zeros(k, c),
    };
    let mut ws = Workspace::new(k, c);
    let mut loss = 0.0;
    let count = match rows {
        Some(r) => {
            for &n in r {
                loss += ws.accumulate(x, y, n, omega, beta, activation, &mut grad);
            }
            r.len()
        }
        None => {
            for n in 0..x.nrows() {
                loss += ws.accumulate(x, y, n, omega, beta, activation, &mut grad);
            }
            x.nrows()
        }
    };
    let scale = 1.0 / count.max(1) as f64;
    grad.omega *= 2.0 * scale;
    grad.beta *= Complex64::new(2.0 * scale, 0.0);
    Ok((loss * scale, grad))
}

/// Full-data least-squares loss without regularization.
pub fn empirical_loss(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    beta: &DMatrix<Complex64>,
    activation: ActivationKind,
) -> Result<f64> {
    check_shapes(x, y, omega, beta)?;
    let fitted = build_design_matrix(x, omega, activation)?.apply(beta)?;
    let sum: f64 = fitted
        .iter()
        .zip(y.iter())
        .map(|(f, t)| (f - Complex64::new(*t, 0.0)).norm_sqr())
        .sum();
    Ok(sum / x.nrows() as f64)
}

fn check_shapes(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    beta: &DMatrix<Complex64>,
) -> Result<()> {
    let checks = [
        ("frequency dimension", omega.ncols(), x.ncols()),
        ("label rows", x.nrows(), y.nrows()),
        ("amplitude rows", omega.nrows(), beta.nrows()),
        ("amplitude columns", y.ncols(), beta.ncols()),
    ];
    for (context, expected, got) in checks {
        if expected != got {
            return Err(Error::DimensionMismatch {
                context,
                expected,
                got,
            });
        }
    }
    Ok(())
}

struct Workspace {
    act: Vec<Complex64>,
    deriv: Vec<Complex64>,
    resid: Vec<Complex64>,
}

impl Workspace {
    fn new(k: usize, c: usize) -> Self {
        Self {
            act: vec![Complex64::default(); k],
            deriv: vec![Complex64::default(); k],
            resid: vec![Complex64::default(); c],
        }
    }

    /// Adds the unscaled gradient contribution of point `n` and returns its
    /// squared residual.
    #[allow(clippy::too_many_arguments)]
    fn accumulate(
        &mut self,
        x: &DMatrix<f64>,
        y: &DMatrix<f64>,
        n: usize,
        omega: &DMatrix<f64>,
        beta: &DMatrix<Complex64>,
        activation: ActivationKind,
        grad: &mut Gradient,
    ) -> f64 {
        let (k, d) = omega.shape();
        for j in 0..k {
            let t: f64 = (0..d).map(|i| omega[(j, i)] * x[(n, i)]).sum();
            self.act[j] = activation.eval(t);
            self.deriv[j] = activation.derivative(t);
        }
        let mut sq = 0.0;
        for (col, r) in self.resid.iter_mut().enumerate() {
            let fit: Complex64 = (0..k).map(|j| beta[(j, col)] * self.act[j]).sum();
            *r = fit - Complex64::new(y[(n, col)], 0.0);
            sq += r.norm_sqr();
        }
        for j in 0..k {
            // d/dθ of Re(r̄ β s(θ)) summed over outputs
            let mut w = 0.0;
            for (col, r) in self.resid.iter().enumerate() {
                let rc = r.conj();
                // ∂/∂a = Re(r̄ s), ∂/∂b = Re(r̄ i s) = -Im(r̄ s)
                let rs = rc * self.act[j];
                grad.beta[(j, col)] += Complex64::new(rs.re, -rs.im);
                w += (rc * beta[(j, col)] * self.deriv[j]).re;
            }
            for i in 0..d {
                grad.omega[(j, i)] += w * x[(n, i)];
            }
        }
        sq
    }
}

/// Minibatch SGD on frequencies and amplitudes, starting from
/// `ω ~ N(0, init_sigma² I)` and `β = 0`.
pub fn train_sgd(
    data: &Dataset,
    stats: &NormalizationStats,
    config: &SgdConfig,
    activation: ActivationKind,
) -> Result<(FourierModel, SgdTrace)> {
    train_sgd_with_observer(data, stats, config, activation, |_| {})
}

/// [`train_sgd`] with a callback at every full-loss evaluation.
pub fn train_sgd_with_observer<F>(
    data: &Dataset,
    stats: &NormalizationStats,
    config: &SgdConfig,
    activation: ActivationKind,
    mut observer: F,
) -> Result<(FourierModel, SgdTrace)>
where
    F: FnMut(&Checkpoint<'_>),
{
    config.validate()?;
    let start = Instant::now();
    let (x, y) = (data.x(), data.y());
    let n = data.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let law = Normal::new(0.0, config.init_sigma).expect("validated sigma");
    let mut omega = gaussian_rows(config.num_features, data.dim(), &law, &mut rng);
    let mut beta = DMatrix::<Complex64>::zeros(config.num_features, data.outputs());

    let full_batch = config.batch_size >= n;
    let loss_every = if config.loss_every > 0 {
        config.loss_every
    } else {
        n.div_ceil(config.batch_size).max(config.iterations.div_ceil(1000))
    };
    let mut trace = SgdTrace::default();
    let initial = empirical_loss(x, y, &omega, &beta, activation)?;
    trace.loss.push((0, initial));
    let limit = DIVERGENCE_FACTOR * initial.max(f64::MIN_POSITIVE);

    let mut batch = vec![0usize; config.batch_size.min(n)];
    for step in 1..=config.iterations {
        let rows = if full_batch {
            None
        } else {
            for v in batch.iter_mut() {
                *v = rng.random_range(0..n);
            }
            Some(batch.as_slice())
        };
        let (_, grad) = loss_and_gradient(x, y, &omega, &beta, activation, rows)?;
        beta -= grad.beta * Complex64::new(config.dt, 0.0);
        if config.update_frequencies {
            omega -= grad.omega * config.dt;
        }
        let finite = beta.iter().all(|b| b.re.is_finite() && b.im.is_finite())
            && omega.iter().all(|w| w.is_finite());
        if !finite {
            return Err(Error::DivergedLoss {
                loss: f64::INFINITY,
                initial,
            });
        }
        if step % loss_every == 0 || step == config.iterations {
            let loss = empirical_loss(x, y, &omega, &beta, activation)?;
            trace.loss.push((step, loss));
            if !(loss <= limit) {
                return Err(Error::DivergedLoss { loss, initial });
            }
            log::debug!("sgd step {step}/{}: loss {loss:.6e}", config.iterations);
            observer(&Checkpoint {
                iteration: step,
                omega: &omega,
                beta: &beta,
                elapsed: start.elapsed(),
            });
        }
    }
    trace.elapsed = start.elapsed();
    let model = FourierModel::new(omega, beta, activation, stats.clone())?;
    Ok((model, trace))
}
