use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::FourierModel;
use crate::Complex64;

/// `sqrt(Σ_n Σ_c |(S_test β)_nc - ỹ_nc|²)` on test data already normalized
/// with the training statistics (and bias-augmented for sigmoid models).
pub fn generalization_error(model: &FourierModel, test: &Dataset) -> Result<f64> {
    check_outputs(model, test)?;
    let fitted = model.evaluate(test.x())?;
    let sum: f64 = fitted
        .iter()
        .zip(test.y().iter())
        .map(|(f, y)| (f - Complex64::new(*y, 0.0)).norm_sqr())
        .sum();
    Ok(sum.sqrt())
}

/// Fraction of test points whose largest score modulus `|Σ_k β_k^c s(ω_k·x)|`
/// is not at the labelled class. Ties go to the smallest class index.
pub fn misclassification_rate(model: &FourierModel, test: &Dataset) -> Result<f64> {
    check_outputs(model, test)?;
    let labels = test
        .labels()
        .ok_or_else(|| Error::InvalidDataset("test labels are not one-hot".into()))?;
    let scores = model.evaluate(test.x())?;
    let wrong = labels
        .iter()
        .enumerate()
        .filter(|(n, label)| argmax_modulus(scores.row(*n).iter()) != **label)
        .count();
    Ok(wrong as f64 / labels.len() as f64)
}

fn argmax_modulus<'a>(scores: impl Iterator<Item = &'a Complex64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (c, s) in scores.enumerate() {
        let m = s.norm();
        if m > best.1 {
            best = (c, m);
        }
    }
    best.0
}

fn check_outputs(model: &FourierModel, test: &Dataset) -> Result<()> {
    if model.outputs() != test.outputs() {
        return Err(Error::DimensionMismatch {
            context: "test label columns",
            expected: model.outputs(),
            got: test.outputs(),
        });
    }
    Ok(())
}

/// Mean and sample standard deviation of replica errors with the interval
/// `mean ± 2 std`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBar {
    pub mean: f64,
    pub std: f64,
    pub lower: f64,
    pub upper: f64,
    pub replicas: usize,
}

impl ErrorBar {
    /// Panics on an empty slice.
    pub fn from_samples(errors: &[f64]) -> Self {
        assert!(!errors.is_empty(), "error bar needs at least one replica");
        let n = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let std = if errors.len() > 1 {
            (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            lower: mean - 2.0 * std,
            upper: mean + 2.0 * std,
            replicas: errors.len(),
        }
    }
}

/// Runs `replica(0..m_bar)` and summarizes the errors.
pub fn error_bars<F>(m_bar: usize, replica: F) -> Result<ErrorBar>
where
    F: FnMut(usize) -> Result<f64>,
{
    if m_bar < 1 {
        return Err(Error::validation("replicas", "must be at least 1"));
    }
    let errors = (0..m_bar).map(replica).collect::<Result<Vec<_>>>()?;
    Ok(ErrorBar::from_samples(&errors))
}

/// Least-squares slope of `log₂ e` against `log₂ K`.
pub fn convergence_slope(points: &[(usize, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
