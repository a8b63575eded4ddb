use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::targets::TargetFunction;
use crate::error::{Error, Result};

/// Samples of `|f̂|` on an equispaced frequency grid, in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: Vec<f64>,
    pub magnitude: Vec<f64>,
}

impl Spectrum {
    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// `Σ |f̂| Δω`, the discrete L¹ norm.
    pub fn l1_norm(&self) -> f64 {
        self.magnitude.iter().sum::<f64>() * self.spacing()
    }
}

/// `|f̂(ω)|` with `f̂(ω) = (2π)^{-1/2} ∫ f(x) e^{-iωx} dx`, approximated by
/// an FFT of `num_points` samples of `f` on `[-2π, 2π)`.
///
/// The grid spacing is `2π / 4π = 1/2`.
pub fn fft_fhat_magnitude(target: &TargetFunction, num_points: usize) -> Result<Spectrum> {
    if target.dim() != 1 {
        return Err(Error::NotOneDimensional);
    }
    if num_points < 2 || !num_points.is_power_of_two() {
        return Err(Error::validation("num_points", "must be a power of two >= 2"));
    }
    let length = 4.0 * PI;
    let h = length / num_points as f64;
    let mut buf: Vec<Complex<f64>> = (0..num_points)
        .map(|n| Complex::new(target.eval(&[-2.0 * PI + n as f64 * h]), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(num_points).process(&mut buf);

    // the shift to x₀ = -2π only changes phases
    let scale = h / (2.0 * PI).sqrt();
    let dw = 2.0 * PI / length;
    let half = num_points / 2;
    let order = (half..num_points).chain(0..half);
    let (grid, magnitude) = order
        .map(|j| {
            let freq = if j < half { j as f64 } else { j as f64 - num_points as f64 };
            (freq * dw, buf[j].norm() * scale)
        })
        .unzip();
    Ok(Spectrum { grid, magnitude })
}

/// Bin edges on `|ω|`: `[0, 1, 2, 4, ..., max)` with a final open bin.
pub fn radial_bin_edges(max: f64) -> Vec<f64> {
    let mut edges = vec![0.0, 1.0];
    while *edges.last().unwrap() < max {
        let next = 2.0 * edges.last().unwrap();
        edges.push(next);
    }
    edges.push(f64::INFINITY);
    edges
}

fn bin_of(edges: &[f64], v: f64) -> Option<usize> {
    let v = v.abs();
    edges.windows(2).position(|w| v >= w[0] && v < w[1])
}

/// Probability mass of `p* = |f̂| / ‖f̂‖₁` in each `|ω|` bin.
pub fn spectrum_bin_probabilities(spectrum: &Spectrum, edges: &[f64]) -> Vec<f64> {
    let mut mass = vec![0.0; edges.len() - 1];
    for (w, m) in spectrum.grid.iter().zip(&spectrum.magnitude) {
        if let Some(b) = bin_of(edges, *w) {
            mass[b] += m;
        }
    }
    normalize(mass)
}

/// Empirical probability of each `|ω|` bin.
pub fn histogram_probabilities(values: &[f64], edges: &[f64]) -> Vec<f64> {
    let mut counts = vec![0.0; edges.len() - 1];
    for v in values {
        if let Some(b) = bin_of(edges, *v) {
            counts[b] += 1.0;
        }
    }
    normalize(counts)
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
    v
}

/// Total variation distance `½ Σ |p - q|` between probability vectors.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "probability vectors differ in length");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::targets::TargetKind;

    #[test]
    fn grid_is_symmetric_with_half_spacing() {
        let t = TargetFunction::new(TargetKind::Gauss { dim: 1 });
        let s = fft_fhat_magnitude(&t, 16).unwrap();
        assert_eq!(s.grid.len(), 16);
        assert_eq!(s.grid[0], -4.0);
        assert_eq!(s.grid[8], 0.0);
        assert!((s.spacing() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let t = TargetFunction::new(TargetKind::Gauss { dim: 2 });
        assert!(matches!(fft_fhat_magnitude(&t, 64), Err(Error::NotOneDimensional)));
        let t = TargetFunction::new(TargetKind::Gauss { dim: 1 });
        assert!(fft_fhat_magnitude(&t, 100).is_err());
    }

    #[test]
    fn bins_and_tv() {
        let edges = radial_bin_edges(4.0);
        assert_eq!(edges, vec![0.0, 1.0, 2.0, 4.0, f64::INFINITY]);
        let p = histogram_probabilities(&[0.5, -0.5, 1.5, -3.0, 100.0, 0.0], &edges);
        assert_eq!(p, vec![0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);
        assert_eq!(tv_distance(&p, &p), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
    }
}
