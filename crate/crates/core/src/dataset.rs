//! Datasets and the mean/standard-deviation normalization applied before
//! training.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `N` input points in `d` dimensions with `C` outputs per point.
///
/// `C = 1` is scalar regression. `C > 1` holds one-hot class labels; those
/// rows must sum to exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::InvalidDataset("dataset has no points".into()));
        }
        if x.ncols() == 0 {
            return Err(Error::InvalidDataset("points have zero features".into()));
        }
        if y.ncols() == 0 {
            return Err(Error::InvalidDataset("labels have zero columns".into()));
        }
        if y.nrows() != x.nrows() {
            return Err(Error::DimensionMismatch {
                context: "dataset labels",
                expected: x.nrows(),
                got: y.nrows(),
            });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite entry".into()));
        }
        if y.ncols() > 1 {
            for (n, row) in y.row_iter().enumerate() {
                let ones = row.iter().filter(|&&v| v == 1.0).count();
                let zeros = row.iter().filter(|&&v| v == 0.0).count();
                if ones != 1 || ones + zeros != row.len() {
                    return Err(Error::InvalidDataset(format!(
                        "label row {n} is not one-hot"
                    )));
                }
            }
        }
        Ok(Self { x, y })
    }

    /// Scalar-target dataset from a feature matrix and a target vector.
    pub fn regression(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let n = y.len();
        Self::new(x, DMatrix::from_column_slice(n, 1, y.as_slice()))
    }

    /// One-hot dataset from class indices in `0..classes`.
    pub fn classification(x: DMatrix<f64>, labels: &[usize], classes: usize) -> Result<Self> {
        let mut y = DMatrix::zeros(labels.len(), classes);
        for (n, &label) in labels.iter().enumerate() {
            if label >= classes {
                return Err(Error::InvalidDataset(format!(
                    "label {label} out of range for {classes} classes"
                )));
            }
            y[(n, label)] = 1.0;
        }
        Self::new(x, y)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.y.ncols()
    }

    pub fn is_classification(&self) -> bool {
        self.y.ncols() > 1
    }

    /// Class index of every row (the position of the one).
    pub fn labels(&self) -> Option<Vec<usize>> {
        if !self.is_classification() {
            return None;
        }
        Some(
            self.y
                .row_iter()
                .map(|row| row.iter().position(|&v| v == 1.0).unwrap_or(0))
                .collect(),
        )
    }

    pub fn into_parts(self) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.x, self.y)
    }

    /// Appends the constant bias feature used with sigmoid activations.
    pub fn with_bias(self) -> Self {
        Self {
            x: crate::features::augment_bias(&self.x),
            y: self.y,
        }
    }

    /// The first `n` rows.
    pub fn head(&self, n: usize) -> Result<Self> {
        let n = n.min(self.len());
        Self::new(self.x.rows(0, n).into_owned(), self.y.rows(0, n).into_owned())
    }
}

/// Column means and sample standard deviations of the training data.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationStats {
    pub x_mean: DVector<f64>,
    pub x_std: DVector<f64>,
    pub y_mean: DVector<f64>,
    pub y_std: DVector<f64>,
}

/// What to do with a feature column whose standard deviation is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstantColumns {
    /// Fail with [`Error::ConstantColumn`].
    #[default]
    Reject,
    /// Subtract the mean and keep a unit scale. Needed for image data with
    /// pixels that never change.
    CenterOnly,
}

impl NormalizationStats {
    /// Stats that leave data unchanged.
    pub fn identity(dim: usize, outputs: usize) -> Self {
        Self {
            x_mean: DVector::zeros(dim),
            x_std: DVector::from_element(dim, 1.0),
            y_mean: DVector::zeros(outputs),
            y_std: DVector::from_element(outputs, 1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.x_mean.len()
    }

    pub fn outputs(&self) -> usize {
        self.y_mean.len()
    }

    /// Maps raw inputs to the normalized coordinates the model was trained in.
    pub fn normalize_x(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut out = x.clone();
        self.normalize_x_in_place(&mut out)?;
        Ok(out)
    }

    fn normalize_x_in_place(&self, x: &mut DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "normalize inputs",
                expected: self.dim(),
                got: x.ncols(),
            });
        }
        for (j, mut col) in x.column_iter_mut().enumerate() {
            let (mean, std) = (self.x_mean[j], self.x_std[j]);
            col.apply(|v| *v = (*v - mean) / std);
        }
        Ok(())
    }

    fn normalize_y_in_place(&self, y: &mut DMatrix<f64>) -> Result<()> {
        if y.ncols() != self.outputs() {
            return Err(Error::DimensionMismatch {
                context: "normalize labels",
                expected: self.outputs(),
                got: y.ncols(),
            });
        }
        for (c, mut col) in y.column_iter_mut().enumerate() {
            let (mean, std) = (self.y_mean[c], self.y_std[c]);
            col.apply(|v| *v = (*v - mean) / std);
        }
        Ok(())
    }

    /// Maps normalized outputs back to the original label scale.
    pub fn denormalize_y(&self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if y.ncols() != self.outputs() {
            return Err(Error::DimensionMismatch {
                context: "denormalize labels",
                expected: self.outputs(),
                got: y.ncols(),
            });
        }
        let mut out = y.clone();
        for (c, mut col) in out.column_iter_mut().enumerate() {
            let (mean, std) = (self.y_mean[c], self.y_std[c]);
            col.apply(|v| *v = *v * std + mean);
        }
        Ok(out)
    }

    /// Normalizes a dataset (typically test data) with these stats.
    pub fn apply(&self, data: Dataset) -> Result<Dataset> {
        let (mut x, mut y) = data.into_parts();
        self.normalize_x_in_place(&mut x)?;
        self.normalize_y_in_place(&mut y)?;
        Ok(Dataset { x, y })
    }

    /// Inverse of [`apply`](Self::apply).
    pub fn invert(&self, data: &Dataset) -> Result<Dataset> {
        let mut x = data.x.clone();
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "denormalize inputs",
                expected: self.dim(),
                got: x.ncols(),
            });
        }
        for (j, mut col) in x.column_iter_mut().enumerate() {
            let (mean, std) = (self.x_mean[j], self.x_std[j]);
            col.apply(|v| *v = *v * std + mean);
        }
        let y = self.denormalize_y(&data.y)?;
        Ok(Dataset { x, y })
    }
}

fn column_mean_std(col: nalgebra::DVectorView<'_, f64>) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = col.sum() / n;
    let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Shifts every column to mean zero and scales it to unit sample standard
/// deviation (`N - 1` denominator). Constant columns are an error.
///
/// One-hot label columns (`C > 1`) are passed through unchanged; their stats
/// are recorded as mean 0, std 1.
pub fn normalize_dataset(data: Dataset) -> Result<(Dataset, NormalizationStats)> {
    normalize_dataset_with(data, ConstantColumns::Reject)
}

pub fn normalize_dataset_with(
    data: Dataset,
    constant: ConstantColumns,
) -> Result<(Dataset, NormalizationStats)> {
    fit_and_apply(data, |j, std| {
        if std > 0.0 {
            Ok(std)
        } else {
            match constant {
                ConstantColumns::Reject => Err(Error::ConstantColumn(j)),
                ConstantColumns::CenterOnly => Ok(1.0),
            }
        }
    })
}

/// Centers every input column and divides all of them by one common `scale`
/// (255 for 8-bit pixels). Standardizing pixels one by one gives rarely lit
/// border pixels huge values that swamp `ω·x`; a common scale keeps distances
/// between images intact. Outputs are handled as in [`normalize_dataset`].
pub fn normalize_dataset_common_scale(
    data: Dataset,
    scale: f64,
) -> Result<(Dataset, NormalizationStats)> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::validation("scale", "must be positive"));
    }
    fit_and_apply(data, |_, _| Ok(scale))
}

/// Fits column means and output stats; `x_scale(j, std)` picks the divisor of
/// input column `j`.
fn fit_and_apply(
    data: Dataset,
    x_scale: impl Fn(usize, f64) -> Result<f64>,
) -> Result<(Dataset, NormalizationStats)> {
    if data.len() < 2 {
        return Err(Error::InvalidDataset(
            "normalization needs at least two points".into(),
        ));
    }
    let (d, c) = (data.dim(), data.outputs());
    let mut stats = NormalizationStats::identity(d, c);
    for (j, col) in data.x.column_iter().enumerate() {
        let (mean, std) = column_mean_std(col);
        stats.x_mean[j] = mean;
        stats.x_std[j] = x_scale(j, std)?;
    }
    if c == 1 {
        let (mean, std) = column_mean_std(data.y.column(0));
        if std <= 0.0 {
            return Err(Error::ConstantColumn(d));
        }
        stats.y_mean[0] = mean;
        stats.y_std[0] = std;
    }
    let normalized = stats.apply(data)?;
    Ok((normalized, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn mean_std(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        (m, s)
    }

    #[test]
    fn common_scale_centers_and_divides() {
        let x = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 255.0, 0.0, 0.0, 0.0]);
        let data = Dataset::classification(x, &[0, 1, 1], 2).unwrap();
        let (norm, stats) = normalize_dataset_common_scale(data, 255.0).unwrap();
        assert_eq!(stats.x_std.as_slice(), &[255.0, 255.0]);
        assert!((stats.x_mean[0] - 85.0).abs() < 1e-12);
        assert!((norm.x()[(1, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(norm.x().column(1).iter().filter(|v| **v != 0.0).count(), 0);
        assert_eq!(norm.labels().unwrap(), vec![0, 1, 1]);
        let data = Dataset::classification(DMatrix::zeros(2, 1), &[0, 1], 2).unwrap();
        assert!(normalize_dataset_common_scale(data, 0.0).is_err());
    }

    #[test]
    fn two_point_symmetry() {
        let data = Dataset::regression(
            DMatrix::from_column_slice(2, 1, &[0.0, 2.0]),
            DVector::from_vec(vec![0.0, 2.0]),
        )
        .unwrap();
        let (norm, stats) = normalize_dataset(data).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((norm.x()[(0, 0)] + h).abs() < 1e-15);
        assert!((norm.x()[(1, 0)] - h).abs() < 1e-15);
        assert_eq!(norm.x().as_slice(), norm.y().as_slice());
        assert_eq!(stats.x_mean[0], 1.0);
        assert_eq!(stats.y_mean[0], 1.0);
        assert!((stats.x_std[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((stats.y_std[0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normalized_data_is_a_fixed_point() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let x = DMatrix::from_fn(50, 3, |_, _| normal.sample(&mut rng));
        let y = DVector::from_fn(50, |_, _| normal.sample(&mut rng));
        let (once, _) = normalize_dataset(Dataset::regression(x, y).unwrap()).unwrap();
        let (twice, stats) = normalize_dataset(once.clone()).unwrap();
        assert!((once.x() - twice.x()).amax() < 1e-12);
        assert!((once.y() - twice.y()).amax() < 1e-12);
        assert!(stats.x_mean.amax() < 1e-12);
        assert!(stats.x_std.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn large_gaussian_sample_is_standardized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(5.0, 3.0).unwrap();
        let x = DMatrix::from_fn(1000, 1, |_, _| normal.sample(&mut rng));
        let y = DVector::from_fn(1000, |_, _| normal.sample(&mut rng));
        let (norm, _) = normalize_dataset(Dataset::regression(x, y).unwrap()).unwrap();
        for col in [norm.x().as_slice(), norm.y().as_slice()] {
            let (m, s) = mean_std(col);
            assert!(m.abs() < 1e-12, "mean {m}");
            assert!((s - 1.0).abs() < 1e-12, "std {s}");
        }
    }

    #[test]
    fn stats_invert_the_map() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 10.0, 2.0, -3.0, 7.5, 4.0, -1.0, 0.5]);
        let y = DVector::from_vec(vec![3.0, 1.0, 4.0, 1.5]);
        let data = Dataset::regression(x, y).unwrap();
        let (norm, stats) = normalize_dataset(data.clone()).unwrap();
        let back = stats.invert(&norm).unwrap();
        assert!((back.x() - data.x()).amax() < 1e-12);
        assert!((back.y() - data.y()).amax() < 1e-12);
    }

    #[test]
    fn constant_columns() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 4.0]);
        let data = Dataset::regression(x, y.clone()).unwrap();
        assert!(matches!(
            normalize_dataset(data.clone()),
            Err(Error::ConstantColumn(1))
        ));
        let (norm, stats) = normalize_dataset_with(data, ConstantColumns::CenterOnly).unwrap();
        assert_eq!(stats.x_std[1], 1.0);
        assert!(norm.x().column(1).iter().all(|&v| v == 0.0));

        let flat = Dataset::regression(
            DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]),
            DVector::from_element(3, 2.0),
        )
        .unwrap();
        assert!(matches!(normalize_dataset(flat), Err(Error::ConstantColumn(1))));
    }

    #[test]
    fn one_hot_labels_pass_through() {
        let x = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 2.0]);
        let data = Dataset::classification(x, &[2, 0, 1], 3).unwrap();
        let (norm, stats) = normalize_dataset(data.clone()).unwrap();
        assert_eq!(norm.y(), data.y());
        assert_eq!(stats.y_std, DVector::from_element(3, 1.0));
        assert_eq!(norm.labels().unwrap(), vec![2, 0, 1]);
    }

    #[test]
    fn rejects_bad_shapes() {
        let y = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]);
        assert!(Dataset::new(DMatrix::zeros(2, 1), y).is_err());
        assert!(Dataset::new(DMatrix::zeros(2, 0), DMatrix::zeros(2, 1)).is_err());
        assert!(Dataset::new(DMatrix::zeros(2, 1), DMatrix::zeros(3, 1)).is_err());
        let mut x = DMatrix::zeros(2, 1);
        x[(0, 0)] = f64::NAN;
        assert!(Dataset::new(x, DMatrix::zeros(2, 1)).is_err());
    }
}
