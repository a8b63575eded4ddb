pub mod baselines;
pub mod cli;
pub mod data_io;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod features;
pub mod linalg;
pub mod model;
pub mod sampler;
pub mod solver;

pub use nalgebra::{Complex, DMatrix, DVector};
pub type Complex64 = Complex<f64>;

pub use error::{Error, Result};
