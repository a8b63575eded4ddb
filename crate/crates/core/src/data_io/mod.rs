//! MNIST IDX files, experiment configuration files and result tables.

mod config;
mod idx;
mod results;

pub use crate::experiments::{ExperimentConfig, ResultRow};
pub use config::{
    dump_config, dump_sigma_config, load_config, load_sigma_config, parse_config,
    parse_sigma_config,
};
pub use idx::{
    load_mnist, mnist_from_tensors, parse_idx, read_idx, serialize_idx, IdxHeader, IdxTensor,
    MnistPaths, IMAGE_MAGIC, LABEL_MAGIC,
};
pub use results::{format_significant, write_checkpoints, write_results, write_results_to, RESULT_HEADER};
