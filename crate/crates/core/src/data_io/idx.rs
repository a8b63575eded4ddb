use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;
const CLASSES: usize = 10;

/// Header of an unsigned-byte IDX file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxHeader {
    pub magic: u32,
    pub dims: Vec<u32>,
}

impl IdxHeader {
    fn byte_len(&self) -> usize {
        4 + 4 * self.dims.len()
    }

    fn payload_len(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }
}

/// Parsed IDX tensor: header plus raw bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxTensor {
    pub header: IdxHeader,
    pub data: Vec<u8>,
}

/// Parses an image (`2051`, three dims) or label (`2049`, one dim) file.
pub fn parse_idx(bytes: &[u8], path: &Path) -> Result<IdxTensor> {
    let truncated = |expected: usize| Error::TruncatedFile {
        path: path.to_path_buf(),
        expected,
        found: bytes.len(),
    };
    let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    if bytes.len() < 4 {
        return Err(truncated(4));
    }
    let magic = word(0);
    let ndims = match magic {
        IMAGE_MAGIC => 3,
        LABEL_MAGIC => 1,
        found => {
            return Err(Error::BadMagic {
                path: path.to_path_buf(),
                found,
            })
        }
    };
    if bytes.len() < 4 + 4 * ndims {
        return Err(truncated(4 + 4 * ndims));
    }
    let header = IdxHeader {
        magic,
        dims: (1..=ndims).map(word).collect(),
    };
    let expected = header.byte_len() + header.payload_len();
    if bytes.len() != expected {
        return Err(truncated(expected));
    }
    Ok(IdxTensor {
        data: bytes[header.byte_len()..].to_vec(),
        header,
    })
}

/// Inverse of [`parse_idx`].
pub fn serialize_idx(tensor: &IdxTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(tensor.header.byte_len() + tensor.data.len());
    out.extend_from_slice(&tensor.header.magic.to_be_bytes());
    for d in &tensor.header.dims {
        out.extend_from_slice(&d.to_be_bytes());
    }
    out.extend_from_slice(&tensor.data);
    out
}

pub fn read_idx(path: &Path) -> Result<IdxTensor> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx(&bytes, path)
}

/// Images as `N × (rows·cols)` raw pixel values with one-hot digit labels.
pub fn load_mnist(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = read_idx(images_path)?;
    let labels = read_idx(labels_path)?;
    if images.header.magic != IMAGE_MAGIC {
        return Err(Error::BadMagic {
            path: images_path.to_path_buf(),
            found: images.header.magic,
        });
    }
    if labels.header.magic != LABEL_MAGIC {
        return Err(Error::BadMagic {
            path: labels_path.to_path_buf(),
            found: labels.header.magic,
        });
    }
    mnist_from_tensors(&images, &labels)
}

pub fn mnist_from_tensors(images: &IdxTensor, labels: &IdxTensor) -> Result<Dataset> {
    let n = images.header.dims[0] as usize;
    let pixels = images.header.dims[1] as usize * images.header.dims[2] as usize;
    let count = labels.header.dims[0] as usize;
    if n != count {
        return Err(Error::CountMismatch {
            images: n,
            labels: count,
        });
    }
    if let Some(bad) = labels.data.iter().find(|&&l| l as usize >= CLASSES) {
        return Err(Error::InvalidDataset(format!("label {bad} is not a digit")));
    }
    let x = DMatrix::from_fn(n, pixels, |i, j| images.data[i * pixels + j] as f64);
    let digits: Vec<usize> = labels.data.iter().map(|&l| l as usize).collect();
    Dataset::classification(x, &digits, CLASSES)
}

/// The four standard file names inside an MNIST directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MnistPaths {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl MnistPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            train_images: dir.join("train-images-idx3-ubyte"),
            train_labels: dir.join("train-labels-idx1-ubyte"),
            test_images: dir.join("t10k-images-idx3-ubyte"),
            test_labels: dir.join("t10k-labels-idx1-ubyte"),
        }
    }

    pub fn load(&self) -> Result<(Dataset, Dataset)> {
        Ok((
            load_mnist(&self.train_images, &self.train_labels)?,
            load_mnist(&self.test_images, &self.test_labels)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(magic: u32, dims: &[u32], data: Vec<u8>) -> IdxTensor {
        IdxTensor {
            header: IdxHeader {
                magic,
                dims: dims.to_vec(),
            },
            data,
        }
    }

    #[test]
    fn tiny_images_and_labels() {
        let images = tensor(IMAGE_MAGIC, &[2, 2, 2], vec![0, 1, 2, 3, 255, 0, 0, 7]);
        let labels = tensor(LABEL_MAGIC, &[2], vec![7, 0]);
        let p = Path::new("mem");
        let images = parse_idx(&serialize_idx(&images), p).unwrap();
        let labels = parse_idx(&serialize_idx(&labels), p).unwrap();
        let data = mnist_from_tensors(&images, &labels).unwrap();
        assert_eq!(data.dim(), 4);
        assert_eq!(data.outputs(), 10);
        assert_eq!(data.x()[(1, 0)], 255.0);
        assert_eq!(data.labels().unwrap(), vec![7, 0]);
        assert_eq!(data.y()[(0, 7)], 1.0);
        assert_eq!(data.y().row(0).sum(), 1.0);
    }

    #[test]
    fn header_errors() {
        let p = Path::new("f");
        let mut bytes = serialize_idx(&tensor(LABEL_MAGIC, &[3], vec![1, 2, 3]));
        bytes[3] = 0x02;
        assert!(matches!(parse_idx(&bytes, p), Err(Error::BadMagic { found: 0x0802, .. })));
        let bytes = serialize_idx(&tensor(LABEL_MAGIC, &[3], vec![1, 2]));
        assert!(matches!(
            parse_idx(&bytes, p),
            Err(Error::TruncatedFile { expected: 11, found: 10, .. })
        ));
        assert!(matches!(parse_idx(&[0, 0], p), Err(Error::TruncatedFile { .. })));
    }

    #[test]
    fn count_mismatch() {
        let images = tensor(IMAGE_MAGIC, &[2, 1, 1], vec![0, 1]);
        let labels = tensor(LABEL_MAGIC, &[3], vec![0, 1, 2]);
        assert!(matches!(
            mnist_from_tensors(&images, &labels),
            Err(Error::CountMismatch { images: 2, labels: 3 })
        ));
    }
}
