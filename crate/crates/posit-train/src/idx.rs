//! IDX file parsing: big-endian magic and dimensions, unsigned byte
//! payload. Images normalize to [0,1] by 1/255.

use std::path::{Path, PathBuf};

use posit_quant::TensorF;

use crate::TrainError;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> Result<u32, TrainError> {
        if self.offset + 4 > self.bytes.len() {
            return Err(TrainError::IdxParse {
                path: self.path.to_path_buf(),
                offset: self.offset,
                message: format!(
                    "truncated: need 4 bytes, file has {} left",
                    self.bytes.len() - self.offset
                ),
            });
        }
        let v = u32::from_be_bytes(self.bytes[self.offset..self.offset + 4].try_into().unwrap());
        self.offset += 4;
        Ok(v)
    }

    fn payload(&mut self, count: usize) -> Result<&'a [u8], TrainError> {
        if self.offset + count > self.bytes.len() {
            return Err(TrainError::IdxParse {
                path: self.path.to_path_buf(),
                offset: self.offset,
                message: format!(
                    "truncated payload: expected {count} bytes, file has {}",
                    self.bytes.len() - self.offset
                ),
            });
        }
        let out = &self.bytes[self.offset..self.offset + count];
        self.offset += count;
        Ok(out)
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, TrainError> {
    std::fs::read(path).map_err(|e| TrainError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Load an IDX image file as a [N, 1, H, W] tensor with pixels in
/// [0, 1].
pub fn load_idx_images(path: &Path) -> Result<TensorF, TrainError> {
    let bytes = read_file(path)?;
    let mut r = Reader {
        bytes: &bytes,
        offset: 0,
        path,
    };
    let magic = r.u32()?;
    if magic != IMAGES_MAGIC {
        return Err(TrainError::IdxParse {
            path: path.to_path_buf(),
            offset: 0,
            message: format!("bad magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"),
        });
    }
    let n = r.u32()? as usize;
    let h = r.u32()? as usize;
    let w = r.u32()? as usize;
    let pixels = r.payload(n * h * w)?;
    if r.offset != bytes.len() {
        return Err(TrainError::IdxParse {
            path: path.to_path_buf(),
            offset: r.offset,
            message: format!("{} trailing bytes", bytes.len() - r.offset),
        });
    }
    let data: Vec<f64> = pixels.iter().map(|&b| b as f64 / 255.0).collect();
    Ok(TensorF::new(vec![n, 1, h, w], data)?)
}

/// Load an IDX label file.
pub fn load_idx_labels(path: &Path) -> Result<Vec<u8>, TrainError> {
    let bytes = read_file(path)?;
    let mut r = Reader {
        bytes: &bytes,
        offset: 0,
        path,
    };
    let magic = r.u32()?;
    if magic != LABELS_MAGIC {
        return Err(TrainError::IdxParse {
            path: path.to_path_buf(),
            offset: 0,
            message: format!("bad magic {magic:#010x}, expected {LABELS_MAGIC:#010x}"),
        });
    }
    let n = r.u32()? as usize;
    let labels = r.payload(n)?.to_vec();
    if r.offset != bytes.len() {
        return Err(TrainError::IdxParse {
            path: path.to_path_buf(),
            offset: r.offset,
            message: format!("{} trailing bytes", bytes.len() - r.offset),
        });
    }
    Ok(labels)
}

/// A labelled image set.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub images: TensorF,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Per-channel standardization to zero mean / unit variance.
    pub fn standardize(&mut self) {
        let dims = self.images.dims().to_vec();
        let (n, c, h, w) = (dims[0], dims[1], dims[2], dims[3]);
        let plane = n * h * w;
        for ch in 0..c {
            let mut sum = 0.0;
            for i in 0..n {
                for p in 0..h * w {
                    sum += self.images.data()[(i * c + ch) * h * w + p];
                }
            }
            let mean = sum / plane as f64;
            let mut var = 0.0;
            for i in 0..n {
                for p in 0..h * w {
                    let d = self.images.data()[(i * c + ch) * h * w + p] - mean;
                    var += d * d;
                }
            }
            let std = (var / plane as f64).sqrt().max(1e-12);
            let data = self.images.data_mut();
            for i in 0..n {
                for p in 0..h * w {
                    let idx = (i * c + ch) * h * w + p;
                    data[idx] = (data[idx] - mean) / std;
                }
            }
        }
    }

    /// Copy out the batch starting at `start`, at most `size` items.
    pub fn batch(&self, start: usize, size: usize) -> (TensorF, &[u8]) {
        let dims = self.images.dims();
        let (c, h, w) = (dims[1], dims[2], dims[3]);
        let end = (start + size).min(self.len());
        let stride = c * h * w;
        let data = self.images.data()[start * stride..end * stride].to_vec();
        (
            TensorF::new(vec![end - start, c, h, w], data).unwrap(),
            &self.labels[start..end],
        )
    }
}

/// Load the `<split>-images-idx3-ubyte` / `<split>-labels-idx1-ubyte`
/// pair from a directory; `split` is `train` or `t10k`.
pub fn load_idx_dataset(dir: &Path, split: &str) -> Result<Dataset, TrainError> {
    let images_path: PathBuf = dir.join(format!("{split}-images-idx3-ubyte"));
    let labels_path: PathBuf = dir.join(format!("{split}-labels-idx1-ubyte"));
    let images = load_idx_images(&images_path)?;
    let labels = load_idx_labels(&labels_path)?;
    if images.dims()[0] != labels.len() {
        return Err(TrainError::IdxParse {
            path: labels_path,
            offset: 0,
            message: format!(
                "{} labels for {} images",
                labels.len(),
                images.dims()[0]
            ),
        });
    }
    Ok(Dataset { images, labels })
}
