//! The PSTM tensor container: magic `PSTM`, a little-endian u32
//! version and tensor count, then per tensor a u32 name length, the
//! UTF-8 name, a u32 dimension count, u32 dimensions, and the
//! little-endian f64 payload.

use std::io::Write;
use std::path::Path;

use posit_quant::TensorF;

use crate::TrainError;

pub const MAGIC: &[u8; 4] = b"PSTM";
pub const VERSION: u32 = 1;

pub fn write_checkpoint(path: &Path, entries: &[(String, TensorF)]) -> Result<(), TrainError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for (name, tensor) in entries {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.extend_from_slice(&(tensor.dims().len() as u32).to_le_bytes());
        for &d in tensor.dims() {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in tensor.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| TrainError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    file.write_all(&buf).map_err(|e| TrainError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn fail(&self, message: String) -> TrainError {
        TrainError::CheckpointParse {
            path: self.path.to_path_buf(),
            offset: self.offset,
            message,
        }
    }

    fn take(&mut self, count: usize) -> Result<&'a [u8], TrainError> {
        if self.offset + count > self.bytes.len() {
            return Err(self.fail(format!(
                "truncated: need {count} bytes, {} left",
                self.bytes.len() - self.offset
            )));
        }
        let out = &self.bytes[self.offset..self.offset + count];
        self.offset += count;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, TrainError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn read_checkpoint(path: &Path) -> Result<Vec<(String, TensorF)>, TrainError> {
    let bytes = std::fs::read(path).map_err(|e| TrainError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut r = Reader {
        bytes: &bytes,
        offset: 0,
        path,
    };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(TrainError::CheckpointParse {
            path: path.to_path_buf(),
            offset: 0,
            message: format!("bad magic {magic:?}, expected {MAGIC:?}"),
        });
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.fail(format!("unsupported version {version}")));
    }
    let count = r.u32()? as usize;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = r.u32()? as usize;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|e| r.fail(format!("tensor name is not UTF-8: {e}")))?;
        let ndim = r.u32()? as usize;
        let mut dims = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            dims.push(r.u32()? as usize);
        }
        let len: usize = dims.iter().product();
        let payload = r.take(len * 8)?;
        let data: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        entries.push((name, TensorF::new(dims, data)?));
    }
    if r.offset != bytes.len() {
        return Err(r.fail(format!("{} trailing bytes", bytes.len() - r.offset)));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.pstm");
        let entries = vec![
            (
                "conv1.weight".to_string(),
                TensorF::new(vec![2, 1, 3, 3], (0..18).map(|i| i as f64 * 0.5).collect()).unwrap(),
            ),
            ("conv1.bias".to_string(), TensorF::zeros(vec![2])),
        ];
        write_checkpoint(&path, &entries).unwrap();
        let back = read_checkpoint(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].0, "conv1.weight");
        assert_eq!(back[0].1.dims(), &[2, 1, 3, 3]);
        assert_eq!(back[0].1.data(), entries[0].1.data());
    }

    #[test]
    fn rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.pstm");
        write_checkpoint(&path, &[("t".into(), TensorF::zeros(vec![4]))]).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&path, &bytes).unwrap();
        match read_checkpoint(&path) {
            Err(TrainError::CheckpointParse { offset, .. }) => assert!(offset > 0),
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::write(&path, b"nope").unwrap();
        assert!(matches!(
            read_checkpoint(&path),
            Err(TrainError::CheckpointParse { offset: 0, .. })
        ));
    }
}
