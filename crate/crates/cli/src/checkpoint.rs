//! Model checkpoint format.
//!
//! Layout: the 6-byte magic `PXCNN1`, the model configuration as canonical
//! JSON (u32 LE length prefix), then each parameter tensor in layer order as
//! a u32 LE rank, u32 LE dims, and little-endian 64-bit floats.

use std::fs;
use std::path::Path;

use pxcnn_core::model::{Model, ModelConfig};
use pxcnn_core::Tensor;

use crate::error::AppError;

pub const MAGIC: &[u8; 6] = b"PXCNN1";

pub fn save_model(model: &Model, path: &Path) -> Result<(), AppError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    let config = serde_json::to_vec(model.config()).map_err(AppError::data)?;
    buf.extend_from_slice(&(config.len() as u32).to_le_bytes());
    buf.extend_from_slice(&config);
    let params = model.params();
    buf.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for tensor in params {
        buf.extend_from_slice(&(tensor.rank() as u32).to_le_bytes());
        for &dim in tensor.shape() {
            buf.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        for &value in tensor.data() {
            buf.extend_from_slice(&value.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(AppError::data)
}

pub fn load_model(path: &Path) -> Result<Model, AppError> {
    let bytes = fs::read(path)
        .map_err(|e| AppError::Checkpoint(format!("cannot read {}: {e}", path.display())))?;
    let mut cursor = Cursor::new(&bytes, path);
    let magic = cursor.take(MAGIC.len())?;
    if magic != MAGIC {
        return Err(AppError::Checkpoint(format!(
            "{} is not a pxcnn checkpoint (bad magic)",
            path.display()
        )));
    }
    let config_len = cursor.u32()? as usize;
    let config: ModelConfig =
        serde_json::from_slice(cursor.take(config_len)?).map_err(|e| {
            AppError::Checkpoint(format!("corrupt model configuration: {e}"))
        })?;
    let tensor_count = cursor.u32()? as usize;
    let mut tensors = Vec::with_capacity(tensor_count);
    for _ in 0..tensor_count {
        let rank = cursor.u32()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(cursor.u32()? as usize);
        }
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f64::from_le_bytes(
                cursor.take(8)?.try_into().expect("8 bytes"),
            ));
        }
        tensors.push(Tensor::new(&shape, data).map_err(AppError::checkpoint)?);
    }
    if !cursor.at_end() {
        return Err(AppError::Checkpoint(format!(
            "{} has trailing bytes",
            path.display()
        )));
    }
    Model::from_parts(config, tensors).map_err(AppError::checkpoint)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8], path: &'a Path) -> Self {
        Self {
            bytes,
            offset: 0,
            path,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], AppError> {
        if self.offset + n > self.bytes.len() {
            return Err(AppError::Checkpoint(format!(
                "{} is truncated",
                self.path.display()
            )));
        }
        let slice = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, AppError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn at_end(&self) -> bool {
        self.offset == self.bytes.len()
    }
}
