//! Flat tensor file: an 8-byte little-endian header length, a JSON header
//! describing the tensors, then the raw little-endian `f32` payload with
//! tensors laid out back to back in header order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
}

impl TensorInfo {
    fn numel(&self) -> usize {
        self.shape.iter().product()
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    tensors: Vec<TensorInfo>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFile {
    pub tensors: Vec<(TensorInfo, Vec<f32>)>,
}

impl WeightFile {
    pub fn tensor(&self, name: &str) -> Result<(&[usize], &[f32])> {
        self.tensors
            .iter()
            .find(|(info, _)| info.name == name)
            .map(|(info, data)| (info.shape.as_slice(), data.as_slice()))
            .ok_or_else(|| Error::WeightFormat(format!("tensor {name:?} not found")))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            tensors: self.tensors.iter().map(|(i, _)| i.clone()).collect(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::new();
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, data) in &self.tensors {
            for x in data {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let truncated = || Error::WeightFormat("truncated file".into());
        let len_bytes: [u8; 8] = bytes.get(..8).ok_or_else(truncated)?.try_into().unwrap();
        let header_len = usize::try_from(u64::from_le_bytes(len_bytes))
            .map_err(|_| Error::WeightFormat("header length overflows".into()))?;
        let header_end = 8usize.checked_add(header_len).ok_or_else(truncated)?;
        let header: Header =
            serde_json::from_slice(bytes.get(8..header_end).ok_or_else(truncated)?)
                .map_err(|e| Error::WeightFormat(format!("bad header: {e}")))?;
        let mut pos = header_end;
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for info in header.tensors {
            let n = info.numel();
            let end = pos + n * 4;
            let raw = bytes.get(pos..end).ok_or_else(truncated)?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            tensors.push((info, data));
            pos = end;
        }
        if pos != bytes.len() {
            return Err(Error::WeightFormat("trailing bytes after payload".into()));
        }
        Ok(WeightFile { tensors })
    }
}

pub fn read_weight_file(path: &Path) -> Result<WeightFile> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    WeightFile::from_bytes(&bytes)
}

pub fn write_weight_file(path: &Path, weights: &WeightFile) -> Result<()> {
    fs::write(path, weights.to_bytes()).map_err(|e| Error::io(path, e))
}
