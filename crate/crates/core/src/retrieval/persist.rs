//! `SKIX1` binary layout (all integers little-endian):
//!
//! ```text
//! magic        5 bytes  "SKIX1"
//! doc_count    u32
//! docs         doc_count x (pair_id u32, length u32), ascending pair id
//! total_length u64
//! term_count   u32
//! terms        term_count x (byte_len u32, utf8 bytes, n u32, n x (pair_id u32, tf u32))
//!              ascending by token bytes
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{InvertedIndex, Posting};
use crate::corpus::{PairId, Token};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"SKIX1";

#[derive(Serialize)]
struct IndexDump<'a> {
    doc_count: usize,
    total_length: u64,
    doc_length: BTreeMap<u32, u32>,
    df: BTreeMap<&'a str, usize>,
    postings: BTreeMap<&'a str, Vec<(u32, u32)>>,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|end| *end <= self.bytes.len())
            .ok_or_else(|| Error::IndexFormat(format!("truncated at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

impl InvertedIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.doc_length.len() as u32).to_le_bytes());
        for (id, len) in &self.doc_length {
            out.extend_from_slice(&id.0.to_le_bytes());
            out.extend_from_slice(&len.to_le_bytes());
        }
        out.extend_from_slice(&self.total_length.to_le_bytes());
        let mut terms: Vec<(&Token, &Vec<Posting>)> = self.postings.iter().collect();
        terms.sort_by(|a, b| a.0.as_str().as_bytes().cmp(b.0.as_str().as_bytes()));
        out.extend_from_slice(&(terms.len() as u32).to_le_bytes());
        for (token, list) in terms {
            let bytes = token.as_str().as_bytes();
            out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
            out.extend_from_slice(bytes);
            out.extend_from_slice(&(list.len() as u32).to_le_bytes());
            for p in list {
                out.extend_from_slice(&p.pair.0.to_le_bytes());
                out.extend_from_slice(&p.tf.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::IndexFormat("bad magic, expected SKIX1".into()));
        }
        let mut index = InvertedIndex::new();
        let doc_count = r.u32()?;
        for _ in 0..doc_count {
            let id = PairId(r.u32()?);
            let len = r.u32()?;
            if index.doc_length.insert(id, len).is_some() {
                return Err(Error::IndexFormat(format!("duplicate document {id}")));
            }
        }
        index.total_length = r.u64()?;
        let summed: u64 = index.doc_length.values().map(|l| u64::from(*l)).sum();
        if summed != index.total_length {
            return Err(Error::IndexFormat(
                "total length disagrees with document lengths".into(),
            ));
        }
        let term_count = r.u32()?;
        for _ in 0..term_count {
            let len = r.u32()? as usize;
            let surface = std::str::from_utf8(r.take(len)?)
                .map_err(|e| Error::IndexFormat(format!("token is not UTF-8: {e}")))?;
            let token = Token::new(surface)?;
            let n = r.u32()?;
            let mut list = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let pair = PairId(r.u32()?);
                let tf = r.u32()?;
                if tf == 0 || !index.doc_length.contains_key(&pair) {
                    return Err(Error::IndexFormat(format!("bad posting ({pair}, {tf})")));
                }
                if list.last().is_some_and(|p: &Posting| p.pair >= pair) {
                    return Err(Error::IndexFormat("postings not sorted by pair id".into()));
                }
                list.push(Posting { pair, tf });
            }
            index.postings.insert(token, list);
        }
        if r.pos != bytes.len() {
            return Err(Error::IndexFormat("trailing bytes".into()));
        }
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Human-readable dump with sorted keys.
    pub fn to_json(&self) -> String {
        let dump = IndexDump {
            doc_count: self.doc_count(),
            total_length: self.total_length,
            doc_length: self.doc_length.iter().map(|(k, v)| (k.0, *v)).collect(),
            df: self
                .postings
                .iter()
                .map(|(t, l)| (t.as_str(), l.len()))
                .collect(),
            postings: self
                .postings
                .iter()
                .map(|(t, l)| (t.as_str(), l.iter().map(|p| (p.pair.0, p.tf)).collect()))
                .collect(),
        };
        serde_json::to_string_pretty(&dump).expect("index dump serializes")
    }
}
