//! On-disk formats: feature cubes, polarimetric inputs, PNM rasters,
//! model files, and the small text formats (CSV tables, remap rules,
//! palettes, config files).
//!
//! Every binary format is self-describing (magic, explicit dimensions) and
//! fails closed: any inconsistency between header and payload is an error
//! carrying the byte offset where it was detected. Serialization is
//! canonical — equal in-memory values produce byte-identical files.

pub mod cube;
pub mod model;
pub mod pnm;
pub mod polarimetric;
pub mod tables;

use crate::error::{Error, Result};

/// Cursor over an in-memory file image with offset-aware errors.
pub(crate) struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn offset(&self) -> u64 {
        self.pos as u64
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Truncated {
                expected: (self.pos + n) as u64,
                actual: self.buf.len() as u64,
                offset: self.pos as u64,
            });
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    /// Verifies and consumes the magic bytes.
    pub fn magic(&mut self, expected: &str) -> Result<()> {
        let found = self.take(expected.len()).map_err(|_| Error::BadMagic {
            expected: expected.to_string(),
            found: String::from_utf8_lossy(self.buf).into_owned(),
        })?;
        if found != expected.as_bytes() {
            return Err(Error::BadMagic {
                expected: expected.to_string(),
                found: String::from_utf8_lossy(found).into_owned(),
            });
        }
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Length-prefixed UTF-8 string (u32 length).
    pub fn string(&mut self) -> Result<String> {
        let at = self.offset();
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::MalformedHeader {
            detail: "string field is not valid UTF-8".into(),
            offset: at,
        })
    }

    /// A `usize` dimension that must fit the platform and be non-zero.
    pub fn dimension(&mut self, what: &str) -> Result<usize> {
        let at = self.offset();
        let v = self.u32()?;
        if v == 0 {
            return Err(Error::MalformedHeader {
                detail: format!("{what} must be positive"),
                offset: at,
            });
        }
        Ok(v as usize)
    }

    /// Fails unless the whole buffer has been consumed.
    pub fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::MalformedHeader {
                detail: format!("{} trailing bytes after payload", self.remaining()),
                offset: self.pos as u64,
            });
        }
        Ok(())
    }
}

pub(crate) fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_string(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}
