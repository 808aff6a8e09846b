//! Binary PNM rasters: P5 (PGM) label maps and P6 (PPM) color masks.
//!
//! Labels use the PGM convention directly: pixel value = class id, 0 =
//! unlabeled. Ids above 255 use the two-byte big-endian sample encoding
//! with a matching maxval. Only the binary variants are accepted; ASCII
//! `P2`/`P3` files are rejected as unsupported.

use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::LabelRaster;
use crate::polsar::feature::RgbRaster;

/// Whitespace-and-comment-aware header tokenizer.
struct HeaderScanner<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> HeaderScanner<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn skip_filler(&mut self) {
        while let Some(&b) = self.buf.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.buf.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<&'a [u8]> {
        self.skip_filler();
        let start = self.pos;
        while self
            .buf
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::MalformedHeader {
                detail: format!("missing {what}"),
                offset: start as u64,
            });
        }
        Ok(&self.buf[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        let at = self.pos;
        let tok = self.token(what)?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader {
                detail: format!("{what} is not a number"),
                offset: at as u64,
            })
    }

    /// Consumes the single whitespace byte separating header from payload.
    fn payload(self, what: &str) -> Result<&'a [u8]> {
        match self.buf.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(&self.buf[self.pos + 1..]),
            _ => Err(Error::MalformedHeader {
                detail: format!("{what} header must end with a whitespace byte"),
                offset: self.pos as u64,
            }),
        }
    }
}

fn check_magic(bytes: &[u8], expected: &'static str) -> Result<()> {
    let found = bytes.get(..2).unwrap_or(bytes);
    if found != expected.as_bytes() {
        let found = String::from_utf8_lossy(found).into_owned();
        // A well-formed but ASCII-encoded PNM gets the clearer error.
        return if found.starts_with('P') {
            Err(Error::UnsupportedPnm { found, expected })
        } else {
            Err(Error::BadMagic {
                expected: expected.to_string(),
                found,
            })
        };
    }
    Ok(())
}

/// Serializes labels as a binary PGM with maxval = largest class id.
pub fn labels_bytes(raster: &LabelRaster) -> Vec<u8> {
    let maxval = raster.data().iter().copied().max().unwrap_or(0).max(1);
    let mut out = format!("P5\n{} {}\n{}\n", raster.width(), raster.height(), maxval).into_bytes();
    if maxval > 255 {
        for &id in raster.data() {
            out.extend_from_slice(&id.to_be_bytes());
        }
    } else {
        out.extend(raster.data().iter().map(|&id| id as u8));
    }
    out
}

pub fn write_labels(raster: &LabelRaster, path: &Path) -> Result<()> {
    std::fs::write(path, labels_bytes(raster))?;
    Ok(())
}

pub fn parse_labels(bytes: &[u8]) -> Result<LabelRaster> {
    check_magic(bytes, "P5")?;
    let mut scan = HeaderScanner::new(bytes);
    scan.token("magic")?;
    let width = scan.number("width")? as usize;
    let height = scan.number("height")? as usize;
    let maxval = scan.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader {
            detail: format!("degenerate size {width}x{height}"),
            offset: 2,
        });
    }
    if maxval == 0 || maxval > 65_535 {
        return Err(Error::MalformedHeader {
            detail: format!("maxval {maxval} outside 1..=65535"),
            offset: 2,
        });
    }
    let header_len = bytes.len() - scan.payload("PGM")?.len();
    let payload = &bytes[header_len..];

    let wide = maxval > 255;
    let sample_bytes = if wide { 2 } else { 1 };
    let expected = width * height * sample_bytes;
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected: (header_len + expected) as u64,
            actual: bytes.len() as u64,
            offset: bytes.len() as u64,
        });
    }
    if payload.len() > expected {
        return Err(Error::MalformedHeader {
            detail: format!("{} trailing bytes after raster", payload.len() - expected),
            offset: (header_len + expected) as u64,
        });
    }
    let mut data = Vec::with_capacity(width * height);
    for (i, sample) in payload.chunks_exact(sample_bytes).enumerate() {
        let v = if wide {
            u16::from_be_bytes([sample[0], sample[1]])
        } else {
            sample[0] as u16
        };
        if v as u64 > maxval {
            return Err(Error::MalformedHeader {
                detail: format!("sample {v} exceeds maxval {maxval}"),
                offset: (header_len + i * sample_bytes) as u64,
            });
        }
        data.push(v);
    }
    LabelRaster::new(width, height, data)
}

pub fn read_labels(path: &Path) -> Result<LabelRaster> {
    parse_labels(&std::fs::read(path)?)
}

/// Renders labels through a palette as a binary PPM. `palette[id]` colors
/// class `id`; index 0 styles unlabeled pixels (conventionally black).
pub fn mask_bytes(raster: &LabelRaster, palette: &[[u8; 3]]) -> Result<Vec<u8>> {
    let max_id = raster.data().iter().copied().max().unwrap_or(0);
    if palette.len() <= max_id as usize {
        return Err(Error::PaletteTooShort {
            palette: palette.len(),
            max_id,
        });
    }
    let mut out = format!("P6\n{} {}\n255\n", raster.width(), raster.height()).into_bytes();
    for &id in raster.data() {
        out.extend_from_slice(&palette[id as usize]);
    }
    Ok(out)
}

pub fn write_mask(raster: &LabelRaster, palette: &[[u8; 3]], path: &Path) -> Result<()> {
    std::fs::write(path, mask_bytes(raster, palette)?)?;
    Ok(())
}

/// Serializes an RGB raster (e.g. a Pauli quicklook) as a binary PPM.
pub fn ppm_bytes(rgb: &RgbRaster) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", rgb.width(), rgb.height()).into_bytes();
    out.extend_from_slice(rgb.data());
    out
}

pub fn write_ppm(rgb: &RgbRaster, path: &Path) -> Result<()> {
    std::fs::write(path, ppm_bytes(rgb))?;
    Ok(())
}
