//! Polarimetric input formats.
//!
//! `POLS1` — single-look scattering stacks:
//!
//! ```text
//! "POLS1"
//! u32 width, u32 height, u32 looks (≥ 1)
//! per look, row-major per pixel: f64 re/im of S_hh, S_hv, S_vv
//! ```
//!
//! `POLH1` — precomputed Hermitian (coherency/covariance) images:
//!
//! ```text
//! "POLH1"
//! u32 width, u32 height
//! u8  basis: 0 = Pauli (T), 1 = lexicographic (C)
//! per pixel, row-major: f64 d11, d22, d33,
//!                       re/im m12, re/im m13, re/im m23
//! ```
//!
//! All floats little-endian; no trailing bytes.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polsar::{Basis, Hermitian3, HermitianImage, ScatteringImage, ScatteringPixel};

use super::{put_f64, put_u32, ByteReader};

const SCATTERING_MAGIC: &str = "POLS1";
const HERMITIAN_MAGIC: &str = "POLH1";

/// Either polarimetric input the feature extractor accepts.
pub enum PolarimetricInput {
    Scattering(ScatteringImage),
    /// Hermitian image together with the basis its matrices live in.
    Hermitian(HermitianImage, Basis),
}

pub fn scattering_bytes(img: &ScatteringImage) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(SCATTERING_MAGIC.as_bytes());
    put_u32(&mut out, img.width() as u32);
    put_u32(&mut out, img.height() as u32);
    put_u32(&mut out, img.num_looks() as u32);
    for look in 0..img.num_looks() {
        for p in img.look(look) {
            for c in [p.s_hh, p.s_hv, p.s_vv] {
                put_f64(&mut out, c.re);
                put_f64(&mut out, c.im);
            }
        }
    }
    out
}

pub fn write_scattering(img: &ScatteringImage, path: &Path) -> Result<()> {
    std::fs::write(path, scattering_bytes(img))?;
    Ok(())
}

pub fn parse_scattering(bytes: &[u8]) -> Result<ScatteringImage> {
    let mut r = ByteReader::new(bytes);
    r.magic(SCATTERING_MAGIC)?;
    let width = r.dimension("width")?;
    let height = r.dimension("height")?;
    let num_looks = r.dimension("look count")?;
    let mut looks = Vec::with_capacity(num_looks);
    for _ in 0..num_looks {
        let mut plane = Vec::with_capacity(width * height);
        for _ in 0..width * height {
            let mut c = [Complex64::ZERO; 3];
            for entry in &mut c {
                *entry = Complex64::new(r.f64()?, r.f64()?);
            }
            plane.push(ScatteringPixel::new(c[0], c[1], c[2]));
        }
        looks.push(plane);
    }
    r.finish()?;
    ScatteringImage::new(width, height, looks)
}

pub fn read_scattering(path: &Path) -> Result<ScatteringImage> {
    parse_scattering(&std::fs::read(path)?)
}

fn basis_byte(basis: Basis) -> u8 {
    match basis {
        Basis::Pauli => 0,
        Basis::Lexicographic => 1,
    }
}

pub fn hermitian_bytes(img: &HermitianImage, basis: Basis) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(HERMITIAN_MAGIC.as_bytes());
    put_u32(&mut out, img.width() as u32);
    put_u32(&mut out, img.height() as u32);
    out.push(basis_byte(basis));
    for h in img.pixels() {
        for v in [h.d11, h.d22, h.d33] {
            put_f64(&mut out, v);
        }
        for m in [h.m12, h.m13, h.m23] {
            put_f64(&mut out, m.re);
            put_f64(&mut out, m.im);
        }
    }
    out
}

pub fn write_hermitian(img: &HermitianImage, basis: Basis, path: &Path) -> Result<()> {
    std::fs::write(path, hermitian_bytes(img, basis))?;
    Ok(())
}

pub fn parse_hermitian(bytes: &[u8]) -> Result<(HermitianImage, Basis)> {
    let mut r = ByteReader::new(bytes);
    r.magic(HERMITIAN_MAGIC)?;
    let width = r.dimension("width")?;
    let height = r.dimension("height")?;
    let basis_at = r.offset();
    let basis = match r.u8()? {
        0 => Basis::Pauli,
        1 => Basis::Lexicographic,
        other => {
            return Err(Error::MalformedHeader {
                detail: format!("basis tag must be 0 (Pauli) or 1 (lexicographic), got {other}"),
                offset: basis_at,
            })
        }
    };
    let mut data = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        let mut h = Hermitian3::diagonal(r.f64()?, r.f64()?, r.f64()?);
        h.m12 = Complex64::new(r.f64()?, r.f64()?);
        h.m13 = Complex64::new(r.f64()?, r.f64()?);
        h.m23 = Complex64::new(r.f64()?, r.f64()?);
        data.push(h);
    }
    r.finish()?;
    Ok((HermitianImage::new(width, height, data)?, basis))
}

pub fn read_hermitian(path: &Path) -> Result<(HermitianImage, Basis)> {
    parse_hermitian(&std::fs::read(path)?)
}

/// Reads either input format, dispatching on the magic bytes.
pub fn read_polarimetric(path: &Path) -> Result<PolarimetricInput> {
    let bytes = std::fs::read(path)?;
    match bytes.get(..5) {
        Some(m) if m == SCATTERING_MAGIC.as_bytes() => {
            Ok(PolarimetricInput::Scattering(parse_scattering(&bytes)?))
        }
        Some(m) if m == HERMITIAN_MAGIC.as_bytes() => {
            let (img, basis) = parse_hermitian(&bytes)?;
            Ok(PolarimetricInput::Hermitian(img, basis))
        }
        _ => Err(Error::BadMagic {
            expected: format!("{SCATTERING_MAGIC} or {HERMITIAN_MAGIC}"),
            found: String::from_utf8_lossy(bytes.get(..5).unwrap_or(&bytes)).into_owned(),
        }),
    }
}
