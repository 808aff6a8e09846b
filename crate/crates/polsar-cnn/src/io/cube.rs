//! Feature-cube file format (`POLC1`).
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "POLC1"
//! u32 width, u32 height, u32 channels
//! u8  stage: 0 = linear, 1 = db, 2 = scaled
//! per channel: u32 name length, UTF-8 name bytes
//! u8  has_scaling; if 1, per channel: f64 min_db, f64 max_db
//! per channel, row-major: width·height f64 values
//! ```
//!
//! No padding, no trailing bytes. Scaled cubes always carry scaling
//! records; the stage byte and the flag must agree.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::polsar::feature::{Channel, FeatureCube, ScaleRecord, Stage};

use super::{put_f64, put_string, put_u32, ByteReader};

const MAGIC: &str = "POLC1";

fn stage_byte(stage: Stage) -> u8 {
    match stage {
        Stage::Linear => 0,
        Stage::Db => 1,
        Stage::Scaled => 2,
    }
}

fn stage_from_byte(b: u8, offset: u64) -> Result<Stage> {
    match b {
        0 => Ok(Stage::Linear),
        1 => Ok(Stage::Db),
        2 => Ok(Stage::Scaled),
        other => Err(Error::MalformedHeader {
            detail: format!("unknown stage tag {other}"),
            offset,
        }),
    }
}

/// Serializes a cube to its canonical byte image.
pub fn cube_bytes(cube: &FeatureCube) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC.as_bytes());
    put_u32(&mut out, cube.width() as u32);
    put_u32(&mut out, cube.height() as u32);
    put_u32(&mut out, cube.num_channels() as u32);
    out.push(stage_byte(cube.stage()));
    for channel in cube.channels() {
        put_string(&mut out, &channel.name);
    }
    match cube.scaling() {
        Some(records) => {
            out.push(1);
            for r in records {
                put_f64(&mut out, r.min_db);
                put_f64(&mut out, r.max_db);
            }
        }
        None => out.push(0),
    }
    for channel in cube.channels() {
        for row in channel.plane.rows() {
            for &v in row {
                put_f64(&mut out, v);
            }
        }
    }
    out
}

pub fn write_cube(cube: &FeatureCube, path: &Path) -> Result<()> {
    std::fs::write(path, cube_bytes(cube))?;
    Ok(())
}

/// Parses a cube from a full file image.
pub fn parse_cube(bytes: &[u8]) -> Result<FeatureCube> {
    let mut r = ByteReader::new(bytes);
    r.magic(MAGIC)?;
    let width = r.dimension("width")?;
    let height = r.dimension("height")?;
    let num_channels = r.dimension("channel count")?;
    let stage_at = r.offset();
    let stage = stage_from_byte(r.u8()?, stage_at)?;

    let mut names = Vec::with_capacity(num_channels);
    for _ in 0..num_channels {
        names.push(r.string()?);
    }

    let flag_at = r.offset();
    let scaling = match r.u8()? {
        0 => None,
        1 => {
            let mut records = Vec::with_capacity(num_channels);
            for _ in 0..num_channels {
                records.push(ScaleRecord {
                    min_db: r.f64()?,
                    max_db: r.f64()?,
                });
            }
            Some(records)
        }
        other => {
            return Err(Error::MalformedHeader {
                detail: format!("scaling flag must be 0 or 1, got {other}"),
                offset: flag_at,
            })
        }
    };

    let mut channels = Vec::with_capacity(num_channels);
    for name in names {
        let mut plane = Array2::zeros((height, width));
        for y in 0..height {
            for x in 0..width {
                plane[[y, x]] = r.f64()?;
            }
        }
        channels.push(Channel { name, plane });
    }
    r.finish()?;
    FeatureCube::new(channels, stage, scaling)
}

pub fn read_cube(path: &Path) -> Result<FeatureCube> {
    parse_cube(&std::fs::read(path)?)
}
