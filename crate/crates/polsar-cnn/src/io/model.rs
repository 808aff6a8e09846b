//! Model file format (`PCNN1`), version 1.
//!
//! ```text
//! "PCNN1"
//! u16 version = 1
//! u32 input_channels, u32 window
//! u8  activation: 0 = tanh, 1 = identity
//! u64 init seed
//! u32 CNN layer count; per layer: u32 neurons, kernel rows, kernel cols,
//!                                 subsample x, subsample y
//! u32 hidden MLP layer count; per layer: u32 size
//! u32 num_classes
//! u8  has_preprocessing; if 1:
//!       u32 channel count; per channel: length-prefixed UTF-8 name
//!       u32 scaling count; per record: f64 min_db, f64 max_db
//! u32 parameter count
//! parameters as f64, in canonical flatten order
//! ```
//!
//! The parameter count is redundant with the architecture and is verified
//! on load, as is the absence of trailing bytes. Loading re-derives the
//! network structure from the header, so a well-formed file always yields
//! a network that passes configuration validation.

use std::path::Path;

use crate::cnn::{init_weights, Activation, CnnLayerSpec, CompactCnn, NetworkConfig};
use crate::error::{Error, Result};
use crate::polsar::feature::ScaleRecord;

use super::{put_f64, put_string, put_u16, put_u32, put_u64, ByteReader};

const MAGIC: &str = "PCNN1";
const VERSION: u16 = 1;

fn activation_byte(a: Activation) -> u8 {
    match a {
        Activation::Tanh => 0,
        Activation::Identity => 1,
    }
}

pub fn model_bytes(net: &CompactCnn) -> Vec<u8> {
    let config = net.config();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC.as_bytes());
    put_u16(&mut out, VERSION);
    put_u32(&mut out, config.input_channels as u32);
    put_u32(&mut out, config.window as u32);
    out.push(activation_byte(config.activation));
    put_u64(&mut out, config.seed);

    put_u32(&mut out, config.cnn_layers.len() as u32);
    for layer in &config.cnn_layers {
        put_u32(&mut out, layer.neurons as u32);
        put_u32(&mut out, layer.kernel.0 as u32);
        put_u32(&mut out, layer.kernel.1 as u32);
        put_u32(&mut out, layer.subsample.0 as u32);
        put_u32(&mut out, layer.subsample.1 as u32);
    }
    put_u32(&mut out, config.mlp_layers.len() as u32);
    for &size in &config.mlp_layers {
        put_u32(&mut out, size as u32);
    }
    put_u32(&mut out, config.num_classes as u32);

    match net.preprocessing() {
        Some(prep) => {
            out.push(1);
            put_u32(&mut out, prep.channel_names.len() as u32);
            for name in &prep.channel_names {
                put_string(&mut out, name);
            }
            put_u32(&mut out, prep.scaling.len() as u32);
            for r in &prep.scaling {
                put_f64(&mut out, r.min_db);
                put_f64(&mut out, r.max_db);
            }
        }
        None => out.push(0),
    }

    let params = net.flatten();
    put_u32(&mut out, params.len() as u32);
    for v in params {
        put_f64(&mut out, v);
    }
    out
}

pub fn save_model(net: &CompactCnn, path: &Path) -> Result<()> {
    std::fs::write(path, model_bytes(net))?;
    Ok(())
}

pub fn parse_model(bytes: &[u8]) -> Result<CompactCnn> {
    let mut r = ByteReader::new(bytes);
    r.magic(MAGIC)?;
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            supported: VERSION.to_string(),
        });
    }

    let input_channels = r.dimension("input channel count")?;
    let window = r.dimension("window")?;
    let act_at = r.offset();
    let activation = match r.u8()? {
        0 => Activation::Tanh,
        1 => Activation::Identity,
        other => {
            return Err(Error::MalformedHeader {
                detail: format!("unknown activation tag {other}"),
                offset: act_at,
            })
        }
    };
    let seed = r.u64()?;

    let cnn_at = r.offset();
    let cnn_count = r.u32()? as usize;
    // 20 header bytes per layer; a count the file cannot hold is garbage.
    if cnn_count > r.remaining() / 20 {
        return Err(Error::MalformedHeader {
            detail: format!("implausible CNN layer count {cnn_count}"),
            offset: cnn_at,
        });
    }
    let mut cnn_layers = Vec::with_capacity(cnn_count);
    for _ in 0..cnn_count {
        cnn_layers.push(CnnLayerSpec {
            neurons: r.dimension("neuron count")?,
            kernel: (r.dimension("kernel rows")?, r.dimension("kernel cols")?),
            subsample: (r.dimension("subsample x")?, r.dimension("subsample y")?),
        });
    }
    let mlp_at = r.offset();
    let mlp_count = r.u32()? as usize;
    if mlp_count > r.remaining() / 4 {
        return Err(Error::MalformedHeader {
            detail: format!("implausible MLP layer count {mlp_count}"),
            offset: mlp_at,
        });
    }
    let mut mlp_layers = Vec::with_capacity(mlp_count);
    for _ in 0..mlp_count {
        mlp_layers.push(r.dimension("hidden layer size")?);
    }
    let num_classes = r.dimension("class count")?;

    let config = NetworkConfig {
        input_channels,
        window,
        cnn_layers,
        mlp_layers,
        num_classes,
        activation,
        seed,
    };

    let prep_at = r.offset();
    let preprocessing = match r.u8()? {
        0 => None,
        1 => {
            let name_count = r.u32()? as usize;
            let names = (0..name_count.min(r.remaining()))
                .map(|_| r.string())
                .collect::<Result<Vec<_>>>()?;
            if names.len() != name_count {
                return Err(Error::MalformedHeader {
                    detail: format!("implausible channel name count {name_count}"),
                    offset: prep_at,
                });
            }
            let scale_at = r.offset();
            let scale_count = r.u32()? as usize;
            if scale_count > r.remaining() / 16 {
                return Err(Error::MalformedHeader {
                    detail: format!("implausible scaling record count {scale_count}"),
                    offset: scale_at,
                });
            }
            let scaling = (0..scale_count)
                .map(|_| {
                    Ok(ScaleRecord {
                        min_db: r.f64()?,
                        max_db: r.f64()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Some((names, scaling))
        }
        other => {
            return Err(Error::MalformedHeader {
                detail: format!("preprocessing flag must be 0 or 1, got {other}"),
                offset: prep_at,
            })
        }
    };

    let count_at = r.offset();
    let declared = r.u32()? as usize;
    if declared > r.remaining() / 8 {
        return Err(Error::Truncated {
            expected: count_at + 4 + 8 * declared as u64,
            actual: bytes.len() as u64,
            offset: count_at,
        });
    }
    let mut net = init_weights(&config)?;
    if declared != net.param_count() {
        return Err(Error::MalformedHeader {
            detail: format!(
                "parameter count {declared} does not match the declared architecture ({})",
                net.param_count()
            ),
            offset: count_at,
        });
    }
    let mut params = Vec::with_capacity(declared);
    for _ in 0..declared {
        params.push(r.f64()?);
    }
    r.finish()?;

    net.assign_flat(&params)?;
    if let Some((names, scaling)) = preprocessing {
        net.set_preprocessing(names, scaling);
    }
    Ok(net)
}

pub fn load_model(path: &Path) -> Result<CompactCnn> {
    parse_model(&std::fs::read(path)?)
}
