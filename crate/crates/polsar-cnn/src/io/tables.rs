//! Text sidecar formats: metrics/history/sample CSV files, remap rules,
//! palettes, and `key = value` config files.
//!
//! CSV values keep full `f64` precision (shortest round-trip decimal);
//! undefined statistics are written as `NA`. The percent formatting used
//! for terminals lives in [`crate::metrics::format_percent`].

use std::path::Path;

use crate::cnn::train::TrainHistory;
use crate::error::{Error, Result};
use crate::metrics::{AccuracyStats, ConfusionMatrix};
use crate::pipeline::{RemapRule, RemapTarget, Sample, SampleSet, SamplingSpec};

fn csv_into_string(wtr: csv::Writer<Vec<u8>>) -> String {
    let bytes = wtr.into_inner().expect("in-memory csv flush cannot fail");
    String::from_utf8(bytes).expect("csv output is UTF-8")
}

fn stat_field(v: Option<f64>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => "NA".to_string(),
    }
}

/// Confusion counts and accuracies as CSV: a class-name header, one count
/// row per truth class (with row total and producer's accuracy), then a
/// user-accuracy row and an overall row. A `rejected` column appears only
/// when some labeled pixel was left unassigned.
pub fn metrics_csv(cm: &ConfusionMatrix, stats: &AccuracyStats) -> String {
    let k = cm.num_classes();
    let with_rejected = cm.rejected_total() > 0;
    let mut wtr = csv::Writer::from_writer(Vec::new());

    let names: Vec<String> = (0..k).map(|c| cm.class_label(c)).collect();
    let mut header = vec!["class".to_string()];
    header.extend(names.iter().cloned());
    if with_rejected {
        header.push("rejected".into());
    }
    header.push("total".into());
    header.push("producer_accuracy".into());
    let width = header.len();
    wtr.write_record(&header).expect("csv record");

    for t in 0..k {
        let mut row = vec![names[t].clone()];
        row.extend((0..k).map(|p| cm.count(t, p).to_string()));
        if with_rejected {
            row.push(cm.rejected(t).to_string());
        }
        row.push(cm.row_total(t).to_string());
        row.push(stat_field(stats.producer[t]));
        wtr.write_record(&row).expect("csv record");
    }

    let mut user = vec!["user_accuracy".to_string()];
    user.extend((0..k).map(|p| stat_field(stats.user[p])));
    user.resize(width, String::new());
    wtr.write_record(&user).expect("csv record");

    let mut overall = vec!["overall_accuracy".to_string(), stats.overall.to_string()];
    overall.resize(width, String::new());
    wtr.write_record(&overall).expect("csv record");

    csv_into_string(wtr)
}

pub fn write_metrics_csv(cm: &ConfusionMatrix, stats: &AccuracyStats, path: &Path) -> Result<()> {
    std::fs::write(path, metrics_csv(cm, stats))?;
    Ok(())
}

/// Training curve as CSV. Epoch 0 is the initialized network's full-set
/// MSE with the rate the first epoch used; epoch `i ≥ 1` records that
/// epoch's end-of-epoch MSE and the rate it trained with.
pub fn history_csv(history: &TrainHistory) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["epoch", "train_mse", "learning_rate"])
        .expect("csv record");
    let initial_rate = history
        .epochs
        .first()
        .map(|e| e.learning_rate)
        .unwrap_or(history.final_learning_rate);
    wtr.write_record([
        "0".to_string(),
        history.initial_mse.to_string(),
        initial_rate.to_string(),
    ])
    .expect("csv record");
    for (i, epoch) in history.epochs.iter().enumerate() {
        wtr.write_record([
            (i + 1).to_string(),
            epoch.train_mse.to_string(),
            epoch.learning_rate.to_string(),
        ])
        .expect("csv record");
    }
    csv_into_string(wtr)
}

pub fn write_history_csv(history: &TrainHistory, path: &Path) -> Result<()> {
    std::fs::write(path, history_csv(history))?;
    Ok(())
}

fn spec_echo(spec: SamplingSpec) -> String {
    match spec {
        SamplingSpec::PerClass(n) => format!("per-class:{n}"),
        SamplingSpec::Fraction(f) => format!("fraction:{f}"),
    }
}

/// Training coordinates as CSV (`x,y,class`), prefixed by a `#` comment
/// echoing the raster size, seed, and sampling rule that produced them.
pub fn samples_csv(set: &SampleSet) -> String {
    let mut out = format!(
        "# width={} height={} seed={} spec={}\n",
        set.width(),
        set.height(),
        set.seed(),
        spec_echo(set.spec()),
    );
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["x", "y", "class"]).expect("csv record");
    for s in set.samples() {
        wtr.write_record([s.x.to_string(), s.y.to_string(), s.class.to_string()])
            .expect("csv record");
    }
    out.push_str(&csv_into_string(wtr));
    out
}

pub fn write_samples_csv(set: &SampleSet, path: &Path) -> Result<()> {
    std::fs::write(path, samples_csv(set))?;
    Ok(())
}

/// Reads back the coordinates of a samples CSV (comments skipped).
pub fn parse_samples_csv(text: &str) -> Result<Vec<Sample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let expected = ["x", "y", "class"];
    if headers.iter().ne(expected) {
        return Err(Error::InvalidText {
            what: "samples csv".into(),
            detail: format!(
                "header must be x,y,class; found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::InvalidText {
                what: "samples csv".into(),
                detail: format!("row {} is missing fields", samples.len() + 1),
            })
        };
        let parse = |s: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::InvalidText {
                what: "samples csv".into(),
                detail: format!("bad number `{s}`"),
            })
        };
        samples.push(Sample {
            x: parse(field(0)?)? as usize,
            y: parse(field(1)?)? as usize,
            class: parse(field(2)?)? as u16,
        });
    }
    Ok(samples)
}

pub fn read_samples_csv(path: &Path) -> Result<Vec<Sample>> {
    parse_samples_csv(&std::fs::read_to_string(path)?)
}

/// Parses remap rules, one `source -> target` or `source -> drop` per
/// line; `#` starts a comment.
pub fn parse_remap_rules(text: &str) -> Result<Vec<RemapRule>> {
    let fail = |line: usize, detail: String| Error::InvalidText {
        what: "remap file".into(),
        detail: format!("line {line}: {detail}"),
    };
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| fail(line_no, "expected `source -> target`".into()))?;
        let source: u16 = lhs
            .trim()
            .parse()
            .map_err(|_| fail(line_no, format!("bad source id `{}`", lhs.trim())))?;
        let rhs = rhs.trim();
        let target = if rhs.eq_ignore_ascii_case("drop") {
            RemapTarget::Drop
        } else {
            RemapTarget::Class(
                rhs.parse()
                    .map_err(|_| fail(line_no, format!("bad target `{rhs}`")))?,
            )
        };
        rules.push(RemapRule { source, target });
    }
    Ok(rules)
}

pub fn read_remap_rules(path: &Path) -> Result<Vec<RemapRule>> {
    parse_remap_rules(&std::fs::read_to_string(path)?)
}

/// Parses a palette file: one `r g b` triple (0–255) per line, `#`
/// comments allowed; line order assigns class ids 0, 1, 2, …
pub fn parse_palette(text: &str) -> Result<Vec<[u8; 3]>> {
    let fail = |line: usize, detail: String| Error::InvalidText {
        what: "palette file".into(),
        detail: format!("line {line}: {detail}"),
    };
    let mut palette = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(fail(line_no, format!("expected `r g b`, got `{line}`")));
        }
        let mut rgb = [0u8; 3];
        for (slot, part) in rgb.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| fail(line_no, format!("bad component `{part}` (0-255)")))?;
        }
        palette.push(rgb);
    }
    if palette.is_empty() {
        return Err(Error::InvalidText {
            what: "palette file".into(),
            detail: "no entries".into(),
        });
    }
    Ok(palette)
}

pub fn read_palette(path: &Path) -> Result<Vec<[u8; 3]>> {
    parse_palette(&std::fs::read_to_string(path)?)
}

/// Black for unlabeled, then well-separated hues for classes `1..=max_id`.
pub fn default_palette(max_id: u16) -> Vec<[u8; 3]> {
    let mut palette = vec![[0, 0, 0]];
    for c in 0..max_id as u32 {
        // Golden-angle hue stepping keeps neighbors distinct at any count.
        let hue = (c as f64 * 137.508) % 360.0;
        palette.push(hsv_to_rgb(hue, 0.85, 0.95));
    }
    palette
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let to_byte = |f: f64| ((f + m) * 255.0).round() as u8;
    [to_byte(r), to_byte(g), to_byte(b)]
}

/// Parses a `key = value` config file; `#` comments, blank lines allowed.
/// Later occurrences of a key override earlier ones.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::InvalidText {
            what: "config file".into(),
            detail: format!("line {}: expected `key = value`, got `{line}`", i + 1),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(Error::InvalidText {
                what: "config file".into(),
                detail: format!("line {}: empty key", i + 1),
            });
        }
        if let Some(existing) = pairs.iter_mut().find(|(k, _)| *k == key) {
            existing.1 = value;
        } else {
            pairs.push((key, value));
        }
    }
    Ok(pairs)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    parse_config_file(&std::fs::read_to_string(path)?)
}
