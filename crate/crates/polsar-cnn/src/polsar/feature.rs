//! Real-valued channel cubes distilled from Hermitian matrix imagery, plus
//! the dB / [-1, 1] scaling chain applied before windows are cut for the
//! classifier. A cube remembers which stage of that chain it is at, so a
//! linear-power cube cannot be fed where scaled data is expected.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::polsar::HermitianImage;

/// Preprocessing stage of a [`FeatureCube`]. Ordered by pipeline
/// progression: `Linear < Db < Scaled`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    /// Raw intensities in linear power units.
    Linear,
    /// After `10·log10` conversion.
    Db,
    /// After per-channel affine mapping into [-1, 1].
    Scaled,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Linear => "linear",
            Stage::Db => "db",
            Stage::Scaled => "scaled",
        })
    }
}

/// Per-channel affine scaling metadata: the dB extrema that were mapped to
/// -1 and +1. Travels with trained models so another site's cube can be
/// scaled with the training site's map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleRecord {
    pub min_db: f64,
    pub max_db: f64,
}

/// One named raster plane.
#[derive(Clone, Debug)]
pub struct Channel {
    pub name: String,
    pub plane: Array2<f64>,
}

/// Which electromagnetic channels to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelSet {
    /// Coherency diagonal: T11, T22, T33.
    T3,
    /// Coherency diagonal plus total power: T11, T22, T33, span.
    T3Span,
    /// Coherency and covariance diagonals: T11, T22, T33, C11, C22, C33.
    T3C3,
}

impl ChannelSet {
    pub fn channel_names(&self) -> &'static [&'static str] {
        match self {
            ChannelSet::T3 => &["T11", "T22", "T33"],
            ChannelSet::T3Span => &["T11", "T22", "T33", "span"],
            ChannelSet::T3C3 => &["T11", "T22", "T33", "C11", "C22", "C33"],
        }
    }
}

impl std::str::FromStr for ChannelSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T3" => Ok(ChannelSet::T3),
            "T3_SPAN" => Ok(ChannelSet::T3Span),
            "T3_C3" => Ok(ChannelSet::T3C3),
            other => Err(Error::InvalidText {
                what: "channel set".into(),
                detail: format!("{other:?} is not one of T3, T3_SPAN, T3_C3"),
            }),
        }
    }
}

impl std::fmt::Display for ChannelSet {
    /// Round-trips with [`FromStr`](std::str::FromStr).
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChannelSet::T3 => "T3",
            ChannelSet::T3Span => "T3_SPAN",
            ChannelSet::T3C3 => "T3_C3",
        })
    }
}

/// An ordered stack of equally sized channel planes with stage bookkeeping.
#[derive(Clone, Debug)]
pub struct FeatureCube {
    width: usize,
    height: usize,
    channels: Vec<Channel>,
    scaling: Option<Vec<ScaleRecord>>,
    stage: Stage,
}

impl FeatureCube {
    /// Validates and assembles a cube: at least one channel, unique names,
    /// equal plane dimensions, and — at the scaled stage — values confined
    /// to [-1, 1] with a scaling record per channel.
    pub fn new(
        channels: Vec<Channel>,
        stage: Stage,
        scaling: Option<Vec<ScaleRecord>>,
    ) -> Result<Self> {
        let first = channels.first().ok_or_else(|| Error::InvalidText {
            what: "feature cube".into(),
            detail: "no channels".into(),
        })?;
        let (height, width) = first.plane.dim();
        for ch in &channels {
            if ch.plane.dim() != (height, width) {
                return Err(Error::DimensionMismatch {
                    what: format!("channel {:?}", ch.name),
                    expected_width: width,
                    expected_height: height,
                    found_width: ch.plane.ncols(),
                    found_height: ch.plane.nrows(),
                });
            }
        }
        for (i, ch) in channels.iter().enumerate() {
            if channels[..i].iter().any(|c| c.name == ch.name) {
                return Err(Error::InvalidText {
                    what: "feature cube".into(),
                    detail: format!("duplicate channel name {:?}", ch.name),
                });
            }
        }
        if stage == Stage::Scaled {
            let records = scaling.as_ref().ok_or_else(|| Error::InvalidText {
                what: "feature cube".into(),
                detail: "scaled stage requires scaling records".into(),
            })?;
            if records.len() != channels.len() {
                return Err(Error::InvalidText {
                    what: "feature cube".into(),
                    detail: format!(
                        "{} scaling records for {} channels",
                        records.len(),
                        channels.len()
                    ),
                });
            }
            for ch in &channels {
                if ch.plane.iter().any(|v| !(-1.0..=1.0).contains(v)) {
                    return Err(Error::InvalidText {
                        what: "feature cube".into(),
                        detail: format!("channel {:?} leaves [-1, 1] at scaled stage", ch.name),
                    });
                }
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            scaling,
            stage,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel_names(&self) -> Vec<&str> {
        self.channels.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn scaling(&self) -> Option<&[ScaleRecord]> {
        self.scaling.as_deref()
    }

    /// Value of channel `c` at pixel `(x, y)`.
    pub fn value(&self, c: usize, x: usize, y: usize) -> f64 {
        self.channels[c].plane[[y, x]]
    }

    fn expect_stage(&self, expected: Stage) -> Result<()> {
        if self.stage != expected {
            return Err(Error::WrongStage {
                expected: expected.to_string(),
                found: self.stage.to_string(),
            });
        }
        Ok(())
    }
}

/// Pulls the requested diagonal channels out of coherency (and optionally
/// covariance / span) imagery into a linear-stage cube. Channel order is
/// fixed: T diagonals, then span or C diagonals.
pub fn extract_channels(
    h_t: &HermitianImage,
    h_c: Option<&HermitianImage>,
    spans: Option<&Array2<f64>>,
    set: ChannelSet,
) -> Result<FeatureCube> {
    let (w, h) = (h_t.width(), h_t.height());
    let diag_plane = |img: &HermitianImage, pick: fn(&crate::polsar::Hermitian3) -> f64| {
        Array2::from_shape_fn((h, w), |(y, x)| pick(img.at(x, y)))
    };

    let mut channels = vec![
        Channel {
            name: "T11".into(),
            plane: diag_plane(h_t, |m| m.d11),
        },
        Channel {
            name: "T22".into(),
            plane: diag_plane(h_t, |m| m.d22),
        },
        Channel {
            name: "T33".into(),
            plane: diag_plane(h_t, |m| m.d33),
        },
    ];

    match set {
        ChannelSet::T3 => {}
        ChannelSet::T3Span => {
            let spans = spans.ok_or(Error::MissingRaster("span"))?;
            if spans.dim() != (h, w) {
                return Err(Error::DimensionMismatch {
                    what: "span raster".into(),
                    expected_width: w,
                    expected_height: h,
                    found_width: spans.ncols(),
                    found_height: spans.nrows(),
                });
            }
            channels.push(Channel {
                name: "span".into(),
                plane: spans.clone(),
            });
        }
        ChannelSet::T3C3 => {
            let h_c = h_c.ok_or(Error::MissingRaster("covariance"))?;
            if (h_c.width(), h_c.height()) != (w, h) {
                return Err(Error::DimensionMismatch {
                    what: "covariance image".into(),
                    expected_width: w,
                    expected_height: h,
                    found_width: h_c.width(),
                    found_height: h_c.height(),
                });
            }
            channels.push(Channel {
                name: "C11".into(),
                plane: diag_plane(h_c, |m| m.d11),
            });
            channels.push(Channel {
                name: "C22".into(),
                plane: diag_plane(h_c, |m| m.d22),
            });
            channels.push(Channel {
                name: "C33".into(),
                plane: diag_plane(h_c, |m| m.d33),
            });
        }
    }

    FeatureCube::new(channels, Stage::Linear, None)
}

/// Replaces every linear intensity `v` with `10·log10(max(v, floor_eps))`.
/// The floor keeps exact zeros (radar shadows, synthetic backgrounds) finite
/// instead of producing -inf.
pub fn db_transform(mut cube: FeatureCube, floor_eps: f64) -> Result<FeatureCube> {
    cube.expect_stage(Stage::Linear)?;
    if !(floor_eps > 0.0) {
        return Err(Error::BadDbFloor(floor_eps));
    }
    for ch in &mut cube.channels {
        if let Some(&bad) = ch.plane.iter().find(|v| **v < 0.0) {
            return Err(Error::NegativeIntensity {
                channel: ch.name.clone(),
                value: bad,
            });
        }
        ch.plane.mapv_inplace(|v| 10.0 * v.max(floor_eps).log10());
    }
    cube.stage = Stage::Db;
    Ok(cube)
}

/// Affinely maps each channel's [min, max] onto [-1, +1], recording the
/// extrema. A constant channel maps to all zeros with a degenerate record.
pub fn scale_to_unit(mut cube: FeatureCube) -> Result<FeatureCube> {
    cube.expect_stage(Stage::Db)?;
    let mut records = Vec::with_capacity(cube.channels.len());
    for ch in &mut cube.channels {
        let min = ch.plane.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ch.plane.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max > min {
            ch.plane.mapv_inplace(|v| 2.0 * (v - min) / (max - min) - 1.0);
        } else {
            ch.plane.fill(0.0);
        }
        records.push(ScaleRecord {
            min_db: min,
            max_db: max,
        });
    }
    cube.scaling = Some(records);
    cube.stage = Stage::Scaled;
    Ok(cube)
}

/// Scales a dB-stage cube with *stored* records (typically a trained
/// model's), clamping to [-1, 1] where the new data exceeds the recorded
/// extrema. This is the cross-site inference path: the training site's map
/// is reused verbatim.
pub fn scale_with(mut cube: FeatureCube, records: &[ScaleRecord]) -> Result<FeatureCube> {
    cube.expect_stage(Stage::Db)?;
    if records.len() != cube.channels.len() {
        return Err(Error::ChannelMismatch {
            expected: format!("{} scaling records", records.len()),
            found: format!("{} channels", cube.channels.len()),
        });
    }
    for (ch, rec) in cube.channels.iter_mut().zip(records) {
        let (min, max) = (rec.min_db, rec.max_db);
        if max > min {
            ch.plane
                .mapv_inplace(|v| (2.0 * (v - min) / (max - min) - 1.0).clamp(-1.0, 1.0));
        } else {
            ch.plane.fill(0.0);
        }
    }
    cube.scaling = Some(records.to_vec());
    cube.stage = Stage::Scaled;
    Ok(cube)
}

/// Inverts [`scale_to_unit`] using the stored records, recovering the dB
/// cube. Channels with a degenerate record return their constant value.
pub fn unscale(mut cube: FeatureCube) -> Result<FeatureCube> {
    cube.expect_stage(Stage::Scaled)?;
    let records = cube.scaling.take().ok_or_else(|| Error::InvalidText {
        what: "feature cube".into(),
        detail: "scaled cube lacks scaling records".into(),
    })?;
    for (ch, rec) in cube.channels.iter_mut().zip(&records) {
        let (min, max) = (rec.min_db, rec.max_db);
        if max > min {
            ch.plane.mapv_inplace(|v| min + (v + 1.0) * 0.5 * (max - min));
        } else {
            ch.plane.fill(min);
        }
    }
    cube.stage = Stage::Db;
    Ok(cube)
}

/// 8-bit interleaved RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbRaster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbRaster {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::DimensionMismatch {
                what: "rgb buffer".into(),
                expected_width: width,
                expected_height: height,
                found_width: data.len() / 3,
                found_height: 1,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Classic Pauli false-color composite: R = √T22, G = √T33, B = √T11, in
/// dB, contrast-stretched between the pooled 1st and 99th percentiles of
/// all three channels (pooled so relative channel brightness survives,
/// rather than each channel stretching its own noise to full range).
pub fn pauli_rgb(h_t: &HermitianImage) -> RgbRaster {
    let (w, h) = (h_t.width(), h_t.height());
    let db = |v: f64| 10.0 * v.sqrt().max(1e-15).log10();
    let planes: [Vec<f64>; 3] = [
        h_t.pixels().iter().map(|m| db(m.d22)).collect(),
        h_t.pixels().iter().map(|m| db(m.d33)).collect(),
        h_t.pixels().iter().map(|m| db(m.d11)).collect(),
    ];

    let mut pooled: Vec<f64> = planes.iter().flatten().copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let percentile = |p: f64| {
        let idx = (p / 100.0 * (pooled.len() - 1) as f64).round() as usize;
        pooled[idx]
    };
    let (lo, hi) = (percentile(1.0), percentile(99.0));

    let mut data = vec![0u8; w * h * 3];
    if hi > lo {
        for i in 0..w * h {
            for (c, plane) in planes.iter().enumerate() {
                let t = (plane[i].clamp(lo, hi) - lo) / (hi - lo);
                data[i * 3 + c] = (255.0 * t).round() as u8;
            }
        }
    }
    RgbRaster {
        width: w,
        height: h,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polsar::{
        build_hermitian_image, trace_raster, Basis, Hermitian3, HermitianImage, ScatteringImage,
        ScatteringPixel,
    };
    use crate::rng::{self, ChaCha8Rng};
    use num_complex::Complex64;
    use rand_core::SeedableRng;

    fn cube_1ch(values: Array2<f64>, stage: Stage, scaling: Option<Vec<ScaleRecord>>) -> FeatureCube {
        FeatureCube::new(
            vec![Channel {
                name: "T11".into(),
                plane: values,
            }],
            stage,
            scaling,
        )
        .unwrap()
    }

    fn random_image(seed: u64, w: usize, h: usize, n: usize) -> ScatteringImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = |r: &mut ChaCha8Rng| {
            Complex64::new(rng::uniform_in(r, -1.5, 1.5), rng::uniform_in(r, -1.5, 1.5))
        };
        let looks = (0..n)
            .map(|_| {
                (0..w * h)
                    .map(|_| {
                        ScatteringPixel::new(z(&mut rng), z(&mut rng), z(&mut rng))
                    })
                    .collect()
            })
            .collect();
        ScatteringImage::new(w, h, looks).unwrap()
    }

    #[test]
    fn t3_extraction_yields_exactly_the_named_diagonals() {
        let img = random_image(1, 4, 3, 2);
        let t = build_hermitian_image(&img, Basis::Pauli);
        let cube = extract_channels(&t, None, None, ChannelSet::T3).unwrap();
        assert_eq!(cube.channel_names(), ["T11", "T22", "T33"]);
        for y in 0..3 {
            for x in 0..4 {
                assert_eq!(cube.value(0, x, y), t.at(x, y).d11);
                assert_eq!(cube.value(1, x, y), t.at(x, y).d22);
                assert_eq!(cube.value(2, x, y), t.at(x, y).d33);
            }
        }
    }

    #[test]
    fn span_set_requires_span_raster() {
        let t = HermitianImage::filled(2, 2, Hermitian3::diagonal(1.0, 1.0, 1.0));
        let err = extract_channels(&t, None, None, ChannelSet::T3Span).unwrap_err();
        assert!(matches!(err, Error::MissingRaster("span")));
        let err = extract_channels(&t, None, None, ChannelSet::T3C3).unwrap_err();
        assert!(matches!(err, Error::MissingRaster("covariance")));
    }

    #[test]
    fn t3c3_traces_agree_with_span() {
        let img = random_image(7, 5, 4, 3);
        let t = build_hermitian_image(&img, Basis::Pauli);
        let c = build_hermitian_image(&img, Basis::Lexicographic);
        let cube = extract_channels(&t, Some(&c), None, ChannelSet::T3C3).unwrap();
        assert_eq!(cube.channel_names(), ["T11", "T22", "T33", "C11", "C22", "C33"]);
        let spans = trace_raster(&t);
        for y in 0..4 {
            for x in 0..5 {
                let t_sum = cube.value(0, x, y) + cube.value(1, x, y) + cube.value(2, x, y);
                let c_sum = cube.value(3, x, y) + cube.value(4, x, y) + cube.value(5, x, y);
                assert!((t_sum - c_sum).abs() < 1e-9);
                assert!((t_sum - spans[y * 5 + x]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn db_transform_fixed_points() {
        let cube = cube_1ch(
            Array2::from_shape_vec((1, 3), vec![1.0, 100.0, 0.0]).unwrap(),
            Stage::Linear,
            None,
        );
        let db = db_transform(cube, 1e-15).unwrap();
        assert_eq!(db.stage(), Stage::Db);
        assert!((db.value(0, 0, 0) - 0.0).abs() < 1e-12);
        assert!((db.value(0, 1, 0) - 20.0).abs() < 1e-12);
        assert!((db.value(0, 2, 0) - -150.0).abs() < 1e-12);
    }

    #[test]
    fn db_transform_rejects_negatives_bad_floor_and_wrong_stage() {
        let neg = cube_1ch(
            Array2::from_shape_vec((1, 2), vec![1.0, -0.5]).unwrap(),
            Stage::Linear,
            None,
        );
        assert!(matches!(
            db_transform(neg, 1e-15),
            Err(Error::NegativeIntensity { .. })
        ));

        let cube = cube_1ch(Array2::zeros((1, 2)), Stage::Linear, None);
        assert!(matches!(db_transform(cube, 0.0), Err(Error::BadDbFloor(_))));

        let db_stage = cube_1ch(Array2::zeros((1, 2)), Stage::Db, None);
        assert!(matches!(
            db_transform(db_stage, 1e-15),
            Err(Error::WrongStage { .. })
        ));
    }

    #[test]
    fn db_transform_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut values: Vec<f64> = (0..64).map(|_| rng::uniform_in(&mut rng, 0.0, 50.0)).collect();
        let cube = cube_1ch(
            Array2::from_shape_vec((8, 8), values.clone()).unwrap(),
            Stage::Linear,
            None,
        );
        let db = db_transform(cube, 1e-15).unwrap();
        let mut pairs: Vec<(f64, f64)> = values
            .drain(..)
            .enumerate()
            .map(|(i, v)| (v, db.value(0, i % 8, i / 8)))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in pairs.windows(2) {
            assert!(w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn scaling_maps_extrema_exactly() {
        let cube = cube_1ch(
            Array2::from_shape_vec((1, 3), vec![0.0, 20.0, 10.0]).unwrap(),
            Stage::Db,
            None,
        );
        let scaled = scale_to_unit(cube).unwrap();
        assert_eq!(scaled.value(0, 0, 0), -1.0);
        assert_eq!(scaled.value(0, 1, 0), 1.0);
        assert_eq!(scaled.value(0, 2, 0), 0.0);
        assert_eq!(
            scaled.scaling().unwrap()[0],
            ScaleRecord {
                min_db: 0.0,
                max_db: 20.0
            }
        );
    }

    #[test]
    fn constant_channel_scales_to_zero_with_degenerate_record() {
        let cube = cube_1ch(
            Array2::from_elem((2, 2), 7.5),
            Stage::Db,
            None,
        );
        let scaled = scale_to_unit(cube).unwrap();
        assert!(scaled.channels()[0].plane.iter().all(|v| *v == 0.0));
        assert_eq!(
            scaled.scaling().unwrap()[0],
            ScaleRecord {
                min_db: 7.5,
                max_db: 7.5
            }
        );
    }

    #[test]
    fn scale_round_trips_through_unscale() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let values: Vec<f64> = (0..48).map(|_| rng::uniform_in(&mut rng, -80.0, 5.0)).collect();
        let cube = cube_1ch(
            Array2::from_shape_vec((6, 8), values.clone()).unwrap(),
            Stage::Db,
            None,
        );
        let back = unscale(scale_to_unit(cube).unwrap()).unwrap();
        assert_eq!(back.stage(), Stage::Db);
        for (i, v) in values.iter().enumerate() {
            assert!((back.value(0, i % 8, i / 8) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_with_reuses_records_and_clamps_outliers() {
        let records = [ScaleRecord {
            min_db: -10.0,
            max_db: 10.0,
        }];
        let cube = cube_1ch(
            Array2::from_shape_vec((1, 4), vec![-10.0, 0.0, 10.0, 25.0]).unwrap(),
            Stage::Db,
            None,
        );
        let scaled = scale_with(cube, &records).unwrap();
        assert_eq!(scaled.value(0, 0, 0), -1.0);
        assert_eq!(scaled.value(0, 1, 0), 0.0);
        assert_eq!(scaled.value(0, 2, 0), 1.0);
        assert_eq!(scaled.value(0, 3, 0), 1.0, "out-of-range value clamps");
        assert_eq!(scaled.scaling().unwrap(), &records);
    }

    #[test]
    fn scale_with_rejects_record_count_mismatch() {
        let cube = cube_1ch(Array2::zeros((1, 2)), Stage::Db, None);
        let err = scale_with(cube, &[]).unwrap_err();
        assert!(matches!(err, Error::ChannelMismatch { .. }));
    }

    #[test]
    fn duplicate_channel_names_rejected() {
        let mk = |name: &str| Channel {
            name: name.into(),
            plane: Array2::zeros((2, 2)),
        };
        let err = FeatureCube::new(vec![mk("T11"), mk("T11")], Stage::Linear, None).unwrap_err();
        assert!(matches!(err, Error::InvalidText { .. }));
    }

    #[test]
    fn scaled_stage_construction_enforces_range_and_records() {
        let plane = Array2::from_elem((1, 2), 1.5);
        let err = FeatureCube::new(
            vec![Channel {
                name: "T11".into(),
                plane,
            }],
            Stage::Scaled,
            Some(vec![ScaleRecord {
                min_db: 0.0,
                max_db: 1.0,
            }]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidText { .. }));

        let err = FeatureCube::new(
            vec![Channel {
                name: "T11".into(),
                plane: Array2::zeros((1, 2)),
            }],
            Stage::Scaled,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidText { .. }));
    }

    #[test]
    fn pauli_rgb_is_red_dominant_for_double_bounce_scene() {
        // T22 dominant everywhere (plus faint noise in the other diagonals)
        // maps to red under R=√T22.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data: Vec<Hermitian3> = (0..64)
            .map(|_| {
                Hermitian3::diagonal(
                    rng::uniform_in(&mut rng, 1e-6, 2e-6),
                    1.0 + rng::uniform_in(&mut rng, -0.01, 0.01),
                    rng::uniform_in(&mut rng, 1e-6, 2e-6),
                )
            })
            .collect();
        let img = HermitianImage::new(8, 8, data).unwrap();
        let rgb = pauli_rgb(&img);
        assert_eq!((rgb.width(), rgb.height()), (8, 8));
        let mut sums = [0u32; 3];
        for y in 0..8 {
            for x in 0..8 {
                let px = rgb.pixel(x, y);
                for (s, v) in sums.iter_mut().zip(px) {
                    *s += v as u32;
                }
            }
        }
        assert!(sums[0] > 64 * 200, "red mean too low: {sums:?}");
        assert!(sums[0] > 10 * sums[1] && sums[0] > 10 * sums[2], "{sums:?}");
    }

    #[test]
    fn pauli_rgb_equal_diagonals_render_gray() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let data: Vec<Hermitian3> = (0..36)
            .map(|_| {
                let v = rng::uniform_in(&mut rng, 0.05, 5.0);
                Hermitian3::diagonal(v, v, v)
            })
            .collect();
        let img = HermitianImage::new(6, 6, data).unwrap();
        let rgb = pauli_rgb(&img);
        for y in 0..6 {
            for x in 0..6 {
                let [r, g, b] = rgb.pixel(x, y);
                assert!(r == g && g == b, "({x},{y}) not gray: {r},{g},{b}");
            }
        }
    }

    #[test]
    fn channel_set_parses_cli_spellings() {
        assert_eq!("T3".parse::<ChannelSet>().unwrap(), ChannelSet::T3);
        assert_eq!("T3_SPAN".parse::<ChannelSet>().unwrap(), ChannelSet::T3Span);
        assert_eq!("T3_C3".parse::<ChannelSet>().unwrap(), ChannelSet::T3C3);
        assert!("t3".parse::<ChannelSet>().is_err());
    }
}
