//! From labeled rasters to training sets and back to full-size prediction
//! masks: pixel sampling, window extraction, sliding-window classification,
//! and the class remapping used for cross-site evaluation.
//!
//! Class ids are 1-based on rasters (0 = unlabeled) and 0-based inside the
//! network; the conversion happens in exactly two places,
//! [`build_dataset`] and [`classify_image`].

use ndarray::Array2;
use rand_core::SeedableRng;
use rayon::prelude::*;

use crate::cnn::{CompactCnn, Patch};
use crate::error::{Error, Result};
use crate::polsar::feature::{FeatureCube, Stage};
use crate::polsar::mirror_index;
use crate::rng::{self, ChaCha8Rng};

/// Per-pixel class ids over a raster grid; 0 means unlabeled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelRaster {
    width: usize,
    height: usize,
    data: Vec<u16>,
    class_names: Option<Vec<String>>,
}

impl LabelRaster {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::DimensionMismatch {
                what: "label raster".into(),
                expected_width: width,
                expected_height: height,
                found_width: data.len(),
                found_height: 1,
            });
        }
        Ok(Self {
            width,
            height,
            data,
            class_names: None,
        })
    }

    pub fn filled(width: usize, height: usize, id: u16) -> Self {
        Self {
            width,
            height,
            data: vec![id; width * height],
            class_names: None,
        }
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Self {
        self.class_names = Some(names);
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, id: u16) {
        self.data[y * self.width + x] = id;
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    /// Largest class id present (0 for an all-unlabeled raster).
    pub fn max_class(&self) -> u16 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    /// Distinct nonzero ids present, ascending.
    pub fn classes_present(&self) -> Vec<u16> {
        let mut seen = vec![false; self.max_class() as usize + 1];
        for &id in &self.data {
            seen[id as usize] = true;
        }
        (1..seen.len() as u16).filter(|&id| seen[id as usize]).collect()
    }
}

/// How many training pixels to draw per class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplingSpec {
    /// A fixed count from every class.
    PerClass(usize),
    /// `⌈fraction · class_size⌉` from every class.
    Fraction(f64),
}

/// One labeled training coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sample {
    pub x: usize,
    pub y: usize,
    pub class: u16,
}

/// A drawn set of training coordinates plus the provenance needed to
/// reproduce or exclude it later.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    samples: Vec<Sample>,
    width: usize,
    height: usize,
    spec: SamplingSpec,
    seed: u64,
}

impl SampleSet {
    pub fn from_parts(
        samples: Vec<Sample>,
        width: usize,
        height: usize,
        spec: SamplingSpec,
        seed: u64,
    ) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(samples.len());
        for s in &samples {
            if s.x >= width || s.y >= height {
                return Err(Error::OutOfBounds {
                    x: s.x,
                    y: s.y,
                    width,
                    height,
                });
            }
            if s.class == 0 {
                return Err(Error::InvalidText {
                    what: "sample set".into(),
                    detail: format!("unlabeled class id at ({}, {})", s.x, s.y),
                });
            }
            if !seen.insert((s.x, s.y)) {
                return Err(Error::InvalidText {
                    what: "sample set".into(),
                    detail: format!("duplicate coordinate ({}, {})", s.x, s.y),
                });
            }
        }
        Ok(Self {
            samples,
            width,
            height,
            spec,
            seed,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn spec(&self) -> SamplingSpec {
        self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Per-class sample counts indexed by class id.
    pub fn counts_by_class(&self) -> Vec<usize> {
        let max = self.samples.iter().map(|s| s.class).max().unwrap_or(0);
        let mut counts = vec![0usize; max as usize + 1];
        for s in &self.samples {
            counts[s.class as usize] += 1;
        }
        counts
    }
}

/// Draws training pixels uniformly without replacement, per class, from the
/// labeled (nonzero) pixels. With `clamp_to_available`, a class shorter
/// than a `PerClass` request contributes everything it has (with a warning)
/// instead of failing.
pub fn sample_training_pixels(
    labels: &LabelRaster,
    spec: SamplingSpec,
    seed: u64,
    clamp_to_available: bool,
) -> Result<SampleSet> {
    match spec {
        SamplingSpec::PerClass(n) if n == 0 => {
            return Err(Error::InvalidText {
                what: "sampling spec".into(),
                detail: "per-class count must be at least 1".into(),
            })
        }
        SamplingSpec::Fraction(f) if !(f > 0.0 && f < 1.0) => {
            return Err(Error::InvalidText {
                what: "sampling spec".into(),
                detail: format!("fraction must lie in (0, 1), got {f}"),
            })
        }
        _ => {}
    }

    let classes = labels.classes_present();
    if classes.is_empty() {
        return Err(Error::EmptySampleSet);
    }

    // Group coordinates per class in row-major order so the shuffle below is
    // the only source of randomness.
    let mut per_class: Vec<Vec<(usize, usize)>> = vec![Vec::new(); classes.len()];
    let index_of: std::collections::HashMap<u16, usize> =
        classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    for y in 0..labels.height() {
        for x in 0..labels.width() {
            let id = labels.get(x, y);
            if id != 0 {
                per_class[index_of[&id]].push((x, y));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for (i, &class) in classes.iter().enumerate() {
        let pixels = &mut per_class[i];
        let want = match spec {
            SamplingSpec::PerClass(n) => n,
            SamplingSpec::Fraction(f) => (f * pixels.len() as f64).ceil() as usize,
        };
        let take = if want > pixels.len() {
            if !clamp_to_available {
                return Err(Error::InsufficientSamples {
                    class,
                    available: pixels.len(),
                    requested: want,
                });
            }
            log::warn!(
                "class {class}: requested {want} training pixels, clamping to the {} available",
                pixels.len()
            );
            pixels.len()
        } else {
            want
        };
        rng::shuffle(&mut rng, pixels);
        samples.extend(
            pixels[..take]
                .iter()
                .map(|&(x, y)| Sample { x, y, class }),
        );
    }

    SampleSet::from_parts(samples, labels.width(), labels.height(), spec, seed)
}

/// Stratified train/validation split: per class of size `s`, validation
/// receives `⌊ratio·s⌋` samples (so a singleton class stays entirely in
/// training, with a warning).
pub fn split_train_validation(
    samples: &SampleSet,
    ratio: f64,
    seed: u64,
) -> Result<(SampleSet, SampleSet)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidText {
            what: "validation split".into(),
            detail: format!("ratio must lie in (0, 1), got {ratio}"),
        });
    }

    let mut classes: Vec<u16> = Vec::new();
    for s in samples.samples() {
        if !classes.contains(&s.class) {
            classes.push(s.class);
        }
    }
    classes.sort_unstable();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for class in classes {
        let mut members: Vec<Sample> = samples
            .samples()
            .iter()
            .copied()
            .filter(|s| s.class == class)
            .collect();
        let val_count = (ratio * members.len() as f64).floor() as usize;
        if val_count == 0 {
            log::warn!("class {class}: too few samples to populate the validation split");
        }
        rng::shuffle(&mut rng, &mut members);
        validation.extend_from_slice(&members[..val_count]);
        train.extend_from_slice(&members[val_count..]);
    }

    let mk = |s: Vec<Sample>| {
        SampleSet::from_parts(s, samples.width(), samples.height(), samples.spec(), seed)
    };
    Ok((mk(train)?, mk(validation)?))
}

/// Cuts the `N×N` window centered at `(x, y)` out of every channel,
/// mirror-reflecting coordinates that fall outside the raster.
pub fn extract_patch(cube: &FeatureCube, x: usize, y: usize, n: usize) -> Result<Patch> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::BadWindow(n));
    }
    if cube.stage() != Stage::Scaled {
        return Err(Error::WrongStage {
            expected: Stage::Scaled.to_string(),
            found: cube.stage().to_string(),
        });
    }
    if x >= cube.width() || y >= cube.height() {
        return Err(Error::OutOfBounds {
            x,
            y,
            width: cube.width(),
            height: cube.height(),
        });
    }
    let half = (n / 2) as isize;
    let patch = cube
        .channels()
        .iter()
        .map(|ch| {
            Array2::from_shape_fn((n, n), |(r, c)| {
                let sy = mirror_index(y as isize + r as isize - half, cube.height());
                let sx = mirror_index(x as isize + c as isize - half, cube.width());
                ch.plane[[sy, sx]]
            })
        })
        .collect();
    Ok(patch)
}

/// Materializes `(patch, 0-based class)` training pairs in sample order.
pub fn build_dataset(
    cube: &FeatureCube,
    samples: &SampleSet,
    n: usize,
) -> Result<Vec<(Patch, usize)>> {
    if (samples.width(), samples.height()) != (cube.width(), cube.height()) {
        return Err(Error::DimensionMismatch {
            what: "sample set source raster".into(),
            expected_width: cube.width(),
            expected_height: cube.height(),
            found_width: samples.width(),
            found_height: samples.height(),
        });
    }
    samples
        .samples()
        .iter()
        .map(|s| Ok((extract_patch(cube, s.x, s.y, n)?, (s.class - 1) as usize)))
        .collect()
}

/// Classifies every pixel of the cube with a sliding mirror-padded window,
/// so the prediction mask has the cube's full dimensions. Returns the label
/// raster (argmax + 1, ties toward the lower class) and one score raster
/// per class. Pixels are independent, so the parallel loop is bit-identical
/// to a sequential one.
pub fn classify_image(
    net: &CompactCnn,
    cube: &FeatureCube,
    n: usize,
) -> Result<(LabelRaster, Vec<Array2<f64>>)> {
    if n != net.config().window {
        return Err(Error::BadWindow(n));
    }
    if let Some(prep) = net.preprocessing() {
        let cube_names = cube.channel_names();
        if cube_names != prep.channel_names.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::ChannelMismatch {
                expected: prep.channel_names.join(","),
                found: cube_names.join(","),
            });
        }
    }
    if cube.num_channels() != net.config().input_channels {
        return Err(Error::ChannelMismatch {
            expected: format!("{} channels", net.config().input_channels),
            found: format!("{} channels", cube.num_channels()),
        });
    }

    let (w, h) = (cube.width(), cube.height());
    let num_classes = net.config().num_classes;
    let per_pixel: Vec<(u16, Vec<f64>)> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let patch = extract_patch(cube, x, y, n)?;
            let (scores, _) = net.forward(&patch)?;
            let mut best = 0usize;
            for (c, s) in scores.iter().enumerate() {
                if *s > scores[best] {
                    best = c;
                }
            }
            Ok(((best + 1) as u16, scores))
        })
        .collect::<Result<_>>()?;

    let mut labels = vec![0u16; w * h];
    let mut score_rasters = vec![Array2::zeros((h, w)); num_classes];
    for (i, (label, scores)) in per_pixel.into_iter().enumerate() {
        labels[i] = label;
        let (x, y) = (i % w, i / w);
        for (c, s) in scores.into_iter().enumerate() {
            score_rasters[c][[y, x]] = s;
        }
    }
    Ok((LabelRaster::new(w, h, labels)?, score_rasters))
}

/// Where a source class goes under a cross-site remap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RemapTarget {
    Class(u16),
    /// The source class becomes unlabeled.
    Drop,
}

/// One `source -> target` remap rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RemapRule {
    pub source: u16,
    pub target: RemapTarget,
}

/// Many-to-one relabeling for cross-site comparisons (merging crop
/// varieties into one cropland class, urban densities into one urban class,
/// and so on). Every nonzero id present must be covered by a rule; dropped
/// ids become unlabeled; 0 stays 0.
pub fn cross_site_remap(labels: &LabelRaster, mapping: &[RemapRule]) -> Result<LabelRaster> {
    let mut table: std::collections::HashMap<u16, RemapTarget> = std::collections::HashMap::new();
    for rule in mapping {
        if rule.source == 0 {
            return Err(Error::InvalidText {
                what: "remap rule".into(),
                detail: "source id 0 is reserved for unlabeled pixels".into(),
            });
        }
        if let RemapTarget::Class(0) = rule.target {
            return Err(Error::InvalidText {
                what: "remap rule".into(),
                detail: format!("class 0 is not a valid target for source {}; use drop", rule.source),
            });
        }
        if table.insert(rule.source, rule.target).is_some() {
            return Err(Error::InvalidText {
                what: "remap rule".into(),
                detail: format!("duplicate rule for source id {}", rule.source),
            });
        }
    }

    let data = labels
        .data()
        .iter()
        .map(|&id| {
            if id == 0 {
                return Ok(0);
            }
            match table.get(&id) {
                Some(RemapTarget::Class(t)) => Ok(*t),
                Some(RemapTarget::Drop) => Ok(0),
                None => Err(Error::UnmappedClass { id }),
            }
        })
        .collect::<Result<Vec<u16>>>()?;
    LabelRaster::new(labels.width(), labels.height(), data)
}
