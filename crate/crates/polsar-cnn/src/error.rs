use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no looks: second-order averaging requires at least one vector")]
    NoLooks,

    #[error("window must be odd and positive, got {0}")]
    BadWindow(usize),

    #[error("subsample factors must be at least 1 and no larger than the map, got {ssx}x{ssy} for a {height}x{width} map")]
    BadSubsample {
        ssx: usize,
        ssy: usize,
        height: usize,
        width: usize,
    },

    #[error("kernel {kernel_rows}x{kernel_cols} larger than input {input_rows}x{input_cols}")]
    KernelLargerThanInput {
        kernel_rows: usize,
        kernel_cols: usize,
        input_rows: usize,
        input_cols: usize,
    },

    #[error("missing required raster: {0}")]
    MissingRaster(&'static str),

    #[error("dimension mismatch for {what}: expected {expected_width}x{expected_height}, found {found_width}x{found_height}")]
    DimensionMismatch {
        what: String,
        expected_width: usize,
        expected_height: usize,
        found_width: usize,
        found_height: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("negative intensity {value} in channel {channel}; intensity channels must be non-negative")]
    NegativeIntensity { channel: String, value: f64 },

    #[error("dB floor must be positive, got {0}")]
    BadDbFloor(f64),

    #[error("cube is at stage {found}, expected {expected}")]
    WrongStage { expected: String, found: String },

    #[error("invalid network configuration: {0}")]
    BadNetworkConfig(String),

    #[error("invalid training configuration: {0}")]
    BadTrainConfig(String),

    #[error("class index {class} out of range for {num_classes} classes")]
    ClassOutOfRange { class: usize, num_classes: usize },

    #[error("coordinate ({x},{y}) outside a {width}x{height} raster")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("confusion matrix has no labeled pixels")]
    EmptyConfusion,

    #[error("class {class} has {available} labeled pixels, fewer than the requested {requested}")]
    InsufficientSamples {
        class: u16,
        available: usize,
        requested: usize,
    },

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },

    #[error("channel mismatch: model expects [{expected}], cube has [{found}]")]
    ChannelMismatch { expected: String, found: String },

    #[error("label id {id} has no remap rule")]
    UnmappedClass { id: u16 },

    #[error("label id {id} exceeds class count {num_classes}")]
    LabelOutOfRange { id: u16, num_classes: usize },

    #[error("{0} is not positive semidefinite")]
    NonPsdCovariance(String),

    #[error("pixel ({x},{y}) is not covered by any region and the scene has no background class")]
    UncoveredPixel { x: usize, y: usize },

    #[error("pixel ({x},{y}) is covered by more than one region")]
    OverlappingRegions { x: usize, y: usize },

    #[error("palette has {palette} entries but the raster contains class id {max_id}")]
    PaletteTooShort { palette: usize, max_id: u16 },

    #[error("bad magic: expected {expected:?}, found {found:?} (at byte offset 0)")]
    BadMagic { expected: String, found: String },

    #[error("truncated file: expected {expected} bytes, found {actual} (at byte offset {offset})")]
    Truncated {
        expected: u64,
        actual: u64,
        offset: u64,
    },

    #[error("malformed header: {detail} (at byte offset {offset})")]
    MalformedHeader { detail: String, offset: u64 },

    #[error("unsupported model format version {found}; supported versions: {supported}")]
    VersionMismatch { found: u16, supported: String },

    #[error("unsupported format {found:?}: only binary {expected} is supported")]
    UnsupportedPnm { found: String, expected: &'static str },

    #[error("invalid {what}: {detail}")]
    InvalidText { what: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
