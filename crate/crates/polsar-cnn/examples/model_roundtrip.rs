//! Serialization round-trips: models, cubes, and the training history.
//!
//! Every artifact the toolkit writes is read back bit-exactly. The example
//! trains a small net, saves it, reloads it, and proves the reloaded copy
//! scores patches identically (not approximately — `f64`-for-`f64`). The
//! same applies to feature cubes and the per-epoch history CSV.
//!
//! ```bash
//! cargo run --example model_roundtrip
//! ```

use polsar_cnn::cnn::train::{train, TrainConfig};
use polsar_cnn::cnn::{init_weights, NetworkConfig};
use polsar_cnn::io::cube::{read_cube, write_cube};
use polsar_cnn::io::model::{load_model, model_bytes, save_model};
use polsar_cnn::io::tables::history_csv;
use polsar_cnn::pipeline::{build_dataset, sample_training_pixels, SamplingSpec};
use polsar_cnn::polsar::feature::{db_transform, extract_channels, scale_to_unit, ChannelSet};
use polsar_cnn::synth::{generate_scene, preset_synth4, Region};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::path::Path::new("examples_out/model_roundtrip");
    std::fs::create_dir_all(out_dir)?;

    // Small two-class scene and a short training run.
    let mut spec = preset_synth4(5);
    spec.width = 48;
    spec.height = 48;
    spec.regions = vec![
        (
            Region::Rect {
                x: 0,
                y: 0,
                width: 24,
                height: 48,
            },
            1,
        ),
        (
            Region::Rect {
                x: 24,
                y: 0,
                width: 24,
                height: 48,
            },
            2,
        ),
    ];
    spec.class_models.truncate(2);
    let (image, truth) = generate_scene(&spec)?;
    let cube = scale_to_unit(db_transform(
        extract_channels(&image, None, None, ChannelSet::T3)?,
        1e-15,
    )?)?;

    // Cube round-trip.
    let cube_path = out_dir.join("scene.polc");
    write_cube(&cube, &cube_path)?;
    let reread = read_cube(&cube_path)?;
    assert_eq!(cube.stage(), reread.stage());
    let same_values = (0..cube.num_channels()).all(|c| {
        (0..cube.height()).all(|y| {
            (0..cube.width())
                .all(|x| cube.value(c, x, y).to_bits() == reread.value(c, x, y).to_bits())
        })
    });
    assert!(same_values);
    println!("cube: {} channels round-trip bit-exactly", cube.num_channels());

    let samples = sample_training_pixels(&truth, SamplingSpec::PerClass(20), 5, false)?;
    let dataset = build_dataset(&cube, &samples, 5)?;
    let mut net = init_weights(&NetworkConfig::default_compact(3, 5, 2, 5))?;
    net.set_preprocessing(
        cube.channel_names().iter().map(|s| s.to_string()).collect(),
        cube.scaling().unwrap().to_vec(),
    );
    let (net, history) = train(net, &dataset, &TrainConfig::new(15, 6))?;

    // Model round-trip: the file encodes architecture, weights, and the
    // preprocessing metadata needed for cross-site inference.
    let model_path = out_dir.join("model.pcnn");
    save_model(&net, &model_path)?;
    let reloaded = load_model(&model_path)?;
    assert_eq!(model_bytes(&net), model_bytes(&reloaded));
    println!("model: {} bytes, identical after save -> load", model_bytes(&net).len());

    // The reloaded net scores every patch with the very same bits.
    for (patch, _) in &dataset {
        let (a, _) = net.forward(patch)?;
        let (b, _) = reloaded.forward(patch)?;
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    println!("inference: {} patches score bit-identically", dataset.len());

    // History CSV: epoch 0 is the untrained baseline.
    let csv = history_csv(&history);
    println!("\nfirst history rows:");
    for line in csv.lines().take(4) {
        println!("  {line}");
    }
    std::fs::write(out_dir.join("history.csv"), csv)?;
    println!("wrote scene.polc, model.pcnn, history.csv to {}", out_dir.display());
    Ok(())
}
