//! Train the compact network on a synthetic scene and map every pixel.
//!
//! This is the full supervised loop: sample labeled pixels, split them
//! into training and validation halves, run adaptive-rate SGD, then slide
//! the trained net across the whole image. Expect roughly ten seconds on
//! one core; most of it is the final dense classification pass.
//!
//! ```bash
//! cargo run --example train_and_classify
//! ```

use polsar_cnn::cnn::train::{full_set_mse, train, TrainConfig};
use polsar_cnn::cnn::{init_weights, NetworkConfig};
use polsar_cnn::io::model::save_model;
use polsar_cnn::io::pnm::{write_labels, write_mask};
use polsar_cnn::io::tables::default_palette;
use polsar_cnn::metrics::{accuracy_stats, confusion_matrix};
use polsar_cnn::pipeline::{
    build_dataset, classify_image, sample_training_pixels, split_train_validation, SamplingSpec,
};
use polsar_cnn::polsar::feature::{db_transform, extract_channels, scale_to_unit, ChannelSet};
use polsar_cnn::synth::{generate_scene, preset_synth4, Region};

const WINDOW: usize = 9;
const SEED: u64 = 7;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::path::Path::new("examples_out/train_and_classify");
    std::fs::create_dir_all(out_dir)?;

    // The reference quadrant scene, shrunk from 256x256 to 96x96 so the
    // dense classification pass finishes quickly.
    let mut spec = preset_synth4(SEED);
    let q = 48;
    spec.width = 2 * q;
    spec.height = 2 * q;
    let quadrant = |x, y| Region::Rect {
        x,
        y,
        width: q,
        height: q,
    };
    spec.regions = vec![
        (quadrant(0, 0), 1),
        (quadrant(q, 0), 2),
        (quadrant(0, q), 3),
        (quadrant(q, q), 4),
    ];
    let (image, truth) = generate_scene(&spec)?;
    let cube = scale_to_unit(db_transform(
        extract_channels(&image, None, None, ChannelSet::T3)?,
        1e-15,
    )?)?;

    // 60 labeled pixels per class; half train, half validation.
    let samples = sample_training_pixels(&truth, SamplingSpec::PerClass(60), SEED, false)?;
    let (train_set, val_set) = split_train_validation(&samples, 0.5, SEED + 1)?;
    println!(
        "sampled {} pixels -> {} train / {} validation",
        samples.len(),
        train_set.len(),
        val_set.len()
    );

    let config = NetworkConfig::default_compact(cube.num_channels(), WINDOW, 4, SEED);
    let mut net = init_weights(&config)?;
    net.set_preprocessing(
        cube.channel_names().iter().map(|s| s.to_string()).collect(),
        cube.scaling().unwrap().to_vec(),
    );
    println!("network: {} parameters", net.param_count());

    let dataset = build_dataset(&cube, &train_set, WINDOW)?;
    let (net, history) = train(net, &dataset, &TrainConfig::new(60, SEED + 2))?;
    println!(
        "training MSE {:.4} -> {:.4} over {} epochs (final lr {:.4})",
        history.initial_mse,
        history.epochs.last().unwrap().train_mse,
        history.final_epoch,
        history.final_learning_rate
    );

    let val_data = build_dataset(&cube, &val_set, WINDOW)?;
    println!("validation MSE: {:.4}", full_set_mse(&net, &val_data)?);

    // Dense pass: every pixel gets a class.
    let (pred, _scores) = classify_image(&net, &cube, WINDOW)?;
    let cm = confusion_matrix(&pred, &truth, 4)?;
    let stats = accuracy_stats(&cm)?;
    println!("full-scene overall accuracy: {:.2}%", 100.0 * stats.overall);
    for (c, acc) in stats.producer.iter().enumerate() {
        if let Some(a) = acc {
            println!("  class {} producer's accuracy: {:.2}%", c + 1, 100.0 * a);
        }
    }

    save_model(&net, &out_dir.join("model.pcnn"))?;
    write_labels(&pred, &out_dir.join("pred.pgm"))?;
    write_mask(&pred, &default_palette(4), &out_dir.join("pred.ppm"))?;
    println!("wrote model.pcnn, pred.pgm, pred.ppm to {}", out_dir.display());
    Ok(())
}
