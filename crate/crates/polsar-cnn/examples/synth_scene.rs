//! Generate a synthetic polarimetric scene from a declarative description.
//!
//! A scene is a set of labeled regions, each with a 3×3 coherency matrix
//! acting as the class's true second-order statistics. Every pixel draws
//! `looks` complex Gaussian scattering vectors from its class matrix and
//! averages them, reproducing the speckle statistics of real multilook
//! data. The example renders the layout, samples the data, and writes the
//! cube, the label raster, and a Pauli RGB quicklook.
//!
//! ```bash
//! cargo run --example synth_scene
//! ```

use num_complex::Complex64;
use polsar_cnn::io::cube::write_cube;
use polsar_cnn::io::pnm::{write_labels, write_ppm};
use polsar_cnn::polsar::feature::{
    db_transform, extract_channels, pauli_rgb, scale_to_unit, ChannelSet,
};
use polsar_cnn::polsar::Hermitian3;
use polsar_cnn::synth::{generate_scene, rasterize_labels, Region, SceneSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::path::Path::new("examples_out/synth_scene");
    std::fs::create_dir_all(out_dir)?;

    // Three classes: a bright surface, a dihedral-dominated block, and a
    // volume-like background with correlated co-pol channels.
    let surface = Hermitian3::diagonal(1.0, 0.10, 0.05);
    let dihedral = Hermitian3::diagonal(0.15, 1.2, 0.10);
    let mut volume = Hermitian3::diagonal(0.35, 0.30, 0.60);
    volume.m12 = Complex64::new(0.15, 0.05);

    let spec = SceneSpec {
        width: 128,
        height: 128,
        regions: vec![
            (
                Region::Rect {
                    x: 8,
                    y: 8,
                    width: 48,
                    height: 48,
                },
                1,
            ),
            (
                Region::Disk {
                    cx: 88.0,
                    cy: 40.0,
                    radius: 22.0,
                },
                2,
            ),
        ],
        background: Some(3),
        class_models: vec![surface, dihedral, volume],
        looks: 4,
        seed: 2024,
    };

    // The layout alone (no sampling) shows how regions rasterize.
    let layout = rasterize_labels(&spec)?;
    let mut counts = [0usize; 4];
    for &id in layout.data() {
        counts[id as usize] += 1;
    }
    println!("scene layout {}x{}:", spec.width, spec.height);
    for (id, n) in counts.iter().enumerate().skip(1) {
        println!("  class {id}: {n} pixels");
    }

    // Full Monte-Carlo sampling: 4-look coherency matrices per pixel.
    let (image, labels) = generate_scene(&spec)?;

    // Standard preprocessing chain: diagonal channels, dB, [-1, 1].
    let cube = scale_to_unit(db_transform(
        extract_channels(&image, None, None, ChannelSet::T3)?,
        1e-15,
    )?)?;
    write_cube(&cube, &out_dir.join("scene.polc"))?;
    write_labels(&labels, &out_dir.join("scene_gt.pgm"))?;
    write_ppm(&pauli_rgb(&image), &out_dir.join("scene_quicklook.ppm"))?;

    println!("cube channels: {:?}", cube.channel_names());
    for (name, rec) in cube.channel_names().iter().zip(cube.scaling().unwrap()) {
        println!("  {name}: [{:.2}, {:.2}] dB -> [-1, 1]", rec.min_db, rec.max_db);
    }
    println!("wrote scene.polc, scene_gt.pgm, scene_quicklook.ppm to {}", out_dir.display());
    Ok(())
}
