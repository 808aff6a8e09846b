//! Score a predicted land-cover map against ground truth.
//!
//! The confusion matrix follows remote-sensing conventions: rows are the
//! reference classes, columns the predictions, and three accuracy figures
//! summarize it — producer's (per reference class), user's (per predicted
//! class), and overall. Pixels labeled 0 in the truth raster are outside
//! the reference data and never scored; predictions of 0 count as
//! rejections.
//!
//! ```bash
//! cargo run --example evaluate_accuracy
//! ```

use polsar_cnn::io::tables::metrics_csv;
use polsar_cnn::metrics::{accuracy_stats, confusion_matrix, format_percent};
use polsar_cnn::pipeline::LabelRaster;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A 20x20 reference map: three vertical strips of classes 1..=3 with
    // an unlabeled border (class 0).
    let (w, h) = (20usize, 20usize);
    let mut truth = LabelRaster::filled(w, h, 0);
    for y in 2..h - 2 {
        for x in 2..w - 2 {
            truth.set(x, y, 1 + (3 * x / w) as u16);
        }
    }

    // A plausible prediction: mostly right, one confused band, and a thin
    // column of rejections where the classifier declined to answer.
    let mut pred = truth.clone();
    for y in 2..h - 2 {
        pred.set(7, y, 1); // class 2 eaten by class 1 at the strip border
        pred.set(13, y, 0); // rejected column inside class 2/3 territory
    }

    let truth = truth.with_class_names(vec!["water".into(), "forest".into(), "urban".into()]);
    let cm = confusion_matrix(&pred, &truth, 3)?;
    let stats = accuracy_stats(&cm)?;

    println!("confusion matrix (rows = truth, columns = prediction):");
    print!("{:>8}", "");
    for p in 0..3 {
        print!("{:>8}", cm.class_label(p));
    }
    println!("{:>10}{:>10}", "rejected", "producer");
    for t in 0..3 {
        print!("{:>8}", cm.class_label(t));
        for p in 0..3 {
            print!("{:>8}", cm.count(t, p));
        }
        println!("{:>10}{:>10}", cm.rejected(t), format_percent(stats.producer[t]));
    }
    print!("{:>8}", "user");
    for p in 0..3 {
        print!("{:>8}", format_percent(stats.user[p]));
    }
    println!();
    println!(
        "\noverall: {} ({}/{} scored pixels correct, {} rejected)",
        format_percent(Some(stats.overall)),
        stats.correct,
        stats.total,
        stats.rejected
    );

    println!("\nmachine-readable form (metrics.csv):");
    print!("{}", metrics_csv(&cm, &stats));
    Ok(())
}
