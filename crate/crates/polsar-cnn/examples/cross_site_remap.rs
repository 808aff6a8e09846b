//! Reconcile class ids between two labeling schemes before scoring.
//!
//! A model trained at one site rarely shares its class numbering with
//! another site's ground truth: ids differ, several fine classes may
//! correspond to one broad class, and some classes have no counterpart at
//! all. Remap rules express that reconciliation as plain text — `a -> b`
//! renumbers, `a -> drop` removes a class from scoring by sending it to
//! the unlabeled id 0.
//!
//! ```bash
//! cargo run --example cross_site_remap
//! ```

use polsar_cnn::io::tables::parse_remap_rules;
use polsar_cnn::metrics::{accuracy_stats, confusion_matrix};
use polsar_cnn::pipeline::{cross_site_remap, LabelRaster};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Site B truth uses five ids: 1=sea, 2=lake, 3=conifer, 4=broadleaf,
    // 5=glacier. The model predicts site A's three: 1=water, 2=forest,
    // 3=urban.
    let (w, h) = (30usize, 10usize);
    let mut truth_b = LabelRaster::filled(w, h, 0);
    for y in 0..h {
        for x in 0..w {
            truth_b.set(x, y, 1 + (5 * x / w) as u16);
        }
    }

    // Pretend the classifier got every water and forest pixel right under
    // site A numbering and called the glacier strip water.
    let mut pred_a = LabelRaster::filled(w, h, 0);
    for y in 0..h {
        for x in 0..w {
            let b = truth_b.get(x, y);
            pred_a.set(x, y, if b <= 2 { 1 } else { 2 });
        }
    }
    for y in 0..h {
        for x in 24..w {
            pred_a.set(x, y, 1); // glacier mistaken for water
        }
    }

    // Sea and lake merge into water; both tree classes into forest;
    // glacier has no counterpart and leaves the evaluation.
    let rules = parse_remap_rules(
        "# site B -> site A\n\
         1 -> 1\n\
         2 -> 1\n\
         3 -> 2\n\
         4 -> 2\n\
         5 -> drop\n",
    )?;
    let truth_a = cross_site_remap(&truth_b, &rules)?;

    println!("before remapping, site B ids present: {:?}", truth_b.classes_present());
    println!("after remapping, site A ids present:  {:?}", truth_a.classes_present());

    let cm = confusion_matrix(&pred_a, &truth_a, 3)?;
    let stats = accuracy_stats(&cm)?;
    println!(
        "cross-site overall accuracy: {:.2}% on {} scored pixels",
        100.0 * stats.overall,
        stats.total
    );
    assert_eq!(
        stats.total as usize,
        w * h - 6 * h,
        "the dropped glacier strip must not be scored"
    );

    // Forcing glacier into a class it does not resemble would instead
    // charge every one of those pixels against the classifier.
    let naive = parse_remap_rules("1 -> 1\n2 -> 1\n3 -> 2\n4 -> 2\n5 -> 2\n")?;
    let cm = confusion_matrix(&pred_a, &cross_site_remap(&truth_b, &naive)?, 3)?;
    let naive_stats = accuracy_stats(&cm)?;
    println!(
        "if glacier were forced into forest instead: {:.2}% on {} pixels",
        100.0 * naive_stats.overall,
        naive_stats.total
    );
    Ok(())
}
