//! Verify backpropagation against central finite differences.
//!
//! For a handful of random (parameter, patch) points, the analytic
//! gradient of the per-sample MSE loss is compared entry-by-entry with
//! `(loss(w + h) - loss(w - h)) / 2h`. The headline number is the largest
//! relative disagreement; anything near 1e-6 or below means the analytic
//! chain (convolution, pooling, tanh, MLP) is consistent.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use polsar_cnn::cnn::gradcheck::{check_config, worst_rel_error};
use polsar_cnn::cnn::{Activation, CnnLayerSpec, NetworkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let architectures = [
        (
            "single conv layer, 3 channels, 7x7 window",
            NetworkConfig::default_compact(3, 7, 4, 11),
        ),
        (
            "two conv layers, 6 channels, 11x11 window",
            NetworkConfig {
                input_channels: 6,
                window: 11,
                cnn_layers: vec![
                    CnnLayerSpec {
                        neurons: 12,
                        kernel: (3, 3),
                        subsample: (2, 2),
                    },
                    CnnLayerSpec {
                        neurons: 8,
                        kernel: (3, 3),
                        subsample: (2, 2),
                    },
                ],
                mlp_layers: vec![10, 6],
                num_classes: 5,
                activation: Activation::Tanh,
                seed: 12,
            },
        ),
    ];

    for (label, config) in architectures {
        println!("{label}:");
        let reports = check_config(&config, 4, 1e-6)?;
        for (i, r) in reports.iter().enumerate() {
            println!(
                "  point {i}: {} parameters, relative error {:.3e} (worst abs diff {:.3e})",
                r.params, r.rel_error, r.max_abs_diff
            );
        }
        let worst = worst_rel_error(&reports);
        println!("  worst: {worst:.3e} -> {}", if worst < 1e-6 { "OK" } else { "FAIL" });
        assert!(worst < 1e-6, "gradients disagree with finite differences");
    }
    Ok(())
}
