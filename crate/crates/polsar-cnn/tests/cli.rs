//! End-to-end tests of the command-line binary: every subcommand is driven
//! through a real process, checking output files, stdout contracts (the
//! `config key = value` echo lines), and the exit-code scheme
//! (0 = success, 1 = usage, 2 = bad data).

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use polsar_cnn::io::cube::read_cube;
use polsar_cnn::io::pnm::{read_labels, write_labels};
use polsar_cnn::io::polarimetric::write_scattering;
use polsar_cnn::pipeline::LabelRaster;
use polsar_cnn::polsar::feature::Stage;
use polsar_cnn::polsar::{ScatteringImage, ScatteringPixel};

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polsar-cnn"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn polsar-cnn")
}

#[track_caller]
fn expect_code(out: &Output, code: i32) -> (String, String) {
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(
        out.status.code(),
        Some(code),
        "wrong exit code\n--- stdout ---\n{stdout}\n--- stderr ---\n{stderr}"
    );
    (stdout, stderr)
}

/// A 48×48 two-class scene: strong surface-like returns on the top half,
/// a weaker cross-polarized class below. Small enough that the full
/// train/classify loop stays under a second.
const TWO_CLASS_SCENE: &str = "\
# two horizontal bands
size 48 48
looks 4
seed 11
class 1 diag 1.0 0.3 0.1
class 2 diag 0.2 0.9 0.6
rect 0 0 48 24 1
rect 0 24 48 24 2
";

#[test]
fn synth_train_classify_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("scene.txt"), TWO_CLASS_SCENE).unwrap();

    let out = run_in(
        root,
        &[
            "synth",
            "--spec",
            "scene.txt",
            "--out-cube",
            "cube.polc",
            "--out-labels",
            "gt.pgm",
        ],
    );
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("config scene = scene.txt"));
    assert!(stdout.contains("config size = 48x48"));

    let cube = read_cube(&root.join("cube.polc")).unwrap();
    assert_eq!(cube.stage(), Stage::Scaled);
    assert_eq!(cube.num_channels(), 3, "T3 diagonal channels");

    let out = run_in(
        root,
        &[
            "train",
            "--cube",
            "cube.polc",
            "--labels",
            "gt.pgm",
            "--per-class",
            "25",
            "--window",
            "5",
            "--max-iters",
            "10",
            "--seed",
            "3",
            "--out",
            "model.pcnn",
            "--history",
            "history.csv",
            "--out-samples",
            "samples.csv",
        ],
    );
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("config cube = cube.polc"));
    assert!(stdout.contains("config seed = 3"));
    assert!(stdout.contains("trained"));

    // Epoch 0 records the pre-training baseline, then one row per epoch.
    let history = fs::read_to_string(root.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 1 + 11, "header + epochs 0..=10");
    assert!(history.starts_with("epoch,"));

    // Every sampled coordinate must carry a class the scene actually has.
    let samples = fs::read_to_string(root.join("samples.csv")).unwrap();
    assert_eq!(
        samples.lines().count(),
        2 + 50,
        "comment + header + 25 per class"
    );

    let out = run_in(
        root,
        &[
            "classify",
            "--model",
            "model.pcnn",
            "--cube",
            "cube.polc",
            "--out-labels",
            "pred.pgm",
            "--out-mask",
            "pred.ppm",
        ],
    );
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("classified 48x48 pixels into 2 classes"));

    let pred = read_labels(&root.join("pred.pgm")).unwrap();
    assert_eq!((pred.width(), pred.height()), (48, 48));
    assert!(pred.data().iter().all(|&id| (1..=2).contains(&id)));
    let mask = fs::read(root.join("pred.ppm")).unwrap();
    assert!(mask.starts_with(b"P6"));

    let out = run_in(
        root,
        &[
            "evaluate",
            "--pred",
            "pred.pgm",
            "--truth",
            "gt.pgm",
            "--exclude-train",
            "samples.csv",
            "--out",
            "metrics.csv",
        ],
    );
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("config excluded-train-pixels = 50"));
    assert!(stdout.contains("overall accuracy"));

    let metrics = fs::read_to_string(root.join("metrics.csv")).unwrap();
    assert!(metrics.contains("overall"));
    // 48*48 labeled minus the 50 training pixels.
    assert!(stdout.contains("/2254 correct"));
}

#[test]
fn config_file_supplies_defaults_but_explicit_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(
        root.join("check.cfg"),
        "window = 7\nchannels = 6\nclasses = 3\nseed = 9\npoints = 2\n",
    )
    .unwrap();

    // Everything from the file.
    let out = run_in(root, &["gradcheck", "--config", "check.cfg"]);
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("config window = 7"));
    assert!(stdout.contains("config points = 2"));
    assert!(stdout.contains("gradcheck passed"));

    // The explicit flag overrides the file's window.
    let out = run_in(
        root,
        &["gradcheck", "--config", "check.cfg", "--window", "9"],
    );
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("config window = 9"));

    // A malformed file is a usage error and names the bad line.
    fs::write(root.join("broken.cfg"), "window 7\n").unwrap();
    let out = run_in(root, &["gradcheck", "--config", "broken.cfg"]);
    let (_, stderr) = expect_code(&out, 2);
    assert!(stderr.contains("broken.cfg"), "stderr: {stderr}");
}

#[test]
fn usage_errors_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // Missing required option.
    let out = run_in(root, &["synth", "--preset", "synth4"]);
    let (_, stderr) = expect_code(&out, 1);
    assert!(stderr.contains("--out-cube"), "stderr: {stderr}");

    // Even window.
    let out = run_in(
        root,
        &[
            "train",
            "--cube",
            "c",
            "--labels",
            "l",
            "--per-class",
            "5",
            "--window",
            "6",
            "--max-iters",
            "5",
            "--out",
            "m",
        ],
    );
    let (_, stderr) = expect_code(&out, 1);
    assert!(stderr.contains("odd"), "stderr: {stderr}");

    // Sampling spec must be exactly one of --per-class / --fraction.
    let out = run_in(
        root,
        &[
            "train",
            "--cube",
            "c",
            "--labels",
            "l",
            "--per-class",
            "5",
            "--fraction",
            "0.1",
            "--window",
            "5",
            "--max-iters",
            "5",
            "--out",
            "m",
        ],
    );
    expect_code(&out, 1);

    // Unknown flag (clap-level parse error).
    let out = run_in(root, &["synth", "--no-such-flag"]);
    expect_code(&out, 1);

    // Bad stage name.
    let out = run_in(
        root,
        &[
            "extract-features",
            "--input",
            "x",
            "--stage",
            "sideways",
            "--out",
            "y",
        ],
    );
    let (_, stderr) = expect_code(&out, 1);
    assert!(stderr.contains("sideways"));

    // --help and --version are not errors.
    expect_code(&run_in(root, &["--help"]), 0);
    expect_code(&run_in(root, &["--version"]), 0);
}

#[test]
fn data_errors_exit_with_code_two_and_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let out = run_in(
        root,
        &[
            "classify",
            "--model",
            "absent.pcnn",
            "--cube",
            "absent.polc",
            "--out-labels",
            "p.pgm",
        ],
    );
    let (_, stderr) = expect_code(&out, 2);
    assert!(stderr.contains("absent.pcnn"), "stderr: {stderr}");

    // Mismatched raster shapes.
    write_labels(&LabelRaster::filled(4, 4, 1), &root.join("pred.pgm")).unwrap();
    write_labels(&LabelRaster::filled(8, 8, 1), &root.join("truth.pgm")).unwrap();
    let out = run_in(
        root,
        &[
            "evaluate",
            "--pred",
            "pred.pgm",
            "--truth",
            "truth.pgm",
            "--out",
            "m.csv",
        ],
    );
    expect_code(&out, 2);

    // Training demands a scaled cube; a dB-stage cube is refused with a hint.
    fs::write(root.join("scene.txt"), TWO_CLASS_SCENE).unwrap();
    expect_code(
        &run_in(
            root,
            &[
                "synth",
                "--spec",
                "scene.txt",
                "--out-cube",
                "cube.polc",
                "--out-labels",
                "gt.pgm",
            ],
        ),
        0,
    );
    // Rebuild the same statistics as a dB-stage cube via extract-features.
    let scene = build_scattering_fixture();
    write_scattering(&scene, &root.join("stack.pols")).unwrap();
    expect_code(
        &run_in(
            root,
            &[
                "extract-features",
                "--input",
                "stack.pols",
                "--stage",
                "db",
                "--out",
                "db.polc",
            ],
        ),
        0,
    );
    let out = run_in(
        root,
        &[
            "train",
            "--cube",
            "db.polc",
            "--labels",
            "gt.pgm",
            "--per-class",
            "2",
            "--window",
            "3",
            "--max-iters",
            "2",
            "--out",
            "m.pcnn",
        ],
    );
    let (_, stderr) = expect_code(&out, 2);
    assert!(stderr.contains("scaled"), "stderr: {stderr}");
}

/// A deterministic 48×48 single-look stack with two textures, matching the
/// geometry of [`TWO_CLASS_SCENE`].
fn build_scattering_fixture() -> ScatteringImage {
    let (w, h) = (48usize, 48usize);
    let mut plane = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let phase = (x as f64 * 0.37 + y as f64 * 0.11).sin();
            let (hh, hv, vv) = if y < 24 {
                (1.0, 0.1 * phase, 0.5)
            } else {
                (0.3, 0.8, 0.9 * phase)
            };
            plane.push(ScatteringPixel::new(
                Complex64::new(hh, 0.2 * phase),
                Complex64::new(hv, -0.1),
                Complex64::new(vv, 0.3),
            ));
        }
    }
    ScatteringImage::new(w, h, vec![plane]).unwrap()
}

#[test]
fn extract_features_handles_scattering_stacks_and_stages() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_scattering(&build_scattering_fixture(), &root.join("stack.pols")).unwrap();

    let out = run_in(
        root,
        &[
            "extract-features",
            "--input",
            "stack.pols",
            "--channels",
            "T3_SPAN",
            "--boxcar",
            "3",
            "--out",
            "cube.polc",
        ],
    );
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("config channels = T3_SPAN"));
    assert!(stdout.contains("config boxcar = 3"));

    let cube = read_cube(&root.join("cube.polc")).unwrap();
    assert_eq!(cube.num_channels(), 4);
    assert_eq!(cube.stage(), Stage::Scaled);
    assert!(cube.channel_names().contains(&"span"));

    // Stopping at the linear stage keeps raw intensities.
    let out = run_in(
        root,
        &[
            "extract-features",
            "--input",
            "stack.pols",
            "--stage",
            "linear",
            "--out",
            "linear.polc",
        ],
    );
    expect_code(&out, 0);
    let linear = read_cube(&root.join("linear.polc")).unwrap();
    assert_eq!(linear.stage(), Stage::Linear);
    assert_eq!(linear.num_channels(), 3);

    // An even boxcar is rejected before any file is read.
    let out = run_in(
        root,
        &[
            "extract-features",
            "--input",
            "stack.pols",
            "--boxcar",
            "4",
            "--out",
            "bad.polc",
        ],
    );
    expect_code(&out, 1);
}

#[test]
fn classify_adapts_db_cubes_with_the_stored_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("scene.txt"), TWO_CLASS_SCENE).unwrap();
    expect_code(
        &run_in(
            root,
            &[
                "synth",
                "--spec",
                "scene.txt",
                "--out-cube",
                "cube.polc",
                "--out-labels",
                "gt.pgm",
            ],
        ),
        0,
    );
    expect_code(
        &run_in(
            root,
            &[
                "train",
                "--cube",
                "cube.polc",
                "--labels",
                "gt.pgm",
                "--per-class",
                "20",
                "--window",
                "5",
                "--max-iters",
                "8",
                "--seed",
                "5",
                "--out",
                "model.pcnn",
            ],
        ),
        0,
    );

    // A dB-stage cube of the same scene geometry classifies through the
    // model's stored scaling map instead of its own extrema.
    write_scattering(&build_scattering_fixture(), &root.join("stack.pols")).unwrap();
    expect_code(
        &run_in(
            root,
            &[
                "extract-features",
                "--input",
                "stack.pols",
                "--boxcar",
                "3",
                "--stage",
                "db",
                "--out",
                "db.polc",
            ],
        ),
        0,
    );
    let out = run_in(
        root,
        &[
            "classify",
            "--model",
            "model.pcnn",
            "--cube",
            "db.polc",
            "--out-labels",
            "cross.pgm",
        ],
    );
    expect_code(&out, 0);
    let pred = read_labels(&root.join("cross.pgm")).unwrap();
    assert_eq!((pred.width(), pred.height()), (48, 48));
}

#[test]
fn evaluate_applies_remap_rules_to_either_raster() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // Truth uses ids {1,2,3}; prediction collapsed 3 into 2.
    let mut truth = LabelRaster::filled(6, 2, 1);
    for x in 0..6 {
        truth.set(x, 1, if x < 3 { 2 } else { 3 });
    }
    let mut pred = LabelRaster::filled(6, 2, 1);
    for x in 0..6 {
        pred.set(x, 1, 2);
    }
    write_labels(&truth, &root.join("truth.pgm")).unwrap();
    write_labels(&pred, &root.join("pred.pgm")).unwrap();

    // Unmapped, class 3 drags accuracy down to 9/12.
    let out = run_in(
        root,
        &[
            "evaluate",
            "--pred",
            "pred.pgm",
            "--truth",
            "truth.pgm",
            "--out",
            "m.csv",
        ],
    );
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("(9/12 correct"), "stdout: {stdout}");

    // Remapping the truth's 3 into 2 makes the rasters agree everywhere.
    fs::write(root.join("merge.txt"), "1 -> 1\n2 -> 2\n3 -> 2\n").unwrap();
    let out = run_in(
        root,
        &[
            "evaluate",
            "--pred",
            "pred.pgm",
            "--truth",
            "truth.pgm",
            "--remap",
            "merge.txt",
            "--out",
            "m.csv",
        ],
    );
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("(12/12 correct"), "stdout: {stdout}");

    // Dropping class 3 removes its pixels from scoring entirely.
    fs::write(root.join("drop.txt"), "1 -> 1\n2 -> 2\n3 -> drop\n").unwrap();
    let out = run_in(
        root,
        &[
            "evaluate",
            "--pred",
            "pred.pgm",
            "--truth",
            "truth.pgm",
            "--remap",
            "drop.txt",
            "--out",
            "m.csv",
        ],
    );
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("(9/9 correct"), "stdout: {stdout}");

    // --remap-pred applies the same grammar to the prediction raster.
    fs::write(root.join("swap.txt"), "1 -> 2\n2 -> 1\n").unwrap();
    let out = run_in(
        root,
        &[
            "evaluate",
            "--pred",
            "pred.pgm",
            "--truth",
            "truth.pgm",
            "--remap-pred",
            "swap.txt",
            "--remap",
            "drop.txt",
            "--out",
            "m.csv",
        ],
    );
    let (stdout, _) = expect_code(&out, 0);
    assert!(stdout.contains("(0/9 correct"), "stdout: {stdout}");
}

#[test]
fn short_palettes_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("scene.txt"), TWO_CLASS_SCENE).unwrap();
    expect_code(
        &run_in(
            root,
            &[
                "synth",
                "--spec",
                "scene.txt",
                "--out-cube",
                "cube.polc",
                "--out-labels",
                "gt.pgm",
            ],
        ),
        0,
    );
    expect_code(
        &run_in(
            root,
            &[
                "train",
                "--cube",
                "cube.polc",
                "--labels",
                "gt.pgm",
                "--per-class",
                "10",
                "--window",
                "5",
                "--max-iters",
                "2",
                "--out",
                "model.pcnn",
            ],
        ),
        0,
    );

    // Two classes need palette entries for ids 0..=2; one line is not enough.
    fs::write(root.join("short.txt"), "0 0 0\n").unwrap();
    let out = run_in(
        root,
        &[
            "classify",
            "--model",
            "model.pcnn",
            "--cube",
            "cube.polc",
            "--out-labels",
            "p.pgm",
            "--out-mask",
            "p.ppm",
            "--palette",
            "short.txt",
        ],
    );
    let (_, stderr) = expect_code(&out, 2);
    assert!(stderr.contains("palette"), "stderr: {stderr}");
}

#[test]
fn seeded_runs_are_reproducible_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("scene.txt"), TWO_CLASS_SCENE).unwrap();

    for tag in ["a", "b"] {
        expect_code(
            &run_in(
                root,
                &[
                    "synth",
                    "--spec",
                    "scene.txt",
                    "--seed",
                    "77",
                    "--out-cube",
                    &format!("cube_{tag}.polc"),
                    "--out-labels",
                    &format!("gt_{tag}.pgm"),
                ],
            ),
            0,
        );
        expect_code(
            &run_in(
                root,
                &[
                    "train",
                    "--cube",
                    &format!("cube_{tag}.polc"),
                    "--labels",
                    &format!("gt_{tag}.pgm"),
                    "--per-class",
                    "15",
                    "--window",
                    "5",
                    "--max-iters",
                    "5",
                    "--seed",
                    "21",
                    "--out",
                    &format!("model_{tag}.pcnn"),
                ],
            ),
            0,
        );
    }
    let cube_a = fs::read(root.join("cube_a.polc")).unwrap();
    let cube_b = fs::read(root.join("cube_b.polc")).unwrap();
    assert_eq!(cube_a, cube_b, "synth must be byte-stable under one seed");
    let model_a = fs::read(root.join("model_a.pcnn")).unwrap();
    let model_b = fs::read(root.join("model_b.pcnn")).unwrap();
    assert_eq!(model_a, model_b, "training must be byte-stable");
}
