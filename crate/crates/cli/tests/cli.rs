//! End-to-end checks of the command-line surface and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vbspower")
}

fn run(registry: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .arg("--registry")
        .arg(registry)
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("spawn vbspower")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout(out),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn generate_campaign_writes_reference_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["generate", "--platform", "NUC1", "--campaign", "--seed", "7"],
    );
    assert_code(&out, 0);

    let default_csv =
        std::fs::read_to_string(dir.path().join("datasets/NUC1_default_seed7.csv")).unwrap();
    let custom_csv =
        std::fs::read_to_string(dir.path().join("datasets/NUC1_custom_seed7.csv")).unwrap();
    assert_eq!(default_csv.lines().count() - 1, 598);
    assert_eq!(custom_csv.lines().count() - 1, 4955);
}

#[test]
fn generate_is_idempotent_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "generate", "--platform", "Server2", "--scheduler", "custom", "--n", "200", "--seed",
        "3",
    ];
    assert_code(&run(dir.path(), &args), 0);
    let first = std::fs::read(dir.path().join("datasets/Server2_custom_seed3.csv")).unwrap();
    assert_code(&run(dir.path(), &args), 0);
    let second = std::fs::read(dir.path().join("datasets/Server2_custom_seed3.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["generate", "--platform", "NUC1", "--scheduler", "custom", "--n", "0"],
    );
    assert_code(&out, 1);

    // unknown model kind is a clap-level usage error
    let out = run(
        dir.path(),
        &["fit", "--dataset", "x.csv", "--model-kind", "unknown"],
    );
    assert_code(&out, 1);
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["fit", "--dataset", "/nonexistent.csv", "--model-kind", "default-reg"],
    );
    assert_code(&out, 2);

    let out = run(
        dir.path(),
        &["eval", "--scenario", "A", "--platform", "NUC2", "--seeds", "1"],
    );
    assert_code(&out, 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("NUC2_default_seed1.csv"), "stderr: {err}");
}

/// Writes a model file holding the stock server-class coefficients.
fn write_fixture_model(path: &Path) {
    use vbspower::modelfile::{save_model, ModelFile, ModelPayload};
    use vbspower::profile::SERVER_CLASS_COEFFS;
    use vbspower::regression::{CustomRegParams, Variant};

    let model = ModelFile {
        payload: ModelPayload::CustomReg(
            CustomRegParams::new(SERVER_CLASS_COEFFS, Variant::Continuous).unwrap(),
        ),
        platform: "Server2".into(),
        train_scenario: "fixture".into(),
        seed: 0,
        created_at: "2026-01-01T00:00:00Z".into(),
    };
    save_model(&model, path).unwrap();
}

#[test]
fn predict_matches_hand_computed_fixture_value() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("models/fixture.toml");
    std::fs::create_dir_all(model_path.parent().unwrap()).unwrap();
    write_fixture_model(&model_path);

    let out = run(
        dir.path(),
        &["predict", "--model", model_path.to_str().unwrap(), "--airtime", "0.5",
          "--snr", "20", "--mcs", "10"],
    );
    assert_code(&out, 0);
    assert_eq!(stdout(&out).trim(), "22.9500");

    // below the feasibility floor: a distinct exit code, not a crash
    let out = run(
        dir.path(),
        &["predict", "--model", model_path.to_str().unwrap(), "--airtime", "0.5",
          "--snr", "3", "--mcs", "10"],
    );
    assert_code(&out, 3);
}

#[test]
fn predict_zero_weight_network_prints_zero() {
    use vbspower::mlp::{MlpModel, TrainConfig, DEFAULT_LAYER_DIMS};
    use vbspower::modelfile::{mlp_payload, save_model, ModelFile};

    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("zero.toml");
    let model = ModelFile {
        payload: mlp_payload(MlpModel::zeros(&DEFAULT_LAYER_DIMS), TrainConfig::default()),
        platform: "NUC1".into(),
        train_scenario: "adhoc".into(),
        seed: 0,
        created_at: "2026-01-01T00:00:00Z".into(),
    };
    save_model(&model, &model_path).unwrap();

    let out = run(
        dir.path(),
        &["predict", "--model", model_path.to_str().unwrap(), "--airtime", "0.5",
          "--snr", "10", "--mcs", "5"],
    );
    assert_code(&out, 0);
    assert_eq!(stdout(&out).trim(), "0.0000");
}

#[test]
fn train_records_config_in_model_file() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &run(
            dir.path(),
            &["generate", "--platform", "Server2", "--scheduler", "default", "--n", "120",
              "--seed", "5"],
        ),
        0,
    );
    let ds = dir.path().join("datasets/Server2_default_seed5.csv");
    assert_code(
        &run(
            dir.path(),
            &["train", "--dataset", ds.to_str().unwrap(), "--epochs", "220", "--batch", "32",
              "--lr", "0.001", "--seed", "5", "--scenario", "A"],
        ),
        0,
    );
    let text =
        std::fs::read_to_string(dir.path().join("models/mlp_Server2_A_seed5.toml")).unwrap();
    assert!(text.contains("epochs = 220"), "{text}");
    assert!(text.contains("batch_size = 32"));
    assert!(text.contains("learning_rate = 0.001"));
    assert!(text.contains("model_kind = \"mlp\""));
}

fn eval_small_campaign(dir: &Path, scenario: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "eval", "--scenario", scenario, "--platform", "Server2", "--seeds", "4..5",
    ];
    args.extend_from_slice(extra);
    run(dir, &args)
}

#[test]
fn eval_reports_and_scatter_files() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["4", "5"] {
        assert_code(
            &run(
                dir.path(),
                &["generate", "--platform", "Server2", "--campaign", "--seed", seed],
            ),
            0,
        );
    }

    // 2 seeds x 2 model kinds -> 4 rows after the header
    let out = eval_small_campaign(dir.path(), "A", &[]);
    assert_code(&out, 0);
    let report =
        std::fs::read_to_string(dir.path().join("reports/eval_A_Server2_seeds4-5.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 4);

    // scatter row count equals the raw test-set size (21 for Server2's
    // 107-row default dataset)
    let scatter = std::fs::read_to_string(
        dir.path().join("reports/scatter_A_Server2_regression_seed4.csv"),
    )
    .unwrap();
    assert_eq!(scatter.lines().count() - 1, 21);

    // B and C at the same seed must share the test-set fingerprint
    assert_code(&eval_small_campaign(dir.path(), "B", &[]), 0);
    assert_code(&eval_small_campaign(dir.path(), "C", &[]), 0);
    let fingerprints = |name: &str| -> Vec<String> {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        text.lines()
            .filter(|l| l.starts_with("test_fingerprint"))
            .map(str::to_string)
            .collect()
    };
    let b = fingerprints("reports/eval_B_Server2_seeds4-5.toml");
    let c = fingerprints("reports/eval_C_Server2_seeds4-5.toml");
    assert!(!b.is_empty());
    assert_eq!(b, c);

    // the transfer scenario refuses the regression kind
    let out = eval_small_campaign(dir.path(), "D", &["--model-kinds", "regression"]);
    assert_code(&out, 2);
    // and runs with the network
    let out = eval_small_campaign(dir.path(), "D", &["--model-kinds", "nn"]);
    assert_code(&out, 0);
}

#[test]
fn registry_rebuild_matches_incremental_index() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &run(
            dir.path(),
            &["generate", "--platform", "NUC2", "--campaign", "--seed", "2"],
        ),
        0,
    );
    let ds = dir.path().join("datasets/NUC2_custom_seed2.csv");
    assert_code(
        &run(
            dir.path(),
            &["fit", "--dataset", ds.to_str().unwrap(), "--model-kind", "custom-reg",
              "--scenario", "C"],
        ),
        0,
    );

    let incremental = std::fs::read_to_string(dir.path().join("index.toml")).unwrap();
    assert_code(&run(dir.path(), &["registry", "rebuild"]), 0);
    let rebuilt = std::fs::read_to_string(dir.path().join("index.toml")).unwrap();
    assert_eq!(incremental, rebuilt);
    assert_code(&run(dir.path(), &["registry", "list"]), 0);
}

#[test]
fn fit_seed_inferred_from_dataset_filename() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &run(
            dir.path(),
            &["generate", "--platform", "NUC1", "--scheduler", "custom", "--n", "400",
              "--seed", "11"],
        ),
        0,
    );
    let ds = dir.path().join("datasets/NUC1_custom_seed11.csv");
    assert_code(
        &run(
            dir.path(),
            &["fit", "--dataset", ds.to_str().unwrap(), "--model-kind", "custom-reg"],
        ),
        0,
    );
    assert!(dir
        .path()
        .join("models/custom_reg_NUC1_adhoc_seed11.toml")
        .exists());
}
