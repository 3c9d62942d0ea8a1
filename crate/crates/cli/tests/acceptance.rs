//! Acceptance suite, CLI side: the reproduction pipeline run twice with
//! identical seeds must produce byte-identical registries (model files,
//! datasets, reports and index).

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn repro_script() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/paper_repro.sh")
}

/// Runs the pipeline script into `registry` at reduced scale (one
/// platform, two seeds); determinism does not depend on scale.
fn run_pipeline(registry: &Path) {
    let status = Command::new("bash")
        .arg(repro_script())
        .env("VBSPOWER_BIN", env!("CARGO_BIN_EXE_vbspower"))
        .env("VBSPOWER_REGISTRY", registry)
        .env("PLATFORMS", "Server2")
        .env("SEED_LO", "1")
        .env("SEED_HI", "2")
        .env("SOURCE_DATE_EPOCH", "0")
        .stdout(std::process::Stdio::null())
        .status()
        .expect("run paper_repro.sh");
    assert!(status.success(), "pipeline run failed");
}

/// FNV-1a over a file's bytes.
fn file_hash(path: &Path) -> u64 {
    let bytes = std::fs::read(path).unwrap();
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn registry_hashes(root: &Path) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().to_string();
                out.insert(rel, file_hash(&path));
            }
        }
    }
    out
}

#[test]
fn criterion_8_pipeline_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("run1");
    let second = dir.path().join("run2");
    run_pipeline(&first);
    run_pipeline(&second);

    let h1 = registry_hashes(&first);
    let h2 = registry_hashes(&second);

    let mut failures = Vec::new();
    if h1.is_empty() {
        failures.push("pipeline produced no artifacts".to_string());
    }
    for (path, hash) in &h1 {
        match h2.get(path) {
            Some(other) if other == hash => {}
            Some(_) => failures.push(format!("{path}: content differs between runs")),
            None => failures.push(format!("{path}: missing from the second run")),
        }
    }
    for path in h2.keys() {
        if !h1.contains_key(path) {
            failures.push(format!("{path}: extra artifact in the second run"));
        }
    }

    if failures.is_empty() {
        println!(
            "ACCEPTANCE 8 pipeline determinism: PASS ({} artifacts byte-identical)",
            h1.len()
        );
    } else {
        println!("ACCEPTANCE 8 pipeline determinism: FAIL");
        for f in &failures {
            println!("  - {f}");
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}
