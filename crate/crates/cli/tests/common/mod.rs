#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(rel: &str) -> String {
    fixtures().join(rel).display().to_string()
}

/// Runs the binary with a pinned timestamp and a private cache directory.
pub fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_innometer"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1500000000")
        .env("INNOMETER_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

/// Assesses the eye pattern on one engine, writing `assess.json` into `dir`.
pub fn assess_engine(cache: &Path, engine: &str, dir: &Path) -> PathBuf {
    ok(run(
        cache,
        &[
            "assess",
            &fixture("patterns/01-eye.json"),
            "--engine",
            &fixture(&format!("engines/{engine}")),
            "--out",
            dir.to_str().unwrap(),
        ],
    ));
    dir.join("assess.json")
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
