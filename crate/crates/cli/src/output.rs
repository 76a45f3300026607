use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use innometer::report::RunManifest;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// What to print on stdout.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Directory receiving the JSON and CSV artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// RFC 3339 UTC timestamp; `SOURCE_DATE_EPOCH` pins it for reproducible runs.
pub fn timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse::<i64>().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs() as i64)
                .unwrap_or(0)
        });
    chrono::DateTime::from_timestamp(secs, 0)
        .unwrap_or_default()
        .format("%Y-%m-%dT%H:%M:%SZ")
        .to_string()
}

pub fn manifest(command: &str) -> RunManifest {
    RunManifest::new(command, timestamp())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Quotes a CSV field when it needs it.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(path.display(), e))
}

pub fn write_artifacts(dir: &Path, files: &[(&str, &str)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::input(dir.display(), e))?;
    for (name, content) in files {
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(|e| CliError::input(path.display(), e))?;
    }
    Ok(())
}

/// Writes artifacts (if requested) and prints the chosen rendering.
pub fn emit(
    args: &OutputArgs,
    stem: &str,
    json: &str,
    csv: &str,
    table: &str,
) -> Result<(), CliError> {
    if let Some(dir) = &args.out {
        write_artifacts(
            dir,
            &[(&format!("{stem}.json"), json), (&format!("{stem}.csv"), csv)],
        )?;
    }
    print!(
        "{}",
        match args.format {
            Format::Table => table,
            Format::Json => json,
            Format::Csv => csv,
        }
    );
    Ok(())
}

pub fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}
