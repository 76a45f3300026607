use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use innometer::corpus::{observe_series, ObserveOptions, SeriesCache};
use innometer::indicators::{assess, summary_stats, IndicatorReport};
use innometer::pattern::parse_pattern;
use innometer::report::RunManifest;
use innometer::{IndicatorKind, NormalizationMode, PartitionStrategy};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{csv_field, emit, fmt2, manifest, read, to_json, OutputArgs};
use crate::sources::SourceArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Novelty,
    Relevance,
    Both,
}

impl KindArg {
    pub fn kinds(self) -> Vec<IndicatorKind> {
        match self {
            KindArg::Novelty => vec![IndicatorKind::Novelty],
            KindArg::Relevance => vec![IndicatorKind::Relevance],
            KindArg::Both => vec![IndicatorKind::Novelty, IndicatorKind::Relevance],
        }
    }
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    /// Search pattern files (marker, key terms, optional synonyms).
    #[arg(required = true)]
    pub patterns: Vec<PathBuf>,
    #[command(flatten)]
    pub sources: SourceArgs,
    /// Count normalization: saturating or verbatim.
    #[arg(long, default_value_t = NormalizationMode::Saturating)]
    pub mode: NormalizationMode,
    /// Interval partition: equal or quantile.
    #[arg(long, default_value_t = PartitionStrategy::Equal)]
    pub partition: PartitionStrategy,
    #[arg(long, value_enum, default_value_t = KindArg::Novelty)]
    pub kind: KindArg,
    /// Restrict counts to documents of one year.
    #[arg(long)]
    pub year: Option<i32>,
    /// Bypass the observation cache.
    #[arg(long)]
    pub no_cache: bool,
    /// Queries executed concurrently per engine.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssessEntry {
    pub pattern_file: String,
    pub marker: String,
    pub pattern_digest: String,
    pub report: IndicatorReport,
}

/// Mean and population standard deviation of one indicator over a batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub engine_id: String,
    pub kind: IndicatorKind,
    pub patterns: usize,
    pub mean: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssessOutput {
    pub manifest: RunManifest,
    pub results: Vec<AssessEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub summary: Vec<SummaryRow>,
}

pub fn run(args: &AssessArgs) -> Result<(), CliError> {
    let mut patterns = Vec::new();
    for path in &args.patterns {
        let pattern = parse_pattern(&read(path)?).map_err(|e| CliError::input(path.display(), e))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        patterns.push((name, pattern));
    }
    let sources = args.sources.load()?;
    let cache = (!args.no_cache).then(SeriesCache::from_env);
    let options = ObserveOptions {
        cache: cache.as_ref(),
        parallelism: args.jobs.max(1),
    };

    let kinds = args.kind.kinds();
    let mut results = Vec::new();
    for (name, pattern) in &patterns {
        for source in &sources {
            for &kind in &kinds {
                let series = observe_series(
                    source.as_ref(),
                    pattern,
                    kind.observation_kind(),
                    args.year,
                    options,
                )?;
                let report = assess(&series, kind, args.mode, args.partition)?;
                results.push(AssessEntry {
                    pattern_file: name.clone(),
                    marker: pattern.marker().to_string(),
                    pattern_digest: pattern.digest(),
                    report,
                });
            }
        }
    }

    let mut summary = Vec::new();
    if patterns.len() > 1 {
        for source in &sources {
            for &kind in &kinds {
                let values: Vec<f64> = results
                    .iter()
                    .filter(|r| r.report.kind == kind && r.report.series.engine_id == source.engine_id())
                    .map(|r| r.report.value)
                    .collect();
                if let Some((mean, std_dev)) = summary_stats(&values) {
                    summary.push(SummaryRow {
                        engine_id: source.engine_id().to_string(),
                        kind,
                        patterns: values.len(),
                        mean,
                        std_dev,
                    });
                }
            }
        }
    }

    let mut manifest = manifest("assess");
    manifest.pattern_digests = patterns.iter().map(|(_, p)| p.digest()).collect();
    manifest.engine_ids = sources.iter().map(|s| s.engine_id().to_string()).collect();
    manifest.year = args.year;
    manifest.mode = Some(args.mode.to_string());
    manifest.partition = Some(args.partition.to_string());
    let output = AssessOutput {
        manifest,
        results,
        summary,
    };
    emit(
        &args.output,
        "assess",
        &to_json(&output),
        &render_csv(&output),
        &render_table(&output)?,
    )
}

fn symbol(kind: IndicatorKind) -> &'static str {
    match kind {
        IndicatorKind::Novelty => "Nv",
        IndicatorKind::Relevance => "Rl",
    }
}

pub fn render_csv(output: &AssessOutput) -> String {
    let mut out = String::from("pattern,engine,kind,k,raw,normalized,interval\n");
    for entry in &output.results {
        let prefix = format!(
            "{},{},{}",
            csv_field(&entry.marker),
            csv_field(&entry.report.series.engine_id),
            entry.report.kind
        );
        for line in entry.report.to_csv().lines().skip(1) {
            let _ = writeln!(out, "{prefix},{line}");
        }
    }
    out
}

pub fn render_table(output: &AssessOutput) -> Result<String, CliError> {
    let mut out = String::new();
    for entry in &output.results {
        let r = &entry.report;
        let masses = r.assignment.interval_masses()?;
        let _ = writeln!(
            out,
            "pattern {}, engine {}, {} (S = {}, I = {})",
            entry.marker,
            r.series.engine_id,
            r.kind,
            r.series.values.len(),
            r.partition.len()
        );
        let width = r.partition.labels.iter().map(String::len).max().unwrap_or(5).max(5);
        let _ = writeln!(out, "  {:>3}  {:<width$}  {:>4}  {:>6}", "A_k", "label", "q_k", "m(A_k)");
        for (i, count) in r.grouping.counts().iter().enumerate() {
            let _ = writeln!(
                out,
                "  {:>3}  {:<width$}  {:>4}  {:>6}",
                i + 1,
                r.partition.labels[i],
                count,
                fmt2(masses[i])
            );
        }
        let s = symbol(r.kind);
        let _ = writeln!(out, "  {s} = {}, p({s}) = {}", fmt2(r.value), fmt2(r.probability));
        if r.empty_baseline {
            let _ = writeln!(out, "  (no documents matched the marker)");
        }
        out.push('\n');
    }
    if !output.summary.is_empty() {
        let _ = writeln!(out, "summary");
        let _ = writeln!(out, "  {:<12}  {:<9}  {:>8}  {:>5}  {:>5}", "engine", "indicator", "patterns", "mean", "sigma");
        for row in &output.summary {
            let _ = writeln!(
                out,
                "  {:<12}  {:<9}  {:>8}  {:>5}  {:>5}",
                row.engine_id,
                row.kind.to_string(),
                row.patterns,
                fmt2(row.mean),
                fmt2(row.std_dev)
            );
        }
    }
    Ok(out)
}
