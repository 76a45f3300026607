use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use innometer::corpus::{ObserveOptions, SeriesCache};
use innometer::pattern::parse_pattern;
use innometer::report::RunManifest;
use innometer::trend::{compute_trend, TrendSeries};
use innometer::NormalizationMode;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{emit, fmt2, manifest, read, to_json, OutputArgs};
use crate::sources::SourceArgs;

#[derive(Debug, Args)]
pub struct TrendArgs {
    /// Search pattern file.
    pub pattern: PathBuf,
    #[command(flatten)]
    pub sources: SourceArgs,
    /// First year (inclusive).
    #[arg(long)]
    pub from: i32,
    /// Last year (inclusive).
    #[arg(long)]
    pub to: i32,
    #[arg(long, default_value_t = NormalizationMode::Saturating)]
    pub mode: NormalizationMode,
    /// Bypass the observation cache.
    #[arg(long)]
    pub no_cache: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendOutput {
    pub manifest: RunManifest,
    pub engine_id: String,
    pub marker: String,
    pub trend: TrendSeries,
}

pub fn run(args: &TrendArgs) -> Result<(), CliError> {
    if args.from > args.to {
        return Err(CliError::Input(format!(
            "empty year range {}..{}",
            args.from, args.to
        )));
    }
    let pattern = parse_pattern(&read(&args.pattern)?)
        .map_err(|e| CliError::input(args.pattern.display(), e))?;
    let sources = args.sources.load()?;
    if sources.len() != 1 {
        return Err(CliError::Input("trend takes exactly one source".into()));
    }
    let source = sources[0].as_ref();
    let cache = (!args.no_cache).then(SeriesCache::from_env);
    let options = ObserveOptions {
        cache: cache.as_ref(),
        parallelism: 1,
    };
    let trend = compute_trend(source, &pattern, args.from, args.to, args.mode, options)?;

    let mut manifest = manifest("trend");
    manifest.pattern_digests = vec![pattern.digest()];
    manifest.engine_ids = vec![source.engine_id().to_string()];
    manifest.year_range = Some((args.from, args.to));
    manifest.mode = Some(args.mode.to_string());
    let output = TrendOutput {
        manifest,
        engine_id: source.engine_id().to_string(),
        marker: pattern.marker().to_string(),
        trend,
    };
    emit(
        &args.output,
        "trend",
        &to_json(&output),
        &output.trend.to_csv(),
        &render_table(&output),
    )
}

fn render_table(output: &TrendOutput) -> String {
    let t = &output.trend;
    let cell = |v: &Option<f64>| v.map(fmt2).unwrap_or_else(|| "-".into());
    let mut out = String::new();
    let _ = writeln!(out, "pattern {}, engine {}", output.marker, output.engine_id);
    let _ = writeln!(out, "  {:>4}  {:>5}  {:>5}", "year", "Nv", "Rl");
    for ((year, nv), rl) in t.years.iter().zip(&t.nv_values).zip(&t.rl_values) {
        let _ = writeln!(out, "  {:>4}  {:>5}  {:>5}", year, cell(nv), cell(rl));
    }
    let slope = |fit: &Option<innometer::trend::LinearFit>| {
        fit.map(|f| format!("{:.4}", f.slope))
            .unwrap_or_else(|| "undefined".into())
    };
    let _ = writeln!(out, "  Nv slope {}, Rl slope {}", slope(&t.nv_fit), slope(&t.rl_fit));
    let _ = writeln!(
        out,
        "  corr(Nv, Rl) = {}",
        t.pearson_r.map(fmt2).unwrap_or_else(|| "undefined".into())
    );
    out
}
