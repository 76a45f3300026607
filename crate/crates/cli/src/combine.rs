use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use innometer::evidence::{combine, discount, DiscountStyle};
use innometer::indicators::IndicatorReport;
use innometer::report::RunManifest;
use innometer::{IndicatorKind, MassAssignment};
use serde::{Deserialize, Serialize};

use crate::assess::AssessOutput;
use crate::error::CliError;
use crate::output::{emit, fmt2, manifest, read, to_json, OutputArgs};

#[derive(Debug, Args)]
pub struct CombineArgs {
    /// Assessment report (JSON written by `assess`) of the first source.
    pub first: PathBuf,
    /// Assessment report of the second source.
    pub second: PathBuf,
    /// Credibility discount `ENGINE=ALPHA`, alpha in [0, 1]; repeatable.
    #[arg(long = "alpha", value_parser = parse_alpha)]
    pub alphas: Vec<(String, f64)>,
    /// Discounting style: paper (deficit unassigned) or shafer (deficit to the frame).
    #[arg(long, default_value_t = DiscountStyle::Paper)]
    pub style: DiscountStyle,
    /// Which indicator to fuse when a report holds both.
    #[arg(long, default_value_t = IndicatorKind::Novelty)]
    pub kind: IndicatorKind,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_alpha(s: &str) -> Result<(String, f64), String> {
    let (engine, alpha) = s
        .split_once('=')
        .ok_or_else(|| format!("expected ENGINE=ALPHA, got `{s}`"))?;
    let alpha: f64 = alpha
        .trim()
        .parse()
        .map_err(|_| format!("alpha `{alpha}` is not a number"))?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(format!("alpha {alpha} outside [0, 1]"));
    }
    Ok((engine.trim().to_string(), alpha))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombineOutput {
    pub manifest: RunManifest,
    pub kind: IndicatorKind,
    pub engines: [String; 2],
    pub conflict: f64,
    /// Fused mass per interval of the first report's partition.
    pub interval_masses: Vec<f64>,
    pub probability: f64,
    pub combined: MassAssignment,
}

fn select(path: &Path, kind: IndicatorKind) -> Result<(IndicatorReport, RunManifest), CliError> {
    let output: AssessOutput =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::input(path.display(), e))?;
    let mut matching = output.results.into_iter().filter(|e| e.report.kind == kind);
    let first = matching
        .next()
        .ok_or_else(|| CliError::input(path.display(), format!("no {kind} report")))?;
    if matching.next().is_some() {
        return Err(CliError::input(
            path.display(),
            format!("several {kind} reports; combine expects one per file"),
        ));
    }
    Ok((first.report, output.manifest))
}

pub fn run(args: &CombineArgs) -> Result<(), CliError> {
    let (a, manifest_a) = select(&args.first, args.kind)?;
    let (b, manifest_b) = select(&args.second, args.kind)?;
    let ids = [a.series.engine_id.clone(), b.series.engine_id.clone()];
    let mut alphas = BTreeMap::new();
    for (engine, alpha) in &args.alphas {
        if !ids.contains(engine) {
            return Err(CliError::Input(format!(
                "--alpha names engine `{engine}`, but the reports come from `{}` and `{}`",
                ids[0], ids[1]
            )));
        }
        alphas.insert(engine.clone(), *alpha);
    }
    if a.partition.len() != b.partition.len() {
        return Err(CliError::Input(format!(
            "reports use different partitions: {} vs {} intervals",
            a.partition.len(),
            b.partition.len()
        )));
    }
    let prepare = |report: &IndicatorReport| -> Result<MassAssignment, CliError> {
        Ok(match alphas.get(&report.series.engine_id) {
            Some(&alpha) => discount(&report.assignment, alpha, args.style)?,
            None => report.assignment.clone(),
        })
    };
    let fused = combine(&prepare(&a)?, &prepare(&b)?)?;

    let mut manifest = manifest("combine");
    for m in [&manifest_a, &manifest_b] {
        for d in &m.pattern_digests {
            if !manifest.pattern_digests.contains(d) {
                manifest.pattern_digests.push(d.clone());
            }
        }
    }
    manifest.engine_ids = ids.to_vec();
    manifest.mode = manifest_a.mode.clone();
    manifest.partition = manifest_a.partition.clone();
    manifest.discounts = alphas;
    manifest.discount_style = Some(args.style.to_string());

    let output = CombineOutput {
        manifest,
        kind: args.kind,
        engines: ids,
        conflict: fused.conflict,
        probability: fused.probability(args.kind),
        interval_masses: fused.interval_masses.clone(),
        combined: fused.combined,
    };
    let labels = &a.partition.labels;
    emit(
        &args.output,
        "combine",
        &to_json(&output),
        &render_csv(&output),
        &render_table(&output, labels),
    )
}

pub fn render_csv(output: &CombineOutput) -> String {
    let mut out = String::from("interval,mass\n");
    for (i, m) in output.interval_masses.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, m);
    }
    out
}

fn render_table(output: &CombineOutput, labels: &[String]) -> String {
    let symbol = match output.kind {
        IndicatorKind::Novelty => "Nv",
        IndicatorKind::Relevance => "Rl",
    };
    let mut out = String::new();
    let _ = writeln!(out, "{} + {}, {}", output.engines[0], output.engines[1], output.kind);
    if !output.manifest.discounts.is_empty() {
        let parts: Vec<String> = output
            .manifest
            .discounts
            .iter()
            .map(|(e, a)| format!("{e}={a}"))
            .collect();
        let _ = writeln!(
            out,
            "  discount ({}): {}",
            output.manifest.discount_style.as_deref().unwrap_or("paper"),
            parts.join(", ")
        );
    }
    let _ = writeln!(out, "  K = {}", fmt2(output.conflict));
    let width = labels.iter().map(String::len).max().unwrap_or(5).max(5);
    let _ = writeln!(out, "  {:>3}  {:<width$}  {:>8}", "A_k", "label", "m12(A_k)");
    for (i, m) in output.interval_masses.iter().enumerate() {
        let label = labels.get(i).map(String::as_str).unwrap_or("");
        let _ = writeln!(out, "  {:>3}  {:<width$}  {:>8}", i + 1, label, fmt2(*m));
    }
    let _ = writeln!(out, "  p({symbol}) = {}", fmt2(output.probability));
    out
}
