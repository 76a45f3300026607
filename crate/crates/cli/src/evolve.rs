use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use innometer::evolver::{evolve, parse_reference, EvolvedModel, EvolverConfig, Termination};
use innometer::report::RunManifest;
use innometer::Corpus;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{fmt2, manifest, read, to_json, write_artifacts, Format};

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Reference terms file (marker, terms, optional synonyms).
    #[arg(long)]
    pub reference: PathBuf,
    /// Offline JSON Lines corpus searched by candidate queries.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Evolver configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory receiving evolved-model.json and pattern.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// What to print on stdout: table summary or the model as JSON.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveOutput {
    pub manifest: RunManifest,
    pub model: EvolvedModel,
}

pub fn run(args: &EvolveArgs) -> Result<(), CliError> {
    let reference = parse_reference(&read(&args.reference)?)
        .map_err(|e| CliError::input(args.reference.display(), e))?;
    let mut config: EvolverConfig = serde_json::from_str(&read(&args.config)?)
        .map_err(|e| CliError::input(args.config.display(), e))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config
        .validate(reference.terms().len())
        .map_err(|e| CliError::input(args.config.display(), e))?;
    let corpus = Corpus::load(&args.corpus)?;

    let model = evolve(&reference, &corpus, &config)?;
    let pattern = model.derive_pattern(&reference, config.pattern_terms)?;

    let mut manifest = manifest("evolve");
    manifest.pattern_digests = vec![reference.digest(), pattern.digest()];
    manifest.engine_ids = vec![corpus.engine_id().to_string()];
    manifest.seed = Some(config.seed);
    let output = EvolveOutput { manifest, model };
    let json = to_json(&output);
    let mut pattern_json = pattern.to_json();
    pattern_json.push('\n');
    write_artifacts(
        &args.out,
        &[("evolved-model.json", &json), ("pattern.json", &pattern_json)],
    )?;

    match args.format {
        Format::Json => print!("{json}"),
        Format::Table | Format::Csv => print!("{}", render_table(&output, &pattern.terms().join(", "))),
    }
    Ok(())
}

fn render_table(output: &EvolveOutput, pattern_terms: &str) -> String {
    let m = &output.model;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} generations, stopped by {}, best fitness {}",
        m.generations,
        match m.termination {
            Termination::Stability => "stability",
            Termination::MaxGenerations => "generation limit",
        },
        fmt2(m.history.last().map(|h| h.best).unwrap_or(0.0))
    );
    let _ = writeln!(out, "  {:<20}  {:>6}", "term", "weight");
    for t in &m.terms {
        let _ = writeln!(out, "  {:<20}  {:>6}", t.term, t.weight);
    }
    let _ = writeln!(out, "pattern: {pattern_terms}");
    out
}
