use std::path::PathBuf;

use clap::Args;
use innometer::corpus::{load_engine, EvidenceSource};
use innometer::Corpus;

use crate::error::CliError;

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Engine config file; repeat for several engines.
    #[arg(long = "engine")]
    pub engines: Vec<PathBuf>,
    /// Offline JSON Lines corpus; its engine id is the file stem.
    #[arg(long = "corpus")]
    pub corpora: Vec<PathBuf>,
}

impl SourceArgs {
    pub fn load(&self) -> Result<Vec<Box<dyn EvidenceSource>>, CliError> {
        let mut sources: Vec<Box<dyn EvidenceSource>> = Vec::new();
        for path in &self.engines {
            sources.push(load_engine(path)?);
        }
        for path in &self.corpora {
            sources.push(Box::new(Corpus::load(path)?));
        }
        if sources.is_empty() {
            return Err(CliError::Input(
                "no evidence source: pass --engine or --corpus".into(),
            ));
        }
        Ok(sources)
    }
}
