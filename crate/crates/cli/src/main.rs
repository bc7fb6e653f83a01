mod commands;
mod config;
mod run;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Input that the user must fix. Exits with code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Some cells of a batch command failed; each was already reported.
#[derive(Debug)]
pub struct PartialFailure {
    pub failed: usize,
    pub total: usize,
    pub code: u8,
}

impl fmt::Display for PartialFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} of {} tasks failed", self.failed, self.total)
    }
}

impl std::error::Error for PartialFailure {}

#[derive(Debug, Parser)]
#[command(name = "compcq", version, about = "Generate, profile and compare competency-question sets")]
pub struct Cli {
    /// key = value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory name under output_dir; defaults to the newest unsealed run or a new one
    #[arg(long, global = true)]
    pub run_id: Option<String>,
    /// Coverage threshold, in (0, 1)
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Number of k-means clusters
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// k-means seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate CQ sets from requirement specs with configured providers
    Generate(GenerateArgs),
    /// Import (or produce via an external command) annotations for a set
    Annotate(AnnotateArgs),
    /// Attach embedding vectors to a set
    Embed(EmbedArgs),
    /// Compute per-CQ readability, complexity and relevance features
    Profile(ProfileArgs),
    /// APS, ACD and cluster entropy per set
    Diversity(DiversityArgs),
    /// Pairwise overlap between sets
    Compare(CompareArgs),
    /// Render report.md and report.csv and seal the run
    Report,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long = "spec", required_unless_present = "all_specs")]
    pub specs: Vec<String>,
    #[arg(long, conflicts_with = "specs")]
    pub all_specs: bool,
    #[arg(long = "provider", required_unless_present = "all_providers")]
    pub providers: Vec<String>,
    #[arg(long, conflicts_with = "providers")]
    pub all_providers: bool,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Set file path or set id
    #[arg(long)]
    pub set: String,
    /// Annotation file to import (.jsonl or .conllu)
    #[arg(long, required_unless_present = "exec", conflicts_with = "exec")]
    pub from: Option<PathBuf>,
    /// External annotator, invoked as `<exec...> <set file> <output file>`
    #[arg(long)]
    pub exec: Option<String>,
    /// parser_id for CoNLL-U input without a `# parser =` comment
    #[arg(long, default_value = "unknown")]
    pub parser_id: String,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Set file path or set id
    #[arg(long)]
    pub set: Vec<String>,
    /// Embed every set in the run
    #[arg(long, conflicts_with = "set")]
    pub all: bool,
    /// Read vectors from this file instead of the configured provider
    #[arg(long)]
    pub vectors: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Set file path or set id
    #[arg(long)]
    pub set: Vec<String>,
    /// Profile every set in the run
    #[arg(long, conflicts_with = "set")]
    pub all: bool,
    /// Annotation file; defaults to the run's annotations for the set
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Leave c2/c3 absent instead of requiring annotations
    #[arg(long)]
    pub skip_syntax: bool,
    /// Leave c1/relevance absent; no judge is contacted
    #[arg(long)]
    pub no_judge: bool,
    /// Exclude punctuation from the c3 node count
    #[arg(long)]
    pub no_punct_nodes: bool,
}

#[derive(Debug, Args)]
pub struct DiversityArgs {
    /// Vector files; defaults to every vector file in the run
    #[arg(long)]
    pub vectors: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pairs {
    SameSpec,
    All,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// First vector file or set id
    #[arg(long, requires = "b")]
    pub a: Option<String>,
    /// Second vector file or set id
    #[arg(long, requires = "a")]
    pub b: Option<String>,
    /// Which run sets to pair when --a/--b are absent
    #[arg(long, value_enum, default_value = "same-spec", conflicts_with = "a")]
    pub pairs: Pairs,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 1;
        }
        if let Some(p) = cause.downcast_ref::<PartialFailure>() {
            return p.code;
        }
        if let Some(e) = cause.downcast_ref::<compcq_core::Error>() {
            return match e {
                _ if e.is_validation() => 1,
                _ if e.is_provider() => 2,
                compcq_core::Error::Extraction { .. } | compcq_core::Error::Judgment { .. } => 2,
                compcq_core::Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 1,
                _ => 3,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use compcq_core::Error;

    #[test]
    fn exit_codes() {
        let v: anyhow::Error = Error::EmptyInput.into();
        assert_eq!(exit_code(&v), 1);
        let p: anyhow::Error = Error::MissingCredential {
            provider_id: "x".into(),
            var: "X".into(),
        }
        .into();
        assert_eq!(exit_code(&p), 2);
        let u: anyhow::Error = UsageError("bad".into()).into();
        assert_eq!(exit_code(&u.context("while doing things")), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("boom")), 3);
        let pf: anyhow::Error = PartialFailure {
            failed: 1,
            total: 2,
            code: 2,
        }
        .into();
        assert_eq!(exit_code(&pf), 2);
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let c = Cli::try_parse_from(["compcq", "--tau", "0.8", "compare", "--a", "x", "--b", "y"]).unwrap();
        assert_eq!(c.tau, Some(0.8));
        assert!(Cli::try_parse_from(["compcq", "compare", "--a", "x"]).is_err());
        assert!(Cli::try_parse_from(["compcq", "generate", "--spec", "wtgw"]).is_err());
    }
}
