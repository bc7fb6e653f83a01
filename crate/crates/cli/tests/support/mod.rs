#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const FIXTURE_SETS: [&str; 8] = [
    "bme.gemini",
    "bme.gpt",
    "musicmeta.gemini",
    "pdto.llama32-3b",
    "pjo.kimik2",
    "wtgw.gemini",
    "wtgw.gpt",
    "wtgw.llama31-8b",
];

/// The only fixture set with committed annotations.
pub const ANNOTATED_SET: &str = "wtgw.llama31-8b";

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn corpus() -> PathBuf {
    root().join("corpus")
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_compcq")
}

/// Writes `compcq.conf` in `dir` pointing at the bundled corpus, plus `extra` lines.
/// File embeddings from the corpus are used unless `extra` picks another kind.
pub fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let c = corpus();
    let mut text = format!(
        "corpus.specs = {}\ncorpus.sets = {}\noutput_dir = {}\ncache_dir = {}\n",
        c.join("specs").display(),
        c.join("sets").display(),
        dir.join("runs").display(),
        dir.join("cache").display(),
    );
    if !extra.contains("embedding.kind") {
        text += &format!("embedding.kind = file\nembedding.dir = {}\n", c.join("vectors").display());
    }
    text += extra;
    let path = dir.join("compcq.conf");
    std::fs::write(&path, text).unwrap();
    path
}

pub struct Cli {
    pub config: PathBuf,
    pub run_id: String,
}

impl Cli {
    pub fn new(dir: &Path, extra: &str) -> Self {
        Self {
            config: write_config(dir, extra),
            run_id: "test-run".into(),
        }
    }

    pub fn command(&self, args: &[&str]) -> Command {
        let mut c = Command::new(bin());
        c.arg("--config").arg(&self.config).arg("--run-id").arg(&self.run_id).args(args);
        c.env_remove("RUST_LOG");
        c
    }

    pub fn run(&self, args: &[&str]) -> Output {
        self.command(args).output().unwrap()
    }

    pub fn run_dir(&self) -> PathBuf {
        self.config.parent().unwrap().join("runs").join(&self.run_id)
    }
}

pub fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Asserts success, echoing both streams otherwise.
pub fn ok(o: Output) -> Output {
    assert_eq!(code(&o), 0, "stdout:\n{}\nstderr:\n{}", stdout(&o), stderr(&o));
    o
}

/// Argument lists for the offline pipeline over every fixture set:
/// import annotations, profile without a judge, embed from files,
/// diversity, same-spec comparison and the report.
pub fn offline_pipeline() -> Vec<Vec<String>> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let ann = corpus().join("annotations").join(format!("{ANNOTATED_SET}.jsonl"));
    let mut steps = vec![s(&["annotate", "--set", ANNOTATED_SET, "--from", ann.to_str().unwrap()])];
    for set in FIXTURE_SETS {
        let mut p = s(&["profile", "--no-judge", "--set", set]);
        if set != ANNOTATED_SET {
            p.push("--skip-syntax".into());
        }
        steps.push(p);
    }
    steps.push(s(&["embed", "--all"]));
    steps.push(s(&["diversity"]));
    steps.push(s(&["compare", "--pairs", "same-spec"]));
    steps.push(s(&["report"]));
    steps
}
