//! Run directory layout.
//!
//! ```text
//! <output_dir>/<run_id>/
//!   sets/<set_id>.jsonl
//!   generation/<set_id>.generation.json
//!   annotations/<set_id>.jsonl
//!   vectors/<set_id>.vec.jsonl
//!   features/<set_id>.features.jsonl
//!   features/<set_id>.meta.json
//!   reports/diversity.json
//!   reports/pairwise.json
//!   report.md
//!   report.csv
//! ```
//!
//! A run is sealed once `report.md` exists; later writes are refused.

use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::UsageError;

#[derive(Debug, Clone)]
pub struct RunDir {
    pub id: String,
    pub root: PathBuf,
}

pub fn fresh_run_id() -> String {
    chrono::Utc::now().format("run-%Y%m%d-%H%M%S").to_string()
}

fn valid_run_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl RunDir {
    /// Opens `--run-id` if given. Otherwise picks the newest run that is not
    /// sealed, or starts a new one.
    pub fn resolve(output_dir: &Path, run_id: Option<&str>) -> anyhow::Result<Self> {
        let id = match run_id {
            Some(id) => {
                if !valid_run_id(id) {
                    return Err(UsageError(format!("invalid run id {id:?}")).into());
                }
                id.to_owned()
            }
            None => latest_open(output_dir)?.unwrap_or_else(fresh_run_id),
        };
        Ok(Self {
            root: output_dir.join(&id),
            id,
        })
    }

    pub fn sets(&self) -> PathBuf {
        self.root.join("sets")
    }

    pub fn generation(&self) -> PathBuf {
        self.root.join("generation")
    }

    pub fn annotations(&self) -> PathBuf {
        self.root.join("annotations")
    }

    pub fn vectors(&self) -> PathBuf {
        self.root.join("vectors")
    }

    pub fn features(&self) -> PathBuf {
        self.root.join("features")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn report_md(&self) -> PathBuf {
        self.root.join("report.md")
    }

    pub fn is_sealed(&self) -> bool {
        self.report_md().exists()
    }

    /// Creates `sub` for writing, refusing sealed runs.
    pub fn writable(&self, sub: PathBuf) -> anyhow::Result<PathBuf> {
        if self.is_sealed() {
            return Err(UsageError(format!(
                "run {} already has a rendered report and is read-only; pass a new --run-id",
                self.id
            ))
            .into());
        }
        std::fs::create_dir_all(&sub).with_context(|| format!("creating {}", sub.display()))?;
        Ok(sub)
    }
}

fn latest_open(output_dir: &Path) -> anyhow::Result<Option<String>> {
    let Ok(entries) = std::fs::read_dir(output_dir) else {
        return Ok(None);
    };
    let mut open: Vec<String> = Vec::new();
    for e in entries {
        let e = e.with_context(|| format!("listing {}", output_dir.display()))?;
        let name = e.file_name().to_string_lossy().into_owned();
        if e.path().is_dir() && name.starts_with("run-") && !e.path().join("report.md").exists() {
            open.push(name);
        }
    }
    open.sort();
    Ok(open.pop())
}

/// Files in `dir` ending with `suffix`, sorted by name. A missing directory is empty.
pub fn list_files(dir: &Path, suffix: &str) -> anyhow::Result<Vec<PathBuf>> {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for e in entries {
        let p = e.with_context(|| format!("listing {}", dir.display()))?.path();
        if p.is_file() && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(suffix)) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_newest_open_run() {
        let d = tempfile::tempdir().unwrap();
        for id in ["run-20250101-000000", "run-20250102-000000", "run-20250103-000000"] {
            std::fs::create_dir_all(d.path().join(id)).unwrap();
        }
        std::fs::write(d.path().join("run-20250103-000000/report.md"), "x").unwrap();
        let r = RunDir::resolve(d.path(), None).unwrap();
        assert_eq!(r.id, "run-20250102-000000");
        assert!(RunDir::resolve(d.path(), Some("../escape")).is_err());
    }

    #[test]
    fn sealed_runs_refuse_writes() {
        let d = tempfile::tempdir().unwrap();
        let r = RunDir::resolve(d.path(), Some("r1")).unwrap();
        r.writable(r.sets()).unwrap();
        std::fs::write(r.report_md(), "x").unwrap();
        assert!(r.writable(r.sets()).is_err());
    }
}
