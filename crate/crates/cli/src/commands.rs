use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use compcq_core::annotation::{load_annotations, parse_conllu, save_annotations, Annotation};
use compcq_core::complexity::{self, extract_batch, SyntaxOptions};
use compcq_core::corpus::{load_corpus, load_cqset, save_cqset, CqSet, RequirementSpec};
use compcq_core::embedding::{
    embed_set, load_embeddings, read_vector_file, save_embeddings, vector_path, EmbeddingProvider, EmbeddingSet,
    FileProvider, HttpProvider,
};
use compcq_core::genharness::{generate_cqs, GenerationRequest};
use compcq_core::judge::{Judge, ResponseCache};
use compcq_core::llm::{HttpClient, LlmClient, StubClient};
use compcq_core::readability;
use compcq_core::relevance::judge_batch;
use compcq_core::report::{
    aggregate_features, load_features, render_csv, render_markdown, save_features, FeatureVector, Provenance,
    ReportInputs,
};
use compcq_core::setmetrics::{compare, diversity, DiversityReport, PairwiseReport};
use compcq_core::Error;

use crate::config::{EmbeddingConfig, Provider, ProviderKind, RunConfig};
use crate::run::{list_files, RunDir};
use crate::{
    AnnotateArgs, Cli, Command, CompareArgs, DiversityArgs, EmbedArgs, GenerateArgs, Pairs, PartialFailure,
    ProfileArgs, UsageError,
};

/// Side file written next to each features file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeaturesMeta {
    pub set_id: String,
    pub parser_id: Option<String>,
    pub judge_id: Option<String>,
    pub readability_rules: String,
    pub skip_syntax: bool,
    pub count_punct: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversityFile {
    pub embedding_model_ids: Vec<String>,
    pub k: usize,
    pub seed: u64,
    pub reports: Vec<DiversityReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairwiseFile {
    pub embedding_model_ids: Vec<String>,
    pub tau: f64,
    pub reports: Vec<PairwiseReport>,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::defaults(&std::env::current_dir().context("reading working directory")?),
    };
    cfg.tau = cli.tau.unwrap_or(cfg.tau);
    cfg.k = cli.k.unwrap_or(cfg.k);
    cfg.seed = cli.seed.unwrap_or(cfg.seed);
    cfg.validate()?;
    let run = RunDir::resolve(&cfg.output_dir, cli.run_id.as_deref())?;
    log::info!("run directory {}", run.root.display());
    match cli.command {
        Command::Generate(a) => cmd_generate(&cfg, &run, &a),
        Command::Annotate(a) => cmd_annotate(&cfg, &run, &a),
        Command::Embed(a) => cmd_embed(&cfg, &run, &a),
        Command::Profile(a) => cmd_profile(&cfg, &run, &a),
        Command::Diversity(a) => cmd_diversity(&cfg, &run, &a),
        Command::Compare(a) => cmd_compare(&cfg, &run, &a),
        Command::Report => cmd_report(&cfg, &run),
    }
}

fn client_for(p: &Provider) -> anyhow::Result<Arc<dyn LlmClient>> {
    Ok(match &p.kind {
        ProviderKind::Http(c) => Arc::new(HttpClient::from_config(c.clone())?),
        ProviderKind::Stub { response_file, model } => {
            let reply = std::fs::read_to_string(response_file)
                .map_err(|e| usage(format!("provider {}: cannot read {}: {e}", p.id, response_file.display())))?;
            Arc::new(StubClient::new(format!("stub/{model}"), [reply]))
        }
    })
}

fn load_specs(cfg: &RunConfig) -> anyhow::Result<Vec<RequirementSpec>> {
    load_corpus(&cfg.specs_dir).with_context(|| format!("loading specs from {}", cfg.specs_dir.display()))
}

fn find_spec(cfg: &RunConfig, spec_id: &str) -> anyhow::Result<RequirementSpec> {
    load_specs(cfg)?
        .into_iter()
        .find(|s| s.spec_id == spec_id)
        .ok_or_else(|| usage(format!("no spec {spec_id:?} in {}", cfg.specs_dir.display())))
}

/// A set argument is a file path, or a set id looked up in the run and then the corpus.
fn resolve_set(cfg: &RunConfig, run: &RunDir, arg: &str) -> anyhow::Result<PathBuf> {
    let direct = PathBuf::from(arg);
    if direct.is_file() {
        return Ok(direct);
    }
    for dir in [run.sets(), cfg.sets_dir.clone()] {
        let p = dir.join(format!("{arg}.jsonl"));
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(usage(format!(
        "set {arg:?} is neither a file nor a set id in {} or {}",
        run.sets().display(),
        cfg.sets_dir.display()
    )))
}

fn load_set(path: &Path) -> anyhow::Result<CqSet> {
    load_cqset(path).with_context(|| format!("loading set {}", path.display()))
}

/// Loads the set arguments. With none given, every set in the run.
fn selected_sets(cfg: &RunConfig, run: &RunDir, args: &[String], all: bool) -> anyhow::Result<Vec<CqSet>> {
    let paths = if all || args.is_empty() {
        let found = list_files(&run.sets(), ".jsonl")?;
        if found.is_empty() {
            return Err(usage(format!(
                "run {} has no sets; pass --set or run `compcq generate` first",
                run.id
            )));
        }
        found
    } else {
        args.iter().map(|a| resolve_set(cfg, run, a)).collect::<anyhow::Result<_>>()?
    };
    paths.iter().map(|p| load_set(p)).collect()
}

/// Copies an input set into the run so later steps and the audit trail see it.
fn adopt_set(run: &RunDir, set: &CqSet) -> anyhow::Result<()> {
    let dest = run.writable(run.sets())?.join(format!("{}.jsonl", set.set_id));
    match dest.is_file().then(|| load_cqset(&dest)).transpose()? {
        Some(existing) if existing == *set => Ok(()),
        Some(_) => Err(Error::Consistency(format!(
            "run {} already holds a different set with id {}",
            run.id, set.set_id
        ))
        .into()),
        None => Ok(save_cqset(set, &dest)?),
    }
}

fn cmd_generate(cfg: &RunConfig, run: &RunDir, a: &GenerateArgs) -> anyhow::Result<()> {
    let all_specs = load_specs(cfg)?;
    let specs: Vec<&RequirementSpec> = if a.all_specs {
        all_specs.iter().collect()
    } else {
        a.specs
            .iter()
            .map(|id| {
                all_specs
                    .iter()
                    .find(|s| &s.spec_id == id)
                    .ok_or_else(|| usage(format!("no spec {id:?} in {}", cfg.specs_dir.display())))
            })
            .collect::<anyhow::Result<_>>()?
    };
    let providers: Vec<&Provider> = if a.all_providers {
        if cfg.providers.is_empty() {
            return Err(usage("no providers configured"));
        }
        cfg.providers.values().collect()
    } else {
        a.providers.iter().map(|id| cfg.provider(id)).collect::<anyhow::Result<_>>()?
    };

    let sets_dir = run.writable(run.sets())?;
    let record_dir = run.writable(run.generation())?;
    let total = specs.len() * providers.len();
    let mut failed = 0;
    let mut worst = 0;
    let mut only_error: Option<anyhow::Error> = None;
    let mut record = |e: anyhow::Error, cells: usize| {
        failed += cells;
        worst = worst.max(crate::exit_code(&e));
        only_error = Some(e);
    };
    for p in &providers {
        let client = match client_for(p) {
            Ok(c) => c,
            Err(e) => {
                for s in &specs {
                    eprintln!("FAIL {} x {}: {e:#}", s.spec_id, p.id);
                }
                record(e, specs.len());
                continue;
            }
        };
        let model_id = p.model_name().to_owned();
        let req = GenerationRequest {
            provider_id: &p.id,
            model_id: &model_id,
            decoding: p.decoding(),
            record_dir: &record_dir,
        };
        for s in &specs {
            match generate_cqs(s, client.as_ref(), &req).and_then(|(set, _)| {
                let path = sets_dir.join(format!("{}.jsonl", set.set_id));
                save_cqset(&set, &path).map(|()| (set, path))
            }) {
                Ok((set, path)) => println!("ok   {} x {}: {} CQs -> {}", s.spec_id, p.id, set.len(), path.display()),
                Err(e) => {
                    eprintln!("FAIL {} x {}: {e}", s.spec_id, p.id);
                    record(e.into(), 1);
                }
            }
        }
    }
    match (failed, only_error) {
        (0, _) => Ok(()),
        (1, Some(e)) if total == 1 => Err(e),
        _ => Err(PartialFailure {
            failed,
            total,
            code: worst,
        }
        .into()),
    }
}

/// Reads a line-delimited annotation file. Records carrying an `error` field
/// (a parser that failed on one CQ) are returned as diagnostics.
/// `(cq_id, message)` for CQs the parser failed on.
type ParserFailures = Vec<(String, String)>;

fn read_annotation_jsonl(path: &Path) -> anyhow::Result<(Vec<Annotation>, ParserFailures)> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut anns = Vec::new();
    let mut failed = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |m: String| Error::Parse {
            path: path.into(),
            line: i + 1,
            message: m,
        };
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        if let Some(err) = v.get("error").filter(|e| !e.is_null()) {
            let id = v.get("cq_id").and_then(|c| c.as_str()).unwrap_or("?").to_owned();
            failed.push((id, err.as_str().map_or_else(|| err.to_string(), str::to_owned)));
            continue;
        }
        let ann: Annotation = serde_json::from_value(v).map_err(|e| parse_err(e.to_string()))?;
        ann.validate()?;
        anns.push(ann);
    }
    Ok((anns, failed))
}

fn cmd_annotate(cfg: &RunConfig, run: &RunDir, a: &AnnotateArgs) -> anyhow::Result<()> {
    let set_path = resolve_set(cfg, run, &a.set)?;
    let set = load_set(&set_path)?;
    adopt_set(run, &set)?;
    let out_dir = run.writable(run.annotations())?;

    let source = match (&a.from, &a.exec) {
        (Some(f), _) => f.clone(),
        (None, Some(cmd)) => {
            let raw = out_dir.join(format!("{}.raw.jsonl", set.set_id));
            let mut parts = cmd.split_whitespace();
            let program = parts.next().ok_or_else(|| usage("--exec is empty"))?;
            let status = std::process::Command::new(program)
                .args(parts)
                .arg(&set_path)
                .arg(&raw)
                .status()
                .with_context(|| format!("starting annotator {program:?}"))?;
            if !status.success() {
                return Err(usage(format!("annotator {program:?} exited with {status}")));
            }
            raw
        }
        (None, None) => unreachable!("clap requires --from or --exec"),
    };

    let (anns, failed) = if source.extension().is_some_and(|e| e == "conllu") {
        let text =
            std::fs::read_to_string(&source).map_err(|e| usage(format!("cannot read {}: {e}", source.display())))?;
        (parse_conllu(&text, &a.parser_id)?, Vec::new())
    } else {
        read_annotation_jsonl(&source)?
    };

    let mut by_id: BTreeMap<String, Annotation> = BTreeMap::new();
    for ann in anns {
        if by_id.contains_key(&ann.cq_id) {
            return Err(Error::DuplicateId(ann.cq_id).into());
        }
        by_id.insert(ann.cq_id.clone(), ann);
    }
    let known: BTreeSet<&str> = set.cqs.iter().map(|c| c.cq_id.as_str()).collect();
    let foreign: Vec<&str> = by_id.keys().map(String::as_str).filter(|id| !known.contains(id)).collect();
    if !foreign.is_empty() {
        return Err(Error::Consistency(format!(
            "annotations for cq ids not in set {}: {}",
            set.set_id,
            foreign.join(", ")
        ))
        .into());
    }
    for (id, err) in &failed {
        eprintln!("warning: parser failed on {id}: {err}");
    }
    let missing: Vec<&str> = known.iter().copied().filter(|id| !by_id.contains_key(*id)).collect();
    if !missing.is_empty() {
        eprintln!("warning: {} CQs have no annotation: {}", missing.len(), missing.join(", "));
    }
    let ordered: Vec<&Annotation> = set.cqs.iter().filter_map(|c| by_id.get(&c.cq_id)).collect();
    let dest = out_dir.join(format!("{}.jsonl", set.set_id));
    save_annotations(ordered.iter().copied(), &dest)?;
    println!("{} annotations -> {}", ordered.len(), dest.display());
    Ok(())
}

/// Refuses vector files whose header names a different set.
fn check_vector_header(path: &Path, set: &CqSet) -> anyhow::Result<()> {
    let f = read_vector_file(path)?;
    if let Some(id) = f.set_id.filter(|id| id != &set.set_id) {
        return Err(Error::Consistency(format!(
            "{} holds vectors for set {id}, not {}",
            path.display(),
            set.set_id
        ))
        .into());
    }
    Ok(())
}

fn cmd_embed(cfg: &RunConfig, run: &RunDir, a: &EmbedArgs) -> anyhow::Result<()> {
    let sets = selected_sets(cfg, run, &a.set, a.all)?;
    if a.vectors.is_some() && sets.len() != 1 {
        return Err(usage("--vectors applies to exactly one set"));
    }
    let out_dir = run.writable(run.vectors())?;
    for set in &sets {
        adopt_set(run, set)?;
        let provider: Box<dyn EmbeddingProvider> = match (&a.vectors, &cfg.embedding) {
            (Some(path), _) => {
                check_vector_header(path, set)?;
                Box::new(FileProvider::open(path)?)
            }
            (None, EmbeddingConfig::File { dir }) => {
                let path = vector_path(dir, &set.set_id);
                if !path.is_file() {
                    return Err(usage(format!("no vector file for set {} at {}", set.set_id, path.display())));
                }
                check_vector_header(&path, set)?;
                Box::new(FileProvider::open(&path)?)
            }
            (None, EmbeddingConfig::Http { endpoint, batch_size }) => {
                Box::new(HttpProvider::new(endpoint)?.with_batch_size(*batch_size))
            }
        };
        let e = embed_set(set, provider.as_ref()).with_context(|| format!("embedding set {}", set.set_id))?;
        let dest = vector_path(&out_dir, &set.set_id);
        save_embeddings(&e, &dest)?;
        println!("{} vectors ({}, dim {}) -> {}", e.len(), e.model_id, e.dim, dest.display());
    }
    Ok(())
}

fn build_judge(cfg: &RunConfig) -> anyhow::Result<Judge> {
    let id = cfg
        .judge
        .as_deref()
        .ok_or_else(|| usage("no judge.provider configured; pass --no-judge for an offline profile"))?;
    let client = client_for(cfg.provider(id)?)?;
    Ok(Judge::new(client)
        .with_cache(ResponseCache::new(cfg.cache_dir.join("judge")))
        .with_max_in_flight(cfg.judge_max_in_flight))
}

fn cmd_profile(cfg: &RunConfig, run: &RunDir, a: &ProfileArgs) -> anyhow::Result<()> {
    let sets = selected_sets(cfg, run, &a.set, a.all)?;
    if a.annotations.is_some() && sets.len() != 1 {
        return Err(usage("--annotations applies to exactly one set"));
    }
    let judge = if a.no_judge { None } else { Some(build_judge(cfg)?) };
    let opts = SyntaxOptions {
        count_punct: !a.no_punct_nodes,
    };
    let out_dir = run.writable(run.features())?;
    for set in &sets {
        adopt_set(run, set)?;
        let anns = if a.skip_syntax {
            BTreeMap::new()
        } else {
            load_set_annotations(run, set, a.annotations.as_deref())?
        };
        let features = profile_set(cfg, set, &anns, judge.as_ref(), opts)?;
        let parser_ids: BTreeSet<&str> = anns.values().map(|a| a.parser_id.as_str()).collect();
        let meta = FeaturesMeta {
            set_id: set.set_id.clone(),
            parser_id: (!parser_ids.is_empty()).then(|| parser_ids.into_iter().collect::<Vec<_>>().join(", ")),
            judge_id: judge.as_ref().map(|j| j.id().to_owned()),
            readability_rules: readability::RULES_ID.to_owned(),
            skip_syntax: a.skip_syntax,
            count_punct: opts.count_punct,
        };
        let dest = out_dir.join(format!("{}.features.jsonl", set.set_id));
        save_features(&features, &dest)?;
        let meta_path = out_dir.join(format!("{}.meta.json", set.set_id));
        write_json(&meta_path, &meta)?;
        let flagged = features.iter().filter(|f| !f.errors.is_empty()).count();
        println!(
            "{} feature vectors ({flagged} with errors) -> {}",
            features.len(),
            dest.display()
        );
    }
    Ok(())
}

fn load_set_annotations(
    run: &RunDir,
    set: &CqSet,
    explicit: Option<&Path>,
) -> anyhow::Result<BTreeMap<String, Annotation>> {
    let path = explicit.map_or_else(|| run.annotations().join(format!("{}.jsonl", set.set_id)), Path::to_path_buf);
    let ids = || set.cqs.iter().map(|c| c.cq_id.as_str()).collect::<Vec<_>>();
    if !path.is_file() {
        return Err(usage(format!(
            "no annotations for set {} ({} not found); missing cq ids: {}. Run `compcq annotate` or pass --skip-syntax",
            set.set_id,
            path.display(),
            ids().join(", ")
        )));
    }
    let anns = load_annotations(&path)?;
    let missing: Vec<&str> = ids().into_iter().filter(|id| !anns.contains_key(*id)).collect();
    if !missing.is_empty() {
        return Err(usage(format!(
            "{} lacks annotations for cq ids: {}. Pass --skip-syntax to profile without c2/c3",
            path.display(),
            missing.join(", ")
        )));
    }
    let known: BTreeSet<&str> = ids().into_iter().collect();
    if let Some(stray) = anns.keys().find(|k| !known.contains(k.as_str())) {
        return Err(Error::Consistency(format!(
            "{} annotates {stray}, which is not in set {}",
            path.display(),
            set.set_id
        ))
        .into());
    }
    Ok(anns)
}

fn profile_set(
    cfg: &RunConfig,
    set: &CqSet,
    anns: &BTreeMap<String, Annotation>,
    judge: Option<&Judge>,
    opts: SyntaxOptions,
) -> anyhow::Result<Vec<FeatureVector>> {
    let n = set.len();
    let (prims, ratings) = match judge {
        Some(j) => {
            let spec = find_spec(cfg, &set.spec_id)?;
            (extract_batch(&set.cqs, &spec, j), judge_batch(&set.cqs, &spec, j))
        }
        None => (
            std::iter::repeat_with(|| Err(Error::EmptyInput)).take(n).collect(),
            std::iter::repeat_with(|| Err(Error::EmptyInput)).take(n).collect(),
        ),
    };
    let mut out = Vec::with_capacity(n);
    for ((cq, prim), rating) in set.cqs.iter().zip(prims).zip(ratings) {
        let mut errors = Vec::new();
        let (fkgl, dcr) = match readability::score(&cq.text) {
            Ok(s) => (Some(s.fkgl), Some(s.dcr)),
            Err(e) => {
                errors.push(format!("readability: {e}"));
                (None, None)
            }
        };
        let prim = match prim {
            Ok(p) => Some(p),
            Err(e) => {
                if judge.is_some() {
                    errors.push(format!("c1: {e}"));
                }
                None
            }
        };
        let relevance = match rating {
            Ok(r) => Some(r.score),
            Err(e) => {
                if judge.is_some() {
                    errors.push(format!("relevance: {e}"));
                }
                None
            }
        };
        let p = complexity::profile(cq, prim.as_ref(), anns.get(&cq.cq_id), opts)?;
        out.push(FeatureVector {
            cq_id: cq.cq_id.clone(),
            set_id: set.set_id.clone(),
            spec_id: set.spec_id.clone(),
            model_id: set.model_id.clone(),
            c0: p.c0,
            c1: p.c1,
            c2: p.c2,
            c3: p.c3,
            fkgl,
            dcr,
            relevance,
            interrogative: p.interrogative,
            errors,
        });
    }
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing report")?;
    text.push('\n');
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Parse {
            path: path.into(),
            line: e.line(),
            message: e.to_string(),
        }
        .into()
    })
}

/// Loads a vector file and, when the run holds the matching set, checks that
/// the vectors still correspond to it.
fn load_checked_vectors(run: &RunDir, path: &Path) -> anyhow::Result<(EmbeddingSet, Option<CqSet>)> {
    let e = load_embeddings(path).with_context(|| format!("loading vectors {}", path.display()))?;
    let set_path = run.sets().join(format!("{}.jsonl", e.set_id));
    let set = if set_path.is_file() {
        let set = load_set(&set_path)?;
        e.check_matches(&set)
            .with_context(|| format!("{} is stale for set {}", path.display(), set.set_id))?;
        Some(set)
    } else {
        None
    };
    Ok((e, set))
}

fn run_vectors(run: &RunDir) -> anyhow::Result<Vec<PathBuf>> {
    let found = list_files(&run.vectors(), ".vec.jsonl")?;
    if found.is_empty() {
        return Err(usage(format!("run {} has no vectors; run `compcq embed` first", run.id)));
    }
    Ok(found)
}

fn model_ids<'a>(sets: impl IntoIterator<Item = &'a EmbeddingSet>) -> Vec<String> {
    let ids: BTreeSet<String> = sets.into_iter().map(|e| e.model_id.clone()).collect();
    ids.into_iter().collect()
}

fn cmd_diversity(cfg: &RunConfig, run: &RunDir, a: &DiversityArgs) -> anyhow::Result<()> {
    let paths = if a.vectors.is_empty() { run_vectors(run)? } else { a.vectors.clone() };
    let mut sets = Vec::new();
    for p in &paths {
        sets.push(load_checked_vectors(run, p)?.0);
    }
    sets.sort_by(|x, y| x.set_id.cmp(&y.set_id));
    if let Some(w) = sets.windows(2).find(|w| w[0].set_id == w[1].set_id) {
        return Err(Error::DuplicateId(w[0].set_id.clone()).into());
    }
    let mut reports = Vec::new();
    for e in &sets {
        let r = diversity(e, cfg.k, cfg.seed).with_context(|| format!("diversity of {}", e.set_id))?;
        match &r.warning {
            Some(w) => println!("{}: k'={} ({w})", r.set_id, r.k),
            None => println!("{}: k'={} retained ({} >= {})", r.set_id, r.k, r.n_cqs, r.requested_k),
        }
        reports.push(r);
    }
    let file = DiversityFile {
        embedding_model_ids: model_ids(&sets),
        k: cfg.k,
        seed: cfg.seed,
        reports,
    };
    let dest = run.writable(run.reports())?.join("diversity.json");
    write_json(&dest, &file)?;
    println!("diversity for {} sets -> {}", file.reports.len(), dest.display());
    Ok(())
}

fn resolve_vectors(cfg: &RunConfig, run: &RunDir, arg: &str) -> anyhow::Result<PathBuf> {
    let direct = PathBuf::from(arg);
    if direct.is_file() {
        return Ok(direct);
    }
    let in_run = vector_path(&run.vectors(), arg);
    if in_run.is_file() {
        return Ok(in_run);
    }
    if let EmbeddingConfig::File { dir } = &cfg.embedding {
        let p = vector_path(dir, arg);
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(usage(format!("no vectors for {arg:?}; pass a vector file or embed the set first")))
}

fn spec_of(e: &EmbeddingSet, set: Option<&CqSet>) -> String {
    match set {
        Some(s) => s.spec_id.clone(),
        None => e.set_id.split('.').next().unwrap_or_default().to_owned(),
    }
}

fn cmd_compare(cfg: &RunConfig, run: &RunDir, a: &CompareArgs) -> anyhow::Result<()> {
    let mut pairs: Vec<(EmbeddingSet, EmbeddingSet)> = Vec::new();
    if let (Some(x), Some(y)) = (&a.a, &a.b) {
        let ex = load_checked_vectors(run, &resolve_vectors(cfg, run, x)?)?.0;
        let ey = load_checked_vectors(run, &resolve_vectors(cfg, run, y)?)?.0;
        pairs.push((ex, ey));
    } else {
        let mut loaded = Vec::new();
        for p in run_vectors(run)? {
            let (e, set) = load_checked_vectors(run, &p)?;
            let spec = spec_of(&e, set.as_ref());
            loaded.push((spec, e));
        }
        loaded.sort_by(|x, y| x.1.set_id.cmp(&y.1.set_id));
        for i in 0..loaded.len() {
            for j in i + 1..loaded.len() {
                if a.pairs == Pairs::All || loaded[i].0 == loaded[j].0 {
                    pairs.push((loaded[i].1.clone(), loaded[j].1.clone()));
                }
            }
        }
        if pairs.is_empty() {
            return Err(usage("no set pairs to compare"));
        }
    }
    let mut reports = Vec::new();
    for (x, y) in &pairs {
        if x.model_id != y.model_id {
            return Err(Error::Consistency(format!(
                "{} and {} were embedded with different models ({} vs {})",
                x.set_id, y.set_id, x.model_id, y.model_id
            ))
            .into());
        }
        let r = compare(x, y, cfg.tau).with_context(|| format!("comparing {} with {}", x.set_id, y.set_id))?;
        println!(
            "{} vs {}: centroid {:.4}, bidirectional {:.2}%",
            r.set_a, r.set_b, r.centroid_sim, r.bidirectional_pct
        );
        reports.push(r);
    }
    let file = PairwiseFile {
        embedding_model_ids: model_ids(pairs.iter().flat_map(|(x, y)| [x, y])),
        tau: cfg.tau,
        reports,
    };
    let dest = run.writable(run.reports())?.join("pairwise.json");
    write_json(&dest, &file)?;
    println!("{} comparisons -> {}", file.reports.len(), dest.display());
    Ok(())
}

fn join_ids(ids: BTreeSet<String>) -> Option<String> {
    (!ids.is_empty()).then(|| ids.into_iter().collect::<Vec<_>>().join(", "))
}

fn cmd_report(cfg: &RunConfig, run: &RunDir) -> anyhow::Result<()> {
    if !run.root.is_dir() {
        return Err(usage(format!("run {} does not exist", run.id)));
    }
    let reports_dir = run.writable(run.reports())?;

    let mut rows = Vec::new();
    let mut parsers = BTreeSet::new();
    let mut judges = BTreeSet::new();
    for p in list_files(&run.features(), ".features.jsonl")? {
        let features = load_features(&p)?;
        rows.push(aggregate_features(&features).with_context(|| format!("aggregating {}", p.display()))?);
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let meta_path = p.with_file_name(name.replace(".features.jsonl", ".meta.json"));
        if meta_path.is_file() {
            let meta: FeaturesMeta = read_json(&meta_path)?;
            parsers.extend(meta.parser_id);
            judges.extend(meta.judge_id);
        }
    }
    rows.sort_by(|x, y| (&x.dataset, &x.model_id, &x.set_id).cmp(&(&y.dataset, &y.model_id, &y.set_id)));

    let mut embed_models = BTreeSet::new();
    let div_path = reports_dir.join("diversity.json");
    let div: Option<DiversityFile> = div_path.is_file().then(|| read_json(&div_path)).transpose()?;
    let pair_path = reports_dir.join("pairwise.json");
    let pairs: Option<PairwiseFile> = pair_path.is_file().then(|| read_json(&pair_path)).transpose()?;
    if let Some(d) = &div {
        embed_models.extend(d.embedding_model_ids.iter().cloned());
    }
    if let Some(p) = &pairs {
        embed_models.extend(p.embedding_model_ids.iter().cloned());
    }
    if rows.is_empty() && div.is_none() && pairs.is_none() {
        return Err(usage(format!("run {} has nothing to report yet", run.id)));
    }

    let prov = Provenance {
        parser_id: join_ids(parsers),
        embedding_model_id: join_ids(embed_models),
        judge_id: join_ids(judges),
        tau: pairs.as_ref().map_or(cfg.tau, |p| p.tau),
        k: div.as_ref().map_or(cfg.k, |d| d.k),
        seed: div.as_ref().map_or(cfg.seed, |d| d.seed),
        readability_rules: readability::RULES_ID.to_owned(),
    };
    let inputs = ReportInputs {
        features: &rows,
        diversity: div.as_ref().map_or(&[], |d| &d.reports),
        pairwise: pairs.as_ref().map_or(&[], |p| &p.reports),
    };
    let csv_path = run.root.join("report.csv");
    std::fs::write(&csv_path, render_csv(&inputs, &prov)).with_context(|| format!("writing {}", csv_path.display()))?;
    // report.md last: its presence seals the run.
    let md_path = run.report_md();
    std::fs::write(&md_path, render_markdown(&inputs, &prov)).with_context(|| format!("writing {}", md_path.display()))?;
    println!("{}", md_path.display());
    println!("{}", csv_path.display());
    Ok(())
}
