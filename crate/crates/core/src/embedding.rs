//! Per-CQ sentence vectors, their file format, providers and vector math.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::{write_atomic, CqSet};
use crate::error::{Error, Result};

pub const DEFAULT_DIM: usize = 384;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity clamped to `[-1, 1]`.
///
/// Computed as `a.b / sqrt(|a|^2 |b|^2)` so that swapping the arguments
/// gives a bit-identical result and `cosine(v, v)` is exactly 1.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            id: "cosine".into(),
            expected: a.len(),
            found: b.len(),
        });
    }
    let aa = dot(a, a);
    let bb = dot(b, b);
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::Domain("cosine of a zero vector".into()));
    }
    let ab = dot(a, b);
    Ok((ab / (aa * bb).sqrt()).clamp(-1.0, 1.0))
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Component-wise mean. Not normalized.
pub fn centroid<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Vec<f64>> {
    let first = vectors.first().ok_or(Error::EmptyInput)?.as_ref();
    let dim = first.len();
    let mut sum = vec![0.0; dim];
    for (i, v) in vectors.iter().enumerate() {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(Error::Dimension {
                id: format!("#{i}"),
                expected: dim,
                found: v.len(),
            });
        }
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    let n = vectors.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

/// Vectors for one CQ set, kept in the set's CQ order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub set_id: String,
    pub model_id: String,
    pub dim: usize,
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingSet {
    pub fn new(
        set_id: impl Into<String>,
        model_id: impl Into<String>,
        dim: usize,
        entries: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        let (ids, vectors) = entries.into_iter().unzip();
        let s = Self {
            set_id: set_id.into(),
            model_id: model_id.into(),
            dim,
            ids,
            vectors,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Validation("embedding dimension must be positive".into()));
        }
        if self.model_id.trim().is_empty() {
            return Err(Error::Validation("embedding model_id is empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (id, v) in self.iter() {
            if !seen.insert(id) {
                return Err(Error::DuplicateId(id.to_owned()));
            }
            if v.len() != self.dim {
                return Err(Error::Dimension {
                    id: id.to_owned(),
                    expected: self.dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("vector {id:?} has non-finite components")));
            }
            if v.iter().all(|&x| x == 0.0) {
                return Err(Error::Validation(format!("vector {id:?} is the zero vector")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn get(&self, cq_id: &str) -> Option<&[f64]> {
        self.ids.iter().position(|i| i == cq_id).map(|p| self.vectors[p].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids.iter().map(String::as_str).zip(self.vectors.iter().map(Vec::as_slice))
    }

    /// Fails with a consistency error unless this holds exactly the CQs of `set`.
    pub fn check_matches(&self, set: &CqSet) -> Result<()> {
        if self.set_id != set.set_id {
            return Err(Error::Consistency(format!(
                "vectors are for set {:?} but the CQ set is {:?}",
                self.set_id, set.set_id
            )));
        }
        let missing: Vec<String> = set
            .cqs
            .iter()
            .filter(|c| self.get(&c.cq_id).is_none())
            .map(|c| c.cq_id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Coverage { missing });
        }
        if self.len() != set.len() {
            let extra: Vec<&str> = self.ids.iter().filter(|i| set.get(i).is_none()).map(String::as_str).collect();
            return Err(Error::Consistency(format!("vectors for unknown cq ids: {}", extra.join(", "))));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    model_id: String,
    dim: usize,
    count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    set_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    cq_id: String,
    v: Vec<f64>,
}

/// Parsed vector file: header metadata plus rows in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFile {
    pub model_id: String,
    pub dim: usize,
    pub set_id: Option<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

pub fn read_vector_file(path: impl AsRef<Path>) -> Result<VectorFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.into(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| parse_err(1, "missing header line".into()))?;
    let header: Header = serde_json::from_str(first).map_err(|e| parse_err(1, format!("header: {e}")))?;
    let mut rows = Vec::with_capacity(header.count);
    for (i, line) in lines {
        let row: Row = serde_json::from_str(line).map_err(|e| parse_err(i + 1, e.to_string()))?;
        if row.v.len() != header.dim {
            return Err(Error::Dimension {
                id: row.cq_id,
                expected: header.dim,
                found: row.v.len(),
            });
        }
        rows.push((row.cq_id, row.v));
    }
    if rows.len() != header.count {
        return Err(parse_err(
            1,
            format!("header count {} but {} vector lines", header.count, rows.len()),
        ));
    }
    Ok(VectorFile {
        model_id: header.model_id,
        dim: header.dim,
        set_id: header.set_id,
        rows,
    })
}

/// Writes an embedding set. Components use Rust's shortest round-trip float
/// formatting, so reloading is bit-exact.
pub fn save_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    set.validate()?;
    let header = Header {
        model_id: set.model_id.clone(),
        dim: set.dim,
        count: set.len(),
        set_id: Some(set.set_id.clone()),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for (id, v) in set.iter() {
        let row = Row {
            cq_id: id.to_owned(),
            v: v.to_vec(),
        };
        writeln!(out, "{}", serde_json::to_string(&row).expect("row serializes")).unwrap();
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let f = read_vector_file(path)?;
    let set_id = f.set_id.clone().unwrap_or_else(|| {
        path.file_name()
            .and_then(|n| n.to_str())
            .map(|n| n.trim_end_matches(".jsonl").trim_end_matches(".vec").to_owned())
            .unwrap_or_default()
    });
    EmbeddingSet::new(set_id, f.model_id, f.dim, f.rows)
}

/// Source of sentence vectors.
pub trait EmbeddingProvider {
    /// Vectors for the given CQs, aligned with `ids`.
    fn embed(&self, ids: &[&str], texts: &[&str]) -> Result<(String, usize, Vec<Vec<f64>>)>;
}

/// Looks vectors up by cq_id in a pre-computed vector file.
#[derive(Debug, Clone)]
pub struct FileProvider {
    file: VectorFile,
}

impl FileProvider {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self {
            file: read_vector_file(path)?,
        })
    }
}

impl EmbeddingProvider for FileProvider {
    fn embed(&self, ids: &[&str], _texts: &[&str]) -> Result<(String, usize, Vec<Vec<f64>>)> {
        let lookup: BTreeMap<&str, &Vec<f64>> = self.file.rows.iter().map(|(i, v)| (i.as_str(), v)).collect();
        let missing: Vec<String> = ids.iter().filter(|i| !lookup.contains_key(*i)).map(|i| i.to_string()).collect();
        if !missing.is_empty() {
            return Err(Error::Coverage { missing });
        }
        let vs = ids.iter().map(|i| lookup[i].clone()).collect();
        Ok((self.file.model_id.clone(), self.file.dim, vs))
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    model_id: String,
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

/// Client for a `POST /embed` service.
#[derive(Debug, Clone)]
pub struct HttpProvider {
    endpoint: String,
    batch_size: usize,
    expected_dim: Option<usize>,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    /// `base` is the service root; `/embed` is appended unless already present.
    pub fn new(base: &str) -> Result<Self> {
        let base = base.trim_end_matches('/');
        if !(base.starts_with("http://") || base.starts_with("https://")) {
            return Err(Error::Validation(format!("embedding endpoint {base:?} is not an http(s) URL")));
        }
        let endpoint = if base.ends_with("/embed") { base.to_owned() } else { format!("{base}/embed") };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| provider_err(&endpoint, None, e.to_string()))?;
        Ok(Self {
            endpoint,
            batch_size: 64,
            expected_dim: None,
            client,
        })
    }

    pub fn with_batch_size(mut self, n: usize) -> Self {
        self.batch_size = n.max(1);
        self
    }

    pub fn with_expected_dim(mut self, dim: usize) -> Self {
        self.expected_dim = Some(dim);
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn post(&self, texts: &[&str]) -> Result<EmbedResponse> {
        let resp = self
            .client
            .post(&self.endpoint)
            .json(&EmbedRequest { texts })
            .send()
            .map_err(|e| provider_err(&self.endpoint, None, e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let body = resp.text().unwrap_or_default();
            return Err(provider_err(&self.endpoint, Some(status.as_u16()), body));
        }
        let r: EmbedResponse = resp
            .json()
            .map_err(|e| provider_err(&self.endpoint, Some(status.as_u16()), format!("bad /embed body: {e}")))?;
        if r.vectors.len() != texts.len() {
            return Err(provider_err(
                &self.endpoint,
                None,
                format!("sent {} texts, got {} vectors", texts.len(), r.vectors.len()),
            ));
        }
        Ok(r)
    }
}

fn provider_err(endpoint: &str, status: Option<u16>, message: String) -> Error {
    Error::Provider {
        provider_id: endpoint.to_owned(),
        status,
        message,
    }
}

impl EmbeddingProvider for HttpProvider {
    fn embed(&self, ids: &[&str], texts: &[&str]) -> Result<(String, usize, Vec<Vec<f64>>)> {
        let mut model_id = None::<String>;
        let mut dim = self.expected_dim;
        let mut out = Vec::with_capacity(texts.len());
        for (chunk_ids, chunk) in ids.chunks(self.batch_size).zip(texts.chunks(self.batch_size)) {
            let r = self.post(chunk)?;
            let d = *dim.get_or_insert(r.dim);
            if r.dim != d {
                return Err(Error::Dimension {
                    id: self.endpoint.clone(),
                    expected: d,
                    found: r.dim,
                });
            }
            for (id, v) in chunk_ids.iter().zip(&r.vectors) {
                if v.len() != d {
                    return Err(Error::Dimension {
                        id: id.to_string(),
                        expected: d,
                        found: v.len(),
                    });
                }
            }
            model_id.get_or_insert(r.model_id);
            out.extend(r.vectors);
        }
        Ok((model_id.unwrap_or_default(), dim.unwrap_or(DEFAULT_DIM), out))
    }
}

/// Embeds every CQ of `set` and checks the result against it.
pub fn embed_set(set: &CqSet, provider: &dyn EmbeddingProvider) -> Result<EmbeddingSet> {
    let ids: Vec<&str> = set.cqs.iter().map(|c| c.cq_id.as_str()).collect();
    let texts: Vec<&str> = set.cqs.iter().map(|c| c.text.as_str()).collect();
    let (model_id, dim, vectors) = provider.embed(&ids, &texts)?;
    let entries = ids.iter().map(|s| s.to_string()).zip(vectors).collect();
    let e = EmbeddingSet::new(set.set_id.clone(), model_id, dim, entries)?;
    e.check_matches(set)?;
    Ok(e)
}

/// Conventional vector file location for a set inside a directory.
pub fn vector_path(dir: &Path, set_id: &str) -> PathBuf {
    dir.join(format!("{set_id}.vec.jsonl"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DecodingParams;
    use proptest::prelude::*;

    fn set3() -> CqSet {
        CqSet::from_texts(
            "s",
            "sp",
            "m",
            DecodingParams::default(),
            chrono::Utc::now(),
            ["A?", "B?", "C?"].map(String::from),
        )
        .unwrap()
    }

    fn emb3() -> EmbeddingSet {
        EmbeddingSet::new(
            "s",
            "fixture/test",
            2,
            vec![
                ("s-001".into(), vec![1.0, 0.0]),
                ("s-002".into(), vec![0.0, 1.0]),
                ("s-003".into(), vec![0.6, 0.8]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 2.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[-5.0, 0.0]).unwrap(), -1.0);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn centroid_basics() {
        assert_eq!(centroid(&[vec![1.0, 2.0]]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(centroid(&[vec![1.0, -2.0], vec![-1.0, 2.0]]).unwrap(), vec![0.0, 0.0]);
        assert!(centroid::<Vec<f64>>(&[]).is_err());
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            a in prop::collection::vec(-1.0f64..1.0, 16),
            b in prop::collection::vec(-1.0f64..1.0, 16),
            lambda in 0.01f64..100.0,
        ) {
            prop_assume!(norm(&a) > 1e-6 && norm(&b) > 1e-6);
            let ab = cosine(&a, &b).unwrap();
            prop_assert_eq!(ab, cosine(&b, &a).unwrap());
            let scaled: Vec<f64> = a.iter().map(|x| x * lambda).collect();
            prop_assert!((cosine(&scaled, &b).unwrap() - ab).abs() < 1e-9);
            prop_assert_eq!(cosine(&a, &a).unwrap(), 1.0);
        }

        #[test]
        fn vector_file_round_trip_is_bit_exact(
            vs in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 8), 1..6),
        ) {
            prop_assume!(vs.iter().all(|v| v.iter().any(|&x| x != 0.0)));
            let entries = vs.iter().enumerate().map(|(i, v)| (format!("q{i}"), v.clone())).collect();
            let e = EmbeddingSet::new("s", "m", 8, entries).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("v.jsonl");
            save_embeddings(&e, &p).unwrap();
            prop_assert_eq!(load_embeddings(&p).unwrap(), e);
        }
    }

    #[test]
    fn file_provider_reports_missing_ids() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.jsonl");
        save_embeddings(&emb3(), &p).unwrap();
        let prov = FileProvider::open(&p).unwrap();
        let e = embed_set(&set3(), &prov).unwrap();
        assert_eq!(e.len(), 3);

        let partial = EmbeddingSet::new("s", "m", 2, vec![("s-001".into(), vec![1.0, 0.0])]).unwrap();
        save_embeddings(&partial, &p).unwrap();
        let err = embed_set(&set3(), &FileProvider::open(&p).unwrap()).unwrap_err();
        match err {
            Error::Coverage { missing } => assert_eq!(missing, ["s-002", "s-003"]),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rejects_bad_sets() {
        assert!(EmbeddingSet::new("s", "m", 2, vec![("a".into(), vec![0.0, 0.0])]).is_err());
        assert!(EmbeddingSet::new("s", "m", 2, vec![("a".into(), vec![1.0])]).is_err());
        assert!(EmbeddingSet::new("s", "m", 1, vec![("a".into(), vec![1.0]), ("a".into(), vec![2.0])]).is_err());
    }

    #[test]
    fn header_count_mismatch_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.jsonl");
        std::fs::write(&p, "{\"model_id\":\"m\",\"dim\":1,\"count\":2}\n{\"cq_id\":\"a\",\"v\":[1.0]}\n").unwrap();
        assert!(matches!(read_vector_file(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn set_id_mismatch_is_a_consistency_error() {
        let mut e = emb3();
        e.set_id = "other".into();
        assert!(matches!(e.check_matches(&set3()), Err(Error::Consistency(_))));
    }
}
