//! Cached access to a judge model, shared by primitive extraction and
//! relevance rating.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::llm::LlmClient;

/// Content-addressed store of raw judge replies.
///
/// The key is `sha256(judge_id NUL prompt NUL cq_text)`; each entry is one
/// file written atomically, so concurrent writers of the same key are safe.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(judge_id: &str, prompt: &str, cq_text: &str) -> String {
        let mut h = Sha256::new();
        h.update(judge_id.as_bytes());
        h.update([0u8]);
        h.update(prompt.as_bytes());
        h.update([0u8]);
        h.update(cq_text.as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.txt"))
    }

    pub fn get(&self, key: &str) -> Result<Option<String>> {
        let p = self.path(key);
        match fs::read_to_string(&p) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(p, e)),
        }
    }

    pub fn put(&self, key: &str, value: &str) -> Result<()> {
        crate::corpus::write_atomic(&self.path(key), value.as_bytes())
    }
}

/// A judge model with an optional reply cache.
#[derive(Clone)]
pub struct Judge {
    client: Arc<dyn LlmClient>,
    cache: Option<ResponseCache>,
    max_in_flight: usize,
    network_calls: Arc<AtomicUsize>,
}

impl Judge {
    pub fn new(client: Arc<dyn LlmClient>) -> Self {
        Self {
            client,
            cache: None,
            max_in_flight: 1,
            network_calls: Arc::new(AtomicUsize::new(0)),
        }
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n.max(1);
        self
    }

    pub fn id(&self) -> &str {
        self.client.id()
    }

    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight
    }

    /// Number of prompts that were sent to the client rather than served from cache.
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::SeqCst)
    }

    pub fn ask(&self, prompt: &str, cq_text: &str) -> Result<String> {
        let key = ResponseCache::key(self.id(), prompt, cq_text);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(&key)? {
                return Ok(hit);
            }
        }
        self.network_calls.fetch_add(1, Ordering::SeqCst);
        let reply = self.client.complete(prompt)?.text;
        if let Some(cache) = &self.cache {
            cache.put(&key, &reply)?;
        }
        Ok(reply)
    }
}

/// Applies `f` to every item with at most `max_in_flight` concurrent calls.
/// Results keep the input order.
pub fn map_bounded<T, R, F>(items: &[T], max_in_flight: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = max_in_flight.max(1).min(items.len());
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = std::iter::repeat_with(|| None).take(items.len()).collect();
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                results.lock().expect("result lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}
