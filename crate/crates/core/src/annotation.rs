//! Linguistic annotations (tokens, universal POS tags, dependency arcs and
//! noun chunks) for single CQs.
//!
//! Annotations are produced outside this crate by a parser and ingested from
//! line-delimited JSON or CoNLL-U. Every annotation is validated to be a
//! single rooted tree before it reaches the complexity metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    #[serde(rename = "i")]
    pub index: usize,
    pub text: String,
    pub upos: String,
    /// Index of the governing token; the root points at itself.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    pub fn is_punct(&self) -> bool {
        self.upos.eq_ignore_ascii_case("PUNCT")
    }

    pub fn is_root(&self) -> bool {
        self.head == self.index
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub cq_id: String,
    pub parser_id: String,
    pub tokens: Vec<Token>,
    /// Half-open `[start, end)` token spans.
    #[serde(default)]
    pub noun_chunks: Vec<[usize; 2]>,
}

/// Why a token list is not a single rooted tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    Empty,
    IndexMismatch { position: usize, found: usize },
    HeadOutOfRange(Vec<usize>),
    NoRoot,
    MultipleRoots(Vec<usize>),
    RootLabel { index: usize, deprel: String },
    Cycle(Vec<usize>),
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::Empty => write!(f, "no tokens"),
            TreeViolation::IndexMismatch { position, found } => {
                write!(f, "token at position {position} has index {found}")
            }
            TreeViolation::HeadOutOfRange(ids) => write!(f, "head out of range at tokens {ids:?}"),
            TreeViolation::NoRoot => write!(f, "no root token"),
            TreeViolation::MultipleRoots(ids) => write!(f, "multiple roots at tokens {ids:?}"),
            TreeViolation::RootLabel { index, deprel } => {
                write!(f, "root token {index} has deprel {deprel:?}, expected \"root\"")
            }
            TreeViolation::Cycle(ids) => write!(f, "cycle through tokens {ids:?}"),
        }
    }
}

/// Checks that `tokens` form one tree: indices match positions, heads are in
/// range, exactly one self-headed `root`, and no cycles.
pub fn validate_tree(tokens: &[Token]) -> std::result::Result<(), TreeViolation> {
    if tokens.is_empty() {
        return Err(TreeViolation::Empty);
    }
    let n = tokens.len();
    for (pos, t) in tokens.iter().enumerate() {
        if t.index != pos {
            return Err(TreeViolation::IndexMismatch {
                position: pos,
                found: t.index,
            });
        }
    }
    let out_of_range: Vec<usize> = tokens.iter().filter(|t| t.head >= n).map(|t| t.index).collect();
    if !out_of_range.is_empty() {
        return Err(TreeViolation::HeadOutOfRange(out_of_range));
    }
    let roots: Vec<usize> = tokens.iter().filter(|t| t.is_root()).map(|t| t.index).collect();
    match roots.as_slice() {
        [] => {}
        [r] => {
            if !tokens[*r].deprel.eq_ignore_ascii_case("root") {
                return Err(TreeViolation::RootLabel {
                    index: *r,
                    deprel: tokens[*r].deprel.clone(),
                });
            }
        }
        _ => return Err(TreeViolation::MultipleRoots(roots)),
    }

    // Colour walk: 0 unvisited, 1 on current path, 2 reaches the root, 3 ends in a cycle.
    let mut state = vec![0u8; n];
    let mut cycle_members = Vec::new();
    for start in 0..n {
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            match state[cur] {
                2 | 3 => break,
                1 => {
                    let from = path.iter().position(|&p| p == cur).unwrap_or(0);
                    cycle_members.extend_from_slice(&path[from..]);
                    break;
                }
                _ => {}
            }
            if tokens[cur].is_root() {
                state[cur] = 2;
                break;
            }
            state[cur] = 1;
            path.push(cur);
            cur = tokens[cur].head;
        }
        let reached = state[cur] == 2;
        for p in path {
            state[p] = if reached { 2 } else { 3 };
        }
    }
    if !cycle_members.is_empty() {
        cycle_members.sort_unstable();
        cycle_members.dedup();
        return Err(TreeViolation::Cycle(cycle_members));
    }
    if roots.is_empty() {
        return Err(TreeViolation::NoRoot);
    }
    Ok(())
}

impl Annotation {
    pub fn validate(&self) -> Result<()> {
        validate_tree(&self.tokens).map_err(|violation| Error::Tree {
            cq_id: self.cq_id.clone(),
            violation,
        })?;
        let n = self.tokens.len();
        let mut spans = self.noun_chunks.clone();
        spans.sort_unstable();
        for [start, end] in &spans {
            if start >= end {
                return Err(self.span_error(format!("empty noun chunk [{start},{end})")));
            }
            if *end > n {
                return Err(self.span_error(format!(
                    "noun chunk [{start},{end}) exceeds {n} tokens"
                )));
            }
        }
        for pair in spans.windows(2) {
            if pair[1][0] < pair[0][1] {
                return Err(self.span_error(format!(
                    "noun chunks [{},{}) and [{},{}) overlap",
                    pair[0][0], pair[0][1], pair[1][0], pair[1][1]
                )));
            }
        }
        Ok(())
    }

    fn span_error(&self, message: String) -> Error {
        Error::Span {
            cq_id: self.cq_id.clone(),
            message,
        }
    }

    pub fn root(&self) -> usize {
        self.tokens
            .iter()
            .position(Token::is_root)
            .expect("validated annotation has a root")
    }

    /// Maximum number of arcs on a root-to-leaf path.
    pub fn depth(&self) -> usize {
        let n = self.tokens.len();
        let mut memo: Vec<Option<usize>> = vec![None; n];
        let mut max = 0;
        for i in 0..n {
            let mut path = Vec::new();
            let mut cur = i;
            let base = loop {
                if let Some(d) = memo[cur] {
                    break d;
                }
                if self.tokens[cur].is_root() {
                    memo[cur] = Some(0);
                    break 0;
                }
                path.push(cur);
                cur = self.tokens[cur].head;
            };
            for (k, &p) in path.iter().rev().enumerate() {
                memo[p] = Some(base + k + 1);
            }
            max = max.max(memo[i].unwrap_or(0));
        }
        max
    }

    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Loads and validates a line-delimited annotation file, keyed by cq id.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<BTreeMap<String, Annotation>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let ann: Annotation = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        ann.validate()?;
        if out.contains_key(&ann.cq_id) {
            return Err(Error::DuplicateId(ann.cq_id));
        }
        out.insert(ann.cq_id.clone(), ann);
    }
    Ok(out)
}

pub fn save_annotations<'a>(
    annotations: impl IntoIterator<Item = &'a Annotation>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut out = String::new();
    for ann in annotations {
        ann.validate()?;
        out.push_str(&serde_json::to_string(ann).expect("annotation serializes"));
        out.push('\n');
    }
    crate::corpus::write_atomic(path.as_ref(), out.as_bytes())
}

/// Converts CoNLL-U text into annotations.
///
/// Each sentence block is one CQ. Recognised comments: `# sent_id = <cq_id>`,
/// `# parser = <parser_id>` and `# chunks = [[start,end],...]` with 0-based
/// half-open token spans. Multiword-token ranges and empty nodes are skipped.
/// HEAD `0` becomes a self-reference.
pub fn parse_conllu(text: &str, default_parser_id: &str) -> Result<Vec<Annotation>> {
    let path = Path::new("<conllu>");
    let mut out = Vec::new();
    let mut cq_id: Option<String> = None;
    let mut parser_id: Option<String> = None;
    let mut chunks: Vec<[usize; 2]> = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut block_start = 1;

    let mut flush = |cq_id: &mut Option<String>,
                     parser_id: &mut Option<String>,
                     chunks: &mut Vec<[usize; 2]>,
                     tokens: &mut Vec<Token>,
                     line: usize|
     -> Result<()> {
        if tokens.is_empty() {
            *cq_id = None;
            *parser_id = None;
            chunks.clear();
            return Ok(());
        }
        let ann = Annotation {
            cq_id: cq_id.take().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: "sentence block has no `# sent_id` comment".into(),
            })?,
            parser_id: parser_id
                .take()
                .unwrap_or_else(|| default_parser_id.to_owned()),
            tokens: std::mem::take(tokens),
            noun_chunks: std::mem::take(chunks),
        };
        ann.validate()?;
        out.push(ann);
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            flush(&mut cq_id, &mut parser_id, &mut chunks, &mut tokens, block_start)?;
            block_start = line_no + 1;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let value = value.trim();
                match key.trim() {
                    "sent_id" => cq_id = Some(value.to_owned()),
                    "parser" | "parser_id" => parser_id = Some(value.to_owned()),
                    "chunks" => {
                        chunks = serde_json::from_str(value).map_err(|e| Error::Parse {
                            path: path.to_path_buf(),
                            line: line_no,
                            message: format!("bad chunks comment: {e}"),
                        })?
                    }
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let parse_num = |s: &str, what: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("bad {what} {s:?}"),
            })
        };
        let id = parse_num(cols[0], "ID")?;
        let head = parse_num(cols[6], "HEAD")?;
        if id == 0 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: "token ID must start at 1".into(),
            });
        }
        let index = id - 1;
        tokens.push(Token {
            index,
            text: cols[1].to_owned(),
            upos: cols[3].to_owned(),
            head: if head == 0 { index } else { head - 1 },
            deprel: cols[7].to_owned(),
        });
    }
    flush(&mut cq_id, &mut parser_id, &mut chunks, &mut tokens, block_start)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(index: usize, text: &str, upos: &str, head: usize, deprel: &str) -> Token {
        Token {
            index,
            text: text.into(),
            upos: upos.into(),
            head,
            deprel: deprel.into(),
        }
    }

    pub(crate) fn what_caused() -> Annotation {
        Annotation {
            cq_id: "fx-001".into(),
            parser_id: "test".into(),
            tokens: vec![
                tok(0, "What", "PRON", 1, "nsubj"),
                tok(1, "caused", "VERB", 1, "ROOT"),
                tok(2, "this", "DET", 3, "det"),
                tok(3, "event", "NOUN", 1, "dobj"),
                tok(4, "?", "PUNCT", 1, "punct"),
            ],
            noun_chunks: vec![[2, 4]],
        }
    }

    #[test]
    fn path_tree_is_ok() {
        let toks = vec![tok(0, "a", "X", 0, "root"), tok(1, "b", "X", 0, "dep"), tok(2, "c", "X", 1, "dep")];
        assert_eq!(validate_tree(&toks), Ok(()));
    }

    #[test]
    fn multiple_roots() {
        let toks = vec![tok(0, "a", "X", 0, "root"), tok(1, "b", "X", 1, "root")];
        assert_eq!(validate_tree(&toks), Err(TreeViolation::MultipleRoots(vec![0, 1])));
    }

    #[test]
    fn cycle_is_listed() {
        let toks = vec![
            tok(0, "a", "X", 0, "root"),
            tok(1, "b", "X", 0, "dep"),
            tok(2, "c", "X", 3, "dep"),
            tok(3, "d", "X", 2, "dep"),
        ];
        assert_eq!(validate_tree(&toks), Err(TreeViolation::Cycle(vec![2, 3])));
    }

    #[test]
    fn head_out_of_range() {
        let toks = vec![tok(0, "a", "X", 0, "root"), tok(1, "b", "X", 2, "dep")];
        assert_eq!(validate_tree(&toks), Err(TreeViolation::HeadOutOfRange(vec![1])));
    }

    #[test]
    fn no_root_is_cycle_or_no_root() {
        let toks = vec![tok(0, "a", "X", 1, "dep"), tok(1, "b", "X", 0, "dep")];
        assert_eq!(validate_tree(&toks), Err(TreeViolation::Cycle(vec![0, 1])));
    }

    #[test]
    fn root_needs_root_label() {
        let toks = vec![tok(0, "a", "X", 0, "nsubj")];
        assert!(matches!(validate_tree(&toks), Err(TreeViolation::RootLabel { .. })));
    }

    #[test]
    fn overlapping_chunks_rejected() {
        let mut ann = what_caused();
        ann.noun_chunks = vec![[0, 2], [1, 3]];
        assert!(matches!(ann.validate(), Err(Error::Span { .. })));
    }

    #[test]
    fn out_of_bounds_and_empty_chunks_rejected() {
        let mut ann = what_caused();
        ann.noun_chunks = vec![[3, 6]];
        assert!(matches!(ann.validate(), Err(Error::Span { .. })));
        ann.noun_chunks = vec![[2, 2]];
        assert!(matches!(ann.validate(), Err(Error::Span { .. })));
    }

    #[test]
    fn depth_of_fixture() {
        let ann = what_caused();
        ann.validate().unwrap();
        assert_eq!(ann.root(), 1);
        assert_eq!(ann.depth(), 2);
        assert_eq!(ann.text(), "What caused this event ?");
    }

    #[test]
    fn single_token_depth_zero() {
        let ann = Annotation {
            cq_id: "x".into(),
            parser_id: "p".into(),
            tokens: vec![tok(0, "Why", "ADV", 0, "root")],
            noun_chunks: vec![],
        };
        ann.validate().unwrap();
        assert_eq!(ann.depth(), 0);
    }

    #[test]
    fn conllu_round_trip_of_fixture() {
        let text = "# sent_id = fx-001\n# parser = spacy-test\n# chunks = [[2,4]]\n\
1\tWhat\twhat\tPRON\tWP\t_\t2\tnsubj\t_\t_\n\
2\tcaused\tcause\tVERB\tVBD\t_\t0\tROOT\t_\t_\n\
3\tthis\tthis\tDET\tDT\t_\t4\tdet\t_\t_\n\
4\tevent\tevent\tNOUN\tNN\t_\t2\tdobj\t_\t_\n\
5\t?\t?\tPUNCT\t.\t_\t2\tpunct\t_\t_\n\n";
        let anns = parse_conllu(text, "fallback").unwrap();
        assert_eq!(anns.len(), 1);
        let mut expected = what_caused();
        expected.parser_id = "spacy-test".into();
        assert_eq!(anns[0], expected);
    }

    #[test]
    fn conllu_skips_multiword_ranges_and_requires_sent_id() {
        let text = "# sent_id = a\n1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n1\tdo\tdo\tAUX\t_\t_\t0\troot\t_\t_\n2\tn't\tnot\tPART\t_\t_\t1\tneg\t_\t_\n\n\
1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n";
        let err = parse_conllu(text, "p").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err:?}");
        let ok = parse_conllu(&text[..text.find("\n\n").unwrap() + 2], "p").unwrap();
        assert_eq!(ok[0].tokens.len(), 2);
    }

    #[test]
    fn conllu_bad_tree_names_cq() {
        let text = "# sent_id = bad\n1\ta\ta\tX\t_\t_\t2\tdep\t_\t_\n2\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n";
        match parse_conllu(text, "p") {
            Err(Error::Tree { cq_id, .. }) => assert_eq!(cq_id, "bad"),
            other => panic!("{other:?}"),
        }
    }
}
