//! Per-CQ feature records, their per-set aggregation, and markdown/CSV
//! rendering of the feature, diversity and overlap tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complexity::Interrogative;
use crate::corpus::write_atomic;
use crate::error::{Error, Result};
use crate::setmetrics::{mean_std, DiversityReport, MeanStd, PairwiseReport};

/// Everything measured for one CQ. Metrics whose inputs were unavailable
/// are absent, never zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub cq_id: String,
    pub set_id: String,
    pub spec_id: String,
    pub model_id: String,
    pub c0: usize,
    pub c1: Option<usize>,
    pub c2: Option<usize>,
    pub c3: Option<usize>,
    pub fkgl: Option<f64>,
    pub dcr: Option<f64>,
    pub relevance: Option<u8>,
    #[serde(default)]
    pub interrogative: Option<Interrogative>,
    /// Diagnostics for metrics that failed on this CQ.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl FeatureVector {
    /// Values in table column order: length, req., lex., syn., FKGL, DCR, rel.
    pub fn metrics(&self) -> [Option<f64>; 7] {
        [
            Some(self.c0 as f64),
            self.c1.map(|v| v as f64),
            self.c2.map(|v| v as f64),
            self.c3.map(|v| v as f64),
            self.fkgl,
            self.dcr,
            self.relevance.map(f64::from),
        ]
    }
}

pub const METRIC_COLUMNS: [&str; 7] = ["Length", "Req.", "Lex.", "Syn.", "FKGL", "DCR", "Rel."];
const METRIC_KEYS: [&str; 7] = ["length", "req", "lex", "syn", "fkgl", "dcr", "rel"];

pub fn save_features(features: &[FeatureVector], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for f in features {
        out.push_str(&serde_json::to_string(f).expect("feature serializes"));
        out.push('\n');
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

pub fn load_features(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.into(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    /// Absent when every CQ lacked this metric.
    pub stat: Option<MeanStd>,
    pub n: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub dataset: String,
    pub model_id: String,
    pub set_id: String,
    pub n: usize,
    /// In [`METRIC_COLUMNS`] order.
    pub metrics: [MetricSummary; 7],
}

/// Mean and population std per metric over CQs that have the metric.
pub fn aggregate_features(features: &[FeatureVector]) -> Result<AggregateRow> {
    let first = features.first().ok_or(Error::EmptyInput)?;
    if let Some(f) = features
        .iter()
        .find(|f| f.spec_id != first.spec_id || f.model_id != first.model_id || f.set_id != first.set_id)
    {
        return Err(Error::Consistency(format!(
            "cannot aggregate {} ({}/{}) with {} ({}/{})",
            f.cq_id, f.spec_id, f.model_id, first.cq_id, first.spec_id, first.model_id
        )));
    }
    let metrics = std::array::from_fn(|m| {
        let xs: Vec<f64> = features.iter().filter_map(|f| f.metrics()[m]).collect();
        MetricSummary {
            stat: mean_std(&xs).ok(),
            n: xs.len(),
            excluded: features.len() - xs.len(),
        }
    });
    Ok(AggregateRow {
        dataset: first.spec_id.clone(),
        model_id: first.model_id.clone(),
        set_id: first.set_id.clone(),
        n: features.len(),
        metrics,
    })
}

/// Settings that make a report reproducible, printed under every table set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub parser_id: Option<String>,
    pub embedding_model_id: Option<String>,
    pub judge_id: Option<String>,
    pub tau: f64,
    pub k: usize,
    pub seed: u64,
    pub readability_rules: String,
}

impl Provenance {
    fn lines(&self) -> Vec<(&'static str, String)> {
        let opt = |o: &Option<String>| o.clone().unwrap_or_else(|| "none".into());
        vec![
            ("parser_id", opt(&self.parser_id)),
            ("embedding_model_id", opt(&self.embedding_model_id)),
            ("judge_id", opt(&self.judge_id)),
            ("tau", format!("{}", self.tau)),
            ("k", self.k.to_string()),
            ("seed", self.seed.to_string()),
            ("readability_rules", self.readability_rules.clone()),
        ]
    }
}

fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    // Avoid "-0.0" for values that round to zero.
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_owned()
    } else {
        s
    }
}

fn pm(m: &MeanStd, decimals: usize) -> String {
    format!("{} ± {}", fixed(m.mean, decimals), fixed(m.std, decimals))
}

fn md_table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    writeln!(out, "| {} |", header.join(" | ")).unwrap();
    writeln!(out, "|{}", (0..header.len()).map(|i| if i == 0 { "---|" } else { "---:|" }).collect::<String>()).unwrap();
    for r in rows {
        writeln!(out, "| {} |", r.join(" | ")).unwrap();
    }
}

fn feature_cells(row: &AggregateRow) -> Vec<String> {
    let mut cells = vec![row.model_id.clone()];
    cells.extend(
        row.metrics
            .iter()
            .map(|m| m.stat.as_ref().map_or_else(|| "n/a".to_owned(), |s| pm(s, 1))),
    );
    cells
}

/// Feature table: one section per dataset, columns Model plus the seven metrics.
pub fn render_features_markdown(rows: &[AggregateRow]) -> String {
    let mut out = String::new();
    let mut header = vec!["Model"];
    header.extend(METRIC_COLUMNS);
    let mut datasets: Vec<&str> = rows.iter().map(|r| r.dataset.as_str()).collect();
    datasets.dedup();
    for (i, ds) in datasets.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "**{ds}**\n").unwrap();
        let cells: Vec<Vec<String>> = rows.iter().filter(|r| r.dataset == *ds).map(feature_cells).collect();
        md_table(&mut out, &header, &cells);
    }
    let notes: Vec<String> = rows
        .iter()
        .flat_map(|r| {
            r.metrics.iter().zip(METRIC_COLUMNS).filter(|(m, _)| m.excluded > 0 && m.n > 0).map(move |(m, col)| {
                format!("- {}: {col} excludes {} of {} CQs", r.set_id, m.excluded, r.n)
            })
        })
        .collect();
    if !notes.is_empty() {
        writeln!(out, "\n{}", notes.join("\n")).unwrap();
    }
    out
}

/// Diversity table: Set, CQs, ACS, ACD, H.
pub fn render_diversity_markdown(reports: &[DiversityReport]) -> String {
    let mut out = String::new();
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|d| {
            vec![
                d.set_id.clone(),
                d.n_cqs.to_string(),
                d.aps.as_ref().map_or_else(|| "n/a".into(), |a| pm(a, 2)),
                pm(&d.acd, 2),
                fixed(d.entropy, 2),
            ]
        })
        .collect();
    md_table(&mut out, &["Set", "CQs", "ACS", "ACD", "H"], &rows);
    out.push('\n');
    for d in reports {
        let note = match &d.warning {
            Some(w) => format!("{}: {w}", d.set_id),
            None => format!("{}: k'={} retained ({} >= {})", d.set_id, d.k, d.n_cqs, d.requested_k),
        };
        writeln!(out, "- {note}").unwrap();
    }
    out
}

pub const PAIRWISE_COLUMNS: [&str; 8] = [
    "S1",
    "S2",
    "Centroid Sim",
    "S1←S2 Cov",
    "S1←S2 MMS",
    "S1→S2 Cov",
    "S1→S2 MMS",
    "BiDirect",
];

/// Overlap table. `S1←S2` is the share of S1 matched in S2.
pub fn render_pairwise_markdown(reports: &[PairwiseReport]) -> String {
    let mut out = String::new();
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|p| {
            vec![
                p.set_a.clone(),
                p.set_b.clone(),
                fixed(p.centroid_sim, 2),
                format!("{}%", fixed(p.a_covered_pct, 2)),
                pm(&p.mms_a, 2),
                format!("{}%", fixed(p.b_covered_pct, 2)),
                pm(&p.mms_b, 2),
                format!("{}%", fixed(p.bidirectional_pct, 2)),
            ]
        })
        .collect();
    md_table(&mut out, &PAIRWISE_COLUMNS, &rows);
    out
}

/// Inputs of a full report; empty sections are omitted.
#[derive(Debug, Clone, Default)]
pub struct ReportInputs<'a> {
    pub features: &'a [AggregateRow],
    pub diversity: &'a [DiversityReport],
    pub pairwise: &'a [PairwiseReport],
}

pub fn render_markdown(inputs: &ReportInputs<'_>, prov: &Provenance) -> String {
    let mut out = String::from("# CQ set report\n");
    if !inputs.features.is_empty() {
        write!(out, "\n## CQ features\n\n{}", render_features_markdown(inputs.features)).unwrap();
    }
    if !inputs.diversity.is_empty() {
        write!(out, "\n## Set diversity\n\n{}", render_diversity_markdown(inputs.diversity)).unwrap();
    }
    if !inputs.pairwise.is_empty() {
        write!(
            out,
            "\n## Pairwise overlap (tau = {})\n\n{}",
            prov.tau,
            render_pairwise_markdown(inputs.pairwise)
        )
        .unwrap();
    }
    out.push_str("\n## Provenance\n\n");
    for (k, v) in prov.lines() {
        writeln!(out, "- {k}: {v}").unwrap();
    }
    out
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn csv_line(out: &mut String, cells: &[String]) {
    let line: Vec<String> = cells.iter().map(|c| csv_cell(c)).collect();
    writeln!(out, "{}", line.join(",")).unwrap();
}

fn csv_ms(cells: &mut Vec<String>, m: Option<&MeanStd>, decimals: usize) {
    match m {
        Some(m) => {
            cells.push(fixed(m.mean, decimals));
            cells.push(fixed(m.std, decimals));
        }
        None => cells.extend([String::new(), String::new()]),
    }
}

/// CSV with the same rounded numbers as the markdown. Provenance goes in
/// leading `#` comment lines and each table starts with a `# table:` line.
pub fn render_csv(inputs: &ReportInputs<'_>, prov: &Provenance) -> String {
    let mut out = String::new();
    for (k, v) in prov.lines() {
        writeln!(out, "# {k}: {v}").unwrap();
    }
    if !inputs.features.is_empty() {
        out.push_str("# table: features\n");
        let mut header = vec!["dataset".to_owned(), "model".to_owned(), "n".to_owned()];
        for k in METRIC_KEYS {
            header.push(format!("{k}_mean"));
            header.push(format!("{k}_std"));
        }
        csv_line(&mut out, &header);
        for r in inputs.features {
            let mut cells = vec![r.dataset.clone(), r.model_id.clone(), r.n.to_string()];
            for m in &r.metrics {
                csv_ms(&mut cells, m.stat.as_ref(), 1);
            }
            csv_line(&mut out, &cells);
        }
    }
    if !inputs.diversity.is_empty() {
        out.push_str("# table: diversity\n");
        csv_line(
            &mut out,
            &["set", "cqs", "acs_mean", "acs_std", "acd_mean", "acd_std", "entropy", "k"].map(String::from),
        );
        for d in inputs.diversity {
            let mut cells = vec![d.set_id.clone(), d.n_cqs.to_string()];
            csv_ms(&mut cells, d.aps.as_ref(), 2);
            csv_ms(&mut cells, Some(&d.acd), 2);
            cells.push(fixed(d.entropy, 2));
            cells.push(d.k.to_string());
            csv_line(&mut out, &cells);
        }
    }
    if !inputs.pairwise.is_empty() {
        out.push_str("# table: pairwise\n");
        csv_line(
            &mut out,
            &[
                "s1", "s2", "centroid_sim", "s1_covered_pct", "s1_mms_mean", "s1_mms_std", "s2_covered_pct",
                "s2_mms_mean", "s2_mms_std", "bidirectional_pct", "tau",
            ]
            .map(String::from),
        );
        for p in inputs.pairwise {
            let mut cells = vec![p.set_a.clone(), p.set_b.clone(), fixed(p.centroid_sim, 2), fixed(p.a_covered_pct, 2)];
            csv_ms(&mut cells, Some(&p.mms_a), 2);
            cells.push(fixed(p.b_covered_pct, 2));
            csv_ms(&mut cells, Some(&p.mms_b), 2);
            cells.push(fixed(p.bidirectional_pct, 2));
            cells.push(format!("{}", p.tau));
            csv_line(&mut out, &cells);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(id: &str, c0: usize) -> FeatureVector {
        FeatureVector {
            cq_id: id.into(),
            set_id: "mm.gemini".into(),
            spec_id: "mm".into(),
            model_id: "gemini".into(),
            c0,
            c1: Some(3),
            c2: Some(2),
            c3: Some(9),
            fkgl: Some(2.5),
            dcr: Some(6.0),
            relevance: Some(4),
            interrogative: None,
            errors: vec![],
        }
    }

    fn prov() -> Provenance {
        Provenance {
            parser_id: Some("p".into()),
            embedding_model_id: Some("e".into()),
            judge_id: None,
            tau: 0.7,
            k: 5,
            seed: 46,
            readability_rules: "r".into(),
        }
    }

    #[test]
    fn aggregate_single_and_pair() {
        let one = aggregate_features(&[fv("a", 42)]).unwrap();
        assert_eq!(one.metrics[0].stat, Some(MeanStd { mean: 42.0, std: 0.0 }));
        let two = aggregate_features(&[fv("a", 80), fv("b", 120)]).unwrap();
        assert_eq!(two.metrics[0].stat, Some(MeanStd { mean: 100.0, std: 20.0 }));
        assert!(matches!(aggregate_features(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn absent_metrics_are_excluded_and_counted() {
        let mut b = fv("b", 10);
        b.relevance = None;
        let r = aggregate_features(&[fv("a", 10), b]).unwrap();
        assert_eq!((r.metrics[6].n, r.metrics[6].excluded), (1, 1));
        let mut c = fv("c", 1);
        c.model_id = "other".into();
        assert!(matches!(aggregate_features(&[fv("a", 1), c]), Err(Error::Consistency(_))));
    }

    #[test]
    fn feature_table_has_eight_columns() {
        let md = render_features_markdown(&[aggregate_features(&[fv("a", 80), fv("b", 120)]).unwrap()]);
        let header = md.lines().find(|l| l.starts_with("| Model")).unwrap();
        assert_eq!(header.matches('|').count() - 1, 8);
        assert!(md.contains("| gemini | 100.0 ± 20.0 | 3.0 ± 0.0 |"));
    }

    #[test]
    fn entropy_rounds_to_two_places() {
        let d = DiversityReport {
            set_id: "s".into(),
            n_cqs: 10,
            aps: None,
            acd: MeanStd { mean: 0.5, std: 0.1 },
            entropy: 2.321928,
            k: 5,
            requested_k: 5,
            seed: 46,
            cluster_sizes: vec![2; 5],
            warning: None,
        };
        let md = render_diversity_markdown(&[d]);
        assert!(md.contains("| 2.32 |"));
    }

    #[test]
    fn footer_lists_provenance() {
        let md = render_markdown(&ReportInputs::default(), &prov());
        for key in ["parser_id: p", "embedding_model_id: e", "judge_id: none", "tau: 0.7", "k: 5", "seed: 46"] {
            assert!(md.contains(key), "{key}");
        }
        assert!(render_csv(&ReportInputs::default(), &prov()).starts_with("# parser_id: p\n"));
    }

    #[test]
    fn negative_zero_is_not_printed() {
        assert_eq!(fixed(-0.001, 2), "0.00");
        assert_eq!(fixed(-0.5, 1), "-0.5");
    }
}
