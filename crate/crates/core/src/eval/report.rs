use serde::Serialize;
use sha2::{Digest, Sha256};

use super::cv::{EvalMode, PipelineConfig, Representation};
use super::{prf, Confusion};
use crate::classify::{BowConfig, ClassifierConfig};
use crate::embedding::EmbedHyper;
use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl Metrics {
    pub fn of(c: &Confusion) -> Self {
        let (precision, recall, f_measure) = prf(c);
        Metrics {
            precision,
            recall,
            f_measure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineDescriptor {
    pub name: String,
    pub lexicon: bool,
    pub lexicon_source: Option<String>,
    pub representation: Representation,
    pub embedding: Option<EmbedHyper>,
    pub bow: Option<BowConfig>,
    pub classifier: ClassifierConfig,
    pub standardize: bool,
    pub features_hateful_only: bool,
    pub folds: usize,
    pub infer_steps: usize,
    /// Readings of settings the method description leaves open.
    pub notes: Vec<String>,
}

impl PipelineDescriptor {
    pub(crate) fn new(c: &PipelineConfig, lexicon_source: &str) -> Self {
        let p = c.pipeline;
        let embedding = (p.representation != Representation::Bow).then(|| {
            let mut h = c.hyper.clone();
            h.mode = match p.representation {
                Representation::Pvdbow => crate::embedding::EmbedMode::Pvdbow,
                _ => crate::embedding::EmbedMode::Pvdm,
            };
            h
        });
        let mut notes = Vec::new();
        if let ClassifierConfig::Mlp(m) = &c.classifier {
            notes.push(format!(
                "mlp: {} iterations read as full-batch gradient-descent epochs",
                m.epochs
            ));
            notes.push(
                format!(
                    "mlp: {:?} hidden activation and learning rate {} are assumed settings",
                    m.activation, m.learning_rate
                )
                .to_lowercase(),
            );
        }
        if p.representation == Representation::Bow {
            notes.push("bow: approximate n-gram baseline, not the original feature set".into());
        }
        PipelineDescriptor {
            name: p.to_string(),
            lexicon: p.lexicon,
            lexicon_source: p.lexicon.then(|| lexicon_source.to_string()),
            representation: p.representation,
            embedding,
            bow: (p.representation == Representation::Bow).then(|| c.bow.clone()),
            classifier: c.classifier.clone(),
            standardize: c.standardize,
            features_hateful_only: c.features_hateful_only,
            folds: c.folds,
            infer_steps: c.infer_steps,
            notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_size: usize,
    /// Positions of the held-out documents in the evaluation corpus.
    pub test_indices: Vec<usize>,
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub pipeline: PipelineDescriptor,
    pub mode: EvalMode,
    pub seed: u64,
    /// First 8 bytes of SHA-256 over the pipeline, mode and seed.
    pub config_hash: String,
    pub folds: Vec<FoldResult>,
    pub aggregate: Confusion,
    pub hateful: Metrics,
    pub non_hateful: Metrics,
}

impl EvalReport {
    pub fn new(
        pipeline: PipelineDescriptor,
        mode: EvalMode,
        seed: u64,
        folds: Vec<FoldResult>,
    ) -> Self {
        let mut aggregate = Confusion::default();
        for f in &folds {
            aggregate += f.confusion;
        }
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&(&pipeline, mode, seed)).expect("descriptor serializes"));
        EvalReport {
            schema_version: REPORT_SCHEMA_VERSION,
            config_hash: hex::encode(&h.finalize()[..8]),
            hateful: Metrics::of(&aggregate),
            non_hateful: Metrics::of(&aggregate.flipped()),
            pipeline,
            mode,
            seed,
            folds,
            aggregate,
        }
    }
}

/// Full report as pretty-printed JSON with a trailing newline.
pub fn report_json(report: &EvalReport) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(report).map_err(|e| crate::Error::Data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

#[derive(Serialize)]
struct Row {
    pipeline: String,
    mode: EvalMode,
    precision: String,
    fp: usize,
    recall: String,
    #[serde(rename = "fn")]
    fn_: usize,
    f_measure: String,
}

#[derive(Serialize)]
struct Table {
    schema_version: u32,
    rows: Vec<Row>,
    notes: Vec<String>,
}

fn table(reports: &[EvalReport]) -> Table {
    let mut notes: Vec<String> = Vec::new();
    for r in reports {
        for n in &r.pipeline.notes {
            if !notes.contains(n) {
                notes.push(n.clone());
            }
        }
    }
    Table {
        schema_version: REPORT_SCHEMA_VERSION,
        rows: reports
            .iter()
            .map(|r| Row {
                pipeline: r.pipeline.name.clone(),
                mode: r.mode,
                precision: format!("{:.2}", r.hateful.precision),
                fp: r.aggregate.fp,
                recall: format!("{:.2}", r.hateful.recall),
                fn_: r.aggregate.fn_,
                f_measure: format!("{:.2}", r.hateful.f_measure),
            })
            .collect(),
        notes,
    }
}

/// Hateful-class summary table, one row per report in input order.
pub fn render_report(reports: &[EvalReport], format: ReportFormat) -> String {
    let t = table(reports);
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&t).expect("table serializes");
            s.push('\n');
            s
        }
        ReportFormat::Markdown => {
            let mut s = String::from("| Pipeline | Mode | P | R | F |\n|---|---|---|---|---|\n");
            for r in &t.rows {
                s.push_str(&format!(
                    "| {} | {} | {} FP={} | {} FN={} | {} |\n",
                    r.pipeline, r.mode, r.precision, r.fp, r.recall, r.fn_, r.f_measure
                ));
            }
            if !t.notes.is_empty() {
                s.push('\n');
                for n in &t.notes {
                    s.push_str(&format!("- {n}\n"));
                }
            }
            s
        }
    }
}
