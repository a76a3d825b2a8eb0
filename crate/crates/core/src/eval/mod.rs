//! Evaluation of parse correctors.
//!
//! A corrector maps each example (initial parse, feedback, ...) to a predicted
//! parse. Scores: correction accuracy under exact set match, the fraction of
//! examples whose distance to gold strictly shrinks (Edit↓) or grows (Edit↑),
//! and Progress, the mean relative reduction of the edit size. Examples whose
//! initial parse is already correct have no defined progress and are counted
//! separately.

mod correctors;
mod stats;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use correctors::{
    builtin_corrector, load_predictions, Corrector, GoldOracle, Identity, OfflinePredictions, Prediction,
    RandomSingleEdit, BUILTIN_CORRECTORS,
};
pub use stats::{dataset_stats, Bucket, DatasetStats};

use crate::edit::{apply, diff, edit_size, parse_linearized};
use crate::error::EvalError;
use crate::explain::{explain, Explanation, Step};
use crate::schema::{Schema, SchemaSet};
use crate::sql::{parse_sql, Argument, ClauseKind, SqlQuery};

/// True iff every clause holds the same arguments once canonicalized with
/// WHERE/HAVING values erased, ignoring order; subqueries compare recursively.
pub fn exact_set_match(a: &SqlQuery, b: &SqlQuery) -> bool {
    let keys = |q: &SqlQuery, kind: ClauseKind| {
        let mut v: Vec<Argument> = q.args(kind).iter().map(|x| x.match_key(kind)).collect();
        v.sort();
        v
    };
    ClauseKind::ARGUMENT_CLAUSES.iter().all(|k| keys(a, *k) == keys(b, *k))
        && match (a.subquery(), b.subquery()) {
            (None, None) => true,
            (Some(x), Some(y)) => exact_set_match(x, y),
            _ => false,
        }
}

/// A correction example: the parser's initial parse, the user's feedback and
/// the gold parse.
#[derive(Debug, Clone)]
pub struct EvalExample {
    pub db_id: String,
    pub question: String,
    pub initial: SqlQuery,
    pub feedback: String,
    pub gold: SqlQuery,
    pub explanation: Option<Explanation>,
}

/// One line of a test-set file. Extra fields (e.g. from synthesis) are ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestRecord {
    pub db_id: String,
    #[serde(default)]
    pub question: String,
    pub initial_sql: String,
    #[serde(default)]
    pub feedback: String,
    pub gold_sql: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<Vec<String>>,
}

/// Parses a JSONL test set, resolving both parses against their schemas.
pub fn load_test_set(jsonl: &str, schemas: &SchemaSet) -> Result<Vec<EvalExample>, EvalError> {
    let mut out = Vec::new();
    for (line, text) in jsonl.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec: TestRecord = serde_json::from_str(text).map_err(|e| EvalError::BadRecord {
            line: line + 1,
            message: e.to_string(),
        })?;
        let index = out.len();
        let schema = schemas.get(&rec.db_id).ok_or_else(|| EvalError::UnknownDatabase {
            index,
            db_id: rec.db_id.clone(),
        })?;
        let parse =
            |sql: &str, what| parse_sql(sql, schema).map_err(|source| EvalError::BadExample { index, what, source });
        let explanation = rec.explanation.map(|steps| Explanation {
            steps: steps
                .into_iter()
                .enumerate()
                .map(|(i, text)| Step {
                    number: i + 1,
                    text,
                    clauses: vec![],
                })
                .collect(),
        });
        out.push(EvalExample {
            initial: parse(&rec.initial_sql, "initial_sql")?,
            gold: parse(&rec.gold_sql, "gold_sql")?,
            db_id: rec.db_id,
            question: rec.question,
            feedback: rec.feedback,
            explanation,
        });
    }
    Ok(out)
}

/// Per-example outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub index: usize,
    pub db_id: String,
    /// Edit size from the initial parse to gold.
    pub initial_size: usize,
    /// Edit size from the prediction to gold.
    pub predicted_size: usize,
    pub matched: bool,
    /// Why the prediction was replaced by the initial parse, if it was.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub feedback_tokens: usize,
    pub explanation_tokens: usize,
    /// Relative edit reduction; absent when the initial parse is correct.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub progress: Option<f64>,
}

impl ExampleRecord {
    fn scored(&self) -> bool {
        self.progress.is_some()
    }
}

/// Scores of one breakdown bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub bin: String,
    pub examples: usize,
    pub accuracy: f64,
    /// Examples with a defined progress.
    pub scored: usize,
    pub edit_down: f64,
    pub edit_up: f64,
    pub progress: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakdowns {
    pub feedback_length: Vec<BinRow>,
    pub explanation_length: Vec<BinRow>,
    pub edit_size: Vec<BinRow>,
}

/// Counts of (initial edit size, post-correction edit size) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub corrector: String,
    pub examples: usize,
    /// Examples with a non-empty initial edit, over which Edit↓/↑ and
    /// Progress are averaged.
    pub scored: usize,
    pub initially_correct: usize,
    pub failed_predictions: usize,
    pub correction_accuracy: f64,
    pub edit_down: f64,
    pub edit_up: f64,
    pub progress: f64,
    pub breakdowns: Breakdowns,
    pub transition: TransitionMatrix,
    pub records: Vec<ExampleRecord>,
}

const SIZE_BINS: [&str; 5] = ["1", "2", "3", "4", "5+"];
const TOKEN_BIN: usize = 4;

fn size_bin(n: usize) -> usize {
    n.clamp(1, 5) - 1
}

fn token_bin_label(bin: usize) -> String {
    format!("{}-{}", bin * TOKEN_BIN, bin * TOKEN_BIN + TOKEN_BIN - 1)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn summarize(bin: String, records: &[&ExampleRecord]) -> BinRow {
    let scored: Vec<&&ExampleRecord> = records.iter().filter(|r| r.scored()).collect();
    BinRow {
        bin,
        examples: records.len(),
        accuracy: mean(records.iter().map(|r| f64::from(u8::from(r.matched)))),
        scored: scored.len(),
        edit_down: mean(
            scored
                .iter()
                .map(|r| f64::from(u8::from(r.predicted_size < r.initial_size))),
        ),
        edit_up: mean(
            scored
                .iter()
                .map(|r| f64::from(u8::from(r.predicted_size > r.initial_size))),
        ),
        progress: mean(scored.iter().filter_map(|r| r.progress)),
    }
}

fn token_breakdown(records: &[ExampleRecord], tokens: impl Fn(&ExampleRecord) -> usize) -> Vec<BinRow> {
    let mut bins: BTreeMap<usize, Vec<&ExampleRecord>> = BTreeMap::new();
    for r in records {
        bins.entry(tokens(r) / TOKEN_BIN).or_default().push(r);
    }
    bins.into_iter()
        .map(|(b, rs)| summarize(token_bin_label(b), &rs))
        .collect()
}

impl MetricsReport {
    /// Aggregates per-example records; independent of their evaluation order.
    pub fn from_records(corrector: &str, records: Vec<ExampleRecord>) -> Self {
        let all: Vec<&ExampleRecord> = records.iter().collect();
        let overall = summarize(String::new(), &all);

        let mut by_size: Vec<Vec<&ExampleRecord>> = vec![Vec::new(); SIZE_BINS.len()];
        let mut counts = vec![vec![0usize; SIZE_BINS.len() + 1]; SIZE_BINS.len()];
        for r in records.iter().filter(|r| r.scored()) {
            by_size[size_bin(r.initial_size)].push(r);
            let col = if r.predicted_size == 0 {
                0
            } else {
                size_bin(r.predicted_size) + 1
            };
            counts[size_bin(r.initial_size)][col] += 1;
        }
        let edit_size = by_size
            .iter()
            .zip(SIZE_BINS)
            .map(|(rs, label)| summarize(label.to_string(), rs))
            .collect();

        MetricsReport {
            corrector: corrector.to_string(),
            examples: records.len(),
            scored: overall.scored,
            initially_correct: records.iter().filter(|r| r.initial_size == 0).count(),
            failed_predictions: records.iter().filter(|r| r.failure.is_some()).count(),
            correction_accuracy: overall.accuracy,
            edit_down: overall.edit_down,
            edit_up: overall.edit_up,
            progress: overall.progress,
            breakdowns: Breakdowns {
                feedback_length: token_breakdown(&records, |r| r.feedback_tokens),
                explanation_length: token_breakdown(&records, |r| r.explanation_tokens),
                edit_size,
            },
            transition: TransitionMatrix {
                rows: SIZE_BINS.iter().map(|s| s.to_string()).collect(),
                columns: std::iter::once("0").chain(SIZE_BINS).map(str::to_string).collect(),
                counts,
            },
            records,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Breakdown tables as CSV rows `breakdown,bin,examples,...`.
    pub fn breakdowns_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "breakdown",
            "bin",
            "examples",
            "accuracy",
            "scored",
            "edit_down",
            "edit_up",
            "progress",
        ])
        .expect("in-memory write");
        let tables = [
            ("feedback_length", &self.breakdowns.feedback_length),
            ("explanation_length", &self.breakdowns.explanation_length),
            ("edit_size", &self.breakdowns.edit_size),
        ];
        for (name, rows) in tables {
            for r in rows {
                w.write_record([
                    name.to_string(),
                    r.bin.clone(),
                    r.examples.to_string(),
                    r.accuracy.to_string(),
                    r.scored.to_string(),
                    r.edit_down.to_string(),
                    r.edit_up.to_string(),
                    r.progress.to_string(),
                ])
                .expect("in-memory write");
            }
        }
        for (row, counts) in self.transition.rows.iter().zip(&self.transition.counts) {
            for (col, n) in self.transition.columns.iter().zip(counts) {
                w.write_record([
                    "transition".to_string(),
                    format!("{row}->{col}"),
                    n.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("csv is UTF-8")
    }
}

/// Turns a prediction into a parse; failures fall back to the initial parse.
fn resolve(pred: Prediction, ex: &EvalExample, schema: &Schema) -> (SqlQuery, Option<String>) {
    let result = match pred {
        Prediction::Query(q) => Ok(q),
        Prediction::Sql(text) => parse_sql(&text, schema).map_err(|e| format!("predicted SQL: {e}")),
        Prediction::Edit(edit) => parse_linearized(&edit, schema)
            .and_then(|d| apply(&d, &ex.initial))
            .map_err(|e| format!("predicted edit: {e}")),
        Prediction::Missing => Err("no prediction".to_string()),
    };
    match result {
        Ok(q) => (q, None),
        Err(msg) => (ex.initial.clone(), Some(msg)),
    }
}

/// Scores one example.
pub fn score_example(corrector: &dyn Corrector, index: usize, ex: &EvalExample, schema: &Schema) -> ExampleRecord {
    let (predicted, failure) = resolve(corrector.predict(index, ex, schema), ex, schema);
    let distance = |q: &SqlQuery| edit_size(&diff(q, &ex.gold).unwrap_or_default());
    let initial_size = distance(&ex.initial);
    let predicted_size = distance(&predicted);
    let explanation_tokens = match &ex.explanation {
        Some(e) => e.token_len(),
        None => explain(&ex.initial, schema).token_len(),
    };
    ExampleRecord {
        index,
        db_id: ex.db_id.clone(),
        initial_size,
        predicted_size,
        matched: exact_set_match(&predicted, &ex.gold),
        failure,
        feedback_tokens: ex.feedback.split_whitespace().count(),
        explanation_tokens,
        progress: (initial_size > 0).then(|| (initial_size as f64 - predicted_size as f64) / initial_size as f64),
    }
}

/// Evaluates `corrector` on every example, in parallel on the current rayon
/// pool. Records come back in input order.
pub fn evaluate(
    corrector: &dyn Corrector,
    testset: &[EvalExample],
    schemas: &SchemaSet,
) -> Result<MetricsReport, EvalError> {
    if testset.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let resolved: Vec<&Schema> = testset
        .iter()
        .enumerate()
        .map(|(index, ex)| {
            schemas.get(&ex.db_id).ok_or_else(|| EvalError::UnknownDatabase {
                index,
                db_id: ex.db_id.clone(),
            })
        })
        .collect::<Result<_, _>>()?;
    let records: Vec<ExampleRecord> = testset
        .par_iter()
        .zip(resolved)
        .enumerate()
        .map(|(i, (ex, schema))| score_example(corrector, i, ex, schema))
        .collect();
    Ok(MetricsReport::from_records(&corrector.name(), records))
}
