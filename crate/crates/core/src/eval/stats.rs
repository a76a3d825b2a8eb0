//! Distributions over an example file: reference edit sizes, feedback and
//! explanation lengths, and the clauses the reference edits touch.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{token_bin_label, EvalExample, SIZE_BINS, TOKEN_BIN};
use crate::edit::{diff, edit_size};
use crate::error::EvalError;
use crate::explain::explain;
use crate::schema::SchemaSet;

/// One histogram bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    pub bin: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub examples: usize,
    pub mean_edit_size: f64,
    /// Reference edit sizes binned `0, 1, 2, 3, 4, 5+`.
    pub edit_size: Vec<Bucket>,
    pub feedback_length: Vec<Bucket>,
    pub explanation_length: Vec<Bucket>,
    /// Number of examples whose reference edit touches each clause.
    pub clauses: BTreeMap<String, usize>,
}

struct Measure {
    size: usize,
    feedback: usize,
    explanation: usize,
    clauses: Vec<&'static str>,
}

fn token_histogram(values: impl Iterator<Item = usize>) -> Vec<Bucket> {
    let mut bins: BTreeMap<usize, usize> = BTreeMap::new();
    for v in values {
        *bins.entry(v / TOKEN_BIN).or_default() += 1;
    }
    bins.into_iter()
        .map(|(b, count)| Bucket {
            bin: token_bin_label(b),
            count,
        })
        .collect()
}

/// Computes the distributions of `examples`, in parallel on the current
/// rayon pool.
pub fn dataset_stats(examples: &[EvalExample], schemas: &SchemaSet) -> Result<DatasetStats, EvalError> {
    let measures: Vec<Measure> = examples
        .par_iter()
        .enumerate()
        .map(|(index, ex)| {
            let schema = schemas.get(&ex.db_id).ok_or_else(|| EvalError::UnknownDatabase {
                index,
                db_id: ex.db_id.clone(),
            })?;
            let d = diff(&ex.initial, &ex.gold).unwrap_or_default();
            let explanation = match &ex.explanation {
                Some(e) => e.token_len(),
                None => explain(&ex.initial, schema).token_len(),
            };
            Ok(Measure {
                size: edit_size(&d),
                feedback: ex.feedback.split_whitespace().count(),
                explanation,
                clauses: d.clause_kinds().into_iter().map(|k| k.tag()).collect(),
            })
        })
        .collect::<Result<_, EvalError>>()?;

    let mut sizes = vec![0usize; SIZE_BINS.len() + 1];
    let mut clauses = BTreeMap::new();
    for m in &measures {
        sizes[m.size.min(SIZE_BINS.len())] += 1;
        for c in &m.clauses {
            *clauses.entry(c.to_string()).or_default() += 1;
        }
    }
    let total: usize = measures.iter().map(|m| m.size).sum();
    Ok(DatasetStats {
        examples: measures.len(),
        mean_edit_size: if measures.is_empty() {
            0.0
        } else {
            total as f64 / measures.len() as f64
        },
        edit_size: std::iter::once("0")
            .chain(SIZE_BINS)
            .zip(sizes)
            .map(|(bin, count)| Bucket {
                bin: bin.to_string(),
                count,
            })
            .collect(),
        feedback_length: token_histogram(measures.iter().map(|m| m.feedback)),
        explanation_length: token_histogram(measures.iter().map(|m| m.explanation)),
        clauses,
    })
}

impl DatasetStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    /// All histograms as CSV rows `histogram,bin,count`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["histogram", "bin", "count"]).expect("in-memory write");
        let tables = [
            ("edit_size", &self.edit_size),
            ("feedback_length", &self.feedback_length),
            ("explanation_length", &self.explanation_length),
        ];
        for (name, buckets) in tables {
            for b in buckets {
                w.write_record([name, &b.bin, &b.count.to_string()])
                    .expect("in-memory write");
            }
        }
        for (clause, count) in &self.clauses {
            w.write_record(["clause", clause, &count.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("csv is UTF-8")
    }
}
