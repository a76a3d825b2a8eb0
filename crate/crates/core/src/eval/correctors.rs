use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::EvalExample;
use crate::edit::LinearizedEdit;
use crate::error::EvalError;
use crate::schema::Schema;
use crate::sql::SqlQuery;
use crate::synth::{apply_editor, clone_seed, feasible_editors};

/// What a corrector proposes for one example.
#[derive(Debug, Clone)]
pub enum Prediction {
    /// A full SQL string, resolved against the example's schema.
    Sql(String),
    /// An edit applied to the initial parse.
    Edit(LinearizedEdit),
    Query(SqlQuery),
    /// No prediction; scored as the initial parse and flagged.
    Missing,
}

/// Anything that proposes a corrected parse for an example.
pub trait Corrector: Sync {
    fn name(&self) -> String;
    fn predict(&self, index: usize, ex: &EvalExample, schema: &Schema) -> Prediction;
}

/// Returns the initial parse unchanged.
pub struct Identity;

impl Corrector for Identity {
    fn name(&self) -> String {
        "identity".into()
    }

    fn predict(&self, _: usize, ex: &EvalExample, _: &Schema) -> Prediction {
        Prediction::Query(ex.initial.clone())
    }
}

/// Returns the gold parse.
pub struct GoldOracle;

impl Corrector for GoldOracle {
    fn name(&self) -> String {
        "gold_oracle".into()
    }

    fn predict(&self, _: usize, ex: &EvalExample, _: &Schema) -> Prediction {
        Prediction::Query(ex.gold.clone())
    }
}

/// Applies one random feasible editor to the initial parse. The random
/// stream of example `i` depends only on `(seed, i)`.
pub struct RandomSingleEdit {
    pub seed: u64,
}

impl Corrector for RandomSingleEdit {
    fn name(&self) -> String {
        format!("random_single_edit(seed={})", self.seed)
    }

    fn predict(&self, index: usize, ex: &EvalExample, schema: &Schema) -> Prediction {
        let mut rng = ChaCha8Rng::seed_from_u64(clone_seed(self.seed, index, 0));
        let editors = feasible_editors(&ex.initial, schema);
        let Some(editor) = editors.choose(&mut rng) else {
            return Prediction::Query(ex.initial.clone());
        };
        match apply_editor(*editor, &ex.initial, schema, &mut rng) {
            Ok((q, _)) => Prediction::Query(q),
            Err(_) => Prediction::Missing,
        }
    }
}

pub const BUILTIN_CORRECTORS: [&str; 3] = ["identity", "gold_oracle", "random_single_edit"];

/// A built-in corrector by name; `seed` drives `random_single_edit`.
pub fn builtin_corrector(name: &str, seed: u64) -> Option<Box<dyn Corrector>> {
    match name {
        "identity" => Some(Box::new(Identity)),
        "gold_oracle" => Some(Box::new(GoldOracle)),
        "random_single_edit" => Some(Box::new(RandomSingleEdit { seed })),
        _ => None,
    }
}

/// Predictions read from a file, keyed by example index.
#[derive(Debug, Clone, Default)]
pub struct OfflinePredictions {
    pub predictions: BTreeMap<usize, Prediction>,
}

impl Corrector for OfflinePredictions {
    fn name(&self) -> String {
        "predictions".into()
    }

    fn predict(&self, index: usize, _: &EvalExample, _: &Schema) -> Prediction {
        self.predictions.get(&index).cloned().unwrap_or(Prediction::Missing)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictionRecord {
    index: usize,
    #[serde(default)]
    predicted_sql: Option<String>,
    #[serde(default)]
    predicted_edit: Option<String>,
}

/// Parses a predictions JSONL file. Each line has an `index` and exactly one
/// of `predicted_sql` or `predicted_edit`.
pub fn load_predictions(jsonl: &str) -> Result<OfflinePredictions, EvalError> {
    let mut out = OfflinePredictions::default();
    for (i, text) in jsonl.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |message: String| EvalError::BadRecord { line: i + 1, message };
        let rec: PredictionRecord = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let pred = match (rec.predicted_sql, rec.predicted_edit) {
            (Some(sql), None) => Prediction::Sql(sql),
            (None, Some(edit)) => Prediction::Edit(LinearizedEdit::parse(&edit).map_err(|e| bad(e.to_string()))?),
            _ => return Err(bad("expected exactly one of predicted_sql, predicted_edit".into())),
        };
        if out.predictions.insert(rec.index, pred).is_some() {
            return Err(bad(format!("duplicate prediction for example {}", rec.index)));
        }
    }
    Ok(out)
}
