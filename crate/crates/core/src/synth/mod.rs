//! Training-data synthesis.
//!
//! Every seed (question, gold query) is cloned N times. Each clone receives
//! 1..=max_edits sequential edits from randomly chosen feasible editors; the
//! edited query becomes the erroneous initial parse and the editors' feedback
//! fragments, joined in application order, describe how to get back to gold.
//! Each clone draws its randomness from (global seed, seed index, clone
//! index), so output is reproducible and independent of parallelism.

mod editors;

use std::collections::{BTreeMap, HashSet};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use editors::{apply_editor, feasible_editors, template_keys, templates, transform_with, EditorId, Transformation};

use crate::edit::{diff, edit_size};
use crate::error::SynthError;
use crate::eval::exact_set_match;
use crate::schema::SchemaSet;
use crate::sql::{parse_sql, render_sql, validate, SqlQuery};

/// A (question, gold query) pair to synthesize from.
#[derive(Debug, Clone)]
pub struct Seed {
    pub db_id: String,
    pub question: String,
    pub gold: SqlQuery,
}

/// One line of a seed file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRecord {
    pub db_id: String,
    pub question: String,
    pub gold_sql: String,
}

fn default_clones() -> usize {
    1
}

fn default_max_edits() -> usize {
    4
}

/// Synthesis settings; every field has a default so partial JSON configs work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    /// Clones per seed (N).
    #[serde(default = "default_clones")]
    pub n: usize,
    /// Upper bound of the uniform number of edits per clone.
    #[serde(default = "default_max_edits")]
    pub max_edits: usize,
    #[serde(default)]
    pub seed: u64,
    /// Per-editor sampling weights; editors not listed weigh 1.
    #[serde(default)]
    pub editor_weights: BTreeMap<String, f64>,
    /// Drop clones whose initial parse repeats one already emitted for the
    /// same seed.
    #[serde(default)]
    pub dedup: bool,
    /// Cap on emitted examples. Lower clone indices are kept first, so a
    /// capped run still draws from every seed.
    #[serde(default)]
    pub limit: Option<usize>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: default_clones(),
            max_edits: default_max_edits(),
            seed: 0,
            editor_weights: BTreeMap::new(),
            dedup: false,
            limit: None,
        }
    }
}

impl SynthConfig {
    fn weights(&self) -> Result<Vec<f64>, SynthError> {
        for (name, w) in &self.editor_weights {
            name.parse::<EditorId>()?;
            if !w.is_finite() || *w < 0.0 {
                return Err(SynthError::Config(format!(
                    "weight of `{name}` must be a non-negative number"
                )));
            }
        }
        if self.max_edits == 0 {
            return Err(SynthError::Config("max_edits must be at least 1".into()));
        }
        Ok(EditorId::ALL
            .iter()
            .map(|e| self.editor_weights.get(e.id()).copied().unwrap_or(1.0))
            .collect())
    }
}

/// A synthesized (initial parse, feedback, gold parse) example.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthExample {
    pub db_id: String,
    pub question: String,
    pub initial_parse: SqlQuery,
    pub feedback: String,
    pub gold_parse: SqlQuery,
    pub applied_editors: Vec<EditorId>,
    /// Seed of the clone's random stream.
    pub rng_seed: u64,
    /// Total size of the edits that undo each editor step, measured from the corrupted side.
    pub introduced_ops: usize,
}

/// One line of a synthesized example file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRecord {
    pub db_id: String,
    pub question: String,
    pub initial_sql: String,
    pub feedback: String,
    pub gold_sql: String,
    pub applied_editors: Vec<String>,
    pub seed: u64,
}

impl SynthExample {
    pub fn to_record(&self) -> SynthRecord {
        SynthRecord {
            db_id: self.db_id.clone(),
            question: self.question.clone(),
            initial_sql: render_sql(&self.initial_parse),
            feedback: self.feedback.clone(),
            gold_sql: render_sql(&self.gold_parse),
            applied_editors: self.applied_editors.iter().map(|e| e.id().to_string()).collect(),
            seed: self.rng_seed,
        }
    }
}

/// Counts of a synthesis run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SynthStats {
    pub seeds: usize,
    pub clones: usize,
    pub emitted: usize,
    /// Clones dropped because no editor was feasible mid-sequence.
    pub dropped_exhausted: usize,
    /// Clones whose edits cancelled out (initial matches gold).
    pub dropped_unchanged: usize,
    pub dropped_duplicate: usize,
    /// Examples cut by the configured limit.
    pub truncated: usize,
    /// Applications per editor over emitted examples.
    pub editor_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub examples: Vec<SynthExample>,
    pub stats: SynthStats,
}

impl SynthOutput {
    /// JSONL text, one example per line, in seed then clone order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for ex in &self.examples {
            out.push_str(&serde_json::to_string(&ex.to_record()).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of clone `clone` of seed `seed_index` under the global seed.
pub fn clone_seed(global: u64, seed_index: usize, clone: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(global) ^ seed_index as u64) ^ clone as u64)
}

/// Parses and validates a seed file.
pub fn load_seeds(jsonl: &str, schemas: &SchemaSet) -> Result<Vec<Seed>, SynthError> {
    let mut seeds = Vec::new();
    for (index, line) in jsonl.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |db_id: &str, reason: String| SynthError::SeedValidation {
            index,
            db_id: db_id.to_string(),
            reason,
        };
        let rec: SeedRecord = serde_json::from_str(line).map_err(|e| bad("?", e.to_string()))?;
        let schema = schemas
            .get(&rec.db_id)
            .ok_or_else(|| bad(&rec.db_id, "unknown database".into()))?;
        let gold = parse_sql(&rec.gold_sql, schema).map_err(|e| bad(&rec.db_id, e.to_string()))?;
        seeds.push(Seed {
            db_id: rec.db_id,
            question: rec.question,
            gold,
        });
    }
    Ok(seeds)
}

enum CloneResult {
    Emitted(Box<SynthExample>),
    Exhausted,
    Unchanged,
}

fn synthesize_clone(
    seed: &Seed,
    schema: &crate::schema::Schema,
    config: &SynthConfig,
    weights: &[f64],
    rng_seed: u64,
) -> Result<CloneResult, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let k = rng.gen_range(1..=config.max_edits);
    let mut query = seed.gold.clone();
    let mut fragments = Vec::with_capacity(k);
    let mut applied = Vec::with_capacity(k);
    let mut introduced = 0;
    for _ in 0..k {
        let feasible: Vec<(EditorId, f64)> = feasible_editors(&query, schema)
            .into_iter()
            .map(|e| {
                (
                    e,
                    weights[EditorId::ALL.iter().position(|x| *x == e).expect("catalog editor")],
                )
            })
            .filter(|(_, w)| *w > 0.0)
            .collect();
        if feasible.is_empty() {
            return Ok(CloneResult::Exhausted);
        }
        let dist = WeightedIndex::new(feasible.iter().map(|(_, w)| *w)).expect("positive weights");
        let editor = feasible[dist.sample(&mut rng)].0;
        let (next, fragment) = apply_editor(editor, &query, schema, &mut rng)?;
        introduced += edit_size(&diff(&next, &query).expect("same database"));
        query = next;
        fragments.push(fragment);
        applied.push(editor);
    }
    if exact_set_match(&query, &seed.gold) {
        return Ok(CloneResult::Unchanged);
    }
    Ok(CloneResult::Emitted(Box::new(SynthExample {
        db_id: seed.db_id.clone(),
        question: seed.question.clone(),
        initial_parse: query,
        feedback: fragments.join(". "),
        gold_parse: seed.gold.clone(),
        applied_editors: applied,
        rng_seed,
        introduced_ops: introduced,
    })))
}

/// Runs synthesis over all seeds, fanning out across the current rayon pool.
pub fn synthesize(seeds: &[Seed], schemas: &SchemaSet, config: &SynthConfig) -> Result<SynthOutput, SynthError> {
    let weights = config.weights()?;
    for (index, seed) in seeds.iter().enumerate() {
        let bad = |reason: String| SynthError::SeedValidation {
            index,
            db_id: seed.db_id.clone(),
            reason,
        };
        let schema = schemas.get(&seed.db_id).ok_or_else(|| bad("unknown database".into()))?;
        let violations = validate(&seed.gold, schema);
        if !violations.is_empty() {
            let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(bad(text.join("; ")));
        }
    }

    type Emitted = Vec<(usize, SynthExample)>;
    let per_seed: Vec<Result<(Emitted, SynthStats), SynthError>> = seeds
        .par_iter()
        .enumerate()
        .map(|(index, seed)| {
            let schema = schemas.get(&seed.db_id).expect("checked above");
            let mut stats = SynthStats::default();
            let mut examples = Vec::new();
            let mut seen = HashSet::new();
            for clone in 0..config.n {
                stats.clones += 1;
                match synthesize_clone(seed, schema, config, &weights, clone_seed(config.seed, index, clone))? {
                    CloneResult::Exhausted => stats.dropped_exhausted += 1,
                    CloneResult::Unchanged => stats.dropped_unchanged += 1,
                    CloneResult::Emitted(ex) => {
                        if config.dedup && !seen.insert(render_sql(&ex.initial_parse)) {
                            stats.dropped_duplicate += 1;
                            continue;
                        }
                        examples.push((clone, *ex));
                    }
                }
            }
            Ok((examples, stats))
        })
        .collect();

    let mut stats = SynthStats {
        seeds: seeds.len(),
        ..SynthStats::default()
    };
    let mut emitted: Vec<Emitted> = Vec::with_capacity(seeds.len());
    for result in per_seed {
        let (examples, s) = result?;
        stats.clones += s.clones;
        stats.dropped_exhausted += s.dropped_exhausted;
        stats.dropped_unchanged += s.dropped_unchanged;
        stats.dropped_duplicate += s.dropped_duplicate;
        emitted.push(examples);
    }
    if let Some(limit) = config.limit {
        // Keep the `limit` smallest (clone, seed) keys.
        let mut keys: Vec<(usize, usize)> = emitted
            .iter()
            .enumerate()
            .flat_map(|(seed, exs)| exs.iter().map(move |(clone, _)| (*clone, seed)))
            .collect();
        if keys.len() > limit {
            stats.truncated = keys.len() - limit;
            keys.select_nth_unstable(limit);
            let cut = keys[limit];
            for (seed, exs) in emitted.iter_mut().enumerate() {
                exs.retain(|(clone, _)| (*clone, seed) < cut);
            }
        }
    }
    let examples: Vec<SynthExample> = emitted.into_iter().flatten().map(|(_, ex)| ex).collect();
    for ex in &examples {
        for e in &ex.applied_editors {
            *stats.editor_counts.entry(e.id().to_string()).or_default() += 1;
        }
    }
    stats.emitted = examples.len();
    Ok(SynthOutput { examples, stats })
}
