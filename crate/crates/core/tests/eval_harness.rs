mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use sqledit::eval::*;
use sqledit::sql::*;
use sqledit::*;

/// Predicts a fixed parse for chosen indices, identity elsewhere.
struct HandBuilt(BTreeMap<usize, SqlQuery>);

impl Corrector for HandBuilt {
    fn name(&self) -> String {
        "hand_built".into()
    }

    fn predict(&self, index: usize, ex: &EvalExample, _: &Schema) -> Prediction {
        Prediction::Query(self.0.get(&index).cloned().unwrap_or_else(|| ex.initial.clone()))
    }
}

#[test]
fn gold_oracle_scores_perfectly() {
    let schemas = schemas();
    let set = eval_set(&schemas);
    let r = evaluate(&GoldOracle, &set, &schemas).unwrap();
    assert_eq!(r.examples, 10);
    assert_eq!(r.correction_accuracy, 1.0);
    assert_eq!(r.progress, 1.0);
    assert_eq!(r.edit_up, 0.0);
    assert_eq!(r.edit_down, 1.0);
    assert_eq!(r.failed_predictions, 0);
}

#[test]
fn identity_scores_zero() {
    let schemas = schemas();
    let set = eval_set(&schemas);
    let r = evaluate(&Identity, &set, &schemas).unwrap();
    assert_eq!(r.correction_accuracy, 0.0);
    assert_eq!(r.progress, 0.0);
    assert_eq!(r.edit_down, 0.0);
    assert_eq!(r.edit_up, 0.0);
}

#[test]
fn four_to_one_contributes_three_quarters() {
    let schemas = schemas();
    let set = eval_set(&schemas);
    let s = school();
    let pred = parse_sql(
        "SELECT id, AVG(grade) FROM assignments WHERE grade > 20 GROUP BY id",
        &s,
    )
    .unwrap();
    let r = evaluate(&HandBuilt(BTreeMap::from([(0, pred)])), &set, &schemas).unwrap();
    let first = &r.records[0];
    assert_eq!((first.initial_size, first.predicted_size), (4, 1));
    assert_eq!(first.progress, Some(0.75));
    assert_eq!(r.progress, 0.075);
    assert_eq!(r.edit_down, 0.1);
    assert_eq!(r.transition.counts[3][1], 1);
}

#[test]
fn progress_can_be_negative() {
    let schemas = schemas();
    let set = eval_set(&schemas);
    let s = school();
    let worse = parse_sql(
        "SELECT id, MIN(grade) FROM assignments WHERE grade > 20 AND course = 'x' AND id NOT IN (SELECT id FROM graduates) GROUP BY id LIMIT 3",
        &s,
    )
    .unwrap();
    let r = evaluate(&HandBuilt(BTreeMap::from([(0, worse)])), &set, &schemas).unwrap();
    let first = &r.records[0];
    assert!(first.predicted_size > first.initial_size);
    assert!(first.progress.unwrap() < 0.0);
    assert!(r.progress < 0.0);
    assert_eq!(r.edit_up, 0.1);
}

#[test]
fn initially_correct_examples_are_excluded_from_progress() {
    let schemas = schemas();
    let mut set = eval_set(&schemas);
    set[1].initial = set[1].gold.clone();
    let r = evaluate(&GoldOracle, &set, &schemas).unwrap();
    assert_eq!(r.initially_correct, 1);
    assert_eq!(r.scored, 9);
    assert_eq!(r.records[1].progress, None);
    assert_eq!(r.progress, 1.0);
}

#[test]
fn failed_predictions_fall_back_to_the_initial_parse() {
    let schemas = schemas();
    let set = eval_set(&schemas);
    let preds = load_predictions(
        "{\"index\": 0, \"predicted_sql\": \"SELECT nope FROM assignments\"}\n\
         {\"index\": 1, \"predicted_edit\": \"<select> add frobnicate </select>\"}\n",
    )
    .unwrap();
    let r = evaluate(&preds, &set, &schemas).unwrap();
    assert_eq!(r.failed_predictions, 10);
    assert_eq!(r.progress, 0.0);
    assert!(r.records.iter().all(|x| x.predicted_size == x.initial_size));
}

#[test]
fn offline_edit_predictions_apply_to_the_initial_parse() {
    let schemas = schemas();
    let set = eval_set(&schemas);
    let s = school();
    let edit = linearize(&diff(&set[0].initial, &set[0].gold).unwrap(), &s);
    let jsonl = serde_json::json!({"index": 0, "predicted_edit": edit.to_string()}).to_string();
    let r = evaluate(&load_predictions(&jsonl).unwrap(), &set, &schemas).unwrap();
    assert!(r.records[0].matched);
    assert_eq!(r.failed_predictions, 9);
}

#[test]
fn malformed_prediction_files_are_rejected() {
    for text in [
        "{\"index\": 0}",
        "{\"index\": 0, \"predicted_sql\": \"SELECT 1\", \"predicted_edit\": \"\"}",
        "{\"index\": 0, \"predicted_sql\": \"a\"}\n{\"index\": 0, \"predicted_sql\": \"b\"}",
        "not json",
    ] {
        assert!(
            matches!(load_predictions(text), Err(EvalError::BadRecord { .. })),
            "{text}"
        );
    }
}

#[test]
fn random_single_edit_is_reproducible_and_worse_than_the_oracle() {
    let schemas = schemas();
    let set = eval_set(&schemas);
    let a = evaluate(&RandomSingleEdit { seed: 4 }, &set, &schemas).unwrap();
    let b = evaluate(&RandomSingleEdit { seed: 4 }, &set, &schemas).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert!(a.progress < 1.0);
}

#[test]
fn breakdowns_cover_every_example() {
    let schemas = schemas();
    let set = eval_set(&schemas);
    let r = evaluate(&RandomSingleEdit { seed: 1 }, &set, &schemas).unwrap();
    let b = &r.breakdowns;
    for rows in [&b.feedback_length, &b.explanation_length] {
        assert_eq!(rows.iter().map(|x| x.examples).sum::<usize>(), 10);
        for row in rows.iter() {
            let (lo, hi) = row.bin.split_once('-').unwrap();
            assert_eq!(hi.parse::<usize>().unwrap() - lo.parse::<usize>().unwrap(), 3);
        }
    }
    assert_eq!(
        b.edit_size.iter().map(|x| x.bin.as_str()).collect::<Vec<_>>(),
        ["1", "2", "3", "4", "5+"]
    );
    assert_eq!(b.edit_size.iter().map(|x| x.examples).sum::<usize>(), r.scored);
    assert_eq!(r.transition.columns, ["0", "1", "2", "3", "4", "5+"]);
    assert_eq!(r.transition.counts.iter().flatten().sum::<usize>(), r.scored);
    let csv = r.breakdowns_csv();
    assert!(csv.starts_with("breakdown,bin,examples,accuracy,scored,edit_down,edit_up,progress\n"));
    assert!(csv.contains("transition,4->0,"));
}

#[test]
fn report_does_not_depend_on_thread_count() {
    let schemas = schemas();
    let set = eval_set(&schemas);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let one = pool.install(|| evaluate(&RandomSingleEdit { seed: 2 }, &set, &schemas).unwrap());
    let many = evaluate(&RandomSingleEdit { seed: 2 }, &set, &schemas).unwrap();
    assert_eq!(one.to_json(), many.to_json());
}

#[test]
fn test_sets_load_from_jsonl() {
    let schemas = schemas();
    let line = serde_json::json!({
        "db_id": "school",
        "question": "q",
        "initial_sql": GRADES_SOURCE,
        "feedback": "f",
        "gold_sql": GRADES_TARGET,
    });
    let set = load_test_set(&format!("{line}\n\n{line}\n"), &schemas).unwrap();
    assert_eq!(set.len(), 2);
    assert!(load_test_set("{\"db_id\": \"school\"}", &schemas).is_err());
    assert!(matches!(
        evaluate(&Identity, &[], &schemas),
        Err(EvalError::EmptyTestSet)
    ));
}

fn corpus(seed: u64) -> Vec<SqlQuery> {
    let schemas = schemas();
    let s = schemas.get("employees").unwrap();
    let mut gen = QueryGen::new(s, seed);
    let base = gen.query();
    let mutated = gen.mutate(&base);
    let perturbed = gen.perturb_values(&base);
    vec![base, mutated, perturbed, gen.query()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_set_match_is_an_equivalence(seed in any::<u64>()) {
        let qs = corpus(seed);
        for a in &qs {
            prop_assert!(exact_set_match(a, a));
            for b in &qs {
                prop_assert_eq!(exact_set_match(a, b), exact_set_match(b, a));
                prop_assert_eq!(exact_set_match(a, b), edit_size(&diff(a, b).unwrap()) == 0);
                for c in &qs {
                    if exact_set_match(a, b) && exact_set_match(b, c) {
                        prop_assert!(exact_set_match(a, c));
                    }
                }
            }
        }
    }
}
