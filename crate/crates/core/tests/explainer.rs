mod common;

use common::*;
use sqledit::sql::*;
use sqledit::{explain, SqlQuery};

fn check(q: &SqlQuery, schema: &sqledit::Schema) {
    let e = explain(q, schema);
    let numbers: Vec<usize> = e.steps.iter().map(|s| s.number).collect();
    assert_eq!(numbers, (1..=e.steps.len()).collect::<Vec<_>>(), "steps are contiguous");

    let mut expected = q.clause_kinds();
    if let Some(sub) = q.subquery() {
        expected.extend(sub.clause_kinds().into_iter().filter(|k| *k != ClauseKind::Subs));
    }
    expected.sort();
    expected.dedup();
    assert_eq!(e.realized(), expected, "{}", render_sql(q));

    let text = e.sentences().join(" ");
    let upper = text.to_uppercase();
    assert!(!upper.contains("GROUP BY") && !upper.contains("HAVING"), "{text}");
    let mut names: Vec<&str> = q.tables().collect();
    let cols: Vec<Column> = q
        .arguments()
        .flat_map(|(_, a)| a.columns().into_iter().cloned())
        .collect();
    names.extend(cols.iter().filter_map(|c| match c {
        Column::Named { column, .. } => Some(column.as_str()),
        Column::Star => None,
    }));
    for n in names {
        assert!(text.contains(n), "`{n}` missing from: {text}");
    }
    assert_eq!(e, explain(q, schema), "deterministic");
}

#[test]
fn fixture_seeds_are_fully_explained() {
    let schemas = schemas();
    for seed in seeds(&schemas) {
        check(&seed.gold, schemas.get(&seed.db_id).unwrap());
    }
}

#[test]
fn random_queries_are_fully_explained() {
    let schemas = schemas();
    for mut gen in generators(&schemas, 21) {
        for _ in 0..60 {
            let q = gen.query();
            check(&q, gen.schema);
        }
    }
}

#[test]
fn group_by_reads_for_each() {
    let schemas = schemas();
    let s = schemas.get("voter").unwrap();
    let q = parse_sql("SELECT vote_id, count(*) FROM votes GROUP BY vote_id", s).unwrap();
    let e = explain(&q, s);
    assert!(
        e.steps[0].text.starts_with("for each vote_id, find "),
        "{:?}",
        e.sentences()
    );
    assert!(e.steps[0].text.contains("VOTES"), "exact schema spelling");
}

#[test]
fn grades_example_explanation_length_is_stable() {
    let s = school();
    let q = parse_sql(GRADES_SOURCE, &s).unwrap();
    let a = explain(&q, &s);
    let b = explain(&q, &s);
    assert_eq!(a.to_json().to_string(), b.to_json().to_string());
    assert_eq!(a.token_len(), b.token_len());
    assert!(a.sentences()[0].contains("graduates"));
    assert!(a.steps.iter().any(|s| s.text.contains("the results of step 1")));
}
