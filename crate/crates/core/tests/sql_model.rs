mod common;

use common::*;
use proptest::prelude::*;
use sqledit::sql::*;
use sqledit::{exact_set_match, ParseError};

#[test]
fn grades_example_source_clause_view() {
    let s = school();
    let q = parse_sql(GRADES_SOURCE, &s).unwrap();
    let shown = |k: ClauseKind| q.args(k).iter().map(|a| a.match_key(k).to_string()).collect::<Vec<_>>();
    assert_eq!(shown(ClauseKind::Select), ["assignments.id", "max(assignments.grade)"]);
    assert_eq!(
        shown(ClauseKind::Where),
        ["assignments.grade > value", "assignments.id not in SUBS1"]
    );
    assert_eq!(shown(ClauseKind::GroupBy), ["assignments.id"]);
    assert!(q.subquery().is_some());
    assert!(validate(&q, &s).is_empty());
}

#[test]
fn grades_example_target_renders_set_match_equal_to_caption() {
    let s = school();
    let q = parse_sql(GRADES_TARGET, &s).unwrap();
    let rendered = render_sql(&q);
    assert_eq!(
        rendered,
        "SELECT assignments.id, AVG(assignments.grade) FROM assignments WHERE assignments.grade > 20 GROUP BY assignments.id ORDER BY assignments.id"
    );
    assert!(exact_set_match(&parse_sql(&rendered, &s).unwrap(), &q));
}

#[test]
fn minimal_query() {
    let s = sqledit::Schema::new(
        "m",
        vec![sqledit::Table {
            name: "t".into(),
            columns: vec!["id".into(), "name".into()],
        }],
        vec![],
        vec![],
    )
    .unwrap();
    let q = parse_sql("SELECT id FROM t", &s).unwrap();
    assert_eq!(q.clause_kinds(), [ClauseKind::From, ClauseKind::Select]);
    assert_eq!(render_sql(&q), "SELECT t.id FROM t");
}

#[test]
fn resolution_errors() {
    let s = school();
    assert!(matches!(
        parse_sql("SELECT nope FROM assignments", &s),
        Err(ParseError::Resolution(_))
    ));
    assert!(matches!(
        parse_sql(
            "SELECT id FROM assignments JOIN graduates ON assignments.id = graduates.id",
            &s
        ),
        Err(ParseError::Resolution(_))
    ));
    assert!(matches!(
        parse_sql("SELECT id FROM nowhere", &s),
        Err(ParseError::Resolution(_))
    ));
}

#[test]
fn random_queries_are_well_formed_and_round_trip() {
    let schemas = schemas();
    let mut count = 0;
    for mut gen in generators(&schemas, 1) {
        for _ in 0..100 {
            let q = gen.query();
            assert_eq!(
                validate(&q, gen.schema),
                vec![],
                "generator produced an invalid query: {q:?}"
            );
            let text = render_sql(&q);
            let back = parse_sql(&text, gen.schema).unwrap_or_else(|e| panic!("{text}: {e}"));
            assert!(exact_set_match(&back, &q), "round trip changed {text}");
            assert_eq!(back, parse_sql(&text, gen.schema).unwrap(), "parser is deterministic");
            count += 1;
        }
    }
    assert!(count >= 500);
}

#[test]
fn seed_fixture_queries_round_trip() {
    let schemas = schemas();
    for seed in seeds(&schemas) {
        let schema = schemas.get(&seed.db_id).unwrap();
        assert!(validate(&seed.gold, schema).is_empty());
        let back = parse_sql(&render_sql(&seed.gold), schema).unwrap();
        assert!(exact_set_match(&back, &seed.gold), "{}", render_sql(&seed.gold));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonicalization_is_idempotent(seed in any::<u64>()) {
        let schemas = schemas();
        for mut gen in generators(&schemas, seed) {
            let q = gen.query();
            for (_, a) in q.arguments() {
                let once = a.canonicalize();
                prop_assert_eq!(once.canonicalize(), once.clone());
                prop_assert_eq!(a.erased().erased(), a.erased());
            }
        }
    }
}
