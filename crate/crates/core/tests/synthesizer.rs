mod common;

use std::collections::BTreeMap;

use common::*;
use sqledit::sql::*;
use sqledit::synth::*;
use sqledit::*;

#[test]
fn every_feasible_editor_applies_to_random_queries() {
    let schemas = schemas();
    let mut applications = 0;
    let mut seen = BTreeMap::new();
    for mut gen in generators(&schemas, 31) {
        for i in 0..100 {
            let q = gen.query();
            for e in feasible_editors(&q, gen.schema) {
                let (p, fragment) = apply_editor(e, &q, gen.schema, &mut rng(i)).unwrap();
                assert!(validate(&p, gen.schema).is_empty(), "{e} broke {}", render_sql(&q));
                assert!(!fragment.is_empty() && !fragment.contains('{'), "{e}: {fragment}");
                *seen.entry(e).or_insert(0) += 1;
                applications += 1;
            }
        }
    }
    assert!(applications > 500);
    // Every editor is exercised somewhere in the random corpus.
    for e in EditorId::ALL {
        assert!(seen.contains_key(e), "{e} never feasible");
    }
}

#[test]
fn every_template_slot_is_bound() {
    let schemas = schemas();
    let mut covered = BTreeMap::new();
    for mut gen in generators(&schemas, 32) {
        for i in 0..150 {
            let q = gen.query();
            for e in feasible_editors(&q, gen.schema) {
                let t = transform_with(e, &q, gen.schema, &mut rng(i)).unwrap();
                let templates = templates(&t.template_key);
                assert!(!templates.is_empty(), "no templates for {}", t.template_key);
                for template in templates {
                    let text = t.fill(template);
                    assert!(!text.contains('{') && !text.contains('}'), "{}: {text}", t.template_key);
                }
                covered.insert(t.template_key, ());
            }
        }
    }
    for e in EditorId::ALL {
        for key in template_keys(*e) {
            assert!(covered.contains_key(&key), "template group {key} never used");
        }
    }
}

#[test]
fn editors_are_deterministic_given_the_seed() {
    let schemas = schemas();
    let seeds = seeds(&schemas);
    for seed in seeds.iter().take(30) {
        let s = schemas.get(&seed.db_id).unwrap();
        for e in feasible_editors(&seed.gold, s) {
            let a = apply_editor(e, &seed.gold, s, &mut rng(5)).unwrap();
            let b = apply_editor(e, &seed.gold, s, &mut rng(5)).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn thousand_example_run_invariants() {
    let schemas = schemas();
    let seeds = seeds(&schemas);
    let config = SynthConfig {
        n: 9,
        seed: 2024,
        ..SynthConfig::default()
    };
    let out = synthesize(&seeds, &schemas, &config).unwrap();
    assert!(out.examples.len() >= 1000, "{:?}", out.stats);
    let mut hist = BTreeMap::new();
    for ex in &out.examples {
        let s = schemas.get(&ex.db_id).unwrap();
        assert!(validate(&ex.initial_parse, s).is_empty());
        assert!(!exact_set_match(&ex.initial_parse, &ex.gold_parse));
        assert!((1..=4).contains(&ex.applied_editors.len()));
        let size = edit_size(&diff(&ex.initial_parse, &ex.gold_parse).unwrap());
        assert!(
            size >= 1 && size <= 2 * ex.introduced_ops,
            "{size} vs {}",
            ex.introduced_ops
        );
        *hist.entry(size.min(4)).or_insert(0) += 1;
        assert!(ex.feedback.matches(". ").count() + 1 >= ex.applied_editors.len());
        if ex.applied_editors.len() == 1 {
            let allowed = ex.applied_editors[0].clauses();
            let d = diff(&ex.initial_parse, &ex.gold_parse).unwrap();
            for k in d.clause_kinds() {
                assert!(allowed.contains(&k), "{} touched {k}", ex.applied_editors[0]);
            }
        }
    }
    assert_eq!(hist.keys().copied().collect::<Vec<_>>(), [1, 2, 3, 4], "{hist:?}");
    let stats = &out.stats;
    assert_eq!(stats.clones, seeds.len() * 9);
    assert_eq!(
        stats.clones,
        stats.emitted + stats.dropped_exhausted + stats.dropped_unchanged + stats.dropped_duplicate + stats.truncated
    );
}

#[test]
fn output_is_reproducible_and_independent_of_thread_count() {
    let schemas = schemas();
    let seeds = seeds(&schemas);
    let config = SynthConfig {
        n: 3,
        seed: 7,
        ..SynthConfig::default()
    };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = single
        .install(|| synthesize(&seeds, &schemas, &config).unwrap())
        .to_jsonl();
    let b = synthesize(&seeds, &schemas, &config).unwrap().to_jsonl();
    assert_eq!(a, b);
    let other = synthesize(&seeds, &schemas, &SynthConfig { seed: 8, ..config })
        .unwrap()
        .to_jsonl();
    assert_ne!(a, other);
}

#[test]
fn editor_weights_control_the_distribution() {
    let schemas = schemas();
    let s = schemas.get("concert_singer").unwrap();
    let gold = parse_sql("SELECT name, age FROM singer WHERE age > 20 ORDER BY age LIMIT 3", s).unwrap();
    let seeds = vec![Seed {
        db_id: "concert_singer".into(),
        question: "q".into(),
        gold,
    }];
    let mut weights: BTreeMap<String, f64> = EditorId::ALL.iter().map(|e| (e.id().to_string(), 0.0)).collect();
    weights.insert("remove-limit".into(), 1.0);
    weights.insert("replace-select-column".into(), 2.0);
    weights.insert("flip-orderby-direction".into(), 3.0);
    let config = SynthConfig {
        n: 6000,
        max_edits: 1,
        seed: 3,
        editor_weights: weights,
        ..SynthConfig::default()
    };
    let out = synthesize(&seeds, &schemas, &config).unwrap();
    let total: usize = out.stats.editor_counts.values().sum();
    assert_eq!(total, 6000);
    for (name, w) in [
        ("remove-limit", 1.0),
        ("replace-select-column", 2.0),
        ("flip-orderby-direction", 3.0),
    ] {
        let expected = total as f64 * w / 6.0;
        let got = out.stats.editor_counts[name] as f64;
        assert!((got - expected).abs() / expected < 0.10, "{name}: {got} vs {expected}");
    }
}

#[test]
fn dedup_drops_repeated_initial_parses() {
    let schemas = schemas();
    let seeds = seeds(&schemas);
    let config = SynthConfig {
        n: 20,
        max_edits: 1,
        seed: 1,
        dedup: true,
        ..SynthConfig::default()
    };
    let out = synthesize(&seeds[..5], &schemas, &config).unwrap();
    assert!(out.stats.dropped_duplicate > 0);
    let mut seen = std::collections::HashSet::new();
    for ex in &out.examples {
        assert!(seen.insert((ex.question.clone(), render_sql(&ex.initial_parse))));
    }
}

#[test]
fn limit_keeps_early_clones_of_every_seed() {
    let schemas = schemas();
    let seeds = seeds(&schemas);
    let base = SynthConfig {
        n: 4,
        seed: 11,
        ..SynthConfig::default()
    };
    let full = synthesize(&seeds, &schemas, &base).unwrap();
    let limit = full.examples.len() / 2;
    let capped = synthesize(
        &seeds,
        &schemas,
        &SynthConfig {
            limit: Some(limit),
            ..base.clone()
        },
    )
    .unwrap();
    assert_eq!(capped.examples.len(), limit);
    assert_eq!(capped.stats.truncated, full.examples.len() - limit);
    let kept: std::collections::HashSet<u64> = capped.examples.iter().map(|e| e.rng_seed).collect();
    for (i, seed) in seeds.iter().enumerate() {
        assert!(
            capped.examples.iter().any(|e| e.question == seed.question),
            "seed {i} missing"
        );
    }
    // The capped output is a subsequence of the full output.
    let full_kept: Vec<u64> = full
        .examples
        .iter()
        .map(|e| e.rng_seed)
        .filter(|s| kept.contains(s))
        .collect();
    assert_eq!(
        full_kept,
        capped.examples.iter().map(|e| e.rng_seed).collect::<Vec<_>>()
    );
    let roomy = synthesize(
        &seeds,
        &schemas,
        &SynthConfig {
            limit: Some(usize::MAX),
            ..base
        },
    )
    .unwrap();
    assert_eq!(roomy.to_jsonl(), full.to_jsonl());
}

#[test]
fn invalid_seeds_are_rejected() {
    let schemas = schemas();
    let err = load_seeds(
        r#"{"db_id": "school", "question": "q", "gold_sql": "SELECT nope FROM graduates"}"#,
        &schemas,
    );
    assert!(matches!(err, Err(SynthError::SeedValidation { index: 0, .. })));
    let err = load_seeds(
        r#"{"db_id": "nowhere", "question": "q", "gold_sql": "SELECT 1"}"#,
        &schemas,
    );
    assert!(matches!(err, Err(SynthError::SeedValidation { .. })));
}

#[test]
fn jsonl_records_carry_the_documented_fields() {
    let schemas = schemas();
    let seeds = seeds(&schemas);
    let out = synthesize(
        &seeds[..3],
        &schemas,
        &SynthConfig {
            n: 2,
            seed: 9,
            ..SynthConfig::default()
        },
    )
    .unwrap();
    for line in out.to_jsonl().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            [
                "applied_editors",
                "db_id",
                "feedback",
                "gold_sql",
                "initial_sql",
                "question",
                "seed"
            ]
        );
    }
}
