//! The shipped corpus must keep its published structure: case counts per
//! category, per-rule ground-truth totals, and depth sensitivity.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use tirscan_core::bench::{load_corpus, run_bench, score_findings, BenchConfig, Category};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn corpus_structure_matches_the_published_counts() {
    let cases = load_corpus(&corpus()).unwrap();
    assert_eq!(cases.len(), 112);

    let mut per_category: BTreeMap<Category, (usize, usize)> = BTreeMap::new();
    let mut per_rule_gtp: BTreeMap<u8, usize> = BTreeMap::new();
    for case in &cases {
        let entry = per_category.entry(case.category).or_default();
        entry.0 += 1;
        if case.expected.is_empty() {
            entry.1 += 1;
        }
        *per_rule_gtp.entry(case.rule_id).or_default() += case.expected.len();
    }
    // 38 basic cases: 25 misuses and 13 correct uses.
    assert_eq!(per_category[&Category::Basic], (38, 13));
    // 74 advanced: 21 two-method, 21 multi-method, 20 field-sensitive,
    // 9 false-positive tests, 3 correct uses.
    assert_eq!(per_category[&Category::InterprocTwo].0, 21);
    assert_eq!(per_category[&Category::InterprocMulti].0, 21);
    assert_eq!(per_category[&Category::FieldSensitive].0, 20);
    assert_eq!(per_category[&Category::FpTest].0, 9);
    assert_eq!(per_category[&Category::CorrectUse], (3, 3));

    let want_gtp: [(u8, usize); 16] = [
        (1, 5),
        (2, 6),
        (3, 5),
        (4, 1),
        (5, 1),
        (6, 4),
        (7, 4),
        (8, 10),
        (9, 1),
        (10, 5),
        (11, 4),
        (12, 6),
        (13, 5),
        (14, 20),
        (15, 3),
        (16, 16),
    ];
    for (rule, gtp) in want_gtp {
        assert_eq!(per_rule_gtp.get(&rule).copied().unwrap_or(0), gtp, "rule {rule} GTP");
    }
    let total: usize = per_rule_gtp.values().sum();
    assert_eq!(total, 96);
}

#[test]
fn deeper_exploration_lifts_the_misses_without_new_false_positives() {
    let deep = BenchConfig { depth: 3, ..BenchConfig::default() };
    let report = run_bench(&corpus(), &deep).unwrap();
    assert!(report.overall.tp >= 85);
    assert_eq!(report.overall.tp, 96, "all conversion misses lift at depth 3");
    assert_eq!(report.overall.fp, 0);
    assert_eq!(report.overall.fn_, 0);
}

#[test]
fn strict_matching_rules() {
    // Exact match.
    assert_eq!(score_findings(&[(1, 10)], &[(1, 10)]), (1, 0, 0));
    // Extra finding on a clean case.
    assert_eq!(score_findings(&[], &[(1, 10)]), (0, 1, 0));
    // Off-by-one line counts as both a false positive and a miss.
    assert_eq!(score_findings(&[(1, 10)], &[(1, 11)]), (0, 1, 1));
    // Rule mismatch at the same line likewise.
    assert_eq!(score_findings(&[(1, 10)], &[(2, 10)]), (0, 1, 1));
}
