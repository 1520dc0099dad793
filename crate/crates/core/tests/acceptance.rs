//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`.

mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::{backward_closure, brute_force_def_use, forward_closure, random_fixture};
use tirscan_core::bench::{run_bench, BenchConfig, Category};
use tirscan_core::callgraph::build_call_graph;
use tirscan_core::ir::{parse_program, Op};
use tirscan_core::refine::Ri;
use tirscan_core::report::{emit_json, run, RunConfig};
use tirscan_core::rules::{check_rule, rule, RuleRunConfig};
use tirscan_core::slice::{intra_backward_slice, intra_forward_slice, SlicerConfig, SlicingCriterion};
use tirscan_core::synth;

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn verdict(name: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {name}: {status} — {detail}");
    assert!(ok, "criterion {name} failed: {detail}");
}

/// Criterion 1: benchmark parity on the six common rules at defaults.
#[test]
fn criterion_1_benchmark_parity_common_rules() {
    let start = Instant::now();
    let config = BenchConfig {
        rules: BTreeSet::from([1, 2, 3, 11, 14, 16]),
        ..BenchConfig::default()
    };
    let report = run_bench(&repo_path("corpus"), &config).unwrap();
    let elapsed = start.elapsed();
    let basic = report.per_category[&Category::Basic];
    let two = report.per_category[&Category::InterprocTwo];
    let multi = report.per_category[&Category::InterprocMulti];
    let field = report.per_category[&Category::FieldSensitive];
    let fp = report.per_category[&Category::FpTest];
    let ok = basic.tp == 14
        && basic.fp == 0
        && basic.fn_ == 0
        && two.tp == 13
        && two.fp == 0
        && multi.tp == 13
        && multi.fp == 0
        && field.tp == 13
        && field.fp == 0
        && fp.tp == 3
        && fp.fp == 0
        && elapsed < Duration::from_secs(30);
    verdict(
        "1 (six-rule benchmark parity)",
        ok,
        &format!(
            "basic {}/{}/{}, two {}/{}, multi {}/{}, field {}/{}, fpTest {}/{}, {:?}",
            basic.tp, basic.fp, basic.fn_, two.tp, two.fp, multi.tp, multi.fp, field.tp, field.fp,
            fp.tp, fp.fp, elapsed
        ),
    );
}

/// Criterion 2: full 16-rule parity with the per-rule true-positive column.
#[test]
fn criterion_2_full_table_parity() {
    let start = Instant::now();
    let report = run_bench(&repo_path("corpus"), &BenchConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let per_rule_tp: Vec<usize> = (1..=16).map(|r| report.per_rule[&r].tp).collect();
    let want_tp = vec![5, 6, 5, 1, 1, 4, 4, 5, 1, 3, 4, 4, 4, 20, 2, 16];
    let ok = report.overall.gtp == 96
        && report.overall.tp == 85
        && report.overall.fp == 0
        && report.overall.fn_ == 11
        && per_rule_tp == want_tp
        && elapsed < Duration::from_secs(60);
    verdict(
        "2 (full-table parity)",
        ok,
        &format!(
            "GTP {} TP {} FP {} FN {} per-rule {:?} in {:?}",
            report.overall.gtp, report.overall.tp, report.overall.fp, report.overall.fn_,
            per_rule_tp, elapsed
        ),
    );
}

/// Criterion 3: the corpus-wide alert-reduction percentages are not
/// reproducible at desk scale; substitute property on a 200-program
/// synthetic corpus with planted pseudo-influences of every kind.
#[test]
fn criterion_3_refinement_effect() {
    let spec = rule(1).unwrap();
    let mut total_removed = 0usize;
    for index in 0..200 {
        let planted = synth::refinement_case(index);
        let program = parse_program(&planted.source).unwrap();
        let graph = build_call_graph(&program);
        let refined = check_rule(&program, &graph, &spec, &RuleRunConfig::default());
        // Exactly the planted true positives survive.
        let mut got: Vec<(u8, u32, String)> = refined
            .findings
            .iter()
            .map(|f| (f.rule_id, f.line, f.evidence.clone()))
            .collect();
        got.sort();
        let mut want = planted.true_positives.clone();
        want.sort();
        assert_eq!(got, want, "case {index}: surviving findings");
        // Every planted pseudo-influence is removed with the right attribution.
        for (ri, evidence) in &planted.pseudo_influences {
            let hit = refined.removal_log.entries.iter().any(|e| {
                e.ri == *ri && e.candidate.value.display_text() == *evidence
            });
            assert!(hit, "case {index}: pseudo `{evidence}` not attributed to {ri:?}");
        }
        // No planted true positive was removed by any pass.
        for (_, _, evidence) in &planted.true_positives {
            let removed = refined
                .removal_log
                .entries
                .iter()
                .any(|e| e.candidate.value.display_text() == *evidence);
            assert!(!removed, "case {index}: true positive `{evidence}` removed");
        }
        // Monotonicity: refined findings are a subset of the raw findings.
        let raw_cfg = RuleRunConfig { refinements_enabled: false, ..RuleRunConfig::default() };
        let raw = check_rule(&program, &graph, &spec, &raw_cfg);
        for f in &refined.findings {
            assert!(raw.findings.contains(f), "case {index}: refined ⊄ raw");
        }
        total_removed += refined.removal_log.entries.len();
    }
    // Aggregated breakdown matches the planting plan: I:200 II:200 III:400
    // IV:400 V:200.
    let counts: Vec<usize> = {
        let mut per_ri = vec![0usize; 5];
        for index in 0..200 {
            let planted = synth::refinement_case(index);
            let program = parse_program(&planted.source).unwrap();
            let graph = build_call_graph(&program);
            let out = check_rule(&program, &graph, &spec, &RuleRunConfig::default());
            for (i, ri) in Ri::ALL.iter().enumerate() {
                per_ri[i] += out.removal_log.count_for(*ri);
            }
        }
        per_ri
    };
    let ok = counts == vec![200, 200, 400, 400, 200];
    verdict(
        "3 (refinement effect on synthetic corpus)",
        ok,
        &format!("200 programs, removals per pass {counts:?}, total {total_removed}"),
    );
}

/// Criterion 4: backward and forward slices equal the brute-force def-use
/// closure oracle on 100 random fixtures (≤ 4 methods, ≤ 40 instructions).
#[test]
fn criterion_4_slice_oracle_equivalence() {
    let cfg = SlicerConfig::with_depth(0);
    let mut checked = 0usize;
    for salt in 0..100u64 {
        let methods = 1 + (salt % 4) as usize;
        let instructions = 8 + (salt % 20) as usize;
        let src = random_fixture(salt.wrapping_add(42), methods, instructions);
        let program = parse_program(&src).unwrap();
        let total: usize = program.all_methods().map(|(_, m)| m.body().len()).sum();
        assert!(total <= 40, "fixture {salt} has {total} instructions");
        for (_, method) in program.all_methods() {
            let edges = brute_force_def_use(method, 2);
            for (i, instr) in method.body().iter().enumerate() {
                if !matches!(instr.op, Op::Assign { .. } | Op::NewArray { .. } | Op::Invoke(_)) {
                    continue;
                }
                let criterion = SlicingCriterion::IntraAssign {
                    method: method.sig.clone(),
                    instruction_index: i,
                };
                let slice = intra_backward_slice(&program, &method.sig, &criterion, &cfg).unwrap();
                let got: BTreeSet<usize> = slice
                    .instructions
                    .iter()
                    .filter(|(m, _)| m == &method.sig)
                    .map(|(_, idx)| *idx)
                    .collect();
                assert_eq!(got, backward_closure(&edges, &BTreeSet::from([i])), "bwd {salt}@{i}");
                let fwd = intra_forward_slice(method, i).unwrap();
                let got_fwd: BTreeSet<usize> = fwd.influenced.iter().map(|(_, x)| *x).collect();
                assert_eq!(got_fwd, forward_closure(&edges, i), "fwd {salt}@{i}");
                checked += 2;
            }
        }
    }
    verdict(
        "4 (slice-oracle equivalence)",
        checked > 0,
        &format!("{checked} slice/oracle comparisons, zero counterexamples"),
    );
}

/// Criterion 5: the documented limitations reproduce exactly — the
/// infeasible-path alert fires, and the hex-conversion constant is missed at
/// depth 1 but found from depth 2 on.
#[test]
fn criterion_5_known_limitations() {
    let infeasible = RunConfig::for_files(vec![repo_path("fixtures/infeasible.tir")]);
    let report = run(&infeasible).unwrap();
    let fp_ok = report.findings.len() == 1
        && report.findings[0].rule_id == 13
        && report.findings[0].evidence == "0";

    let mut hex = RunConfig::for_files(vec![repo_path("fixtures/hexconv.tir")]);
    hex.rules = BTreeSet::from([1]);
    let depth1 = run(&hex).unwrap();
    hex.depth = 2;
    let depth2 = run(&hex).unwrap();
    let fn_ok = depth1.findings.is_empty()
        && depth2.findings.len() == 1
        && depth2.findings[0].evidence == "6A5B7C8A";
    verdict(
        "5 (known limitations reproduced)",
        fp_ok && fn_ok,
        &format!(
            "infeasible-path rule-13 alert: {fp_ok}; hex miss@1 / hit@2: {fn_ok}"
        ),
    );
}

/// Criterion 6: the two-class example end to end.
#[test]
fn criterion_6_figure_example_end_to_end() {
    let config = RunConfig::for_files(vec![repo_path("fixtures/fig1.tir")]);
    let refined = run(&config).unwrap();
    let exact = refined.findings.len() == 1
        && refined.findings[0].rule_id == 1
        && refined.findings[0].evidence == "defaultkey"
        && refined.findings[0].severity == tirscan_core::rules::Severity::H;
    let mut raw_cfg = config.clone();
    raw_cfg.refinements = false;
    let raw = run(&raw_cfg).unwrap();
    let ok = exact && raw.findings.len() >= 4;
    verdict(
        "6 (two-class example)",
        ok,
        &format!(
            "refined: {} finding(s) [{}], raw candidates: {}",
            refined.findings.len(),
            refined.findings.first().map(|f| f.evidence.as_str()).unwrap_or(""),
            raw.findings.len()
        ),
    );
}

/// Criterion 7: byte-identical machine reports across runs of the
/// multi-root manifest; shared-dependency findings counted once.
#[test]
fn criterion_7_determinism_and_dedup() {
    let config = RunConfig::for_manifest(repo_path("fixtures/ranger/project.manifest"));
    let a = run(&config).unwrap();
    let b = run(&config).unwrap();
    let identical = emit_json(&a) == emit_json(&b);
    let md5_count = a.findings.iter().filter(|f| f.evidence == "MD5").count();
    let ok = identical && md5_count == 1;
    verdict(
        "7 (determinism and cross-root dedup)",
        ok,
        &format!("byte-identical: {identical}, shared finding count: {md5_count}"),
    );
}

/// Criterion 8: a generated 50-class project with ~5k instructions analyzes
/// in under 10 s with all 16 rules, and a zero budget degrades gracefully.
#[test]
fn criterion_8_scale_and_budget() {
    let project = synth::large_project(50, 100);
    let program = parse_program(&project.source).unwrap();
    let instruction_count: usize = program.all_methods().map(|(_, m)| m.body().len()).sum();
    assert!(instruction_count >= 5000, "generated {instruction_count} instructions");
    let dir = std::env::temp_dir().join("tirscan-acceptance-scale");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("project.tir");
    std::fs::write(&file, &project.source).unwrap();

    let start = Instant::now();
    let config = RunConfig::for_files(vec![file.clone()]);
    let report = run(&config).unwrap();
    let elapsed = start.elapsed();
    let mut got: Vec<(u8, u32)> = report.findings.iter().map(|f| (f.rule_id, f.line)).collect();
    got.sort();
    let mut want = project.expected.clone();
    want.sort();
    assert_eq!(got, want, "planted misuses in the generated project");

    let mut budgeted = RunConfig::for_files(vec![file]);
    budgeted.budget = Some(Duration::from_secs(0));
    let partial = run(&budgeted).unwrap();
    let graceful = partial.findings.is_empty()
        && partial.partial_roots.len() == 1
        && partial.partial_roots[0].completed_rules.is_empty();
    let ok = elapsed < Duration::from_secs(10) && graceful;
    verdict(
        "8 (scale and budget degradation)",
        ok,
        &format!(
            "{instruction_count} instructions in {elapsed:?}; zero-budget partial: {graceful}"
        ),
    );
}
