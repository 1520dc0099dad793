//! End-to-end behavior on the shipped fixture programs: the two-class
//! encryptor example, the hex-conversion miss, the infeasible-path alert and
//! the multi-root manifest.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use tirscan_core::callgraph::build_call_graph;
use tirscan_core::ir::{parse_program_named, MethodSig};
use tirscan_core::report::{emit_json, run, RunConfig};
use tirscan_core::rules::Severity;
use tirscan_core::slice::{inter_backward_slices, SlicerConfig, SlicingCriterion};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn load(name: &str) -> tirscan_core::ir::Program {
    let path = fixture(name);
    let text = std::fs::read_to_string(&path).unwrap();
    parse_program_named(&text, &path.to_string_lossy()).unwrap()
}

#[test]
fn encryptor_example_yields_exactly_the_default_key() {
    let config = RunConfig::for_files(vec![fixture("fig1.tir")]);
    let report = run(&config).unwrap();
    assert_eq!(report.findings.len(), 1, "findings: {:#?}", report.findings);
    let f = &report.findings[0];
    assert_eq!(f.rule_id, 1);
    assert_eq!(f.evidence, "defaultkey");
    assert_eq!(f.severity, Severity::H);
    assert_eq!(f.class, "PasswordEncryptor");
    assert_eq!(f.method, "getKey");
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn encryptor_example_without_refinements_reports_the_pseudo_influences() {
    let mut config = RunConfig::for_files(vec![fixture("fig1.tir")]);
    config.refinements = false;
    let report = run(&config).unwrap();
    assert!(report.findings.len() >= 4, "findings: {:#?}", report.findings);
    let evidences: BTreeSet<&str> =
        report.findings.iter().map(|f| f.evidence.as_str()).collect();
    for expected in ["defaultkey", "pass.key", "UTF-8", "1"] {
        assert!(evidences.contains(expected), "missing {expected}: {evidences:?}");
    }
}

#[test]
fn encryptor_slice_reaches_both_caller_chains() {
    let program = load("fig1.tir");
    let graph = build_call_graph(&program);
    let encrypt = MethodSig::new(
        "Crypto",
        "byte[]",
        "encrypt",
        &["java.lang.String", "java.lang.String"],
    );
    // The SecretKeySpec constructor call inside Crypto.encrypt.
    let method = program.method(&encrypt).unwrap();
    let (idx, _) = method
        .body()
        .iter()
        .enumerate()
        .find(|(_, i)| matches!(&i.op, tirscan_core::ir::Op::Invoke(inv) if inv.callee.owner.ends_with("SecretKeySpec")))
        .unwrap();
    let criterion = SlicingCriterion::InterParam {
        caller: encrypt,
        instruction_index: idx,
        param_indices: BTreeSet::from([0]),
    };
    let chains = inter_backward_slices(&graph, &program, &criterion, &SlicerConfig::default());
    assert!(!chains.is_empty());
    let all_constants: BTreeSet<String> = chains
        .iter()
        .flat_map(|c| c.constants.iter().map(|k| k.value.display_text()))
        .collect();
    for expected in ["defaultkey", "pass.key", "UTF-8", "0", "1", "2"] {
        assert!(all_constants.contains(expected), "missing {expected}: {all_constants:?}");
    }
    // pass.key carries the static-in-assignment context that RI-II needs.
    let pass_key = chains
        .iter()
        .flat_map(|c| c.constants.iter())
        .find(|k| k.value.display_text() == "pass.key")
        .unwrap();
    assert_eq!(pass_key.invoke_kind(), Some(tirscan_core::ir::InvokeKind::Static));
    assert!(pass_key.in_assignment());
    // Array indices 0 and 1 carry the bookkeeping flag.
    let idx_candidates: Vec<_> = chains
        .iter()
        .flat_map(|c| c.constants.iter())
        .filter(|k| k.ctx.via_array_index)
        .map(|k| k.value.display_text())
        .collect();
    assert!(idx_candidates.contains(&"0".to_string()));
    assert!(idx_candidates.contains(&"1".to_string()));
}

#[test]
fn hex_conversion_is_missed_at_depth_1_and_found_at_depth_2() {
    let mut config = RunConfig::for_files(vec![fixture("hexconv.tir")]);
    config.rules = BTreeSet::from([1]);
    let at_depth_1 = run(&config).unwrap();
    assert!(
        at_depth_1.findings.is_empty(),
        "depth 1 should miss the converted constant: {:#?}",
        at_depth_1.findings
    );
    config.depth = 2;
    let at_depth_2 = run(&config).unwrap();
    assert_eq!(at_depth_2.findings.len(), 1);
    assert_eq!(at_depth_2.findings[0].evidence, "6A5B7C8A");
    config.depth = 3;
    let at_depth_3 = run(&config).unwrap();
    assert_eq!(at_depth_3.findings.len(), 1);
}

#[test]
fn infeasible_path_zero_iterations_is_reported() {
    let config = RunConfig::for_files(vec![fixture("infeasible.tir")]);
    let report = run(&config).unwrap();
    let rule13: Vec<_> = report.findings.iter().filter(|f| f.rule_id == 13).collect();
    assert_eq!(rule13.len(), 1, "findings: {:#?}", report.findings);
    assert_eq!(rule13[0].evidence, "0");
    assert_eq!(report.findings.len(), 1);
}

#[test]
fn multi_root_manifest_is_deterministic_and_deduplicated() {
    let manifest = fixture("ranger/project.manifest");
    let config = RunConfig::for_manifest(manifest);
    let first = run(&config).unwrap();
    let second = run(&config).unwrap();
    assert_eq!(emit_json(&first), emit_json(&second));
    // The shared dependency's MD5 finding appears exactly once.
    let md5: Vec<_> = first.findings.iter().filter(|f| f.evidence == "MD5").collect();
    assert_eq!(md5.len(), 1, "findings: {:#?}", first.findings);
    assert_eq!(md5[0].root_subproject.as_deref(), Some("plugins-kms"));
    // One finding per root-owned file on top of the shared one.
    assert_eq!(first.findings.len(), 3, "findings: {:#?}", first.findings);
}
