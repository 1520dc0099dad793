//! Per-rule checkers: criterion site discovery, slicing, data-only
//! filtering, refinement, and the rule-specific verdict over what survives.

use std::collections::BTreeSet;

use super::{registry, Criterion, CriterionTarget, Finding, RuleSpec};
use crate::callgraph::CallGraph;
use crate::ir::{InvokeKind, MethodDef, MethodSig, Op, Program, Value};
use crate::refine::{apply_refinements, RefinementContext, RemovalLog};
use crate::slice::{
    apply_data_only, inter_backward_slices, intra_backward_slice, intra_forward_slice,
    ConstantCandidate, SlicerConfig, SlicingCriterion,
};

#[derive(Clone, Debug)]
pub struct RuleRunConfig {
    pub slicer: SlicerConfig,
    pub refinements_enabled: bool,
    pub check_client_trusted: bool,
}

impl Default for RuleRunConfig {
    fn default() -> Self {
        RuleRunConfig {
            slicer: SlicerConfig::default(),
            refinements_enabled: true,
            check_client_trusted: false,
        }
    }
}

#[derive(Debug, Default)]
pub struct CheckOutput {
    pub findings: Vec<Finding>,
    pub removal_log: RemovalLog,
}

/// Run one rule over a program.
pub fn check_rule(
    program: &Program,
    graph: &CallGraph,
    spec: &RuleSpec,
    cfg: &RuleRunConfig,
) -> CheckOutput {
    let mut out = match spec.id {
        4 => check_hostname_verifier(program, spec, cfg),
        5 => check_trust_manager(program, spec, cfg),
        6 => check_ssl_socket(program, spec),
        9 => check_untrusted_prng(program, spec),
        15 => check_asym_key_size(program, graph, spec, cfg),
        _ => check_constant_rule(program, graph, spec, cfg),
    };
    finish(&mut out.findings, program, spec);
    out
}

fn finish(findings: &mut Vec<Finding>, program: &Program, spec: &RuleSpec) {
    for f in findings.iter_mut() {
        f.severity = spec.severity;
        if f.file.is_empty() {
            f.file = program.class(&f.class).map(|c| c.file.clone()).unwrap_or_default();
        }
    }
    findings.sort();
    findings.dedup();
}

fn finding(spec: &RuleSpec, method: &MethodSig, line: u32, evidence: impl Into<String>) -> Finding {
    Finding {
        rule_id: spec.id,
        severity: spec.severity,
        file: String::new(),
        class: method.owner.clone(),
        method: method.name.clone(),
        line,
        evidence: evidence.into(),
        root_subproject: None,
    }
}

/// Invoke sites matching a criterion row's API (owner, name, parameter types).
fn criterion_sites<'p>(
    program: &'p Program,
    criterion: &Criterion,
) -> Vec<(&'p MethodDef, usize)> {
    let api = &criterion.api;
    let mut sites = Vec::new();
    for (_, method) in program.all_methods() {
        for (i, instr) in method.body().iter().enumerate() {
            if let Op::Invoke(inv) = &instr.op {
                if inv.callee.owner == api.owner
                    && inv.callee.name == api.name
                    && inv.callee.params == api.params
                {
                    sites.push((method, i));
                }
            }
        }
    }
    sites
}

/// Shared path for the constant/predictable-value rules
/// (1, 2, 3, 7, 8, 10, 11, 12, 13, 14, 16).
fn check_constant_rule(
    program: &Program,
    graph: &CallGraph,
    spec: &RuleSpec,
    cfg: &RuleRunConfig,
) -> CheckOutput {
    let mut out = CheckOutput::default();
    let (kept, predictable, log) = collect_survivors(program, graph, spec, cfg);
    out.removal_log = log;

    for cand in kept {
        if let Some(evidence) = verdict(spec, &cand) {
            out.findings.push(finding(spec, &cand.method, cand.line, evidence));
        }
    }
    // Predictable-source calls count for the secret and seed rules.
    if matches!(spec.id, 1 | 2 | 3 | 8) {
        for p in predictable {
            out.findings.push(finding(spec, &p.method, p.line, p.callee.name.clone()));
        }
    }
    out
}

/// Run every criterion row, apply data-only tracking and refinements, and
/// return the surviving candidates.
fn collect_survivors(
    program: &Program,
    graph: &CallGraph,
    spec: &RuleSpec,
    cfg: &RuleRunConfig,
) -> (Vec<ConstantCandidate>, Vec<crate::slice::PredictableCall>, RemovalLog) {
    let mut kept = Vec::new();
    let mut predictable = Vec::new();
    let mut log = RemovalLog::default();
    let mut seen_candidates = BTreeSet::new();
    let mut seen_removed = BTreeSet::new();
    let mut seen_predictable = BTreeSet::new();

    for criterion in &spec.criteria {
        let CriterionTarget::Arg(pos) = criterion.target else { continue };
        let refine_ctx = RefinementContext::new(spec.id, spec.value_kind(criterion.row));
        for (method, instr) in criterion_sites(program, criterion) {
            let slicing = SlicingCriterion::InterParam {
                caller: method.sig.clone(),
                instruction_index: instr,
                param_indices: BTreeSet::from([pos]),
            };
            for chain in inter_backward_slices(graph, program, &slicing, &cfg.slicer) {
                let candidates = if spec.uses_data_only_tracking() {
                    apply_data_only(program, &chain).0
                } else {
                    chain.constants.clone()
                };
                let (surviving, chain_log) = if cfg.refinements_enabled {
                    apply_refinements(candidates, &refine_ctx)
                } else {
                    (candidates, RemovalLog::default())
                };
                for cand in surviving {
                    let key = candidate_key(&cand);
                    if seen_candidates.insert(key) {
                        kept.push(cand);
                    }
                }
                for entry in chain_log.entries {
                    let key = candidate_key(&entry.candidate);
                    if seen_removed.insert(key) {
                        log.entries.push(entry);
                    }
                }
                for p in chain.predictable_calls {
                    if seen_predictable.insert((p.method.clone(), p.instruction_index)) {
                        predictable.push(p);
                    }
                }
            }
        }
    }
    (kept, predictable, log)
}

fn candidate_key(c: &ConstantCandidate) -> (MethodSig, usize, String, String) {
    (c.method.clone(), c.instruction_index, format!("{:?}", c.role), c.value.display_text())
}

/// Rule-specific decision over one surviving candidate.
fn verdict(spec: &RuleSpec, cand: &ConstantCandidate) -> Option<String> {
    let text = cand.value.display_text();
    match spec.id {
        1 | 2 | 3 | 8 | 10 | 12 => Some(text),
        7 => {
            let lower = text.to_ascii_lowercase();
            lower.starts_with("http://").then_some(text)
        }
        11 => {
            let Value::ConstString(s) = &cand.value else { return None };
            let mut parts = s.split('/');
            let algo = parts.next().unwrap_or("");
            let mode = parts.next();
            let block = spec.insecure_names.iter().any(|n| n.eq_ignore_ascii_case(algo));
            match (block, mode) {
                (true, None) => Some(text),
                (true, Some(m)) if m.eq_ignore_ascii_case("ECB") => Some(text),
                _ => None,
            }
        }
        13 => {
            let limit = spec.thresholds.first().map(|(_, v)| *v).unwrap_or(1000);
            match cand.value {
                Value::ConstInt(n) | Value::ConstLong(n) if n < limit => Some(text),
                _ => None,
            }
        }
        14 | 16 => {
            let Value::ConstString(s) = &cand.value else { return None };
            let algo = s.split('/').next().unwrap_or("");
            spec.insecure_names
                .iter()
                .any(|n| n.eq_ignore_ascii_case(algo))
                .then_some(text)
        }
        _ => None,
    }
}

/// Rule 4: verify() implementations whose result never depends on the
/// session parameter.
fn check_hostname_verifier(program: &Program, spec: &RuleSpec, cfg: &RuleRunConfig) -> CheckOutput {
    let mut out = CheckOutput::default();
    for class in program.direct_implementers("javax.net.ssl.HostnameVerifier") {
        for method in &class.methods {
            if method.sig.name != "verify" || method.sig.params.len() != 2 || method.body.is_none() {
                continue;
            }
            let session_local = method.param_locals.get(1).cloned();
            let reachable = crate::ir::reachable_instructions(method);
            for (i, instr) in method.body().iter().enumerate() {
                if !matches!(instr.op, Op::Return(_)) || !reachable.contains(&i) {
                    continue;
                }
                let criterion =
                    SlicingCriterion::IntraReturn { method: method.sig.clone(), at: Some(i) };
                let Ok(slice) = intra_backward_slice(program, &method.sig, &criterion, &cfg.slicer)
                else {
                    continue;
                };
                let uses_session_param = slice.influencing_params.contains(&1);
                let invokes_on_session = session_local.as_deref().is_some_and(|session| {
                    slice.instructions.iter().any(|(m, idx)| {
                        m == &method.sig
                            && matches!(
                                &method.body()[*idx].op,
                                Op::Invoke(inv) if inv.base.as_deref() == Some(session)
                            )
                    })
                });
                if !uses_session_param && !invokes_on_session {
                    out.findings.push(finding(spec, &method.sig, instr.line, "accepts all hostnames"));
                    break;
                }
            }
        }
    }
    out
}

/// Rule 5: trust managers that validate nothing.
fn check_trust_manager(program: &Program, spec: &RuleSpec, cfg: &RuleRunConfig) -> CheckOutput {
    let mut out = CheckOutput::default();
    let mut classes = program.direct_implementers("javax.net.ssl.X509TrustManager");
    classes.extend(program.direct_implementers("javax.net.ssl.TrustManager"));
    classes.sort_by(|a, b| a.name.cmp(&b.name));
    classes.dedup_by(|a, b| a.name == b.name);
    for class in classes {
        for method in &class.methods {
            let is_server = method.sig.name == "checkServerTrusted";
            let is_client = method.sig.name == "checkClientTrusted";
            if (is_server || (is_client && cfg.check_client_trusted)) && method.body.is_some() {
                let reachable = crate::ir::reachable_instructions(method);
                let throws = method
                    .body()
                    .iter()
                    .enumerate()
                    .any(|(i, ins)| reachable.contains(&i) && matches!(ins.op, Op::Throw(_)));
                // 5.1: expiration check only (checkValidity on a chain element).
                let validity_only = expiration_check_only(program, method, cfg, throws);
                if let Some(line) = validity_only {
                    out.findings.push(finding(spec, &method.sig, line, "expiration-only certificate check"));
                } else if !throws {
                    // 5.2: no exception can ever leave the method.
                    let line = method.body().first().map(|i| i.line).unwrap_or(0);
                    out.findings.push(finding(spec, &method.sig, line, "no exception thrown"));
                }
            }
            if method.sig.name == "getAcceptedIssuers" && method.body.is_some() {
                check_accepted_issuers(program, spec, cfg, method, &mut out);
            }
        }
    }
    out
}

/// 5.1 helper: a checkValidity call on a chain-derived receiver, with no
/// reachable throw protecting the method.
fn expiration_check_only(
    program: &Program,
    method: &MethodDef,
    cfg: &RuleRunConfig,
    throws: bool,
) -> Option<u32> {
    if throws {
        return None;
    }
    for (i, instr) in method.body().iter().enumerate() {
        let Op::Invoke(inv) = &instr.op else { continue };
        if inv.callee.name != "checkValidity" {
            continue;
        }
        let criterion =
            SlicingCriterion::IntraAssign { method: method.sig.clone(), instruction_index: i };
        if let Ok(slice) = intra_backward_slice(program, &method.sig, &criterion, &cfg.slicer) {
            if slice.influencing_params.contains(&0) {
                return Some(instr.line);
            }
        }
    }
    None
}

/// 5.3: getAcceptedIssuers returning null or a constant empty array.
fn check_accepted_issuers(
    program: &Program,
    spec: &RuleSpec,
    cfg: &RuleRunConfig,
    method: &MethodDef,
    out: &mut CheckOutput,
) {
    let reachable = crate::ir::reachable_instructions(method);
    for (i, instr) in method.body().iter().enumerate() {
        if !matches!(instr.op, Op::Return(Some(_))) || !reachable.contains(&i) {
            continue;
        }
        let criterion = SlicingCriterion::IntraReturn { method: method.sig.clone(), at: Some(i) };
        let Ok(slice) = intra_backward_slice(program, &method.sig, &criterion, &cfg.slicer) else {
            continue;
        };
        let returns_null = slice
            .constants
            .iter()
            .any(|c| c.value == Value::ConstNull && c.ctx.boundary.is_none());
        let empty_array = slice.instructions.iter().any(|(m, idx)| {
            m == &method.sig
                && matches!(
                    &method.body()[*idx].op,
                    Op::NewArray { size: Value::ConstInt(0), .. }
                )
        });
        if returns_null {
            out.findings.push(finding(spec, &method.sig, instr.line, "null accepted issuers"));
        } else if empty_array {
            out.findings.push(finding(spec, &method.sig, instr.line, "empty accepted issuers"));
        }
    }
}

/// Rule 6: sockets created from an SSL socket factory must flow through the
/// session → verify → branch pattern.
fn check_ssl_socket(program: &Program, spec: &RuleSpec) -> CheckOutput {
    let mut out = CheckOutput::default();
    let rule = spec;
    for (class, method) in program.all_methods() {
        // Factories subclassed in the program are skipped entirely.
        if class.superclass.as_deref() == Some("javax.net.ssl.SSLSocketFactory") {
            continue;
        }
        for (i, instr) in method.body().iter().enumerate() {
            let Op::Invoke(inv) = &instr.op else { continue };
            let is_origin = rule.criteria.iter().any(|c| {
                c.api.owner == inv.callee.owner
                    && c.api.name == inv.callee.name
                    && c.api.params == inv.callee.params
            });
            if !is_origin || inv.assign_target.is_none() {
                continue;
            }
            let Ok(fwd) = intra_forward_slice(method, i) else { continue };
            let influenced: BTreeSet<usize> = fwd.influenced.iter().map(|(_, idx)| *idx).collect();
            for &j in &influenced {
                let Op::Invoke(create) = &method.body()[j].op else { continue };
                if create.callee.name != "createSocket" || create.assign_target.is_none() {
                    continue;
                }
                if !socket_verified(method, &influenced, create.assign_target.as_deref().unwrap()) {
                    out.findings.push(finding(
                        spec,
                        &method.sig,
                        method.body()[j].line,
                        "socket without hostname verification",
                    ));
                }
            }
        }
    }
    out
}

/// The three-part correct pattern: session from the socket, session passed
/// to verify, verify result used in a branch.
fn socket_verified(method: &MethodDef, influenced: &BTreeSet<usize>, socket: &str) -> bool {
    let body = method.body();
    let mut session_locals = Vec::new();
    for &i in influenced {
        if let Op::Invoke(inv) = &body[i].op {
            if inv.callee.name == "getSession" && inv.base.as_deref() == Some(socket) {
                if let Some(t) = &inv.assign_target {
                    session_locals.push(t.clone());
                }
            }
        }
    }
    let mut verify_results = Vec::new();
    for &i in influenced {
        if let Op::Invoke(inv) = &body[i].op {
            if inv.callee.name == "verify"
                && inv.args.iter().any(|a| {
                    a.as_local().map(|l| session_locals.iter().any(|s| s == l)).unwrap_or(false)
                })
            {
                if let Some(t) = &inv.assign_target {
                    verify_results.push(t.clone());
                }
            }
        }
    }
    for &i in influenced {
        if let Op::If { left, right, .. } = &body[i].op {
            for v in [left, right] {
                if v.as_local().map(|l| verify_results.iter().any(|r| r == l)).unwrap_or(false) {
                    return true;
                }
            }
        }
    }
    false
}

/// Rule 9: every instantiation of java.util.Random.
fn check_untrusted_prng(program: &Program, spec: &RuleSpec) -> CheckOutput {
    let mut out = CheckOutput::default();
    for (_, method) in program.all_methods() {
        for instr in method.body() {
            if let Op::Invoke(inv) = &instr.op {
                if inv.kind == InvokeKind::Special
                    && inv.callee.owner == "java.util.Random"
                    && inv.callee.name == "<init>"
                {
                    out.findings.push(finding(spec, &method.sig, instr.line, "java.util.Random"));
                }
            }
        }
    }
    out
}

/// Rule 15: key-pair generators — default size, or an explicit insecure size.
fn check_asym_key_size(
    program: &Program,
    graph: &CallGraph,
    spec: &RuleSpec,
    cfg: &RuleRunConfig,
) -> CheckOutput {
    let mut out = CheckOutput::default();
    for (_, method) in program.all_methods() {
        for (i, instr) in method.body().iter().enumerate() {
            let Op::Invoke(inv) = &instr.op else { continue };
            let is_get_instance = inv.callee.owner == "java.security.KeyPairGenerator"
                && inv.callee.name == "getInstance";
            if !is_get_instance || inv.assign_target.is_none() {
                continue;
            }
            let rctx = RuleCtx { program, graph, spec, cfg };
            let algorithm = resolve_algorithm(&rctx, method, i, &mut out.removal_log);
            let Ok(fwd) = intra_forward_slice(method, i) else { continue };
            let generator = inv.assign_target.as_deref().unwrap();
            let init_sites: Vec<usize> = fwd
                .influenced
                .iter()
                .filter_map(|(_, j)| match &method.body()[*j].op {
                    Op::Invoke(call)
                        if call.callee.name == "initialize"
                            && call.base.as_deref() == Some(generator) =>
                    {
                        Some(*j)
                    }
                    _ => None,
                })
                .collect();
            if init_sites.is_empty() {
                // Default key size: insecure for the 1024-bit-default families.
                if let Some(algo) = &algorithm {
                    if ["RSA", "DSA", "DH"].iter().any(|a| a.eq_ignore_ascii_case(algo)) {
                        out.findings.push(finding(spec, &method.sig, instr.line, "default key size 1024"));
                    }
                }
                continue;
            }
            let Some(algo) = algorithm else { continue };
            let Some(&(_, limit)) = spec
                .thresholds
                .iter()
                .find(|(name, _)| name.eq_ignore_ascii_case(&algo))
            else {
                continue;
            };
            for init in init_sites {
                for size in resolve_sizes(&rctx, method, init, &mut out.removal_log) {
                    if size.0 < limit {
                        out.findings.push(finding(spec, &method.sig, size.2, size.1));
                    }
                }
            }
        }
    }
    out
}

/// Shared pieces the rule-15 resolution helpers thread around.
struct RuleCtx<'a> {
    program: &'a Program,
    graph: &'a CallGraph,
    spec: &'a RuleSpec,
    cfg: &'a RuleRunConfig,
}

/// Backward-resolve the algorithm string of a getInstance call.
fn resolve_algorithm(
    ctx: &RuleCtx<'_>,
    method: &MethodDef,
    instr: usize,
    log: &mut RemovalLog,
) -> Option<String> {
    let survivors = slice_arg(ctx, method, instr, 0, "15.1", log);
    survivors.into_iter().find_map(|c| match c.value {
        Value::ConstString(s) => Some(s),
        _ => None,
    })
}

/// Backward-resolve explicit key sizes at an initialize call.
fn resolve_sizes(
    ctx: &RuleCtx<'_>,
    method: &MethodDef,
    instr: usize,
    log: &mut RemovalLog,
) -> Vec<(i64, String, u32)> {
    let survivors = slice_arg(ctx, method, instr, 0, "15.4", log);
    survivors
        .into_iter()
        .filter_map(|c| match c.value {
            Value::ConstInt(n) | Value::ConstLong(n) => Some((n, n.to_string(), c.line)),
            _ => None,
        })
        .collect()
}

fn slice_arg(
    ctx: &RuleCtx<'_>,
    method: &MethodDef,
    instr: usize,
    pos: usize,
    row: &str,
    log: &mut RemovalLog,
) -> Vec<ConstantCandidate> {
    let RuleCtx { program, graph, spec, cfg } = *ctx;
    let criterion = SlicingCriterion::InterParam {
        caller: method.sig.clone(),
        instruction_index: instr,
        param_indices: BTreeSet::from([pos]),
    };
    let refine_ctx = RefinementContext::new(spec.id, spec.value_kind(row));
    let mut kept = Vec::new();
    let mut seen = BTreeSet::new();
    for chain in inter_backward_slices(graph, program, &criterion, &cfg.slicer) {
        let candidates = if spec.uses_data_only_tracking() {
            apply_data_only(program, &chain).0
        } else {
            chain.constants.clone()
        };
        let (surviving, chain_log) = if cfg.refinements_enabled {
            apply_refinements(candidates, &refine_ctx)
        } else {
            (candidates, RemovalLog::default())
        };
        log.entries.extend(chain_log.entries);
        for cand in surviving {
            if seen.insert(candidate_key(&cand)) {
                kept.push(cand);
            }
        }
    }
    kept
}

/// Convenience used by the registry self-test and the CLI rule dump.
pub fn registry_dump() -> String {
    let mut out = String::new();
    for spec in registry() {
        out.push_str(&format!("{:2}  [{}]  {}\n", spec.id, spec.severity, spec.title));
        for c in &spec.criteria {
            out.push_str(&format!("      {}  {}\n", c.row, c.api.jvm_style()));
        }
    }
    out
}

