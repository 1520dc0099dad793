//! Intra-procedural forward slicing and the data-only-class constant filter.
//!
//! The forward slice is the def-use closure in execution order. Data-only
//! tracking scans a stitched backward slice: a constant captured as the
//! argument of a clipped setter-style call is kept only when a matching
//! getter on the same object local later feeds the criterion.

use std::collections::{BTreeMap, BTreeSet};

use super::{ConstantCandidate, SliceResult};
use crate::ir::{def_use_graph, InvokeKind, MethodDef, MethodSig, Op, QName};

/// Instructions affected by an origin assignment, in execution order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardSlice {
    pub origin: (MethodSig, usize),
    pub influenced: Vec<(MethodSig, usize)>,
}

/// An object local observed to be used data-only-style within a slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataOnlyBinding {
    pub object_local: String,
    pub class: QName,
    pub tainted_fields: BTreeSet<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrackDecision {
    Keep,
    Discard,
}

/// Forward def-use closure within one method, excluding the origin itself.
pub fn intra_forward_slice(
    method: &MethodDef,
    origin: usize,
) -> Result<ForwardSlice, crate::ir::DefUseError> {
    let edges = def_use_graph(method)?;
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (d, u) in edges {
        succ.entry(d).or_default().push(u);
    }
    let mut seen = BTreeSet::new();
    let mut work = vec![origin];
    while let Some(i) = work.pop() {
        for &u in succ.get(&i).map(|v| v.as_slice()).unwrap_or(&[]) {
            if seen.insert(u) {
                work.push(u);
            }
        }
    }
    seen.remove(&origin);
    Ok(ForwardSlice {
        origin: (method.sig.clone(), origin),
        influenced: seen.into_iter().map(|i| (method.sig.clone(), i)).collect(),
    })
}

/// Decide a clipped setter-argument constant: keep iff a later getter-style
/// call on the same object local is part of the slice and pairs with the
/// setter by name (`set<X>`/`get<X>`, case-insensitive on `X`).
pub fn track_data_only_constant(
    program: &crate::ir::Program,
    slice: &SliceResult,
    candidate: &ConstantCandidate,
) -> TrackDecision {
    let Some(object_local) = &candidate.object_local else {
        return TrackDecision::Keep;
    };
    let Some(callee_name) = &candidate.callee_name else {
        return TrackDecision::Keep;
    };
    let Some(suffix) = setter_suffix(callee_name) else {
        // Not setter-shaped: outside this filter's scope.
        return TrackDecision::Keep;
    };

    let Some(method) = program.method(&candidate.method) else {
        return TrackDecision::Keep;
    };
    let body = method.body();
    // Getter calls after the setter, on the same local, inside the slice.
    let in_slice: BTreeSet<usize> = slice
        .instructions
        .iter()
        .filter(|(m, _)| m == &candidate.method)
        .map(|(_, i)| *i)
        .collect();
    for (i, instr) in body.iter().enumerate().skip(candidate.instruction_index + 1) {
        if !in_slice.contains(&i) {
            continue;
        }
        let Op::Invoke(inv) = &instr.op else { continue };
        if inv.base.as_deref() != Some(object_local.as_str()) || inv.assign_target.is_none() {
            continue;
        }
        if !inv.args.is_empty() {
            continue;
        }
        if let Some(get_suffix) = getter_suffix(&inv.callee.name) {
            if get_suffix.eq_ignore_ascii_case(suffix) {
                return TrackDecision::Keep;
            }
        }
    }
    TrackDecision::Discard
}

/// Apply [`track_data_only_constant`] across a slice's candidates, also
/// reporting the observed data-only bindings.
pub fn apply_data_only(
    program: &crate::ir::Program,
    slice: &SliceResult,
) -> (Vec<ConstantCandidate>, Vec<DataOnlyBinding>) {
    let mut bindings: BTreeMap<(String, QName), DataOnlyBinding> = BTreeMap::new();
    let mut kept = Vec::new();
    for cand in &slice.constants {
        let decision = track_data_only_constant(program, slice, cand);
        if decision == TrackDecision::Keep {
            if let (Some(local), Some(name)) = (&cand.object_local, &cand.callee_name) {
                if let Some(suffix) = setter_suffix(name) {
                    if let Some(class) = clipped_owner(program, cand) {
                        let entry = bindings
                            .entry((local.clone(), class.clone()))
                            .or_insert_with(|| DataOnlyBinding {
                                object_local: local.clone(),
                                class,
                                tainted_fields: BTreeSet::new(),
                            });
                        entry.tainted_fields.insert(suffix.to_ascii_lowercase());
                    }
                }
            }
            kept.push(cand.clone());
        }
    }
    (kept, bindings.into_values().collect())
}

fn clipped_owner(program: &crate::ir::Program, cand: &ConstantCandidate) -> Option<QName> {
    let method = program.method(&cand.method)?;
    match &method.body().get(cand.instruction_index)?.op {
        Op::Invoke(inv) => Some(inv.callee.owner.clone()),
        _ => None,
    }
}

fn setter_suffix(name: &str) -> Option<&str> {
    name.strip_prefix("set").filter(|s| !s.is_empty())
}

fn getter_suffix(name: &str) -> Option<&str> {
    name.strip_prefix("get").filter(|s| !s.is_empty())
}

/// Setter-style clipped captures are the only candidates the data-only
/// filter may touch; everything else passes through unchanged.
pub fn is_setter_capture(candidate: &ConstantCandidate) -> bool {
    matches!(candidate.invoke_kind(), Some(InvokeKind::Virtual | InvokeKind::Interface | InvokeKind::Special))
        && candidate
            .callee_name
            .as_deref()
            .and_then(setter_suffix)
            .is_some()
}
