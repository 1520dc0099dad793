//! Backward and forward program slicing over the TIR model.
//!
//! Backward slicing is demand driven: it starts at a criterion (an API
//! argument, a return/throw, an assignment) and follows def-use edges.
//! Orthogonal invocations met inside a slice are explored up to a clip
//! depth; clipped calls contribute their arguments as constant candidates
//! carrying the invoke context the refinement passes act on.

use std::collections::{BTreeMap, BTreeSet};

use crate::ir::{InvokeKind, MethodSig, QName, Value};

mod backward;
mod forward;

pub use backward::{
    field_init_slices, inter_backward_slices, inter_backward_slices_with_stats,
    intra_backward_slice, InterStats, SliceError,
};
pub use forward::{
    apply_data_only, intra_forward_slice, is_setter_capture, track_data_only_constant,
    DataOnlyBinding, ForwardSlice, TrackDecision,
};

/// Where slicing starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlicingCriterion {
    /// Argument positions of a specific invoke instruction; the inter-
    /// procedural entry mode, also accepted intra-procedurally.
    InterParam {
        caller: MethodSig,
        instruction_index: usize,
        param_indices: BTreeSet<usize>,
    },
    /// Return value(s) of a method; `at` narrows to one return instruction.
    IntraReturn { method: MethodSig, at: Option<usize> },
    /// Thrown value(s) of a method.
    IntraThrow { method: MethodSig, at: Option<usize> },
    /// A specific defining instruction (field initializers use this).
    IntraAssign { method: MethodSig, instruction_index: usize },
    /// The method's own parameters; degenerate seed, no in-body definitions.
    IntraParam { method: MethodSig, param_indices: BTreeSet<usize> },
}

impl SlicingCriterion {
    pub fn method(&self) -> &MethodSig {
        match self {
            SlicingCriterion::InterParam { caller, .. } => caller,
            SlicingCriterion::IntraReturn { method, .. }
            | SlicingCriterion::IntraThrow { method, .. }
            | SlicingCriterion::IntraAssign { method, .. }
            | SlicingCriterion::IntraParam { method, .. } => method,
        }
    }
}

/// How a constant reached the slice; drives the refinement predicates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct CaptureCtx {
    /// Innermost clipped-invocation boundary crossed on the way to the
    /// criterion: invoke kind and whether that invoke's result is assigned.
    pub boundary: Option<(InvokeKind, bool)>,
    pub via_array_index: bool,
    pub via_array_size: bool,
    pub via_collection_index: bool,
    /// Value stored into an array cell (element data, not bookkeeping).
    pub via_array_element: bool,
}

impl CaptureCtx {
    pub fn plain() -> Self {
        CaptureCtx::default()
    }

    /// Context of an inner path continued through an outer one (explored
    /// orthogonal callees compose with the caller-side context).
    pub fn through(self, outer: CaptureCtx) -> CaptureCtx {
        CaptureCtx {
            boundary: self.boundary.or(outer.boundary),
            via_array_index: self.via_array_index || outer.via_array_index,
            via_array_size: self.via_array_size || outer.via_array_size,
            via_collection_index: self.via_collection_index || outer.via_collection_index,
            via_array_element: self.via_array_element || outer.via_array_element,
        }
    }

    /// Merge two contexts of alternative paths: a plain path dominates.
    pub fn merge(self, other: CaptureCtx) -> CaptureCtx {
        CaptureCtx {
            boundary: match (self.boundary, other.boundary) {
                (Some(a), Some(b)) => Some(a.min(b)),
                _ => None,
            },
            via_array_index: self.via_array_index && other.via_array_index,
            via_array_size: self.via_array_size && other.via_array_size,
            via_collection_index: self.via_collection_index && other.via_collection_index,
            via_array_element: self.via_array_element || other.via_array_element,
        }
    }
}

/// Where in its instruction a candidate constant sits.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CandidateRole {
    InvokeArg(usize),
    AssignRhs,
    ArrayElement,
    ArrayIndex,
    ArraySize,
    ReturnValue,
}

/// A constant (or predictable value) found in a backward slice, with the
/// context the refinement passes need.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantCandidate {
    pub value: Value,
    pub method: MethodSig,
    pub instruction_index: usize,
    /// 1-based line of the instruction in its origin file.
    pub line: u32,
    pub role: CandidateRole,
    pub ctx: CaptureCtx,
    /// Receiver local of the clipped call that captured this constant.
    pub object_local: Option<String>,
    /// Callee name of that clipped call (setter/getter pairing).
    pub callee_name: Option<String>,
}

impl ConstantCandidate {
    pub fn invoke_kind(&self) -> Option<InvokeKind> {
        self.ctx.boundary.map(|(k, _)| k)
    }

    pub fn in_assignment(&self) -> bool {
        self.ctx.boundary.map(|(_, a)| a).unwrap_or(false)
    }
}

/// A call in the slice whose result is predictable (timestamps and the like).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictableCall {
    pub method: MethodSig,
    pub instruction_index: usize,
    pub line: u32,
    pub callee: MethodSig,
}

/// Result of one backward slice (intra, or a stitched caller chain).
#[derive(Clone, Debug, Default)]
pub struct SliceResult {
    /// (method, instruction index), callee-first across stitched chains.
    pub instructions: Vec<(MethodSig, usize)>,
    /// Parameter indices of the slice's top method that influence the criterion.
    pub influencing_params: BTreeSet<usize>,
    /// Capture context per influencing parameter.
    pub param_ctx: BTreeMap<usize, CaptureCtx>,
    /// Fields whose values feed the criterion, directly or indirectly.
    pub used_fields: BTreeSet<(QName, String)>,
    pub constants: Vec<ConstantCandidate>,
    pub predictable_calls: Vec<PredictableCall>,
    /// Orthogonal invokes not explored (depth exhausted or phantom callee).
    pub clipped_sites: Vec<(MethodSig, usize)>,
}

impl SliceResult {
    /// Append `next` after `self` (callee chain first), merging the
    /// candidate sets. The top-of-chain param data is taken from `next`.
    pub fn stitch(mut self, next: SliceResult) -> SliceResult {
        self.instructions.extend(next.instructions);
        self.used_fields.extend(next.used_fields);
        self.constants.extend(next.constants);
        self.predictable_calls.extend(next.predictable_calls);
        self.clipped_sites.extend(next.clipped_sites);
        self.influencing_params = next.influencing_params;
        self.param_ctx = next.param_ctx;
        self.dedup();
        self
    }

    /// Merge duplicate candidates (same value at the same site reached along
    /// several paths): a plain path dominates a clipped one.
    pub fn dedup(&mut self) {
        let mut merged: BTreeMap<(MethodSig, usize, CandidateRole, Value), ConstantCandidate> =
            BTreeMap::new();
        for cand in self.constants.drain(..) {
            let key = (cand.method.clone(), cand.instruction_index, cand.role.clone(), cand.value.clone());
            match merged.get_mut(&key) {
                Some(existing) => existing.ctx = existing.ctx.merge(cand.ctx),
                None => {
                    merged.insert(key, cand);
                }
            }
        }
        self.constants = merged.into_values().collect();
        self.constants.sort_by(|a, b| {
            (&a.method, a.instruction_index, &a.role, &a.value)
                .cmp(&(&b.method, b.instruction_index, &b.role, &b.value))
        });
        self.predictable_calls.sort_by(|a, b| {
            (&a.method, a.instruction_index).cmp(&(&b.method, b.instruction_index))
        });
        self.predictable_calls.dedup();
        self.clipped_sites.sort();
        self.clipped_sites.dedup();
        let mut seen = BTreeSet::new();
        self.instructions.retain(|e| seen.insert(e.clone()));
    }

    /// Debug dump used by `--dump-slice`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (m, i) in &self.instructions {
            out.push_str(&format!("{m} #{i}\n"));
        }
        if !self.influencing_params.is_empty() {
            let params: Vec<String> = self.influencing_params.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("params: {}\n", params.join(",")));
        }
        for (c, f) in &self.used_fields {
            out.push_str(&format!("field: {c}.{f}\n"));
        }
        for cand in &self.constants {
            let kind = cand
                .invoke_kind()
                .map(|k| k.keyword().to_string())
                .unwrap_or_else(|| "plain".to_string());
            let mut flags = Vec::new();
            if cand.in_assignment() {
                flags.push("assign");
            }
            if cand.ctx.via_array_index {
                flags.push("index");
            }
            if cand.ctx.via_array_size {
                flags.push("size");
            }
            if cand.ctx.via_collection_index {
                flags.push("coll");
            }
            if cand.ctx.via_array_element {
                flags.push("element");
            }
            out.push_str(&format!(
                "const {} @{}:{} ctx={kind}{}{}\n",
                cand.value.display_text(),
                cand.method,
                cand.line,
                if flags.is_empty() { "" } else { " " },
                flags.join("+")
            ));
        }
        for p in &self.predictable_calls {
            out.push_str(&format!("predictable {} @{}:{}\n", p.callee, p.method, p.line));
        }
        for (m, i) in &self.clipped_sites {
            out.push_str(&format!("clipped {m} #{i}\n"));
        }
        out
    }
}

/// Slicer knobs: depth, predictable-source and collection-bookkeeping
/// registries. The defaults follow the shipped rule set.
#[derive(Clone, Debug)]
pub struct SlicerConfig {
    pub orthogonal_depth: u32,
    /// (owner, method name) pairs whose results are predictable.
    pub predictable_sources: Vec<(String, String)>,
    /// (owner, method name, index/size argument positions) of collection
    /// bookkeeping APIs.
    pub collection_bookkeeping: Vec<(String, String, Vec<usize>)>,
}

impl Default for SlicerConfig {
    fn default() -> Self {
        SlicerConfig {
            orthogonal_depth: 1,
            predictable_sources: vec![
                ("java.lang.System".into(), "currentTimeMillis".into()),
                ("java.lang.System".into(), "nanoTime".into()),
                ("android.telephony.TelephonyManager".into(), "getDeviceId".into()),
                ("java.util.Date".into(), "getTime".into()),
            ],
            collection_bookkeeping: vec![
                ("java.util.List".into(), "get".into(), vec![0]),
                ("java.util.List".into(), "add".into(), vec![0]),
                ("java.util.List".into(), "remove".into(), vec![0]),
                ("java.util.List".into(), "set".into(), vec![0]),
                ("java.util.ArrayList".into(), "<init>".into(), vec![0]),
                ("java.util.ArrayList".into(), "get".into(), vec![0]),
                ("java.util.ArrayList".into(), "add".into(), vec![0]),
                ("java.util.Set".into(), "remove".into(), vec![0]),
                ("java.util.HashSet".into(), "<init>".into(), vec![0]),
                ("java.util.HashMap".into(), "<init>".into(), vec![0]),
                ("java.util.Vector".into(), "<init>".into(), vec![0]),
                ("java.util.Vector".into(), "get".into(), vec![0]),
                ("java.lang.System".into(), "arraycopy".into(), vec![1, 3, 4]),
            ],
        }
    }
}

impl SlicerConfig {
    pub fn with_depth(depth: u32) -> Self {
        SlicerConfig { orthogonal_depth: depth, ..SlicerConfig::default() }
    }

    pub(crate) fn is_predictable(&self, callee: &MethodSig) -> bool {
        self.predictable_sources
            .iter()
            .any(|(o, n)| o == &callee.owner && n == &callee.name)
    }

    pub(crate) fn bookkeeping_positions(&self, callee: &MethodSig) -> Option<&[usize]> {
        self.collection_bookkeeping
            .iter()
            .find(|(o, n, _)| o == &callee.owner && n == &callee.name)
            .map(|(_, _, p)| p.as_slice())
    }
}
