//! The five refinement passes that remove pseudo-influences from a slice's
//! constant candidates. Passes run in a fixed order I→V and every removal is
//! attributed to the first matching pass, so per-pass breakdowns are stable.

use crate::ir::{InvokeKind, Value};
use crate::slice::ConstantCandidate;

/// Refinement pass identifiers, in application order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Ri {
    #[serde(rename = "RI-I")]
    StateIndicator,
    #[serde(rename = "RI-II")]
    SourceIdentifier,
    #[serde(rename = "RI-III")]
    Bookkeeping,
    #[serde(rename = "RI-IV")]
    TypeIncompatible,
    #[serde(rename = "RI-V")]
    InfeasiblePath,
}

impl Ri {
    pub const ALL: [Ri; 5] = [
        Ri::StateIndicator,
        Ri::SourceIdentifier,
        Ri::Bookkeeping,
        Ri::TypeIncompatible,
        Ri::InfeasiblePath,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Ri::StateIndicator => "RI-I",
            Ri::SourceIdentifier => "RI-II",
            Ri::Bookkeeping => "RI-III",
            Ri::TypeIncompatible => "RI-IV",
            Ri::InfeasiblePath => "RI-V",
        }
    }
}

/// What kind of value the criterion parameter expects (per criterion row).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueKind {
    ByteArrayLike,
    CharArrayLike,
    StringLike,
    IntLike,
    UrlLike,
}

/// Per-rule context the passes consult.
#[derive(Clone, Copy, Debug)]
pub struct RefinementContext {
    pub rule_id: u8,
    pub expected: ValueKind,
    pub forbid_null: bool,
    pub forbid_empty_string: bool,
}

impl RefinementContext {
    pub fn new(rule_id: u8, expected: ValueKind) -> Self {
        // Null/empty contracts hold for the key/password/salt/IV rules.
        let forbid_null = matches!(rule_id, 1..=3 | 10 | 12);
        let forbid_empty_string = matches!(rule_id, 1..=3);
        RefinementContext { rule_id, expected, forbid_null, forbid_empty_string }
    }
}

/// One removed candidate with its attribution.
#[derive(Clone, Debug)]
pub struct RemovalEntry {
    pub candidate: ConstantCandidate,
    pub ri: Ri,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct RemovalLog {
    pub entries: Vec<RemovalEntry>,
}

impl RemovalLog {
    pub fn count_for(&self, ri: Ri) -> usize {
        self.entries.iter().filter(|e| e.ri == ri).count()
    }
}

/// RI-I: state indicators — arguments of a virtual invoke whose result is
/// assigned, and constants whose only influence path enters such an argument.
pub fn ri_state_indicator(candidate: &ConstantCandidate) -> bool {
    candidate.invoke_kind() == Some(InvokeKind::Virtual) && candidate.in_assignment()
}

/// RI-II: source identifiers — arguments of static or interface invokes
/// appearing in an assignment (keys of property/map lookups).
pub fn ri_source_identifier(candidate: &ConstantCandidate) -> bool {
    matches!(candidate.invoke_kind(), Some(InvokeKind::Static | InvokeKind::Interface))
        && candidate.in_assignment()
}

/// RI-III: bookkeeping — array indices, array/collection sizes, collection
/// index parameters.
pub fn ri_bookkeeping(candidate: &ConstantCandidate) -> bool {
    candidate.ctx.via_array_index || candidate.ctx.via_array_size || candidate.ctx.via_collection_index
}

/// RI-IV: contextually incompatible constant types. Array-element stores are
/// exempt under array-like contexts (byte/char elements are written as ints).
pub fn ri_type_incompatible(candidate: &ConstantCandidate, ctx: &RefinementContext) -> bool {
    let numeric = matches!(candidate.value, Value::ConstInt(_) | Value::ConstLong(_) | Value::ConstChar(_));
    let boolean = matches!(candidate.value, Value::ConstBool(_));
    match ctx.expected {
        ValueKind::ByteArrayLike | ValueKind::CharArrayLike => {
            boolean || (numeric && !candidate.ctx.via_array_element)
        }
        ValueKind::StringLike | ValueKind::UrlLike => {
            boolean || (numeric && !candidate.ctx.via_array_element)
        }
        ValueKind::IntLike => boolean || matches!(candidate.value, Value::ConstString(_) | Value::ConstNull),
    }
}

/// RI-V: null and empty-string initializations that the target API rejects.
pub fn ri_infeasible_path(candidate: &ConstantCandidate, ctx: &RefinementContext) -> bool {
    match &candidate.value {
        Value::ConstNull => ctx.forbid_null,
        Value::ConstString(s) => ctx.forbid_empty_string && s.is_empty(),
        _ => false,
    }
}

/// Run all passes in order; removals attribute to the first matching pass.
pub fn apply_refinements(
    candidates: Vec<ConstantCandidate>,
    ctx: &RefinementContext,
) -> (Vec<ConstantCandidate>, RemovalLog) {
    let mut kept = Vec::new();
    let mut log = RemovalLog::default();
    for cand in candidates {
        let hit = first_matching(&cand, ctx);
        match hit {
            Some((ri, reason)) => log.entries.push(RemovalEntry { candidate: cand, ri, reason }),
            None => kept.push(cand),
        }
    }
    (kept, log)
}

fn first_matching(cand: &ConstantCandidate, ctx: &RefinementContext) -> Option<(Ri, String)> {
    if ri_state_indicator(cand) {
        return Some((Ri::StateIndicator, "argument of a virtual invoke in an assignment".into()));
    }
    if ri_source_identifier(cand) {
        return Some((
            Ri::SourceIdentifier,
            "identifier argument of a static/interface invoke in an assignment".into(),
        ));
    }
    if ri_bookkeeping(cand) {
        return Some((Ri::Bookkeeping, "array/collection bookkeeping value".into()));
    }
    if ri_type_incompatible(cand, ctx) {
        return Some((Ri::TypeIncompatible, format!("type incompatible with {:?} context", ctx.expected)));
    }
    if ri_infeasible_path(cand, ctx) {
        return Some((Ri::InfeasiblePath, "null/empty initialization the API rejects".into()));
    }
    None
}
