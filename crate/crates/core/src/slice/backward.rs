//! Intra-procedural backward slicing (worklist over reaching definitions)
//! with clipped orthogonal exploration, and the recursive inter-procedural
//! slicer that follows caller chains and field initializers.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::*;
use crate::callgraph::CallGraph;
use crate::ir::{
    self, Cell, DefSite, FieldBase, FieldRef, Instruction, LValue, MethodDef, Op, Program, Rhs,
};

#[derive(Debug, Error)]
pub enum SliceError {
    #[error("criterion targets `{expected}` but `{got}` was sliced")]
    MethodMismatch { expected: MethodSig, got: MethodSig },
    #[error("method `{0}` has no body")]
    PhantomHost(MethodSig),
    #[error("no method `{0}` in program")]
    UnknownMethod(MethodSig),
}

/// Public entry: slice one method backward from a criterion.
#[allow(clippy::result_large_err)]
pub fn intra_backward_slice(
    program: &Program,
    method: &MethodSig,
    criterion: &SlicingCriterion,
    cfg: &SlicerConfig,
) -> Result<SliceResult, SliceError> {
    if criterion.method() != method {
        return Err(SliceError::MethodMismatch {
            expected: criterion.method().clone(),
            got: method.clone(),
        });
    }
    let def = program
        .method(method)
        .ok_or_else(|| SliceError::UnknownMethod(method.clone()))?;
    if def.body.is_none() {
        return Err(SliceError::PhantomHost(method.clone()));
    }
    let seeds = match criterion {
        SlicingCriterion::InterParam { instruction_index, param_indices, .. } => Seeds::CallArgs {
            instr: *instruction_index,
            args: param_indices.iter().map(|&p| (p, CaptureCtx::plain())).collect(),
        },
        SlicingCriterion::IntraReturn { at, .. } => Seeds::Returns { at: *at },
        SlicingCriterion::IntraThrow { at, .. } => Seeds::Throws { at: *at },
        SlicingCriterion::IntraAssign { instruction_index, .. } => {
            Seeds::Assign { instr: *instruction_index }
        }
        SlicingCriterion::IntraParam { param_indices, .. } => {
            Seeds::Params { indices: param_indices.clone() }
        }
    };
    Ok(slice_method(program, cfg, def, &seeds, cfg.orthogonal_depth).into_result(def))
}

pub(crate) enum Seeds {
    CallArgs { instr: usize, args: BTreeMap<usize, CaptureCtx> },
    Returns { at: Option<usize> },
    Throws { at: Option<usize> },
    Assign { instr: usize },
    Params { indices: BTreeSet<usize> },
}

/// Intra slice internals before packaging into a [`SliceResult`].
pub(crate) struct IntraSlice {
    pub instructions: BTreeSet<usize>,
    pub influencing_params: BTreeSet<usize>,
    pub param_ctx: BTreeMap<usize, CaptureCtx>,
    pub used_fields: BTreeSet<(QName, String)>,
    pub constants: Vec<ConstantCandidate>,
    pub predictable: Vec<PredictableCall>,
    pub clipped: Vec<(MethodSig, usize)>,
    /// Instructions pulled in from explored orthogonal callees.
    pub extra_instructions: Vec<(MethodSig, usize)>,
}

impl IntraSlice {
    pub(crate) fn into_result(self, def: &MethodDef) -> SliceResult {
        let mut instructions: Vec<(MethodSig, usize)> = self
            .instructions
            .iter()
            .map(|&i| (def.sig.clone(), i))
            .collect();
        instructions.extend(self.extra_instructions);
        let mut result = SliceResult {
            instructions,
            influencing_params: self.influencing_params,
            param_ctx: self.param_ctx,
            used_fields: self.used_fields,
            constants: self.constants,
            predictable_calls: self.predictable,
            clipped_sites: self.clipped,
        };
        result.dedup();
        result
    }
}

struct Walker<'a> {
    program: &'a Program,
    cfg: &'a SlicerConfig,
    def: &'a MethodDef,
    reaching: ir::Reaching,
    depth: u32,
    /// Criterion invoke, never re-expanded as an orthogonal call.
    criterion_instr: Option<usize>,
    out: IntraSlice,
    /// (instruction, context) pairs already expanded as definitions.
    processed: BTreeSet<(usize, CaptureCtx)>,
    /// (use instruction, cell, context) queries already issued.
    queried: BTreeSet<(usize, Cell, CaptureCtx)>,
    queue: Vec<(usize, Cell, CaptureCtx)>,
}

pub(crate) fn slice_method(
    program: &Program,
    cfg: &SlicerConfig,
    def: &MethodDef,
    seeds: &Seeds,
    depth: u32,
) -> IntraSlice {
    let reaching = ir::compute_reaching_for(def);
    let criterion_instr = match seeds {
        Seeds::CallArgs { instr, .. } => Some(*instr),
        _ => None,
    };
    let mut walker = Walker {
        program,
        cfg,
        def,
        reaching,
        depth,
        criterion_instr,
        out: IntraSlice {
            instructions: BTreeSet::new(),
            influencing_params: BTreeSet::new(),
            param_ctx: BTreeMap::new(),
            used_fields: BTreeSet::new(),
            constants: Vec::new(),
            predictable: Vec::new(),
            clipped: Vec::new(),
            extra_instructions: Vec::new(),
        },
        processed: BTreeSet::new(),
        queried: BTreeSet::new(),
        queue: Vec::new(),
    };
    walker.seed(seeds);
    walker.run();
    walker.out
}

impl<'a> Walker<'a> {
    fn body(&self) -> &'a [Instruction] {
        self.def.body.as_deref().unwrap_or(&[])
    }

    fn seed(&mut self, seeds: &Seeds) {
        match seeds {
            Seeds::CallArgs { instr, args } => {
                let body = self.body();
                if *instr >= body.len() {
                    return;
                }
                self.out.instructions.insert(*instr);
                if let Op::Invoke(inv) = &body[*instr].op {
                    let inv = inv.clone();
                    for (&pos, &ctx) in args {
                        if let Some(arg) = inv.args.get(pos) {
                            self.trace_value(*instr, arg.clone(), ctx, Some(CandidateRole::InvokeArg(pos)), None);
                        }
                    }
                }
            }
            Seeds::Returns { at } => {
                for (i, instr) in self.body().iter().enumerate() {
                    if let Op::Return(v) = &instr.op {
                        if at.map(|a| a == i).unwrap_or(true) {
                            self.out.instructions.insert(i);
                            if let Some(v) = v.clone() {
                                self.trace_value(i, v, CaptureCtx::plain(), Some(CandidateRole::ReturnValue), None);
                            }
                        }
                    }
                }
            }
            Seeds::Throws { at } => {
                for (i, instr) in self.body().iter().enumerate() {
                    if let Op::Throw(v) = &instr.op {
                        if at.map(|a| a == i).unwrap_or(true) {
                            self.out.instructions.insert(i);
                            let v = v.clone();
                            self.trace_value(i, v, CaptureCtx::plain(), Some(CandidateRole::ReturnValue), None);
                        }
                    }
                }
            }
            Seeds::Assign { instr } => {
                self.process_def(*instr, CaptureCtx::plain());
            }
            Seeds::Params { indices } => {
                for &i in indices {
                    if i < self.def.param_locals.len() {
                        self.out.influencing_params.insert(i);
                        self.out.param_ctx.insert(i, CaptureCtx::plain());
                    }
                }
            }
        }
    }

    fn run(&mut self) {
        while let Some((use_at, cell, ctx)) = self.queue.pop() {
            for def_site in self.reaching.defs_reaching(use_at, &cell) {
                match def_site {
                    DefSite::Entry => self.note_entry(&cell, ctx),
                    DefSite::Instr(d) => self.process_def(d, ctx),
                }
            }
            // A field read with no in-body definition comes from outside; the
            // read itself was already recorded via used_fields.
        }
    }

    /// The cell's value is the method parameter binding itself.
    fn note_entry(&mut self, cell: &Cell, ctx: CaptureCtx) {
        let local = match cell {
            Cell::Local(l) | Cell::Obj(l) | Cell::Array(l) => l,
            Cell::Field(..) => return,
        };
        // Obj/Array cells are keyed by alias leaders; every group member that
        // is a parameter is influencing.
        let mut hit = Vec::new();
        for (i, p) in self.def.param_locals.iter().enumerate() {
            if p == local || self.reaching.leader(p) == *local {
                hit.push(i);
            }
        }
        for i in hit {
            self.out.influencing_params.insert(i);
            let merged = match self.out.param_ctx.get(&i) {
                Some(prev) => prev.merge(ctx),
                None => ctx,
            };
            self.out.param_ctx.insert(i, merged);
        }
    }

    /// Ask for the definitions of `cell` reaching `use_at`.
    fn query(&mut self, use_at: usize, cell: Cell, ctx: CaptureCtx) {
        if self.queried.insert((use_at, cell.clone(), ctx)) {
            self.queue.push((use_at, cell, ctx));
        }
    }

    /// Trace one read value: constants become candidates, locals are queried.
    /// `role` describes the position of a directly-read constant.
    fn trace_value(
        &mut self,
        at: usize,
        value: Value,
        ctx: CaptureCtx,
        role: Option<CandidateRole>,
        clip_meta: Option<(&str, &str)>,
    ) {
        match value {
            Value::Local(ref name) => {
                self.query(at, Cell::Local(name.clone()), ctx);
                if self.reaching.is_array_local(name) {
                    self.query(at, Cell::Array(self.reaching.leader(name)), ctx);
                } else {
                    self.query(at, Cell::Obj(self.reaching.leader(name)), ctx);
                }
            }
            Value::This => {
                self.query(at, Cell::Obj(self.reaching.leader("this")), ctx);
            }
            _ => {
                let role = role.unwrap_or(CandidateRole::AssignRhs);
                self.out.constants.push(ConstantCandidate {
                    value,
                    method: self.def.sig.clone(),
                    instruction_index: at,
                    line: self.body()[at].line,
                    role,
                    ctx,
                    object_local: clip_meta.map(|(b, _)| b.to_string()),
                    callee_name: clip_meta.map(|(_, n)| n.to_string()),
                });
            }
        }
    }

    /// Expand a defining instruction: include it and trace what it reads.
    fn process_def(&mut self, d: usize, ctx: CaptureCtx) {
        if self.criterion_instr == Some(d) {
            return;
        }
        if !self.processed.insert((d, ctx)) {
            return;
        }
        self.out.instructions.insert(d);
        let op = self.body()[d].op.clone();
        match op {
            Op::Assign { target, rhs } => {
                let element_store = matches!(target, LValue::Array { .. });
                match rhs {
                    Rhs::Value(v) => {
                        let vctx = if element_store {
                            CaptureCtx { via_array_element: true, ..ctx }
                        } else {
                            ctx
                        };
                        let role = if element_store {
                            Some(CandidateRole::ArrayElement)
                        } else {
                            Some(CandidateRole::AssignRhs)
                        };
                        self.trace_value(d, v, vctx, role, None);
                    }
                    Rhs::Field(f) => {
                        self.record_field_use(&f);
                        if let FieldBase::Local(b) = &f.base {
                            self.query(d, Cell::Local(b.clone()), ctx);
                        }
                        let cell = ir::field_cell_for(&self.reaching, &f);
                        self.query(d, cell, ctx);
                    }
                    Rhs::ArrayLoad { base, index } => {
                        self.query(d, Cell::Local(base.clone()), ctx);
                        self.query(d, Cell::Array(self.reaching.leader(&base)), ctx);
                        let ictx = CaptureCtx { via_array_index: true, ..ctx };
                        self.trace_value(d, index, ictx, Some(CandidateRole::ArrayIndex), None);
                    }
                }
                match target {
                    LValue::Array { base, index } => {
                        self.query(d, Cell::Local(base.clone()), ctx);
                        let ictx = CaptureCtx { via_array_index: true, ..ctx };
                        self.trace_value(d, index, ictx, Some(CandidateRole::ArrayIndex), None);
                    }
                    LValue::Field(f) => {
                        if let FieldBase::Local(b) = &f.base {
                            self.query(d, Cell::Local(b.clone()), ctx);
                        }
                    }
                    LValue::Local(_) => {}
                }
            }
            Op::NewArray { size, .. } => {
                let sctx = CaptureCtx { via_array_size: true, ..ctx };
                self.trace_value(d, size, sctx, Some(CandidateRole::ArraySize), None);
            }
            Op::Invoke(inv) => self.process_invoke(d, &inv, ctx),
            // Returns, throws, branches and labels define nothing.
            Op::Return(_) | Op::Throw(_) | Op::If { .. } | Op::Goto(_) | Op::Label(_) => {}
        }
    }

    /// An orthogonal invocation whose result, receiver or array argument
    /// feeds the slice.
    fn process_invoke(&mut self, d: usize, inv: &ir::InvokeOp, ctx: CaptureCtx) {
        if self.cfg.is_predictable(&inv.callee) {
            self.out.predictable.push(PredictableCall {
                method: self.def.sig.clone(),
                instruction_index: d,
                line: self.body()[d].line,
                callee: inv.callee.clone(),
            });
        }
        // The receiver's value and prior state always continue the slice.
        if let Some(base) = &inv.base {
            if !(inv.kind == ir::InvokeKind::Special && inv.callee.name == "<init>") {
                self.query(d, Cell::Local(base.clone()), ctx);
            }
            if self.reaching.is_array_local(base) {
                self.query(d, Cell::Array(self.reaching.leader(base)), ctx);
            } else {
                self.query(d, Cell::Obj(self.reaching.leader(base)), ctx);
            }
        }

        let callee_def = self
            .program
            .resolve_in_hierarchy(&inv.callee.owner, &inv.callee.name, &inv.callee.params)
            .filter(|m| m.body.is_some());
        let bookkeeping = self.cfg.bookkeeping_positions(&inv.callee);

        if self.depth > 0 {
            if let Some(callee) = callee_def {
                self.explore(d, inv, callee, ctx);
                return;
            }
        }

        // Clipped: record the site, capture arguments with invoke context.
        self.out.clipped.push((self.def.sig.clone(), d));
        let in_assign = inv.assign_target.is_some();
        let meta_base = inv.base.clone().unwrap_or_default();
        for (pos, arg) in inv.args.iter().enumerate() {
            let actx = if bookkeeping.map(|ps| ps.contains(&pos)).unwrap_or(false) {
                CaptureCtx { via_collection_index: true, ..ctx }
            } else {
                CaptureCtx { boundary: Some((inv.kind, in_assign)), ..ctx }
            };
            let meta = if inv.base.is_some() {
                Some((meta_base.as_str(), inv.callee.name.as_str()))
            } else {
                None
            };
            self.trace_value(d, arg.clone(), actx, Some(CandidateRole::InvokeArg(pos)), meta);
        }
    }

    /// Recursively slice an orthogonal callee at depth − 1, collecting the
    /// statements that influence its return values and field assignments.
    fn explore(&mut self, d: usize, inv: &ir::InvokeOp, callee: &'a MethodDef, ctx: CaptureCtx) {
        let sub = slice_orthogonal(self.program, self.cfg, callee, self.depth - 1);
        for i in &sub.instructions {
            self.out.extra_instructions.push((callee.sig.clone(), *i));
        }
        self.out.extra_instructions.extend(sub.extra_instructions.iter().cloned());
        for cand in &sub.constants {
            let mut cand = cand.clone();
            cand.ctx = cand.ctx.through(ctx);
            self.out.constants.push(cand);
        }
        self.out.used_fields.extend(sub.used_fields.iter().cloned());
        self.out.predictable.extend(sub.predictable.iter().cloned());
        self.out.clipped.extend(sub.clipped.iter().cloned());
        // Arguments bound to the callee's influencing parameters feed the
        // slice with whatever context the parameter's internal path carries.
        for &p in &sub.influencing_params {
            if let Some(arg) = inv.args.get(p) {
                let pctx = sub.param_ctx.get(&p).copied().unwrap_or_default();
                self.trace_value(d, arg.clone(), pctx.through(ctx), Some(CandidateRole::InvokeArg(p)), None);
            }
        }
    }

    fn record_field_use(&mut self, f: &FieldRef) {
        if let Some(owner) = resolve_field_owner(self.program, self.def, f) {
            self.out.used_fields.insert((owner, f.name.clone()));
        }
    }
}

/// Slice an explored orthogonal callee from its returns and field writes.
fn slice_orthogonal(
    program: &Program,
    cfg: &SlicerConfig,
    callee: &MethodDef,
    depth: u32,
) -> IntraSlice {
    let mut acc = slice_method(program, cfg, callee, &Seeds::Returns { at: None }, depth);
    let field_writes: Vec<usize> = callee
        .body()
        .iter()
        .enumerate()
        .filter_map(|(i, instr)| match instr.op {
            Op::Assign { target: LValue::Field(_), .. } => Some(i),
            _ => None,
        })
        .collect();
    for i in field_writes {
        let sub = slice_method(program, cfg, callee, &Seeds::Assign { instr: i }, depth);
        merge_intra(&mut acc, sub);
    }
    acc
}

fn merge_intra(acc: &mut IntraSlice, other: IntraSlice) {
    acc.instructions.extend(other.instructions);
    for (i, ctx) in other.param_ctx {
        let merged = match acc.param_ctx.get(&i) {
            Some(prev) => prev.merge(ctx),
            None => ctx,
        };
        acc.param_ctx.insert(i, merged);
    }
    acc.influencing_params.extend(other.influencing_params);
    acc.used_fields.extend(other.used_fields);
    acc.constants.extend(other.constants);
    acc.predictable.extend(other.predictable);
    acc.clipped.extend(other.clipped);
    acc.extra_instructions.extend(other.extra_instructions);
}

/// Attribute a field reference to the class that declares it.
pub(crate) fn resolve_field_owner(program: &Program, method: &MethodDef, f: &FieldRef) -> Option<QName> {
    let start: QName = match &f.base {
        FieldBase::This => method.sig.owner.clone(),
        FieldBase::StaticOwner(o) => o.clone(),
        FieldBase::Local(l) => match infer_local_class(method, l) {
            Some(c) => c,
            // Fall back to any class declaring a field of this name.
            None => {
                return program
                    .classes
                    .values()
                    .find(|c| c.fields.iter().any(|fd| fd.name == f.name))
                    .map(|c| c.name.clone());
            }
        },
    };
    // Walk up to the declaring class; fall back to the starting class.
    let mut cur = Some(start.clone());
    while let Some(cls) = cur {
        match program.class(&cls) {
            Some(c) => {
                if c.fields.iter().any(|fd| fd.name == f.name) {
                    return Some(cls);
                }
                cur = c.superclass.clone();
            }
            None => break,
        }
    }
    Some(start)
}

/// Best-effort type of a local: constructor call, invoke return type, or
/// parameter type.
fn infer_local_class(method: &MethodDef, local: &str) -> Option<QName> {
    for instr in method.body() {
        if let Op::Invoke(inv) = &instr.op {
            if inv.kind == ir::InvokeKind::Special
                && inv.callee.name == "<init>"
                && inv.base.as_deref() == Some(local)
            {
                return Some(inv.callee.owner.clone());
            }
            if inv.assign_target.as_deref() == Some(local) {
                return Some(inv.callee.ret.trim_end_matches("[]").to_string());
            }
        }
    }
    method
        .param_index(local)
        .and_then(|i| method.sig.params.get(i))
        .map(|t| t.trim_end_matches("[]").to_string())
}

/// All intra-procedural slices of instructions assigning `field`, paired
/// with their containing methods.
pub fn field_init_slices(
    program: &Program,
    field: &(QName, String),
    cfg: &SlicerConfig,
) -> Vec<(MethodSig, SliceResult)> {
    let mut out = Vec::new();
    for (_, method) in program.all_methods() {
        for (i, instr) in method.body().iter().enumerate() {
            if let Op::Assign { target: LValue::Field(f), .. } = &instr.op {
                if f.name == field.1 {
                    let owner = resolve_field_owner(program, method, f);
                    if owner.as_deref() == Some(field.0.as_str()) {
                        let slice = slice_method(program, cfg, method, &Seeds::Assign { instr: i }, cfg.orthogonal_depth);
                        out.push((method.sig.clone(), slice.into_result(method)));
                    }
                }
            }
        }
    }
    out
}

/// Statistics of one inter-procedural slicing run.
#[derive(Clone, Copy, Debug, Default)]
pub struct InterStats {
    /// Distinct (call site, parameter set) criteria visited.
    pub visits: usize,
    /// Distinct parameter-set keys seen (for the memoization bound).
    pub param_subsets: usize,
}

/// Inter-procedural backward slicing: one stitched [`SliceResult`] per
/// maximal caller chain, following field initializers along the way.
pub fn inter_backward_slices(
    graph: &CallGraph,
    program: &Program,
    criterion: &SlicingCriterion,
    cfg: &SlicerConfig,
) -> Vec<SliceResult> {
    inter_backward_slices_with_stats(graph, program, criterion, cfg).0
}

pub fn inter_backward_slices_with_stats(
    graph: &CallGraph,
    program: &Program,
    criterion: &SlicingCriterion,
    cfg: &SlicerConfig,
) -> (Vec<SliceResult>, InterStats) {
    let (caller, instr, params) = match criterion {
        SlicingCriterion::InterParam { caller, instruction_index, param_indices } => {
            (caller.clone(), *instruction_index, param_indices.clone())
        }
        _ => {
            // Intra criteria get a single caller-less slice.
            let method = criterion.method().clone();
            let result = intra_backward_slice(program, &method, criterion, cfg)
                .map(|r| vec![r])
                .unwrap_or_default();
            return (result, InterStats::default());
        }
    };

    let mut runner = Inter {
        graph,
        program,
        cfg,
        visited: BTreeSet::new(),
        subsets: BTreeSet::new(),
        out: Vec::new(),
        visits: 0,
    };
    let seed_args: BTreeMap<usize, CaptureCtx> =
        params.iter().map(|&p| (p, CaptureCtx::plain())).collect();
    runner.go(&caller, instr, seed_args, SliceResult::default());
    let stats = InterStats { visits: runner.visits, param_subsets: runner.subsets.len() };
    let mut chains = runner.out;
    for c in &mut chains {
        c.dedup();
    }
    (chains, stats)
}

type ParamKey = Vec<(usize, CaptureCtx)>;

struct Inter<'a> {
    graph: &'a CallGraph,
    program: &'a Program,
    cfg: &'a SlicerConfig,
    visited: BTreeSet<(MethodSig, usize, ParamKey)>,
    subsets: BTreeSet<ParamKey>,
    out: Vec<SliceResult>,
    visits: usize,
}

impl<'a> Inter<'a> {
    fn go(
        &mut self,
        caller: &MethodSig,
        instr: usize,
        args: BTreeMap<usize, CaptureCtx>,
        prefix: SliceResult,
    ) {
        let key: ParamKey = args.iter().map(|(&p, &c)| (p, c)).collect();
        if args.is_empty() || !self.visited.insert((caller.clone(), instr, key.clone())) {
            self.emit(prefix);
            return;
        }
        self.subsets.insert(key);
        self.visits += 1;

        let Some(def) = self.program.method(caller).filter(|m| m.body.is_some()) else {
            self.emit(prefix);
            return;
        };
        let curr = slice_method(
            self.program,
            self.cfg,
            def,
            &Seeds::CallArgs { instr, args },
            self.cfg.orthogonal_depth,
        )
        .into_result(def);

        let curr_fields = curr.used_fields.clone();
        let stitched = prefix.stitch(curr);

        // Field-initializer chains: each initializer is its own branch that
        // then climbs the initializer's caller chain.
        for field in curr_fields {
            for (containing, fslice) in field_init_slices(self.program, &field, self.cfg) {
                let branch = stitched.clone().stitch(fslice);
                self.climb(&containing, branch);
            }
        }

        // The main chain climbs the current method's callers.
        let top = caller.clone();
        self.climb(&top, stitched);
    }

    /// Continue a chain upward through every caller of `method`, or emit it
    /// as maximal when there is nothing further to follow.
    fn climb(&mut self, method: &MethodSig, chain: SliceResult) {
        let sites = self.graph.site_indexes_of(method);
        if chain.influencing_params.is_empty() || sites.is_empty() {
            self.emit(chain);
            return;
        }
        let args: BTreeMap<usize, CaptureCtx> = chain
            .influencing_params
            .iter()
            .map(|&p| (p, chain.param_ctx.get(&p).copied().unwrap_or_default()))
            .collect();
        for site_idx in sites {
            let site = &self.graph.sites[site_idx];
            self.go(&site.caller.clone(), site.instruction_index, args.clone(), chain.clone());
        }
    }

    fn emit(&mut self, chain: SliceResult) {
        if !chain.instructions.is_empty() || !chain.constants.is_empty() {
            self.out.push(chain);
        }
    }
}

