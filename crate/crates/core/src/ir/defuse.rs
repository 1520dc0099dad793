//! Reaching-definitions over a method body and the def-use edge graph.
//!
//! Cells model what an instruction can read or write: a local's value, an
//! object local's internal state (mutated conservatively by invokes on it),
//! an array local's merged contents (index-insensitive, weak update), and
//! fields keyed by base + name (strong update). Branch targets merge by
//! union; array locals connected by plain copies share one contents cell.

use std::collections::{BTreeMap, BTreeSet};

use super::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DefUseError {
    #[error("method `{0}` has no body")]
    NoBody(MethodSig),
}

/// A storage cell an instruction reads or writes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cell {
    Local(String),
    /// Internal state of an object local (keyed by alias-group leader).
    Obj(String),
    /// Merged contents of an array local (keyed by alias-group leader).
    Array(String),
    /// Field keyed by normalized base ("this", a local, or `::Owner`).
    Field(String, String),
}

/// Where a cell's value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DefSite {
    /// Bound at method entry (a parameter local or `this`).
    Entry,
    /// Defined by the body instruction at this index.
    Instr(usize),
}

/// Reaching-definitions result for one method body.
pub struct Reaching {
    /// Per instruction: cell → definitions that reach its entry.
    pub before: Vec<BTreeMap<Cell, BTreeSet<DefSite>>>,
    /// Alias-group leader per local.
    leaders: BTreeMap<String, String>,
    /// Locals whose alias group holds an array value.
    array_groups: BTreeSet<String>,
    /// Instruction indices reachable from entry.
    pub reachable: BTreeSet<usize>,
}

impl Reaching {
    pub fn leader(&self, local: &str) -> String {
        self.leaders.get(local).cloned().unwrap_or_else(|| local.to_string())
    }

    pub fn is_array_local(&self, local: &str) -> bool {
        self.array_groups.contains(&self.leader(local))
    }

    pub fn defs_reaching(&self, instr: usize, cell: &Cell) -> BTreeSet<DefSite> {
        self.before
            .get(instr)
            .and_then(|m| m.get(cell))
            .cloned()
            .unwrap_or_default()
    }
}

/// Instruction indices reachable from the method entry via fallthrough and
/// branches.
pub fn reachable_instructions(method: &MethodDef) -> BTreeSet<usize> {
    compute_reaching(method).reachable
}

/// Def-use edges of one method: (definition instruction, use instruction).
pub fn def_use_graph(method: &MethodDef) -> Result<Vec<(usize, usize)>, DefUseError> {
    if method.body.is_none() {
        return Err(DefUseError::NoBody(method.sig.clone()));
    }
    let reaching = compute_reaching(method);
    let body = method.body();
    let mut edges = BTreeSet::new();
    for (u, _) in body.iter().enumerate() {
        for cell in cells_read(method, &reaching, u) {
            for def in reaching.defs_reaching(u, &cell) {
                if let DefSite::Instr(d) = def {
                    edges.insert((d, u));
                }
            }
        }
    }
    Ok(edges.into_iter().collect())
}

/// Cells read by instruction `u` (deduplicated).
pub(crate) fn cells_read(method: &MethodDef, reaching: &Reaching, u: usize) -> Vec<Cell> {
    let mut out = Vec::new();
    let push_value = |v: &Value, out: &mut Vec<Cell>| {
        if let Some(local) = v.as_local() {
            out.push(Cell::Local(local.to_string()));
            if reaching.is_array_local(local) {
                out.push(Cell::Array(reaching.leader(local)));
            } else {
                // Reading an object's value reads its accumulated state.
                out.push(Cell::Obj(reaching.leader(local)));
            }
        }
    };
    match &method.body()[u].op {
        Op::Assign { target, rhs } => {
            match rhs {
                Rhs::Value(v) => push_value(v, &mut out),
                Rhs::Field(f) => {
                    if let FieldBase::Local(b) = &f.base {
                        out.push(Cell::Local(b.clone()));
                    }
                    out.push(field_cell(reaching, f));
                }
                Rhs::ArrayLoad { base, index } => {
                    out.push(Cell::Local(base.clone()));
                    out.push(Cell::Array(reaching.leader(base)));
                    push_value(index, &mut out);
                }
            }
            match target {
                LValue::Array { base, index } => {
                    out.push(Cell::Local(base.clone()));
                    push_value(index, &mut out);
                }
                LValue::Field(f) => {
                    if let FieldBase::Local(b) = &f.base {
                        out.push(Cell::Local(b.clone()));
                    }
                }
                LValue::Local(_) => {}
            }
        }
        Op::Invoke(inv) => {
            for arg in &inv.args {
                push_value(arg, &mut out);
            }
            if let Some(base) = &inv.base {
                if !is_ctor_call(inv) {
                    push_value(&Value::Local(base.clone()), &mut out);
                }
            }
        }
        Op::NewArray { size, .. } => push_value(size, &mut out),
        Op::Return(Some(v)) | Op::Throw(v) => push_value(v, &mut out),
        Op::If { left, right, .. } => {
            push_value(left, &mut out);
            push_value(right, &mut out);
        }
        Op::Return(None) | Op::Goto(_) | Op::Label(_) => {}
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Strength {
    Strong,
    Weak,
}

/// Cells written by instruction `u`, with update strength.
pub(crate) fn cells_written(method: &MethodDef, reaching: &Reaching, u: usize) -> Vec<(Cell, Strength)> {
    let mut out = Vec::new();
    match &method.body()[u].op {
        Op::Assign { target, .. } => match target {
            LValue::Local(t) => out.push((Cell::Local(t.clone()), Strength::Strong)),
            LValue::Field(f) => out.push((field_cell(reaching, f), Strength::Strong)),
            LValue::Array { base, .. } => {
                out.push((Cell::Array(reaching.leader(base)), Strength::Weak))
            }
        },
        Op::Invoke(inv) => {
            if let Some(t) = &inv.assign_target {
                out.push((Cell::Local(t.clone()), Strength::Strong));
            }
            if let Some(base) = &inv.base {
                if is_ctor_call(inv) {
                    out.push((Cell::Local(base.clone()), Strength::Strong));
                    out.push((Cell::Obj(reaching.leader(base)), Strength::Strong));
                } else {
                    out.push((Cell::Obj(reaching.leader(base)), Strength::Weak));
                }
            }
            for arg in &inv.args {
                if let Some(local) = arg.as_local() {
                    if reaching.is_array_local(local) {
                        // Callee may fill the array (e.g. nextBytes-style APIs).
                        out.push((Cell::Array(reaching.leader(local)), Strength::Weak));
                    }
                }
            }
        }
        Op::NewArray { target, .. } => {
            out.push((Cell::Local(target.clone()), Strength::Strong));
            out.push((Cell::Array(reaching.leader(target)), Strength::Strong));
        }
        _ => {}
    }
    out
}

pub(crate) fn is_ctor_call(inv: &InvokeOp) -> bool {
    inv.kind == InvokeKind::Special && inv.callee.name == "<init>"
}

pub(crate) fn field_cell(reaching: &Reaching, f: &FieldRef) -> Cell {
    let base = match &f.base {
        FieldBase::This => "this".to_string(),
        FieldBase::Local(l) => reaching.leader(l),
        FieldBase::StaticOwner(o) => format!("::{o}"),
    };
    Cell::Field(base, f.name.clone())
}

pub(crate) fn compute_reaching(method: &MethodDef) -> Reaching {
    let body = method.body();
    let (leaders, array_groups) = alias_groups(method);
    let mut reaching = Reaching {
        before: vec![BTreeMap::new(); body.len()],
        leaders,
        array_groups,
        reachable: BTreeSet::new(),
    };

    let labels: BTreeMap<&str, usize> = body
        .iter()
        .enumerate()
        .filter_map(|(i, ins)| match &ins.op {
            Op::Label(name) => Some((name.as_str(), i)),
            _ => None,
        })
        .collect();
    let successors = |i: usize| -> Vec<usize> {
        match &body[i].op {
            Op::Return(_) | Op::Throw(_) => vec![],
            Op::Goto(label) => vec![labels[label.as_str()]],
            Op::If { label, .. } => {
                let mut s = vec![labels[label.as_str()]];
                if i + 1 < body.len() {
                    s.push(i + 1);
                }
                s
            }
            _ => {
                if i + 1 < body.len() {
                    vec![i + 1]
                } else {
                    vec![]
                }
            }
        }
    };

    // Entry facts: parameters and `this` are defined on entry.
    let mut entry: BTreeMap<Cell, BTreeSet<DefSite>> = BTreeMap::new();
    let mut entry_locals: Vec<String> = method.param_locals.clone();
    entry_locals.push("this".to_string());
    for local in &entry_locals {
        entry.insert(Cell::Local(local.clone()), BTreeSet::from([DefSite::Entry]));
        entry.insert(Cell::Obj(reaching.leader(local)), BTreeSet::from([DefSite::Entry]));
        if reaching.is_array_local(local) {
            entry.insert(Cell::Array(reaching.leader(local)), BTreeSet::from([DefSite::Entry]));
        }
    }

    if body.is_empty() {
        return reaching;
    }

    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); body.len()];
    for i in 0..body.len() {
        for s in successors(i) {
            preds[s].push(i);
        }
    }

    // Worklist to a fixpoint, entry instruction seeded with the entry facts.
    let mut work: Vec<usize> = vec![0];
    reaching.before[0] = entry;
    let mut in_work = vec![false; body.len()];
    in_work[0] = true;
    let mut visited = vec![false; body.len()];
    while let Some(i) = work.pop() {
        in_work[i] = false;
        visited[i] = true;
        let mut out = reaching.before[i].clone();
        for (cell, strength) in cells_written(method, &reaching, i) {
            let entry = out.entry(cell).or_default();
            if strength == Strength::Strong {
                entry.clear();
            }
            entry.insert(DefSite::Instr(i));
        }
        for s in successors(i) {
            let mut changed = !visited[s];
            let target = &mut reaching.before[s];
            for (cell, defs) in &out {
                let slot = target.entry(cell.clone()).or_default();
                for d in defs {
                    if slot.insert(*d) {
                        changed = true;
                    }
                }
            }
            if changed && !in_work[s] {
                in_work[s] = true;
                work.push(s);
            }
        }
    }
    reaching.reachable = visited
        .iter()
        .enumerate()
        .filter_map(|(i, v)| if *v { Some(i) } else { None })
        .collect();
    reaching
}

/// Union-find over plain local copies; tracks which groups hold arrays.
fn alias_groups(method: &MethodDef) -> (BTreeMap<String, String>, BTreeSet<String>) {
    let mut parent: BTreeMap<String, String> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<String, String>, x: &str) -> String {
        let p = parent.get(x).cloned();
        match p {
            None => x.to_string(),
            Some(p) if p == x => p,
            Some(p) => {
                let root = find(parent, &p);
                parent.insert(x.to_string(), root.clone());
                root
            }
        }
    }
    let union = |parent: &mut BTreeMap<String, String>, a: &str, b: &str| {
        let ra = find(parent, a);
        let rb = find(parent, b);
        if ra != rb {
            // Keep the lexicographically smaller name as leader for stability.
            let (lead, other) = if ra <= rb { (ra, rb) } else { (rb, ra) };
            parent.insert(other, lead);
        }
    };

    let mut array_roots: BTreeSet<String> = BTreeSet::new();
    for (i, local) in method.param_locals.iter().enumerate() {
        if method.sig.params.get(i).map(|t| t.ends_with("[]")).unwrap_or(false) {
            array_roots.insert(local.clone());
        }
    }
    for instr in method.body() {
        match &instr.op {
            Op::NewArray { target, .. } => {
                array_roots.insert(target.clone());
            }
            Op::Invoke(inv) => {
                if let Some(t) = &inv.assign_target {
                    if inv.callee.ret.ends_with("[]") {
                        array_roots.insert(t.clone());
                    }
                }
            }
            Op::Assign { target: LValue::Local(t), rhs: Rhs::Value(Value::Local(s)) } => {
                union(&mut parent, t, s);
            }
            _ => {}
        }
    }

    let locals: BTreeSet<String> = collect_locals(method);
    let mut leaders = BTreeMap::new();
    for local in &locals {
        let lead = find(&mut parent, local);
        leaders.insert(local.clone(), lead);
    }
    let mut array_groups = BTreeSet::new();
    for root in &array_roots {
        array_groups.insert(find(&mut parent, root));
    }
    (leaders, array_groups)
}

fn collect_locals(method: &MethodDef) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = method.param_locals.iter().cloned().collect();
    out.insert("this".to_string());
    let push_value = |v: &Value, out: &mut BTreeSet<String>| {
        if let Some(l) = v.as_local() {
            out.insert(l.to_string());
        }
    };
    for instr in method.body() {
        match &instr.op {
            Op::Assign { target, rhs } => {
                match target {
                    LValue::Local(t) => {
                        out.insert(t.clone());
                    }
                    LValue::Array { base, index } => {
                        out.insert(base.clone());
                        push_value(index, &mut out);
                    }
                    LValue::Field(f) => {
                        if let FieldBase::Local(b) = &f.base {
                            out.insert(b.clone());
                        }
                    }
                }
                match rhs {
                    Rhs::Value(v) => push_value(v, &mut out),
                    Rhs::ArrayLoad { base, index } => {
                        out.insert(base.clone());
                        push_value(index, &mut out);
                    }
                    Rhs::Field(f) => {
                        if let FieldBase::Local(b) = &f.base {
                            out.insert(b.clone());
                        }
                    }
                }
            }
            Op::Invoke(inv) => {
                for a in &inv.args {
                    push_value(a, &mut out);
                }
                if let Some(b) = &inv.base {
                    out.insert(b.clone());
                }
                if let Some(t) = &inv.assign_target {
                    out.insert(t.clone());
                }
            }
            Op::NewArray { target, size, .. } => {
                out.insert(target.clone());
                push_value(size, &mut out);
            }
            Op::Return(Some(v)) | Op::Throw(v) => push_value(v, &mut out),
            Op::If { left, right, .. } => {
                push_value(left, &mut out);
                push_value(right, &mut out);
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    #[test]
    fn phantom_method_yields_no_body_error() {
        let method = MethodDef {
            sig: MethodSig::new("ghost.G", "void", "g", &[]),
            param_locals: vec![],
            body: None,
        };
        assert!(matches!(def_use_graph(&method), Err(DefUseError::NoBody(_))));
    }

    #[test]
    fn single_return_method_has_no_edges() {
        let program = parse_program("class A {\n  method void f() {\n    return\n  }\n}\n").unwrap();
        let (_, method) = program.all_methods().next().unwrap();
        assert!(def_use_graph(method).unwrap().is_empty());
    }

    #[test]
    fn key_bytes_flow_into_the_key_spec_constructor() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/fig1.tir");
        let text = std::fs::read_to_string(path).unwrap();
        let program = parse_program(&text).unwrap();
        let encrypt = program
            .method(&MethodSig::new(
                "Crypto",
                "byte[]",
                "encrypt",
                &["java.lang.String", "java.lang.String"],
            ))
            .unwrap();
        let body = encrypt.body();
        let key_bytes_def = body
            .iter()
            .position(|i| matches!(&i.op, Op::Invoke(inv) if inv.assign_target.as_deref() == Some("keyBytes")))
            .unwrap();
        let spec_use = body
            .iter()
            .position(|i| matches!(&i.op, Op::Invoke(inv) if inv.callee.owner.ends_with("SecretKeySpec")))
            .unwrap();
        let edges = def_use_graph(encrypt).unwrap();
        assert!(
            edges.contains(&(key_bytes_def, spec_use)),
            "missing keyBytes -> SecretKeySpec edge in {edges:?}"
        );
    }

    #[test]
    fn array_cells_merge_weakly() {
        let src = r#"
class A {
  method int f(int) {
    p := param 0
    a = newarray int[2]
    a[0] = 1
    a[1] = p
    x = a[0]
    return x
  }
}
"#;
        let program = parse_program(src).unwrap();
        let (_, method) = program.all_methods().next().unwrap();
        let edges = def_use_graph(method).unwrap();
        // Both stores reach the load (index-insensitive contents cell).
        assert!(edges.contains(&(1, 3)));
        assert!(edges.contains(&(2, 3)));
        // The newarray also reaches the load through the contents cell.
        assert!(edges.contains(&(0, 3)));
    }
}
