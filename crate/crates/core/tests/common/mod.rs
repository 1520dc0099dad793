//! Independent brute-force oracles used by the slice property tests and the
//! acceptance suite. Everything here re-derives read/write behavior directly
//! from the instruction forms and enumerates control-flow paths explicitly
//! (loops unrolled at most twice), with no use of the engine's reaching-
//! definitions or worklist code.

use std::collections::{BTreeMap, BTreeSet};

use tirscan_core::ir::{FieldBase, LValue, MethodDef, Op, Rhs, Value};

/// A storage location in the oracle's own vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Loc {
    Local(String),
    Obj(String),
    Array(String),
    Field(String, String),
}

/// Definition source: entry binding or a body instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Src {
    Entry,
    Instr(usize),
}

fn local_of(v: &Value) -> Option<String> {
    match v {
        Value::Local(l) => Some(l.clone()),
        Value::This => Some("this".to_string()),
        _ => None,
    }
}

/// Flow-insensitive alias groups over plain copies, array-rooted tracking.
/// Mirrors the documented cell model (the model is shared; the path logic
/// below is what stays independent).
pub struct Groups {
    leader: BTreeMap<String, String>,
    array_groups: BTreeSet<String>,
}

impl Groups {
    pub fn build(method: &MethodDef) -> Groups {
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut array_roots: BTreeSet<String> = BTreeSet::new();
        for (i, p) in method.param_locals.iter().enumerate() {
            if method.sig.params.get(i).map(|t| t.ends_with("[]")).unwrap_or(false) {
                array_roots.insert(p.clone());
            }
        }
        for instr in method.body() {
            match &instr.op {
                Op::NewArray { target, .. } => {
                    array_roots.insert(target.clone());
                }
                Op::Invoke(inv) => {
                    if let (Some(t), true) = (&inv.assign_target, inv.callee.ret.ends_with("[]")) {
                        array_roots.insert(t.clone());
                    }
                }
                Op::Assign { target: LValue::Local(t), rhs: Rhs::Value(Value::Local(s)) } => {
                    pairs.push((t.clone(), s.clone()));
                }
                _ => {}
            }
        }
        // Naive union by repeated relabeling.
        let mut leader: BTreeMap<String, String> = BTreeMap::new();
        let canon = |name: &str, leader: &mut BTreeMap<String, String>| {
            let mut cur = name.to_string();
            while let Some(next) = leader.get(&cur) {
                if *next == cur {
                    break;
                }
                cur = next.clone();
            }
            cur
        };
        for (a, b) in &pairs {
            let ra = canon(a, &mut leader);
            let rb = canon(b, &mut leader);
            if ra != rb {
                let (keep, drop) = if ra <= rb { (ra, rb) } else { (rb, ra) };
                leader.insert(drop, keep);
            }
        }
        let mut flat: BTreeMap<String, String> = BTreeMap::new();
        let names: BTreeSet<String> = pairs
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .chain(array_roots.iter().cloned())
            .collect();
        for n in names {
            let c = canon(&n, &mut leader);
            flat.insert(n, c);
        }
        let groups = array_roots.iter().map(|r| canon(r, &mut leader)).collect();
        Groups { leader: flat, array_groups: groups }
    }

    pub fn leader(&self, name: &str) -> String {
        self.leader.get(name).cloned().unwrap_or_else(|| name.to_string())
    }

    pub fn is_array(&self, name: &str) -> bool {
        self.array_groups.contains(&self.leader(name))
    }
}

fn field_loc(groups: &Groups, base: &FieldBase, name: &str) -> Loc {
    let key = match base {
        FieldBase::This => "this".to_string(),
        FieldBase::Local(l) => groups.leader(l),
        FieldBase::StaticOwner(o) => format!("::{o}"),
    };
    Loc::Field(key, name.to_string())
}

/// Locations read by one instruction.
pub fn reads(method: &MethodDef, groups: &Groups, i: usize) -> Vec<Loc> {
    let mut out = Vec::new();
    let value = |v: &Value, out: &mut Vec<Loc>| {
        if let Some(l) = local_of(v) {
            out.push(Loc::Local(l.clone()));
            if groups.is_array(&l) {
                out.push(Loc::Array(groups.leader(&l)));
            } else {
                out.push(Loc::Obj(groups.leader(&l)));
            }
        }
    };
    match &method.body()[i].op {
        Op::Assign { target, rhs } => {
            match rhs {
                Rhs::Value(v) => value(v, &mut out),
                Rhs::Field(f) => {
                    if let FieldBase::Local(b) = &f.base {
                        out.push(Loc::Local(b.clone()));
                    }
                    out.push(field_loc(groups, &f.base, &f.name));
                }
                Rhs::ArrayLoad { base, index } => {
                    out.push(Loc::Local(base.clone()));
                    out.push(Loc::Array(groups.leader(base)));
                    value(index, &mut out);
                }
            }
            match target {
                LValue::Array { base, index } => {
                    out.push(Loc::Local(base.clone()));
                    value(index, &mut out);
                }
                LValue::Field(f) => {
                    if let FieldBase::Local(b) = &f.base {
                        out.push(Loc::Local(b.clone()));
                    }
                }
                LValue::Local(_) => {}
            }
        }
        Op::Invoke(inv) => {
            for a in &inv.args {
                value(a, &mut out);
            }
            if let Some(b) = &inv.base {
                let is_ctor = inv.kind == tirscan_core::ir::InvokeKind::Special && inv.callee.name == "<init>";
                if !is_ctor {
                    out.push(Loc::Local(b.clone()));
                    out.push(if groups.is_array(b) {
                        Loc::Array(groups.leader(b))
                    } else {
                        Loc::Obj(groups.leader(b))
                    });
                }
            }
        }
        Op::NewArray { size, .. } => value(size, &mut out),
        Op::Return(Some(v)) | Op::Throw(v) => value(v, &mut out),
        Op::If { left, right, .. } => {
            value(left, &mut out);
            value(right, &mut out);
        }
        _ => {}
    }
    out.sort();
    out.dedup();
    out
}

/// Locations written by one instruction; bool = strong update.
pub fn writes(method: &MethodDef, groups: &Groups, i: usize) -> Vec<(Loc, bool)> {
    let mut out = Vec::new();
    match &method.body()[i].op {
        Op::Assign { target, .. } => match target {
            LValue::Local(t) => out.push((Loc::Local(t.clone()), true)),
            LValue::Field(f) => out.push((field_loc(groups, &f.base, &f.name), true)),
            LValue::Array { base, .. } => out.push((Loc::Array(groups.leader(base)), false)),
        },
        Op::Invoke(inv) => {
            if let Some(t) = &inv.assign_target {
                out.push((Loc::Local(t.clone()), true));
            }
            if let Some(b) = &inv.base {
                let is_ctor = inv.kind == tirscan_core::ir::InvokeKind::Special && inv.callee.name == "<init>";
                if is_ctor {
                    out.push((Loc::Local(b.clone()), true));
                    out.push((Loc::Obj(groups.leader(b)), true));
                } else {
                    out.push((Loc::Obj(groups.leader(b)), false));
                }
            }
            for a in &inv.args {
                if let Some(l) = local_of(a) {
                    if groups.is_array(&l) {
                        out.push((Loc::Array(groups.leader(&l)), false));
                    }
                }
            }
        }
        Op::NewArray { target, .. } => {
            out.push((Loc::Local(target.clone()), true));
            out.push((Loc::Array(groups.leader(target)), true));
        }
        _ => {}
    }
    out
}

/// Enumerate CFG paths from entry, unrolling each back edge at most `unroll`
/// times, and union per-path def-use pairs.
pub fn brute_force_def_use(method: &MethodDef, unroll: usize) -> BTreeSet<(usize, usize)> {
    let body = method.body();
    if body.is_empty() {
        return BTreeSet::new();
    }
    let groups = Groups::build(method);
    let labels: BTreeMap<&str, usize> = body
        .iter()
        .enumerate()
        .filter_map(|(i, ins)| match &ins.op {
            Op::Label(n) => Some((n.as_str(), i)),
            _ => None,
        })
        .collect();
    let successors = |i: usize| -> Vec<usize> {
        match &body[i].op {
            Op::Return(_) | Op::Throw(_) => vec![],
            Op::Goto(l) => vec![labels[l.as_str()]],
            Op::If { label, .. } => {
                let mut s = vec![];
                if i + 1 < body.len() {
                    s.push(i + 1);
                }
                s.push(labels[label.as_str()]);
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

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    // State along a path: location → set of sources.
    type State = BTreeMap<Loc, BTreeSet<Src>>;
    let mut entry: State = BTreeMap::new();
    let mut entry_locals = method.param_locals.clone();
    entry_locals.push("this".to_string());
    for l in &entry_locals {
        entry.insert(Loc::Local(l.clone()), BTreeSet::from([Src::Entry]));
        entry.insert(Loc::Obj(groups.leader(l)), BTreeSet::from([Src::Entry]));
        if groups.is_array(l) {
            entry.insert(Loc::Array(groups.leader(l)), BTreeSet::from([Src::Entry]));
        }
    }

    // Depth-first path enumeration with per-path visit counters.
    let mut stack: Vec<(usize, State, BTreeMap<usize, usize>)> = vec![(0, entry, BTreeMap::new())];
    while let Some((i, mut state, mut visits)) = stack.pop() {
        let count = visits.entry(i).or_insert(0);
        *count += 1;
        if *count > unroll + 1 {
            continue;
        }
        for loc in reads(method, &groups, i) {
            if let Some(srcs) = state.get(&loc) {
                for s in srcs {
                    if let Src::Instr(d) = s {
                        edges.insert((*d, i));
                    }
                }
            }
        }
        for (loc, strong) in writes(method, &groups, i) {
            let slot = state.entry(loc).or_default();
            if strong {
                slot.clear();
            }
            slot.insert(Src::Instr(i));
        }
        for s in successors(i) {
            stack.push((s, state.clone(), visits.clone()));
        }
    }
    edges
}

/// Backward transitive closure over a def-use edge set from seed uses.
pub fn backward_closure(edges: &BTreeSet<(usize, usize)>, seeds: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut included = seeds.clone();
    let mut work: Vec<usize> = seeds.iter().copied().collect();
    while let Some(u) = work.pop() {
        for (d, u2) in edges {
            if *u2 == u && included.insert(*d) {
                work.push(*d);
            }
        }
    }
    included
}

/// Forward transitive closure over a def-use edge set from one origin.
pub fn forward_closure(edges: &BTreeSet<(usize, usize)>, origin: usize) -> BTreeSet<usize> {
    let mut included = BTreeSet::new();
    let mut work = vec![origin];
    while let Some(d) = work.pop() {
        for (d2, u) in edges {
            if *d2 == d && included.insert(*u) {
                work.push(*u);
            }
        }
    }
    included.remove(&origin);
    included
}

/// Deterministic fixture generator: acyclic methods of assigns, invokes,
/// arrays and forward branches. Mixing parameter `salt` varies the shape.
pub fn random_fixture(salt: u64, methods: usize, instructions: usize) -> String {
    let mut rng = Lcg(salt.wrapping_mul(2654435761).wrapping_add(12345));
    let mut out = String::new();
    out.push_str("class fuzz.Gen {\n");
    for m in 0..methods {
        out.push_str(&format!("  method int work{m}(int, int) {{\n"));
        out.push_str("    p0 := param 0\n");
        out.push_str("    p1 := param 1\n");
        let mut locals: Vec<String> = vec!["p0".into(), "p1".into()];
        let mut arrays: Vec<String> = Vec::new();
        // Forward-branch targets scheduled a few instructions ahead.
        let mut pending: Vec<(usize, String)> = Vec::new();
        let mut labels = 0usize;
        let per_method = instructions / methods.max(1);
        for i in 0..per_method {
            let due: Vec<String> = pending
                .iter()
                .filter(|(at, _)| *at <= i)
                .map(|(_, l)| l.clone())
                .collect();
            pending.retain(|(at, _)| *at > i);
            for label in due {
                out.push_str(&format!("    {label}:\n"));
            }
            match rng.next(9) {
                0 => {
                    let t = format!("v{m}_{i}");
                    out.push_str(&format!("    {t} = {}\n", rng.next(100)));
                    locals.push(t);
                }
                1 => {
                    let s = pick(&mut rng, &locals);
                    let t = format!("v{m}_{i}");
                    out.push_str(&format!("    {t} = {s}\n"));
                    locals.push(t);
                }
                2 => {
                    let t = format!("a{m}_{i}");
                    out.push_str(&format!("    {t} = newarray int[{}]\n", 1 + rng.next(8)));
                    arrays.push(t.clone());
                    locals.push(t);
                }
                3 if !arrays.is_empty() => {
                    let a = pick(&mut rng, &arrays);
                    let v = pick(&mut rng, &locals);
                    out.push_str(&format!("    {a}[{}] = {v}\n", rng.next(4)));
                }
                4 if !arrays.is_empty() => {
                    let a = pick(&mut rng, &arrays);
                    let t = format!("v{m}_{i}");
                    out.push_str(&format!("    {t} = {a}[{}]\n", rng.next(4)));
                    locals.push(t);
                }
                5 => {
                    let x = pick(&mut rng, &locals);
                    let t = format!("v{m}_{i}");
                    out.push_str(&format!(
                        "    {t} = staticinvoke <ext.Lib: int f(int)>({x})\n"
                    ));
                    locals.push(t);
                }
                6 => {
                    let x = pick(&mut rng, &locals);
                    let y = pick(&mut rng, &locals);
                    let label = format!("L{m}_{labels}");
                    labels += 1;
                    out.push_str(&format!("    if {x} == {y} goto {label}\n"));
                    pending.push((i + 1 + rng.next(4) as usize, label));
                }
                7 => {
                    let b = pick(&mut rng, &locals);
                    let x = pick(&mut rng, &locals);
                    out.push_str(&format!("    {b}.<ext.Sink: void put(int)>({x})\n"));
                }
                _ => {
                    let x = pick(&mut rng, &locals);
                    let t = format!("v{m}_{i}");
                    out.push_str(&format!("    {t} = {x}\n"));
                    locals.push(t);
                }
            }
        }
        for (_, label) in pending.drain(..) {
            out.push_str(&format!("    {label}:\n"));
        }
        let r = pick(&mut rng, &locals);
        out.push_str(&format!("    return {r}\n"));
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self, bound: u64) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 33) % bound.max(1)
    }
}

fn pick(rng: &mut Lcg, items: &[String]) -> String {
    items[rng.next(items.len() as u64) as usize].clone()
}
