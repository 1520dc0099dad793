//! Caller/callee index with class-hierarchy dispatch restricted to direct
//! subclasses of the declared owner (direct implementers for interfaces).

use std::collections::BTreeMap;

use crate::ir::{InvokeKind, MethodSig, Op, Program};

/// One invoke instruction, identified by its position in the caller body.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CallSite {
    pub caller: MethodSig,
    pub instruction_index: usize,
    pub callee: MethodSig,
    pub kind: InvokeKind,
    /// (file, line) of the invoke, used for deterministic ordering.
    pub file: String,
    pub line: u32,
}

#[derive(Debug, Default)]
pub struct CallGraph {
    /// All call sites, in (file, line) order.
    pub sites: Vec<CallSite>,
    /// Resolved concrete targets per call site (indexes into `sites`).
    pub resolved: Vec<Vec<MethodSig>>,
    /// Sites that resolved to nothing (callee unavailable to the analysis).
    pub phantom: Vec<bool>,
    /// target method → call sites whose resolution includes it.
    pub callers_of: BTreeMap<MethodSig, Vec<usize>>,
}

pub fn build_call_graph(program: &Program) -> CallGraph {
    let mut sites = Vec::new();
    for (class, method) in program.all_methods() {
        for (idx, instr) in method.body().iter().enumerate() {
            if let Op::Invoke(inv) = &instr.op {
                sites.push(CallSite {
                    caller: method.sig.clone(),
                    instruction_index: idx,
                    callee: inv.callee.clone(),
                    kind: inv.kind,
                    file: class.file.clone(),
                    line: instr.line,
                });
            }
        }
    }
    sites.sort_by(|a, b| {
        (&a.file, a.line, &a.caller, a.instruction_index)
            .cmp(&(&b.file, b.line, &b.caller, b.instruction_index))
    });

    let mut graph = CallGraph::default();
    for site in sites {
        let targets = resolve_targets(program, &site);
        let site_index = graph.sites.len();
        for t in &targets {
            graph.callers_of.entry(t.clone()).or_default().push(site_index);
        }
        graph.phantom.push(targets.is_empty());
        graph.resolved.push(targets);
        graph.sites.push(site);
    }
    graph
}

fn resolve_targets(program: &Program, site: &CallSite) -> Vec<MethodSig> {
    let callee = &site.callee;
    let mut targets = Vec::new();
    match site.kind {
        InvokeKind::Static | InvokeKind::Special => {
            if program.method(callee).is_some() {
                targets.push(callee.clone());
            }
        }
        InvokeKind::Virtual | InvokeKind::Interface => {
            if let Some(m) = program.resolve_in_hierarchy(&callee.owner, &callee.name, &callee.params) {
                targets.push(m.sig.clone());
            }
            let subs = match site.kind {
                InvokeKind::Interface => program.direct_implementers(&callee.owner),
                _ => program.direct_subclasses(&callee.owner),
            };
            for sub in subs {
                if let Some(m) = sub
                    .methods
                    .iter()
                    .find(|m| m.sig.name == callee.name && m.sig.params == callee.params)
                {
                    if !targets.contains(&m.sig) {
                        targets.push(m.sig.clone());
                    }
                }
            }
        }
    }
    targets.sort();
    targets
}

impl CallGraph {
    /// Call sites that can reach `target`, in deterministic (file, line) order.
    pub fn call_sites_of(&self, target: &MethodSig) -> Vec<&CallSite> {
        self.callers_of
            .get(target)
            .map(|idxs| idxs.iter().map(|&i| &self.sites[i]).collect())
            .unwrap_or_default()
    }

    pub fn site_indexes_of(&self, target: &MethodSig) -> Vec<usize> {
        self.callers_of.get(target).cloned().unwrap_or_default()
    }

    /// Debug dump: one line per edge,
    /// `<caller-sig> @<line> -> <resolved-sig> [phantom?]`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, site) in self.sites.iter().enumerate() {
            if self.resolved[i].is_empty() {
                out.push_str(&format!(
                    "{} @{} -> {} [phantom]\n",
                    site.caller, site.line, site.callee
                ));
            } else {
                for target in &self.resolved[i] {
                    out.push_str(&format!("{} @{} -> {}\n", site.caller, site.line, target));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    #[test]
    fn direct_subclass_dispatch_only() {
        let src = r#"
class A {
  method void m() {
    return
  }
}
class B extends A {
  method void m() {
    return
  }
}
class C extends B {
  method void m() {
    return
  }
}
class Use {
  method void go(A) {
    a := param 0
    a.<A: void m()>()
    return
  }
}
"#;
        let program = parse_program(src).unwrap();
        let graph = build_call_graph(&program);
        let site = graph
            .sites
            .iter()
            .position(|s| s.callee.name == "m")
            .unwrap();
        let owners: Vec<&str> = graph.resolved[site].iter().map(|s| s.owner.as_str()).collect();
        // A.m and the direct-subclass override B.m; C.m is excluded.
        assert_eq!(owners, vec!["A", "B"]);
    }

    #[test]
    fn phantom_callee_resolves_empty() {
        let src = r#"
class Use {
  method void go() {
    r1 = staticinvoke <ext.Lib: int f()>()
    return
  }
}
"#;
        let program = parse_program(src).unwrap();
        let graph = build_call_graph(&program);
        assert_eq!(graph.resolved[0], Vec::<MethodSig>::new());
        assert!(graph.phantom[0]);
    }

    #[test]
    fn callers_and_resolved_are_consistent() {
        let src = r#"
class A {
  method void m() {
    return
  }
  method void call1() {
    this.<A: void m()>()
    return
  }
  method void call2() {
    this.<A: void m()>()
    return
  }
}
"#;
        let program = parse_program(src).unwrap();
        let graph = build_call_graph(&program);
        let m = MethodSig::new("A", "void", "m", &[]);
        let callers = graph.call_sites_of(&m);
        assert_eq!(callers.len(), 2);
        assert!(callers[0].line <= callers[1].line);
        for (i, targets) in graph.resolved.iter().enumerate() {
            for t in targets {
                assert!(graph.site_indexes_of(t).contains(&i));
            }
        }
    }
}
