//! Deterministic synthetic program generators used by the acceptance suite
//! and the throughput bench: refinement-corpus cases with planted
//! pseudo-influences, and a large mostly-benign project.

use crate::refine::Ri;

/// What a generated refinement case planted, with authored line numbers.
#[derive(Clone, Debug)]
pub struct PlantedCase {
    pub source: String,
    /// True positives as (rule, line, evidence).
    pub true_positives: Vec<(u8, u32, String)>,
    /// Pseudo-influences as (attributed pass, evidence).
    pub pseudo_influences: Vec<(Ri, String)>,
}

struct Writer {
    buf: String,
    line: u32,
}

impl Writer {
    fn new() -> Self {
        Writer { buf: String::new(), line: 0 }
    }

    fn push(&mut self, text: &str) -> u32 {
        self.buf.push_str(text);
        self.buf.push('\n');
        self.line += 1;
        self.line
    }
}

/// One self-contained rule-1 program planting a true positive and one
/// pseudo-influence of every kind (state indicator, source identifier,
/// bookkeeping, type-incompatible, null init).
pub fn refinement_case(index: usize) -> PlantedCase {
    let key_evidence = format!("plantedkey{index}");
    let prop_evidence = format!("key.prop{index}");
    let mut w = Writer::new();
    let mut tps = Vec::new();

    w.push(&format!("class synth.Case{index} {{"));
    w.push("  method void keyFlow(java.lang.String) {");
    w.push("    r0 := param 0");
    w.push("    key = null");
    w.push("    if r0 == null goto Lk");
    let tp_key = w.push(&format!("    key = \"{key_evidence}\""));
    w.push("    Lk:");
    w.push(&format!(
        "    kid = staticinvoke <conf.Config: java.lang.String get(java.lang.String)>(\"{prop_evidence}\")"
    ));
    w.push("    if kid == null goto Lm");
    w.push("    key = kid");
    w.push("    Lm:");
    w.push("    kb = key.<java.lang.String: byte[] getBytes(java.lang.String)>(\"UTF-8\")");
    w.push(
        "    specialinvoke s1.<javax.crypto.spec.SecretKeySpec: void <init>(byte[],java.lang.String)>(kb, \"AES\")",
    );
    w.push("    return");
    w.push("  }");
    tps.push((1u8, tp_key, key_evidence.clone()));

    w.push("  method void holderFlow(int) {");
    w.push("    n := param 0");
    w.push(&format!(
        "    specialinvoke hold.<synth.Holder{index}: void <init>(int,boolean)>(5, true)"
    ));
    w.push(&format!("    kb2 = hold.<synth.Holder{index}: byte[] material()>()"));
    w.push(
        "    specialinvoke s2.<javax.crypto.spec.SecretKeySpec: void <init>(byte[],java.lang.String)>(kb2, \"AES\")",
    );
    w.push("    return");
    w.push("  }");

    w.push("  method void arrayFlow(java.lang.String) {");
    w.push("    s := param 0");
    w.push("    buf = newarray byte[8]");
    w.push("    idx = 1");
    let tp_elem = w.push("    buf[idx] = 77");
    w.push(
        "    specialinvoke s3.<javax.crypto.spec.SecretKeySpec: void <init>(byte[],java.lang.String)>(buf, \"AES\")",
    );
    w.push("    return");
    w.push("  }");
    w.push("}");
    tps.push((1u8, tp_elem, "77".to_string()));

    PlantedCase {
        source: w.buf,
        true_positives: tps,
        pseudo_influences: vec![
            (Ri::StateIndicator, "UTF-8".to_string()),
            (Ri::SourceIdentifier, prop_evidence),
            (Ri::Bookkeeping, "8".to_string()),
            (Ri::Bookkeeping, "1".to_string()),
            (Ri::TypeIncompatible, "5".to_string()),
            (Ri::TypeIncompatible, "true".to_string()),
            (Ri::InfeasiblePath, "null".to_string()),
        ],
    }
}

/// Planted misuses of a generated project, as (rule, line) expectations.
#[derive(Clone, Debug, Default)]
pub struct PlantedProject {
    pub source: String,
    pub expected: Vec<(u8, u32)>,
    pub instruction_count: usize,
}

/// A project of `classes` classes, each with filler methods, plus a handful
/// of planted misuses spread across rules 1, 9, 11, 14 and 16.
pub fn large_project(classes: usize, instructions_per_class: usize) -> PlantedProject {
    let mut w = Writer::new();
    let mut expected = Vec::new();
    let mut instruction_count = 0usize;

    for c in 0..classes {
        w.push(&format!("class gen.Work{c} {{"));
        w.push("  field java.lang.String label");
        let methods = 4.max(instructions_per_class / 20);
        let per_method = instructions_per_class / methods;
        for m in 0..methods {
            w.push(&format!("  method int step{m}(int, int) {{"));
            w.push("    a := param 0");
            w.push("    b := param 1");
            let mut filler = 0;
            while filler + 4 < per_method {
                w.push(&format!("    t{filler} = {}", filler * 7 % 100));
                w.push(&format!("    u{filler} = t{filler}"));
                w.push(&format!("    if u{filler} == a goto E{m}_{filler}"));
                w.push(&format!("    u{filler} = b"));
                w.push(&format!("    E{m}_{filler}:"));
                filler += 5;
                instruction_count += 5;
            }
            w.push("    return a");
            w.push("  }");
            instruction_count += 3;
        }
        // Sprinkle misuses over a few classes.
        if c % 11 == 0 {
            w.push("  method void crypto() {");
            let key_line = w.push(&format!("    key = \"genkey{c}\""));
            w.push("    kb = key.<java.lang.String: byte[] getBytes()>()");
            w.push(
                "    specialinvoke ks.<javax.crypto.spec.SecretKeySpec: void <init>(byte[],java.lang.String)>(kb, \"AES\")",
            );
            w.push("    return");
            w.push("  }");
            expected.push((1u8, key_line));
            instruction_count += 4;
        }
        if c % 13 == 0 {
            w.push("  method void rng() {");
            let line = w.push("    specialinvoke r.<java.util.Random: void <init>()>()");
            w.push("    return");
            w.push("  }");
            expected.push((9u8, line));
            instruction_count += 2;
        }
        if c % 17 == 0 {
            w.push("  method void hash() {");
            let line = w.push("    algo = \"MD5\"");
            w.push(
                "    md = staticinvoke <java.security.MessageDigest: java.security.MessageDigest getInstance(java.lang.String)>(algo)",
            );
            w.push("    return");
            w.push("  }");
            expected.push((16u8, line));
            instruction_count += 3;
        }
        w.push("}");
    }
    PlantedProject { source: w.buf, expected, instruction_count }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_sources_parse() {
        let case = refinement_case(7);
        crate::ir::parse_program(&case.source).expect("refinement case parses");
        let project = large_project(10, 100);
        crate::ir::parse_program(&project.source).expect("large project parses");
        assert!(project.instruction_count >= 800);
    }
}
