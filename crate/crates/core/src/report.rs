//! Run orchestration: inputs → per-root analysis (parallel) → deduplicated,
//! deterministically ordered report; text and machine-readable emission.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::callgraph::build_call_graph;
use crate::ir::{parse_program_named, Program};
use crate::project::{
    build_dag, classes_for_root, closure_of, parse_manifest, root_subprojects, ProjectError,
};
use crate::refine::Ri;
use crate::rules::{check_rule, execution_order, registry, Finding, RuleRunConfig, Severity};
use crate::slice::SlicerConfig;
use crate::{par, rules};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Project(#[from] ProjectError),
    #[error("{0}")]
    Parse(#[from] crate::ir::ParseError),
    #[error("{0}")]
    Io(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug)]
pub enum Inputs {
    Files(Vec<PathBuf>),
    Manifest(PathBuf),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub inputs: Inputs,
    pub rules: BTreeSet<u8>,
    pub depth: u32,
    pub refinements: bool,
    pub jobs: Option<usize>,
    /// Per-root wall-clock budget; rules past it are dropped (rule 7 first).
    pub budget: Option<Duration>,
    pub fail_on: Severity,
    pub check_client_trusted: bool,
}

impl RunConfig {
    pub fn for_files(files: Vec<PathBuf>) -> Self {
        RunConfig {
            inputs: Inputs::Files(files),
            rules: (1..=16).collect(),
            depth: 1,
            refinements: true,
            jobs: None,
            budget: None,
            fail_on: Severity::L,
            check_client_trusted: false,
        }
    }

    pub fn for_manifest(path: PathBuf) -> Self {
        RunConfig { inputs: Inputs::Manifest(path), ..RunConfig::for_files(Vec::new()) }
    }

    fn rule_run_config(&self) -> RuleRunConfig {
        RuleRunConfig {
            slicer: SlicerConfig::with_depth(self.depth),
            refinements_enabled: self.refinements,
            check_client_trusted: self.check_client_trusted,
        }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct PartialRoot {
    pub root: String,
    pub completed_rules: Vec<u8>,
}

#[derive(Debug)]
pub struct Report {
    pub findings: Vec<Finding>,
    pub per_rule: BTreeMap<u8, usize>,
    pub per_ri: BTreeMap<&'static str, usize>,
    /// Wall time per root; programmatic only, never part of emitted reports.
    pub timing: BTreeMap<String, Duration>,
    pub partial_roots: Vec<PartialRoot>,
    pub config: ConfigEcho,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ConfigEcho {
    pub rules: Vec<u8>,
    pub depth: u32,
    pub refinements: bool,
    pub jobs: Option<usize>,
    pub budget_seconds: Option<u64>,
    pub fail_on: Severity,
}

impl Report {
    /// Exit policy: 0 no findings, 1 findings at/above the threshold, 2 is
    /// reserved for errors (applied by callers).
    pub fn exit_code(&self) -> i32 {
        let threshold = self.config.fail_on;
        let hit = self
            .findings
            .iter()
            .any(|f| f.severity.rank() <= threshold.rank());
        if hit {
            1
        } else {
            0
        }
    }
}

struct RootJob {
    root: Option<String>,
    program: Program,
}

struct RootOutcome {
    root: Option<String>,
    findings: Vec<Finding>,
    per_ri: BTreeMap<&'static str, usize>,
    elapsed: Duration,
    partial: Option<Vec<u8>>,
}

pub fn run(config: &RunConfig) -> Result<Report, RunError> {
    if config.rules.iter().any(|r| !(1..=16).contains(r)) {
        return Err(RunError::Config("rule ids must be within 1..=16".into()));
    }

    // Assemble per-root programs and the class-ownership map.
    let mut jobs: Vec<RootJob> = Vec::new();
    let mut owner_of_file: BTreeMap<String, String> = BTreeMap::new();
    match &config.inputs {
        Inputs::Files(files) => {
            if files.is_empty() {
                return Err(RunError::Config("no input files".into()));
            }
            let mut program = Program::default();
            for file in files {
                let text = std::fs::read_to_string(file)
                    .map_err(|e| RunError::Io(format!("{}: {e}", file.display())))?;
                let parsed = parse_program_named(&text, &file.to_string_lossy())?;
                program.merge(parsed).map_err(RunError::Config)?;
            }
            jobs.push(RootJob { root: None, program });
        }
        Inputs::Manifest(path) => {
            let manifest = parse_manifest(path)?;
            let dag = build_dag(&manifest)?;
            let roots = root_subprojects(&manifest, &dag);
            // A file's findings belong to the first root that reaches it.
            for root in &roots {
                for sub in closure_of(&dag, root) {
                    if let Some(s) = manifest.subprojects.iter().find(|s| s.name == sub) {
                        for f in &s.files {
                            owner_of_file
                                .entry(f.to_string_lossy().to_string())
                                .or_insert_with(|| root.clone());
                        }
                    }
                }
            }
            for root in roots {
                let program = classes_for_root(&manifest, &dag, &root)?;
                jobs.push(RootJob { root: Some(root), program });
            }
        }
    }

    let rule_cfg = config.rule_run_config();
    let order = execution_order(&config.rules);
    let budget = config.budget;
    let outcomes: Vec<RootOutcome> = par::with_jobs(config.jobs, || {
        par::map(jobs, |job| analyze_root(job, &order, &rule_cfg, budget))
    });

    let mut findings: Vec<Finding> = Vec::new();
    let mut per_ri: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut timing = BTreeMap::new();
    let mut partial_roots = Vec::new();
    let mut seen: BTreeSet<(u8, String, String, u32, String)> = BTreeSet::new();
    let mut sorted = outcomes;
    sorted.sort_by(|a, b| a.root.cmp(&b.root));
    for outcome in sorted {
        let root_name = outcome.root.clone().unwrap_or_default();
        timing.insert(root_name.clone(), outcome.elapsed);
        if let Some(completed) = outcome.partial {
            partial_roots.push(PartialRoot { root: root_name.clone(), completed_rules: completed });
        }
        for f in outcome.findings {
            // Cross-root ownership: a shared dependency's findings count once,
            // for the root that owns the file.
            if let Some(root) = &outcome.root {
                match owner_of_file.get(&f.file) {
                    Some(owner) if owner != root => continue,
                    _ => {}
                }
            }
            let key = (f.rule_id, f.class.clone(), f.method.clone(), f.line, f.evidence.clone());
            if seen.insert(key) {
                findings.push(f);
            }
        }
        for (ri, n) in outcome.per_ri {
            *per_ri.entry(ri).or_default() += n;
        }
    }
    findings.sort_by(|a, b| {
        (a.rule_id, &a.file, a.line, &a.class, &a.method, &a.evidence)
            .cmp(&(b.rule_id, &b.file, b.line, &b.class, &b.method, &b.evidence))
    });
    let mut per_rule: BTreeMap<u8, usize> = BTreeMap::new();
    for f in &findings {
        *per_rule.entry(f.rule_id).or_default() += 1;
    }

    Ok(Report {
        findings,
        per_rule,
        per_ri,
        timing,
        partial_roots,
        config: ConfigEcho {
            rules: config.rules.iter().copied().collect(),
            depth: config.depth,
            refinements: config.refinements,
            jobs: config.jobs,
            budget_seconds: config.budget.map(|d| d.as_secs()),
            fail_on: config.fail_on,
        },
    })
}

fn analyze_root(
    job: RootJob,
    order: &[u8],
    rule_cfg: &RuleRunConfig,
    budget: Option<Duration>,
) -> RootOutcome {
    let start = Instant::now();
    let graph = build_call_graph(&job.program);
    let registry = registry();
    let mut findings = Vec::new();
    let mut per_ri: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut completed = Vec::new();
    let mut partial = None;
    let mut outputs = Vec::new();
    if let Some(limit) = budget {
        for &rule_id in order {
            if start.elapsed() >= limit {
                partial = Some(completed.clone());
                break;
            }
            let spec = registry.iter().find(|r| r.id == rule_id).expect("rule id");
            outputs.push((rule_id, check_rule(&job.program, &graph, spec, rule_cfg)));
            completed.push(rule_id);
        }
    } else {
        // No budget: checkers are independent and can run concurrently.
        let ids: Vec<u8> = order.to_vec();
        let program = &job.program;
        let graph_ref = &graph;
        let reg = &registry;
        outputs = par::map(ids, |rule_id| {
            let spec = reg.iter().find(|r| r.id == rule_id).expect("rule id");
            (rule_id, check_rule(program, graph_ref, spec, rule_cfg))
        });
    }
    for (_, output) in outputs {
        for mut f in output.findings {
            f.root_subproject = job.root.clone();
            findings.push(f);
        }
        for ri in Ri::ALL {
            let n = output.removal_log.count_for(ri);
            if n > 0 {
                *per_ri.entry(ri.label()).or_default() += n;
            }
        }
    }
    // Within-root dedup on (rule, class, method, line, evidence).
    let mut seen = BTreeSet::new();
    findings.retain(|f| {
        seen.insert((f.rule_id, f.class.clone(), f.method.clone(), f.line, f.evidence.clone()))
    });
    RootOutcome { root: job.root, findings, per_ri, elapsed: start.elapsed(), partial }
}

/// Machine-readable report document (stable field and key order).
#[derive(serde::Serialize)]
struct JsonReport<'a> {
    version: &'static str,
    config: &'a ConfigEcho,
    findings: &'a [Finding],
    #[serde(rename = "perRule")]
    per_rule: BTreeMap<String, usize>,
    #[serde(rename = "perRI")]
    per_ri: &'a BTreeMap<&'static str, usize>,
    #[serde(rename = "partialRoots")]
    partial_roots: &'a [PartialRoot],
}

pub fn emit_json(report: &Report) -> String {
    let doc = JsonReport {
        version: env!("CARGO_PKG_VERSION"),
        config: &report.config,
        findings: &report.findings,
        per_rule: report.per_rule.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        per_ri: &report.per_ri,
        partial_roots: &report.partial_roots,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("report serialization");
    out.push('\n');
    out
}

pub fn emit_text(report: &Report, refine_breakdown: bool) -> String {
    let mut out = String::new();
    let registry = registry();
    for severity in [Severity::H, Severity::M, Severity::L] {
        let mut group: Vec<&Finding> =
            report.findings.iter().filter(|f| f.severity == severity).collect();
        if group.is_empty() {
            continue;
        }
        group.sort_by(|a, b| {
            (a.rule_id, &a.file, a.line, &a.evidence).cmp(&(b.rule_id, &b.file, b.line, &b.evidence))
        });
        out.push_str(&format!("severity {severity}\n"));
        for f in group {
            let title = registry
                .iter()
                .find(|r| r.id == f.rule_id)
                .map(|r| r.title)
                .unwrap_or("");
            out.push_str(&format!(
                "  rule {:2} {}:{} {}.{} — {} ({})\n",
                f.rule_id, f.file, f.line, f.class, f.method, f.evidence, title
            ));
        }
    }
    out.push_str(&format!("total findings: {}\n", report.findings.len()));
    if !report.per_rule.is_empty() {
        let counts: Vec<String> =
            report.per_rule.iter().map(|(r, n)| format!("{r}:{n}")).collect();
        out.push_str(&format!("per rule: {}\n", counts.join(" ")));
    }
    if refine_breakdown {
        out.push_str("refinement removals:\n");
        for ri in Ri::ALL {
            let n = report.per_ri.get(ri.label()).copied().unwrap_or(0);
            out.push_str(&format!("  {}: {}\n", ri.label(), n));
        }
    }
    for partial in &report.partial_roots {
        let rules: Vec<String> =
            partial.completed_rules.iter().map(|r| r.to_string()).collect();
        out.push_str(&format!(
            "partial root {} (completed rules: {})\n",
            partial.root,
            rules.join(",")
        ));
    }
    out
}

/// Rule registry dump for `--list-rules`.
pub fn list_rules() -> String {
    rules::registry_dump()
}
