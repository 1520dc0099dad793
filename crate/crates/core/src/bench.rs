//! Benchmark corpus loading and scoring: each case is one TIR program plus
//! a `.expect` sidecar (`expect <ruleId> <line>` lines, or `clean`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::callgraph::build_call_graph;
use crate::ir::parse_program_named;
use crate::par;
use crate::rules::{check_rule, registry, RuleRunConfig};
use crate::slice::SlicerConfig;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Io(String),
    #[error("case `{0}`: missing expect sidecar")]
    MissingExpect(String),
    #[error("case `{0}`: malformed metadata: {1}")]
    Metadata(String, String),
    #[error("{0}")]
    Parse(#[from] crate::ir::ParseError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    Basic,
    InterprocTwo,
    InterprocMulti,
    FieldSensitive,
    FpTest,
    CorrectUse,
}

impl Category {
    fn from_dir(name: &str) -> Option<Category> {
        match name {
            "basic" => Some(Category::Basic),
            "interproc_two" => Some(Category::InterprocTwo),
            "interproc_multi" => Some(Category::InterprocMulti),
            "field_sensitive" => Some(Category::FieldSensitive),
            "fp_test" => Some(Category::FpTest),
            "correct_use" => Some(Category::CorrectUse),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Category::Basic => "basic",
            Category::InterprocTwo => "interproc-two",
            Category::InterprocMulti => "interproc-multi",
            Category::FieldSensitive => "field-sensitive",
            Category::FpTest => "fp-test",
            Category::CorrectUse => "correct-use",
        };
        write!(f, "{name}")
    }
}

#[derive(Clone, Debug)]
pub struct BenchCase {
    pub id: String,
    pub rule_id: u8,
    pub category: Category,
    pub path: PathBuf,
    /// Expected (ruleId, line) findings; empty means a true-negative case.
    pub expected: Vec<(u8, u32)>,
}

/// Load all cases under `corpus/basic` and `corpus/advanced/<category>`.
pub fn load_corpus(dir: &Path) -> Result<Vec<BenchCase>, BenchError> {
    let mut cases = Vec::new();
    let mut roots: Vec<(PathBuf, Category)> = vec![(dir.join("basic"), Category::Basic)];
    let advanced = dir.join("advanced");
    if advanced.is_dir() {
        for entry in std::fs::read_dir(&advanced)
            .map_err(|e| BenchError::Io(format!("{}: {e}", advanced.display())))?
        {
            let entry = entry.map_err(|e| BenchError::Io(e.to_string()))?;
            let name = entry.file_name().to_string_lossy().to_string();
            if let Some(cat) = Category::from_dir(&name) {
                roots.push((entry.path(), cat));
            }
        }
    }
    for (root, category) in roots {
        if !root.is_dir() {
            continue;
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(&root)
            .map_err(|e| BenchError::Io(format!("{}: {e}", root.display())))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().map(|e| e == "tir").unwrap_or(false))
            .collect();
        files.sort();
        for path in files {
            cases.push(load_case(&path, category)?);
        }
    }
    Ok(cases)
}

fn load_case(path: &Path, category: Category) -> Result<BenchCase, BenchError> {
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("case").to_string();
    let rule_id = id
        .strip_prefix('r')
        .and_then(|rest| rest.split('_').next())
        .and_then(|num| num.parse::<u8>().ok())
        .ok_or_else(|| BenchError::Metadata(id.clone(), "file name must start with rNN_".into()))?;
    let expect_path = path.with_extension("expect");
    if !expect_path.is_file() {
        return Err(BenchError::MissingExpect(id));
    }
    let text = std::fs::read_to_string(&expect_path)
        .map_err(|e| BenchError::Io(format!("{}: {e}", expect_path.display())))?;
    let mut expected = Vec::new();
    let mut clean = false;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "clean" {
            clean = true;
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("expect"), Some(rule), Some(lno), None) => {
                let rule: u8 = rule
                    .parse()
                    .map_err(|_| BenchError::Metadata(id.clone(), format!("bad rule `{rule}`")))?;
                let lno: u32 = lno
                    .parse()
                    .map_err(|_| BenchError::Metadata(id.clone(), format!("bad line `{lno}`")))?;
                expected.push((rule, lno));
            }
            _ => return Err(BenchError::Metadata(id.clone(), format!("bad line `{line}`"))),
        }
    }
    if clean && !expected.is_empty() {
        return Err(BenchError::Metadata(id, "`clean` mixed with `expect` lines".into()));
    }
    Ok(BenchCase { id, rule_id, category, path: path.to_path_buf(), expected })
}

/// Confusion counts for one slice of the corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub gtp: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// True-negative (clean) case count, the FPR denominator base.
    pub tn_cases: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.gtp == 0 {
            1.0
        } else {
            self.tp as f64 / self.gtp as f64
        }
    }

    pub fn fpr(&self) -> f64 {
        if self.fp + self.tn_cases == 0 {
            0.0
        } else {
            self.fp as f64 / (self.fp + self.tn_cases) as f64
        }
    }

    pub fn fnr(&self) -> f64 {
        if self.gtp == 0 {
            0.0
        } else {
            self.fn_ as f64 / self.gtp as f64
        }
    }

    fn add(&mut self, other: Counts) {
        self.gtp += other.gtp;
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn_cases += other.tn_cases;
    }
}

/// (case id, unmatched findings, missed expectations).
pub type Mismatch = (String, Vec<(u8, u32)>, Vec<(u8, u32)>);

#[derive(Clone, Debug, Default)]
pub struct ScoreReport {
    pub per_category: BTreeMap<Category, Counts>,
    pub per_rule: BTreeMap<u8, Counts>,
    pub overall: Counts,
    /// Per-case diagnostics for anything off the expectations.
    pub mismatches: Vec<Mismatch>,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub rules: BTreeSet<u8>,
    pub depth: u32,
    pub refinements: bool,
    pub jobs: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { rules: (1..=16).collect(), depth: 1, refinements: true, jobs: None }
    }
}

/// Strict (ruleId, line) matching of actual findings against expectations.
pub fn score_findings(expected: &[(u8, u32)], actual: &[(u8, u32)]) -> (usize, usize, usize) {
    let mut remaining: Vec<(u8, u32)> = expected.to_vec();
    let mut tp = 0;
    let mut fp = 0;
    for a in actual {
        if let Some(pos) = remaining.iter().position(|e| e == a) {
            remaining.remove(pos);
            tp += 1;
        } else {
            fp += 1;
        }
    }
    (tp, fp, remaining.len())
}

/// Run the analyzer over every case and aggregate scores.
pub fn run_bench(corpus: &Path, config: &BenchConfig) -> Result<ScoreReport, BenchError> {
    let cases: Vec<BenchCase> = load_corpus(corpus)?
        .into_iter()
        .filter(|c| config.rules.contains(&c.rule_id))
        .collect();
    let rule_cfg = RuleRunConfig {
        slicer: SlicerConfig::with_depth(config.depth),
        refinements_enabled: config.refinements,
        check_client_trusted: false,
    };
    let rules: Vec<u8> = config.rules.iter().copied().collect();
    type CaseOutcome = Result<(BenchCase, Vec<(u8, u32)>), BenchError>;
    let outcomes: Vec<CaseOutcome> =
        par::with_jobs(config.jobs, || {
            par::map(cases, |case| {
                let text = std::fs::read_to_string(&case.path)
                    .map_err(|e| BenchError::Io(format!("{}: {e}", case.path.display())))?;
                let program = parse_program_named(&text, &case.path.to_string_lossy())?;
                let graph = build_call_graph(&program);
                let registry = registry();
                let mut actual: Vec<(u8, u32)> = Vec::new();
                let mut seen = BTreeSet::new();
                for &rule_id in &rules {
                    let spec = registry.iter().find(|r| r.id == rule_id).expect("rule id");
                    for f in check_rule(&program, &graph, spec, &rule_cfg).findings {
                        if seen.insert((f.rule_id, f.class.clone(), f.method.clone(), f.line, f.evidence.clone()))
                        {
                            actual.push((f.rule_id, f.line));
                        }
                    }
                }
                Ok((case, actual))
            })
        });

    let mut report = ScoreReport::default();
    for outcome in outcomes {
        let (case, actual) = outcome?;
        let (tp, fp, fn_) = score_findings(&case.expected, &actual);
        let counts = Counts {
            gtp: case.expected.len(),
            tp,
            fp,
            fn_,
            tn_cases: usize::from(case.expected.is_empty()),
        };
        report.per_category.entry(case.category).or_default().add(counts);
        report.per_rule.entry(case.rule_id).or_default().add(counts);
        report.overall.add(counts);
        if fp > 0 || fn_ > 0 {
            let extra: Vec<(u8, u32)> =
                actual.iter().filter(|a| !case.expected.contains(a)).copied().collect();
            let mut missed = case.expected.clone();
            for a in &actual {
                if let Some(pos) = missed.iter().position(|e| e == a) {
                    missed.remove(pos);
                }
            }
            report.mismatches.push((case.id.clone(), extra, missed));
        }
    }
    Ok(report)
}

pub fn emit_text(report: &ScoreReport) -> String {
    let mut out = String::new();
    let line = |label: String, c: &Counts| {
        format!(
            "{label:<16} GTP {:>3}  TP {:>3}  FP {:>3}  FN {:>3}  precision {:>6.2}  recall {:>6.2}  FPR {:>6.2}  FNR {:>6.2}\n",
            c.gtp,
            c.tp,
            c.fp,
            c.fn_,
            c.precision() * 100.0,
            c.recall() * 100.0,
            c.fpr() * 100.0,
            c.fnr() * 100.0
        )
    };
    for (cat, counts) in &report.per_category {
        out.push_str(&line(cat.to_string(), counts));
    }
    out.push_str(&line("overall".to_string(), &report.overall));
    out.push_str("per rule:\n");
    for (rule, counts) in &report.per_rule {
        out.push_str(&format!(
            "  rule {:>2}: GTP {:>3} TP {:>3} FP {:>3} FN {:>3}\n",
            rule, counts.gtp, counts.tp, counts.fp, counts.fn_
        ));
    }
    for (id, extra, missed) in &report.mismatches {
        out.push_str(&format!("mismatch {id}: unexpected {extra:?}, missed {missed:?}\n"));
    }
    out
}

#[derive(serde::Serialize)]
struct JsonCounts {
    gtp: usize,
    tp: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    precision: f64,
    recall: f64,
    fpr: f64,
    fnr: f64,
}

impl From<&Counts> for JsonCounts {
    fn from(c: &Counts) -> Self {
        JsonCounts {
            gtp: c.gtp,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            precision: (c.precision() * 10000.0).round() / 100.0,
            recall: (c.recall() * 10000.0).round() / 100.0,
            fpr: (c.fpr() * 10000.0).round() / 100.0,
            fnr: (c.fnr() * 10000.0).round() / 100.0,
        }
    }
}

pub fn emit_json(report: &ScoreReport) -> String {
    #[derive(serde::Serialize)]
    struct Doc {
        #[serde(rename = "perCategory")]
        per_category: BTreeMap<String, JsonCounts>,
        #[serde(rename = "perRule")]
        per_rule: BTreeMap<String, JsonCounts>,
        overall: JsonCounts,
    }
    let doc = Doc {
        per_category: report
            .per_category
            .iter()
            .map(|(k, v)| (k.to_string(), JsonCounts::from(v)))
            .collect(),
        per_rule: report
            .per_rule
            .iter()
            .map(|(k, v)| (format!("{k}"), JsonCounts::from(v)))
            .collect(),
        overall: JsonCounts::from(&report.overall),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("score serialization");
    out.push('\n');
    out
}
