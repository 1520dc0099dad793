//! Subproject manifests: parse `project.manifest`, build the dependency DAG,
//! find root subprojects and assemble the merged program per root.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ir::{parse_program_named, Program};

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("{0}")]
    Io(String),
    #[error("manifest line {line}: {msg}")]
    Manifest { line: usize, msg: String },
    #[error("subproject `{0}` depends on undefined subproject `{1}`")]
    MissingDependency(String, String),
    #[error("dependency cycle through `{0}`")]
    Cycle(String),
    #[error("pattern `{0}` matches no .tir files")]
    NoFiles(String),
    #[error("{0}")]
    Parse(#[from] crate::ir::ParseError),
    #[error("{0}")]
    Merge(String),
}

#[derive(Clone, Debug)]
pub struct Subproject {
    pub name: String,
    pub files: Vec<PathBuf>,
    pub deps: Vec<String>,
    pub is_test: bool,
}

#[derive(Clone, Debug)]
pub struct SubprojectManifest {
    pub subprojects: Vec<Subproject>,
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug)]
pub struct DependencyDag {
    /// Node name → dependency names (edges point at dependencies).
    pub edges: BTreeMap<String, Vec<String>>,
}

/// Parse and validate a manifest file.
///
/// ```text
/// subproject security-admin
///   files admin/*.tir
///   deps credbuilder, utils
///   test true
/// ```
pub fn parse_manifest(path: &Path) -> Result<SubprojectManifest, ProjectError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ProjectError::Io(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut subprojects: Vec<Subproject> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, rest) = match trimmed.split_once(char::is_whitespace) {
            Some((k, r)) => (k.trim_end_matches(':'), r.trim()),
            None => (trimmed.trim_end_matches(':'), ""),
        };
        match key {
            "subproject" => {
                if rest.is_empty() {
                    return Err(ProjectError::Manifest { line, msg: "missing subproject name".into() });
                }
                if subprojects.iter().any(|s| s.name == rest) {
                    return Err(ProjectError::Manifest {
                        line,
                        msg: format!("duplicate subproject `{rest}`"),
                    });
                }
                subprojects.push(Subproject {
                    name: rest.to_string(),
                    files: Vec::new(),
                    deps: Vec::new(),
                    is_test: false,
                });
            }
            "files" | "deps" | "test" => {
                let current = subprojects.last_mut().ok_or(ProjectError::Manifest {
                    line,
                    msg: format!("`{key}` before any `subproject`"),
                })?;
                match key {
                    "files" => {
                        for pattern in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                            let matched = expand_pattern(&base_dir, pattern)?;
                            current.files.extend(matched);
                        }
                    }
                    "deps" => {
                        current.deps.extend(
                            rest.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from),
                        );
                    }
                    "test" => current.is_test = rest == "true",
                    _ => unreachable!(),
                }
            }
            other => {
                return Err(ProjectError::Manifest { line, msg: format!("unknown key `{other}`") })
            }
        }
    }

    let names: BTreeSet<&str> = subprojects.iter().map(|s| s.name.as_str()).collect();
    for sub in &subprojects {
        for dep in &sub.deps {
            if !names.contains(dep.as_str()) {
                return Err(ProjectError::MissingDependency(sub.name.clone(), dep.clone()));
            }
        }
    }
    let manifest = SubprojectManifest { subprojects, base_dir };
    build_dag(&manifest)?;
    Ok(manifest)
}

/// Single-`*`-per-segment glob, enough for `admin/*.tir` style patterns.
fn expand_pattern(base: &Path, pattern: &str) -> Result<Vec<PathBuf>, ProjectError> {
    if !pattern.contains('*') {
        let path = base.join(pattern);
        if !path.is_file() {
            return Err(ProjectError::NoFiles(pattern.to_string()));
        }
        return Ok(vec![path]);
    }
    let full = base.join(pattern);
    let dir = full.parent().unwrap_or(base);
    let file_pat = full.file_name().and_then(|s| s.to_str()).unwrap_or("*");
    let entries = std::fs::read_dir(dir)
        .map_err(|e| ProjectError::Io(format!("{}: {e}", dir.display())))?;
    let mut matched: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .filter(|p| {
            p.file_name()
                .and_then(|s| s.to_str())
                .map(|name| segment_matches(file_pat, name))
                .unwrap_or(false)
        })
        .collect();
    matched.sort();
    if matched.is_empty() {
        return Err(ProjectError::NoFiles(pattern.to_string()));
    }
    Ok(matched)
}

fn segment_matches(pattern: &str, name: &str) -> bool {
    match pattern.split_once('*') {
        None => pattern == name,
        Some((prefix, suffix)) => {
            name.len() >= prefix.len() + suffix.len()
                && name.starts_with(prefix)
                && name.ends_with(suffix)
        }
    }
}

/// Build the dependency DAG, rejecting cycles.
pub fn build_dag(manifest: &SubprojectManifest) -> Result<DependencyDag, ProjectError> {
    let mut edges = BTreeMap::new();
    for sub in &manifest.subprojects {
        edges.insert(sub.name.clone(), sub.deps.clone());
    }
    // Cycle check via coloring.
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let mut colors: BTreeMap<&str, Color> =
        edges.keys().map(|k| (k.as_str(), Color::White)).collect();
    fn visit<'a>(
        node: &'a str,
        edges: &'a BTreeMap<String, Vec<String>>,
        colors: &mut BTreeMap<&'a str, Color>,
    ) -> Result<(), ProjectError> {
        colors.insert(node, Color::Grey);
        for dep in edges.get(node).map(|v| v.as_slice()).unwrap_or(&[]) {
            match colors.get(dep.as_str()) {
                Some(Color::Grey) => return Err(ProjectError::Cycle(dep.clone())),
                Some(Color::White) => visit(dep, edges, colors)?,
                _ => {}
            }
        }
        colors.insert(node, Color::Black);
        Ok(())
    }
    let nodes: Vec<&str> = edges.keys().map(|k| k.as_str()).collect();
    for node in nodes {
        if colors[node] == Color::White {
            visit(node, &edges, &mut colors)?;
        }
    }
    Ok(DependencyDag { edges })
}

/// Nodes with no incoming edges, sorted; test-only subprojects excluded.
pub fn root_subprojects(manifest: &SubprojectManifest, dag: &DependencyDag) -> Vec<String> {
    let mut has_incoming: BTreeSet<&str> = BTreeSet::new();
    for deps in dag.edges.values() {
        for d in deps {
            has_incoming.insert(d);
        }
    }
    let test_only: BTreeSet<&str> = manifest
        .subprojects
        .iter()
        .filter(|s| s.is_test)
        .map(|s| s.name.as_str())
        .collect();
    dag.edges
        .keys()
        .filter(|n| !has_incoming.contains(n.as_str()) && !test_only.contains(n.as_str()))
        .cloned()
        .collect()
}

/// All subprojects reachable from `root` (including itself), sorted.
pub fn closure_of(dag: &DependencyDag, root: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut work = vec![root.to_string()];
    while let Some(n) = work.pop() {
        if seen.insert(n.clone()) {
            for d in dag.edges.get(&n).map(|v| v.as_slice()).unwrap_or(&[]) {
                work.push(d.clone());
            }
        }
    }
    seen.into_iter().collect()
}

/// Union of the root's and all reachable dependencies' parsed classes.
pub fn classes_for_root(
    manifest: &SubprojectManifest,
    dag: &DependencyDag,
    root: &str,
) -> Result<Program, ProjectError> {
    let wanted = closure_of(dag, root);
    let mut program = Program::default();
    for name in &wanted {
        let sub = manifest
            .subprojects
            .iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| ProjectError::MissingDependency(root.to_string(), name.clone()))?;
        for file in &sub.files {
            let text = std::fs::read_to_string(file)
                .map_err(|e| ProjectError::Io(format!("{}: {e}", file.display())))?;
            let label = file.to_string_lossy().to_string();
            let parsed = parse_program_named(&text, &label)?;
            program.merge(parsed).map_err(ProjectError::Merge)?;
        }
    }
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, content: &str) {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).unwrap();
        }
        fs::write(path, content).unwrap();
    }

    fn tir_class(name: &str) -> String {
        format!("class {name} {{\n  method void go() {{\n    return\n  }}\n}}\n")
    }

    #[test]
    fn roots_and_closure() {
        let dir = std::env::temp_dir().join("tirscan-project-test");
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        write(&dir, "admin/a.tir", &tir_class("Admin"));
        write(&dir, "kms/k.tir", &tir_class("Kms"));
        write(&dir, "shared/s.tir", &tir_class("Shared"));
        write(
            &dir,
            "project.manifest",
            "subproject security-admin\n  files admin/*.tir\n  deps shared\nsubproject plugins-kms\n  files kms/*.tir\n  deps shared\nsubproject shared\n  files shared/*.tir\n",
        );
        let manifest = parse_manifest(&dir.join("project.manifest")).unwrap();
        let dag = build_dag(&manifest).unwrap();
        let roots = root_subprojects(&manifest, &dag);
        assert_eq!(roots, vec!["plugins-kms".to_string(), "security-admin".to_string()]);
        let program = classes_for_root(&manifest, &dag, "security-admin").unwrap();
        assert!(program.class("Admin").is_some());
        assert!(program.class("Shared").is_some());
        assert!(program.class("Kms").is_none());
    }

    #[test]
    fn single_subproject_manifest() {
        let dir = std::env::temp_dir().join("tirscan-project-single");
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        write(&dir, "only.tir", &tir_class("Only"));
        write(&dir, "project.manifest", "subproject only\n  files only.tir\n");
        let manifest = parse_manifest(&dir.join("project.manifest")).unwrap();
        let dag = build_dag(&manifest).unwrap();
        assert_eq!(dag.edges.len(), 1);
        assert!(dag.edges["only"].is_empty());
        assert_eq!(root_subprojects(&manifest, &dag), vec!["only".to_string()]);
    }

    #[test]
    fn cycle_is_rejected() {
        let dir = std::env::temp_dir().join("tirscan-project-cycle");
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        write(&dir, "a.tir", &tir_class("A"));
        write(
            &dir,
            "project.manifest",
            "subproject a\n  files a.tir\n  deps b\nsubproject b\n  files a.tir\n  deps a\n",
        );
        let err = parse_manifest(&dir.join("project.manifest")).unwrap_err();
        assert!(matches!(err, ProjectError::Cycle(_)));
    }

    #[test]
    fn diamond_includes_shared_once() {
        let dir = std::env::temp_dir().join("tirscan-project-diamond");
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        write(&dir, "top.tir", &tir_class("Top"));
        write(&dir, "l.tir", &tir_class("L"));
        write(&dir, "r.tir", &tir_class("R"));
        write(&dir, "bottom.tir", &tir_class("Bottom"));
        write(
            &dir,
            "project.manifest",
            "subproject top\n  files top.tir\n  deps l, r\nsubproject l\n  files l.tir\n  deps bottom\nsubproject r\n  files r.tir\n  deps bottom\nsubproject bottom\n  files bottom.tir\n",
        );
        let manifest = parse_manifest(&dir.join("project.manifest")).unwrap();
        let dag = build_dag(&manifest).unwrap();
        let program = classes_for_root(&manifest, &dag, "top").unwrap();
        assert_eq!(program.classes.len(), 4);
    }
}
