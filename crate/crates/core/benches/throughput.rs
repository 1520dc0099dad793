//! Parallel vs sequential throughput: the rayon-backed path against the
//! always-compiled sequential path, over a generated project (per-rule
//! parallelism) and over a parsed case set (per-case parallelism).

use criterion::{criterion_group, criterion_main, Criterion};

use tirscan_core::callgraph::{build_call_graph, CallGraph};
use tirscan_core::ir::{parse_program, Program};
use tirscan_core::par;
use tirscan_core::rules::{check_rule, registry, RuleRunConfig};
use tirscan_core::synth::{large_project, refinement_case};

fn rule_sweep(program: &Program, graph: &CallGraph, parallel: bool) -> usize {
    let cfg = RuleRunConfig::default();
    let rules = registry();
    let ids: Vec<usize> = (0..rules.len()).collect();
    let run = |i: usize| check_rule(program, graph, &rules[i], &cfg).findings.len();
    let counts: Vec<usize> = if parallel { par::map(ids, run) } else { par::map_seq(ids, run) };
    counts.into_iter().sum()
}

fn bench_rule_sweep(c: &mut Criterion) {
    let project = large_project(60, 120);
    let program = parse_program(&project.source).expect("generated project parses");
    let graph = build_call_graph(&program);
    let mut group = c.benchmark_group("all-rules-60-classes");
    group.sample_size(20);
    group.bench_function("parallel", |b| b.iter(|| rule_sweep(&program, &graph, true)));
    group.bench_function("sequential", |b| b.iter(|| rule_sweep(&program, &graph, false)));
    group.finish();
}

fn case_sweep(cases: &[(Program, CallGraph)], parallel: bool) -> usize {
    let cfg = RuleRunConfig::default();
    let ids: Vec<usize> = (0..cases.len()).collect();
    let run = |i: usize| {
        let (program, graph) = &cases[i];
        registry()
            .iter()
            .map(|spec| check_rule(program, graph, spec, &cfg).findings.len())
            .sum::<usize>()
    };
    let counts: Vec<usize> = if parallel { par::map(ids, run) } else { par::map_seq(ids, run) };
    counts.into_iter().sum()
}

fn bench_case_sweep(c: &mut Criterion) {
    let cases: Vec<(Program, CallGraph)> = (0..96)
        .map(|i| {
            let planted = refinement_case(i);
            let program = parse_program(&planted.source).expect("case parses");
            let graph = build_call_graph(&program);
            (program, graph)
        })
        .collect();
    let mut group = c.benchmark_group("case-set-96");
    group.sample_size(20);
    group.bench_function("parallel", |b| b.iter(|| case_sweep(&cases, true)));
    group.bench_function("sequential", |b| b.iter(|| case_sweep(&cases, false)));
    group.finish();
}

criterion_group!(benches, bench_rule_sweep, bench_case_sweep);
criterion_main!(benches);
