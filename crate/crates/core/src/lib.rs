//! Batch static analysis of crypto API misuse over a small textual
//! three-address IR: demand-driven backward/forward slicing, contextual
//! refinement of constant candidates, a 16-rule checker registry, subproject
//! DAG handling, report assembly and a benchmark scorer.

pub mod bench;
pub mod callgraph;
pub mod ir;
pub mod par;
pub mod project;
pub mod refine;
pub mod report;
pub mod rules;
pub mod slice;
pub mod synth;

pub use report::{run, RunConfig, Report};
