//! Experiment harness for `mograsp`: object and scene generation, the filter
//! evaluation and planner benchmarks, picking runs and SVG rendering.

pub mod filter_eval;
pub mod objects;
pub mod pick;
pub mod planner_bench;
pub mod render;
pub mod scenes;
pub mod stats;
