//! Benchmark problems, metrics and the comparison harness.

mod cases;
mod harness;
mod tabular;

pub use cases::{
    branin_pair, forrester_pair, load_case, oscillator_pair, power_pair, write_power_dataset,
    AnalyticPair, BenchmarkCase, CaseName,
};
pub use harness::{relative_mse, run_case, run_loaded_case, ModelSelection, RunReport};
pub use tabular::{load_tabulated, write_tabulated, GradientMode};
