//! Scenario simulation, configuration, the end-to-end driver and metrics.

mod config;
mod driver;
mod io;
mod metrics;
mod sim;

pub use config::{
    BirthBlock, ComponentBlock, ModelBlock, Models, ScenarioConfig, SensorBlock, SimBlock,
};
pub use driver::{run, track, Pipeline, RunReport, ScanRecord};
pub use io::{
    read_config, read_observations, read_report, read_truth, write_observations, write_run,
    write_truth, HarnessError, OBSERVATIONS_FILE, REPORT_FILE, SCANS_FILE, TRUTH_FILE,
};
pub use metrics::{metrics, MetricsSummary, ScanMetrics};
pub use sim::{simulate, GroundTruth, TargetTruth};
