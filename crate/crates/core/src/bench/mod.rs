//! Scenario sweeps comparing placement schemes by bound and simulated error.

mod baseline;
mod config;
mod emit;
mod run;

pub use baseline::{generate_baseline, Extent, Scheme};
pub use config::{ScenarioConfig, SceneConfig, SegmentConfig, SweepAxis, SweepConfig};
pub use emit::{emit, to_json, write_correlation_maps, write_csv, write_json, write_layouts, CSV_HEADER};
pub use run::{resize_region, run_scenario, run_scenario_full, BuiltLayout, ResultRow, ScenarioOutput};
