//! Scenario files, built-in presets, runs, convergence certification and
//! output writers.

mod certify;
mod config;
mod output;
mod presets;
mod run;

pub use certify::{certify, CERTIFY_SHIFT_THRESHOLD, CERTIFY_TOLERANCE_FACTOR};
pub use config::{parse_scenarios, FieldSpec, Overrides, Scenario, ScenarioKind};
pub use output::write_outputs;
pub use presets::{load, preset, preset_description, preset_names, Preset, PRESETS};
pub use run::{
    run_scenario, run_with, scenario_basis, Convergence, EffectiveComparison, FieldSummary, RunOutput, RunReport, ShiftReport,
    TransferSummary, TruncationReport, UnitsReport,
};
