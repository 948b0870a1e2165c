//! Slot-angle scenarios, the sweep runner and its artifacts.

mod config;
mod run;

pub use config::{
    DomainConfig, LaguerreSection, MediumConfig, Mode, Model, Scenario, ScenarioConfig, SolveMode, TestbedConfig,
};
pub use run::{
    alpha_label, compare_with_direct, run_scenario, OracleEntry, RunManifest, SolveOutcome, SweepEntry, TestbedEntry,
    ORACLE_MAX_DOFS,
};
