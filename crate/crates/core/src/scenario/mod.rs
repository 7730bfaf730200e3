//! Scenario files, the built-in scenario registry and the runner behind the
//! `gaugeflow` binary.

mod builtin;
mod config;
pub mod json;
mod run;

pub use builtin::{builtin_names, builtin_text};
pub use config::{
    parse_config, ConfigError, Formulation, GaugeSpec, GroupSpec, IntegratorSpec, InternalSpec, LagrangianSpec,
    MethodSpec, OutputSpec, PatchSpec, ScenarioConfig,
};
pub use run::*;
