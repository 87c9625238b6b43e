//! Command-line front end for the interval observer: scenario files in,
//! CSV trajectories, comparison tables and gain certificates out.

pub mod commands;
pub mod pipeline;
pub mod report;
pub mod scenario;

pub use pipeline::{prepare, CliError, Prepared, VariantChoice};
pub use scenario::Scenario;

/// Continuous bioreactor with a measured biomass.
pub const BIOREACTOR_SCENARIO: &str = include_str!("../scenarios/bioreactor.scn");
/// Three-state system with bilinear terms and a known linear part.
pub const LINEARIZED_SCENARIO: &str = include_str!("../scenarios/linearized.scn");
