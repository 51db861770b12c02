//! The two demonstrations: toggling an engine's ignition and
//! running a four-stroke engine on limited fuel.

pub mod engine;
pub mod ignition;

use thiserror::Error;

use crate::ontology::KbError;
use crate::transition::ScheduleError;
use crate::world::WorldError;

pub use engine::{build_engine_world, run_engine, EngineRun, EngineScenario, Stroke};
pub use ignition::{build_ignition_world, run_ignition, IgnitionRun, IgnitionScenario};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}
