//! Parameter schedules and the iteration schemes.

mod config;
mod run;
mod schedule;
mod trace;

pub use config::{
    validate_conditions, Condition, Finding, FindingStatus, InitRule, IterConfig, Scheme, StopRule,
    DEFAULT_DELTA, DEFAULT_GUARD,
};
pub use run::{run, step_inertial_s, InertialStep};
pub use schedule::{Schedule, ScheduleKind};
pub use trace::{IterationTrace, StepRecord, Termination};
