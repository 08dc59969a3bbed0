pub mod criteria;
pub mod error;
pub mod harness;
pub mod index_form;
pub mod models;
pub mod ode;
pub mod profile;
pub mod scenario;

pub use error::{Error, OdeError, ProfileError, Result};
pub use profile::{CoefficientProfile, ProfileKind};
pub use scenario::{
    validate_scenario, FixedPointScenario, Location, Parity, SolverTolerances, SwirlConstants,
    ValidationReport, VerticalPressure, Violation,
};
