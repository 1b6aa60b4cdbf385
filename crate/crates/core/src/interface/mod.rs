//! The agent-facing API: side-filtered observations, belief injection into
//! planning copies, policy registration and action/observation space
//! descriptors.

mod inject;
mod observe;
mod policy;
mod spaces;

pub use inject::{inject_belief, BeliefAssumption, HypothesizedUnit, InjectError};
pub use observe::{observe, Contact, Observation, ObservationLevel};
pub use policy::{FnPolicy, HoldPolicy, Policy, RegistrationError, RunConfig};
pub use spaces::{describe_spaces, ActionSpace, FieldDescriptor, ObservationSpace, UnitActionSpace};
