//! Action abstraction: five parameterised unit scripts that turn an
//! observation into unit orders, and doctrine rules that veto orders.

mod doctrine;
mod script;

pub use doctrine::{filter_doctrine, parse_doctrine, DoctrineError, DoctrineRule};
pub use script::{
    evaluate_script, scripted_action, uniform_scripted_action, ScriptError, ScriptId, ScriptParams, ScriptPolicy,
};
