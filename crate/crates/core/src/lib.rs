//! A timed process calculus for PLC scan cycles, with runtime enforcement
//! through edit automata.
//!
//! The crate covers the term languages, their operational semantics, the
//! synthesis of enforcement monitors from controller code, explicit-state
//! exploration, and checkers for weak trace equivalence, weak simulation and
//! weak bisimulation.

#![no_std]

extern crate alloc;

pub mod alphabet;
pub mod enforcement;
pub mod equivalence;
pub mod explore;
pub mod hml;
pub mod lts;
mod print;
pub mod step;
pub mod synthesis;
pub mod system;
pub mod term;
pub mod validate;

pub use alphabet::{Action, Alphabet, Name, NameKind, Var};
pub use enforcement::{
    detect_on_trace, execute, DetectError, Detection, EnforcementEvent, EventKind, ExecuteError,
    Run, Schedule, Stop,
};
pub use equivalence::{
    trace_equivalent, weak_transitions, weakly_bisimilar, weakly_simulated_by, Counterexample,
    EquivError, EquivVerdict, Relation, Side, WeakLts, DEFAULT_PAIR_BUDGET,
};
pub use explore::{explore, explore_with, ExploreError, Explored, DEFAULT_BUDGET};
pub use lts::{find_deadlocks, run_trace, Lts};
pub use print::MaliciousPrefix;
pub use step::{
    compromised_step, ctrl_step, edit_step, malware_step, monitored_step, network_step,
};
pub use synthesis::{check_syntactic_determinism, synthesize, SynthesisError, SynthesisReport};
pub use system::{NodeMove, NodeRule, NodeState, SysState, System, SystemError};
pub use term::{
    CompromisedTerm, ControllerTerm, EditAutomaton, EditBranch, FieldNetwork, MalwareTerm,
    MonitoredController, Suppression,
};
pub use validate::{size, validate, Validate, ValidateOptions, Violation};
