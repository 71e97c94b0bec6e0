//! Must-fail analysis for a first-order constructor language.
//!
//! Programs are compiled into two models: a pattern-matching recursion
//! scheme describing each function's output trees, and a context-aware
//! ranked tree automaton describing its crash conditions. A bounded model
//! checker combines the two to find call sites that definitely crash when
//! reached; a reference interpreter serves as the ground-truth oracle.

pub mod frontend;
pub mod interp;
pub mod pmrs;
pub mod term;

// CLI entry point lives in cli.rs; re-exported for the binary.
mod cli;
pub use cli::run_cli;
