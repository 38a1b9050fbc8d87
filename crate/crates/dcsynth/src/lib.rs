//! dcsynth compiles target quantum states and unitaries into dynamic
//! circuits — circuits with mid-circuit measurements and classically
//! controlled feed-forward branches — by numerically minimizing cost
//! functions that stay faithful in the presence of measurement. It also
//! models when a dynamic circuit beats a unitary one under a hardware
//! noise budget.

pub mod circuit;
pub mod cost;
pub mod deferral;
pub mod error;
pub mod instantiate;
pub mod linalg;
pub mod synth;
pub mod targets;

pub use error::{DcError, Result};
