//! Genus statistics for 2-bridge knots `K(2a_1, ..., 2a_2m)` in even 4-plat
//! form.
//!
//! - [`knot`]: words, knot classes, connected sums.
//! - [`partition`]: exact counts and averages over signed even compositions.
//! - [`cobordism`]: the constructive slice-genus upper bound with replayable
//!   traces.
//! - [`montecarlo`]: seeded parallel sampling and the random-walk experiment.
//! - [`report`]: CSV and JSON records for all of the above.

pub mod cobordism;
pub mod error;
pub mod knot;
pub mod montecarlo;
pub mod partition;
pub mod report;

pub use error::{EngineError, ParseWordError, SampleError, StatsError};
pub use knot::{ConnectedSum, KnotClass, TwistWord};
