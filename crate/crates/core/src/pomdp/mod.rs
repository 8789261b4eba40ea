//! Tabular POMDP models, trajectory simulation, returns and the exhaustive
//! enumeration oracle.

mod enumerate;
mod history;
mod model;

pub use enumerate::{
    enumerate_histories, enumerate_paths, exact_value, EnumeratedHistory, EnvPath, DEFAULT_ENUMERATION_CAP,
};
pub use history::{compute_return, simulate_history, truncation_horizon, History, ReturnSpec, Step, Truncation};
pub use model::Pomdp;

pub(crate) use model::check_row;
