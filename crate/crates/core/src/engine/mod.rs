//! Track table and hypothesis set maintenance: prediction, enumeration of
//! admissible associations, association weights and the Bayes-normalized
//! hypothesis update.

mod association;
mod path;
mod state;
mod update;

pub use association::{association_weight, enumerate_associations, Association, Gate, Source};
pub use path::{compatible, is_consistent, ObservationPath, TrackId};
pub use state::{init_filter, FilterState, Hypothesis, HypothesisKey, Track};
pub use update::{predict, update, UpdateOptions};
