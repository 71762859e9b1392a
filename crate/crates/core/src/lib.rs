//! Multi-target filtering over populations of distinguishable, independent
//! targets.
//!
//! Each target hypothesis carries an augmented distribution: a probability
//! of being in the scene together with a Gaussian-mixture density over the
//! state space. Joint hypotheses are sets of mutually compatible tracks, one
//! track per observation path, weighted by their posterior probability.
//!
//! ```
//! use disp::{init_filter, predict, update, BirthModel, MotionModel, Observation, SensorModel, UpdateOptions};
//! use nalgebra::{DMatrix, DVector};
//!
//! let motion = MotionModel::new(DMatrix::identity(1, 1), DMatrix::identity(1, 1) * 0.1, 0.95).unwrap();
//! let sensor = SensorModel::new(DMatrix::identity(1, 1), DMatrix::identity(1, 1), 0.9, 0.2).unwrap();
//! let birth = BirthModel::new(
//!     vec![0.5, 0.5],
//!     disp::AugmentedDistribution::gaussian(1.0, DVector::zeros(1), DMatrix::identity(1, 1) * 25.0).unwrap(),
//! )
//! .unwrap();
//!
//! let state = init_filter();
//! let z = [Observation::new(0, 0, DVector::from_element(1, 1.5))];
//! let state = update(&predict(&state, &motion), &z, &birth, &sensor, UpdateOptions::default()).unwrap();
//! assert_eq!(state.hypotheses().len(), 2);
//! assert!((state.total_weight() - 1.0).abs() < 1e-12);
//! ```

// Range checks are written `!(x >= lo)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod engine;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod single;

pub use approx::{ApproximationConfig, Pass};
pub use engine::{
    association_weight, compatible, enumerate_associations, init_filter, is_consistent, predict,
    update, Association, FilterState, Gate, Hypothesis, HypothesisKey, ObservationPath, Source,
    Track, TrackId, UpdateOptions,
};
pub use error::{Error, Result};
pub use estimate::{
    extract_tracks, map_hypothesis, point_estimate, ExtractionConfig, TrackEstimate,
};
pub use model::{
    AugmentedDistribution, BirthModel, DetectionProfile, GaussianComponent, MotionModel,
    Observation, ObservationId, SensorModel, StateSpace,
};
pub use single::{birth_posterior, predict_distribution, update_distribution, Outcome};

/// Serializes a `DVector<f64>` as a plain JSON array.
pub(crate) mod serde_vec {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        Vec::<f64>::deserialize(d).map(DVector::from_vec)
    }
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/distributions.md")]
    mod distributions {}
    #[doc = include_str!("../../../book/src/single-target.md")]
    mod single_target {}
    #[doc = include_str!("../../../book/src/hypotheses.md")]
    mod hypotheses {}
    #[doc = include_str!("../../../book/src/approximations.md")]
    mod approximations {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
