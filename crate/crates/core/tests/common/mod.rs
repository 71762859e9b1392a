#![allow(dead_code)]

use disp::oracle::OracleModels;
use disp::{
    init_filter, predict, update, AugmentedDistribution, BirthModel, FilterState,
    GaussianComponent, MotionModel, Observation, SensorModel, UpdateOptions,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random one-dimensional models and scans, every probability strictly
/// inside (0, 1) so no association is impossible.
pub struct Scenario {
    pub motion: MotionModel,
    pub sensor: SensorModel,
    pub birth: BirthModel,
    pub scans: Vec<Vec<Observation>>,
}

pub fn scalar(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

pub fn point(v: f64) -> DVector<f64> {
    DVector::from_element(1, v)
}

pub fn random_scenario(seed: u64, max_scans: usize, max_obs: usize) -> Scenario {
    random_scenario_with(seed, max_scans, max_obs, None)
}

/// As [`random_scenario`], with the birth support length fixed when
/// `support` is given.
pub fn random_scenario_with(
    seed: u64,
    max_scans: usize,
    max_obs: usize,
    support: Option<usize>,
) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let motion = MotionModel::new(
        scalar(rng.random_range(0.8..1.2)),
        scalar(rng.random_range(0.05..1.0)),
        rng.random_range(0.5..0.99),
    )
    .unwrap();
    let sensor = SensorModel::new(
        scalar(1.0),
        scalar(rng.random_range(0.2..2.0)),
        rng.random_range(0.3..0.99),
        rng.random_range(0.05..0.9),
    )
    .unwrap();
    let drawn = rng.random_range(1..=3usize);
    let support = support.unwrap_or(drawn);
    let raw: Vec<f64> = (0..support).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut card: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // Exact unit sum for the cardinality check.
    let rest: f64 = card[1..].iter().sum();
    card[0] = 1.0 - rest;
    let comps = rng.random_range(1..=2usize);
    let spatial = (0..comps)
        .map(|_| {
            GaussianComponent::new(
                1.0 / comps as f64,
                point(rng.random_range(-3.0..3.0)),
                scalar(rng.random_range(1.0..9.0)),
            )
            .unwrap()
        })
        .collect();
    let birth = BirthModel::new(card, AugmentedDistribution::new(1.0, spatial).unwrap()).unwrap();
    let n_scans = rng.random_range(1..=max_scans);
    let scans = (0..n_scans as u32)
        .map(|t| {
            let m = rng.random_range(0..=max_obs as u32);
            (0..m)
                .map(|i| Observation::new(t, i, point(rng.random_range(-5.0..5.0))))
                .collect()
        })
        .collect();
    Scenario {
        motion,
        sensor,
        birth,
        scans,
    }
}

impl Scenario {
    pub fn oracle_models(&self) -> OracleModels {
        OracleModels {
            motion: self.motion.clone(),
            sensor: self.sensor.clone(),
            birth: self.birth.clone(),
            initial_birth: None,
        }
    }

    /// Exact filter over every scan, with the state after each update.
    pub fn run_exact(&self) -> Vec<FilterState> {
        let mut s = init_filter();
        let mut out = Vec::new();
        for z in &self.scans {
            s = update(
                &predict(&s, &self.motion),
                z,
                &self.birth,
                &self.sensor,
                UpdateOptions::default(),
            )
            .unwrap();
            out.push(s.clone());
        }
        out
    }
}
