//! Single-target prediction and Bayes update on augmented distributions.
//!
//! Presence follows closed forms. Prediction multiplies it by the survival
//! probability. A detection sets it to one, since only targets inside the
//! scene can be detected. A miss-detection gives
//!
//! ```text
//! q' = q·μ / (1 − q + q·μ),    μ = Σ_i w_i (1 − p_d(m_i))
//! ```
//!
//! and with a constant detection probability the spatial mixture is left as
//! it was.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{
    cap_mixture, innovation, log_gaussian_density, log_sum_exp, symmetrize, AugmentedDistribution,
    BirthModel, GaussianComponent, MotionModel, Observation, SensorModel,
};

/// What a target produced in the current scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome<'a> {
    Detected(&'a Observation),
    Missed,
}

/// Pushes a distribution through the motion model.
pub fn predict_distribution(
    dist: &AugmentedDistribution,
    motion: &MotionModel,
) -> AugmentedDistribution {
    let f = &motion.transition;
    let ft = f.transpose();
    let spatial = dist
        .spatial
        .iter()
        .map(|c| GaussianComponent {
            weight: c.weight,
            mean: f * &c.mean,
            cov: symmetrize(f * &c.cov * &ft + &motion.process_noise),
        })
        .collect();
    AugmentedDistribution {
        presence: dist.presence * motion.survival,
        spatial,
    }
}

/// Bayes update of a distribution against one scan outcome.
///
/// Returns [`Error::ZeroLikelihood`] when the outcome has zero probability
/// under `dist`; such associations must not be proposed.
pub fn update_distribution(
    dist: &AugmentedDistribution,
    outcome: Outcome<'_>,
    sensor: &SensorModel,
) -> Result<AugmentedDistribution> {
    match outcome {
        Outcome::Detected(obs) => detect(dist, obs, sensor),
        Outcome::Missed => miss(dist, sensor),
    }
}

fn detect(
    dist: &AugmentedDistribution,
    obs: &Observation,
    sensor: &SensorModel,
) -> Result<AugmentedDistribution> {
    if obs.value.len() != sensor.obs_dim() {
        return Err(Error::Dimension {
            expected: sensor.obs_dim(),
            got: obs.value.len(),
            context: "observation vs sensor rows",
        });
    }
    if dist.presence <= 0.0 {
        return Err(Error::ZeroLikelihood);
    }
    let h = &sensor.observation;
    let mut log_w = Vec::with_capacity(dist.spatial.len());
    let mut updated = Vec::with_capacity(dist.spatial.len());
    for c in &dist.spatial {
        let pd = sensor.detection_at(&c.mean);
        if c.weight <= 0.0 || pd <= 0.0 {
            continue;
        }
        let (zhat, s) = innovation(c, sensor)?;
        log_w.push(c.weight.ln() + pd.ln() + log_gaussian_density(&obs.value, &zhat, &s)?);
        let s_inv = s
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Config("innovation covariance not positive definite".into()))?
            .inverse();
        let gain = &c.cov * h.transpose() * s_inv;
        let mean = &c.mean + &gain * (&obs.value - zhat);
        let cov: DMatrix<f64> = &c.cov - &gain * s * gain.transpose();
        updated.push(GaussianComponent {
            weight: 0.0,
            mean,
            cov: symmetrize(cov),
        });
    }
    let norm = log_sum_exp(&log_w);
    if norm == f64::NEG_INFINITY {
        return Err(Error::ZeroLikelihood);
    }
    for (c, lw) in updated.iter_mut().zip(&log_w) {
        c.weight = (lw - norm).exp();
    }
    cap_mixture(&mut updated, usize::MAX);
    Ok(AugmentedDistribution {
        presence: 1.0,
        spatial: updated,
    })
}

fn miss(dist: &AugmentedDistribution, sensor: &SensorModel) -> Result<AugmentedDistribution> {
    let missed: Vec<f64> = dist
        .spatial
        .iter()
        .map(|c| c.weight * (1.0 - sensor.detection_at(&c.mean)))
        .collect();
    let mu: f64 = missed.iter().sum();
    let numerator = dist.presence * mu;
    let denominator = (1.0 - dist.presence) + numerator;
    if denominator <= 0.0 {
        return Err(Error::ZeroLikelihood);
    }
    let presence = numerator / denominator;
    let spatial = if sensor.has_detection_profile() && mu > 0.0 {
        let mut s: Vec<GaussianComponent> = dist
            .spatial
            .iter()
            .zip(&missed)
            .map(|(c, w)| GaussianComponent {
                weight: w / mu,
                ..c.clone()
            })
            .collect();
        cap_mixture(&mut s, usize::MAX);
        s
    } else {
        dist.spatial.clone()
    };
    Ok(AugmentedDistribution { presence, spatial })
}

/// Distribution of the track created when an appearing target produces `obs`.
pub fn birth_posterior(
    birth: &BirthModel,
    obs: &Observation,
    sensor: &SensorModel,
) -> Result<AugmentedDistribution> {
    detect(&birth.spatial, obs, sensor)
}
