//! State and observation spaces, Gaussian mixtures, augmented distributions
//! and the motion, sensor and birth models.
//!
//! The empty state (a target that has left the scene, or never entered it) is
//! never stored as a vector. An [`AugmentedDistribution`] carries it implicitly
//! as the complement of its presence probability, so every linear-algebra
//! operation below lives on the in-scene state space only.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Components whose normalized weight falls below this are dropped.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Default cap on the number of components kept in a spatial mixture.
pub const DEFAULT_MAX_COMPONENTS: usize = 16;

const SYMMETRY_TOL: f64 = 1e-12;
const WEIGHT_SUM_TOL: f64 = 1e-9;
const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Bounded physical scene, one closed interval per state axis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    bounds: Vec<(f64, f64)>,
}

impl StateSpace {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Config("state space needs at least one axis".into()));
        }
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "axis {axis}: bounds [{lo}, {hi}] are not a non-degenerate interval"
                )));
            }
        }
        Ok(Self { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.bounds)
                .all(|(v, &(lo, hi))| (lo..=hi).contains(v))
    }

    /// Projects `x` onto the box, axis by axis.
    pub fn clamp(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            x.len(),
            x.iter()
                .zip(&self.bounds)
                .map(|(v, &(lo, hi))| v.clamp(lo, hi)),
        )
    }
}

/// One weighted Gaussian term of a spatial mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let c = Self { weight, mean, cov };
        c.validate()?;
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight.is_finite() && self.weight >= 0.0) {
            return Err(Error::Config(format!(
                "component weight {} is not a nonnegative real",
                self.weight
            )));
        }
        let d = self.mean.len();
        if self.cov.nrows() != d || self.cov.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                got: self.cov.nrows(),
                context: "component covariance",
            });
        }
        if !is_symmetric(&self.cov, SYMMETRY_TOL) {
            return Err(Error::Config(
                "component covariance is not symmetric".into(),
            ));
        }
        if Cholesky::new(self.cov.clone()).is_none() {
            return Err(Error::Config(
                "component covariance is not positive definite".into(),
            ));
        }
        Ok(())
    }
}

/// Distribution on the augmented state space: the probability of being in the
/// scene, and the normalized spatial mixture conditional on being there.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDistribution {
    pub presence: f64,
    pub spatial: Vec<GaussianComponent>,
}

impl AugmentedDistribution {
    pub fn new(presence: f64, spatial: Vec<GaussianComponent>) -> Result<Self> {
        let d = Self { presence, spatial };
        d.validate()?;
        Ok(d)
    }

    /// A single-component distribution.
    pub fn gaussian(presence: f64, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        Self::new(presence, vec![GaussianComponent::new(1.0, mean, cov)?])
    }

    /// The distribution of a target that is certainly outside the scene.
    pub fn absent() -> Self {
        Self {
            presence: 0.0,
            spatial: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.presence) {
            return Err(Error::Config(format!(
                "presence {} outside [0, 1]",
                self.presence
            )));
        }
        if self.spatial.is_empty() {
            if self.presence > 0.0 {
                return Err(Error::Config(
                    "present distribution needs at least one spatial component".into(),
                ));
            }
            return Ok(());
        }
        let dim = self.spatial[0].dim();
        for c in &self.spatial {
            if c.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: c.dim(),
                    context: "mixture component",
                });
            }
            c.validate()?;
        }
        let total: f64 = self.spatial.iter().map(|c| c.weight).sum();
        if self.presence > 0.0 && (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Config(format!(
                "spatial weights sum to {total}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> Option<usize> {
        self.spatial.first().map(GaussianComponent::dim)
    }

    /// Keeps the `max` heaviest components, drops those under the weight
    /// floor, and renormalizes.
    pub fn cap_components(&mut self, max: usize) {
        cap_mixture(&mut self.spatial, max);
    }
}

/// Drops tiny and excess components of a mixture in place and renormalizes.
pub(crate) fn cap_mixture(components: &mut Vec<GaussianComponent>, max: usize) {
    let total: f64 = components.iter().map(|c| c.weight).sum();
    if components.is_empty() || total <= 0.0 {
        return;
    }
    for c in components.iter_mut() {
        c.weight /= total;
    }
    if components.len() > max {
        // Stable sort keeps the original order among equal weights.
        let mut idx: Vec<usize> = (0..components.len()).collect();
        idx.sort_by(|&a, &b| components[b].weight.total_cmp(&components[a].weight));
        let mut keep = vec![false; components.len()];
        for &i in idx.iter().take(max.max(1)) {
            keep[i] = true;
        }
        let mut i = 0;
        components.retain(|_| {
            i += 1;
            keep[i - 1]
        });
    }
    let heaviest = components.iter().map(|c| c.weight).fold(0.0, f64::max);
    components.retain(|c| c.weight >= WEIGHT_FLOOR || c.weight == heaviest);
    let total: f64 = components.iter().map(|c| c.weight).sum();
    for c in components.iter_mut() {
        c.weight /= total;
    }
}

/// Linear-Gaussian motion with a state-independent survival probability.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub transition: DMatrix<f64>,
    pub process_noise: DMatrix<f64>,
    pub survival: f64,
}

impl MotionModel {
    pub fn new(
        transition: DMatrix<f64>,
        process_noise: DMatrix<f64>,
        survival: f64,
    ) -> Result<Self> {
        let d = transition.nrows();
        if transition.ncols() != d {
            return Err(Error::Config("transition matrix must be square".into()));
        }
        if process_noise.shape() != (d, d) {
            return Err(Error::Dimension {
                expected: d,
                got: process_noise.nrows(),
                context: "process noise",
            });
        }
        if !is_symmetric(&process_noise, SYMMETRY_TOL) || !is_psd(&process_noise) {
            return Err(Error::Config(
                "process noise must be symmetric positive semi-definite".into(),
            ));
        }
        check_probability(survival, "survival probability")?;
        Ok(Self {
            transition,
            process_noise,
            survival,
        })
    }

    pub fn dim(&self) -> usize {
        self.transition.nrows()
    }
}

/// State-dependent detection probability, evaluated at each component mean.
pub type DetectionProfile = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// Linear-Gaussian sensor with detection and false-alarm probabilities.
#[derive(Clone)]
pub struct SensorModel {
    pub observation: DMatrix<f64>,
    pub noise: DMatrix<f64>,
    pub detection: f64,
    pub false_alarm: f64,
    profile: Option<DetectionProfile>,
}

impl SensorModel {
    pub fn new(
        observation: DMatrix<f64>,
        noise: DMatrix<f64>,
        detection: f64,
        false_alarm: f64,
    ) -> Result<Self> {
        let m = observation.nrows();
        if noise.shape() != (m, m) {
            return Err(Error::Dimension {
                expected: m,
                got: noise.nrows(),
                context: "measurement noise",
            });
        }
        if !is_symmetric(&noise, SYMMETRY_TOL) || Cholesky::new(noise.clone()).is_none() {
            return Err(Error::Config(
                "measurement noise must be symmetric positive definite".into(),
            ));
        }
        check_probability(detection, "detection probability")?;
        check_probability(false_alarm, "false-alarm probability")?;
        if false_alarm >= 1.0 {
            return Err(Error::Config("false-alarm probability must be < 1".into()));
        }
        Ok(Self {
            observation,
            noise,
            detection,
            false_alarm,
            profile: None,
        })
    }

    /// Replaces the constant detection probability by a function of the
    /// state. It is evaluated at component means only, which is an
    /// approximation of the exact integral against each component.
    pub fn with_detection_profile(mut self, profile: DetectionProfile) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn has_detection_profile(&self) -> bool {
        self.profile.is_some()
    }

    pub fn obs_dim(&self) -> usize {
        self.observation.nrows()
    }

    pub fn state_dim(&self) -> usize {
        self.observation.ncols()
    }

    /// Detection probability for a component centred at `mean`.
    pub fn detection_at(&self, mean: &DVector<f64>) -> f64 {
        match &self.profile {
            Some(f) => f(mean).clamp(0.0, 1.0),
            None => self.detection,
        }
    }
}

impl fmt::Debug for SensorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SensorModel")
            .field("observation", &self.observation)
            .field("noise", &self.noise)
            .field("detection", &self.detection)
            .field("false_alarm", &self.false_alarm)
            .field("profile", &self.profile.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

/// Appearing targets: a finite cardinality distribution and one shared
/// initial distribution, present in the scene with probability one.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthModel {
    pub cardinality: Vec<f64>,
    pub spatial: AugmentedDistribution,
}

impl BirthModel {
    pub fn new(cardinality: Vec<f64>, spatial: AugmentedDistribution) -> Result<Self> {
        if cardinality.is_empty() {
            return Err(Error::Config(
                "birth cardinality needs at least one entry".into(),
            ));
        }
        for &p in &cardinality {
            check_probability(p, "birth cardinality entry")?;
        }
        let total: f64 = cardinality.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "birth cardinality sums to {total}, expected 1"
            )));
        }
        if spatial.presence != 1.0 {
            return Err(Error::Config(
                "appearing targets must be present with probability exactly 1".into(),
            ));
        }
        spatial.validate()?;
        Ok(Self {
            cardinality,
            spatial,
        })
    }

    /// Largest number of simultaneous appearances with a support entry.
    pub fn max_births(&self) -> usize {
        self.cardinality.len() - 1
    }

    /// Restricts the support to `0..=cap` and renormalizes.
    pub fn capped(&self, cap: usize) -> Result<Self> {
        if cap >= self.max_births() {
            return Ok(self.clone());
        }
        let mut card: Vec<f64> = self.cardinality[..=cap].to_vec();
        let total: f64 = card.iter().sum();
        if total <= 0.0 {
            return Err(Error::Config(format!(
                "capping births at {cap} leaves no probability mass"
            )));
        }
        for p in &mut card {
            *p /= total;
        }
        Ok(Self {
            cardinality: card,
            spatial: self.spatial.clone(),
        })
    }
}

/// Globally unique observation reference: scan index and index within scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObservationId {
    pub scan: u32,
    pub index: u32,
}

impl fmt::Display for ObservationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}.{}", self.scan, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub id: ObservationId,
    #[serde(with = "crate::serde_vec")]
    pub value: DVector<f64>,
}

impl Observation {
    pub fn new(scan: u32, index: u32, value: DVector<f64>) -> Self {
        Self {
            id: ObservationId { scan, index },
            value,
        }
    }
}

/// Predicted observation mean and innovation covariance of one component.
pub(crate) fn innovation(
    comp: &GaussianComponent,
    sensor: &SensorModel,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if sensor.state_dim() != comp.dim() {
        return Err(Error::Dimension {
            expected: sensor.state_dim(),
            got: comp.dim(),
            context: "sensor matrix columns vs state",
        });
    }
    let h = &sensor.observation;
    let s = h * &comp.cov * h.transpose() + &sensor.noise;
    Ok((h * &comp.mean, symmetrize(s)))
}

/// Log of the Gaussian density N(z; mean, cov).
pub fn log_gaussian_density(
    z: &DVector<f64>,
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
) -> Result<f64> {
    if z.len() != mean.len() {
        return Err(Error::Dimension {
            expected: mean.len(),
            got: z.len(),
            context: "observation",
        });
    }
    let chol = Cholesky::new(cov.clone())
        .ok_or_else(|| Error::Config("innovation covariance not positive definite".into()))?;
    let diff = z - mean;
    let maha = diff.dot(&chol.solve(&diff));
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Ok(-0.5 * (maha + log_det + z.len() as f64 * LN_2PI))
}

/// Squared Mahalanobis distance of `z` to `mean` under `cov`.
pub fn mahalanobis_sq(z: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    let chol = Cholesky::new(cov.clone())
        .ok_or_else(|| Error::Config("covariance not positive definite".into()))?;
    let diff = z - mean;
    Ok(diff.dot(&chol.solve(&diff)))
}

fn check_obs(obs: &Observation, sensor: &SensorModel) -> Result<()> {
    if obs.value.len() != sensor.obs_dim() {
        return Err(Error::Dimension {
            expected: sensor.obs_dim(),
            got: obs.value.len(),
            context: "observation vs sensor rows",
        });
    }
    Ok(())
}

/// Natural log of [`predictive_likelihood`], evaluated without leaving the
/// log domain. Returns `-inf` for an absent target.
pub fn log_predictive_likelihood(
    dist: &AugmentedDistribution,
    obs: &Observation,
    sensor: &SensorModel,
) -> Result<f64> {
    check_obs(obs, sensor)?;
    if dist.presence <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mut terms = Vec::with_capacity(dist.spatial.len());
    for c in &dist.spatial {
        let pd = sensor.detection_at(&c.mean);
        if c.weight <= 0.0 || pd <= 0.0 {
            continue;
        }
        let (zhat, s) = innovation(c, sensor)?;
        terms.push(c.weight.ln() + pd.ln() + log_gaussian_density(&obs.value, &zhat, &s)?);
    }
    Ok(dist.presence.ln() + log_sum_exp(&terms))
}

/// Expected detection likelihood of `obs` under `dist`.
///
/// With presence `q`, mixture weights `w_i` and detection probability `p_d`
/// this is `q * p_d * Σ w_i N(z; H m_i, H P_i Hᵀ + R)`; the empty state never
/// produces an observation.
pub fn predictive_likelihood(
    dist: &AugmentedDistribution,
    obs: &Observation,
    sensor: &SensorModel,
) -> Result<f64> {
    log_predictive_likelihood(dist, obs, sensor).map(f64::exp)
}

/// Probability that the target produces no observation this scan: either it
/// is absent, or present and missed.
pub fn missdetection_mass(dist: &AugmentedDistribution, sensor: &SensorModel) -> f64 {
    let in_scene_missed: f64 = dist
        .spatial
        .iter()
        .map(|c| c.weight * (1.0 - sensor.detection_at(&c.mean)))
        .sum();
    (1.0 - dist.presence) + dist.presence * in_scene_missed
}

/// Collapses a mixture into one component with the same total weight, mean
/// and covariance (spread of the means included).
pub fn moment_match(components: &[GaussianComponent]) -> Result<GaussianComponent> {
    let first = components
        .first()
        .ok_or_else(|| Error::Contract("moment_match needs at least one component".into()))?;
    let total: f64 = components.iter().map(|c| c.weight).sum();
    if !(total > 0.0) {
        return Err(Error::Contract(
            "moment_match needs positive total weight".into(),
        ));
    }
    let d = first.dim();
    let mut mean = DVector::zeros(d);
    for c in components {
        mean += &c.mean * (c.weight / total);
    }
    let mut cov = DMatrix::zeros(d, d);
    for c in components {
        let diff = &c.mean - &mean;
        cov += (&c.cov + &diff * diff.transpose()) * (c.weight / total);
    }
    Ok(GaussianComponent {
        weight: total,
        mean,
        cov: symmetrize(cov),
    })
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol * m.amax().max(1.0)
}

fn is_psd(m: &DMatrix<f64>) -> bool {
    let eig = SymmetricEigen::<f64, Dyn>::new(m.clone());
    eig.eigenvalues
        .iter()
        .all(|&v| v >= -1e-12 * m.amax().max(1.0))
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} {p} outside [0, 1]")))
    }
}

/// `ln Σ exp(x_i)` with a max shift; `-inf` for an empty or all-`-inf` slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sensor_1d(pd: f64, pfa: f64) -> SensorModel {
        SensorModel::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            pd,
            pfa,
        )
        .unwrap()
    }

    fn gauss_1d(presence: f64, m: f64, v: f64) -> AugmentedDistribution {
        AugmentedDistribution::gaussian(
            presence,
            DVector::from_element(1, m),
            DMatrix::from_element(1, 1, v),
        )
        .unwrap()
    }

    fn obs_1d(z: f64) -> Observation {
        Observation::new(0, 0, DVector::from_element(1, z))
    }

    #[test]
    fn predictive_likelihood_absent_is_zero() {
        let d = AugmentedDistribution::new(0.0, gauss_1d(1.0, 3.0, 2.0).spatial).unwrap();
        assert_eq!(
            predictive_likelihood(&d, &obs_1d(0.0), &sensor_1d(1.0, 0.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn predictive_likelihood_hand_values() {
        let s = sensor_1d(1.0, 0.0);
        let full = predictive_likelihood(&gauss_1d(1.0, 0.0, 1.0), &obs_1d(0.0), &s).unwrap();
        assert_relative_eq!(
            full,
            1.0 / (4.0 * std::f64::consts::PI).sqrt(),
            epsilon = 1e-14
        );
        assert_relative_eq!(full, 0.28209479177387814, epsilon = 1e-14);
        let half = predictive_likelihood(&gauss_1d(0.5, 0.0, 1.0), &obs_1d(0.0), &s).unwrap();
        assert_relative_eq!(half, 0.14104739588693907, epsilon = 1e-14);
    }

    #[test]
    fn predictive_likelihood_rejects_bad_dimension() {
        let o = Observation::new(0, 0, DVector::from_vec(vec![0.0, 1.0]));
        let err = predictive_likelihood(&gauss_1d(1.0, 0.0, 1.0), &o, &sensor_1d(1.0, 0.0));
        assert!(matches!(err, Err(Error::Dimension { .. })));
    }

    #[test]
    fn missdetection_mass_cases() {
        assert_eq!(
            missdetection_mass(&gauss_1d(1.0, 0.0, 1.0), &sensor_1d(1.0, 0.0)),
            0.0
        );
        assert_eq!(
            missdetection_mass(&AugmentedDistribution::absent(), &sensor_1d(0.3, 0.0)),
            1.0
        );
        assert_relative_eq!(
            missdetection_mass(&gauss_1d(0.72, 0.0, 1.0), &sensor_1d(0.5, 0.0)),
            0.64,
            epsilon = 1e-15
        );
    }

    #[test]
    fn moment_match_cases() {
        let a = GaussianComponent::new(
            0.5,
            DVector::from_element(1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        let b = GaussianComponent::new(
            0.5,
            DVector::from_element(1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        assert_eq!(moment_match(std::slice::from_ref(&a)).unwrap(), a);
        let m = moment_match(&[a.clone(), b.clone()]).unwrap();
        assert_relative_eq!(m.weight, 1.0);
        assert_relative_eq!(m.mean[0], 0.0);
        assert_relative_eq!(m.cov[(0, 0)], 2.0);
        let zero_b = GaussianComponent { weight: 0.0, ..b };
        let a1 = GaussianComponent { weight: 1.0, ..a };
        let m = moment_match(&[a1.clone(), zero_b]).unwrap();
        assert_relative_eq!(m.mean[0], a1.mean[0]);
        assert_relative_eq!(m.cov[(0, 0)], a1.cov[(0, 0)]);
        assert!(matches!(moment_match(&[]), Err(Error::Contract(_))));
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(StateSpace::new(vec![(1.0, 1.0)]).is_err());
        assert!(StateSpace::new(vec![]).is_err());
        assert!(
            GaussianComponent::new(1.0, DVector::zeros(1), DMatrix::from_element(1, 1, -1.0))
                .is_err()
        );
        assert!(AugmentedDistribution::new(0.5, vec![]).is_err());
        assert!(AugmentedDistribution::new(0.0, vec![]).is_ok());
        let c = GaussianComponent::new(0.4, DVector::zeros(1), DMatrix::identity(1, 1)).unwrap();
        assert!(AugmentedDistribution::new(1.0, vec![c]).is_err());
        assert!(BirthModel::new(vec![0.5, 0.4], gauss_1d(1.0, 0.0, 1.0)).is_err());
        assert!(BirthModel::new(vec![0.5, 0.5], gauss_1d(0.9, 0.0, 1.0)).is_err());
        assert!(
            SensorModel::new(DMatrix::identity(1, 1), DMatrix::identity(1, 1), 0.5, 1.0).is_err()
        );
        assert!(MotionModel::new(
            DMatrix::identity(1, 1),
            DMatrix::from_element(1, 1, -1.0),
            0.5
        )
        .is_err());
    }

    #[test]
    fn birth_cap_renormalizes() {
        let b = BirthModel::new(vec![0.5, 0.3, 0.2], gauss_1d(1.0, 0.0, 1.0)).unwrap();
        let c = b.capped(1).unwrap();
        assert_eq!(c.cardinality.len(), 2);
        assert_relative_eq!(c.cardinality[0], 0.625);
        assert_eq!(b.capped(5).unwrap(), b);
    }

    #[test]
    fn cap_mixture_keeps_heaviest() {
        let mk = |w: f64, m: f64| {
            GaussianComponent::new(w, DVector::from_element(1, m), DMatrix::identity(1, 1)).unwrap()
        };
        let mut v = vec![mk(0.1, 0.0), mk(0.6, 1.0), mk(0.3, 2.0)];
        cap_mixture(&mut v, 2);
        assert_eq!(v.len(), 2);
        assert_relative_eq!(v[0].weight, 2.0 / 3.0);
        assert_eq!(v[0].mean[0], 1.0);
        assert_eq!(v[1].mean[0], 2.0);
    }

    /// Trapezoidal integral of the detection density over z, plus the
    /// miss-detection mass, is one when there are no false alarms.
    #[test]
    fn detection_density_plus_miss_mass_integrates_to_one() {
        let s = sensor_1d(0.7, 0.0);
        let d = AugmentedDistribution::new(
            0.8,
            vec![
                GaussianComponent::new(
                    0.3,
                    DVector::from_element(1, -2.0),
                    DMatrix::from_element(1, 1, 0.5),
                )
                .unwrap(),
                GaussianComponent::new(
                    0.7,
                    DVector::from_element(1, 1.5),
                    DMatrix::from_element(1, 1, 2.0),
                )
                .unwrap(),
            ],
        )
        .unwrap();
        let (lo, hi, n) = (-30.0, 30.0, 60_000);
        let step = (hi - lo) / n as f64;
        let mut integral = 0.0;
        for i in 0..=n {
            let z = lo + i as f64 * step;
            let f = predictive_likelihood(&d, &obs_1d(z), &s).unwrap();
            integral += if i == 0 || i == n { 0.5 * f } else { f };
        }
        integral *= step;
        assert!((integral + missdetection_mass(&d, &s) - 1.0).abs() < 1e-6);
    }

    fn arb_mixture() -> impl Strategy<Value = Vec<GaussianComponent>> {
        prop::collection::vec((0.01f64..1.0, -5.0f64..5.0, 0.1f64..4.0), 1..5).prop_map(|v| {
            let total: f64 = v.iter().map(|t| t.0).sum();
            v.into_iter()
                .map(|(w, m, c)| GaussianComponent {
                    weight: w / total,
                    mean: DVector::from_element(1, m),
                    cov: DMatrix::from_element(1, 1, c),
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn predictive_likelihood_is_linear_in_presence(
            mix in arb_mixture(), q in 0.0f64..1.0, z in -6.0f64..6.0, pd in 0.0f64..1.0
        ) {
            let s = sensor_1d(pd, 0.1);
            let full = predictive_likelihood(&AugmentedDistribution { presence: 1.0, spatial: mix.clone() }, &obs_1d(z), &s).unwrap();
            let part = predictive_likelihood(&AugmentedDistribution { presence: q, spatial: mix }, &obs_1d(z), &s).unwrap();
            prop_assert!((part - q * full).abs() <= 1e-12 * full.max(1e-300) + 1e-300);
        }

        #[test]
        fn predictive_likelihood_is_linear_in_weights(mix in arb_mixture(), z in -6.0f64..6.0) {
            let s = sensor_1d(0.9, 0.1);
            let whole = predictive_likelihood(&AugmentedDistribution { presence: 1.0, spatial: mix.clone() }, &obs_1d(z), &s).unwrap();
            let summed: f64 = mix.iter().map(|c| {
                let single = AugmentedDistribution { presence: 1.0, spatial: vec![GaussianComponent { weight: 1.0, ..c.clone() }] };
                c.weight * predictive_likelihood(&single, &obs_1d(z), &s).unwrap()
            }).sum();
            prop_assert!((whole - summed).abs() <= 1e-12 * whole.max(1e-300));
        }

        #[test]
        fn moment_match_preserves_moments(mix in arb_mixture(), scale in 0.1f64..10.0) {
            let mix: Vec<_> = mix.into_iter().map(|c| GaussianComponent { weight: c.weight * scale, ..c }).collect();
            let total: f64 = mix.iter().map(|c| c.weight).sum();
            let mean: f64 = mix.iter().map(|c| c.weight * c.mean[0]).sum::<f64>() / total;
            let second: f64 = mix.iter().map(|c| c.weight * (c.cov[(0, 0)] + c.mean[0] * c.mean[0])).sum::<f64>() / total;
            let m = moment_match(&mix).unwrap();
            prop_assert!((m.weight - total).abs() < 1e-10);
            prop_assert!((m.mean[0] - mean).abs() < 1e-10);
            prop_assert!((m.cov[(0, 0)] - (second - mean * mean)).abs() < 1e-10);
        }
    }
}
