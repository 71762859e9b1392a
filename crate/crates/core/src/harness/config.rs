use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::approx::ApproximationConfig;
use crate::error::{Error, Result};
use crate::estimate::ExtractionConfig;
use crate::model::{
    AugmentedDistribution, BirthModel, GaussianComponent, MotionModel, SensorModel, StateSpace,
};

/// A complete scenario: models, filter settings and simulation settings.
/// Matrices are row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelBlock,
    pub sensor: SensorBlock,
    pub birth: BirthBlock,
    #[serde(default)]
    pub approx: ApproximationConfig,
    #[serde(default)]
    pub extract: ExtractionConfig,
    pub sim: SimBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub bounds: Vec<[f64; 2]>,
    #[serde(rename = "F")]
    pub transition: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub process_noise: Vec<Vec<f64>>,
    pub p_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorBlock {
    #[serde(rename = "H")]
    pub observation: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub noise: Vec<Vec<f64>>,
    pub p_d: f64,
    pub p_fa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BirthBlock {
    pub cardinality: Vec<f64>,
    /// Cardinality for the first scan; defaults to `cardinality`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_cardinality: Option<Vec<f64>>,
    pub components: Vec<ComponentBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentBlock {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    pub scans: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub clutter_rate: f64,
    /// Largest observation-space distance at which an estimate can match a
    /// true target.
    #[serde(default = "default_match_radius")]
    pub match_radius: f64,
}

fn default_match_radius() -> f64 {
    5.0
}

/// Validated models built from a [`ScenarioConfig`].
#[derive(Debug, Clone)]
pub struct Models {
    pub space: StateSpace,
    pub motion: MotionModel,
    pub sensor: SensorModel,
    pub birth: BirthModel,
    pub initial_birth: Option<BirthModel>,
}

fn matrix(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Config(format!(
            "{name} must be a non-empty rectangular array"
        )));
    }
    Ok(DMatrix::from_row_iterator(
        r,
        c,
        rows.iter().flatten().copied(),
    ))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.models()?;
        self.approx.validate()?;
        self.extract.validate()?;
        if self.sim.scans == 0 {
            return Err(Error::Config("sim.scans must be at least 1".into()));
        }
        if !(self.sim.clutter_rate >= 0.0 && self.sim.clutter_rate.is_finite()) {
            return Err(Error::Config(format!(
                "clutter_rate {} must be >= 0",
                self.sim.clutter_rate
            )));
        }
        if !(self.sim.match_radius >= 0.0) {
            return Err(Error::Config("match_radius must be >= 0".into()));
        }
        Ok(())
    }

    pub fn models(&self) -> Result<Models> {
        let space = StateSpace::new(self.model.bounds.iter().map(|b| (b[0], b[1])).collect())?;
        let motion = MotionModel::new(
            matrix(&self.model.transition, "F")?,
            matrix(&self.model.process_noise, "Q")?,
            self.model.p_s,
        )?;
        if motion.dim() != space.dim() {
            return Err(Error::Dimension {
                expected: space.dim(),
                got: motion.dim(),
                context: "F vs bounds",
            });
        }
        let sensor = SensorModel::new(
            matrix(&self.sensor.observation, "H")?,
            matrix(&self.sensor.noise, "R")?,
            self.sensor.p_d,
            self.sensor.p_fa,
        )?;
        if sensor.state_dim() != space.dim() {
            return Err(Error::Dimension {
                expected: space.dim(),
                got: sensor.state_dim(),
                context: "H columns vs bounds",
            });
        }
        let comps = self
            .birth
            .components
            .iter()
            .map(|c| {
                GaussianComponent::new(
                    c.weight,
                    DVector::from_vec(c.mean.clone()),
                    matrix(&c.cov, "birth cov")?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let spatial = AugmentedDistribution::new(1.0, comps)?;
        if spatial.dim() != Some(space.dim()) {
            return Err(Error::Config(
                "birth components must match the state dimension".into(),
            ));
        }
        let birth = BirthModel::new(self.birth.cardinality.clone(), spatial.clone())?;
        let initial_birth = match &self.birth.initial_cardinality {
            Some(c) => Some(BirthModel::new(c.clone(), spatial)?),
            None => None,
        };
        Ok(Models {
            space,
            motion,
            sensor,
            birth,
            initial_birth,
        })
    }
}
