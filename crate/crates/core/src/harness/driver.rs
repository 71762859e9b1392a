use serde::{Deserialize, Serialize};

use super::config::{Models, ScenarioConfig};
use super::metrics::{metrics, MetricsSummary};
use super::sim::{simulate, GroundTruth};
use crate::approx::ApproximationConfig;
use crate::engine::{init_filter, predict, update, FilterState, HypothesisKey, UpdateOptions};
use crate::error::{Error, Result};
use crate::estimate::{extract_tracks, map_hypothesis, ExtractionConfig, TrackEstimate};
use crate::model::Observation;

/// One report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub scan: u32,
    pub observations: Vec<Observation>,
    pub hypothesis_count: usize,
    pub track_count: usize,
    /// Hypothesis weight sum straight after the update.
    pub total_weight: f64,
    /// Hypothesis weight sum after the approximation passes.
    pub retained_weight: f64,
    pub map_hypothesis: HypothesisKey,
    pub map_weight: f64,
    pub estimates: Vec<TrackEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scans: Vec<ScanRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<MetricsSummary>,
}

/// Scan-by-scan filter loop: predict, update, approximate, extract.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub models: Models,
    pub approx: ApproximationConfig,
    pub extract: ExtractionConfig,
    state: FilterState,
}

impl Pipeline {
    pub fn new(
        models: Models,
        approx: ApproximationConfig,
        extract: ExtractionConfig,
    ) -> Result<Self> {
        approx.validate()?;
        extract.validate()?;
        Ok(Self {
            models,
            approx,
            extract,
            state: init_filter(),
        })
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(cfg.models()?, cfg.approx.clone(), cfg.extract)
    }

    pub fn state(&self) -> &FilterState {
        &self.state
    }

    pub fn step(&mut self, scan_obs: &[Observation]) -> Result<ScanRecord> {
        let scan = u32::try_from(self.state.scan + 1)
            .map_err(|_| Error::InvalidState("scan counter overflow".into()))?;
        let m = &self.models;
        let birth = self
            .approx
            .birth_for_scan(&m.birth, m.initial_birth.as_ref(), scan)?;
        let options = UpdateOptions {
            gate: self.approx.gate_threshold,
            keep_null: !self.approx.drop_null,
        };
        let updated = update(
            &predict(&self.state, &m.motion),
            scan_obs,
            &birth,
            &m.sensor,
            options,
        )?;
        let total_weight = updated.total_weight();
        let mut next = self.approx.apply(&updated)?;
        let estimates = extract_tracks(&mut next, &self.extract, &m.space)?;
        let map = map_hypothesis(&next)?;
        let record = ScanRecord {
            scan,
            observations: scan_obs.to_vec(),
            hypothesis_count: next.hypotheses().len(),
            track_count: next.tracks.len(),
            total_weight,
            retained_weight: next.total_weight(),
            map_hypothesis: map.key.clone(),
            map_weight: map.weight,
            estimates,
        };
        self.state = next;
        Ok(record)
    }
}

/// Runs the filter over recorded scans.
pub fn track(cfg: &ScenarioConfig, scans: &[Vec<Observation>]) -> Result<RunReport> {
    let mut p = Pipeline::from_config(cfg)?;
    let rows = scans
        .iter()
        .map(|z| p.step(z))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport {
        scans: rows,
        summary: None,
    })
}

/// Simulates a scenario, tracks it and scores the result.
pub fn run(cfg: &ScenarioConfig) -> Result<(GroundTruth, Vec<Vec<Observation>>, RunReport)> {
    let (truth, scans) = simulate(cfg)?;
    let mut report = track(cfg, &scans)?;
    let h = cfg.models()?.sensor.observation;
    report.summary = Some(metrics(&truth, &report, &h, cfg.sim.match_radius));
    Ok((truth, scans, report))
}
