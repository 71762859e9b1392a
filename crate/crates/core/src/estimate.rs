//! MAP hypothesis selection and track extraction with display hysteresis.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::engine::{FilterState, Hypothesis, ObservationPath, Track, TrackId};
use crate::error::{Error, Result};
use crate::model::StateSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionConfig {
    /// Existence above which an undisplayed track becomes displayed.
    pub confirm: f64,
    /// Existence above which a displayed track stays displayed.
    pub deconfirm: f64,
    /// Tracks with presence not above this are not reported.
    #[serde(default = "default_presence_floor")]
    pub presence_floor: f64,
}

fn default_presence_floor() -> f64 {
    0.02
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            confirm: 0.98,
            deconfirm: 0.9,
            presence_floor: default_presence_floor(),
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.confirm, "confirm"),
            (self.deconfirm, "deconfirm"),
            (self.presence_floor, "presence_floor"),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "extraction {name} {v} outside [0, 1]"
                )));
            }
        }
        if self.deconfirm >= self.confirm {
            return Err(Error::Config(
                "deconfirm threshold must be below confirm threshold".into(),
            ));
        }
        Ok(())
    }
}

/// A reported target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackEstimate {
    pub id: TrackId,
    pub path: ObservationPath,
    pub existence: f64,
    pub presence: f64,
    #[serde(with = "crate::serde_vec")]
    pub point: DVector<f64>,
    pub displayed: bool,
}

/// Heaviest hypothesis; exact ties go to the canonically smallest key
/// (fewest tracks, then lexicographic ids).
pub fn map_hypothesis(state: &FilterState) -> Result<&Hypothesis> {
    // Hypotheses are stored in canonical order, so the first maximum wins.
    let mut best: Option<&Hypothesis> = None;
    for h in state.hypotheses() {
        if best.is_none_or(|b| h.weight > b.weight) {
            best = Some(h);
        }
    }
    best.ok_or_else(|| Error::InvalidState("empty hypothesis set".into()))
}

/// Mean of the heaviest spatial component, clamped to the scene.
pub fn point_estimate(track: &Track, space: &StateSpace) -> Result<DVector<f64>> {
    if track.dist.presence <= 0.0 {
        return Err(Error::NoEstimate);
    }
    let best = track
        .dist
        .spatial
        .iter()
        .fold(
            None::<&crate::model::GaussianComponent>,
            |acc, c| match acc {
                Some(a) if a.weight >= c.weight => Some(a),
                _ => Some(c),
            },
        )
        .ok_or(Error::NoEstimate)?;
    Ok(space.clamp(&best.mean))
}

/// Extracts the targets of the MAP hypothesis and updates display status.
///
/// A track of the MAP hypothesis is reported when its existence exceeds
/// `confirm`, or exceeds `deconfirm` while already displayed; otherwise its
/// display status is cleared. Every track outside the MAP hypothesis loses
/// display status. Tracks whose presence does not exceed the floor are not
/// reported.
pub fn extract_tracks(
    state: &mut FilterState,
    cfg: &ExtractionConfig,
    space: &StateSpace,
) -> Result<Vec<TrackEstimate>> {
    let best = map_hypothesis(state)?.key.clone();
    let existence = state.existences();
    let mut out = Vec::new();
    for (id, track) in state.tracks.iter_mut() {
        if !best.contains(*id) {
            track.displayed = false;
            continue;
        }
        let alpha = existence[id];
        let extract = if alpha > cfg.confirm {
            track.displayed = true;
            true
        } else if alpha > cfg.deconfirm {
            track.displayed
        } else {
            track.displayed = false;
            false
        };
        if extract && track.dist.presence > cfg.presence_floor {
            out.push(TrackEstimate {
                id: *id,
                path: track.path.clone(),
                existence: alpha,
                presence: track.dist.presence,
                point: point_estimate(track, space)?,
                displayed: track.displayed,
            });
        }
    }
    Ok(out)
}
