use std::collections::BTreeMap;

use super::association::Enumerator;
use super::path::{ObservationPath, TrackId};
use super::state::{FilterState, Hypothesis, HypothesisKey, Track};
use crate::approx::gate;
use crate::error::{Error, Result};
use crate::model::{
    log_predictive_likelihood, missdetection_mass, BirthModel, MotionModel, Observation,
    SensorModel,
};
use crate::single::{birth_posterior, predict_distribution, update_distribution, Outcome};

/// Per-update switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateOptions {
    /// Squared Mahalanobis gate applied to track and birth associations.
    pub gate: Option<f64>,
    /// Keep hypotheses whose weight is exactly zero, so the hypothesis set
    /// stays the full family of consistent track subsets.
    pub keep_null: bool,
}

impl Default for UpdateOptions {
    fn default() -> Self {
        Self {
            gate: None,
            keep_null: true,
        }
    }
}

/// Time prediction: every track distribution is pushed through the motion
/// model; paths, hypotheses and weights are untouched.
pub fn predict(state: &FilterState, motion: &MotionModel) -> FilterState {
    let mut next = state.clone();
    for t in next.tracks.values_mut() {
        t.dist = predict_distribution(&t.dist, motion);
    }
    next
}

/// Per-track quantities shared by every hypothesis holding the track.
struct TrackTerms {
    /// ln of the miss-detection mass; `-inf` when missing it is impossible.
    log_miss: f64,
    /// ln of the predictive likelihood per observation, `None` if gated out
    /// or impossible.
    log_detect: Vec<Option<f64>>,
    miss_child: TrackId,
    detect_child: Vec<TrackId>,
}

/// Data update with scan observations `scan_obs`.
///
/// Enumerates, for every prior hypothesis and every number of appearing
/// targets in the birth support, all admissible associations, and weighs the
/// resulting updated hypotheses by Bayes' rule. The state passed in must
/// already be predicted.
pub fn update(
    state: &FilterState,
    scan_obs: &[Observation],
    birth: &BirthModel,
    sensor: &SensorModel,
    options: UpdateOptions,
) -> Result<FilterState> {
    let scan = u32::try_from(state.scan + 1)
        .map_err(|_| Error::InvalidState(format!("scan {}", state.scan)))?;
    let mut obs: Vec<&Observation> = scan_obs.iter().collect();
    obs.sort_by_key(|o| o.id);
    for o in &obs {
        if o.id.scan != scan {
            return Err(Error::Contract(format!(
                "observation {} offered to scan {scan}",
                o.id
            )));
        }
        if o.value.len() != sensor.obs_dim() {
            return Err(Error::Dimension {
                expected: sensor.obs_dim(),
                got: o.value.len(),
                context: "observation vs sensor rows",
            });
        }
    }
    if obs.windows(2).any(|w| w[0].id == w[1].id) {
        return Err(Error::Contract("duplicate observation id in scan".into()));
    }
    if state.hypotheses().is_empty() {
        return Err(Error::InvalidState("empty hypothesis set".into()));
    }
    // Weight removed by hypothesis pruning is restored by the normalization
    // below, so the prior only has to carry positive mass.
    let prior_total = state.total_weight();
    if !(prior_total > 0.0) {
        return Err(Error::InvalidState(format!(
            "prior weights sum to {prior_total}"
        )));
    }

    let keep = |d: &crate::model::AugmentedDistribution, o: &Observation| match options.gate {
        Some(th) => gate(d, o, sensor, th),
        None => true,
    };

    let ids: Vec<TrackId> = state.tracks.keys().copied().collect();
    let mut terms = Vec::with_capacity(ids.len());
    for t in state.tracks.values() {
        let log_miss = missdetection_mass(&t.dist, sensor).ln();
        let mut log_detect = Vec::with_capacity(obs.len());
        for o in &obs {
            let l = if keep(&t.dist, o) {
                Some(log_predictive_likelihood(&t.dist, o, sensor)?)
                    .filter(|l| *l > f64::NEG_INFINITY)
            } else {
                None
            };
            log_detect.push(l);
        }
        terms.push(TrackTerms {
            log_miss,
            log_detect,
            miss_child: t.path.extended(None).id(),
            detect_child: obs
                .iter()
                .map(|o| t.path.extended(Some(o.id)).id())
                .collect(),
        });
    }
    let mut log_birth = Vec::with_capacity(obs.len());
    for o in &obs {
        let l = if keep(&birth.spatial, o) {
            Some(log_predictive_likelihood(&birth.spatial, o, sensor)?)
                .filter(|l| *l > f64::NEG_INFINITY)
        } else {
            None
        };
        log_birth.push(l);
    }
    let newborn: Vec<TrackId> = obs
        .iter()
        .map(|o| ObservationPath::newborn(o.id).id())
        .collect();
    let log_clutter = sensor.false_alarm.ln();
    let log_origin = (1.0 - sensor.false_alarm).ln();

    // Referenced children, marked during enumeration.
    let mut miss_used = vec![false; terms.len()];
    let mut detect_used = vec![vec![false; obs.len()]; terms.len()];
    let mut birth_used = vec![false; obs.len()];
    let mut scored: Vec<(HypothesisKey, f64)> = Vec::new();
    for hyp in state.hypotheses() {
        let members: Vec<usize> = hyp
            .tracks()
            .iter()
            .map(|id| ids.binary_search(id).map_err(|_| Error::UnknownTrack(*id)))
            .collect::<Result<_>>()?;
        let log_prior = hyp.weight.ln();
        for (n, &p_n) in birth.cardinality.iter().enumerate() {
            let base = log_prior + p_n.ln();
            if !options.keep_null && base == f64::NEG_INFINITY {
                continue;
            }
            let allow_miss = |i: usize| terms[members[i]].log_miss > f64::NEG_INFINITY;
            let allow_detect = |i: usize, j: usize| terms[members[i]].log_detect[j].is_some();
            let allow_birth = |j: usize| log_birth[j].is_some();
            let mut visit = |assign: &[Option<usize>], births: &[usize]| {
                let mut lw = base;
                for (i, a) in assign.iter().enumerate() {
                    let t = &terms[members[i]];
                    lw += match a {
                        Some(j) => t.log_detect[*j].unwrap_or(f64::NEG_INFINITY),
                        None => t.log_miss,
                    };
                }
                for &j in births {
                    lw += log_birth[j].unwrap_or(f64::NEG_INFINITY);
                }
                let assigned = assign.iter().flatten().count() + births.len();
                if assigned > 0 {
                    lw += assigned as f64 * log_origin;
                }
                let clutter = obs.len() - assigned;
                if clutter > 0 {
                    lw += clutter as f64 * log_clutter;
                }
                if !options.keep_null && lw == f64::NEG_INFINITY {
                    return;
                }
                let mut key = Vec::with_capacity(assign.len() + births.len());
                for (i, a) in assign.iter().enumerate() {
                    let m = members[i];
                    match a {
                        Some(j) => {
                            detect_used[m][*j] = true;
                            key.push(terms[m].detect_child[*j]);
                        }
                        None => {
                            miss_used[m] = true;
                            key.push(terms[m].miss_child);
                        }
                    }
                }
                for &j in births {
                    birth_used[j] = true;
                    key.push(newborn[j]);
                }
                key.sort_unstable();
                scored.push((HypothesisKey::from_sorted(key), lw));
            };
            Enumerator {
                k: members.len(),
                m: obs.len(),
                n,
                allow_miss: &allow_miss,
                allow_detect: &allow_detect,
                allow_birth: &allow_birth,
            }
            .run(&mut visit);
        }
    }

    // Distinct (hypothesis, association) pairs give distinct keys; merging
    // equal neighbours only matters for states built by hand.
    scored.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    scored.dedup_by(|later, kept| {
        let same = later.0 == kept.0;
        if same {
            kept.1 = log_add(kept.1, later.1);
        }
        same
    });
    let max = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::DegenerateUpdate);
    }
    let norm = max
        + scored
            .iter()
            .map(|(_, lw)| (lw - max).exp())
            .sum::<f64>()
            .ln();
    let hypotheses: Vec<Hypothesis> = scored
        .into_iter()
        .map(|(key, lw)| Hypothesis {
            key,
            weight: (lw - norm).exp(),
        })
        .collect();

    // Child tracks, built once each.
    let mut table = BTreeMap::new();
    for (i, t) in state.tracks.values().enumerate() {
        if miss_used[i] {
            insert_track(
                &mut table,
                Track {
                    path: t.path.extended(None),
                    dist: update_distribution(&t.dist, Outcome::Missed, sensor)?,
                    displayed: t.displayed,
                },
            )?;
        }
        for (j, o) in obs.iter().enumerate() {
            if detect_used[i][j] {
                insert_track(
                    &mut table,
                    Track {
                        path: t.path.extended(Some(o.id)),
                        dist: update_distribution(&t.dist, Outcome::Detected(o), sensor)?,
                        displayed: t.displayed,
                    },
                )?;
            }
        }
    }
    for (j, o) in obs.iter().enumerate() {
        if birth_used[j] {
            insert_track(
                &mut table,
                Track {
                    path: ObservationPath::newborn(o.id),
                    dist: birth_posterior(birth, o, sensor)?,
                    displayed: false,
                },
            )?;
        }
    }
    Ok(FilterState::from_canonical(
        state.scan + 1,
        table,
        hypotheses,
    ))
}

fn insert_track(table: &mut BTreeMap<TrackId, Track>, track: Track) -> Result<()> {
    let id = track.id();
    if let Some(existing) = table.get(&id) {
        if existing.path != track.path {
            return Err(Error::InvalidState(format!("track id collision on {id}")));
        }
        return Ok(());
    }
    table.insert(id, track);
    Ok(())
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}
