use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use super::path::TrackId;
use super::state::{FilterState, Hypothesis};
use crate::error::{Error, Result};
use crate::model::{
    log_predictive_likelihood, missdetection_mass, BirthModel, Observation, ObservationId,
    SensorModel,
};

/// Who is proposed as the source of an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Track(TrackId),
    Birth,
}

/// One admissible association for a hypothesis and a number of appearing
/// targets. Observations neither in `detected` nor in `births` are false
/// alarms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Association {
    pub detected: BTreeMap<TrackId, ObservationId>,
    pub births: BTreeSet<ObservationId>,
}

/// Index-level enumeration shared by the public enumerator and the update.
///
/// `k` sources are each either missed or given a distinct observation out of
/// `m`, then `n` of the remaining observations go to appearing targets. The
/// callback receives the per-source assignment and the birth indices.
/// Visiting order: sources in order, "missed" before observation `0..m`,
/// then birth subsets in lexicographic order.
pub(crate) struct Enumerator<'a> {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub allow_miss: &'a dyn Fn(usize) -> bool,
    pub allow_detect: &'a dyn Fn(usize, usize) -> bool,
    pub allow_birth: &'a dyn Fn(usize) -> bool,
}

type Visit<'v> = dyn FnMut(&[Option<usize>], &[usize]) + 'v;

impl Enumerator<'_> {
    pub fn run(&self, visit: &mut Visit<'_>) {
        if self.n > self.m {
            return;
        }
        let mut assign = vec![None; self.k];
        let mut used = vec![false; self.m];
        self.recurse(0, &mut assign, &mut used, visit);
    }

    fn recurse(
        &self,
        i: usize,
        assign: &mut [Option<usize>],
        used: &mut [bool],
        visit: &mut Visit<'_>,
    ) {
        if i == self.k {
            let free: Vec<usize> = (0..self.m)
                .filter(|&j| !used[j] && (self.allow_birth)(j))
                .collect();
            for births in free.into_iter().combinations(self.n) {
                visit(assign, &births);
            }
            return;
        }
        if (self.allow_miss)(i) {
            assign[i] = None;
            self.recurse(i + 1, assign, used, visit);
        }
        for j in 0..self.m {
            if !used[j] && (self.allow_detect)(i, j) {
                used[j] = true;
                assign[i] = Some(j);
                self.recurse(i + 1, assign, used, visit);
                used[j] = false;
            }
        }
        assign[i] = None;
    }
}

/// Association filter: `false` rejects pairing the source with the observation.
pub type Gate<'g> = dyn Fn(Source, &Observation) -> bool + 'g;

/// Lists the admissible associations of `hyp` with `n` appearing targets,
/// minus those rejected by `gate`.
pub fn enumerate_associations(
    hyp: &Hypothesis,
    n: usize,
    scan_obs: &[Observation],
    gate: Option<&Gate<'_>>,
) -> Vec<Association> {
    let tracks = hyp.tracks();
    let mut obs: Vec<&Observation> = scan_obs.iter().collect();
    obs.sort_by_key(|o| o.id);
    let always = |_: usize| true;
    let detect = |i: usize, j: usize| gate.is_none_or(|g| g(Source::Track(tracks[i]), obs[j]));
    let birth = |j: usize| gate.is_none_or(|g| g(Source::Birth, obs[j]));
    let mut out = Vec::new();
    Enumerator {
        k: tracks.len(),
        m: obs.len(),
        n,
        allow_miss: &always,
        allow_detect: &detect,
        allow_birth: &birth,
    }
    .run(&mut |assign, births| {
        out.push(Association {
            detected: assign
                .iter()
                .enumerate()
                .filter_map(|(i, a)| a.map(|j| (tracks[i], obs[j].id)))
                .collect(),
            births: births.iter().map(|&j| obs[j].id).collect(),
        });
    });
    out
}

/// Log of the joint probability of an association scheme: detection
/// likelihoods of detected tracks and appearing targets, miss-detection mass
/// of the other tracks, and the clutter factor of every observation.
///
/// `state` must hold the predicted distributions of the tracks in `hyp`.
pub fn association_weight(
    hyp: &Hypothesis,
    assoc: &Association,
    scan_obs: &[Observation],
    birth: &BirthModel,
    sensor: &SensorModel,
    state: &FilterState,
) -> Result<f64> {
    let by_id: BTreeMap<ObservationId, &Observation> = scan_obs.iter().map(|o| (o.id, o)).collect();
    let lookup = |id: &ObservationId| {
        by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::Contract(format!("association refers to {id} outside the scan")))
    };
    let mut log_w = 0.0;
    for id in hyp.tracks() {
        let track = state.tracks.get(id).ok_or(Error::UnknownTrack(*id))?;
        log_w += match assoc.detected.get(id) {
            Some(z) => log_predictive_likelihood(&track.dist, lookup(z)?, sensor)?,
            None => missdetection_mass(&track.dist, sensor).ln(),
        };
    }
    for z in &assoc.births {
        log_w += log_predictive_likelihood(&birth.spatial, lookup(z)?, sensor)?;
    }
    let assigned = assoc.detected.len() + assoc.births.len();
    let false_alarms = scan_obs.len() - assigned;
    if assigned > 0 {
        log_w += assigned as f64 * (1.0 - sensor.false_alarm).ln();
    }
    if false_alarms > 0 {
        log_w += false_alarms as f64 * sensor.false_alarm.ln();
    }
    Ok(log_w)
}
