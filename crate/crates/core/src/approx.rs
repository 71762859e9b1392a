//! Optional filtering approximations: pruning by presence and existence,
//! count caps, measurement gating, birth caps and track merging.
//!
//! Each pass maps a [`FilterState`] to a new one and is the identity at its
//! neutral setting. Removing a track marginalizes the hypotheses over it:
//! the track is dropped from every hypothesis and hypotheses that become
//! identical are fused, their weights added.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::{compatible, FilterState, HypothesisKey, TrackId};
use crate::error::{Error, Result};
use crate::model::{
    cap_mixture, innovation, mahalanobis_sq, moment_match, AugmentedDistribution, BirthModel,
    GaussianComponent, Observation, SensorModel, DEFAULT_MAX_COMPONENTS,
};

/// One post-update pass of the approximation pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pass {
    PrunePresence,
    PruneExistence,
    Merge,
    Cap,
}

/// Switches and thresholds for every approximation; `None` disables one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproximationConfig {
    /// Tracks with presence below this are discarded.
    pub presence_threshold: Option<f64>,
    /// Tracks with existence below this are discarded.
    pub track_existence_threshold: Option<f64>,
    /// Hypotheses with weight below this are discarded, unrenormalized.
    pub hyp_existence_threshold: Option<f64>,
    pub max_tracks: Option<usize>,
    pub max_hypotheses: Option<usize>,
    /// Chi-square gate on the squared Mahalanobis innovation distance.
    pub gate_threshold: Option<f64>,
    /// Birth support cap on the first scan.
    pub initial_birth_cap: Option<usize>,
    /// Birth support cap on every later scan.
    pub birth_cap: Option<usize>,
    /// Merge tracks closer than this (squared Mahalanobis, pooled covariance).
    pub merge_threshold: Option<f64>,
    pub max_components: usize,
    /// Drop hypotheses of weight exactly zero after each update.
    pub drop_null: bool,
    pub order: Vec<Pass>,
}

impl Default for ApproximationConfig {
    fn default() -> Self {
        Self::exact()
    }
}

impl ApproximationConfig {
    /// Every approximation off.
    pub fn exact() -> Self {
        Self {
            presence_threshold: None,
            track_existence_threshold: None,
            hyp_existence_threshold: None,
            max_tracks: None,
            max_hypotheses: None,
            gate_threshold: None,
            initial_birth_cap: None,
            birth_cap: None,
            merge_threshold: None,
            max_components: DEFAULT_MAX_COMPONENTS,
            drop_null: false,
            order: vec![
                Pass::PrunePresence,
                Pass::PruneExistence,
                Pass::Merge,
                Pass::Cap,
            ],
        }
    }

    /// Every approximation on, at the documented defaults:
    ///
    /// | setting | value |
    /// |---|---|
    /// | presence_threshold | 0.01 |
    /// | track_existence_threshold | 1e-3 |
    /// | hyp_existence_threshold | 1e-4 |
    /// | max_tracks | 100 |
    /// | max_hypotheses | 200 |
    /// | gate_threshold | 16.0 |
    /// | initial_birth_cap | 3 |
    /// | birth_cap | 1 |
    /// | merge_threshold | 1.0 |
    pub fn standard() -> Self {
        Self {
            presence_threshold: Some(0.01),
            track_existence_threshold: Some(1e-3),
            hyp_existence_threshold: Some(1e-4),
            max_tracks: Some(100),
            max_hypotheses: Some(200),
            gate_threshold: Some(16.0),
            initial_birth_cap: Some(3),
            birth_cap: Some(1),
            merge_threshold: Some(1.0),
            max_components: DEFAULT_MAX_COMPONENTS,
            drop_null: true,
            order: vec![
                Pass::PrunePresence,
                Pass::PruneExistence,
                Pass::Merge,
                Pass::Cap,
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: Option<f64>, name: &str| match v {
            Some(t) if !(0.0..=1.0).contains(&t) => {
                Err(Error::Config(format!("{name} {t} outside [0, 1]")))
            }
            _ => Ok(()),
        };
        unit(self.track_existence_threshold, "track_existence_threshold")?;
        unit(self.hyp_existence_threshold, "hyp_existence_threshold")?;
        if let Some(t) = self.presence_threshold {
            // Values just above 1 are allowed: they discard every track not
            // certainly present.
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!(
                    "presence_threshold {t} must be >= 0"
                )));
            }
        }
        for (v, name) in [
            (self.gate_threshold, "gate_threshold"),
            (self.merge_threshold, "merge_threshold"),
        ] {
            if let Some(t) = v {
                if !(t >= 0.0) {
                    return Err(Error::Config(format!("{name} {t} must be >= 0")));
                }
            }
        }
        for (v, name) in [
            (self.max_tracks, "max_tracks"),
            (self.max_hypotheses, "max_hypotheses"),
        ] {
            if v == Some(0) {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.max_components == 0 {
            return Err(Error::Config("max_components must be at least 1".into()));
        }
        Ok(())
    }

    /// Birth model for `scan`, with the relevant support cap applied.
    pub fn birth_for_scan(
        &self,
        birth: &BirthModel,
        initial: Option<&BirthModel>,
        scan: u32,
    ) -> Result<BirthModel> {
        let (model, cap) = if scan == 0 {
            (initial.unwrap_or(birth), self.initial_birth_cap)
        } else {
            (birth, self.birth_cap)
        };
        match cap {
            Some(c) => model.capped(c),
            None => Ok(model.clone()),
        }
    }

    /// Runs the post-update passes in the configured order.
    pub fn apply(&self, state: &FilterState) -> Result<FilterState> {
        let mut s = state.clone();
        if self.drop_null {
            let kept: Vec<_> = s
                .hypotheses()
                .iter()
                .filter(|h| h.weight > 0.0)
                .map(|h| (h.key.clone(), h.weight))
                .collect();
            if !kept.is_empty() {
                s.set_hypotheses(kept);
                s.collect_garbage();
            }
        }
        for pass in &self.order {
            s = match pass {
                Pass::PrunePresence => match self.presence_threshold {
                    Some(t) => prune_by_presence(&s, t),
                    None => s,
                },
                Pass::PruneExistence => prune_by_existence(
                    &s,
                    self.track_existence_threshold,
                    self.hyp_existence_threshold,
                ),
                Pass::Merge => match self.merge_threshold {
                    Some(t) => merge_tracks(&s, t, self.max_components)?,
                    None => s,
                },
                Pass::Cap => cap_counts(&s, self.max_tracks, self.max_hypotheses),
            };
        }
        Ok(s)
    }
}

/// Removes `victims` from the track table and marginalizes the hypotheses.
pub fn marginalize(state: &FilterState, victims: &BTreeSet<TrackId>) -> FilterState {
    if victims.is_empty() {
        return state.clone();
    }
    let tracks = state
        .tracks
        .iter()
        .filter(|(id, _)| !victims.contains(id))
        .map(|(id, t)| (*id, t.clone()))
        .collect();
    let hyps = state.hypotheses().iter().map(|h| {
        let ids: Vec<TrackId> = h
            .tracks()
            .iter()
            .copied()
            .filter(|id| !victims.contains(id))
            .collect();
        (HypothesisKey::new(ids), h.weight)
    });
    FilterState::from_parts(state.scan, tracks, hyps)
}

/// Discards tracks whose presence is below `threshold`.
pub fn prune_by_presence(state: &FilterState, threshold: f64) -> FilterState {
    let victims: BTreeSet<TrackId> = state
        .tracks
        .iter()
        .filter(|(_, t)| t.dist.presence < threshold)
        .map(|(id, _)| *id)
        .collect();
    marginalize(state, &victims)
}

/// Discards tracks with low existence (marginalizing), then hypotheses with
/// low weight. Hypothesis weights are not renormalized; the next update
/// does it. Tracks left without a hypothesis are dropped. The heaviest
/// hypothesis is always kept so the state stays usable.
pub fn prune_by_existence(
    state: &FilterState,
    track_threshold: Option<f64>,
    hyp_threshold: Option<f64>,
) -> FilterState {
    let mut s = match track_threshold {
        Some(t) => {
            let victims = state
                .existences()
                .into_iter()
                .filter(|(_, e)| *e < t)
                .map(|(id, _)| id)
                .collect();
            marginalize(state, &victims)
        }
        None => state.clone(),
    };
    if let Some(t) = hyp_threshold {
        let best = s
            .hypotheses()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.weight.total_cmp(&b.1.weight).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i);
        let kept: Vec<_> = s
            .hypotheses()
            .iter()
            .enumerate()
            .filter(|(i, h)| h.weight >= t || Some(*i) == best)
            .map(|(_, h)| (h.key.clone(), h.weight))
            .collect();
        s.set_hypotheses(kept);
        s.collect_garbage();
    }
    s
}

/// Keeps at most `max_tracks` tracks (highest existence) and at most
/// `max_hypotheses` hypotheses (highest weight). Ties go to the canonically
/// smaller id or key.
pub fn cap_counts(
    state: &FilterState,
    max_tracks: Option<usize>,
    max_hypotheses: Option<usize>,
) -> FilterState {
    let mut s = state.clone();
    if let Some(cap) = max_tracks {
        if s.tracks.len() > cap {
            let mut ranked: Vec<(TrackId, f64)> = s.existences().into_iter().collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let victims = ranked[cap..].iter().map(|(id, _)| *id).collect();
            s = marginalize(&s, &victims);
        }
    }
    if let Some(cap) = max_hypotheses {
        if s.hypotheses().len() > cap {
            let mut ranked: Vec<(HypothesisKey, f64)> = s
                .hypotheses()
                .iter()
                .map(|h| (h.key.clone(), h.weight))
                .collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            ranked.truncate(cap);
            s.set_hypotheses(ranked);
            s.collect_garbage();
        }
    }
    s
}

/// Keeps an association of `obs` with `dist` when some component's squared
/// Mahalanobis innovation distance is within `threshold`.
pub fn gate(
    dist: &AugmentedDistribution,
    obs: &Observation,
    sensor: &SensorModel,
    threshold: f64,
) -> bool {
    if threshold == f64::INFINITY {
        return true;
    }
    dist.spatial.iter().any(|c| {
        innovation(c, sensor)
            .and_then(|(zhat, s)| mahalanobis_sq(&obs.value, &zhat, &s))
            .is_ok_and(|d| d <= threshold)
    })
}

/// Squared Mahalanobis distance between the moment-matched means of two
/// spatial mixtures, under the average of their covariances.
pub fn merge_distance(a: &AugmentedDistribution, b: &AugmentedDistribution) -> Option<f64> {
    let ma = moment_match(&a.spatial).ok()?;
    let mb = moment_match(&b.spatial).ok()?;
    if ma.dim() != mb.dim() {
        return None;
    }
    let pooled = (&ma.cov + &mb.cov) * 0.5;
    mahalanobis_sq(&ma.mean, &mb.mean, &pooled).ok()
}

/// Greedy single pass over pairs of tracks that share no hypothesis, in
/// descending existence order. A pair closer than `threshold` becomes one
/// track that keeps the path of the more credible member; in every
/// hypothesis the other member is replaced by it. Pairs whose substitution
/// would place incompatible paths in one hypothesis are left alone.
pub fn merge_tracks(
    state: &FilterState,
    threshold: f64,
    max_components: usize,
) -> Result<FilterState> {
    let existence = state.existences();
    let mut order: Vec<TrackId> = existence.keys().copied().collect();
    order.sort_by(|a, b| existence[b].total_cmp(&existence[a]).then(a.cmp(b)));

    let mut membership: BTreeMap<TrackId, Vec<usize>> = BTreeMap::new();
    for (hi, h) in state.hypotheses().iter().enumerate() {
        for id in h.tracks() {
            membership.entry(*id).or_default().push(hi);
        }
    }
    let shares = |a: &TrackId, b: &TrackId| {
        let (ma, mb) = (membership.get(a), membership.get(b));
        match (ma, mb) {
            (Some(x), Some(y)) => x.iter().any(|i| y.binary_search(i).is_ok()),
            _ => false,
        }
    };

    let mut consumed: BTreeSet<TrackId> = BTreeSet::new();
    let mut replace: BTreeMap<TrackId, TrackId> = BTreeMap::new();
    let mut merged_dists: BTreeMap<TrackId, AugmentedDistribution> = BTreeMap::new();
    for (pos, keep) in order.iter().enumerate() {
        if consumed.contains(keep) {
            continue;
        }
        let tk = &state.tracks[keep];
        for other in &order[pos + 1..] {
            if consumed.contains(other) || shares(keep, other) {
                continue;
            }
            let to = &state.tracks[other];
            let close = merge_distance(&tk.dist, &to.dist).is_some_and(|d| d < threshold);
            if !close {
                continue;
            }
            let substitutable = membership.get(other).into_iter().flatten().all(|&hi| {
                state.hypotheses()[hi]
                    .tracks()
                    .iter()
                    .filter(|id| *id != other)
                    .all(|id| compatible(&state.tracks[id].path, &tk.path))
            });
            if !substitutable {
                continue;
            }
            let (ak, ao) = (existence[keep], existence[other]);
            if !(ak + ao > 0.0) {
                continue;
            }
            merged_dists.insert(*keep, mix(&tk.dist, ak, &to.dist, ao, max_components)?);
            replace.insert(*other, *keep);
            consumed.insert(*keep);
            consumed.insert(*other);
            break;
        }
    }
    if replace.is_empty() {
        return Ok(state.clone());
    }
    let mut tracks = state.tracks.clone();
    for (id, d) in merged_dists {
        tracks.get_mut(&id).expect("merged track present").dist = d;
    }
    for gone in replace.keys() {
        tracks.remove(gone);
    }
    let hyps = state.hypotheses().iter().map(|h| {
        let ids = h
            .tracks()
            .iter()
            .map(|id| *replace.get(id).unwrap_or(id))
            .collect();
        (HypothesisKey::new(ids), h.weight)
    });
    Ok(FilterState::from_parts(state.scan, tracks, hyps))
}

/// Existence-weighted mixture of two augmented distributions.
fn mix(
    a: &AugmentedDistribution,
    wa: f64,
    b: &AugmentedDistribution,
    wb: f64,
    max_components: usize,
) -> Result<AugmentedDistribution> {
    let (pa, pb) = (wa / (wa + wb), wb / (wa + wb));
    let presence = pa * a.presence + pb * b.presence;
    let (sa, sb) = if presence > 0.0 {
        (pa * a.presence / presence, pb * b.presence / presence)
    } else {
        (pa, pb)
    };
    let mut spatial: Vec<GaussianComponent> = a
        .spatial
        .iter()
        .map(|c| GaussianComponent {
            weight: c.weight * sa,
            ..c.clone()
        })
        .chain(b.spatial.iter().map(|c| GaussianComponent {
            weight: c.weight * sb,
            ..c.clone()
        }))
        .filter(|c| c.weight > 0.0)
        .collect();
    cap_mixture(&mut spatial, max_components);
    if spatial.is_empty() && presence > 0.0 {
        return Err(Error::InvalidState(
            "merged mixture lost every component".into(),
        ));
    }
    Ok(AugmentedDistribution { presence, spatial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{ObservationPath, Track};
    use crate::model::ObservationId;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn track(scan: u32, index: u32, presence: f64, mean: f64) -> Track {
        Track {
            path: ObservationPath::newborn(ObservationId { scan, index }),
            dist: AugmentedDistribution::gaussian(
                presence,
                DVector::from_element(1, mean),
                DMatrix::identity(1, 1),
            )
            .unwrap(),
            displayed: false,
        }
    }

    fn state(tracks: Vec<Track>, hyps: &[(&[usize], f64)]) -> (FilterState, Vec<TrackId>) {
        let ids: Vec<TrackId> = tracks.iter().map(Track::id).collect();
        let table = tracks.into_iter().map(|t| (t.id(), t)).collect();
        let s = FilterState::from_parts(
            0,
            table,
            hyps.iter()
                .map(|(m, w)| (HypothesisKey::new(m.iter().map(|&i| ids[i]).collect()), *w)),
        );
        (s, ids)
    }

    #[test]
    fn zero_thresholds_are_identity() {
        let (s, _) = state(
            vec![track(0, 0, 0.3, 0.0), track(0, 1, 0.9, 5.0)],
            &[(&[0], 0.5), (&[1], 0.3), (&[], 0.2)],
        );
        assert_eq!(prune_by_presence(&s, 0.0), s);
        assert_eq!(prune_by_existence(&s, Some(0.0), Some(0.0)), s);
        assert_eq!(cap_counts(&s, None, None), s);
        assert_eq!(merge_tracks(&s, 0.0, 4).unwrap(), s);
        let mut neutral = ApproximationConfig::exact();
        neutral.presence_threshold = Some(0.0);
        neutral.track_existence_threshold = Some(0.0);
        neutral.hyp_existence_threshold = Some(0.0);
        neutral.merge_threshold = Some(0.0);
        assert_eq!(neutral.apply(&s).unwrap(), s);
    }

    #[test]
    fn marginalizing_sums_duplicates() {
        let (s, _) = state(vec![track(0, 0, 1.0, 0.0)], &[(&[0], 0.3), (&[], 0.7)]);
        let out = prune_by_existence(&s, Some(0.5), None);
        assert_eq!(out.hypotheses().len(), 1);
        assert!(out.hypotheses()[0].key.is_empty());
        assert_eq!(out.hypotheses()[0].weight, 1.0);
        assert!(out.tracks.is_empty());
    }

    #[test]
    fn hypothesis_pruning_does_not_renormalize() {
        let (s, _) = state(
            vec![track(0, 0, 1.0, 0.0), track(0, 1, 1.0, 3.0)],
            &[(&[0], 0.94), (&[1], 0.05), (&[], 0.01)],
        );
        let out = prune_by_existence(&s, None, Some(0.02));
        let w: Vec<f64> = out.hypotheses().iter().map(|h| h.weight).collect();
        assert_eq!(w.len(), 2);
        assert!(w.contains(&0.94) && w.contains(&0.05));
        assert!((out.total_weight() - 0.99).abs() < 1e-15);
    }

    #[test]
    fn heaviest_hypothesis_survives_any_threshold() {
        let (s, _) = state(vec![track(0, 0, 1.0, 0.0)], &[(&[0], 0.6), (&[], 0.4)]);
        let out = prune_by_existence(&s, None, Some(1.0));
        assert_eq!(out.hypotheses().len(), 1);
        assert_eq!(out.hypotheses()[0].weight, 0.6);
    }

    #[test]
    fn caps_keep_heaviest() {
        let (s, ids) = state(
            vec![track(0, 0, 1.0, 0.0), track(0, 1, 1.0, 3.0)],
            &[(&[0], 0.5), (&[1], 0.3), (&[], 0.2)],
        );
        let out = cap_counts(&s, None, Some(2));
        assert_eq!(out.hypotheses().len(), 2);
        assert!(out.weight_of(&HypothesisKey::empty()).is_none());
        let out = cap_counts(&s, Some(1), None);
        assert_eq!(out.tracks.keys().copied().collect::<Vec<_>>(), vec![ids[0]]);
        assert!((out.weight_of(&HypothesisKey::empty()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cap_ties_go_to_smaller_key() {
        let (s, _) = state(
            vec![track(0, 0, 1.0, 0.0), track(0, 1, 1.0, 3.0)],
            &[(&[0], 0.25), (&[1], 0.25), (&[], 0.5)],
        );
        let out = cap_counts(&s, None, Some(2));
        let kept: Vec<_> = out.hypotheses().iter().map(|h| h.key.clone()).collect();
        let mut singles: Vec<HypothesisKey> = s
            .hypotheses()
            .iter()
            .filter(|h| h.key.len() == 1)
            .map(|h| h.key.clone())
            .collect();
        singles.sort();
        assert!(kept.contains(&HypothesisKey::empty()));
        assert!(kept.contains(&singles[0]));
    }

    #[test]
    fn gate_example() {
        // Innovation variance 2, offset 2: squared distance 2.
        let sensor =
            SensorModel::new(DMatrix::identity(1, 1), DMatrix::identity(1, 1), 0.9, 0.1).unwrap();
        let d = AugmentedDistribution::gaussian(1.0, DVector::zeros(1), DMatrix::identity(1, 1))
            .unwrap();
        let z = Observation::new(0, 0, DVector::from_element(1, 2.0));
        assert!(gate(&d, &z, &sensor, 9.21));
        assert!(!gate(&d, &z, &sensor, 1.9));
        let far = Observation::new(0, 0, DVector::from_element(1, 1e6));
        assert!(gate(&d, &far, &sensor, f64::INFINITY));
    }

    #[test]
    fn merges_identical_tracks_from_disjoint_hypotheses() {
        let (s, ids) = state(
            vec![track(0, 0, 1.0, 2.0), track(0, 1, 1.0, 2.0)],
            &[(&[0], 0.6), (&[1], 0.4)],
        );
        let out = merge_tracks(&s, 1.0, 4).unwrap();
        assert_eq!(out.tracks.len(), 1);
        assert_eq!(out.hypotheses().len(), 1);
        let e = out.track_existence(ids[0]).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
        let merged = &out.tracks[&ids[0]].dist;
        assert_eq!(merged.presence, 1.0);
        assert!((merged.spatial.iter().map(|c| c.weight).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cohypothesized_tracks_are_not_merged() {
        let (s, _) = state(
            vec![track(0, 0, 1.0, 2.0), track(0, 1, 1.0, 2.0)],
            &[(&[0, 1], 0.6), (&[], 0.4)],
        );
        assert_eq!(merge_tracks(&s, 1.0, 4).unwrap(), s);
    }

    #[test]
    fn distant_tracks_are_not_merged() {
        let (s, _) = state(
            vec![track(0, 0, 1.0, 0.0), track(0, 1, 1.0, 9.0)],
            &[(&[0], 0.6), (&[1], 0.4)],
        );
        assert_eq!(merge_tracks(&s, 1.0, 4).unwrap(), s);
    }

    #[test]
    fn birth_caps_by_scan() {
        let birth = BirthModel::new(
            vec![0.5, 0.3, 0.2],
            AugmentedDistribution::gaussian(1.0, DVector::zeros(1), DMatrix::identity(1, 1))
                .unwrap(),
        )
        .unwrap();
        let cfg = ApproximationConfig {
            initial_birth_cap: Some(2),
            birth_cap: Some(1),
            ..ApproximationConfig::exact()
        };
        assert_eq!(
            cfg.birth_for_scan(&birth, None, 0).unwrap().cardinality,
            vec![0.5, 0.3, 0.2]
        );
        let later = cfg.birth_for_scan(&birth, None, 1).unwrap().cardinality;
        assert!((later[0] - 0.625).abs() < 1e-15 && (later[1] - 0.375).abs() < 1e-15);
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(ApproximationConfig {
            max_hypotheses: Some(0),
            ..ApproximationConfig::exact()
        }
        .validate()
        .is_err());
        assert!(ApproximationConfig {
            track_existence_threshold: Some(1.5),
            ..ApproximationConfig::exact()
        }
        .validate()
        .is_err());
        assert!(ApproximationConfig::standard().validate().is_ok());
    }

    proptest! {
        #[test]
        fn gate_is_monotone(offset in -20.0f64..20.0, var in 0.1f64..10.0, lo in 0.0f64..30.0, extra in 0.0f64..30.0) {
            let sensor = SensorModel::new(DMatrix::identity(1, 1), DMatrix::identity(1, 1), 0.9, 0.1).unwrap();
            let d = AugmentedDistribution::gaussian(1.0, DVector::zeros(1), DMatrix::from_element(1, 1, var)).unwrap();
            let z = Observation::new(0, 0, DVector::from_element(1, offset));
            if gate(&d, &z, &sensor, lo) {
                prop_assert!(gate(&d, &z, &sensor, lo + extra));
            }
        }

        #[test]
        fn pruning_keeps_consistent_state(w in proptest::collection::vec(0.01f64..1.0, 3), th in 0.0f64..0.6) {
            let total: f64 = w.iter().sum();
            let (s, _) = state(
                vec![track(0, 0, 0.8, 0.0), track(0, 1, 0.5, 4.0)],
                &[(&[0], w[0] / total), (&[1], w[1] / total), (&[], w[2] / total)],
            );
            let out = prune_by_existence(&s, Some(th), Some(th));
            prop_assert!(out.validate().is_ok());
            prop_assert!(!out.hypotheses().is_empty());
            prop_assert!(out.total_weight() <= 1.0 + 1e-12);
        }
    }
}
