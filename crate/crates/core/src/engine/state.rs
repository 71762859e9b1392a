use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::path::{compatible, ObservationPath, TrackId};
use crate::error::{Error, Result};
use crate::model::AugmentedDistribution;

/// Observation path, current distribution and display status of one
/// distinguishable target.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub path: ObservationPath,
    pub dist: AugmentedDistribution,
    pub displayed: bool,
}

impl Track {
    pub fn id(&self) -> TrackId {
        self.path.id()
    }
}

/// Sorted set of track ids. Orders by size first, then lexicographically,
/// which is the canonical tie-break order for hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HypothesisKey(Vec<TrackId>);

impl HypothesisKey {
    pub fn new(mut ids: Vec<TrackId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn tracks(&self) -> &[TrackId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: TrackId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub(crate) fn from_sorted(ids: Vec<TrackId>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Self(ids)
    }
}

impl Ord for HypothesisKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for HypothesisKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A consistent set of tracks with its probability of existence.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub key: HypothesisKey,
    pub weight: f64,
}

impl Hypothesis {
    pub fn tracks(&self) -> &[TrackId] {
        self.key.tracks()
    }
}

/// Track table and weighted hypothesis set after a given scan.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    /// Index of the last processed scan, `-1` before the first one.
    pub scan: i64,
    pub tracks: BTreeMap<TrackId, Track>,
    /// Canonically ordered, no duplicate keys.
    hypotheses: Vec<Hypothesis>,
}

/// Initial state: no track, one empty hypothesis of weight one.
pub fn init_filter() -> FilterState {
    FilterState {
        scan: -1,
        tracks: BTreeMap::new(),
        hypotheses: vec![Hypothesis {
            key: HypothesisKey::empty(),
            weight: 1.0,
        }],
    }
}

impl FilterState {
    /// Assembles a state, summing the weights of duplicate keys.
    pub fn from_parts(
        scan: i64,
        tracks: BTreeMap<TrackId, Track>,
        hypotheses: impl IntoIterator<Item = (HypothesisKey, f64)>,
    ) -> Self {
        let mut s = Self {
            scan,
            tracks,
            hypotheses: Vec::new(),
        };
        s.set_hypotheses(hypotheses);
        s
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    /// Replaces the hypothesis set; duplicate keys have their weights added.
    pub fn set_hypotheses(&mut self, hypotheses: impl IntoIterator<Item = (HypothesisKey, f64)>) {
        let mut list: Vec<Hypothesis> = hypotheses
            .into_iter()
            .map(|(key, weight)| Hypothesis { key, weight })
            .collect();
        list.sort_by(|a, b| a.key.cmp(&b.key));
        list.dedup_by(|later, kept| {
            let same = later.key == kept.key;
            if same {
                kept.weight += later.weight;
            }
            same
        });
        self.hypotheses = list;
    }

    /// Builds a state from hypotheses already in canonical order with
    /// distinct keys.
    pub(crate) fn from_canonical(
        scan: i64,
        tracks: BTreeMap<TrackId, Track>,
        hypotheses: Vec<Hypothesis>,
    ) -> Self {
        debug_assert!(hypotheses.windows(2).all(|w| w[0].key < w[1].key));
        Self {
            scan,
            tracks,
            hypotheses,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.hypotheses.iter().map(|h| h.weight).sum()
    }

    pub fn weight_of(&self, key: &HypothesisKey) -> Option<f64> {
        self.hypotheses
            .binary_search_by(|h| h.key.cmp(key))
            .ok()
            .map(|i| self.hypotheses[i].weight)
    }

    /// Probability of existence of a track: total weight of the hypotheses
    /// that contain it.
    pub fn track_existence(&self, id: TrackId) -> Result<f64> {
        if !self.tracks.contains_key(&id) {
            return Err(Error::UnknownTrack(id));
        }
        Ok(self
            .hypotheses
            .iter()
            .filter(|h| h.key.contains(id))
            .map(|h| h.weight)
            .sum())
    }

    /// Existence probability of every track in the table.
    pub fn existences(&self) -> BTreeMap<TrackId, f64> {
        let mut out: BTreeMap<TrackId, f64> = self.tracks.keys().map(|&id| (id, 0.0)).collect();
        for h in &self.hypotheses {
            for id in h.tracks() {
                if let Some(e) = out.get_mut(id) {
                    *e += h.weight;
                }
            }
        }
        out
    }

    /// Drops tracks that no hypothesis references.
    pub fn collect_garbage(&mut self) {
        let used: BTreeSet<TrackId> = self
            .hypotheses
            .iter()
            .flat_map(|h| h.tracks().iter().copied())
            .collect();
        self.tracks.retain(|id, _| used.contains(id));
    }

    /// Checks the structural invariants: every referenced track exists, is
    /// keyed by its own path, and tracks within a hypothesis are compatible.
    pub fn validate(&self) -> Result<()> {
        for (id, t) in &self.tracks {
            if t.id() != *id {
                return Err(Error::InvalidState(format!(
                    "track {id} stored under a foreign key"
                )));
            }
        }
        for h in &self.hypotheses {
            if !(h.weight >= 0.0) {
                return Err(Error::InvalidState(format!(
                    "negative hypothesis weight {}",
                    h.weight
                )));
            }
            let paths: Vec<&ObservationPath> = h
                .tracks()
                .iter()
                .map(|id| {
                    self.tracks
                        .get(id)
                        .map(|t| &t.path)
                        .ok_or(Error::UnknownTrack(*id))
                })
                .collect::<Result<_>>()?;
            for (i, a) in paths.iter().enumerate() {
                if paths[i + 1..].iter().any(|b| !compatible(a, b)) {
                    return Err(Error::InvalidState(
                        "hypothesis holds incompatible tracks".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObservationId;

    fn track(scan: u32, index: u32) -> Track {
        Track {
            path: ObservationPath::newborn(ObservationId { scan, index }),
            dist: AugmentedDistribution::absent(),
            displayed: false,
        }
    }

    #[test]
    fn init_is_single_empty_hypothesis() {
        let s = init_filter();
        assert_eq!(s.scan, -1);
        assert!(s.tracks.is_empty());
        assert_eq!(s.hypotheses().len(), 1);
        assert!(s.hypotheses()[0].key.is_empty());
        assert_eq!(s.total_weight(), 1.0);
    }

    #[test]
    fn existence_sums_containing_hypotheses() {
        let a = track(0, 0);
        let b = track(0, 1);
        let (ia, ib) = (a.id(), b.id());
        let s = FilterState::from_parts(
            0,
            BTreeMap::from([(ia, a), (ib, b)]),
            [
                (HypothesisKey::new(vec![ia]), 0.6),
                (HypothesisKey::new(vec![ib]), 0.4),
            ],
        );
        assert_eq!(s.track_existence(ia).unwrap(), 0.6);
        assert_eq!(s.track_existence(ib).unwrap(), 0.4);
        assert!(matches!(
            s.track_existence(TrackId(7)),
            Err(Error::UnknownTrack(_))
        ));
        let both = FilterState::from_parts(
            0,
            s.tracks.clone(),
            [(HypothesisKey::new(vec![ia, ib]), 1.0)],
        );
        assert_eq!(both.track_existence(ia).unwrap(), 1.0);
        let none = FilterState::from_parts(0, s.tracks.clone(), [(HypothesisKey::empty(), 1.0)]);
        assert_eq!(none.track_existence(ia).unwrap(), 0.0);
    }

    #[test]
    fn duplicate_keys_accumulate() {
        let s = FilterState::from_parts(
            0,
            BTreeMap::new(),
            [
                (HypothesisKey::empty(), 0.25),
                (HypothesisKey::empty(), 0.5),
            ],
        );
        assert_eq!(s.hypotheses().len(), 1);
        assert_eq!(s.hypotheses()[0].weight, 0.75);
    }

    #[test]
    fn canonical_order_is_size_then_lexicographic() {
        let k1 = HypothesisKey::new(vec![TrackId(9)]);
        let k2 = HypothesisKey::new(vec![TrackId(1), TrackId(2)]);
        let k3 = HypothesisKey::new(vec![TrackId(1), TrackId(3)]);
        assert!(HypothesisKey::empty() < k1);
        assert!(k1 < k2);
        assert!(k2 < k3);
    }
}
