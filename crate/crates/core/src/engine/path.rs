use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::model::ObservationId;

/// Content hash of an [`ObservationPath`]; two tracks with the same path are
/// the same track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrackId(pub u64);

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl Serialize for TrackId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TrackId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        u64::from_str_radix(&s, 16)
            .map(TrackId)
            .map_err(serde::de::Error::custom)
    }
}

/// The observations a target produced, scan by scan, from its birth up to
/// `last_scan`. Scans without an entry are miss-detections.
///
/// Targets are detected on the scan they appear, so `birth_scan` always
/// carries a detection.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservationPath {
    birth_scan: u32,
    last_scan: u32,
    detections: BTreeMap<u32, ObservationId>,
}

impl ObservationPath {
    /// Path of a target born with observation `obs`.
    pub fn newborn(obs: ObservationId) -> Self {
        Self {
            birth_scan: obs.scan,
            last_scan: obs.scan,
            detections: BTreeMap::from([(obs.scan, obs)]),
        }
    }

    /// Builds a path from its detections. `last_scan` must not precede the
    /// latest detection; the earliest detection is the birth.
    pub fn from_detections(
        detections: impl IntoIterator<Item = ObservationId>,
        last_scan: u32,
    ) -> Option<Self> {
        let detections: BTreeMap<u32, ObservationId> =
            detections.into_iter().map(|o| (o.scan, o)).collect();
        let (&birth_scan, _) = detections.first_key_value()?;
        let (&latest, _) = detections.last_key_value()?;
        (latest <= last_scan).then_some(Self {
            birth_scan,
            last_scan,
            detections,
        })
    }

    /// Appends the outcome of scan `last_scan + 1`.
    pub fn extended(&self, obs: Option<ObservationId>) -> Self {
        let scan = self.last_scan + 1;
        let mut detections = self.detections.clone();
        if let Some(o) = obs {
            debug_assert_eq!(o.scan, scan);
            detections.insert(scan, o);
        }
        Self {
            birth_scan: self.birth_scan,
            last_scan: scan,
            detections,
        }
    }

    pub fn birth_scan(&self) -> u32 {
        self.birth_scan
    }

    pub fn last_scan(&self) -> u32 {
        self.last_scan
    }

    pub fn detections(&self) -> impl Iterator<Item = ObservationId> + '_ {
        self.detections.values().copied()
    }

    pub fn observation_at(&self, scan: u32) -> Option<ObservationId> {
        self.detections.get(&scan).copied()
    }

    /// Number of scans covered, birth included.
    pub fn len(&self) -> usize {
        (self.last_scan - self.birth_scan + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self) -> TrackId {
        let mut h = Sha256::new();
        h.update(self.birth_scan.to_le_bytes());
        h.update(self.last_scan.to_le_bytes());
        for o in self.detections.values() {
            h.update(o.scan.to_le_bytes());
            h.update(o.index.to_le_bytes());
        }
        let digest = h.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        TrackId(u64::from_be_bytes(bytes))
    }
}

impl fmt::Display for ObservationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for scan in self.birth_scan..=self.last_scan {
            if scan > self.birth_scan {
                write!(f, ", ")?;
            }
            match self.detections.get(&scan) {
                Some(o) => write!(f, "{o}")?,
                None => write!(f, "φ")?,
            }
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct PathRepr {
    birth_scan: u32,
    last_scan: u32,
    detections: Vec<ObservationId>,
}

impl Serialize for ObservationPath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PathRepr {
            birth_scan: self.birth_scan,
            last_scan: self.last_scan,
            detections: self.detections.values().copied().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ObservationPath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = PathRepr::deserialize(d)?;
        let p = ObservationPath::from_detections(r.detections, r.last_scan).ok_or_else(|| {
            serde::de::Error::custom("observation path needs a detection within its span")
        })?;
        if p.birth_scan != r.birth_scan {
            return Err(serde::de::Error::custom(
                "birth scan must carry the first detection",
            ));
        }
        Ok(p)
    }
}

/// Two paths are compatible when they share no observation.
pub fn compatible(a: &ObservationPath, b: &ObservationPath) -> bool {
    let (short, long) = if a.detections.len() <= b.detections.len() {
        (a, b)
    } else {
        (b, a)
    };
    short
        .detections
        .iter()
        .all(|(scan, o)| long.detections.get(scan) != Some(o))
}

/// True when every pair of distinct paths in the collection is compatible.
pub fn is_consistent<'a>(paths: impl IntoIterator<Item = &'a ObservationPath>) -> bool {
    let mut seen = BTreeSet::new();
    let mut distinct: Vec<&ObservationPath> = Vec::new();
    for p in paths {
        if seen.insert(p.id()) {
            distinct.push(p);
        }
    }
    distinct
        .iter()
        .enumerate()
        .all(|(i, a)| distinct[i + 1..].iter().all(|b| compatible(a, b)))
}
