//! Brute-force reference computations for validating the hypothesis engine.
//!
//! Nothing here goes through the engine's association enumeration or
//! weighting. Consistent subsets come from a plain power-set scan, and the
//! joint posterior from enumerating every labelling of every observation
//! across the whole history, normalized once at the end.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use nalgebra::DVector;

use crate::engine::{HypothesisKey, ObservationPath};
use crate::error::{Error, Result};
use crate::model::{
    AugmentedDistribution, BirthModel, MotionModel, Observation, ObservationId, SensorModel,
};
use crate::single::{birth_posterior, predict_distribution, update_distribution, Outcome};

pub const MAX_SUBSET_PATHS: usize = 20;
pub const MAX_POSTERIOR_SCANS: usize = 2;
pub const MAX_POSTERIOR_OBS: usize = 2;
pub const MAX_POSTERIOR_BIRTHS: usize = 2;

/// Every subset of `paths` in which no two distinct paths share an
/// observation.
pub fn oracle_consistent_subsets(paths: &[ObservationPath]) -> Result<BTreeSet<HypothesisKey>> {
    let mut unique: Vec<&ObservationPath> = Vec::new();
    for p in paths {
        if !unique.contains(&p) {
            unique.push(p);
        }
    }
    if unique.len() > MAX_SUBSET_PATHS {
        return Err(Error::OracleLimit(format!(
            "{} paths, at most {MAX_SUBSET_PATHS} supported",
            unique.len()
        )));
    }
    let obs: Vec<HashSet<ObservationId>> =
        unique.iter().map(|p| p.detections().collect()).collect();
    let n = unique.len();
    let mut clash = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            clash[i][j] = i != j && !obs[i].is_disjoint(&obs[j]);
        }
    }
    let mut out = BTreeSet::new();
    for mask in 0u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let ok = members
            .iter()
            .all(|&i| members.iter().all(|&j| !clash[i][j]));
        if ok {
            out.insert(HypothesisKey::new(
                members.iter().map(|&i| unique[i].id()).collect(),
            ));
        }
    }
    Ok(out)
}

/// Models consumed by [`oracle_joint_posterior`].
#[derive(Debug, Clone)]
pub struct OracleModels {
    pub motion: MotionModel,
    pub sensor: SensorModel,
    pub birth: BirthModel,
    /// Birth model for the first scan, if different.
    pub initial_birth: Option<BirthModel>,
}

#[derive(Clone)]
struct Branch {
    tracks: Vec<(ObservationPath, AugmentedDistribution)>,
    weight: f64,
}

#[derive(Clone, Copy)]
enum Label {
    Clutter,
    Birth,
    Track(usize),
}

/// Exact posterior over terminal hypotheses after `scans`, by enumerating
/// every association history from the first scan.
pub fn oracle_joint_posterior(
    models: &OracleModels,
    scans: &[Vec<Observation>],
) -> Result<BTreeMap<HypothesisKey, f64>> {
    if scans.len() > MAX_POSTERIOR_SCANS {
        return Err(Error::OracleLimit(format!(
            "{} scans, at most {MAX_POSTERIOR_SCANS}",
            scans.len()
        )));
    }
    if let Some(z) = scans.iter().find(|z| z.len() > MAX_POSTERIOR_OBS) {
        return Err(Error::OracleLimit(format!(
            "{} observations in a scan, at most {MAX_POSTERIOR_OBS}",
            z.len()
        )));
    }
    for b in std::iter::once(&models.birth).chain(models.initial_birth.as_ref()) {
        if b.max_births() > MAX_POSTERIOR_BIRTHS {
            return Err(Error::OracleLimit(format!(
                "birth support up to {}, at most {MAX_POSTERIOR_BIRTHS}",
                b.max_births()
            )));
        }
    }

    let sensor = &models.sensor;
    let mut branches = vec![Branch {
        tracks: Vec::new(),
        weight: 1.0,
    }];
    for (t, scan_obs) in scans.iter().enumerate() {
        let birth = match (t, &models.initial_birth) {
            (0, Some(b)) => b,
            _ => &models.birth,
        };
        let mut next = Vec::new();
        for branch in &branches {
            let predicted: Vec<(ObservationPath, AugmentedDistribution)> = branch
                .tracks
                .iter()
                .map(|(p, d)| (p.clone(), predict_distribution(d, &models.motion)))
                .collect();
            for (n, &p_n) in birth.cardinality.iter().enumerate() {
                let mut labels = vec![Label::Clutter; scan_obs.len()];
                let mut used = vec![false; predicted.len()];
                label_all(0, n, 0, &mut labels, &mut used, &mut |labels| {
                    if let Some(b) = extend(
                        branch.weight * p_n,
                        &predicted,
                        labels,
                        scan_obs,
                        birth,
                        sensor,
                    ) {
                        next.push(b);
                    }
                });
            }
        }
        branches = next;
    }

    let mut out: BTreeMap<HypothesisKey, f64> = BTreeMap::new();
    for b in &branches {
        let key = HypothesisKey::new(b.tracks.iter().map(|(p, _)| p.id()).collect());
        *out.entry(key).or_insert(0.0) += b.weight;
    }
    let total: f64 = out.values().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateUpdate);
    }
    for w in out.values_mut() {
        *w /= total;
    }
    Ok(out)
}

/// Visits every labelling of observations `j..` with exactly `n` births and
/// each track used at most once.
fn label_all(
    j: usize,
    n: usize,
    births: usize,
    labels: &mut Vec<Label>,
    used: &mut Vec<bool>,
    visit: &mut dyn FnMut(&[Label]),
) {
    if j == labels.len() {
        if births == n {
            visit(labels);
        }
        return;
    }
    labels[j] = Label::Clutter;
    label_all(j + 1, n, births, labels, used, visit);
    if births < n {
        labels[j] = Label::Birth;
        label_all(j + 1, n, births + 1, labels, used, visit);
    }
    for i in 0..used.len() {
        if !used[i] {
            used[i] = true;
            labels[j] = Label::Track(i);
            label_all(j + 1, n, births, labels, used, visit);
            used[i] = false;
        }
    }
    labels[j] = Label::Clutter;
}

fn extend(
    prior: f64,
    predicted: &[(ObservationPath, AugmentedDistribution)],
    labels: &[Label],
    scan_obs: &[Observation],
    birth: &BirthModel,
    sensor: &SensorModel,
) -> Option<Branch> {
    let mut weight = prior;
    let mut detected: Vec<Option<&Observation>> = vec![None; predicted.len()];
    let mut tracks = Vec::new();
    for (label, z) in labels.iter().zip(scan_obs) {
        match *label {
            Label::Clutter => weight *= sensor.false_alarm,
            Label::Birth => {
                weight *= (1.0 - sensor.false_alarm)
                    * detection_likelihood(&birth.spatial, &z.value, sensor);
                tracks.push((
                    ObservationPath::newborn(z.id),
                    birth_posterior(birth, z, sensor).ok()?,
                ));
            }
            Label::Track(i) => {
                weight *= (1.0 - sensor.false_alarm)
                    * detection_likelihood(&predicted[i].1, &z.value, sensor);
                detected[i] = Some(z);
            }
        }
    }
    for ((path, dist), det) in predicted.iter().zip(&detected) {
        match det {
            Some(z) => tracks.push((
                path.extended(Some(z.id)),
                update_distribution(dist, Outcome::Detected(z), sensor).ok()?,
            )),
            None => {
                let in_scene: f64 = dist
                    .spatial
                    .iter()
                    .map(|c| c.weight * (1.0 - sensor.detection_at(&c.mean)))
                    .sum();
                weight *= (1.0 - dist.presence) + dist.presence * in_scene;
                tracks.push((
                    path.extended(None),
                    update_distribution(dist, Outcome::Missed, sensor).ok()?,
                ));
            }
        }
    }
    (weight > 0.0).then_some(Branch { tracks, weight })
}

/// Detection likelihood via explicit inverse and determinant.
fn detection_likelihood(
    dist: &AugmentedDistribution,
    z: &DVector<f64>,
    sensor: &SensorModel,
) -> f64 {
    let h = &sensor.observation;
    let k = z.len() as f64;
    let mut sum = 0.0;
    for c in &dist.spatial {
        let s = h * &c.cov * h.transpose() + &sensor.noise;
        let inv = s
            .clone()
            .try_inverse()
            .expect("innovation covariance invertible");
        let d = z - h * &c.mean;
        let q = (d.transpose() * inv * &d)[(0, 0)];
        let norm = ((2.0 * std::f64::consts::PI).powf(k) * s.determinant()).sqrt();
        sum += c.weight * sensor.detection_at(&c.mean) * (-0.5 * q).exp() / norm;
    }
    dist.presence * sum
}
