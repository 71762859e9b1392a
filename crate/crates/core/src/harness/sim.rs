use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::{Models, ScenarioConfig};
use crate::error::{Error, Result};
use crate::model::{BirthModel, Observation, ObservationId};

/// One simulated target, from its birth scan to its departure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetTruth {
    pub birth_scan: u32,
    /// True state on each scan the target is in the scene.
    pub states: Vec<Vec<f64>>,
    /// Observation produced on each of those scans; `None` when missed.
    pub observations: Vec<Option<ObservationId>>,
}

impl TargetTruth {
    /// State at `scan`, if the target is in the scene then.
    pub fn state_at(&self, scan: u32) -> Option<&[f64]> {
        let k = scan.checked_sub(self.birth_scan)? as usize;
        self.states.get(k).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scans: usize,
    pub targets: Vec<TargetTruth>,
    /// False-alarm observation ids per scan.
    pub false_alarms: Vec<Vec<ObservationId>>,
}

impl GroundTruth {
    /// True states of every target in the scene at `scan`.
    pub fn present_at(&self, scan: u32) -> Vec<&[f64]> {
        self.targets
            .iter()
            .filter_map(|t| t.state_at(scan))
            .collect()
    }
}

enum Origin {
    Target(usize),
    Clutter,
}

/// Draws a scenario from `cfg`, reproducibly from `cfg.sim.seed`.
///
/// Targets appear according to the birth model and are always detected on
/// their first scan. Afterwards each survives a scan with probability `p_s`
/// and is detected with probability `p_d`. Clutter is a Poisson number of
/// points uniform over the box spanned by the image of the scene bounds
/// under `H`.
pub fn simulate(cfg: &ScenarioConfig) -> Result<(GroundTruth, Vec<Vec<Observation>>)> {
    cfg.validate()?;
    let m = cfg.models()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sim.seed);
    let clutter_box = observation_box(&m);
    let clutter = if cfg.sim.clutter_rate > 0.0 {
        Some(Poisson::new(cfg.sim.clutter_rate).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };

    let mut targets: Vec<TargetTruth> = Vec::new();
    let mut alive: Vec<(usize, DVector<f64>)> = Vec::new();
    let mut scans = Vec::with_capacity(cfg.sim.scans);
    let mut false_alarms = Vec::with_capacity(cfg.sim.scans);

    for t in 0..cfg.sim.scans as u32 {
        let mut produced: Vec<(DVector<f64>, Origin)> = Vec::new();

        let mut survivors = Vec::with_capacity(alive.len());
        for (k, x) in alive.drain(..) {
            if !rng.random_bool(m.motion.survival) {
                continue;
            }
            let x = sample_gaussian(
                &mut rng,
                &(&m.motion.transition * &x),
                &m.motion.process_noise,
            );
            targets[k].states.push(x.iter().copied().collect());
            if rng.random_bool(m.sensor.detection_at(&x)) {
                produced.push((measure(&mut rng, &m, &x), Origin::Target(k)));
            }
            survivors.push((k, x));
        }
        alive = survivors;

        let birth = match (t, &m.initial_birth) {
            (0, Some(b)) => b,
            _ => &m.birth,
        };
        for _ in 0..sample_index(&mut rng, &birth.cardinality)? {
            let x = sample_birth(&mut rng, birth)?;
            let k = targets.len();
            targets.push(TargetTruth {
                birth_scan: t,
                states: vec![x.iter().copied().collect()],
                observations: Vec::new(),
            });
            produced.push((measure(&mut rng, &m, &x), Origin::Target(k)));
            alive.push((k, x));
        }

        let n_clutter = clutter.as_ref().map_or(0, |p| p.sample(&mut rng) as usize);
        for _ in 0..n_clutter {
            let z = DVector::from_iterator(
                clutter_box.len(),
                clutter_box.iter().map(|&(lo, hi)| {
                    if hi > lo {
                        rng.random_range(lo..hi)
                    } else {
                        lo
                    }
                }),
            );
            produced.push((z, Origin::Clutter));
        }

        produced.shuffle(&mut rng);
        let mut scan_obs = Vec::with_capacity(produced.len());
        let mut fa = Vec::new();
        let mut detected: Vec<Option<ObservationId>> = vec![None; targets.len()];
        for (i, (z, origin)) in produced.into_iter().enumerate() {
            let o = Observation::new(t, i as u32, z);
            match origin {
                Origin::Target(k) => {
                    // At most one observation per target per scan.
                    assert!(
                        detected[k].is_none(),
                        "target {k} observed twice on scan {t}"
                    );
                    detected[k] = Some(o.id);
                }
                Origin::Clutter => fa.push(o.id),
            }
            scan_obs.push(o);
        }
        for (k, _) in &alive {
            targets[*k].observations.push(detected[*k]);
        }
        // Only targets in the scene produce observations.
        for (k, d) in detected.iter().enumerate() {
            assert!(
                d.is_none() || alive.iter().any(|(a, _)| *a == k),
                "departed target {k} observed on scan {t}"
            );
        }
        // Observations within a scan are distinct.
        for (i, a) in scan_obs.iter().enumerate() {
            assert!(
                scan_obs[i + 1..].iter().all(|b| b.value != a.value),
                "coincident observations on scan {t}"
            );
        }
        scans.push(scan_obs);
        false_alarms.push(fa);
    }

    // Each target enters the scene once and stays for a contiguous run.
    for tgt in &targets {
        assert_eq!(tgt.states.len(), tgt.observations.len());
        assert!(
            tgt.observations[0].is_some(),
            "target not detected on its birth scan"
        );
    }
    let ids: BTreeSet<ObservationId> = scans.iter().flatten().map(|o| o.id).collect();
    assert_eq!(ids.len(), scans.iter().map(Vec::len).sum::<usize>());

    Ok((
        GroundTruth {
            scans: cfg.sim.scans,
            targets,
            false_alarms,
        },
        scans,
    ))
}

fn measure(rng: &mut ChaCha8Rng, m: &Models, x: &DVector<f64>) -> DVector<f64> {
    sample_gaussian(rng, &(&m.sensor.observation * x), &m.sensor.noise)
}

fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> Result<usize> {
    let dist = WeightedIndex::new(weights).map_err(|e| Error::Config(e.to_string()))?;
    Ok(dist.sample(rng))
}

fn sample_birth(rng: &mut ChaCha8Rng, birth: &BirthModel) -> Result<DVector<f64>> {
    let weights: Vec<f64> = birth.spatial.spatial.iter().map(|c| c.weight).collect();
    let c = &birth.spatial.spatial[sample_index(rng, &weights)?];
    Ok(sample_gaussian(rng, &c.mean, &c.cov))
}

/// Draws from N(mean, cov) for a symmetric positive semi-definite `cov`.
fn sample_gaussian(rng: &mut ChaCha8Rng, mean: &DVector<f64>, cov: &DMatrix<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(cov.clone());
    let scale = DVector::from_iterator(
        mean.len(),
        eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()),
    );
    let e = DVector::from_iterator(
        mean.len(),
        (0..mean.len()).map(|_| rng.sample::<f64, _>(StandardNormal)),
    );
    mean + eig.eigenvectors * e.component_mul(&scale)
}

/// Per-coordinate range of `H x` over the scene box.
fn observation_box(m: &Models) -> Vec<(f64, f64)> {
    let h = &m.sensor.observation;
    (0..h.nrows())
        .map(|r| {
            let mut lo = 0.0;
            let mut hi = 0.0;
            for (c, &(a, b)) in m.space.bounds().iter().enumerate() {
                let (x, y) = (h[(r, c)] * a, h[(r, c)] * b);
                lo += x.min(y);
                hi += x.max(y);
            }
            (lo, hi)
        })
        .collect()
}
