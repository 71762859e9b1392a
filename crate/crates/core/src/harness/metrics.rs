use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::driver::RunReport;
use super::sim::GroundTruth;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetrics {
    pub scan: u32,
    pub estimated: usize,
    pub present: usize,
    /// Extracted count minus true count.
    pub cardinality_error: i64,
    pub matched: usize,
    /// Root mean square observation-space error over matched pairs.
    pub rmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub per_scan: Vec<ScanMetrics>,
    pub mean_cardinality_error: f64,
    pub mean_abs_cardinality_error: f64,
    /// Mean of the per-scan RMSE over scans with at least one match.
    pub mean_rmse: Option<f64>,
}

/// Cardinality error and matched-position RMSE per scan.
///
/// Positions are compared in observation space, through `h`. Estimates and
/// truths are paired greedily by increasing distance, and pairs farther
/// apart than `radius` are left unmatched. Scans beyond the shorter of the
/// two sequences are ignored.
pub fn metrics(
    truth: &GroundTruth,
    report: &RunReport,
    h: &DMatrix<f64>,
    radius: f64,
) -> MetricsSummary {
    let mut per_scan = Vec::new();
    for row in report.scans.iter().take(truth.scans) {
        let project = |x: &[f64]| h * DVector::from_column_slice(x);
        let est: Vec<DVector<f64>> = row
            .estimates
            .iter()
            .map(|e| project(e.point.as_slice()))
            .collect();
        let tru: Vec<DVector<f64>> = truth
            .present_at(row.scan)
            .into_iter()
            .map(project)
            .collect();

        let mut pairs = Vec::new();
        for (i, e) in est.iter().enumerate() {
            for (j, t) in tru.iter().enumerate() {
                let d = (e - t).norm();
                if d <= radius {
                    pairs.push((d, i, j));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut e_used = vec![false; est.len()];
        let mut t_used = vec![false; tru.len()];
        let mut sq = 0.0;
        let mut matched = 0;
        for (d, i, j) in pairs {
            if !e_used[i] && !t_used[j] {
                e_used[i] = true;
                t_used[j] = true;
                sq += d * d;
                matched += 1;
            }
        }
        per_scan.push(ScanMetrics {
            scan: row.scan,
            estimated: est.len(),
            present: tru.len(),
            cardinality_error: est.len() as i64 - tru.len() as i64,
            matched,
            rmse: (matched > 0).then(|| (sq / matched as f64).sqrt()),
        });
    }
    let n = per_scan.len().max(1) as f64;
    let rmses: Vec<f64> = per_scan.iter().filter_map(|s| s.rmse).collect();
    MetricsSummary {
        mean_cardinality_error: per_scan
            .iter()
            .map(|s| s.cardinality_error as f64)
            .sum::<f64>()
            / n,
        mean_abs_cardinality_error: per_scan
            .iter()
            .map(|s| s.cardinality_error.abs() as f64)
            .sum::<f64>()
            / n,
        mean_rmse: (!rmses.is_empty()).then(|| rmses.iter().sum::<f64>() / rmses.len() as f64),
        per_scan,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{HypothesisKey, ObservationPath, TrackId};
    use crate::estimate::TrackEstimate;
    use crate::harness::{ScanRecord, TargetTruth};
    use crate::model::ObservationId;

    fn truth(states: &[[f64; 2]]) -> GroundTruth {
        GroundTruth {
            scans: 1,
            targets: states
                .iter()
                .map(|s| TargetTruth {
                    birth_scan: 0,
                    states: vec![s.to_vec()],
                    observations: vec![None],
                })
                .collect(),
            false_alarms: vec![vec![]],
        }
    }

    fn report(points: &[[f64; 2]]) -> RunReport {
        let estimates = points
            .iter()
            .enumerate()
            .map(|(i, p)| TrackEstimate {
                id: TrackId(i as u64),
                path: ObservationPath::newborn(ObservationId {
                    scan: 0,
                    index: i as u32,
                }),
                existence: 1.0,
                presence: 1.0,
                point: DVector::from_column_slice(p),
                displayed: true,
            })
            .collect();
        RunReport {
            scans: vec![ScanRecord {
                scan: 0,
                observations: vec![],
                hypothesis_count: 1,
                track_count: points.len(),
                total_weight: 1.0,
                retained_weight: 1.0,
                map_hypothesis: HypothesisKey::empty(),
                map_weight: 1.0,
                estimates,
            }],
            summary: None,
        }
    }

    fn h() -> DMatrix<f64> {
        DMatrix::identity(2, 2)
    }

    #[test]
    fn perfect_estimates() {
        let s = metrics(
            &truth(&[[1.0, 2.0], [3.0, 4.0]]),
            &report(&[[1.0, 2.0], [3.0, 4.0]]),
            &h(),
            1.0,
        );
        assert_eq!(s.per_scan[0].cardinality_error, 0);
        assert_eq!(s.per_scan[0].rmse, Some(0.0));
    }

    #[test]
    fn empty_extraction() {
        let s = metrics(&truth(&[[1.0, 2.0], [3.0, 4.0]]), &report(&[]), &h(), 1.0);
        assert_eq!(s.per_scan[0].cardinality_error, -2);
        assert_eq!(s.per_scan[0].rmse, None);
        assert_eq!(s.mean_rmse, None);
    }

    #[test]
    fn rmse_ignores_order() {
        let t = truth(&[[0.0, 0.0], [5.0, 5.0]]);
        let a = metrics(&t, &report(&[[0.3, 0.0], [5.0, 4.6]]), &h(), 2.0);
        let b = metrics(&t, &report(&[[5.0, 4.6], [0.3, 0.0]]), &h(), 2.0);
        assert_eq!(a.per_scan[0].rmse, b.per_scan[0].rmse);
        let want = ((0.09 + 0.16) / 2.0f64).sqrt();
        assert!((a.per_scan[0].rmse.unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn radius_limits_matches() {
        let s = metrics(&truth(&[[0.0, 0.0]]), &report(&[[3.0, 0.0]]), &h(), 2.0);
        assert_eq!(s.per_scan[0].matched, 0);
    }
}
