//! ROC re-thresholding sweep over recorded strength traces.
//!
//! The live run records per-frame trigger strengths at canonical settings;
//! re-deriving triggers as `strength >= tau` for a grid of multipliers maps
//! out each detector's attainable operating points. At `tau = 1.0` the
//! re-derived triggers coincide with the live run because every detector
//! defines `trigger == (strength >= 1)`.

use serde::{Deserialize, Serialize};

use crate::signal::GroundTruthEvent;

use super::{cluster_fp, ScoringConfig};

/// Dense per-frame strengths for one node's stream (index = frame).
#[derive(Debug, Clone)]
pub struct StrengthTrace {
    pub node_id: u32,
    pub strengths: Vec<f64>,
}

/// One swept operating point, in raw counts so replicates can be merged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocCounts {
    pub multiplier: f64,
    pub events_detected: u64,
    pub events_scheduled: u64,
    pub fp_clusters: u64,
    pub node_hours: f64,
}

impl RocCounts {
    pub fn merge(&mut self, other: &RocCounts) {
        assert_eq!(self.multiplier, other.multiplier);
        self.events_detected += other.events_detected;
        self.events_scheduled += other.events_scheduled;
        self.fp_clusters += other.fp_clusters;
        self.node_hours += other.node_hours;
    }

    pub fn to_point(self) -> RocPoint {
        RocPoint {
            multiplier: self.multiplier,
            detection_rate_pct: if self.events_scheduled > 0 {
                100.0 * self.events_detected as f64 / self.events_scheduled as f64
            } else {
                0.0
            },
            far_clusters_per_hr_per_node: self.fp_clusters as f64 / self.node_hours,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub multiplier: f64,
    pub detection_rate_pct: f64,
    pub far_clusters_per_hr_per_node: f64,
}

/// 25 log-spaced multipliers over [1, 4], anchored exactly at 1.0.
pub fn default_multipliers() -> Vec<f64> {
    let n = 25;
    (0..n)
        .map(|i| 4f64.powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Sweep one replicate's traces for one detector.
pub fn roc_counts(
    traces: &[StrengthTrace],
    events: &[GroundTruthEvent],
    multipliers: &[f64],
    scoring: &ScoringConfig,
) -> Vec<RocCounts> {
    let period = scoring.frame_period_s;
    multipliers
        .iter()
        .map(|&tau| {
            let mut detected: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
            let mut fp_clusters = 0u64;
            for trace in traces {
                let node_events: Vec<&GroundTruthEvent> =
                    events.iter().filter(|e| e.node_id == trace.node_id).collect();
                let mut fp_times: Vec<f64> = Vec::new();
                for (m, &s) in trace.strengths.iter().enumerate() {
                    let m = m as u64;
                    if m < scoring.warmup_frames || s < tau {
                        continue;
                    }
                    let frame_start = m as f64 * period;
                    let frame_end = frame_start + period;
                    let mut is_tp = false;
                    for e in &node_events {
                        if e.onset_s <= frame_end && e.end_s() >= frame_start {
                            detected.insert((e.node_id, e.event_index));
                            is_tp = true;
                        }
                    }
                    if !is_tp {
                        fp_times.push(frame_end);
                    }
                }
                fp_clusters += cluster_fp(&fp_times, scoring.cluster_window_s);
            }
            RocCounts {
                multiplier: tau,
                events_detected: detected.len() as u64,
                events_scheduled: events.len() as u64,
                fp_clusters,
                node_hours: scoring.scored_hours() * scoring.n_nodes as f64,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scoring() -> ScoringConfig {
        ScoringConfig {
            frame_period_s: 1.28,
            warmup_frames: 2,
            run_duration_s: 128.0,
            n_nodes: 1,
            cluster_window_s: 5.0,
        }
    }

    #[test]
    fn grid_is_anchored_at_one_and_spans_four() {
        let m = default_multipliers();
        assert_eq!(m.len(), 25);
        assert_eq!(m[0], 1.0);
        assert!((m[24] - 4.0).abs() < 1e-12);
        assert!(m.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn higher_tau_never_increases_detections() {
        let events = vec![GroundTruthEvent {
            node_id: 0,
            event_index: 0,
            onset_s: 10.0,
            duration_s: 5.0,
            carrier_hz: 2.0,
            snr_db: 12.0,
        }];
        let mut strengths = vec![0.0; 100];
        strengths[9] = 1.5; // frame 9 covers [11.52, 12.8): inside event
        strengths[50] = 2.5;
        strengths[60] = 1.1;
        let traces = vec![StrengthTrace { node_id: 0, strengths }];
        let counts = roc_counts(&traces, &events, &[1.0, 2.0, 3.0], &scoring());
        assert_eq!(counts[0].events_detected, 1);
        assert_eq!(counts[0].fp_clusters, 2);
        assert_eq!(counts[1].events_detected, 0);
        assert_eq!(counts[1].fp_clusters, 1);
        assert_eq!(counts[2].fp_clusters, 0);
    }
}
