//! Trigger scoring: TP/FP classification, false-positive clustering and the
//! per-(detector, configuration, replicate) metrics report.

mod roc;

pub use roc::{default_multipliers, roc_counts, RocCounts, RocPoint, StrengthTrace};

use serde::{Deserialize, Serialize};

use crate::detectors::DetectorKind;
use crate::signal::GroundTruthEvent;

/// One emitted trigger with its delivery outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerRecord {
    pub node_id: u32,
    pub detector: DetectorKind,
    pub frame_index: u64,
    /// Decision time: the frame end, `(m + 1) * frame_period`.
    pub time_s: f64,
    pub strength: f64,
    pub delivered: bool,
    pub sink_arrival_s: Option<f64>,
}

/// Label triggers as true positives (their frame overlaps an event window
/// on the same node); everything else is a false positive.
pub fn classify_triggers(
    triggers: &[TriggerRecord],
    events: &[GroundTruthEvent],
    frame_period_s: f64,
) -> Vec<bool> {
    triggers
        .iter()
        .map(|t| {
            let frame_start = t.frame_index as f64 * frame_period_s;
            let frame_end = frame_start + frame_period_s;
            events
                .iter()
                .any(|e| e.node_id == t.node_id && e.onset_s <= frame_end && e.end_s() >= frame_start)
        })
        .collect()
}

/// Greedy left-to-right clustering of per-node, time-sorted FP trigger
/// times: a trigger joins the current cluster iff it lies within `window_s`
/// of the previous trigger in that cluster.
pub fn cluster_fp(sorted_times: &[f64], window_s: f64) -> u64 {
    let mut clusters = 0u64;
    let mut last: Option<f64> = None;
    for &t in sorted_times {
        match last {
            Some(prev) if t - prev <= window_s => {}
            _ => clusters += 1,
        }
        last = Some(t);
    }
    clusters
}

/// FP clusters summed over nodes.
pub fn cluster_fp_by_node(fp_times_by_node: &std::collections::BTreeMap<u32, Vec<f64>>, window_s: f64) -> u64 {
    fp_times_by_node.values().map(|v| cluster_fp(v, window_s)).sum()
}

/// Headline metrics for one (detector, configuration, replicate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub detector: DetectorKind,
    /// None when no events were scheduled.
    pub detection_rate_pct: Option<f64>,
    /// None when neither detections nor FP clusters exist.
    pub event_precision_pct: Option<f64>,
    pub fp_cluster_count: u64,
    pub far_clusters_per_hr_per_node: f64,
    pub per_node_load_bytes_per_hr: f64,
    /// Mean over delivered TP triggers; None when there are none.
    pub mean_latency_s: Option<f64>,
    pub events_scheduled: u64,
    pub events_detected: u64,
    /// Scored duration (run minus warmup) in hours.
    pub scored_hours: f64,
    pub n_nodes: u32,
    pub trigger_frames: u64,
    pub total_bytes: u64,
}

/// Scoring window and normalisation constants.
#[derive(Debug, Clone, Copy)]
pub struct ScoringConfig {
    pub frame_period_s: f64,
    /// Frames excluded from scoring at the start of the run.
    pub warmup_frames: u64,
    pub run_duration_s: f64,
    pub n_nodes: u32,
    pub cluster_window_s: f64,
}

impl ScoringConfig {
    pub fn scored_hours(&self) -> f64 {
        (self.run_duration_s - self.warmup_frames as f64 * self.frame_period_s) / 3600.0
    }
}

/// Score one detector's trigger stream against ground truth.
///
/// `total_bytes` is the mesh-wide transmitted byte count for this
/// detector's traffic (origin plus relays plus retries).
pub fn compute_report(
    detector: DetectorKind,
    triggers: &[TriggerRecord],
    events: &[GroundTruthEvent],
    total_bytes: u64,
    scoring: &ScoringConfig,
) -> MetricsReport {
    let scored: Vec<&TriggerRecord> = triggers
        .iter()
        .filter(|t| t.frame_index >= scoring.warmup_frames)
        .collect();
    let scored_slice: Vec<TriggerRecord> = scored.iter().map(|t| (*t).clone()).collect();
    let labels = classify_triggers(&scored_slice, events, scoring.frame_period_s);

    let mut detected: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
    let mut fp_by_node: std::collections::BTreeMap<u32, Vec<f64>> = std::collections::BTreeMap::new();
    let mut latency_sum = 0.0;
    let mut latency_n = 0u64;

    for (t, &is_tp) in scored_slice.iter().zip(&labels) {
        if is_tp {
            let frame_start = t.frame_index as f64 * scoring.frame_period_s;
            let frame_end = frame_start + scoring.frame_period_s;
            for e in events {
                if e.node_id == t.node_id && e.onset_s <= frame_end && e.end_s() >= frame_start {
                    detected.insert((e.node_id, e.event_index));
                }
            }
            if t.delivered {
                if let Some(arrival) = t.sink_arrival_s {
                    latency_sum += arrival - t.time_s;
                    latency_n += 1;
                }
            }
        } else {
            fp_by_node.entry(t.node_id).or_default().push(t.time_s);
        }
    }
    for v in fp_by_node.values_mut() {
        v.sort_by(f64::total_cmp);
    }

    let fp_clusters = cluster_fp_by_node(&fp_by_node, scoring.cluster_window_s);
    let events_scheduled = events.len() as u64;
    let events_detected = detected.len() as u64;
    let scored_hours = scoring.scored_hours();

    let detection_rate_pct = if events_scheduled > 0 {
        Some(100.0 * events_detected as f64 / events_scheduled as f64)
    } else {
        None
    };
    let event_precision_pct = if events_detected + fp_clusters > 0 {
        Some(100.0 * events_detected as f64 / (events_detected + fp_clusters) as f64)
    } else {
        None
    };

    MetricsReport {
        detector,
        detection_rate_pct,
        event_precision_pct,
        fp_cluster_count: fp_clusters,
        far_clusters_per_hr_per_node: fp_clusters as f64 / (scored_hours * scoring.n_nodes as f64),
        per_node_load_bytes_per_hr: total_bytes as f64 / (scored_hours * scoring.n_nodes as f64),
        mean_latency_s: (latency_n > 0).then(|| latency_sum / latency_n as f64),
        events_scheduled,
        events_detected,
        scored_hours,
        n_nodes: scoring.n_nodes,
        trigger_frames: scored_slice.len() as u64,
        total_bytes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn event(node: u32, idx: u32, onset: f64) -> GroundTruthEvent {
        GroundTruthEvent {
            node_id: node,
            event_index: idx,
            onset_s: onset,
            duration_s: 5.0,
            carrier_hz: 2.0,
            snr_db: 12.0,
        }
    }

    fn trig(node: u32, frame: u64) -> TriggerRecord {
        TriggerRecord {
            node_id: node,
            detector: DetectorKind::Tsnfa,
            frame_index: frame,
            time_s: (frame + 1) as f64 * 1.28,
            strength: 2.0,
            delivered: true,
            sink_arrival_s: Some((frame + 1) as f64 * 1.28 + 0.005),
        }
    }

    fn scoring() -> ScoringConfig {
        ScoringConfig {
            frame_period_s: 1.28,
            warmup_frames: 512,
            run_duration_s: 86_400.0,
            n_nodes: 10,
            cluster_window_s: 5.0,
        }
    }

    #[test]
    fn trigger_inside_event_window_is_tp() {
        let events = vec![event(3, 0, 1000.0)];
        // Frame 782 covers [1000.96, 1002.24) - inside the 5 s window.
        let t = vec![trig(3, 782)];
        assert_eq!(classify_triggers(&t, &events, 1.28), vec![true]);
    }

    #[test]
    fn trigger_on_other_node_is_fp() {
        let events = vec![event(3, 0, 1000.0)];
        let t = vec![trig(4, 782)];
        assert_eq!(classify_triggers(&t, &events, 1.28), vec![false]);
    }

    #[test]
    fn single_late_trigger_detects_event() {
        // Event spans frames m..m+3; a single trigger at m+3 detects it.
        let events = vec![event(0, 0, 1000.16)]; // starts inside frame 781
        let t = vec![trig(0, 784)]; // covers [1003.52, 1004.80): before 1005.16
        let report = compute_report(DetectorKind::Tsnfa, &t, &events, 0, &scoring());
        assert_eq!(report.events_detected, 1);
        assert_eq!(report.detection_rate_pct, Some(100.0));
    }

    #[test]
    fn clusters_chain_within_five_seconds() {
        assert_eq!(cluster_fp(&[0.0, 2.0, 4.0], 5.0), 1);
        assert_eq!(cluster_fp(&[0.0, 10.0], 5.0), 2);
        assert_eq!(cluster_fp(&[], 5.0), 0);
        // Chaining: each gap <= 5 s even though the span exceeds 5 s.
        assert_eq!(cluster_fp(&[0.0, 4.0, 8.0, 12.0], 5.0), 1);
    }

    #[test]
    fn perfect_run_has_full_scores() {
        let events = vec![event(0, 0, 1000.16), event(1, 0, 2000.0)];
        let t = vec![trig(0, 782), trig(1, 1563)];
        let report = compute_report(DetectorKind::Tsnfa, &t, &events, 640, &scoring());
        assert_eq!(report.detection_rate_pct, Some(100.0));
        assert_eq!(report.event_precision_pct, Some(100.0));
        assert_eq!(report.fp_cluster_count, 0);
        assert!(report.mean_latency_s.unwrap() > 0.0);
    }

    #[test]
    fn precision_formula_matches_arithmetic() {
        // 240 detected events with 12,519 FP clusters: precision ~ 1.9%.
        let p: f64 = 100.0 * 240.0 / (240.0 + 12_519.0);
        assert!((p - 1.881).abs() < 0.01);
    }

    #[test]
    fn zero_scheduled_events_reports_absent_rate() {
        let report = compute_report(DetectorKind::Cusum, &[], &[], 0, &scoring());
        assert_eq!(report.detection_rate_pct, None);
        assert_eq!(report.event_precision_pct, None);
    }

    #[test]
    fn warmup_triggers_are_excluded() {
        let events = vec![event(0, 0, 1000.16)];
        let t = vec![trig(0, 100), trig(0, 782)];
        let report = compute_report(DetectorKind::Tsnfa, &t, &events, 0, &scoring());
        assert_eq!(report.trigger_frames, 1);
        assert_eq!(report.fp_cluster_count, 0);
    }

    #[test]
    fn far_is_exactly_clusters_over_node_hours() {
        let events = vec![];
        let mut triggers = Vec::new();
        for i in 0..7 {
            triggers.push(trig(2, 1000 + i * 100)); // well separated: 7 clusters
        }
        let report = compute_report(DetectorKind::Lipski, &triggers, &events, 0, &scoring());
        assert_eq!(report.fp_cluster_count, 7);
        let expected = 7.0 / (report.scored_hours * 10.0);
        assert!((report.far_clusters_per_hr_per_node - expected).abs() < 1e-12);
    }
}
