//! Experiment runner: one signal realisation per (configuration, replicate),
//! every detector fed the identical frame stream, triggers routed through
//! the mesh, metrics per detector.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detectors::{
    build_detector, Detector, DetectorKind, DetectorOutput, FrameContext, LipskiDetector,
};
use crate::mesh::{build_topology, transmit, InFlightTracker, Topology, TopologyError};
use crate::metrics::{
    compute_report, roc_counts, MetricsReport, RocCounts, RocPoint, ScoringConfig, StrengthTrace,
    TriggerRecord,
};
use crate::signal::{GroundTruthEvent, NodeSignalModel};
use crate::streams::{domain, stream_rng};

use super::config::{ConfigEntry, RunConfig};

/// Scoring excludes the first 512 frames (~655 s), the longest detector
/// calibration, uniformly for all detectors.
pub const SCORING_WARMUP_FRAMES: u64 = 512;

/// Cluster window for FP collapsing, seconds.
pub const CLUSTER_WINDOW_S: f64 = 5.0;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("run cancelled")]
    Cancelled,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Optional progress/cancel plumbing for long runs.
#[derive(Default, Clone, Copy)]
pub struct RunHooks<'a> {
    pub progress: Option<&'a (dyn Fn(u64, u64) + Sync)>,
    pub cancel: Option<&'a AtomicBool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: u32,
}

fn mean_std(values: impl Iterator<Item = Option<f64>>) -> Option<MeanStd> {
    let vals: Vec<f64> = values.flatten().collect();
    if vals.is_empty() {
        return None;
    }
    let n = vals.len();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let std = if n >= 2 {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    Some(MeanStd {
        mean,
        std,
        n: n as u32,
    })
}

/// Per-detector aggregate over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub detector: DetectorKind,
    pub detection_rate_pct: Option<MeanStd>,
    pub event_precision_pct: Option<MeanStd>,
    pub fp_clusters: MeanStd,
    pub far_clusters_per_hr_per_node: MeanStd,
    pub per_node_load_bytes_per_hr: MeanStd,
    pub mean_latency_s: Option<MeanStd>,
    pub events_scheduled: MeanStd,
    pub events_detected: MeanStd,
}

fn aggregate_reports(detector: DetectorKind, reports: &[&MetricsReport]) -> AggregateReport {
    AggregateReport {
        detector,
        detection_rate_pct: mean_std(reports.iter().map(|r| r.detection_rate_pct)),
        event_precision_pct: mean_std(reports.iter().map(|r| r.event_precision_pct)),
        fp_clusters: mean_std(reports.iter().map(|r| Some(r.fp_cluster_count as f64))).unwrap(),
        far_clusters_per_hr_per_node: mean_std(
            reports.iter().map(|r| Some(r.far_clusters_per_hr_per_node)),
        )
        .unwrap(),
        per_node_load_bytes_per_hr: mean_std(
            reports.iter().map(|r| Some(r.per_node_load_bytes_per_hr)),
        )
        .unwrap(),
        mean_latency_s: mean_std(reports.iter().map(|r| r.mean_latency_s)),
        events_scheduled: mean_std(reports.iter().map(|r| Some(r.events_scheduled as f64))).unwrap(),
        events_detected: mean_std(reports.iter().map(|r| Some(r.events_detected as f64))).unwrap(),
    }
}

/// Aggregated row of the Lipski threshold sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweepAggregate {
    pub k: f64,
    pub detection_rate_pct: Option<MeanStd>,
    pub event_precision_pct: Option<MeanStd>,
    pub fp_clusters: MeanStd,
    pub far_clusters_per_hr_per_node: MeanStd,
    pub per_node_load_bytes_per_hr: MeanStd,
}

/// One delivery-log row (emitted only in trace mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeliveryRecord {
    pub time_s: f64,
    pub origin: u32,
    pub detector: DetectorKind,
    pub delivered: bool,
    pub latency_s: f64,
    pub bytes: u64,
}

/// Everything produced by one (configuration, replicate) pass.
pub struct ReplicateOutcome {
    pub entry: ConfigEntry,
    pub replicate: u32,
    pub events: Vec<GroundTruthEvent>,
    pub reports: Vec<(DetectorKind, MetricsReport)>,
    pub ksweep_reports: Vec<(f64, MetricsReport)>,
    pub roc: Vec<(DetectorKind, Vec<RocCounts>)>,
    pub stream_hash: u64,
    pub topology: Topology,
    pub mean_hops: f64,
    /// Dense strength traces per canonical detector, kept only in trace mode.
    pub traces: Option<Vec<(DetectorKind, Vec<StrengthTrace>)>>,
    /// Delivery log, kept only in trace mode.
    pub deliveries: Option<Vec<DeliveryRecord>>,
}

/// Results for one configuration entry across replicates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryResults {
    pub entry: ConfigEntry,
    /// `[replicate][detector]` metric reports.
    pub replicate_reports: Vec<Vec<(DetectorKind, MetricsReport)>>,
    pub aggregates: Vec<AggregateReport>,
    pub ksweep: Vec<KSweepAggregate>,
    pub roc: Vec<(DetectorKind, Vec<RocPoint>)>,
    pub stream_hashes: Vec<u64>,
    pub mean_hops: f64,
    pub mean_latency_s: Option<f64>,
}

/// Full run results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub entries: Vec<EntryResults>,
    pub config_echo: String,
}

struct SlotSpec {
    kind: DetectorKind,
    /// Lipski sweep threshold when this slot is a sweep variant.
    sweep_k: Option<f64>,
    keep_strengths: bool,
}

fn slot_specs(config: &RunConfig) -> Vec<SlotSpec> {
    let keep = config.roc_enabled || config.trace_enabled;
    let mut slots: Vec<SlotSpec> = config
        .detectors
        .iter()
        .map(|&kind| SlotSpec {
            kind,
            sweep_k: None,
            keep_strengths: keep,
        })
        .collect();
    if config.detectors.contains(&DetectorKind::Lipski) {
        for &k in &config.lipski_k_sweep {
            if (k - config.detector_params.lipski.k).abs() > 1e-12 {
                slots.push(SlotSpec {
                    kind: DetectorKind::Lipski,
                    sweep_k: Some(k),
                    keep_strengths: false,
                });
            }
        }
    }
    slots
}

fn build_slot(config: &RunConfig, spec: &SlotSpec) -> Box<dyn Detector> {
    match spec.sweep_k {
        None => build_detector(spec.kind, &config.detector_params),
        Some(k) => {
            let mut params = config.detector_params.lipski.clone();
            params.k = k;
            Box::new(LipskiDetector::new(params))
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(hash: &mut u64, bytes: &[u8]) {
    for &b in bytes {
        *hash ^= u64::from(b);
        *hash = hash.wrapping_mul(FNV_PRIME);
    }
}

struct NodeRun {
    node_id: u32,
    events: Vec<GroundTruthEvent>,
    triggers_per_slot: Vec<Vec<(u64, f64)>>,
    strengths_per_slot: Vec<Vec<f64>>,
    hash: u64,
}

fn run_node(
    config: &RunConfig,
    entry_index: usize,
    entry: ConfigEntry,
    replicate: u32,
    node_id: u32,
    frames_total: u64,
    specs: &[SlotSpec],
) -> NodeRun {
    let warmup_end_s = SCORING_WARMUP_FRAMES as f64 * config.signal.frame_period_s();
    let model = NodeSignalModel::new(
        config.master_seed,
        entry_index,
        replicate,
        node_id,
        entry.snr_db,
        config.duration_hr * 3600.0,
        warmup_end_s,
        &config.signal,
    );
    let mut detectors: Vec<Box<dyn Detector>> = specs.iter().map(|s| build_slot(config, s)).collect();
    let mut triggers_per_slot: Vec<Vec<(u64, f64)>> = vec![Vec::new(); specs.len()];
    let mut strengths_per_slot: Vec<Vec<f64>> = specs
        .iter()
        .map(|s| {
            if s.keep_strengths {
                Vec::with_capacity(frames_total as usize)
            } else {
                Vec::new()
            }
        })
        .collect();
    let mut hash = FNV_OFFSET;

    for m in 0..frames_total {
        let frame = model.frame(m);
        for s in &frame.samples {
            fnv1a(&mut hash, &s.to_bits().to_le_bytes());
        }
        let ctx = FrameContext::default();
        for (i, det) in detectors.iter_mut().enumerate() {
            let out: DetectorOutput = det.process_ctx(&frame, &ctx);
            if specs[i].keep_strengths {
                strengths_per_slot[i].push(out.strength);
            }
            if out.trigger {
                triggers_per_slot[i].push((m, out.strength));
            }
        }
    }

    NodeRun {
        node_id,
        events: model.events().to_vec(),
        triggers_per_slot,
        strengths_per_slot,
        hash,
    }
}

/// Route one detector's triggers through the mesh, producing scored records
/// plus the mesh-wide byte total.
fn deliver(
    triggers: &mut [TriggerRecord],
    topology: &Topology,
    config: &RunConfig,
    entry_index: usize,
    replicate: u32,
    slot_index: usize,
    log: Option<&mut Vec<DeliveryRecord>>,
    detector: DetectorKind,
) -> u64 {
    let mut rng = stream_rng(
        config.master_seed,
        &[
            domain::MAC,
            entry_index as u64,
            replicate as u64,
            slot_index as u64,
        ],
    );
    let mut tracker = InFlightTracker::new();
    let mut total_bytes = 0u64;
    let mut log = log;
    triggers.sort_by(|a, b| a.time_s.total_cmp(&b.time_s).then(a.node_id.cmp(&b.node_id)));
    for t in triggers.iter_mut() {
        let origin = t.node_id as usize;
        let p = tracker.collision_probability(origin, t.time_s, topology, &config.mac);
        let result = transmit(origin, topology, &config.mac, p, &mut rng);
        tracker.record(origin, t.time_s, &result);
        let msg_bytes: u64 = result.bytes_tx.iter().map(|&(_, b)| b).sum();
        total_bytes += msg_bytes;
        t.delivered = result.delivered;
        t.sink_arrival_s = result.delivered.then(|| t.time_s + result.latency_s);
        if let Some(log) = log.as_deref_mut() {
            log.push(DeliveryRecord {
                time_s: t.time_s,
                origin: t.node_id,
                detector,
                delivered: result.delivered,
                latency_s: result.latency_s,
                bytes: msg_bytes,
            });
        }
    }
    total_bytes
}

/// Run one replicate of one configuration entry.
pub fn run_replicate(
    config: &RunConfig,
    entry_index: usize,
    replicate: u32,
    hooks: RunHooks<'_>,
    done_units: &AtomicU64,
    total_units: u64,
) -> Result<ReplicateOutcome, RunError> {
    let entry = config.configurations[entry_index];
    let frames_total = config.frames_total();
    let period = config.signal.frame_period_s();

    let mut topo_rng = stream_rng(
        config.master_seed,
        &[domain::TOPOLOGY, entry_index as u64, replicate as u64],
    );
    let topology = build_topology(entry.n_nodes as usize, entry.side_m(), config.radio_range_m, &mut topo_rng)?;

    let specs = slot_specs(config);
    let node_runs: Vec<NodeRun> = (0..entry.n_nodes)
        .into_par_iter()
        .map(|node_id| {
            if let Some(cancel) = hooks.cancel {
                if cancel.load(Ordering::Relaxed) {
                    return Err(RunError::Cancelled);
                }
            }
            let run = run_node(config, entry_index, entry, replicate, node_id, frames_total, &specs);
            let done = done_units.fetch_add(1, Ordering::Relaxed) + 1;
            if let Some(progress) = hooks.progress {
                progress(done, total_units);
            }
            Ok(run)
        })
        .collect::<Result<_, _>>()?;

    let mut events: Vec<GroundTruthEvent> = Vec::new();
    let mut stream_hash = 0u64;
    for run in &node_runs {
        events.extend(run.events.iter().cloned());
        stream_hash ^= run.hash;
    }

    let scoring = ScoringConfig {
        frame_period_s: period,
        warmup_frames: SCORING_WARMUP_FRAMES,
        run_duration_s: config.duration_hr * 3600.0,
        n_nodes: entry.n_nodes,
        cluster_window_s: CLUSTER_WINDOW_S,
    };

    let mut reports = Vec::new();
    let mut ksweep_reports = Vec::new();
    let mut roc = Vec::new();
    let mut deliveries: Option<Vec<DeliveryRecord>> = config.trace_enabled.then(Vec::new);

    for (i, spec) in specs.iter().enumerate() {
        // Only scored triggers generate traffic.
        let mut records: Vec<TriggerRecord> = node_runs
            .iter()
            .flat_map(|run| {
                run.triggers_per_slot[i]
                    .iter()
                    .filter(|&&(m, _)| m >= SCORING_WARMUP_FRAMES)
                    .map(|&(m, strength)| TriggerRecord {
                        node_id: run.node_id,
                        detector: spec.kind,
                        frame_index: m,
                        time_s: (m + 1) as f64 * period,
                        strength,
                        delivered: false,
                        sink_arrival_s: None,
                    })
            })
            .collect();
        let total_bytes = deliver(
            &mut records,
            &topology,
            config,
            entry_index,
            replicate,
            i,
            deliveries.as_mut(),
            spec.kind,
        );
        let report = compute_report(spec.kind, &records, &events, total_bytes, &scoring);
        match spec.sweep_k {
            None => {
                if config.roc_enabled {
                    let traces: Vec<StrengthTrace> = node_runs
                        .iter()
                        .map(|run| StrengthTrace {
                            node_id: run.node_id,
                            strengths: run.strengths_per_slot[i].clone(),
                        })
                        .collect();
                    roc.push((spec.kind, roc_counts(&traces, &events, &config.roc_multipliers, &scoring)));
                }
                if spec.kind == DetectorKind::Lipski
                    && config
                        .lipski_k_sweep
                        .iter()
                        .any(|&k| (k - config.detector_params.lipski.k).abs() <= 1e-12)
                {
                    ksweep_reports.push((config.detector_params.lipski.k, report.clone()));
                }
                reports.push((spec.kind, report));
            }
            Some(k) => ksweep_reports.push((k, report)),
        }
    }
    ksweep_reports.sort_by(|a, b| a.0.total_cmp(&b.0));

    let traces = config.trace_enabled.then(|| {
        specs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.sweep_k.is_none())
            .map(|(i, s)| {
                (
                    s.kind,
                    node_runs
                        .iter()
                        .map(|run| StrengthTrace {
                            node_id: run.node_id,
                            strengths: run.strengths_per_slot[i].clone(),
                        })
                        .collect::<Vec<_>>(),
                )
            })
            .collect::<Vec<_>>()
    });

    let mean_hops = topology.mean_sensor_hops();
    Ok(ReplicateOutcome {
        entry,
        replicate,
        events,
        reports,
        ksweep_reports,
        roc,
        stream_hash,
        topology,
        mean_hops,
        traces,
        deliveries,
    })
}

/// Execute every (configuration, replicate) cell, aggregate, and (when an
/// output directory is configured) emit the CSV artifacts.
pub fn run_all(config: &RunConfig, hooks: RunHooks<'_>) -> Result<RunSummary, RunError> {
    config
        .signal
        .validate()
        .map_err(RunError::InvalidConfig)?;
    if config.configurations.is_empty() {
        return Err(RunError::InvalidConfig("no configurations".into()));
    }
    if config.replicates == 0 {
        return Err(RunError::InvalidConfig("replicates must be >= 1".into()));
    }

    let out_dir = match &config.out_dir {
        Some(dir) => {
            let path = std::path::PathBuf::from(dir);
            std::fs::create_dir_all(&path)?;
            Some(path)
        }
        None => None,
    };

    let total_units: u64 = config
        .configurations
        .iter()
        .map(|e| e.n_nodes as u64 * config.replicates as u64)
        .sum();
    let done_units = AtomicU64::new(0);

    let mut entries = Vec::new();
    for entry_index in 0..config.configurations.len() {
        let entry = config.configurations[entry_index];
        let mut replicate_reports = Vec::new();
        let mut ksweep_all: Vec<Vec<(f64, MetricsReport)>> = Vec::new();
        let mut roc_merged: Vec<(DetectorKind, Vec<RocCounts>)> = Vec::new();
        let mut stream_hashes = Vec::new();
        let mut hops_sum = 0.0;

        for replicate in 0..config.replicates {
            if let Some(cancel) = hooks.cancel {
                if cancel.load(Ordering::Relaxed) {
                    return Err(RunError::Cancelled);
                }
            }
            let outcome = run_replicate(config, entry_index, replicate, hooks, &done_units, total_units)?;
            if let Some(dir) = &out_dir {
                super::outputs::write_replicate_artifacts(dir, config, &outcome)?;
            }
            for (kind, counts) in &outcome.roc {
                match roc_merged.iter_mut().find(|(k, _)| k == kind) {
                    Some((_, acc)) => {
                        for (a, c) in acc.iter_mut().zip(counts) {
                            a.merge(c);
                        }
                    }
                    None => roc_merged.push((*kind, counts.clone())),
                }
            }
            hops_sum += outcome.mean_hops;
            stream_hashes.push(outcome.stream_hash);
            ksweep_all.push(outcome.ksweep_reports);
            replicate_reports.push(outcome.reports);
        }

        let aggregates: Vec<AggregateReport> = config
            .detectors
            .iter()
            .map(|&kind| {
                let reports: Vec<&MetricsReport> = replicate_reports
                    .iter()
                    .flat_map(|reps| {
                        reps.iter()
                            .filter(|(k, _)| *k == kind)
                            .map(|(_, r)| r)
                    })
                    .collect();
                aggregate_reports(kind, &reports)
            })
            .collect();

        let ks: Vec<f64> = {
            let mut ks: Vec<f64> = ksweep_all
                .iter()
                .flat_map(|v| v.iter().map(|(k, _)| *k))
                .collect();
            ks.sort_by(f64::total_cmp);
            ks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
            ks
        };
        let ksweep: Vec<KSweepAggregate> = ks
            .iter()
            .map(|&k| {
                let reports: Vec<&MetricsReport> = ksweep_all
                    .iter()
                    .flat_map(|reps| {
                        reps.iter()
                            .filter(|(kk, _)| (*kk - k).abs() <= 1e-12)
                            .map(|(_, r)| r)
                    })
                    .collect();
                let agg = aggregate_reports(DetectorKind::Lipski, &reports);
                KSweepAggregate {
                    k,
                    detection_rate_pct: agg.detection_rate_pct,
                    event_precision_pct: agg.event_precision_pct,
                    fp_clusters: agg.fp_clusters,
                    far_clusters_per_hr_per_node: agg.far_clusters_per_hr_per_node,
                    per_node_load_bytes_per_hr: agg.per_node_load_bytes_per_hr,
                }
            })
            .collect();

        let mean_latency_s = aggregates
            .iter()
            .find(|a| a.detector == DetectorKind::Tsnfa)
            .and_then(|a| a.mean_latency_s.map(|m| m.mean));

        entries.push(EntryResults {
            entry,
            replicate_reports,
            aggregates,
            ksweep,
            roc: roc_merged
                .into_iter()
                .map(|(k, counts)| (k, counts.into_iter().map(|c| c.to_point()).collect()))
                .collect(),
            stream_hashes,
            mean_hops: hops_sum / config.replicates as f64,
            mean_latency_s,
        });
    }

    let summary = RunSummary {
        entries,
        config_echo: config.echo_text(),
    };
    if let Some(dir) = &out_dir {
        super::outputs::write_summary(dir, config, &summary)?;
    }
    Ok(summary)
}
