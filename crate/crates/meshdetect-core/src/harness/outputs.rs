//! CSV artifact emission.

use std::fmt::Write as _;
use std::path::Path;

use crate::detectors::DetectorKind;

use super::config::RunConfig;
use super::runner::{EntryResults, ReplicateOutcome, RunSummary};

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}")).unwrap_or_default()
}

fn write_file(dir: &Path, name: &str, content: &str) -> std::io::Result<()> {
    std::fs::write(dir.join(name), content)
}

/// Artifacts tied to a single replicate: topology dump plus, in trace mode,
/// the per-frame strength traces and the delivery log.
pub fn write_replicate_artifacts(
    dir: &Path,
    config: &RunConfig,
    outcome: &ReplicateOutcome,
) -> std::io::Result<()> {
    let tag = format!("{}_r{}", outcome.entry.label(), outcome.replicate);

    let mut topo = String::from("node_id,x,y,hops\n");
    let t = &outcome.topology;
    for node in 0..t.n_sensors() {
        let (x, y) = t.positions[node];
        let _ = writeln!(topo, "{node},{x:.2},{y:.2},{}", t.hops[node]);
    }
    let (sx, sy) = t.positions[t.sink];
    let _ = writeln!(topo, "sink,{sx:.2},{sy:.2},0");
    write_file(dir, &format!("topology_{tag}.csv"), &topo)?;

    if let Some(traces) = &outcome.traces {
        let mut csv = String::from("node_id,frame_index,detector,strength,trigger\n");
        for (kind, node_traces) in traces {
            for trace in node_traces {
                for (m, &s) in trace.strengths.iter().enumerate() {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{:.6},{}",
                        trace.node_id,
                        m,
                        kind.label(),
                        s,
                        s >= 1.0
                    );
                }
            }
        }
        write_file(dir, &format!("trace_{tag}.csv"), &csv)?;
    }

    if let Some(deliveries) = &outcome.deliveries {
        let mut csv = String::from("time_s,origin,detector,delivered,latency_s,bytes\n");
        for d in deliveries {
            let _ = writeln!(
                csv,
                "{:.2},{},{},{},{:.6},{}",
                d.time_s,
                d.origin,
                d.detector.label(),
                d.delivered,
                d.latency_s,
                d.bytes
            );
        }
        write_file(dir, &format!("deliveries_{tag}.csv"), &csv)?;
    }
    let _ = config;
    Ok(())
}

fn reports_csv(summary: &RunSummary) -> String {
    let mut csv = String::from(
        "config,n_nodes,snr_db,replicate,detector,detection_rate_pct,event_precision_pct,\
         fp_clusters,far_clusters_per_hr_per_node,per_node_load_b_per_hr,mean_latency_s,\
         events_scheduled,events_detected,trigger_frames,total_bytes\n",
    );
    for entry in &summary.entries {
        for (rep, reports) in entry.replicate_reports.iter().enumerate() {
            for (kind, r) in reports {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{:.4},{:.1},{},{},{},{},{}",
                    entry.entry.label(),
                    entry.entry.n_nodes,
                    entry.entry.snr_db,
                    rep,
                    kind.label(),
                    opt(r.detection_rate_pct, 2),
                    opt(r.event_precision_pct, 2),
                    r.fp_cluster_count,
                    r.far_clusters_per_hr_per_node,
                    r.per_node_load_bytes_per_hr,
                    opt(r.mean_latency_s, 6),
                    r.events_scheduled,
                    r.events_detected,
                    r.trigger_frames,
                    r.total_bytes,
                );
            }
        }
    }
    csv
}

fn metrics_summary_csv(summary: &RunSummary) -> String {
    let mut csv = String::from(
        "config,n_nodes,snr_db,detector,detection_rate_pct_mean,detection_rate_pct_std,\
         event_precision_pct_mean,event_precision_pct_std,fp_clusters_mean,fp_clusters_std,\
         far_mean,far_std,per_node_load_b_per_hr_mean,per_node_load_b_per_hr_std,\
         mean_latency_s_mean,mean_latency_s_std\n",
    );
    for entry in &summary.entries {
        for a in &entry.aggregates {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                entry.entry.label(),
                entry.entry.n_nodes,
                entry.entry.snr_db,
                a.detector.label(),
                opt(a.detection_rate_pct.map(|m| m.mean), 2),
                opt(a.detection_rate_pct.map(|m| m.std), 3),
                opt(a.event_precision_pct.map(|m| m.mean), 2),
                opt(a.event_precision_pct.map(|m| m.std), 3),
                format!("{:.1}", a.fp_clusters.mean),
                format!("{:.2}", a.fp_clusters.std),
                format!("{:.4}", a.far_clusters_per_hr_per_node.mean),
                format!("{:.4}", a.far_clusters_per_hr_per_node.std),
                format!("{:.1}", a.per_node_load_bytes_per_hr.mean),
                format!("{:.2}", a.per_node_load_bytes_per_hr.std),
                opt(a.mean_latency_s.map(|m| m.mean), 6),
                opt(a.mean_latency_s.map(|m| m.std), 6),
            );
        }
    }
    csv
}

fn bandwidth_csv(summary: &RunSummary) -> String {
    let mut csv =
        String::from("config,n_nodes,snr_db,detector,per_node_b_per_hr,total_mesh_mb_per_hr,ratio_vs_tsnfa\n");
    for entry in &summary.entries {
        let tsnfa_load = entry
            .aggregates
            .iter()
            .find(|a| a.detector == DetectorKind::Tsnfa)
            .map(|a| a.per_node_load_bytes_per_hr.mean);
        for a in &entry.aggregates {
            let load = a.per_node_load_bytes_per_hr.mean;
            let total_mb = load * entry.entry.n_nodes as f64 / 1e6;
            let ratio = tsnfa_load
                .filter(|&t| t > 0.0)
                .map(|t| format!("{:.2}", load / t))
                .unwrap_or_default();
            let _ = writeln!(
                csv,
                "{},{},{},{},{:.1},{:.4},{}",
                entry.entry.label(),
                entry.entry.n_nodes,
                entry.entry.snr_db,
                a.detector.label(),
                load,
                total_mb,
                ratio
            );
        }
    }
    csv
}

fn snr_robustness_csv(summary: &RunSummary) -> String {
    let mut csv = String::from("n_nodes,detector,dr_high_snr_pct,dr_low_snr_pct,drop_pp\n");
    let mut sizes: Vec<u32> = summary.entries.iter().map(|e| e.entry.n_nodes).collect();
    sizes.sort_unstable();
    sizes.dedup();
    for n in sizes {
        let mut of_size: Vec<&EntryResults> = summary
            .entries
            .iter()
            .filter(|e| e.entry.n_nodes == n)
            .collect();
        if of_size.len() < 2 {
            continue;
        }
        of_size.sort_by(|a, b| b.entry.snr_db.total_cmp(&a.entry.snr_db));
        let (hi, lo) = (of_size[0], of_size[of_size.len() - 1]);
        for a in &hi.aggregates {
            let b = lo.aggregates.iter().find(|b| b.detector == a.detector);
            let (Some(dh), Some(dl)) = (
                a.detection_rate_pct.map(|m| m.mean),
                b.and_then(|b| b.detection_rate_pct.map(|m| m.mean)),
            ) else {
                continue;
            };
            let _ = writeln!(
                csv,
                "{},{},{:.2},{:.2},{:.2}",
                n,
                a.detector.label(),
                dh,
                dl,
                dh - dl
            );
        }
    }
    csv
}

fn scaling_csv(summary: &RunSummary) -> String {
    let mut csv = String::from("snr_db,metric,type,value_10n,value_50n,ratio\n");
    let mut snrs: Vec<f64> = summary.entries.iter().map(|e| e.entry.snr_db).collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    for snr in snrs {
        let small = summary
            .entries
            .iter()
            .find(|e| e.entry.n_nodes == 10 && (e.entry.snr_db - snr).abs() < 1e-9);
        let large = summary
            .entries
            .iter()
            .find(|e| e.entry.n_nodes == 50 && (e.entry.snr_db - snr).abs() < 1e-9);
        let (Some(small), Some(large)) = (small, large) else {
            continue;
        };
        let pick = |e: &EntryResults| {
            e.aggregates
                .iter()
                .find(|a| a.detector == DetectorKind::Tsnfa)
                .cloned()
        };
        let (Some(a10), Some(a50)) = (pick(small), pick(large)) else {
            continue;
        };
        let mut row = |metric: &str, kind: &str, v10: Option<f64>, v50: Option<f64>, prec: usize| {
            let ratio = match (v10, v50) {
                (Some(a), Some(b)) if a != 0.0 => format!("{:.3}", b / a),
                _ => "n/a".to_string(),
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                snr,
                metric,
                kind,
                opt(v10, prec),
                opt(v50, prec),
                ratio
            );
        };
        row(
            "detection_rate_pct",
            "quality",
            a10.detection_rate_pct.map(|m| m.mean),
            a50.detection_rate_pct.map(|m| m.mean),
            2,
        );
        row(
            "event_precision_pct",
            "quality",
            a10.event_precision_pct.map(|m| m.mean),
            a50.event_precision_pct.map(|m| m.mean),
            2,
        );
        row(
            "far_clusters_per_hr_per_node",
            "quality",
            Some(a10.far_clusters_per_hr_per_node.mean),
            Some(a50.far_clusters_per_hr_per_node.mean),
            4,
        );
        row(
            "mean_latency_ms",
            "cost_per_trigger",
            a10.mean_latency_s.map(|m| m.mean * 1e3),
            a50.mean_latency_s.map(|m| m.mean * 1e3),
            3,
        );
        row(
            "fp_clusters",
            "cost_network",
            Some(a10.fp_clusters.mean),
            Some(a50.fp_clusters.mean),
            1,
        );
        row(
            "per_node_load_b_per_hr",
            "cost_per_node",
            Some(a10.per_node_load_bytes_per_hr.mean),
            Some(a50.per_node_load_bytes_per_hr.mean),
            1,
        );
    }
    csv
}

fn ksweep_csv(summary: &RunSummary) -> String {
    let mut csv = String::from(
        "config,n_nodes,snr_db,k,detection_rate_pct,event_precision_pct,far_clusters_per_hr_per_node,\
         fp_clusters,per_node_load_b_per_hr\n",
    );
    for entry in &summary.entries {
        for row in &entry.ksweep {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{:.4},{:.1},{:.1}",
                entry.entry.label(),
                entry.entry.n_nodes,
                entry.entry.snr_db,
                row.k,
                opt(row.detection_rate_pct.map(|m| m.mean), 2),
                opt(row.event_precision_pct.map(|m| m.mean), 2),
                row.far_clusters_per_hr_per_node.mean,
                row.fp_clusters.mean,
                row.per_node_load_bytes_per_hr.mean,
            );
        }
    }
    csv
}

fn roc_csv(summary: &RunSummary) -> String {
    let mut csv = String::from("config,n_nodes,snr_db,detector,multiplier,dr_pct,far_per_hr_node\n");
    for entry in &summary.entries {
        for (kind, points) in &entry.roc {
            for p in points {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{:.6},{:.4},{:.6}",
                    entry.entry.label(),
                    entry.entry.n_nodes,
                    entry.entry.snr_db,
                    kind.label(),
                    p.multiplier,
                    p.detection_rate_pct,
                    p.far_clusters_per_hr_per_node
                );
            }
        }
    }
    csv
}

/// Emit the aggregate CSV set plus the config echo.
pub fn write_summary(dir: &Path, config: &RunConfig, summary: &RunSummary) -> std::io::Result<()> {
    write_file(dir, "reports.csv", &reports_csv(summary))?;
    write_file(dir, "metrics_summary.csv", &metrics_summary_csv(summary))?;
    write_file(dir, "bandwidth_summary.csv", &bandwidth_csv(summary))?;
    write_file(dir, "snr_robustness.csv", &snr_robustness_csv(summary))?;
    let scaling = scaling_csv(summary);
    if scaling.lines().count() > 1 {
        write_file(dir, "scaling_summary.csv", &scaling)?;
    }
    if summary.entries.iter().any(|e| !e.ksweep.is_empty()) {
        write_file(dir, "lipski_k_sweep.csv", &ksweep_csv(summary))?;
    }
    if summary.entries.iter().any(|e| !e.roc.is_empty()) {
        write_file(dir, "roc_points.csv", &roc_csv(summary))?;
    }

    let mut echo = summary.config_echo.clone();
    for entry in &summary.entries {
        let _ = writeln!(
            echo,
            "# stream_hashes {} = {}",
            entry.entry.label(),
            entry
                .stream_hashes
                .iter()
                .map(|h| format!("{h:016x}"))
                .collect::<Vec<_>>()
                .join(",")
        );
    }
    let _ = config;
    write_file(dir, "run_config_echo.txt", &echo)
}
