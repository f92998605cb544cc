//! Quick measurement harness for parameter tuning: one replicate per
//! configuration entry, metrics printed per detector.
//!
//! Usage: probe [duration_hr] [replicates] [seed] [key=value ...]

use std::sync::atomic::AtomicU64;

use meshdetect_core::harness::{run_replicate, RunConfig, RunHooks};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config = RunConfig::default();
    config.duration_hr = args.first().and_then(|s| s.parse().ok()).unwrap_or(24.0);
    let replicates: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    config.replicates = replicates;
    config.master_seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(7);
    for kv in args.iter().skip(3) {
        let (k, v) = kv.split_once('=').expect("key=value");
        config.apply_override(k, v).expect("override");
    }

    let done = AtomicU64::new(0);
    for entry_index in 0..config.configurations.len() {
        let entry = config.configurations[entry_index];
        println!("== {} ({} h, seed {})", entry.label(), config.duration_hr, config.master_seed);
        for rep in 0..replicates {
            let t0 = std::time::Instant::now();
            let outcome =
                run_replicate(&config, entry_index, rep, RunHooks::default(), &done, 1).unwrap();
            println!(
                "  rep {rep}: events={} hops={:.2} ({:.1}s)",
                outcome.events.len(),
                outcome.mean_hops,
                t0.elapsed().as_secs_f64()
            );
            for (kind, r) in &outcome.reports {
                println!(
                    "    {:6} dr={:>7} prec={:>7} fp_clusters={:>6} far={:>8.3} load_bph={:>10.1} trig={:>7} lat_ms={}",
                    kind.label(),
                    r.detection_rate_pct.map(|v| format!("{v:.2}")).unwrap_or_default(),
                    r.event_precision_pct.map(|v| format!("{v:.2}")).unwrap_or_default(),
                    r.fp_cluster_count,
                    r.far_clusters_per_hr_per_node,
                    r.per_node_load_bytes_per_hr,
                    r.trigger_frames,
                    r.mean_latency_s.map(|v| format!("{:.2}", v * 1e3)).unwrap_or_default(),
                );
            }
            for (k, r) in &outcome.ksweep_reports {
                println!(
                    "    lipski k={k}: dr={:>7} prec={:>7} fp={:>6} far={:>8.3} load={:>10.1}",
                    r.detection_rate_pct.map(|v| format!("{v:.2}")).unwrap_or_default(),
                    r.event_precision_pct.map(|v| format!("{v:.2}")).unwrap_or_default(),
                    r.fp_cluster_count,
                    r.far_clusters_per_hr_per_node,
                    r.per_node_load_bytes_per_hr,
                );
            }
        }
    }
}
