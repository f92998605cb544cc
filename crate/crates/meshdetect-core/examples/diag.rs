//! Diagnostic: context of every TSNFA-missed event over a set of node
//! streams. Usage: diag [hours] [nodes] [seed] [snr_db] [key=value...]

use meshdetect_core::detectors::{Detector, DetectorParams, TsnfaDetector};
use meshdetect_core::harness::SCORING_WARMUP_FRAMES;
use meshdetect_core::signal::{drift_power, NodeSignalModel, SignalParams};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let hours: f64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(24.0);
    let nodes: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(7);
    let snr: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(12.0);
    let mut params = SignalParams::default();
    let mut dp = DetectorParams::default();
    for kv in args.iter().skip(4) {
        let (k, v) = kv.split_once('=').unwrap();
        if let Some(rest) = k.strip_prefix("signal.") {
            let mut probe = meshdetect_core::harness::RunConfig::default();
            probe.apply_override(k, v).unwrap();
            params = probe.signal;
            let _ = rest;
        } else if k == "tau" {
            params.event_decay_tau_s = v.parse().unwrap();
        } else if k == "zeta" {
            dp.tsnfa.zeta = v.parse().unwrap();
        }
    }
    let run_s = hours * 3600.0;
    let frames = (run_s / 1.28) as u64;
    let mut total = 0usize;
    let mut missed = 0usize;
    let mut fp_frames = 0usize;

    for node in 0..nodes {
        let model = NodeSignalModel::new(
            seed,
            0,
            0,
            node,
            snr,
            run_s,
            SCORING_WARMUP_FRAMES as f64 * 1.28,
            &params,
        );
        let mut det = TsnfaDetector::new(dp.tsnfa.clone());
        let mut best: Vec<f64> = vec![0.0; model.events().len()];
        for m in 0..frames {
            let frame = model.frame(m);
            let out = det.process(&frame);
            let fs = m as f64 * 1.28;
            let fe = fs + 1.28;
            let overlapping = model
                .events()
                .iter()
                .position(|e| e.onset_s <= fe && e.end_s() >= fs);
            match overlapping {
                Some(i) => best[i] = best[i].max(out.strength),
                None => {
                    if out.trigger && m >= SCORING_WARMUP_FRAMES {
                        fp_frames += 1;
                        let burst = model
                            .bursts()
                            .iter()
                            .find(|b| b.start_s < fe && b.end_s() > fs);
                        println!(
                            "FP node={node} m={m} t={fs:.0}s strength={:.2} P={:.2} burst={:?}",
                            out.strength,
                            drift_power(fs, &params),
                            burst.map(|b| (
                                b.duration_s,
                                b.amp_factor,
                                meshdetect_core::signal::folded_freq(b.carrier_hz, 100.0)
                            ))
                        );
                    }
                }
            }
        }
        total += model.events().len();
        for (i, e) in model.events().iter().enumerate() {
            if best[i] < 1.0 {
                missed += 1;
                let bin = e.carrier_hz / (100.0 / 128.0);
                let delta = (bin - bin.round()).abs();
                let phase = (e.onset_s / 1.28).fract();
                println!(
                    "MISS node={node} onset={:.1} best={:.3} snr={:.2} bin={bin:.2} delta={delta:.2} phase={phase:.2} P={:.2}",
                    e.onset_s,
                    best[i],
                    e.snr_db,
                    drift_power(e.onset_s, &params),
                );
            }
        }
    }
    println!("events={total} missed={missed} fp_frames={fp_frames}");
}
