//! Per-node schedules: ground-truth events and digital interference.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SignalParams;

/// One scheduled ground-truth event on one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthEvent {
    pub node_id: u32,
    pub event_index: u32,
    /// Onset time in seconds from run start.
    pub onset_s: f64,
    pub duration_s: f64,
    /// Carrier frequency inside the event band, Hz.
    pub carrier_hz: f64,
    /// Effective SNR in dB (nominal plus per-event jitter).
    pub snr_db: f64,
}

impl GroundTruthEvent {
    pub fn end_s(&self) -> f64 {
        self.onset_s + self.duration_s
    }

    /// True if `[onset, end]` overlaps the closed interval `[a, b]`.
    pub fn overlaps(&self, a: f64, b: f64) -> bool {
        self.onset_s <= b && self.end_s() >= a
    }
}

/// Draw the Poisson event schedule for one node.
///
/// Arrivals are exponential with mean `3600 / rate`. Events whose 5 s window
/// would overlap the warmup window, the run end, or the previous event on
/// the same node are dropped.
pub fn schedule_events(
    node_id: u32,
    run_duration_s: f64,
    warmup_end_s: f64,
    nominal_snr_db: f64,
    params: &SignalParams,
    rng: &mut ChaCha8Rng,
) -> Vec<GroundTruthEvent> {
    let mut events = Vec::new();
    if params.event_rate_per_hr <= 0.0 {
        return events;
    }
    let mean_gap_s = 3600.0 / params.event_rate_per_hr;
    let (c_lo, c_hi) = params.event_carrier_range_hz;
    let mut t = 0.0f64;
    let mut last_end = f64::NEG_INFINITY;
    loop {
        // Inverse-CDF exponential draw keeps the stream consumption fixed.
        let u: f64 = rng.gen::<f64>();
        t += -mean_gap_s * (1.0 - u).ln();
        if t + params.event_duration_s > run_duration_s {
            break;
        }
        let carrier = rng.gen_range(c_lo..c_hi);
        let jitter = if params.snr_jitter_db > 0.0 {
            rng.gen_range(-params.snr_jitter_db..params.snr_jitter_db)
        } else {
            0.0
        };
        if t < warmup_end_s || t < last_end {
            continue;
        }
        last_end = t + params.event_duration_s;
        events.push(GroundTruthEvent {
            node_id,
            event_index: events.len() as u32,
            onset_s: t,
            duration_s: params.event_duration_s,
            carrier_hz: carrier,
            snr_db: nominal_snr_db + jitter,
        });
    }
    events
}

/// One tone burst of digital interference (glitch or switching regime).
///
/// The carrier lies above Nyquist; sampling folds it into the observed band.
/// `amp_factor` multiplies the instantaneous sqrt(P(t)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneBurst {
    pub start_s: f64,
    pub duration_s: f64,
    pub carrier_hz: f64,
    pub amp_factor: f64,
    pub phase: f64,
}

impl ToneBurst {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.duration_s
    }
}

/// Fold a carrier to its aliased frequency at `fs`.
pub fn folded_freq(carrier_hz: f64, fs: f64) -> f64 {
    let r = carrier_hz.rem_euclid(fs);
    if r > fs / 2.0 {
        fs - r
    } else {
        r
    }
}

/// Draw the short-glitch schedule for one node.
pub fn schedule_glitches(params: &SignalParams, run_duration_s: f64, rng: &mut ChaCha8Rng) -> Vec<ToneBurst> {
    let mut out = Vec::new();
    if params.burst_rate_per_hr <= 0.0 {
        return out;
    }
    let mean_gap_s = 3600.0 / params.burst_rate_per_hr;
    let (d_lo, d_hi) = params.burst_duration_s;
    let (f_lo, f_hi) = params.burst_freq_range_hz;
    let (b_lo, b_hi) = params.burst_bin_range;
    let mut t = 0.0f64;
    let mut last_end = f64::NEG_INFINITY;
    loop {
        let u: f64 = rng.gen::<f64>();
        t += -mean_gap_s * (1.0 - u).ln();
        if t >= run_duration_s {
            break;
        }
        let duration = rng.gen_range(d_lo..d_hi);
        let mut carrier = rng.gen_range(f_lo..f_hi);
        let (a_lo, a_hi) = params.burst_alias_range_hz;
        let mut guard = 0;
        while {
            let fa = folded_freq(carrier, params.sample_rate_hz);
            fa < a_lo || fa > a_hi
        } {
            carrier = rng.gen_range(f_lo..f_hi);
            guard += 1;
            assert!(guard < 10_000, "glitch alias range incompatible with carrier range");
        }
        // Fix the spectral peak (amp * samples / 2), not the amplitude, so
        // the per-bin footprint is controlled across durations.
        let peak = rng.gen_range(b_lo..b_hi);
        let samples = duration * params.sample_rate_hz;
        let amp = (2.0 * peak / samples).min(params.burst_amp_factor_max);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        if t < last_end + params.burst_refractory_s {
            continue;
        }
        last_end = t + duration;
        out.push(ToneBurst {
            start_s: t,
            duration_s: duration,
            carrier_hz: carrier,
            amp_factor: amp,
            phase,
        });
    }
    out
}

/// Draw the switching-regime schedule for one node.
///
/// Regime carriers are redrawn until their folded frequency lands inside
/// `regime_alias_range_hz`; the amplitude is set from a log-uniform
/// per-frame energy draw (`E = amp^2 * frame_len / 2` in units of P).
pub fn schedule_regimes(params: &SignalParams, run_duration_s: f64, rng: &mut ChaCha8Rng) -> Vec<ToneBurst> {
    let mut out = Vec::new();
    if params.regime_rate_per_hr <= 0.0 {
        return out;
    }
    let mean_gap_s = 3600.0 / params.regime_rate_per_hr;
    let (d_lo, d_hi) = params.regime_duration_s;
    let (f_lo, f_hi) = params.burst_freq_range_hz;
    let (a_lo, a_hi) = params.regime_alias_range_hz;
    let (e_lo, e_hi) = params.regime_energy_range;
    let mut t = 0.0f64;
    let mut last_end = f64::NEG_INFINITY;
    loop {
        let u: f64 = rng.gen::<f64>();
        t += -mean_gap_s * (1.0 - u).ln();
        if t >= run_duration_s {
            break;
        }
        let duration = rng.gen_range(d_lo..d_hi);
        let mut carrier = rng.gen_range(f_lo..f_hi);
        let mut guard = 0;
        while {
            let fa = folded_freq(carrier, params.sample_rate_hz);
            fa < a_lo || fa > a_hi
        } {
            carrier = rng.gen_range(f_lo..f_hi);
            guard += 1;
            assert!(guard < 10_000, "alias range incompatible with carrier range");
        }
        let energy = e_lo * (e_hi / e_lo).powf(rng.gen::<f64>());
        let amp = (2.0 * energy / params.frame_len as f64).sqrt();
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        if t < last_end + 2.0 {
            continue;
        }
        last_end = t + duration;
        out.push(ToneBurst {
            start_s: t,
            duration_s: duration,
            carrier_hz: carrier,
            amp_factor: amp,
            phase,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{domain, stream_rng};

    fn rng(tag: u64) -> ChaCha8Rng {
        stream_rng(42, &[domain::EVENTS, tag])
    }

    #[test]
    fn zero_rate_yields_empty_schedule() {
        let mut p = SignalParams::default();
        p.event_rate_per_hr = 0.0;
        let ev = schedule_events(0, 86_400.0, 655.36, 12.0, &p, &mut rng(0));
        assert!(ev.is_empty());
    }

    #[test]
    fn poisson_mean_count_matches_rate() {
        // lambda = 1/hr over 24 h: mean 24 per node, checked over 1000 draws
        // against a 3-sigma band (sigma = sqrt(24/1000)).
        let p = SignalParams::default();
        let mut total = 0usize;
        for i in 0..1000 {
            total += schedule_events(0, 86_400.0, 655.36, 12.0, &p, &mut rng(i)).len();
        }
        let mean = total as f64 / 1000.0;
        // Boundary losses (warmup + run end + overlap drops) shave ~2% off 24.
        let expected = 24.0 * (86_400.0 - 655.36 - 24.0 * 5.0) / 86_400.0;
        let sigma = (expected / 1000.0f64).sqrt();
        assert!(
            (mean - expected).abs() < 3.0 * sigma,
            "mean {mean} expected {expected} +/- {}",
            3.0 * sigma
        );
    }

    #[test]
    fn ten_nodes_give_about_240_events_per_run() {
        let p = SignalParams::default();
        let mut total = 0usize;
        for node in 0..10 {
            total += schedule_events(node, 86_400.0, 655.36, 18.0, &p, &mut rng(node as u64)).len();
        }
        assert!((200..=280).contains(&total), "total {total}");
    }

    #[test]
    fn events_respect_warmup_end_and_overlap_constraints() {
        let p = SignalParams::default();
        for seed in 0..50 {
            let ev = schedule_events(1, 86_400.0, 655.36, 12.0, &p, &mut rng(seed));
            let mut prev_end = 0.0;
            for e in &ev {
                assert!(e.onset_s >= 655.36);
                assert!(e.end_s() <= 86_400.0);
                assert!(e.onset_s >= prev_end);
                assert!(e.carrier_hz >= p.event_carrier_range_hz.0);
                assert!(e.carrier_hz <= p.event_carrier_range_hz.1);
                assert!((e.snr_db - 12.0).abs() <= p.snr_jitter_db);
                prev_end = e.end_s();
            }
        }
    }

    #[test]
    fn folded_frequency_matches_hand_values() {
        assert!((folded_freq(850.0, 100.0) - 50.0).abs() < 1e-12);
        assert!((folded_freq(812.0, 100.0) - 12.0).abs() < 1e-12);
        assert!((folded_freq(888.0, 100.0) - 12.0).abs() < 1e-12);
        assert!((folded_freq(1999.0, 100.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regime_aliases_stay_clear_of_event_band() {
        let p = SignalParams::default();
        let regimes = schedule_regimes(&p, 86_400.0, &mut rng(9));
        assert!(!regimes.is_empty());
        for r in &regimes {
            let fa = folded_freq(r.carrier_hz, 100.0);
            assert!(fa >= p.regime_alias_range_hz.0 && fa <= p.regime_alias_range_hz.1);
        }
    }

    #[test]
    fn glitch_spectral_peaks_and_spacing_are_bounded() {
        let p = SignalParams::default();
        let glitches = schedule_glitches(&p, 86_400.0, &mut rng(3));
        assert!(!glitches.is_empty());
        let mut prev_end = f64::NEG_INFINITY;
        for g in &glitches {
            let samples = g.duration_s * 100.0;
            let peak = g.amp_factor * samples / 2.0;
            assert!(peak <= p.burst_bin_range.1 + 1e-9);
            assert!(g.amp_factor <= p.burst_amp_factor_max + 1e-9);
            assert!(g.start_s >= prev_end + p.burst_refractory_s - 1e-9);
            prev_end = g.end_s();
        }
    }
}
