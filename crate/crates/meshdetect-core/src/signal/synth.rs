//! Frame synthesis.
//!
//! A [`NodeSignalModel`] owns everything needed to produce any frame of one
//! node's stream: the event and interference schedules (precomputed from
//! their own streams) and the per-frame noise stream tags. Frames are
//! generated by index, independently of each other, so identical
//! `(seed, node, frame index)` always yields bit-identical samples no matter
//! the generation order or thread schedule.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::streams::{domain, stream_rng};
use crate::FRAME_LEN;

use super::{
    drift_power, event_waveform, schedule_events, schedule_glitches, schedule_regimes,
    GroundTruthEvent, SignalParams, ToneBurst,
};

/// One 128-sample window of one node's time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub node_id: u32,
    /// Frame index `m`; the frame covers `[m, m+1) * 1.28 s`.
    pub index: u64,
    pub start_time_s: f64,
    #[serde(with = "serde_samples")]
    pub samples: [f64; FRAME_LEN],
}

mod serde_samples {
    use super::FRAME_LEN;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64; FRAME_LEN], s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; FRAME_LEN], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        <[f64; FRAME_LEN]>::try_from(v).map_err(|v: Vec<f64>| {
            serde::de::Error::invalid_length(v.len(), &"exactly 128 samples")
        })
    }
}

/// Generator for one node of one replicate.
#[derive(Debug, Clone)]
pub struct NodeSignalModel {
    params: SignalParams,
    master_seed: u64,
    config_index: usize,
    replicate: u32,
    node_id: u32,
    mains_phase: f64,
    events: Vec<GroundTruthEvent>,
    /// Glitches and switching regimes merged, sorted by start time.
    bursts: Vec<ToneBurst>,
    max_burst_s: f64,
}

impl NodeSignalModel {
    /// Build the model for `(config, replicate, node)`, drawing all
    /// schedules from their named streams.
    pub fn new(
        master_seed: u64,
        config_index: usize,
        replicate: u32,
        node_id: u32,
        nominal_snr_db: f64,
        run_duration_s: f64,
        warmup_end_s: f64,
        params: &SignalParams,
    ) -> Self {
        let tags = |d: u64| [d, config_index as u64, replicate as u64, node_id as u64];
        let events = schedule_events(
            node_id,
            run_duration_s,
            warmup_end_s,
            nominal_snr_db,
            params,
            &mut stream_rng(master_seed, &tags(domain::EVENTS)),
        );
        let glitches =
            schedule_glitches(params, run_duration_s, &mut stream_rng(master_seed, &tags(domain::GLITCH)));
        let regimes =
            schedule_regimes(params, run_duration_s, &mut stream_rng(master_seed, &tags(domain::REGIME)));
        let mains_phase = stream_rng(master_seed, &tags(domain::MAINS)).gen_range(0.0..std::f64::consts::TAU);
        Self::from_parts(params.clone(), master_seed, config_index, replicate, node_id, mains_phase, events, {
            let mut bursts = glitches;
            bursts.extend(regimes);
            bursts
        })
    }

    /// Assemble a model from explicit schedules (used by tests and by the
    /// streaming-session API, where callers control the environment).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        params: SignalParams,
        master_seed: u64,
        config_index: usize,
        replicate: u32,
        node_id: u32,
        mains_phase: f64,
        events: Vec<GroundTruthEvent>,
        mut bursts: Vec<ToneBurst>,
    ) -> Self {
        bursts.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        let max_burst_s = bursts.iter().map(|b| b.duration_s).fold(0.0, f64::max);
        Self {
            params,
            master_seed,
            config_index,
            replicate,
            node_id,
            mains_phase,
            events,
            bursts,
            max_burst_s,
        }
    }

    pub fn events(&self) -> &[GroundTruthEvent] {
        &self.events
    }

    pub fn bursts(&self) -> &[ToneBurst] {
        &self.bursts
    }

    pub fn params(&self) -> &SignalParams {
        &self.params
    }

    /// Synthesize frame `m`.
    pub fn frame(&self, m: u64) -> Frame {
        let fs = self.params.sample_rate_hz;
        let dt = 1.0 / fs;
        let t0 = m as f64 * self.params.frame_period_s();
        let t_end = t0 + self.params.frame_period_s();

        let mut samples = [0.0f64; FRAME_LEN];

        // Per-frame noise stream: random access by construction.
        let mut rng = stream_rng(
            self.master_seed,
            &[
                domain::NOISE,
                self.config_index as u64,
                self.replicate as u64,
                self.node_id as u64,
                m,
            ],
        );
        for s in samples.iter_mut() {
            *s = rng.sample::<f64, _>(StandardNormal);
        }

        let bursts = self.bursts_overlapping(t0, t_end);
        let event = self.event_overlapping(t0, t_end);
        let mains_on = self.params.mains_amp_factor != 0.0;
        let noise_std_nominal = self.params.noise_std();

        for (n, s) in samples.iter_mut().enumerate() {
            let t = t0 + n as f64 * dt;
            let p = drift_power(t, &self.params);
            let sqrt_p = p.sqrt();
            let mut x = *s * sqrt_p;
            if mains_on {
                x += self.params.mains_amp_factor
                    * sqrt_p
                    * (std::f64::consts::TAU * self.params.mains_freq_hz * t + self.mains_phase).cos();
            }
            for b in bursts {
                // Sampling the above-Nyquist tone at the 100 Hz instants is
                // exactly the 64x-oversampled synthesis decimated without an
                // anti-alias filter (the decimated grid is a subset of the
                // 6.4 kHz grid).
                if t >= b.start_s && t < b.end_s() {
                    let tr = t - b.start_s;
                    x += b.amp_factor
                        * sqrt_p
                        * (std::f64::consts::TAU * b.carrier_hz * tr + b.phase).sin();
                }
            }
            if let Some(e) = event {
                x += event_waveform(t - e.onset_s, e, noise_std_nominal, self.params.event_decay_tau_s);
            }
            *s = x;
        }

        Frame {
            node_id: self.node_id,
            index: m,
            start_time_s: t0,
            samples,
        }
    }

    fn bursts_overlapping(&self, t0: f64, t1: f64) -> &[ToneBurst] {
        // Bursts are sorted by start; anything starting before t1 and after
        // t0 - max_duration can overlap [t0, t1).
        let hi = self.bursts.partition_point(|b| b.start_s < t1);
        let lo = self
            .bursts
            .partition_point(|b| b.start_s < t0 - self.max_burst_s);
        &self.bursts[lo..hi]
    }

    fn event_overlapping(&self, t0: f64, t1: f64) -> Option<&GroundTruthEvent> {
        // Events never overlap each other; at most one covers a frame start,
        // but a frame can straddle one event's end and another's onset only
        // if they are closer than a frame, which scheduling forbids.
        self.events
            .iter()
            .find(|e| e.onset_s < t1 && e.end_s() > t0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_params() -> SignalParams {
        SignalParams::noise_only()
    }

    #[test]
    fn frames_are_bit_deterministic_and_order_free() {
        let p = SignalParams::default();
        let model = NodeSignalModel::new(99, 1, 2, 3, 12.0, 4000.0, 655.36, &p);
        let late = model.frame(1234);
        let early = model.frame(7);
        let model2 = NodeSignalModel::new(99, 1, 2, 3, 12.0, 4000.0, 655.36, &p);
        assert_eq!(model2.frame(7), early);
        assert_eq!(model2.frame(1234), late);
        assert_eq!(late.start_time_s, 1234.0 * 1.28);
    }

    #[test]
    fn noise_only_frame_statistic_has_expected_moments() {
        // Sum of squares over a frame: mean 128*P, std sqrt(2*128)*P.
        let p = quiet_params();
        let model = NodeSignalModel::from_parts(p, 5, 0, 0, 0, 0.0, vec![], vec![]);
        let n_frames = 20_000usize;
        let stats: Vec<f64> = (0..n_frames)
            .map(|m| model.frame(m as u64).samples.iter().map(|x| x * x).sum())
            .collect();
        let mean = stats.iter().sum::<f64>() / n_frames as f64;
        let var = stats.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_frames - 1) as f64;
        assert!((mean - 128.0).abs() < 0.02 * 128.0, "mean {mean}");
        assert!((var.sqrt() - 16.0).abs() < 0.05 * 16.0, "std {}", var.sqrt());
    }

    #[test]
    fn mains_only_alternates_sign_at_nyquist() {
        let mut p = quiet_params();
        p.mains_amp_factor = 0.3;
        // Zero phase, no noise: scale noise away by zeroing base power is not
        // possible (P0 > 0), so compare against the analytic mains series.
        let model = NodeSignalModel::from_parts(p.clone(), 5, 0, 0, 7, 0.0, vec![], vec![]);
        let frame = model.frame(3);
        let noise_model = NodeSignalModel::from_parts(quiet_params(), 5, 0, 0, 7, 0.0, vec![], vec![]);
        let noise = noise_model.frame(3);
        for n in 0..FRAME_LEN {
            let mains = frame.samples[n] - noise.samples[n];
            let expected = 0.3 * if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                (mains - expected).abs() < 1e-9,
                "n={n} mains={mains} expected={expected}"
            );
        }
    }

    #[test]
    fn burst_sampling_equals_oversampled_decimation() {
        // Synthesize one burst on the 6.4 kHz grid, decimate by 64, and
        // compare with the direct per-sample evaluation.
        let mut p = quiet_params();
        p.burst_rate_per_hr = 0.0;
        let burst = ToneBurst {
            start_s: 1.0,
            duration_s: 0.5,
            carrier_hz: 1234.5,
            amp_factor: 2.0,
            phase: 0.7,
        };
        let model =
            NodeSignalModel::from_parts(p.clone(), 5, 0, 0, 0, 0.0, vec![], vec![burst.clone()]);
        let noise_model = NodeSignalModel::from_parts(p, 5, 0, 0, 0, 0.0, vec![], vec![]);
        let frame = model.frame(1); // covers [1.28, 2.56) s... burst active in [1.0, 1.5)
        let clean = noise_model.frame(1);

        let hi_fs = 6400.0;
        for n in 0..FRAME_LEN {
            let got = frame.samples[n] - clean.samples[n];
            let j = (1u64 * 128 + n as u64) * 64; // hi-res index of sample n
            let t = j as f64 / hi_fs;
            let expected = if t >= burst.start_s && t < burst.end_s() {
                burst.amp_factor
                    * (std::f64::consts::TAU * burst.carrier_hz * (t - burst.start_s) + burst.phase).sin()
            } else {
                0.0
            };
            assert!((got - expected).abs() < 1e-9, "n={n} got={got} expected={expected}");
        }
    }

    #[test]
    fn event_component_concentrates_at_exact_bin_carrier() {
        // An exact-bin carrier (0.78125 Hz = bin 1) dominates bin 1 of the
        // event-only spectrum; verified against the naive DFT in fft tests.
        let p = quiet_params();
        let ev = GroundTruthEvent {
            node_id: 0,
            event_index: 0,
            onset_s: 0.0,
            duration_s: 5.0,
            carrier_hz: 0.78125,
            snr_db: 18.0,
        };
        let model = NodeSignalModel::from_parts(p.clone(), 5, 0, 0, 0, 0.0, vec![ev], vec![]);
        let clean = NodeSignalModel::from_parts(p, 5, 0, 0, 0, 0.0, vec![], vec![]);
        let f = model.frame(0);
        let c = clean.frame(0);
        let mut event_only = [0.0; FRAME_LEN];
        for n in 0..FRAME_LEN {
            event_only[n] = f.samples[n] - c.samples[n];
        }
        let mags = crate::detectors::fft128(&event_only, None);
        let (best, _) = mags
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(best, 1);
        for (k, m) in mags.iter().enumerate() {
            if k != 1 {
                assert!(*m < mags[1] * 0.5, "bin {k} = {m}, bin1 = {}", mags[1]);
            }
        }
    }
}
