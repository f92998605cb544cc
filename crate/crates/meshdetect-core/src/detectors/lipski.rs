//! Lipski FFT energy detector.
//!
//! Hann-windowed FFT; per-bin mean and standard deviation are calibrated
//! over an initial noise-only window and then slow-tracked by an EMA on
//! no-detection frames. A trigger requires at least `n_bins_min` adjacent
//! event-band bins above `mu_b + k * sigma_b`.

use serde::{Deserialize, Serialize};

use crate::signal::Frame;

use super::{Detector, DetectorKind, DetectorOutput, FrameContext};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LipskiParams {
    /// Event-band bins, inclusive (DC never participates).
    pub band_bins: (usize, usize),
    /// Threshold multiplier `k`.
    pub k: f64,
    /// Minimum adjacent bins above threshold.
    pub n_bins_min: usize,
    /// Calibration window length in frames.
    pub cal_frames: u64,
    /// EMA coefficient for tracking on no-detection frames.
    pub alpha: f64,
}

impl Default for LipskiParams {
    fn default() -> Self {
        Self {
            band_bins: (1, 6),
            k: 3.0,
            n_bins_min: 3,
            cal_frames: 100,
            alpha: 0.01,
        }
    }
}

pub struct LipskiDetector {
    params: LipskiParams,
    frames_seen: u64,
    /// Per-bin running mean.
    mu: Vec<f64>,
    /// Per-bin running variance (Welford M2 during calibration).
    var: Vec<f64>,
    m2: Vec<f64>,
}

impl LipskiDetector {
    pub fn new(params: LipskiParams) -> Self {
        let n = params.band_bins.1 - params.band_bins.0 + 1;
        assert!(params.n_bins_min >= 1 && params.n_bins_min <= n);
        Self {
            params,
            frames_seen: 0,
            mu: vec![0.0; n],
            var: vec![0.0; n],
            m2: vec![0.0; n],
        }
    }

    /// Per-bin (mu, sigma) pairs; meaningful after calibration.
    pub fn bin_stats(&self) -> Vec<(f64, f64)> {
        self.mu
            .iter()
            .zip(&self.var)
            .map(|(&m, &v)| (m, v.sqrt()))
            .collect()
    }

    #[cfg(test)]
    pub(crate) fn force_stats(&mut self, mu: f64, sigma: f64) {
        for v in self.mu.iter_mut() {
            *v = mu;
        }
        for v in self.var.iter_mut() {
            *v = sigma * sigma;
        }
        self.frames_seen = self.params.cal_frames;
    }
}

impl Detector for LipskiDetector {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Lipski
    }

    fn warmup_frames(&self) -> u64 {
        self.params.cal_frames
    }

    fn process_ctx(&mut self, frame: &Frame, ctx: &FrameContext) -> DetectorOutput {
        let mags = ctx.hann_mags(frame);
        let (lo, hi) = self.params.band_bins;
        let band = &mags[lo..=hi];
        let n = band.len();

        if self.frames_seen < self.params.cal_frames {
            // Welford accumulation over the calibration window.
            let count = (self.frames_seen + 1) as f64;
            for (i, &x) in band.iter().enumerate() {
                let d = x - self.mu[i];
                self.mu[i] += d / count;
                self.m2[i] += d * (x - self.mu[i]);
            }
            self.frames_seen += 1;
            if self.frames_seen == self.params.cal_frames {
                for i in 0..n {
                    self.var[i] = (self.m2[i] / (count - 1.0)).max(f64::MIN_POSITIVE);
                }
            }
            return DetectorOutput {
                detector: DetectorKind::Lipski,
                node_id: frame.node_id,
                frame_index: frame.index,
                trigger: false,
                strength: 0.0,
            };
        }
        self.frames_seen += 1;

        // Normalized exceedance per bin; a bin is "above" iff its value > 1.
        let mut exceed = vec![0.0f64; n];
        for i in 0..n {
            let sigma = self.var[i].sqrt();
            exceed[i] = (band[i] - self.mu[i]) / (self.params.k * sigma);
        }
        // Strength: best window of n_bins_min adjacent bins, scored by the
        // weakest bin in the window. trigger <=> strength >= 1 is then exact
        // under the adjacency rule.
        let w = self.params.n_bins_min;
        let mut strength = f64::NEG_INFINITY;
        for start in 0..=(n - w) {
            let weakest = exceed[start..start + w]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            strength = strength.max(weakest);
        }
        let strength = strength.max(0.0);
        let trigger = strength >= 1.0;

        if !trigger {
            // Exponentially weighted mean/variance update (West's form).
            let a = self.params.alpha;
            for (i, &x) in band.iter().enumerate() {
                let d = x - self.mu[i];
                let incr = a * d;
                self.mu[i] += incr;
                self.var[i] = ((1.0 - a) * (self.var[i] + d * incr)).max(f64::MIN_POSITIVE);
            }
        }

        DetectorOutput {
            detector: DetectorKind::Lipski,
            node_id: frame.node_id,
            frame_index: frame.index,
            trigger,
            strength,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{fft128, hann128};
    use crate::FRAME_LEN;

    /// Frame with prescribed event-band magnitudes (exact-bin cosines under
    /// the Hann window are messy, so build in the frequency domain via
    /// superposed exact-bin sines and correct for the Hann kernel is not
    /// worth it; instead drive bins directly through force_stats + synthetic
    /// spectra using inverse construction on unwindowed sines and a huge
    /// sigma elsewhere).
    fn frame_with_band_sines(index: u64, amps: [f64; 6]) -> Frame {
        let mut samples = [0.0; FRAME_LEN];
        for (b, &a) in amps.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let f = (b + 1) as f64 * 100.0 / 128.0;
            // Alternate sin/cos so adjacent-bin Hann sidebands sit in
            // quadrature instead of cancelling each other.
            let phase = if (b + 1) % 2 == 0 { std::f64::consts::FRAC_PI_2 } else { 0.0 };
            for (n, s) in samples.iter_mut().enumerate() {
                let t = n as f64 / 100.0;
                *s += a * (std::f64::consts::TAU * f * t + phase).sin();
            }
        }
        Frame {
            node_id: 0,
            index,
            start_time_s: index as f64 * 1.28,
            samples,
        }
    }

    /// Hann halves the coherent gain of an exact-bin sine and leaks half a
    /// unit into each neighbour; magnitudes here are measured, not assumed.
    fn measured_band(amps: [f64; 6]) -> [f64; 6] {
        let f = frame_with_band_sines(0, amps);
        let mags = fft128(&f.samples, Some(hann128()));
        let mut out = [0.0; 6];
        out.copy_from_slice(&mags[1..=6]);
        out
    }

    #[test]
    fn calibration_window_emits_no_triggers() {
        let mut det = LipskiDetector::new(LipskiParams::default());
        for m in 0..100 {
            let out = det.process(&frame_with_band_sines(m, [50.0; 6]));
            assert!(!out.trigger);
            assert_eq!(out.strength, 0.0);
        }
    }

    #[test]
    fn two_adjacent_bins_do_not_trigger_three_do() {
        // Threshold mu + 3 sigma = 16 per bin. Hann sidebands couple
        // adjacent exact-bin sines, so search for drive levels that put
        // exactly the intended bins above threshold (measured, not assumed).
        let two_above = |amps: [f64; 6]| {
            let b = measured_band(amps);
            b[1] > 17.0 && b[2] > 17.0 && b[0] < 15.0 && b[3] < 15.0 && b[4] < 15.0
        };
        let mut found = None;
        for i in 1..200 {
            let scale = i as f64 * 0.02;
            let amps = [0.0, scale, scale * 1.4, 0.0, 0.0, 0.0];
            if two_above(amps) {
                found = Some(amps);
                break;
            }
        }
        let amps = found.expect("no two-bin drive level found");
        let mut det = LipskiDetector::new(LipskiParams::default());
        det.force_stats(10.0, 2.0);
        let out = det.process(&frame_with_band_sines(1000, amps));
        assert!(!out.trigger, "strength {}", out.strength);

        // Three adjacent bins above threshold must trigger.
        let three_above = |amps: [f64; 6]| {
            let b = measured_band(amps);
            b[1] > 17.0 && b[2] > 17.0 && b[3] > 17.0
        };
        let mut found = None;
        for i in 1..200 {
            let scale = i as f64 * 0.02;
            let amps = [0.0, scale, scale * 1.4, scale * 0.9, 0.0, 0.0];
            if three_above(amps) {
                found = Some(amps);
                break;
            }
        }
        let amps3 = found.expect("no three-bin drive level found");
        let mut det = LipskiDetector::new(LipskiParams::default());
        det.force_stats(10.0, 2.0);
        let out = det.process(&frame_with_band_sines(1001, amps3));
        assert!(out.trigger, "strength {}", out.strength);
    }

    #[test]
    fn strength_is_min_over_best_adjacent_triple() {
        let mut det = LipskiDetector::new(LipskiParams::default());
        det.force_stats(0.0, 1.0); // threshold = 3, exceedance = mag/3
        let amps = [0.0, 0.9, 1.2, 0.8, 0.0, 0.0];
        let band = measured_band(amps);
        let exceed: Vec<f64> = band.iter().map(|m| m / 3.0).collect();
        let mut expected = f64::NEG_INFINITY;
        for s in 0..=3 {
            expected = expected.max(exceed[s..s + 3].iter().copied().fold(f64::INFINITY, f64::min));
        }
        let out = det.process(&frame_with_band_sines(55, amps));
        assert!((out.strength - expected.max(0.0)).abs() < 1e-9);
    }

    #[test]
    fn stats_freeze_on_trigger_frames_and_track_otherwise() {
        let mut det = LipskiDetector::new(LipskiParams::default());
        det.force_stats(1.0, 0.5);
        let before = det.bin_stats();
        // Loud frame (trigger): stats must not move. Uneven amplitudes keep
        // Hann sidebands from cancelling any bin below threshold.
        let loud = [10.0, 11.0, 17.0, 12.0, 25.0, 13.0];
        let out = det.process(&frame_with_band_sines(1, loud));
        assert!(out.trigger);
        assert_eq!(det.bin_stats(), before);
        // Quiet frame (no trigger): stats move toward the new level.
        let out = det.process(&frame_with_band_sines(2, [0.0; 6]));
        assert!(!out.trigger);
        let after = det.bin_stats();
        assert!(after[0].0 < before[0].0);
    }

    #[test]
    fn additive_offset_shifts_margin_by_exactly_that_offset() {
        // With frozen stats, raising one bin's magnitude by c*sigma raises
        // that bin's exceedance margin |X| - mu by exactly c*sigma (the
        // threshold is additive, not multiplicative).
        let mut det = LipskiDetector::new(LipskiParams::default());
        det.force_stats(5.0, 2.0);
        let (mu, sigma) = det.bin_stats()[0];
        let x = 9.3;
        let c = 1.7;
        let shifted = (x + c * sigma - mu) - (x - mu);
        assert!((shifted - c * sigma).abs() < 1e-12);
    }
}
