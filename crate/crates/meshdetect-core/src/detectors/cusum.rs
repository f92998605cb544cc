//! Bounded-memory CUSUM over the broadband frame statistic.
//!
//! Per-frame increment (variance-shift log-likelihood form):
//! `delta(m) = (X(m) - mu0)^2 / (2 sigma^2) - (mu1 - mu0)^2 / (4 sigma^2)`
//! with `mu1 = mu0 + snr_factor * sigma`, both calibrated from an initial
//! window. The running score is clipped to `[0, K_end]`.
//!
//! Triggering is a two-threshold state machine: a trigger fires on the
//! upward crossing of `h`, after which the detector is in alarm and stays
//! silent until the score falls back below `eta = rearm_fraction * h`.
//! While in alarm the reported strength is capped just below 1 so that
//! `trigger == (strength >= 1)` holds frame by frame.

use serde::{Deserialize, Serialize};

use crate::signal::Frame;

use super::{Detector, DetectorKind, DetectorOutput, FrameContext};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CusumParams {
    /// Target per-frame false-alarm rate; `h = ln(1 / alpha_fa)`.
    pub alpha_fa: f64,
    /// Upper clip as a multiple of `h`.
    pub k_end_factor: f64,
    /// Assumed event mean offset in calibrated sigmas (`mu1 = mu0 + f*sigma`).
    pub snr_factor: f64,
    /// Calibration window length in frames.
    pub cal_frames: u64,
    /// Fraction of the largest calibration statistics to trim before taking
    /// moments; interference spikes inside the window would otherwise
    /// dominate the variance estimate. Zero disables trimming.
    pub trim_fraction: f64,
    /// Re-arm threshold as a fraction of `h`.
    pub rearm_fraction: f64,
}

impl Default for CusumParams {
    fn default() -> Self {
        Self {
            alpha_fa: 1e-5,
            k_end_factor: 2.0,
            snr_factor: 3.0,
            cal_frames: 512,
            trim_fraction: 0.12,
            rearm_fraction: 0.85,
        }
    }
}

impl CusumParams {
    pub fn threshold_h(&self) -> f64 {
        (1.0 / self.alpha_fa).ln()
    }
}

pub struct CusumDetector {
    params: CusumParams,
    frames_seen: u64,
    cal_stats: Vec<f64>,
    mu0: f64,
    sigma: f64,
    score: f64,
    in_alarm: bool,
}

impl CusumDetector {
    pub fn new(params: CusumParams) -> Self {
        Self {
            frames_seen: 0,
            cal_stats: Vec::with_capacity(params.cal_frames as usize),
            mu0: 0.0,
            sigma: 0.0,
            score: 0.0,
            in_alarm: false,
            params,
        }
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn calibration(&self) -> (f64, f64) {
        (self.mu0, self.sigma)
    }

    /// Skip calibration (tests).
    #[cfg(test)]
    pub(crate) fn force_calibration(&mut self, mu0: f64, sigma: f64) {
        self.mu0 = mu0;
        self.sigma = sigma;
        self.frames_seen = self.params.cal_frames;
    }

    fn finish_calibration(&mut self) {
        self.cal_stats.sort_by(f64::total_cmp);
        let n = self.cal_stats.len();
        let drop = ((n as f64) * self.params.trim_fraction).ceil() as usize;
        let kept = &self.cal_stats[..n - drop.min(n.saturating_sub(2))];
        let count = kept.len() as f64;
        let mean = kept.iter().sum::<f64>() / count;
        let var = kept.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
        self.mu0 = mean;
        self.sigma = var.sqrt().max(f64::MIN_POSITIVE);
        self.cal_stats = Vec::new();
    }
}

impl Detector for CusumDetector {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Cusum
    }

    fn warmup_frames(&self) -> u64 {
        self.params.cal_frames
    }

    fn process_ctx(&mut self, frame: &Frame, ctx: &FrameContext) -> DetectorOutput {
        let x = ctx.statistic(frame);
        if self.frames_seen < self.params.cal_frames {
            self.cal_stats.push(x);
            self.frames_seen += 1;
            if self.frames_seen == self.params.cal_frames {
                self.finish_calibration();
            }
            return DetectorOutput {
                detector: DetectorKind::Cusum,
                node_id: frame.node_id,
                frame_index: frame.index,
                trigger: false,
                strength: 0.0,
            };
        }
        self.frames_seen += 1;

        let h = self.params.threshold_h();
        let k_end = self.params.k_end_factor * h;
        let eta = self.params.rearm_fraction * h;

        let z = (x - self.mu0) / self.sigma;
        let delta = z * z / 2.0 - self.params.snr_factor.powi(2) / 4.0;
        self.score = (self.score + delta).clamp(0.0, k_end);

        let armed = !self.in_alarm;
        let raw = self.score / h;
        let trigger = armed && raw >= 1.0;
        let strength = if armed {
            raw
        } else {
            raw.min(1.0 - f64::EPSILON)
        };
        if trigger {
            self.in_alarm = true;
        } else if self.in_alarm && self.score <= eta {
            self.in_alarm = false;
        }

        DetectorOutput {
            detector: DetectorKind::Cusum,
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
    use crate::FRAME_LEN;

    fn frame_with_statistic(index: u64, statistic: f64) -> Frame {
        let v = (statistic / FRAME_LEN as f64).sqrt();
        Frame {
            node_id: 0,
            index,
            start_time_s: index as f64 * 1.28,
            samples: [v; FRAME_LEN],
        }
    }

    fn detector() -> CusumDetector {
        let mut d = CusumDetector::new(CusumParams::default());
        d.force_calibration(128.0, 16.0);
        d
    }

    #[test]
    fn threshold_matches_published_value() {
        let p = CusumParams::default();
        assert!((p.threshold_h() - 11.512925464970229).abs() < 1e-3);
        assert!((p.threshold_h() - 11.5).abs() < 0.02);
    }

    #[test]
    fn score_decays_at_the_no_event_mean() {
        let mut d = detector();
        d.score = 5.0;
        let out = d.process(&frame_with_statistic(600, 128.0));
        // delta = -(snr_factor^2)/4 = -2.25
        assert!((d.score - 2.75).abs() < 1e-9);
        assert!(!out.trigger);
    }

    #[test]
    fn score_clips_at_zero_below() {
        let mut d = detector();
        for m in 0..50 {
            d.process(&frame_with_statistic(600 + m, 120.0));
            assert!(d.score() >= 0.0);
        }
        assert_eq!(d.score(), 0.0);
    }

    #[test]
    fn score_clips_at_k_end_above() {
        let mut d = detector();
        let k_end = 2.0 * CusumParams::default().threshold_h();
        for m in 0..50 {
            d.process(&frame_with_statistic(700 + m, 128.0 + 16.0 * 40.0));
            assert!(d.score() <= k_end + 1e-12);
        }
        assert!((d.score() - k_end).abs() < 1e-9);
    }

    #[test]
    fn trigger_fires_on_up_crossing_then_latches() {
        let mut d = detector();
        // One enormous frame: z^2/2 >> h, crossing fires once.
        let out = d.process(&frame_with_statistic(600, 128.0 + 16.0 * 10.0));
        assert!(out.trigger);
        assert!(out.strength >= 1.0);
        // Still far above h: latched, no trigger, strength capped below 1.
        let out = d.process(&frame_with_statistic(601, 128.0 + 16.0 * 10.0));
        assert!(!out.trigger);
        assert!(out.strength < 1.0);
    }

    #[test]
    fn rearms_after_score_falls_below_eta() {
        let mut d = detector();
        let h = CusumParams::default().threshold_h();
        assert!(d.process(&frame_with_statistic(600, 128.0 + 16.0 * 10.0)).trigger);
        // Decay at -2.25 per frame from K_end = 2h: needs ceil(h/2 / 2.25)+ a
        // few frames to fall below eta = h/2.
        let mut m = 601;
        while d.score() > 0.5 * h {
            assert!(!d.process(&frame_with_statistic(m, 128.0)).trigger);
            m += 1;
            assert!(m < 700);
        }
        // Re-armed now: the next crossing fires again.
        let out = d.process(&frame_with_statistic(m, 128.0 + 16.0 * 10.0));
        assert!(out.trigger);
    }

    #[test]
    fn calibration_trims_interference_spikes() {
        let mut d = CusumDetector::new(CusumParams::default());
        // 512 frames: mostly near 128 with 20 huge spikes.
        for m in 0..512u64 {
            let x = if m % 25 == 0 { 5000.0 } else { 128.0 + (m % 7) as f64 };
            d.process(&frame_with_statistic(m, x));
        }
        let (mu0, sigma) = d.calibration();
        assert!(mu0 < 200.0, "mu0 {mu0}");
        assert!(sigma < 50.0, "sigma {sigma}");
    }
}
