//! TSNFA: temporal spectral noise-floor adaptation.
//!
//! Per event-band FFT bin (k = 1..=6), a depth-3 median rejects single-frame
//! transients and a depth-64 median of those medians tracks the noise floor;
//! the instantaneous bin magnitude is compared against `zeta` times the
//! tracked floor, OR-ed across bins. The stage-2 median moves only after 32
//! of its 64 entries are contaminated, so the floor shrugs off anything
//! shorter than ~41 s while the trigger keeps single-frame sensitivity.

use serde::{Deserialize, Serialize};

use crate::signal::Frame;

use super::{median::RingMedian, Detector, DetectorKind, DetectorOutput, FrameContext};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsnfaParams {
    /// Event-band bins, inclusive.
    pub band_bins: (usize, usize),
    /// Stage-1 (transient rejection) median depth.
    pub stage1_depth: usize,
    /// Stage-2 (noise-floor) median depth.
    pub stage2_depth: usize,
    /// Threshold multiplier zeta.
    pub zeta: f64,
}

impl Default for TsnfaParams {
    fn default() -> Self {
        Self {
            band_bins: (1, 6),
            stage1_depth: 3,
            stage2_depth: 64,
            zeta: 6.0,
        }
    }
}

struct BinState {
    stage1: RingMedian,
    stage2: RingMedian,
    /// Latest stage-2 median (the tracked noise floor for this bin).
    floor: f64,
}

pub struct TsnfaDetector {
    params: TsnfaParams,
    bins: Vec<BinState>,
    frames_seen: u64,
}

impl TsnfaDetector {
    pub fn new(params: TsnfaParams) -> Self {
        let n_bins = params.band_bins.1 - params.band_bins.0 + 1;
        let bins = (0..n_bins)
            .map(|_| BinState {
                stage1: RingMedian::new(params.stage1_depth),
                stage2: RingMedian::new(params.stage2_depth),
                floor: 0.0,
            })
            .collect();
        Self {
            params,
            bins,
            frames_seen: 0,
        }
    }

    /// Tracked noise floor per band bin (after warmup).
    pub fn noise_floors(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.floor).collect()
    }
}

impl Detector for TsnfaDetector {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Tsnfa
    }

    fn warmup_frames(&self) -> u64 {
        (self.params.stage1_depth + self.params.stage2_depth) as u64
    }

    fn process_ctx(&mut self, frame: &Frame, ctx: &FrameContext) -> DetectorOutput {
        let mags = ctx.rect_mags(frame);
        let (lo, hi) = self.params.band_bins;
        let mut strength: f64 = 0.0;
        for (i, bin) in self.bins.iter_mut().enumerate() {
            let mag = mags[lo + i];
            debug_assert!(lo + i <= hi);
            bin.stage1.push(mag);
            let transient_free = bin.stage1.median();
            bin.stage2.push(transient_free);
            bin.floor = bin.stage2.median();
            if bin.floor > 0.0 {
                strength = strength.max(mag / (self.params.zeta * bin.floor));
            }
        }
        self.frames_seen += 1;
        let warm = self.frames_seen > self.warmup_frames();
        if !warm {
            strength = 0.0;
        }
        DetectorOutput {
            detector: DetectorKind::Tsnfa,
            node_id: frame.node_id,
            frame_index: frame.index,
            trigger: warm && strength >= 1.0,
            strength,
        }
    }
}
