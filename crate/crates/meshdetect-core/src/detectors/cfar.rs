//! CA-CFAR and OS-CFAR over the broadband frame statistic.
//!
//! The reference window holds the statistics of frames `m-33 .. m-2`: the 32
//! most recent past frames excluding one guard frame (`m-1`) and the frame
//! under test. The ring absorbs the tested frame's statistic only after the
//! decision, so the cell under test never contaminates its own threshold.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::signal::Frame;

use super::{Detector, DetectorKind, DetectorOutput, FrameContext};

/// Finn-Johnson threshold multiplier for cell-averaging CFAR over
/// exponentially distributed cells: `alpha = N * (P_fa^(-1/N) - 1)`.
///
/// Domain: `n_ref >= 1`, `0 < p_fa < 1`.
pub fn cfar_alpha_ca(n_ref: u32, p_fa: f64) -> f64 {
    assert!(n_ref >= 1, "n_ref must be at least 1");
    assert!(p_fa > 0.0 && p_fa < 1.0, "p_fa must lie in (0, 1)");
    let n = n_ref as f64;
    n * (p_fa.powf(-1.0 / n) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CfarVariant {
    CellAveraging,
    OrderedStatistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CfarParams {
    /// Reference window size.
    pub n_ref: usize,
    /// Guard frames between the window and the cell under test.
    pub guard: usize,
    /// CA threshold multiplier (Finn-Johnson at N=32, P_fa=1e-3).
    pub alpha_ca: f64,
    /// OS threshold multiplier (Rohling closed form at the same operating
    /// point; the published value).
    pub alpha_os: f64,
    /// OS rank (1-indexed k-th smallest), k = 3N/4.
    pub os_rank: usize,
}

impl Default for CfarParams {
    fn default() -> Self {
        Self {
            n_ref: 32,
            guard: 1,
            alpha_ca: cfar_alpha_ca(32, 1e-3),
            alpha_os: 6.09,
            os_rank: 24,
        }
    }
}

pub struct CfarDetector {
    variant: CfarVariant,
    params: CfarParams,
    /// Statistics of frames `m-(n_ref+guard) .. m-1`, oldest first.
    recent: VecDeque<f64>,
    frames_seen: u64,
    scratch: Vec<f64>,
}

impl CfarDetector {
    pub fn new(variant: CfarVariant, params: CfarParams) -> Self {
        assert!(params.os_rank >= 1 && params.os_rank <= params.n_ref);
        Self {
            variant,
            recent: VecDeque::with_capacity(params.n_ref + params.guard),
            frames_seen: 0,
            params,
            scratch: Vec::new(),
        }
    }

    /// Noise-level estimate Z over the current reference cells, if the
    /// window is full.
    fn noise_estimate(&mut self) -> Option<f64> {
        if self.recent.len() < self.params.n_ref + self.params.guard {
            return None;
        }
        let cells = self.recent.iter().take(self.params.n_ref);
        match self.variant {
            CfarVariant::CellAveraging => {
                Some(cells.sum::<f64>() / self.params.n_ref as f64)
            }
            CfarVariant::OrderedStatistic => {
                self.scratch.clear();
                self.scratch.extend(cells);
                let k = self.params.os_rank - 1;
                let (_, kth, _) = self.scratch.select_nth_unstable_by(k, f64::total_cmp);
                Some(*kth)
            }
        }
    }

    fn alpha(&self) -> f64 {
        match self.variant {
            CfarVariant::CellAveraging => self.params.alpha_ca,
            CfarVariant::OrderedStatistic => self.params.alpha_os,
        }
    }

    #[cfg(test)]
    pub(crate) fn preload_cells(&mut self, cells: &[f64], guard: f64) {
        self.recent.clear();
        self.recent.extend(cells.iter().copied());
        for _ in 0..self.params.guard {
            self.recent.push_back(guard);
        }
        self.frames_seen = 1 + self.warmup_frames();
    }
}

impl Detector for CfarDetector {
    fn kind(&self) -> DetectorKind {
        match self.variant {
            CfarVariant::CellAveraging => DetectorKind::CaCfar,
            CfarVariant::OrderedStatistic => DetectorKind::OsCfar,
        }
    }

    fn warmup_frames(&self) -> u64 {
        (self.params.n_ref + self.params.guard + 1) as u64
    }

    fn process_ctx(&mut self, frame: &Frame, ctx: &FrameContext) -> DetectorOutput {
        let x = ctx.statistic(frame);
        self.frames_seen += 1;
        let warm = self.frames_seen > self.warmup_frames();
        let strength = match self.noise_estimate() {
            Some(z) if warm && z > 0.0 => x / (self.alpha() * z),
            _ => 0.0,
        };
        // Absorb after the decision.
        if self.recent.len() == self.params.n_ref + self.params.guard {
            self.recent.pop_front();
        }
        self.recent.push_back(x);
        DetectorOutput {
            detector: self.kind(),
            node_id: frame.node_id,
            frame_index: frame.index,
            trigger: strength >= 1.0,
            strength,
        }
    }
}
