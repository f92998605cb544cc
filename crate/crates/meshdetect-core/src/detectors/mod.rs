//! Five streaming detectors behind one contract: consume a [`Frame`],
//! return a [`DetectorOutput`]. All state is explicit; processing a frame
//! sequence is a pure fold over detector state, so replaying a stream
//! reproduces the trigger sequence bit-exactly.
//!
//! Strengths are normalized so that the canonical trigger condition maps to
//! `strength >= 1.0`; for every detector `trigger == (strength >= 1.0)`,
//! which makes post-hoc ROC re-thresholding at multiplier 1.0 coincide with
//! the live run.

mod cfar;
mod cusum;
mod fft;
mod lipski;
mod median;
mod tsnfa;

pub use cfar::{cfar_alpha_ca, CfarDetector, CfarParams, CfarVariant};
pub use cusum::{CusumDetector, CusumParams};
pub use fft::{fft128, hann128};
pub use lipski::{LipskiDetector, LipskiParams};
pub use median::RingMedian;
pub use tsnfa::{TsnfaDetector, TsnfaParams};

use serde::{Deserialize, Serialize};

use crate::signal::Frame;

/// Detector identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorKind {
    Tsnfa,
    Lipski,
    CaCfar,
    OsCfar,
    Cusum,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 5] = [
        DetectorKind::Tsnfa,
        DetectorKind::Lipski,
        DetectorKind::CaCfar,
        DetectorKind::OsCfar,
        DetectorKind::Cusum,
    ];

    /// Short label used in CLI flags and CSV columns.
    pub fn label(&self) -> &'static str {
        match self {
            DetectorKind::Tsnfa => "tsnfa",
            DetectorKind::Lipski => "lipski",
            DetectorKind::CaCfar => "ca",
            DetectorKind::OsCfar => "os",
            DetectorKind::Cusum => "cusum",
        }
    }

    pub fn parse(s: &str) -> Option<DetectorKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tsnfa" => Some(DetectorKind::Tsnfa),
            "lipski" => Some(DetectorKind::Lipski),
            "ca" | "ca-cfar" | "ca_cfar" => Some(DetectorKind::CaCfar),
            "os" | "os-cfar" | "os_cfar" => Some(DetectorKind::OsCfar),
            "cusum" => Some(DetectorKind::Cusum),
            _ => None,
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-frame decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorOutput {
    pub detector: DetectorKind,
    pub node_id: u32,
    pub frame_index: u64,
    pub trigger: bool,
    /// Dimensionless trigger strength, `>= 0`; `trigger == (strength >= 1)`.
    pub strength: f64,
}

/// Shared per-frame derivations, computed at most once even when several
/// detectors consume the same frame.
#[derive(Default)]
pub struct FrameContext {
    rect: once_cell::unsync::OnceCell<[f64; 64]>,
    hann: once_cell::unsync::OnceCell<[f64; 64]>,
    statistic: once_cell::unsync::OnceCell<f64>,
}

impl FrameContext {
    /// Unwindowed FFT magnitudes.
    pub fn rect_mags(&self, frame: &Frame) -> &[f64; 64] {
        self.rect.get_or_init(|| fft128(&frame.samples, None))
    }

    /// Hann-windowed FFT magnitudes.
    pub fn hann_mags(&self, frame: &Frame) -> &[f64; 64] {
        self.hann.get_or_init(|| fft128(&frame.samples, Some(hann128())))
    }

    /// Broadband frame statistic `X(m)`.
    pub fn statistic(&self, frame: &Frame) -> f64 {
        *self.statistic.get_or_init(|| frame_statistic(frame))
    }
}

/// Streaming detector contract.
pub trait Detector: Send {
    fn kind(&self) -> DetectorKind;

    /// Frames a detector needs before it may emit triggers.
    fn warmup_frames(&self) -> u64;

    /// Consume one frame, advance state, emit the decision. The context
    /// memoizes spectra shared between detectors fed the same frame.
    fn process_ctx(&mut self, frame: &Frame, ctx: &FrameContext) -> DetectorOutput;

    /// Convenience for single-detector streams.
    fn process(&mut self, frame: &Frame) -> DetectorOutput {
        self.process_ctx(frame, &FrameContext::default())
    }
}

/// Canonical parameter set for every detector.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    pub tsnfa: TsnfaParams,
    pub lipski: LipskiParams,
    pub cfar: CfarParams,
    pub cusum: CusumParams,
}

/// Instantiate a detector at the given parameters.
pub fn build_detector(kind: DetectorKind, params: &DetectorParams) -> Box<dyn Detector> {
    match kind {
        DetectorKind::Tsnfa => Box::new(TsnfaDetector::new(params.tsnfa.clone())),
        DetectorKind::Lipski => Box::new(LipskiDetector::new(params.lipski.clone())),
        DetectorKind::CaCfar => Box::new(CfarDetector::new(CfarVariant::CellAveraging, params.cfar.clone())),
        DetectorKind::OsCfar => {
            Box::new(CfarDetector::new(CfarVariant::OrderedStatistic, params.cfar.clone()))
        }
        DetectorKind::Cusum => Box::new(CusumDetector::new(params.cusum.clone())),
    }
}

/// Broadband frame statistic `X(m) = sum x[n]^2` shared by CA/OS-CFAR and
/// CUSUM.
pub fn frame_statistic(frame: &Frame) -> f64 {
    frame.samples.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for kind in DetectorKind::ALL {
            assert_eq!(DetectorKind::parse(kind.label()), Some(kind));
        }
        assert_eq!(DetectorKind::parse("nope"), None);
    }
}
