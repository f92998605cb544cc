//! Streaming event detection over single-channel sensor streams, plus a
//! Monte Carlo benchmark engine that scores five detectors against a common
//! synthetic signal on a simulated mesh network.
//!
//! The crate is organised around four layers:
//!
//! - [`signal`]: the synthetic per-node time series (drifting thermal noise,
//!   mains pickup, aliased digital interference, scheduled events) generated
//!   in 128-sample frames from named deterministic random streams.
//! - [`detectors`]: five frame-streaming detectors behind one contract
//!   (consume a [`signal::Frame`], emit a [`detectors::DetectorOutput`]):
//!   TSNFA, Lipski FFT, CA-CFAR, OS-CFAR and CUSUM.
//! - [`mesh`]: random geometric topology, shortest-path routing to a sink
//!   and a CSMA/CA delivery model with byte accounting.
//! - [`metrics`] / [`harness`]: trigger scoring (detection rate, precision,
//!   false-positive clusters, bandwidth, latency), ROC re-thresholding and
//!   the factorial experiment runner with CSV outputs.

pub mod detectors;
pub mod harness;
pub mod mesh;
pub mod metrics;
pub mod signal;
pub mod streams;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

/// Samples per frame. The whole pipeline is built around 128-sample frames
/// at 100 Hz (a 1.28 s frame period).
pub const FRAME_LEN: usize = 128;

/// Frame period in seconds at the fixed 100 Hz sample rate.
pub const FRAME_PERIOD_S: f64 = FRAME_LEN as f64 / 100.0;
