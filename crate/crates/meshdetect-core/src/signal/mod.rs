//! Synthetic signal model: drifting thermal noise, mains pickup, aliased
//! digital interference and scheduled events, generated per node in
//! 128-sample frames from named deterministic streams.

mod drift;
mod params;
mod schedule;
mod synth;
mod waveform;

pub use drift::drift_power;
pub use params::SignalParams;
pub use schedule::{
    folded_freq, schedule_events, schedule_glitches, schedule_regimes, GroundTruthEvent, ToneBurst,
};
pub use synth::{Frame, NodeSignalModel};
pub use waveform::{event_amplitude, event_waveform};
