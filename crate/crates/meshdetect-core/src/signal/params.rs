//! Signal model configuration.

use serde::{Deserialize, Serialize};

/// Parameters of the synthetic per-node signal.
///
/// The model is the sum of four components, all scaled relative to the base
/// noise power `P0`:
///
/// - white Gaussian thermal noise whose power `P(t)` drifts sinusoidally
///   around `P0` (`drift_excursion_db` over `drift_period_s`),
/// - a mains cosine at `mains_freq_hz` with amplitude
///   `mains_amp_factor * sqrt(P(t))`,
/// - intermittent digital interference above Nyquist that reaches the
///   sampled band only through aliasing: short broadband *glitches* and
///   longer narrowband *switching regimes* (see below),
/// - scheduled events: damped sinusoids inside `event_band_hz`, injected at
///   an amplitude fixed by the configured SNR against `sqrt(P0)`.
///
/// Digital interference is split into two Poisson populations because the
/// two failure modes it has to exercise live at opposite ends of the
/// time-frequency trade-off: sub-frame glitches spread spectrally and stress
/// per-bin detectors, while multi-frame switching regimes carry enough
/// broadband energy to stress frame-energy detectors. Every knob is
/// configurable; rates of zero disable a population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SignalParams {
    /// Sample rate, fixed at 100 Hz by the frame contract.
    pub sample_rate_hz: f64,
    /// Samples per frame, fixed at 128.
    pub frame_len: usize,
    /// Base thermal noise power P0 (variance units).
    pub base_noise_power: f64,
    /// Peak noise-power drift excursion in dB (+/- around P0).
    pub drift_excursion_db: f64,
    /// Drift period in seconds.
    pub drift_period_s: f64,
    /// Mains interference frequency in Hz.
    pub mains_freq_hz: f64,
    /// Mains amplitude as a multiple of sqrt(P(t)).
    pub mains_amp_factor: f64,

    /// Carrier range for digital interference (Hz, above Nyquist).
    pub burst_freq_range_hz: (f64, f64),
    /// Glitch arrivals per hour per node (Poisson).
    pub burst_rate_per_hr: f64,
    /// Glitch duration range in seconds.
    pub burst_duration_s: (f64, f64),
    /// Ceiling on the glitch amplitude, as a multiple of sqrt(P(t)).
    pub burst_amp_factor_max: f64,
    /// Range of a glitch's peak FFT-bin magnitude in units of sqrt(P(t));
    /// the amplitude is set as `2 * draw / samples` so short and long
    /// glitches carry comparable spectral peaks.
    pub burst_bin_range: (f64, f64),
    /// Minimum spacing between consecutive glitches on one node; a single
    /// interference source emits one burst at a time, and spacing beyond the
    /// frame length keeps glitch spectra from stacking within one FFT.
    pub burst_refractory_s: f64,
    /// Admissible aliased frequency range for glitch carriers, Hz. Glitches
    /// model switching noise from low-rate converters whose harmonics fold
    /// near the bottom of the sampled band.
    pub burst_alias_range_hz: (f64, f64),

    /// Switching-regime starts per hour per node (Poisson).
    pub regime_rate_per_hr: f64,
    /// Switching-regime duration range in seconds.
    pub regime_duration_s: (f64, f64),
    /// Per-frame energy of a regime tone in multiples of P(t), drawn
    /// log-uniformly from this range.
    pub regime_energy_range: (f64, f64),
    /// Admissible aliased (folded) frequency range for regime carriers, Hz.
    /// Carriers are redrawn until the folded frequency lands inside, which
    /// keeps the strong tones clear of the event band.
    pub regime_alias_range_hz: (f64, f64),

    /// Event band in Hz (maps to FFT bins 1..=6 at the fixed geometry).
    pub event_band_hz: (f64, f64),
    /// Range event carriers are drawn from (inside the event band).
    pub event_carrier_range_hz: (f64, f64),
    /// Event duration in seconds.
    pub event_duration_s: f64,
    /// Event amplitude decay constant in seconds.
    pub event_decay_tau_s: f64,
    /// Event arrivals per hour per node (Poisson).
    pub event_rate_per_hr: f64,
    /// Per-event SNR jitter: uniform in +/- this many dB. Zero disables.
    pub snr_jitter_db: f64,
}

impl Default for SignalParams {
    fn default() -> Self {
        Self {
            sample_rate_hz: 100.0,
            frame_len: crate::FRAME_LEN,
            base_noise_power: 1.0,
            drift_excursion_db: 6.0,
            drift_period_s: 3600.0,
            mains_freq_hz: 50.0,
            mains_amp_factor: 0.3,
            burst_freq_range_hz: (800.0, 2000.0),
            burst_rate_per_hr: 6000.0,
            burst_duration_s: (0.08, 0.20),
            burst_amp_factor_max: 6.0,
            burst_bin_range: (12.0, 20.0),
            burst_refractory_s: 1.4,
            burst_alias_range_hz: (0.0, 16.0),
            regime_rate_per_hr: 18.0,
            regime_duration_s: (2.5, 6.5),
            regime_energy_range: (900.0, 3600.0),
            regime_alias_range_hz: (20.0, 46.0),
            event_band_hz: (1.0, 5.0),
            event_carrier_range_hz: (1.25, 4.2),
            event_duration_s: 5.0,
            event_decay_tau_s: 4.0,
            event_rate_per_hr: 1.0,
            snr_jitter_db: 1.5,
        }
    }
}

impl SignalParams {
    /// Thermal noise only: no drift, no mains, no digital interference.
    pub fn noise_only() -> Self {
        Self {
            drift_excursion_db: 0.0,
            mains_amp_factor: 0.0,
            burst_rate_per_hr: 0.0,
            regime_rate_per_hr: 0.0,
            snr_jitter_db: 0.0,
            ..Self::default()
        }
    }

    /// Full noise model (drift kept) with digital and mains interference off.
    pub fn interference_off() -> Self {
        Self {
            mains_amp_factor: 0.0,
            burst_rate_per_hr: 0.0,
            regime_rate_per_hr: 0.0,
            ..Self::default()
        }
    }

    /// Frame period in seconds.
    pub fn frame_period_s(&self) -> f64 {
        self.frame_len as f64 / self.sample_rate_hz
    }

    /// Nominal thermal noise standard deviation sqrt(P0). Event amplitudes
    /// are defined against this scale.
    pub fn noise_std(&self) -> f64 {
        self.base_noise_power.sqrt()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.frame_len != crate::FRAME_LEN {
            return Err(format!("frame_len must be {}", crate::FRAME_LEN));
        }
        if self.sample_rate_hz != 100.0 {
            return Err("sample_rate_hz must be 100".into());
        }
        let nyquist = self.sample_rate_hz / 2.0;
        if self.event_band_hz.1 > nyquist {
            return Err("event band must lie below Nyquist".into());
        }
        if self.burst_freq_range_hz.0 <= nyquist {
            return Err("burst carriers must lie above Nyquist".into());
        }
        if self.event_carrier_range_hz.0 < self.event_band_hz.0
            || self.event_carrier_range_hz.1 > self.event_band_hz.1
        {
            return Err("event carrier range must sit inside the event band".into());
        }
        if self.base_noise_power <= 0.0 {
            return Err("base noise power must be positive".into());
        }
        Ok(())
    }
}
