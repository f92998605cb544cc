//! Event waveform.

use super::GroundTruthEvent;

/// Peak amplitude of an event: `10^(snr_db/20)` times the noise standard
/// deviation, so an 18 dB event starts at 7.94x the noise std and a 12 dB
/// event at 3.98x.
pub fn event_amplitude(event: &GroundTruthEvent, noise_std: f64) -> f64 {
    10f64.powf(event.snr_db / 20.0) * noise_std
}

/// Event sample at `t_rel_s` seconds after onset: a damped sinusoid
/// `A * exp(-t/tau) * sin(2*pi*f*t)`. Zero outside `[0, duration]`.
pub fn event_waveform(t_rel_s: f64, event: &GroundTruthEvent, noise_std: f64, decay_tau_s: f64) -> f64 {
    if t_rel_s < 0.0 || t_rel_s > event.duration_s {
        return 0.0;
    }
    let amp = event_amplitude(event, noise_std);
    amp * (-t_rel_s / decay_tau_s).exp() * (std::f64::consts::TAU * event.carrier_hz * t_rel_s).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn event(snr_db: f64) -> GroundTruthEvent {
        GroundTruthEvent {
            node_id: 0,
            event_index: 0,
            onset_s: 1000.0,
            duration_s: 5.0,
            carrier_hz: 2.5,
            snr_db,
        }
    }

    #[test]
    fn waveform_starts_at_zero() {
        assert_eq!(event_waveform(0.0, &event(18.0), 1.0, 2.5), 0.0);
    }

    #[test]
    fn amplitude_ratio_matches_snr() {
        // 18 dB -> 7.94x noise std, 12 dB -> 3.98x.
        assert!((event_amplitude(&event(18.0), 1.0) - 7.943282347242816).abs() < 5e-3);
        assert!((event_amplitude(&event(12.0), 1.0) - 3.981071705534972).abs() < 5e-3);
    }

    #[test]
    fn waveform_is_zero_outside_window() {
        let e = event(12.0);
        assert_eq!(event_waveform(-0.1, &e, 1.0, 2.5), 0.0);
        assert_eq!(event_waveform(5.1, &e, 1.0, 2.5), 0.0);
    }

    #[test]
    fn envelope_decays_with_tau() {
        let e = event(12.0);
        let a = event_amplitude(&e, 1.0);
        // Peak of |waveform| near t where sin ~ 1 at t ~ (1/4)/2.5 s.
        let t = 0.1;
        let expected = a * (-t / 2.5f64).exp() * (std::f64::consts::TAU * 2.5 * t).sin();
        assert!((event_waveform(t, &e, 1.0, 2.5) - expected).abs() < 1e-12);
    }
}
