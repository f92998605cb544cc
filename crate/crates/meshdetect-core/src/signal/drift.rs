//! Noise-power drift.

use super::SignalParams;

/// Instantaneous thermal noise power `P(t)`.
///
/// The power drifts sinusoidally in dB around the base power:
/// `P(t) = P0 * 10^(excursion_db * sin(2*pi*t/period) / 10)`.
/// Total function; a zero excursion yields the constant `P0`.
pub fn drift_power(t_s: f64, params: &SignalParams) -> f64 {
    if params.drift_excursion_db == 0.0 {
        return params.base_noise_power;
    }
    let phase = 2.0 * std::f64::consts::PI * t_s / params.drift_period_s;
    params.base_noise_power * 10f64.powf(params.drift_excursion_db * phase.sin() / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_at_origin_is_base_power() {
        let p = SignalParams::default();
        assert_eq!(drift_power(0.0, &p), 1.0);
    }

    #[test]
    fn drift_extremes_match_closed_form() {
        let p = SignalParams::default();
        // Quarter period: sin = 1 -> 10^0.6; three quarters: sin = -1 -> 10^-0.6.
        assert!((drift_power(900.0, &p) - 3.9810717055349722).abs() < 1e-9);
        assert!((drift_power(2700.0, &p) - 0.25118864315095796).abs() < 1e-9);
    }

    #[test]
    fn drift_is_periodic() {
        let p = SignalParams::default();
        for &t in &[0.0, 123.4, 900.0, 1800.5, 3599.99] {
            let a = drift_power(t, &p);
            let b = drift_power(t + 3600.0, &p);
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn drift_stays_within_excursion_bounds() {
        let p = SignalParams::default();
        for i in 0..10_000 {
            let v = drift_power(i as f64 * 0.731, &p);
            assert!(v >= 10f64.powf(-0.6) - 1e-12);
            assert!(v <= 10f64.powf(0.6) + 1e-12);
        }
    }
}
