//! 128-point radix-2 FFT and the Hann window.

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::FRAME_LEN;

const HALF: usize = FRAME_LEN / 2;

static TWIDDLES: Lazy<[Complex64; HALF]> = Lazy::new(|| {
    let mut t = [Complex64::new(0.0, 0.0); HALF];
    for (k, v) in t.iter_mut().enumerate() {
        let ang = -2.0 * std::f64::consts::PI * k as f64 / FRAME_LEN as f64;
        *v = Complex64::new(ang.cos(), ang.sin());
    }
    t
});

static HANN: Lazy<[f64; FRAME_LEN]> = Lazy::new(|| {
    let mut w = [0.0; FRAME_LEN];
    for (n, v) in w.iter_mut().enumerate() {
        *v = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / FRAME_LEN as f64).cos());
    }
    w
});

/// Periodic Hann window of length 128.
pub fn hann128() -> &'static [f64; FRAME_LEN] {
    &HANN
}

/// Magnitudes `|X_k|` for bins `k = 0..63` of the 128-point FFT of one
/// frame, with an optional window applied element-wise first.
///
/// Matches the naive DFT to better than 1e-9 relative error (see tests).
pub fn fft128(samples: &[f64; FRAME_LEN], window: Option<&[f64; FRAME_LEN]>) -> [f64; 64] {
    let mut buf = [Complex64::new(0.0, 0.0); FRAME_LEN];
    match window {
        Some(w) => {
            for i in 0..FRAME_LEN {
                buf[i] = Complex64::new(samples[i] * w[i], 0.0);
            }
        }
        None => {
            for i in 0..FRAME_LEN {
                buf[i] = Complex64::new(samples[i], 0.0);
            }
        }
    }

    // Bit-reverse permutation (7 bits).
    for i in 0..FRAME_LEN {
        let j = ((i as u32).reverse_bits() >> (32 - 7)) as usize;
        if j > i {
            buf.swap(i, j);
        }
    }

    // Iterative Cooley-Tukey butterflies.
    let mut len = 2;
    while len <= FRAME_LEN {
        let stride = FRAME_LEN / len;
        let half = len / 2;
        let mut start = 0;
        while start < FRAME_LEN {
            for k in 0..half {
                let w = TWIDDLES[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
            start += len;
        }
        len *= 2;
    }

    let mut mags = [0.0; 64];
    for (k, m) in mags.iter_mut().enumerate() {
        *m = buf[k].norm();
    }
    mags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::naive_dft_magnitudes;
    use rand::Rng;

    #[test]
    fn dc_input_maps_to_bin_zero_only() {
        let samples = [0.75; FRAME_LEN];
        let mags = fft128(&samples, None);
        assert!((mags[0] - 128.0 * 0.75).abs() < 1e-9);
        for &m in &mags[1..] {
            assert!(m < 1e-9);
        }
    }

    #[test]
    fn exact_bin_sine_concentrates_in_one_bin() {
        // sin(2*pi*0.78125*t) at amplitude A lands entirely in bin 1 with
        // magnitude A*L/2 = 64*A.
        let amp = 1.7;
        let mut samples = [0.0; FRAME_LEN];
        for (n, s) in samples.iter_mut().enumerate() {
            let t = n as f64 / 100.0;
            *s = amp * (2.0 * std::f64::consts::PI * 0.78125 * t).sin();
        }
        let mags = fft128(&samples, None);
        assert!((mags[1] - 64.0 * amp).abs() < 1e-8, "bin1 {}", mags[1]);
        for (k, &m) in mags.iter().enumerate() {
            if k != 1 {
                assert!(m < 1e-7, "bin {k} = {m}");
            }
        }
    }

    #[test]
    fn matches_naive_dft_on_random_frames() {
        let mut rng = crate::streams::stream_rng(11, &[0xF]);
        for _ in 0..100 {
            let mut samples = [0.0; FRAME_LEN];
            for s in samples.iter_mut() {
                *s = rng.gen_range(-3.0..3.0);
            }
            for window in [None, Some(hann128())] {
                let fast = fft128(&samples, window);
                let slow = naive_dft_magnitudes(&samples, window);
                for k in 0..64 {
                    let scale = slow[k].max(1.0);
                    assert!(
                        (fast[k] - slow[k]).abs() / scale < 1e-9,
                        "bin {k}: {} vs {}",
                        fast[k],
                        slow[k]
                    );
                }
            }
        }
    }

    #[test]
    fn hann_window_shape() {
        let w = hann128();
        assert_eq!(w[0], 0.0);
        assert!((w[64] - 1.0).abs() < 1e-12);
        let sum: f64 = w.iter().sum();
        assert!((sum - 64.0).abs() < 1e-9); // coherent gain 0.5
    }
}
