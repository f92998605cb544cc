//! Independent oracles for tests: brute-force counterparts of the
//! production signal path. Nothing here is used by the implementation.

use num_complex::Complex64;

use crate::FRAME_LEN;

/// Direct O(N^2) DFT magnitudes for bins 0..64. Oracle for the radix-2 FFT.
pub fn naive_dft_magnitudes(samples: &[f64; FRAME_LEN], window: Option<&[f64; FRAME_LEN]>) -> [f64; 64] {
    let mut out = [0.0; 64];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, &x) in samples.iter().enumerate() {
            let w = window.map_or(1.0, |w| w[n]);
            let ang = -2.0 * std::f64::consts::PI * (k as f64) * (n as f64) / FRAME_LEN as f64;
            acc += Complex64::new(ang.cos(), ang.sin()) * (x * w);
        }
        *o = acc.norm();
    }
    out
}

/// Sort-based median: mean of the two middle order statistics for even
/// lengths, the middle one for odd.
pub fn sort_median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sort-based k-th smallest (1-indexed). Oracle for the OS-CFAR rank pick.
pub fn sort_rank(values: &[f64], k: usize) -> f64 {
    assert!(k >= 1 && k <= values.len());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[k - 1]
}
