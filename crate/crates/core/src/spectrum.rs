//! Thin FFT helpers shared by the gating and distortion code.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward DFT, no scaling: `X[k] = Σ x[n] e^{-2πikn/N}`.
pub fn fft(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

/// Inverse DFT scaled by `1/N`, so `ifft(fft(x)) == x`.
pub fn ifft(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// Smallest length ≥ `n` of the form 2^a·3^b·5^c.
pub fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Analytic signal `z` of a real sequence, `Re z == x`, computed on a buffer
/// zero-padded to at least `min_len` samples.
pub fn analytic_signal(x: &[f64], min_len: usize) -> Vec<Complex64> {
    let n = fast_len(min_len.max(x.len()));
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    fft(&mut buf);
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == half) {
            continue;
        }
        if k < n.div_ceil(2) {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft(&mut buf);
    buf
}
