//! Thin wrappers over `rustfft` for the centred periodic lattices used by
//! every grid in the crate.
//!
//! A lattice of `n` points with spacing `h` stores the sample at coordinate
//! `(j - n/2) * h` at index `j`, so the origin sits at index `n/2`.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalised forward DFT, `X[k] = sum_j x[j] e^{-2 pi i jk/n}`.
pub(crate) fn dft(data: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(data.len()));
    fft.process(data);
}

/// Unnormalised inverse DFT, `x[j] = sum_k X[k] e^{+2 pi i jk/n}`.
pub(crate) fn idft(data: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(data.len()));
    fft.process(data);
}

/// Circular convolution on a centred lattice via the convolution theorem:
/// `out[i] = h * sum_j a[j] b[(i - j + n/2) mod n]`.
pub(crate) fn convolve_centered(a: &[Complex64], b: &[Complex64], spacing: f64) -> Vec<Complex64> {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    dft(&mut fa);
    dft(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    idft(&mut fa);
    let scale = spacing / n as f64;
    (0..n).map(|i| fa[(i + n / 2) % n] * scale).collect()
}

/// Same contract as [`convolve_centered`], evaluated by the O(n²) sum.
pub(crate) fn convolve_centered_direct<T>(a: &[T], b: &[T], spacing: f64) -> Vec<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = a.len();
    debug_assert_eq!(n, b.len());
    let half = n / 2;
    (0..n)
        .map(|i| {
            let mut acc = T::default();
            for (j, &aj) in a.iter().enumerate() {
                acc = acc + aj * b[(i + n + half - j) % n];
            }
            acc * spacing
        })
        .collect()
}
