//! Green's functions of the damped linear operator `∂t − ν∂xx + α`.
//!
//! The damping `e^{-αt}` is kept as a separate factor throughout, so
//! [`heat_kernel`] and [`spectral_kernel`] are the undamped pair
//! `G(x,t) = e^{-x²/(4νt)}/√(4πνt)` and `g(s,t) = e^{-4π²νs²t}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{forward_fourier, inverse_fourier, Field, Grid, SpectralField};

/// Constants of `u_t − ν u_xx + α u − ε u^n = 0`.
///
/// `gamma` is the coefficient of the codomain Bernoulli equation. It is
/// fixed at `−ε`, the value for which the general Bernoulli solution
/// reduces to the erf closed form at `n = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NwsParams {
    pub nu: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub n: u32,
    pub gamma: f64,
}

impl NwsParams {
    pub fn new(nu: f64, alpha: f64, epsilon: f64, n: u32) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidParams(format!("nu must be positive, got {nu}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParams(format!("alpha must be positive, got {alpha}")));
        }
        if !epsilon.is_finite() {
            return Err(Error::InvalidParams(format!("epsilon must be finite, got {epsilon}")));
        }
        if n < 2 {
            return Err(Error::InvalidParams(format!("n must be at least 2, got {n}")));
        }
        Ok(Self { nu, alpha, epsilon, n, gamma: -epsilon })
    }

    /// `ν = α = ε = 1`, `n = 2`.
    pub fn unit() -> Self {
        Self::new(1.0, 1.0, 1.0, 2).expect("unit parameters are valid")
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.nu, self.alpha, epsilon, self.n)
    }

    pub fn with_n(self, n: u32) -> Result<Self> {
        Self::new(self.nu, self.alpha, self.epsilon, n)
    }

    /// Nonzero spatially uniform equilibrium `u* = (α/ε)^{1/(n−1)}`, for ε > 0.
    pub fn equilibrium(&self) -> Option<f64> {
        (self.epsilon > 0.0).then(|| (self.alpha / self.epsilon).powf(1.0 / (self.n - 1) as f64))
    }
}

/// Undamped heat kernel `G(x,t)`.
pub fn heat_kernel(x: f64, t: f64, params: &NwsParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    let four_nu_t = 4.0 * params.nu * t;
    Ok((-x * x / four_nu_t).exp() / (PI * four_nu_t).sqrt())
}

/// Transformed heat kernel `g(s,t) = e^{-4π²νs²t}`.
pub fn spectral_kernel(s: f64, t: f64, params: &NwsParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("spectral kernel needs t >= 0, got {t}")));
    }
    Ok((-4.0 * PI * PI * params.nu * s * s * t).exp())
}

/// Damped propagator `G(x,t)·e^{-αt}` sampled on a grid.
pub fn propagator_field(grid: Grid, t: f64, params: &NwsParams) -> Result<Field> {
    let damping = (-params.alpha * t).exp();
    let values = grid
        .points()
        .map(|x| heat_kernel(x, t, params).map(|g| g * damping))
        .collect::<Result<Vec<_>>>()?;
    Field::new(grid, values, t)
}

/// `e^{-αt}(f0 ∗ G(·,t))`, evaluated spectrally.
pub fn linear_propagate(f0: &Field, t: f64, params: &NwsParams) -> Result<Field> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("propagation time must be positive, got {t}")));
    }
    let spectrum = forward_fourier(f0);
    let sgrid = spectrum.sgrid();
    let damping = (-params.alpha * t).exp();
    let values = sgrid
        .frequencies()
        .zip(spectrum.values())
        .map(|(s, v)| spectral_kernel(s, t, params).map(|g| v * (g * damping)))
        .collect::<Result<Vec<Complex64>>>()?;
    let propagated = SpectralField::new(sgrid, values, f0.time_stamp() + t)?;
    Ok(inverse_fourier(&propagated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::discrete_delta;

    fn params(nu: f64, alpha: f64) -> NwsParams {
        NwsParams::new(nu, alpha, 0.0, 2).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(NwsParams::new(0.0, 1.0, 1.0, 2).is_err());
        assert!(NwsParams::new(1.0, -1.0, 1.0, 2).is_err());
        assert!(NwsParams::new(1.0, 1.0, 1.0, 1).is_err());
        let p = NwsParams::new(1.0, 2.0, 0.5, 3).unwrap();
        assert_eq!(p.gamma, -0.5);
        assert_eq!(p.equilibrium(), Some(2.0));
        assert_eq!(p.with_epsilon(0.0).unwrap().equilibrium(), None);
    }

    #[test]
    fn heat_kernel_normalisation_point() {
        let p = params(1.0 / (4.0 * PI), 1.0);
        assert!((heat_kernel(0.0, 1.0, &p).unwrap() - 1.0).abs() < 1e-15);
        assert!(heat_kernel(0.0, 0.0, &p).is_err());
        assert!(heat_kernel(0.0, -1.0, &p).is_err());
    }

    #[test]
    fn heat_kernel_unit_mass_and_even() {
        let grid = Grid::new(512, 40.0).unwrap();
        for &(nu, t) in &[(1.0, 0.5), (0.3, 2.0), (2.0, 1.0)] {
            let p = params(nu, 1.0);
            let g = Field::from_fn(grid, t, |x| heat_kernel(x, t, &p).unwrap()).unwrap();
            assert!((g.integral() - 1.0).abs() < 1e-10);
            for x in [0.1, 1.7, 3.3] {
                assert_eq!(heat_kernel(x, t, &p).unwrap(), heat_kernel(-x, t, &p).unwrap());
            }
        }
    }

    #[test]
    fn spectral_kernel_basics() {
        let p = params(0.7, 1.0);
        assert_eq!(spectral_kernel(0.0, 3.0, &p).unwrap(), 1.0);
        assert_eq!(spectral_kernel(2.0, 0.0, &p).unwrap(), 1.0);
        assert!(spectral_kernel(1.0, -0.1, &p).is_err());
        let (s, t1, t2) = (0.4, 0.3, 0.45);
        let prod = spectral_kernel(s, t1, &p).unwrap() * spectral_kernel(s, t2, &p).unwrap();
        assert!((prod - spectral_kernel(s, t1 + t2, &p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn spectral_kernel_matches_fft_of_heat_kernel() {
        let grid = Grid::new(256, 32.0).unwrap();
        for &(nu, t) in &[(1.0, 0.1), (0.5, 1.0), (2.0, 0.3)] {
            let p = params(nu, 1.0);
            let sampled = Field::from_fn(grid, t, |x| heat_kernel(x, t, &p).unwrap()).unwrap();
            let spec = forward_fourier(&sampled);
            for (s, v) in spec.sgrid().frequencies().zip(spec.values()) {
                assert!((v.re - spectral_kernel(s, t, &p).unwrap()).abs() < 1e-8);
                assert!(v.im.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn propagating_delta_gives_damped_kernel() {
        let grid = Grid::new(256, 32.0).unwrap();
        let p = params(1.0, 0.8);
        let t = 0.6;
        let out = linear_propagate(&discrete_delta(grid), t, &p).unwrap();
        let expected = propagator_field(grid, t, &p).unwrap();
        assert!(out.sup_distance(&expected).unwrap() < 1e-8);
    }

    #[test]
    fn propagation_respects_damped_maximum_principle() {
        let grid = Grid::new(128, 20.0).unwrap();
        let p = params(0.5, 1.3);
        let f0 = Field::from_fn(grid, 0.0, |x| (x.sin() + 0.5 * (3.0 * x).cos()) * (-x * x / 10.0).exp()).unwrap();
        for t in [0.05, 0.5, 2.0] {
            let out = linear_propagate(&f0, t, &p).unwrap();
            assert!(out.sup_norm() <= (-p.alpha * t).exp() * f0.sup_norm() * (1.0 + 1e-12));
        }
    }
}
