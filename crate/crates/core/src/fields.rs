//! Uniform periodic grids, sampled fields, and the discrete Fourier pair.
//!
//! The transform convention is the ordinary-frequency one,
//! `F(s) = ∫ f(x) e^{-2πisx} dx`, approximated on the grid by a
//! spacing-weighted FFT. Under this convention the convolution theorem
//! carries no constants: `forward(f ∗ g) = forward(f) · forward(g)`.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// Relative tolerance for the hermitian-symmetry tag.
const HERMITIAN_TOL: f64 = 1e-12;

/// Uniform periodic grid on `[-length/2, length/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    length: f64,
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 2, got {n_points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        Ok(Self { n_points, length })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Index of the `x = 0` sample.
    pub fn origin_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n_points / 2) as f64) * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    pub fn dual(&self) -> SpectralGrid {
        SpectralGrid { n_points: self.n_points, length: self.length }
    }
}

/// Frequency grid dual to a [`Grid`]: `s_k = k / length` for `k ∈ [-n/2, n/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    n_points: usize,
    length: f64,
}

impl SpectralGrid {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.length
    }

    pub fn origin_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn s(&self, k: usize) -> f64 {
        (k as f64 - (self.n_points / 2) as f64) / self.length
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.s(k))
    }

    /// Largest representable |s| (the Nyquist frequency).
    pub fn nyquist(&self) -> f64 {
        self.n_points as f64 / (2.0 * self.length)
    }

    pub fn primal(&self) -> Grid {
        Grid { n_points: self.n_points, length: self.length }
    }
}

/// Real samples of a function on a [`Grid`] at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    time_stamp: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>, time_stamp: f64) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n_points()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if !(time_stamp >= 0.0 && time_stamp.is_finite()) {
            return Err(Error::Domain(format!("time stamp must be nonnegative, got {time_stamp}")));
        }
        Ok(Self { grid, values, time_stamp })
    }

    pub fn from_fn(grid: Grid, time_stamp: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values, time_stamp)
    }

    pub fn zeros(grid: Grid, time_stamp: f64) -> Self {
        Self { grid, values: vec![0.0; grid.n_points()], time_stamp }
    }

    pub fn constant(grid: Grid, time_stamp: f64, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.n_points()], time_stamp)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time_stamp(&self) -> f64 {
        self.time_stamp
    }

    pub fn with_time_stamp(mut self, t: f64) -> Self {
        self.time_stamp = t;
        self
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoid integral over one period (equal to the Riemann sum).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    /// Elementwise map; fails if the result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect(), self.time_stamp)
    }

    /// Pointwise integer power, `f(x)^n`.
    pub fn powi(&self, n: i32) -> Result<Self> {
        self.map(|v| v.powi(n))
    }

    /// Pointwise product with another field on the same grid.
    pub fn mul(&self, other: &Field) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::new(self.grid, values, self.time_stamp)
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &Field, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Self::new(self.grid, values, self.time_stamp)
    }

    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// CSV with columns `x,value_re,value_im` and the time stamp in a header comment.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# time_stamp = {}", self.time_stamp)?;
        writeln!(w, "x,value_re,value_im")?;
        for (x, v) in self.grid.points().zip(&self.values) {
            writeln!(w, "{x},{v},0")?;
        }
        Ok(())
    }
}

/// Complex samples on a [`SpectralGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    sgrid: SpectralGrid,
    values: Vec<Complex64>,
    time_stamp: f64,
    hermitian: bool,
}

impl SpectralField {
    pub fn new(sgrid: SpectralGrid, values: Vec<Complex64>, time_stamp: f64) -> Result<Self> {
        if values.len() != sgrid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} values for a spectral grid of {} points",
                values.len(),
                sgrid.n_points()
            )));
        }
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        if !(time_stamp >= 0.0 && time_stamp.is_finite()) {
            return Err(Error::Domain(format!("time stamp must be nonnegative, got {time_stamp}")));
        }
        Ok(Self { sgrid, values, time_stamp, hermitian: false })
    }

    /// Constructs a field tagged hermitian-symmetric, `F(-s) = conj F(s)`.
    /// The Nyquist sample has no partner and is not checked.
    pub fn new_hermitian(sgrid: SpectralGrid, values: Vec<Complex64>, time_stamp: f64) -> Result<Self> {
        let mut field = Self::new(sgrid, values, time_stamp)?;
        let scale = field.sup_norm().max(f64::MIN_POSITIVE);
        let n = field.values.len();
        for k in 1..n {
            let mirror = field.values[n - k].conj();
            if (field.values[k] - mirror).norm() > HERMITIAN_TOL * scale {
                return Err(Error::Domain(format!("hermitian symmetry violated at index {k}")));
            }
        }
        field.hermitian = true;
        Ok(field)
    }

    pub fn from_fn(sgrid: SpectralGrid, time_stamp: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = sgrid.frequencies().map(f).collect();
        Self::new(sgrid, values, time_stamp)
    }

    pub fn from_real_fn(sgrid: SpectralGrid, time_stamp: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(sgrid, time_stamp, |s| Complex64::new(f(s), 0.0))
    }

    pub fn zeros(sgrid: SpectralGrid, time_stamp: f64) -> Self {
        Self {
            sgrid,
            values: vec![Complex64::new(0.0, 0.0); sgrid.n_points()],
            time_stamp,
            hermitian: true,
        }
    }

    pub fn sgrid(&self) -> SpectralGrid {
        self.sgrid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn time_stamp(&self) -> f64 {
        self.time_stamp
    }

    pub fn with_time_stamp(mut self, t: f64) -> Self {
        self.time_stamp = t;
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    pub fn sup_distance(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm())))
    }

    pub(crate) fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.sgrid != other.sgrid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.sgrid, other.sgrid)));
        }
        Ok(())
    }

    /// CSV with columns `s,value_re,value_im` and the time stamp in a header comment.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# time_stamp = {}", self.time_stamp)?;
        writeln!(w, "s,value_re,value_im")?;
        for (s, v) in self.sgrid.frequencies().zip(&self.values) {
            writeln!(w, "{s},{},{}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Unit-mass discrete delta: `1/spacing` at `x = 0`, zero elsewhere.
pub fn discrete_delta(grid: Grid) -> Field {
    let mut values = vec![0.0; grid.n_points()];
    values[grid.origin_index()] = 1.0 / grid.spacing();
    Field { grid, values, time_stamp: 0.0 }
}

// (-1)^k for the signed frequency index of storage slot `idx`.
fn phase_sign(idx: usize, n: usize) -> f64 {
    if (idx + n / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `F(s_k) ≈ spacing · Σ_j f(x_j) e^{-2πi s_k x_j}`.
pub fn forward_fourier(f: &Field) -> SpectralField {
    let grid = f.grid();
    let n = grid.n_points();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::dft(&mut data);
    let dx = grid.spacing();
    let values = (0..n)
        .map(|idx| {
            // signed frequency k = idx - n/2 lives at DFT bin k mod n
            let bin = (idx + n / 2) % n;
            data[bin] * (dx * phase_sign(idx, n))
        })
        .collect();
    SpectralField {
        sgrid: grid.dual(),
        values,
        time_stamp: f.time_stamp(),
        hermitian: true,
    }
}

/// Complex-valued inverse transform; [`inverse_fourier`] keeps the real part.
pub fn inverse_fourier_complex(spectrum: &SpectralField) -> Vec<Complex64> {
    let sgrid = spectrum.sgrid();
    let n = sgrid.n_points();
    let mut data = vec![Complex64::new(0.0, 0.0); n];
    for (idx, v) in spectrum.values().iter().enumerate() {
        data[(idx + n / 2) % n] = v * phase_sign(idx, n);
    }
    fft::idft(&mut data);
    let ds = sgrid.spacing();
    data.iter().map(|v| v * ds).collect()
}

/// `f(x_j) ≈ spacing_s · Σ_k F(s_k) e^{2πi s_k x_j}`, real part.
pub fn inverse_fourier(spectrum: &SpectralField) -> Field {
    let grid = spectrum.sgrid().primal();
    let values = inverse_fourier_complex(spectrum).into_iter().map(|v| v.re).collect();
    Field { grid, values, time_stamp: spectrum.time_stamp() }
}
