//! Periodic convolution engines and residual checkers for the exponent and
//! scalar-distribution identities of convolutions.
//!
//! The identities are measured, never assumed: each checker evaluates every
//! side numerically and reports relative sup-norm residuals.

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fft;
use crate::fields::{Field, SpectralField};
use crate::report::{ClaimReport, VerdictPolicy};

/// Norms below this are treated as identically zero.
const DEGENERATE_NORM: f64 = 1e-300;

/// `(f∗g)(x_i) = Σ_j f(x_j) g(x_i − x_j)·spacing` by the O(N²) sum.
pub fn convolve_direct(f: &Field, g: &Field) -> Result<Field> {
    f.check_same_grid(g)?;
    let out = fft::convolve_centered_direct(f.values(), g.values(), f.grid().spacing());
    Field::new(f.grid(), out, f.time_stamp())
}

/// Same contract as [`convolve_direct`], via the convolution theorem.
pub fn convolve_fft(f: &Field, g: &Field) -> Result<Field> {
    f.check_same_grid(g)?;
    let a: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let b: Vec<Complex64> = g.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let out = fft::convolve_centered(&a, &b, f.grid().spacing());
    Field::new(f.grid(), out.into_iter().map(|v| v.re).collect(), f.time_stamp())
}

/// Convolution over `s` of two spectral fields, via FFT.
pub fn convolve_spectral(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let out = fft::convolve_centered(f.values(), g.values(), f.sgrid().spacing());
    SpectralField::new(f.sgrid(), out, f.time_stamp())
}

/// Convolution over `s` of two spectral fields, by the direct sum.
pub fn convolve_spectral_direct(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let out = fft::convolve_centered_direct(f.values(), g.values(), f.sgrid().spacing());
    SpectralField::new(f.sgrid(), out, f.time_stamp())
}

/// Values that can be convolved with themselves on a shared grid.
pub trait SelfConvolve: Clone {
    fn convolve_with(&self, other: &Self) -> Result<Self>;
}

impl SelfConvolve for Field {
    fn convolve_with(&self, other: &Self) -> Result<Self> {
        convolve_fft(self, other)
    }
}

impl SelfConvolve for SpectralField {
    fn convolve_with(&self, other: &Self) -> Result<Self> {
        convolve_spectral(self, other)
    }
}

/// `g ∗ g ∗ … ∗ g` with `k` factors; `k = 1` returns `g`.
pub fn serial_self_convolve<T: SelfConvolve>(g: &T, k: usize) -> Result<T> {
    if k < 1 {
        return Err(Error::Usage("serial convolution needs at least one factor".into()));
    }
    let mut acc = g.clone();
    for _ in 1..k {
        acc = acc.convolve_with(g)?;
    }
    Ok(acc)
}

fn relative_gap(a: &Field, b: &Field, scale: f64) -> Result<f64> {
    Ok(a.sup_distance(b)? / scale)
}

fn engine_floor(f: &Field) -> f64 {
    f.grid().n_points() as f64 * f64::EPSILON
}

/// The three sides of `(f∗g)^n = f∗g^n = f^n∗g`, each evaluated with both engines.
#[derive(Debug, Clone)]
pub struct ExponentTerms {
    pub power_of_convolution: Field,
    pub exponent_on_g: Field,
    pub exponent_on_f: Field,
    /// Largest FFT-vs-direct discrepancy among the three sides (absolute).
    pub engine_discrepancy: f64,
}

pub fn exponent_terms(f: &Field, g: &Field, n: u32) -> Result<ExponentTerms> {
    if n < 1 {
        return Err(Error::Usage("exponent must be at least 1".into()));
    }
    let p = n as i32;
    let (f_n, g_n) = (f.powi(p)?, g.powi(p)?);

    let lhs = convolve_fft(f, g)?.powi(p)?;
    let lhs_direct = convolve_direct(f, g)?.powi(p)?;
    let on_g = convolve_fft(f, &g_n)?;
    let on_g_direct = convolve_direct(f, &g_n)?;
    let on_f = convolve_fft(&f_n, g)?;
    let on_f_direct = convolve_direct(&f_n, g)?;

    let engine_discrepancy = lhs
        .sup_distance(&lhs_direct)?
        .max(on_g.sup_distance(&on_g_direct)?)
        .max(on_f.sup_distance(&on_f_direct)?);
    Ok(ExponentTerms {
        power_of_convolution: lhs,
        exponent_on_g: on_g,
        exponent_on_f: on_f,
        engine_discrepancy,
    })
}

/// Measures `r₁ = ‖(f∗g)^n − f∗g^n‖/‖(f∗g)^n‖` and `r₂ = ‖(f∗g)^n − f^n∗g‖/‖(f∗g)^n‖`.
/// The report residual is `max(r₁, r₂)`; the error estimate is the relative
/// engine discrepancy, floored at `N·ε_mach`.
pub fn check_exponent_property(f: &Field, g: &Field, n: u32) -> Result<ClaimReport> {
    const ID: &str = "exponent_property";
    const REF: &str = "exponent property of convolution integrals";
    let terms = exponent_terms(f, g, n)?;
    let scale = terms.power_of_convolution.sup_norm();
    if scale < DEGENERATE_NORM {
        return Ok(ClaimReport::inconclusive(ID, REF, "‖(f∗g)^n‖ below 1e-300"));
    }
    let r1 = relative_gap(&terms.power_of_convolution, &terms.exponent_on_g, scale)?;
    let r2 = relative_gap(&terms.power_of_convolution, &terms.exponent_on_f, scale)?;
    let error = terms.engine_discrepancy / scale + engine_floor(f);
    Ok(ClaimReport::measured(ID, REF, r1.max(r2), error, &VerdictPolicy::default())
        .with_meta("claim", "(f*g)^n = f*g^n = f^n*g")
        .with_meta("expected_verdict", "SUPPORTED")
        .with_meta("n", n)
        .with_meta("r1_exponent_on_g", r1)
        .with_meta("r2_exponent_on_f", r2)
        .with_meta("grid", json!({"n_points": f.grid().n_points(), "length": f.grid().length()})))
}

/// The three sides of `h(f∗g) = (hf)∗g = f∗(hg)`.
#[derive(Debug, Clone)]
pub struct ScalarTerms {
    pub outside: Field,
    pub on_f: Field,
    pub on_g: Field,
    pub engine_discrepancy: f64,
}

pub fn scalar_terms(h: &Field, f: &Field, g: &Field) -> Result<ScalarTerms> {
    let (hf, hg) = (h.mul(f)?, h.mul(g)?);
    let outside = h.mul(&convolve_fft(f, g)?)?;
    let outside_direct = h.mul(&convolve_direct(f, g)?)?;
    let on_f = convolve_fft(&hf, g)?;
    let on_f_direct = convolve_direct(&hf, g)?;
    let on_g = convolve_fft(f, &hg)?;
    let on_g_direct = convolve_direct(f, &hg)?;
    let engine_discrepancy = outside
        .sup_distance(&outside_direct)?
        .max(on_f.sup_distance(&on_f_direct)?)
        .max(on_g.sup_distance(&on_g_direct)?);
    Ok(ScalarTerms { outside, on_f, on_g, engine_discrepancy })
}

/// Measures the scalar-distribution identity `h(f∗g) = (hf)∗g = f∗(hg)`.
pub fn check_scalar_distribution(h: &Field, f: &Field, g: &Field) -> Result<ClaimReport> {
    const ID: &str = "scalar_distribution";
    const REF: &str = "product distributes into a convolution";
    let terms = scalar_terms(h, f, g)?;
    let scale = terms.outside.sup_norm();
    if scale < DEGENERATE_NORM {
        let all_zero = terms.on_f.sup_norm() < DEGENERATE_NORM && terms.on_g.sup_norm() < DEGENERATE_NORM;
        return Ok(ClaimReport::inconclusive(ID, REF, "‖h(f∗g)‖ below 1e-300").with_meta("all_sides_zero", all_zero));
    }
    let r1 = relative_gap(&terms.outside, &terms.on_f, scale)?;
    let r2 = relative_gap(&terms.outside, &terms.on_g, scale)?;
    let error = terms.engine_discrepancy / scale + engine_floor(f);
    Ok(ClaimReport::measured(ID, REF, r1.max(r2), error, &VerdictPolicy::default())
        .with_meta("claim", "h(f*g) = (hf)*g = f*(hg)")
        .with_meta("expected_verdict", "SUPPORTED")
        .with_meta("r1_h_on_f", r1)
        .with_meta("r2_h_on_g", r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{discrete_delta, Grid};
    use crate::report::Verdict;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(256, 16.0).unwrap()
    }

    fn gaussian(a: f64) -> Field {
        Field::from_fn(grid(), 0.0, |x| (-a * x * x).exp()).unwrap()
    }

    #[test]
    fn delta_is_identity_for_both_engines() {
        let f = Field::from_fn(grid(), 0.0, |x| (x / 2.0).sin() * (-x * x / 8.0).exp()).unwrap();
        let d = discrete_delta(grid());
        assert_eq!(convolve_direct(&f, &d).unwrap().values(), f.values());
        assert!(convolve_fft(&f, &d).unwrap().sup_distance(&f).unwrap() < 1e-10 * f.sup_norm());
    }

    #[test]
    fn gaussian_self_convolution_closed_form() {
        // e^{-ax²}∗e^{-bx²} = √(π/(a+b)) e^{-ab x²/(a+b)}
        let f = gaussian(PI);
        let expected = Field::from_fn(grid(), 0.0, |x| (-PI * x * x / 2.0).exp() / 2f64.sqrt()).unwrap();
        assert!(convolve_direct(&f, &f).unwrap().sup_distance(&expected).unwrap() < 1e-8);
        assert!(convolve_fft(&f, &f).unwrap().sup_distance(&expected).unwrap() < 1e-8);
    }

    #[test]
    fn direct_engine_commutes() {
        let f = gaussian(1.0);
        let g = Field::from_fn(grid(), 0.0, |x| x * (-x * x / 3.0).exp()).unwrap();
        let fg = convolve_direct(&f, &g).unwrap();
        let gf = convolve_direct(&g, &f).unwrap();
        assert!(fg.sup_distance(&gf).unwrap() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let f = gaussian(1.0);
        let other = Field::zeros(Grid::new(256, 8.0).unwrap(), 0.0);
        assert!(matches!(convolve_direct(&f, &other), Err(Error::GridMismatch(_))));
        assert!(matches!(convolve_fft(&f, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn serial_self_convolve_recursion() {
        let g = gaussian(2.0);
        assert!(matches!(serial_self_convolve(&g, 0), Err(Error::Usage(_))));
        assert_eq!(serial_self_convolve(&g, 1).unwrap(), g);
        let two = serial_self_convolve(&g, 2).unwrap();
        let three = serial_self_convolve(&g, 3).unwrap();
        assert_eq!(three, convolve_fft(&two, &g).unwrap());
    }

    #[test]
    fn spectral_engines_agree() {
        let sg = grid().dual();
        let f = SpectralField::from_fn(sg, 0.0, |s| Complex64::new((-s * s).exp(), s * (-s * s).exp())).unwrap();
        let g = SpectralField::from_real_fn(sg, 0.0, |s| (-2.0 * s * s).exp()).unwrap();
        let a = convolve_spectral(&f, &g).unwrap();
        let b = convolve_spectral_direct(&f, &g).unwrap();
        assert!(a.sup_distance(&b).unwrap() < 1e-12);
    }

    #[test]
    fn exponent_property_unit_power_is_exact() {
        let f = gaussian(PI);
        let g = Field::from_fn(grid(), 0.0, |x| 1.0 / (1.0 + x * x)).unwrap();
        let r = check_exponent_property(&f, &g, 1).unwrap();
        assert_eq!(r.metadata["r1_exponent_on_g"], 0.0);
        assert_eq!(r.metadata["r2_exponent_on_f"], 0.0);
        assert_eq!(r.verdict, Verdict::Supported);
    }

    #[test]
    fn exponent_moves_onto_the_non_delta_factor_exactly() {
        let f = Field::from_fn(grid(), 0.0, |x| 0.5 + 0.3 * (-x * x).exp()).unwrap();
        let d = discrete_delta(grid());
        for n in [2, 3, 5] {
            let g_delta = check_exponent_property(&f, &d, n).unwrap();
            assert!(g_delta.metadata["r2_exponent_on_f"].as_f64().unwrap() <= 1e-12);
            let f_delta = check_exponent_property(&d, &f, n).unwrap();
            assert!(f_delta.metadata["r1_exponent_on_g"].as_f64().unwrap() <= 1e-12);
        }
    }

    #[test]
    fn exponent_onto_delta_itself_is_not_exact() {
        // δ^n = δ / dx^{n-1} on the grid, so f∗δ² = f/dx ≠ f² in general
        let f = gaussian(1.0);
        let d = discrete_delta(grid());
        let r = check_exponent_property(&f, &d, 2).unwrap();
        assert!(r.metadata["r1_exponent_on_g"].as_f64().unwrap() > 0.1);
    }

    #[test]
    fn constant_factor_residual_matches_closed_form() {
        // g ≡ c: (f∗g)² = c²M², f²∗g = c∫f², with M = ∫f
        let f = gaussian(PI);
        let c = 0.7;
        let g = Field::constant(grid(), 0.0, c).unwrap();
        let terms = exponent_terms(&f, &g, 2).unwrap();
        let lhs = c * c; // M = 1
        let on_f = c / 2f64.sqrt(); // ∫e^{-2πx²} = 1/√2
        let on_g = c * c; // f∗c² = c²M
        let i = grid().origin_index();
        assert!((terms.power_of_convolution.values()[i] - lhs).abs() < 1e-12);
        assert!((terms.exponent_on_f.values()[i] - on_f).abs() < 1e-12);
        assert!((terms.exponent_on_g.values()[i] - on_g).abs() < 1e-12);
    }

    #[test]
    fn gaussian_exponent_gap_at_origin() {
        let f = gaussian(PI);
        let terms = exponent_terms(&f, &f, 2).unwrap();
        let i = grid().origin_index();
        assert!((terms.power_of_convolution.values()[i] - 0.5).abs() < 1e-12);
        assert!((terms.exponent_on_g.values()[i] - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let r = check_exponent_property(&f, &f, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
    }

    #[test]
    fn scalar_constant_is_exact_and_linear_h_is_not() {
        let f = gaussian(PI);
        let c = Field::constant(grid(), 0.0, 2.5).unwrap();
        let r = check_scalar_distribution(&c, &f, &f).unwrap();
        assert!(r.residual <= 1e-12);
        assert_eq!(r.verdict, Verdict::Supported);

        let x = Field::from_fn(grid(), 0.0, |x| x).unwrap();
        let r = check_scalar_distribution(&x, &f, &f).unwrap();
        assert!(r.residual > 0.1);
        assert_eq!(r.verdict, Verdict::Refuted);
    }

    #[test]
    fn scalar_zero_is_degenerate() {
        let f = gaussian(PI);
        let r = check_scalar_distribution(&Field::zeros(grid(), 0.0), &f, &f).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.verdict, crate::report::Verdict::Inconclusive);
        assert_eq!(r.metadata["all_sides_zero"], true);
    }
}
