//! Error function family: `erf`, Dawson's integral, and `erfi` in log space.

/// `2/√π`
pub const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

// Rybicki's sampling step. Discretisation error ~ exp(-(π/2h)²) ≈ 1e-27.
const RYBICKI_H: f64 = 0.2;
const RYBICKI_TERMS: usize = 18;
const SERIES_CUTOFF: f64 = 0.2;
const ASYMPTOTIC_CUTOFF: f64 = 50.0;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Dawson's integral `D(x) = e^{-x²} ∫₀ˣ e^{t²} dt`.
pub fn dawson(x: f64) -> f64 {
    let ax = x.abs();
    let value = if ax < SERIES_CUTOFF {
        dawson_series(ax)
    } else if ax > ASYMPTOTIC_CUTOFF {
        dawson_asymptotic(ax)
    } else {
        dawson_rybicki(ax)
    };
    value.copysign(x)
}

// D(x) = Σ (-1)^k 2^k x^{2k+1} / (2k+1)!!
fn dawson_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= -2.0 * x2 / (2.0 * k + 3.0);
        sum += term;
        k += 1.0;
    }
    sum
}

// D(x) ~ 1/(2x) Σ (2k-1)!! / (2x²)^k
fn dawson_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        term *= (2 * k - 1) as f64 * inv;
        sum += term;
    }
    sum / (2.0 * x)
}

// D(x) ≈ π^{-1/2} Σ_{n odd} e^{-(x - nh)²} / n, summed around the nearest
// even multiple of h.
fn dawson_rybicki(x: f64) -> f64 {
    let h = RYBICKI_H;
    let n0 = 2.0 * (0.5 * x / h).round();
    let xp = x - n0 * h;
    let mut e1 = (2.0 * xp * h).exp();
    let e2 = e1 * e1;
    let mut d1 = n0 + 1.0;
    let mut d2 = n0 - 1.0;
    let mut sum = 0.0;
    for i in 1..=RYBICKI_TERMS {
        let c = -(((2 * i - 1) as f64) * h).powi(2);
        let c = c.exp();
        sum += c * (e1 / d1 + 1.0 / (d2 * e1));
        d1 += 2.0;
        d2 -= 2.0;
        e1 *= e2;
    }
    FRAC_1_SQRT_PI * (-xp * xp).exp() * sum
}

/// `ln erfi(y)` for `y > 0`, via `erfi(y) = (2/√π) e^{y²} D(y)`; finite
/// where `erfi` itself overflows.
pub fn ln_erfi(y: f64) -> f64 {
    debug_assert!(y > 0.0);
    TWO_OVER_SQRT_PI.ln() + y * y + dawson(y).ln()
}

/// Imaginary error function `erfi(y) = -i erf(iy)`.
pub fn erfi(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    ln_erfi(y.abs()).exp().copysign(y)
}

/// `ln( erf(√(βt)) / √β )`, analytic in β including β ≤ 0.
///
/// For β < 0 the ratio continues to `erfi(√(|β|t)) / √|β|`. Near `βt = 0`
/// the series `(2/√π)(√t − βt^{3/2}/3 + β²t^{5/2}/10)` is used.
pub fn ln_erf_ratio(beta: f64, t: f64) -> f64 {
    debug_assert!(t > 0.0);
    let bt = beta * t;
    if bt.abs() < 1e-8 {
        let st = t.sqrt();
        (TWO_OVER_SQRT_PI * st * (1.0 - bt / 3.0 + bt * bt / 10.0)).ln()
    } else if beta > 0.0 {
        erf(bt.sqrt()).ln() - 0.5 * beta.ln()
    } else {
        ln_erfi((-bt).sqrt()) - 0.5 * (-beta).ln()
    }
}
