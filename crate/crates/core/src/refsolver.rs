//! Pseudo-spectral reference solver for `u_t − ν u_xx + α u − ε u^n = 0` on a
//! periodic grid, and the PDE residual used to test candidate solutions.
//!
//! Time stepping is second-order exponential Runge–Kutta (ETD2RK): the linear
//! part `−4π²νs² − α` is propagated exactly per Fourier mode and the
//! nonlinearity `ε u^n` enters through the `φ₁`, `φ₂` weights. Uniform
//! equilibria are fixed points of the scheme to rounding.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{dft, idft};
use crate::fields::{Field, Grid};
use crate::kernels::NwsParams;

/// States whose sup norm exceeds this are reported as blow-up.
pub const OVERFLOW_GUARD: f64 = 1e12;

// s² for every raw DFT bin of the grid
fn squared_frequencies(grid: Grid) -> Vec<f64> {
    let n = grid.n_points();
    let l = grid.length();
    (0..n)
        .map(|k| {
            let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            let s = signed / l;
            s * s
        })
        .collect()
}

fn spectrum(values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft(&mut data);
    data
}

fn physical(mut data: Vec<Complex64>) -> Vec<f64> {
    idft(&mut data);
    let scale = 1.0 / data.len() as f64;
    data.iter().map(|v| v.re * scale).collect()
}

/// `u_xx` by spectral differentiation.
pub fn second_derivative(u: &Field) -> Field {
    let s2 = squared_frequencies(u.grid());
    let mut data = spectrum(u.values());
    for (v, &q) in data.iter_mut().zip(&s2) {
        *v *= -4.0 * PI * PI * q;
    }
    Field::new(u.grid(), physical(data), u.time_stamp()).expect("differentiating finite data stays finite")
}

/// Bound on the spectral `u_xx` error: the sup-norm contribution of the top
/// quarter of the resolved band, which is where truncation and the
/// periodic-wrap mismatch of non-periodic data show up.
pub fn second_derivative_tail(u: &Field) -> f64 {
    let s2 = squared_frequencies(u.grid());
    let data = spectrum(u.values());
    let n = data.len();
    let edge_band = {
        let s_edge = (3 * n / 8) as f64 / u.grid().length();
        s_edge * s_edge
    };
    data.iter()
        .zip(&s2)
        .filter(|(_, &q)| q > edge_band)
        .map(|(v, &q)| v.norm() * 4.0 * PI * PI * q)
        .sum::<f64>()
        / n as f64
}

fn nonlinearity(u: &[f64], params: &NwsParams) -> Vec<f64> {
    u.iter().map(|&v| params.epsilon * v.powi(params.n as i32)).collect()
}

// u_t − ν u_xx + α u − ε u^n from a given time derivative
fn assemble_residual(u: &Field, u_t: &[f64], params: &NwsParams) -> Result<Field> {
    let u_xx = second_derivative(u);
    let values = u
        .values()
        .iter()
        .zip(u_t)
        .zip(u_xx.values())
        .map(|((&v, &dv), &d2v)| dv - params.nu * d2v + params.alpha * v - params.epsilon * v.powi(params.n as i32))
        .collect();
    Field::new(u.grid(), values, u.time_stamp())
}

/// Residual field and a bound on its discretisation error.
#[derive(Debug, Clone)]
pub struct ResidualEstimate {
    pub residual: Field,
    /// Richardson estimate of the central-difference error, the
    /// cancellation floor of the difference quotient, and the spectral-tail
    /// bound on the `u_xx` error.
    pub error_estimate: f64,
}

/// Central-difference step used for `u_t`: `1e-5 · max(t, 1)`.
pub fn fd_step(t: f64) -> f64 {
    1e-5 * t.max(1.0)
}

/// `u_t − ν u_xx + α u − ε u^n` for a candidate `u(·, t)`, with `u_t` by
/// central differences and `u_xx` spectrally.
pub fn pde_residual(u: &dyn Fn(f64) -> Result<Field>, t: f64, params: &NwsParams) -> Result<Field> {
    pde_residual_estimate(u, t, params).map(|r| r.residual)
}

pub fn pde_residual_estimate(u: &dyn Fn(f64) -> Result<Field>, t: f64, params: &NwsParams) -> Result<ResidualEstimate> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("residual time must be positive, got {t}")));
    }
    let h = fd_step(t);
    let centre = u(t)?;
    let (plus, minus) = (u(t + h)?, u(t - h)?);
    let (plus2, minus2) = (u(t + 2.0 * h)?, u(t - 2.0 * h)?);
    centre.check_same_grid(&plus)?;
    centre.check_same_grid(&minus)?;

    let diff = |a: &Field, b: &Field, step: f64| -> Vec<f64> {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y) / (2.0 * step)).collect()
    };
    let u_t = diff(&plus, &minus, h);
    let u_t_coarse = diff(&plus2, &minus2, 2.0 * h);
    // the h-quotient's truncation error is about a third of the gap to the 2h-quotient
    let richardson = u_t.iter().zip(&u_t_coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / 3.0;
    let roundoff = 4.0 * f64::EPSILON * centre.sup_norm() / h;

    let spatial = params.nu * second_derivative_tail(&centre);

    Ok(ResidualEstimate {
        residual: assemble_residual(&centre, &u_t, params)?,
        error_estimate: richardson + roundoff + spatial,
    })
}

fn phi(order: u32, z: f64) -> f64 {
    if z.abs() < 0.2 {
        // Σ z^j / (j + order)!
        let mut term = (1..=order).map(f64::from).product::<f64>().recip();
        let mut sum = term;
        for j in 1..20 {
            term *= z / f64::from(j + order);
            sum += term;
        }
        sum
    } else {
        match order {
            1 => z.exp_m1() / z,
            2 => (z.exp_m1() - z) / (z * z),
            _ => unreachable!("only φ₁ and φ₂ are used"),
        }
    }
}

/// ETD2RK stepper with the per-mode weights for a fixed grid and `dt`.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    dt: f64,
    params: NwsParams,
    decay: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: Grid, dt: f64, params: NwsParams) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let z: Vec<f64> = squared_frequencies(grid)
            .into_iter()
            .map(|q| (-4.0 * PI * PI * params.nu * q - params.alpha) * dt)
            .collect();
        Ok(Self {
            grid,
            dt,
            params,
            decay: z.iter().map(|z| z.exp()).collect(),
            phi1: z.iter().map(|&z| dt * phi(1, z)).collect(),
            phi2: z.iter().map(|&z| dt * phi(2, z)).collect(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `state` from its time stamp by `dt`. If the result is not
    /// finite or exceeds [`OVERFLOW_GUARD`], returns [`Error::BlowUp`]
    /// carrying `state`.
    pub fn step(&self, state: &Field) -> Result<Field> {
        if state.grid() != self.grid {
            return Err(Error::GridMismatch("state grid differs from the stepper grid".into()));
        }
        let u_hat = spectrum(state.values());
        let n_u = spectrum(&nonlinearity(state.values(), &self.params));

        let a_hat: Vec<Complex64> = (0..u_hat.len())
            .map(|k| u_hat[k] * self.decay[k] + n_u[k] * self.phi1[k])
            .collect();
        let a = physical(a_hat.clone());
        let n_a = spectrum(&nonlinearity(&a, &self.params));

        let next: Vec<Complex64> = (0..u_hat.len()).map(|k| a_hat[k] + (n_a[k] - n_u[k]) * self.phi2[k]).collect();
        let values = physical(next);

        let t_next = state.time_stamp() + self.dt;
        let blown = values.iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW_GUARD);
        if blown {
            return Err(Error::BlowUp { time: state.time_stamp(), last: Box::new(state.clone()) });
        }
        Field::new(self.grid, values, t_next)
    }
}

/// One step from `t` to `t + dt`.
pub fn step(state: &Field, t: f64, dt: f64, params: &NwsParams) -> Result<Field> {
    let stamped = state.clone().with_time_stamp(t);
    Stepper::new(state.grid(), dt, *params)?.step(&stamped)
}

/// Recorded evolution. `blow_up` holds the time of the last finite state
/// when the run stopped early.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    pub blow_up: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &Field {
        self.states.last().expect("trajectories hold at least the initial state")
    }

    /// PDE residual at an interior record, with `u_t` by central
    /// differences between the neighbouring records.
    pub fn residual_at(&self, index: usize, params: &NwsParams) -> Result<Field> {
        if index == 0 || index + 1 >= self.states.len() {
            return Err(Error::Usage(format!("record {index} has no neighbours on both sides")));
        }
        let (prev, next) = (&self.states[index - 1], &self.states[index + 1]);
        let span = self.times[index + 1] - self.times[index - 1];
        let u_t: Vec<f64> = next.values().iter().zip(prev.values()).map(|(a, b)| (a - b) / span).collect();
        assemble_residual(&self.states[index], &u_t, params)
    }

    /// Long-format CSV with columns `t,x,u`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x,u")?;
        for (t, state) in self.times.iter().zip(&self.states) {
            for (x, u) in state.grid().points().zip(state.values()) {
                writeln!(w, "{t:e},{x:e},{u:e}")?;
            }
        }
        Ok(())
    }
}

/// Integrates from the initial time stamp to `t_end`, recording every step.
pub fn solve(initial: &Field, t_end: f64, dt: f64, params: &NwsParams) -> Result<Trajectory> {
    solve_with_cadence(initial, t_end, dt, params, 1)
}

/// As [`solve`], recording every `cadence` steps and always the last state.
/// `dt` is shrunk if needed so that a whole number of steps reaches `t_end`.
pub fn solve_with_cadence(initial: &Field, t_end: f64, dt: f64, params: &NwsParams, cadence: usize) -> Result<Trajectory> {
    let t0 = initial.time_stamp();
    let duration = t_end - t0;
    if !(dt > 0.0 && dt <= duration) {
        return Err(Error::Domain(format!("need 0 < dt <= t_end - t0, got dt = {dt}, span {duration}")));
    }
    if cadence == 0 {
        return Err(Error::Usage("recording cadence must be at least 1".into()));
    }
    let steps = (duration / dt - 1e-9).ceil() as usize;
    let stepper = Stepper::new(initial.grid(), duration / steps as f64, *params)?;

    let mut traj = Trajectory { times: vec![t0], states: vec![initial.clone()], blow_up: None };
    let mut current = initial.clone();
    for k in 1..=steps {
        match stepper.step(&current) {
            Ok(next) => current = next.with_time_stamp(t0 + k as f64 * stepper.dt()),
            Err(Error::BlowUp { time, last }) => {
                if traj.times.last() != Some(&time) {
                    traj.times.push(time);
                    traj.states.push(*last);
                }
                traj.blow_up = Some(time);
                return Ok(traj);
            }
            Err(e) => return Err(e),
        }
        if k % cadence == 0 || k == steps {
            traj.times.push(current.time_stamp());
            traj.states.push(current.clone());
        }
    }
    Ok(traj)
}
