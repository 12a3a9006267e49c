//! Shared inputs for the benchmarks.

use nwslab::{ExperimentConfig, Field, Grid, NwsParams};

/// Smooth, edge-decayed test field on `n` points over a length-32 domain.
pub fn bump(n: usize, shift: f64) -> Field {
    let grid = Grid::new(n, 32.0).expect("valid grid");
    Field::from_fn(grid, 0.0, |x| (-(x - shift).powi(2) / 2.0).exp() * (1.0 + 0.3 * x.cos())).expect("finite field")
}

pub fn params() -> NwsParams {
    NwsParams::unit()
}

/// Default configuration shrunk so one suite run stays in the millisecond range.
pub fn small_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.apply_override("grid.n_points=64").expect("known key");
    c
}
