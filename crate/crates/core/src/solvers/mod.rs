//! Integrators: Euler–Maruyama and Milstein for diagonal-noise Ito SDEs,
//! a Dormand–Prince 5(4) ODE solver, and the Karhunen–Loève pathwise
//! expansion that turns a Stratonovich SDE into a random ODE.

mod kl;
mod noise;
mod rk;
mod sde;

pub use kl::{kl_velocity, kl_path_variance_term, simulate_kl_sde, KlExpansion};
pub use noise::{brownian_increments, BrownianSource, CoarsenedNoise, NoiseStream};
pub use rk::{rk_adaptive, rk_fixed, AdaptiveOptions};
pub use sde::{euler_maruyama, integrate_sde, milstein, Scheme};

use crate::geometry::Polyhedron;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Fixed { dt: f64 },
    Adaptive { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub solver: String,
    pub seed: u64,
    pub sample: u32,
    pub step: StepControl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// One row per time point.
    pub states: Vec<Vec<f64>>,
    /// Per-point membership in `K`, once [`Trajectory::mark_membership`] ran.
    pub in_k: Option<Vec<bool>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    pub fn mark_membership(&mut self, poly: &Polyhedron, tol: f64) {
        self.in_k = Some(self.states.iter().map(|z| poly.contains(z, tol)).collect());
    }

    /// Coordinate `d` of every state.
    pub fn component(&self, d: usize) -> Vec<f64> {
        self.states.iter().map(|z| z[d]).collect()
    }
}

/// Number of fixed steps covering `[t0, t1]`; `dt` must divide the span.
pub(crate) fn fixed_step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    if !(t1 > t0) {
        return Err(Error::Config(format!("horizon must satisfy T > t0, got [{t0}, {t1}]")));
    }
    let n = ((t1 - t0) / dt).round();
    if n < 1.0 || ((n * dt) - (t1 - t0)).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "dt = {dt} does not divide the horizon [{t0}, {t1}]"
        )));
    }
    Ok(n as usize)
}

/// `t0 + k dt`, with the last point pinned to `t1`.
pub(crate) fn time_at(t0: f64, t1: f64, dt: f64, k: usize, n: usize) -> f64 {
    if k == n {
        t1
    } else {
        t0 + k as f64 * dt
    }
}
