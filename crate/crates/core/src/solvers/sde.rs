use crate::dynamics::{Calculus, DynamicsSpec};
use crate::field::value_and_diag_jacobian;
use crate::{Error, Result};

use super::{fixed_step_count, time_at, BrownianSource, StepControl, Trajectory, TrajectoryMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    EulerMaruyama,
    Milstein,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::EulerMaruyama => "euler_maruyama",
            Scheme::Milstein => "milstein",
        }
    }
}

/// Fixed-step integration of an Ito SDE on `[t0, t1]`, keeping every
/// `record_every`-th state (the first and last are always kept).
///
/// Euler–Maruyama: `z + h dt + g ⊙ ΔB`.
/// Milstein adds `½ g ⊙ ∂g/∂z ⊙ (ΔB² − dt)` per coordinate.
#[allow(clippy::too_many_arguments)]
pub fn integrate_sde<B: BrownianSource>(
    spec: &DynamicsSpec,
    z0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
    noise: &B,
    scheme: Scheme,
    record_every: usize,
) -> Result<Trajectory> {
    if spec.calculus != Calculus::Ito {
        return Err(Error::Config(
            "SDE schemes integrate Ito dynamics; convert Stratonovich specs first".into(),
        ));
    }
    if z0.len() != spec.dim {
        return Err(Error::Shape {
            expected: spec.dim,
            got: z0.len(),
        });
    }
    let n = fixed_step_count(t0, t1, dt)?;
    if noise.dim() != spec.dim {
        return Err(Error::Config(format!(
            "noise has {} dimensions, dynamics have {}",
            noise.dim(),
            spec.dim
        )));
    }
    if (noise.dt() - dt).abs() > 1e-12 * dt.max(1.0) {
        return Err(Error::Config(format!(
            "noise dt {} differs from solver dt {dt}",
            noise.dt()
        )));
    }
    if noise.n_steps() < n {
        return Err(Error::Config(format!(
            "noise covers {} steps, solver needs {n}",
            noise.n_steps()
        )));
    }
    let every = record_every.max(1);
    let cap = n / every + 2;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    times.push(t0);
    states.push(z0.to_vec());

    let mut z = z0.to_vec();
    let dim = spec.dim;
    for k in 0..n {
        let t = time_at(t0, t1, dt, k, n);
        let abort = |reason: String| Error::NumericAbort {
            step: k,
            time: t,
            reason,
        };
        let h = spec.drift.eval(t, &z).map_err(|e| abort(e.to_string()))?;
        let (g, dg) = match scheme {
            Scheme::EulerMaruyama => (
                spec.diffusion.eval(t, &z).map_err(|e| abort(e.to_string()))?,
                None,
            ),
            Scheme::Milstein => {
                let (g, dg) = value_and_diag_jacobian(spec.diffusion.as_ref(), t, &z)
                    .map_err(|e| abort(e.to_string()))?;
                (g, Some(dg))
            }
        };
        for d in 0..dim {
            let db = noise.increment(k, d);
            let mut step = h[d] * dt + g[d] * db;
            if let Some(dg) = &dg {
                step += 0.5 * g[d] * dg[d] * (db * db - dt);
            }
            z[d] += step;
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(abort(format!("non-finite state {z:?}")));
        }
        if (k + 1) % every == 0 || k + 1 == n {
            times.push(time_at(t0, t1, dt, k + 1, n));
            states.push(z.clone());
        }
    }
    Ok(Trajectory {
        times,
        states,
        in_k: None,
        meta: TrajectoryMeta {
            solver: scheme.name().into(),
            seed: noise.seed(),
            sample: noise.sample(),
            step: StepControl::Fixed { dt },
        },
    })
}

pub fn euler_maruyama<B: BrownianSource>(
    spec: &DynamicsSpec,
    z0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
    noise: &B,
) -> Result<Trajectory> {
    integrate_sde(spec, z0, t0, t1, dt, noise, Scheme::EulerMaruyama, 1)
}

pub fn milstein<B: BrownianSource>(
    spec: &DynamicsSpec,
    z0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
    noise: &B,
) -> Result<Trajectory> {
    integrate_sde(spec, z0, t0, t1, dt, noise, Scheme::Milstein, 1)
}
