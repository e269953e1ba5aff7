//! Karhunen–Loève expansion of Brownian motion on `[0, T]`:
//!
//! ```text
//! dB̂_t = Σ_{r=1}^R √(2/T) cos((2r − 1) π t / (2T)) ξ^r dt,   ξ^r ~ N(0, 1)
//! ```
//!
//! The truncated series is smooth, so the driven equation is an ODE; as
//! `R → ∞` its solutions converge to the Stratonovich SDE.

use std::f64::consts::PI;

use crate::dynamics::{Calculus, DynamicsSpec};
use crate::rng::{Domain, KeyedRng};
use crate::{Error, Result};

use super::{rk_adaptive, rk_fixed, AdaptiveOptions, StepControl, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct KlExpansion {
    pub xi: Vec<f64>,
    pub horizon: f64,
}

impl KlExpansion {
    pub fn new(xi: Vec<f64>, horizon: f64) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::Config("expansion needs R ≥ 1 terms".into()));
        }
        if !(horizon > 0.0) {
            return Err(Error::Config(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { xi, horizon })
    }

    /// Coefficients for coordinate `dim` of sample `sample` under `seed`.
    pub fn from_seed(seed: u64, sample: u32, dim: usize, terms: usize, horizon: f64) -> Result<Self> {
        let rng = KeyedRng::new(seed, Domain::KarhunenLoeve);
        let xi = (0..terms)
            .map(|r| rng.normal(r as u64, dim as u32, sample))
            .collect();
        Self::new(xi, horizon)
    }

    pub fn terms(&self) -> usize {
        self.xi.len()
    }

    /// `B̂_t`, the integral of the velocity from 0 to `t`.
    pub fn path(&self, t: f64) -> f64 {
        let tt = self.horizon;
        self.xi
            .iter()
            .enumerate()
            .map(|(r, &x)| {
                let w = (2 * r + 1) as f64 * PI / (2.0 * tt);
                (2.0 / tt).sqrt() * (w * t).sin() / w * x
            })
            .sum()
    }
}

/// `Σ_r √(2/T) cos((2r − 1) π t / (2T)) ξ^r`, without the `dt`.
pub fn kl_velocity(exp: &KlExpansion, t: f64) -> Result<f64> {
    let tt = exp.horizon;
    let slack = 1e-9 * tt;
    if !(t >= -slack && t <= tt + slack) {
        return Err(Error::Domain(format!("t = {t} outside [0, {tt}]")));
    }
    let amp = (2.0 / tt).sqrt();
    Ok(exp
        .xi
        .iter()
        .enumerate()
        .map(|(r, &x)| amp * ((2 * r + 1) as f64 * PI * t / (2.0 * tt)).cos() * x)
        .sum())
}

/// Contribution of term `r` (1-based) to `Var[B̂_T] / T`: `8 / ((2r − 1)² π²)`.
pub fn kl_path_variance_term(r: usize) -> f64 {
    let k = (2 * r - 1) as f64;
    8.0 / (k * k * PI * PI)
}

/// Integrates `dz/dt = h(t, z) + g(t, z) ⊙ v(t)` on `[0, T]` with one
/// independent expansion per coordinate.
pub fn simulate_kl_sde(
    spec: &DynamicsSpec,
    z0: &[f64],
    horizon: f64,
    terms: usize,
    seed: u64,
    sample: u32,
    step: StepControl,
) -> Result<Trajectory> {
    if spec.calculus != Calculus::Stratonovich {
        return Err(Error::Config(
            "the pathwise expansion converges to the Stratonovich SDE; tag the spec Stratonovich".into(),
        ));
    }
    if z0.len() != spec.dim {
        return Err(Error::Shape {
            expected: spec.dim,
            got: z0.len(),
        });
    }
    let expansions = (0..spec.dim)
        .map(|d| KlExpansion::from_seed(seed, sample, d, terms, horizon))
        .collect::<Result<Vec<_>>>()?;
    let rhs = |t: f64, z: &[f64]| -> Result<Vec<f64>> {
        let mut h = spec.drift.eval(t, z)?;
        let g = spec.diffusion.eval(t, z)?;
        for ((hd, gd), e) in h.iter_mut().zip(&g).zip(&expansions) {
            *hd += gd * kl_velocity(e, t)?;
        }
        Ok(h)
    };
    let mut tr = match step {
        StepControl::Fixed { dt } => rk_fixed(rhs, z0, 0.0, horizon, dt)?,
        StepControl::Adaptive { rtol, atol } => rk_adaptive(rhs, z0, 0.0, horizon, AdaptiveOptions::new(rtol, atol))?,
    };
    tr.meta.solver = "kl_dopri5".into();
    tr.meta.seed = seed;
    tr.meta.sample = sample;
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ConstantField;
    use std::sync::Arc;

    #[test]
    fn velocity_examples() {
        let zero = KlExpansion::new(vec![0.0; 5], 5.0).unwrap();
        assert_eq!(kl_velocity(&zero, 1.3).unwrap(), 0.0);
        let one = KlExpansion::new(vec![1.0], 5.0).unwrap();
        assert!((kl_velocity(&one, 0.0).unwrap() - 0.4f64.sqrt()).abs() < 1e-15);
        assert!((kl_velocity(&one, 0.0).unwrap() - 0.632456).abs() < 1e-6);
        assert!(matches!(kl_velocity(&one, 5.1), Err(Error::Domain(_))));
        assert!(kl_velocity(&one, -0.1).is_err());
        assert!(KlExpansion::new(vec![], 1.0).is_err());
    }

    #[test]
    fn path_is_integral_of_velocity() {
        let e = KlExpansion::from_seed(3, 0, 0, 40, 5.0).unwrap();
        let tr = rk_fixed(|t, _| Ok(vec![kl_velocity(&e, t)?]), &[0.0], 0.0, 5.0, 1e-3).unwrap();
        assert!((tr.final_state()[0] - e.path(5.0)).abs() < 1e-9);
    }

    #[test]
    fn zero_diffusion_reduces_to_ode() {
        let spec = DynamicsSpec::new(
            Arc::new(ConstantField::filled(1, 0.5)),
            Arc::new(ConstantField::zeros(1)),
            Calculus::Stratonovich,
        )
        .unwrap();
        let tr = simulate_kl_sde(&spec, &[1.0], 2.0, 40, 0, 0, StepControl::Fixed { dt: 1e-2 }).unwrap();
        assert!((tr.final_state()[0] - 2.0).abs() < 1e-12);
        assert!(simulate_kl_sde(&spec.with_calculus(Calculus::Ito), &[1.0], 2.0, 40, 0, 0, StepControl::Fixed { dt: 1e-2 }).is_err());
    }
}
