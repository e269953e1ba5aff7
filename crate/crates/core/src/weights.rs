//! Boundary weight `w(z)`.
//!
//! ```text
//! w(z) = tanh( β · ∏_s softmin_s(d) · tanh(α · d_s) ),   d_s = d(u_s, v_s, z)
//! ```
//!
//! `w` is 0 on every facet and close to 1 in the interior; blending with it
//! lets unconstrained dynamics act inside `K` while a fallback takes over at
//! the boundary.

use crate::dual::{Dual, Real};
use crate::geometry::{Polyhedron, BOUNDARY_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    alpha: f64,
    beta: f64,
}

impl WeightParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for WeightParams {
    fn default() -> Self {
        Self {
            alpha: 10.0,
            beta: 10.0,
        }
    }
}

pub(crate) fn require_in_k<S: Real>(poly: &Polyhedron, z: &[S]) -> Result<()> {
    let re: Vec<f64> = z.iter().map(|x| x.re()).collect();
    if re.len() != poly.dim() {
        return Err(Error::Shape {
            expected: poly.dim(),
            got: re.len(),
        });
    }
    if !poly.contains(&re, BOUNDARY_TOL) {
        return Err(Error::Domain(format!(
            "point {re:?} lies outside the polyhedron (min facet distance {:e})",
            poly.min_distance(&re)
        )));
    }
    Ok(())
}

/// Facet distances within a few ulps of zero count as on the facet, so points
/// constructed on a slanted facet get exactly `w = 0` despite rounding.
fn on_facet_threshold<S: Real>(poly: &Polyhedron, z: &[S]) -> f64 {
    let scale = poly
        .halfspaces()
        .iter()
        .flat_map(|h| h.anchor().iter())
        .chain(z.iter().map(|x| x.re()).collect::<Vec<_>>().iter())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    16.0 * f64::EPSILON * scale
}

/// `w(z)` for any scalar type. Distances inside the tolerance band but
/// slightly negative are treated as 0.
pub fn weight_generic<S: Real>(poly: &Polyhedron, params: &WeightParams, z: &[S]) -> Result<S> {
    require_in_k(poly, z)?;
    let d = poly.distances(z);
    let snap = on_facet_threshold(poly, z);
    let m = d.iter().map(|x| x.re()).fold(f64::INFINITY, f64::min);
    // softmin with max-subtraction: exp(−(d_s − min d))
    let e: Vec<S> = d.iter().map(|&ds| (-(ds + (-m))).exp()).collect();
    let mut norm = S::zero();
    for &es in &e {
        norm += es;
    }
    let mut prod = S::one();
    for (&ds, &es) in d.iter().zip(&e) {
        let sat = if ds.re() > snap {
            (ds * params.alpha).tanh()
        } else {
            S::zero()
        };
        prod = prod * (es / norm) * sat;
    }
    Ok((prod * params.beta).tanh())
}

pub fn weight(poly: &Polyhedron, params: &WeightParams, z: &[f64]) -> Result<f64> {
    weight_generic(poly, params, z)
}

/// `∇w(z)` by forward-mode passes along each coordinate.
pub fn weight_gradient(poly: &Polyhedron, params: &WeightParams, z: &[f64]) -> Result<Vec<f64>> {
    if poly.min_distance(z) <= 0.0 {
        log::warn!("weight gradient requested on the boundary at {z:?}; value is one-sided");
    }
    let mut seeded: Vec<Dual> = z.iter().map(|&x| Dual::constant(x)).collect();
    let mut grad = vec![0.0; z.len()];
    for d in 0..z.len() {
        seeded[d].eps = 1.0;
        grad[d] = weight_generic(poly, params, &seeded)?.eps;
        seeded[d].eps = 0.0;
    }
    Ok(grad)
}
