//! Drift/diffusion pairs: unconstrained, sigmoid-transformed, absorbed,
//! weighted-sums (WSP), stationary, and the Stratonovich-to-Ito correction.
//!
//! All diffusions are diagonal: `dz = h(t, z) dt + diag(g(t, z)) dB`.

use std::fmt;
use std::sync::Arc;

use crate::dual::Real;
use crate::field::{
    check_len, scalar_gradient, value_and_diag_jacobian, Field, GenericField, SharedField,
    SharedScalarField,
};
use crate::geometry::Polyhedron;
use crate::nets::{mlp_init, Activation, MlpField, OutputMap};
use crate::rng::derive_seed;
use crate::weights::{weight_generic, WeightParams};
use crate::{Dual, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Calculus {
    Ito,
    Stratonovich,
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calculus::Ito => "ito",
            Calculus::Stratonovich => "stratonovich",
        })
    }
}

#[derive(Clone)]
pub struct DynamicsSpec {
    pub drift: SharedField,
    pub diffusion: SharedField,
    pub calculus: Calculus,
    pub dim: usize,
}

impl fmt::Debug for DynamicsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicsSpec")
            .field("calculus", &self.calculus)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl DynamicsSpec {
    pub fn new(drift: SharedField, diffusion: SharedField, calculus: Calculus) -> Result<Self> {
        let dim = drift.dim_in();
        for (name, f) in [("drift", &drift), ("diffusion", &diffusion)] {
            if f.dim_in() != dim || f.dim_out() != dim {
                return Err(Error::Config(format!(
                    "{name} must map R^{dim} → R^{dim}, got R^{} → R^{}",
                    f.dim_in(),
                    f.dim_out()
                )));
            }
        }
        Ok(Self {
            drift,
            diffusion,
            calculus,
            dim,
        })
    }

    pub fn with_calculus(&self, calculus: Calculus) -> Self {
        Self {
            calculus,
            ..self.clone()
        }
    }

    pub fn drift_at(&self, t: f64, z: &[f64]) -> Result<Vec<f64>> {
        self.drift.eval(t, z)
    }

    pub fn diffusion_at(&self, t: f64, z: &[f64]) -> Result<Vec<f64>> {
        self.diffusion.eval(t, z)
    }
}

/// Hidden widths of the base networks: three layers of 64 units.
pub const PAPER_HIDDEN: [usize; 3] = [64, 64, 64];
const DRIFT_ROLE: u64 = 1;
const DIFFUSION_ROLE: u64 = 2;

/// Unconstrained dynamics with an MLP drift and a softplus MLP diffusion, both
/// of sizes `[D, hidden.., D]`. The two networks get seeds derived from
/// `seed`.
pub fn mlp_dynamics(
    dim: usize,
    hidden: &[usize],
    activation: Activation,
    seed: u64,
    calculus: Calculus,
) -> Result<DynamicsSpec> {
    let sizes: Vec<usize> = std::iter::once(dim)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(dim))
        .collect();
    let h = mlp_init(&sizes, activation, derive_seed(seed, DRIFT_ROLE))?;
    let g = mlp_init(&sizes, activation, derive_seed(seed, DIFFUSION_ROLE))?;
    DynamicsSpec::new(
        Arc::new(MlpField::new(h, OutputMap::Identity)),
        Arc::new(MlpField::new(g, OutputMap::Softplus)),
        calculus,
    )
}

/// `γ (z* − z) / (‖z* − z‖ + ε)`, a bounded pull toward the Chebyshev center.
pub fn center_pull_generic<S: Real>(poly: &Polyhedron, gamma: f64, eps: f64, z: &[S]) -> Vec<S> {
    let (center, _) = poly.chebyshev_center();
    let diff: Vec<S> = z
        .iter()
        .zip(center)
        .map(|(&zi, &ci)| -zi + ci)
        .collect();
    let sq = diff.iter().fold(S::zero(), |acc, &d| acc + d * d);
    // the norm is not differentiable at z*, but its product with z* − z is
    let norm = if sq.re() > 0.0 { sq.sqrt() } else { S::zero() };
    let denom = norm + eps;
    diff.into_iter().map(|d| d * gamma / denom).collect()
}

pub fn center_pull(poly: &Polyhedron, gamma: f64, eps: f64, z: &[f64]) -> Vec<f64> {
    center_pull_generic(poly, gamma, eps, z)
}

#[derive(Clone)]
pub struct WspConfig {
    /// Unconstrained drift and (nonnegative) diffusion.
    pub base: DynamicsSpec,
    pub poly: Arc<Polyhedron>,
    pub weights: WeightParams,
    pub gamma: f64,
    pub eps: f64,
}

impl WspConfig {
    pub const DEFAULT_GAMMA: f64 = 1.0;
    pub const DEFAULT_EPS: f64 = 0.01;

    pub fn new(base: DynamicsSpec, poly: Arc<Polyhedron>) -> Self {
        Self {
            base,
            poly,
            weights: WeightParams::default(),
            gamma: Self::DEFAULT_GAMMA,
            eps: Self::DEFAULT_EPS,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.base.dim != self.poly.dim() {
            return Err(Error::Config(format!(
                "base dynamics are {}-dimensional but the polyhedron is {}-dimensional",
                self.base.dim,
                self.poly.dim()
            )));
        }
        Ok(())
    }
}

/// `w(z) h̃(t, z) + (1 − w(z)) c_h(z)`.
pub struct WspDrift {
    base: SharedField,
    poly: Arc<Polyhedron>,
    weights: WeightParams,
    gamma: f64,
    eps: f64,
}

impl GenericField for WspDrift {
    fn dim_in(&self) -> usize {
        self.poly.dim()
    }
    fn dim_out(&self) -> usize {
        self.poly.dim()
    }
    fn apply<S: Real>(&self, t: f64, z: &[S]) -> Result<Vec<S>> {
        let w = weight_generic(&self.poly, &self.weights, z)?;
        let f = S::eval_field(self.base.as_ref(), t, z)?;
        let c = center_pull_generic(&self.poly, self.gamma, self.eps, z);
        let one_minus = -w + 1.0;
        Ok(f.into_iter()
            .zip(c)
            .map(|(fi, ci)| w * fi + one_minus * ci)
            .collect())
    }
}

/// `w(z) g̃(t, z)`; the fallback diffusion is 0.
pub struct WspDiffusion {
    base: SharedField,
    poly: Arc<Polyhedron>,
    weights: WeightParams,
}

impl WspDiffusion {
    pub fn new(base: SharedField, poly: Arc<Polyhedron>, weights: WeightParams) -> Result<Self> {
        check_len(poly.dim(), base.dim_in())?;
        check_len(poly.dim(), base.dim_out())?;
        Ok(Self {
            base,
            poly,
            weights,
        })
    }
}

impl GenericField for WspDiffusion {
    fn dim_in(&self) -> usize {
        self.poly.dim()
    }
    fn dim_out(&self) -> usize {
        self.poly.dim()
    }
    fn apply<S: Real>(&self, t: f64, z: &[S]) -> Result<Vec<S>> {
        let w = weight_generic(&self.poly, &self.weights, z)?;
        let g = S::eval_field(self.base.as_ref(), t, z)?;
        Ok(g.into_iter().map(|gi| w * gi).collect())
    }
}

/// Weighted-sums parameterization of `cfg.base`: unconstrained dynamics in
/// the interior, an inward pull and zero noise on the boundary.
pub fn make_wsp(cfg: &WspConfig) -> Result<DynamicsSpec> {
    cfg.validate()?;
    let drift = WspDrift {
        base: cfg.base.drift.clone(),
        poly: cfg.poly.clone(),
        weights: cfg.weights,
        gamma: cfg.gamma,
        eps: cfg.eps,
    };
    let diffusion = WspDiffusion::new(cfg.base.diffusion.clone(), cfg.poly.clone(), cfg.weights)?;
    DynamicsSpec::new(Arc::new(drift), Arc::new(diffusion), cfg.base.calculus)
}

fn require_one_dim(spec_dim: usize, what: &str) -> Result<()> {
    if spec_dim == 1 {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} is defined for 1-dimensional state only")))
    }
}

#[inline]
fn sigmoid_polys<S: Real>(z: S) -> (S, S) {
    let z2 = z * z;
    // z − z² and (2z³ − 3z² + z) / 2
    (z + (-z2), (z2 * z * 2.0 + z2 * (-3.0) + z) * 0.5)
}

fn logit<S: Real>(z: S) -> Result<S> {
    let x = z.re();
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("singular logit at z = {x}")));
    }
    Ok(z.ln() - (-z + 1.0).ln())
}

/// Drift of `z = sigmoid(y)` where `y` follows the base SDE, written in `z`.
/// Ito: `h̃(logit z)(z − z²) + g̃(logit z)(2z³ − 3z² + z)/2`;
/// Stratonovich (ordinary chain rule): `h̃(logit z)(z − z²)`.
struct SigmoidDrift {
    h: SharedField,
    g: SharedField,
    calculus: Calculus,
}

impl GenericField for SigmoidDrift {
    fn dim_in(&self) -> usize {
        1
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn apply<S: Real>(&self, t: f64, z: &[S]) -> Result<Vec<S>> {
        let y = [logit(z[0])?];
        let (first, second) = sigmoid_polys(z[0]);
        let h = S::eval_field(self.h.as_ref(), t, &y)?[0];
        Ok(vec![match self.calculus {
            Calculus::Ito => h * first + S::eval_field(self.g.as_ref(), t, &y)?[0] * second,
            Calculus::Stratonovich => h * first,
        }])
    }
}

struct SigmoidDiffusion {
    g: SharedField,
}

impl GenericField for SigmoidDiffusion {
    fn dim_in(&self) -> usize {
        1
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn apply<S: Real>(&self, t: f64, z: &[S]) -> Result<Vec<S>> {
        let y = [logit(z[0])?];
        let (first, _) = sigmoid_polys(z[0]);
        Ok(vec![S::eval_field(self.g.as_ref(), t, &y)?[0] * first])
    }
}

/// Pushes a 1-D SDE on `y ∈ R` through the sigmoid. The base spec's calculus
/// selects Ito's lemma or the Stratonovich chain rule.
pub fn make_sigmoid_transformed(base_y: &DynamicsSpec) -> Result<DynamicsSpec> {
    require_one_dim(base_y.dim, "the sigmoid transform")?;
    let drift = SigmoidDrift {
        h: base_y.drift.clone(),
        g: base_y.diffusion.clone(),
        calculus: base_y.calculus,
    };
    let diffusion = SigmoidDiffusion {
        g: base_y.diffusion.clone(),
    };
    DynamicsSpec::new(Arc::new(drift), Arc::new(diffusion), base_y.calculus)
}

/// Same polynomial structure as the sigmoid transform with `h`, `g`
/// evaluated directly at `z` (no logit).
struct AbsorbedDrift {
    h: SharedField,
    g: SharedField,
    calculus: Calculus,
}

impl GenericField for AbsorbedDrift {
    fn dim_in(&self) -> usize {
        1
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn apply<S: Real>(&self, t: f64, z: &[S]) -> Result<Vec<S>> {
        let (first, second) = sigmoid_polys(z[0]);
        let h = S::eval_field(self.h.as_ref(), t, z)?[0];
        Ok(vec![match self.calculus {
            Calculus::Ito => h * first + S::eval_field(self.g.as_ref(), t, z)?[0] * second,
            Calculus::Stratonovich => h * first,
        }])
    }
}

struct AbsorbedDiffusion {
    g: SharedField,
}

impl GenericField for AbsorbedDiffusion {
    fn dim_in(&self) -> usize {
        1
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn apply<S: Real>(&self, t: f64, z: &[S]) -> Result<Vec<S>> {
        let (first, _) = sigmoid_polys(z[0]);
        Ok(vec![S::eval_field(self.g.as_ref(), t, z)?[0] * first])
    }
}

pub fn make_absorbed(h: SharedField, g: SharedField, calculus: Calculus) -> Result<DynamicsSpec> {
    require_one_dim(h.dim_in(), "the absorbed parameterization")?;
    let drift = AbsorbedDrift {
        h,
        g: g.clone(),
        calculus,
    };
    DynamicsSpec::new(Arc::new(drift), Arc::new(AbsorbedDiffusion { g }), calculus)
}

/// Autonomous diffusion and unnormalized log-density of the target marginal.
#[derive(Clone)]
pub struct StationaryConfig {
    pub diffusion: SharedField,
    pub log_ptilde: SharedScalarField,
    pub dim: usize,
}

impl StationaryConfig {
    pub fn new(diffusion: SharedField, log_ptilde: SharedScalarField) -> Result<Self> {
        let dim = diffusion.dim_in();
        check_len(dim, diffusion.dim_out())?;
        check_len(dim, log_ptilde.dim_in())?;
        Ok(Self {
            diffusion,
            log_ptilde,
            dim,
        })
    }
}

/// `h(z) = ½ diag(∇[g(z)²]) + ½ g(z)² ⊙ ∇ log p̃(z)`, the drift that zeroes
/// the stationary probability flux in every coordinate.
pub fn stationary_drift(cfg: &StationaryConfig, z: &[f64]) -> Result<Vec<f64>> {
    let (g, dg) = value_and_diag_jacobian(cfg.diffusion.as_ref(), 0.0, z)?;
    let score = scalar_gradient(cfg.log_ptilde.as_ref(), z)?;
    if let Some(bad) = score.iter().find(|s| !s.is_finite()) {
        return Err(Error::Domain(format!("non-finite score {bad} at {z:?}")));
    }
    Ok(g.iter()
        .zip(&dg)
        .zip(&score)
        // ½ ∂(g²)/∂z = g ∂g/∂z
        .map(|((&gi, &dgi), &si)| gi * dgi + 0.5 * gi * gi * si)
        .collect())
}

struct StationaryDrift {
    cfg: StationaryConfig,
}

impl Field for StationaryDrift {
    fn dim_in(&self) -> usize {
        self.cfg.dim
    }
    fn dim_out(&self) -> usize {
        self.cfg.dim
    }
    fn eval(&self, _t: f64, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cfg.dim, z.len())?;
        stationary_drift(&self.cfg, z)
    }
    fn eval_dual(&self, _t: f64, _z: &[Dual]) -> Result<Vec<Dual>> {
        Err(Error::Unsupported(
            "derivatives of the stationary drift need second-order duals".into(),
        ))
    }
}

/// Autonomous Ito SDE with diffusion `cfg.diffusion` and the stationary drift.
pub fn make_stationary(cfg: &StationaryConfig) -> Result<DynamicsSpec> {
    DynamicsSpec::new(
        Arc::new(StationaryDrift { cfg: cfg.clone() }),
        cfg.diffusion.clone(),
        Calculus::Ito,
    )
}

/// `½ diag(∇g) ⊙ g`, the drift correction between Stratonovich and Ito.
pub fn ito_correction(diffusion: &dyn Field, t: f64, z: &[f64]) -> Result<Vec<f64>> {
    let (g, dg) = value_and_diag_jacobian(diffusion, t, z)?;
    Ok(g.iter().zip(&dg).map(|(gi, dgi)| 0.5 * gi * dgi).collect())
}

struct ItoCorrectedDrift {
    drift: SharedField,
    diffusion: SharedField,
}

impl Field for ItoCorrectedDrift {
    fn dim_in(&self) -> usize {
        self.drift.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.drift.dim_out()
    }
    fn eval(&self, t: f64, z: &[f64]) -> Result<Vec<f64>> {
        let mut h = self.drift.eval(t, z)?;
        for (hi, ci) in h.iter_mut().zip(ito_correction(self.diffusion.as_ref(), t, z)?) {
            *hi += ci;
        }
        Ok(h)
    }
    fn eval_dual(&self, _t: f64, _z: &[Dual]) -> Result<Vec<Dual>> {
        Err(Error::Unsupported(
            "derivatives of an Ito-corrected drift need second-order duals".into(),
        ))
    }
}

/// Equivalent Ito spec of a Stratonovich spec; the diffusion is unchanged.
pub fn stratonovich_to_ito(spec: &DynamicsSpec) -> DynamicsSpec {
    if spec.calculus == Calculus::Ito {
        log::warn!("stratonovich_to_ito called on an Ito spec; returning it unchanged");
        return spec.clone();
    }
    DynamicsSpec {
        drift: Arc::new(ItoCorrectedDrift {
            drift: spec.drift.clone(),
            diffusion: spec.diffusion.clone(),
        }),
        diffusion: spec.diffusion.clone(),
        calculus: Calculus::Ito,
        dim: spec.dim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{AffineField, ConstantField, GaussianLogDensity};
    use crate::nets::{mlp_init, Activation, MlpField, OutputMap};
    use crate::weights::weight;
    use approx::assert_abs_diff_eq;

    fn constant(dim: usize, v: f64) -> SharedField {
        Arc::new(ConstantField::filled(dim, v))
    }

    fn mlp_spec(seed: u64, dim: usize) -> DynamicsSpec {
        let sizes = [dim, 64, 64, 64, dim];
        let h = MlpField::new(mlp_init(&sizes, Activation::Celu, 2 * seed).unwrap(), OutputMap::Identity);
        let g = MlpField::new(mlp_init(&sizes, Activation::Celu, 2 * seed + 1).unwrap(), OutputMap::Softplus);
        DynamicsSpec::new(Arc::new(h), Arc::new(g), Calculus::Ito).unwrap()
    }

    #[test]
    fn pull_examples() {
        let k = Polyhedron::unit_box(1);
        assert_eq!(center_pull(&k, 1.0, 0.01, &[0.5]), vec![0.0]);
        assert_abs_diff_eq!(center_pull(&k, 1.0, 0.01, &[1.0])[0], -0.5 / 0.51, epsilon = 1e-15);
        let sq = Polyhedron::unit_box(2);
        let c = center_pull(&sq, 2.0, 1e-2, &[1.0, 0.5]);
        assert_abs_diff_eq!(c[0], -0.5 * 2.0 / 0.51, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pull_norm_below_gamma() {
        let k = Polyhedron::unit_simplex(2);
        for z in [[0.0, 0.0], [1.0, 0.0], [0.2, 0.7], [0.3, 0.3]] {
            let c = center_pull(&k, 1.5, 0.01, &z);
            assert!(c.iter().map(|x| x * x).sum::<f64>().sqrt() < 1.5);
        }
    }

    #[test]
    fn wsp_on_boundary_is_the_fallback() {
        let k = Arc::new(Polyhedron::unit_box(1));
        let spec = make_wsp(&WspConfig::new(mlp_spec(0, 1), k.clone())).unwrap();
        for z in [0.0, 1.0] {
            assert_eq!(spec.diffusion_at(0.0, &[z]).unwrap(), vec![0.0]);
            assert_eq!(spec.drift_at(0.0, &[z]).unwrap(), center_pull(&k, 1.0, 0.01, &[z]));
        }
    }

    #[test]
    fn wsp_degenerate_base() {
        let k = Arc::new(Polyhedron::unit_box(1));
        let base = DynamicsSpec::new(constant(1, 0.0), constant(1, 0.0), Calculus::Ito).unwrap();
        let spec = make_wsp(&WspConfig::new(base, k.clone())).unwrap();
        let z = [0.3];
        let w = weight(&k, &WeightParams::default(), &z).unwrap();
        let c = center_pull(&k, 1.0, 0.01, &z)[0];
        assert_abs_diff_eq!(spec.drift_at(0.0, &z).unwrap()[0], (1.0 - w) * c, epsilon = 1e-15);
        assert_eq!(spec.diffusion_at(0.0, &z).unwrap(), vec![0.0]);
    }

    #[test]
    fn wsp_matches_scalar_reimplementation() {
        let k = Arc::new(Polyhedron::unit_box(1));
        let base = mlp_spec(0, 1);
        let spec = make_wsp(&WspConfig::new(base.clone(), k)).unwrap();
        let z = 0.5;
        let ht = base.drift_at(0.0, &[z]).unwrap()[0];
        let gt = base.diffusion_at(0.0, &[z]).unwrap()[0];
        // w on [0,1] written out: equal softmin weights at the midpoint
        let w = (10.0 * (0.5 * (10.0 * 0.5f64).tanh()).powi(2)).tanh();
        // center pull vanishes at the center
        assert_abs_diff_eq!(spec.drift_at(0.0, &[z]).unwrap()[0], w * ht, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.diffusion_at(0.0, &[z]).unwrap()[0], w * gt, epsilon = 1e-12);
        // off-center point, general formula
        let z = 0.8f64;
        let (d0, d1) = (z, 1.0 - z);
        let (e0, e1) = ((-d0).exp(), (-d1).exp());
        let p = e0 / (e0 + e1) * (10.0 * d0).tanh() * e1 / (e0 + e1) * (10.0 * d1).tanh();
        let w = (10.0 * p).tanh();
        let c = (0.5 - z) / ((0.5 - z).abs() + 0.01);
        let ht = base.drift_at(0.0, &[z]).unwrap()[0];
        assert_abs_diff_eq!(spec.drift_at(0.0, &[z]).unwrap()[0], w * ht + (1.0 - w) * c, epsilon = 1e-12);
    }

    #[test]
    fn wsp_rejects_points_outside() {
        let spec = make_wsp(&WspConfig::new(mlp_spec(1, 1), Arc::new(Polyhedron::unit_box(1)))).unwrap();
        assert!(matches!(spec.drift_at(0.0, &[1.01]), Err(Error::Domain(_))));
        assert!(matches!(spec.diffusion_at(0.0, &[-0.2]), Err(Error::Domain(_))));
    }

    #[test]
    fn wsp_rejects_bad_config() {
        let mut cfg = WspConfig::new(mlp_spec(0, 1), Arc::new(Polyhedron::unit_box(1)));
        cfg.gamma = 0.0;
        assert!(make_wsp(&cfg).is_err());
        let cfg = WspConfig::new(mlp_spec(0, 1), Arc::new(Polyhedron::unit_box(2)));
        assert!(make_wsp(&cfg).is_err());
    }

    #[test]
    fn sigmoid_examples() {
        let base = DynamicsSpec::new(constant(1, 0.0), constant(1, 1.0), Calculus::Ito).unwrap();
        let s = make_sigmoid_transformed(&base).unwrap();
        assert_abs_diff_eq!(s.drift_at(0.0, &[0.5]).unwrap()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.diffusion_at(0.0, &[0.5]).unwrap()[0], 0.25, epsilon = 1e-15);

        let base = DynamicsSpec::new(constant(1, 1.0), constant(1, 0.0), Calculus::Ito).unwrap();
        let s = make_sigmoid_transformed(&base).unwrap();
        assert_abs_diff_eq!(s.drift_at(0.0, &[0.99]).unwrap()[0], 0.0099, epsilon = 1e-15);
        assert_eq!(s.diffusion_at(0.0, &[0.99]).unwrap()[0], 0.0);

        let base = mlp_spec(2, 1);
        let s = make_sigmoid_transformed(&base).unwrap();
        let near = s.drift_at(0.0, &[1e-9]).unwrap()[0].abs() + s.diffusion_at(0.0, &[1e-9]).unwrap()[0];
        assert!(near < 1e-6);
        assert!(matches!(s.drift_at(0.0, &[0.0]), Err(Error::Domain(_))));
        assert!(matches!(s.diffusion_at(0.0, &[1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn absorbed_examples() {
        let zero = make_absorbed(constant(1, 0.0), constant(1, 0.0), Calculus::Ito).unwrap();
        assert_eq!(zero.drift_at(0.0, &[0.3]).unwrap(), vec![0.0]);
        let s = make_absorbed(constant(1, 1.0), constant(1, 1.0), Calculus::Ito).unwrap();
        assert_abs_diff_eq!(s.drift_at(0.0, &[0.25]).unwrap()[0], 0.234375, epsilon = 1e-15);
        assert_abs_diff_eq!(s.diffusion_at(0.0, &[0.25]).unwrap()[0], 0.1875, epsilon = 1e-15);
        let m = mlp_spec(3, 1);
        let s = make_absorbed(m.drift, m.diffusion, Calculus::Ito).unwrap();
        assert_eq!(s.drift_at(0.0, &[1.0]).unwrap()[0], 0.0);
        assert_eq!(s.diffusion_at(0.0, &[1.0]).unwrap()[0], 0.0);
    }

    #[test]
    fn stationary_examples() {
        let (sigma, mu, s) = (0.7, 0.4, 0.2);
        let cfg = StationaryConfig::new(
            constant(1, sigma),
            Arc::new(GaussianLogDensity {
                mean: vec![mu],
                std: vec![s],
            }),
        )
        .unwrap();
        for z in [0.0, 0.3, 0.9] {
            let h = stationary_drift(&cfg, &[z]).unwrap()[0];
            assert_abs_diff_eq!(h, -sigma * sigma * (z - mu) / (2.0 * s * s), epsilon = 1e-12);
        }

        let flat = Arc::new(GaussianLogDensity {
            mean: vec![0.0],
            std: vec![f64::INFINITY],
        });
        let cfg = StationaryConfig::new(Arc::new(AffineField::identity(1)), flat.clone()).unwrap();
        for z in [0.1, 0.5, 2.0] {
            assert_abs_diff_eq!(stationary_drift(&cfg, &[z]).unwrap()[0], z, epsilon = 1e-15);
        }
        let cfg = StationaryConfig::new(constant(1, 0.0), flat).unwrap();
        assert_eq!(stationary_drift(&cfg, &[0.3]).unwrap(), vec![0.0]);
    }

    #[test]
    fn stratonovich_examples() {
        let spec = DynamicsSpec::new(
            Arc::new(ConstantField::filled(1, 0.3)),
            constant(1, 2.0),
            Calculus::Stratonovich,
        )
        .unwrap();
        let ito = stratonovich_to_ito(&spec);
        assert_eq!(ito.calculus, Calculus::Ito);
        assert_eq!(ito.drift_at(0.0, &[0.7]).unwrap(), vec![0.3]);

        let spec = DynamicsSpec::new(constant(1, 0.0), Arc::new(AffineField::identity(1)), Calculus::Stratonovich)
            .unwrap();
        let ito = stratonovich_to_ito(&spec);
        for z in [0.2, 1.0, -3.0] {
            assert_eq!(ito.drift_at(0.0, &[z]).unwrap(), vec![z / 2.0]);
            assert_eq!(ito.diffusion_at(0.0, &[z]).unwrap(), vec![z]);
        }
        // Ito input is a no-op
        let again = stratonovich_to_ito(&ito);
        assert!(Arc::ptr_eq(&again.drift, &ito.drift));
    }

    #[test]
    fn stratonovich_correction_vanishes_on_wsp_boundary() {
        let k = Arc::new(Polyhedron::unit_box(1));
        let spec = make_wsp(&WspConfig::new(mlp_spec(4, 1).with_calculus(Calculus::Stratonovich), k.clone())).unwrap();
        let ito = stratonovich_to_ito(&spec);
        for z in [0.0, 1.0] {
            assert_eq!(ito_correction(spec.diffusion.as_ref(), 0.0, &[z]).unwrap(), vec![0.0]);
            assert_eq!(ito.drift_at(0.0, &[z]).unwrap(), spec.drift_at(0.0, &[z]).unwrap());
        }
    }
}
