//! Evaluable vector and scalar fields over `(t, z)`.
//!
//! Fields are type-erased behind [`Field`] / [`ScalarField`] so dynamics can
//! be composed at runtime, but every field also evaluates on [`Dual`] numbers
//! so that directional derivatives are exact. Concrete fields usually
//! implement the generic [`GenericField`] once and get both entry points.

use std::sync::Arc;

use crate::dual::{Dual, DualVector, Real};
use crate::{Error, Result};

pub trait Field: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval(&self, t: f64, z: &[f64]) -> Result<Vec<f64>>;
    /// Forward-mode evaluation; tangents of the output are the Jacobian-vector
    /// product with the tangents of `z`.
    fn eval_dual(&self, t: f64, z: &[Dual]) -> Result<Vec<Dual>>;
}

pub trait ScalarField: Send + Sync {
    fn dim_in(&self) -> usize;
    fn eval(&self, z: &[f64]) -> Result<f64>;
    fn eval_dual(&self, z: &[Dual]) -> Result<Dual>;
}

/// A field written once for any [`Real`] scalar.
pub trait GenericField: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply<S: Real>(&self, t: f64, z: &[S]) -> Result<Vec<S>>;
}

pub trait GenericScalarField: Send + Sync {
    fn dim_in(&self) -> usize;
    fn apply<S: Real>(&self, z: &[S]) -> Result<S>;
}

impl<T: GenericField> Field for T {
    fn dim_in(&self) -> usize {
        GenericField::dim_in(self)
    }
    fn dim_out(&self) -> usize {
        GenericField::dim_out(self)
    }
    fn eval(&self, t: f64, z: &[f64]) -> Result<Vec<f64>> {
        check_len(GenericField::dim_in(self), z.len())?;
        self.apply(t, z)
    }
    fn eval_dual(&self, t: f64, z: &[Dual]) -> Result<Vec<Dual>> {
        check_len(GenericField::dim_in(self), z.len())?;
        self.apply(t, z)
    }
}

impl<T: GenericScalarField> ScalarField for T {
    fn dim_in(&self) -> usize {
        GenericScalarField::dim_in(self)
    }
    fn eval(&self, z: &[f64]) -> Result<f64> {
        check_len(GenericScalarField::dim_in(self), z.len())?;
        self.apply(z)
    }
    fn eval_dual(&self, z: &[Dual]) -> Result<Dual> {
        check_len(GenericScalarField::dim_in(self), z.len())?;
        self.apply(z)
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape { expected, got })
    }
}

pub type SharedField = Arc<dyn Field>;
pub type SharedScalarField = Arc<dyn ScalarField>;

/// Jacobian-vector product of `f` at `x.value` along `x.tangent`.
pub fn jvp(f: &dyn Field, t: f64, x: &DualVector) -> Result<DualVector> {
    let out = f.eval_dual(t, &x.to_duals())?;
    Ok(DualVector::from_duals(&out))
}

/// Value of `f` at `z` together with the diagonal partials `∂f^d/∂z^d`,
/// using one forward pass per dimension.
pub fn value_and_diag_jacobian(f: &dyn Field, t: f64, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = z.len();
    check_len(dim, f.dim_out())?;
    let mut seeded: Vec<Dual> = z.iter().map(|&x| Dual::constant(x)).collect();
    let mut value = Vec::new();
    let mut diag = vec![0.0; dim];
    for d in 0..dim {
        seeded[d].eps = 1.0;
        let out = f.eval_dual(t, &seeded)?;
        seeded[d].eps = 0.0;
        if d == 0 {
            value = out.iter().map(|x| x.re).collect();
        }
        diag[d] = out[d].eps;
    }
    if dim == 0 {
        value = f.eval(t, z)?;
    }
    Ok((value, diag))
}

/// Diagonal of the Jacobian of a square field.
pub fn diag_jacobian(f: &dyn Field, t: f64, z: &[f64]) -> Result<Vec<f64>> {
    value_and_diag_jacobian(f, t, z).map(|(_, d)| d)
}

/// Gradient of a scalar field by `D` forward passes.
pub fn scalar_gradient(f: &dyn ScalarField, z: &[f64]) -> Result<Vec<f64>> {
    let mut seeded: Vec<Dual> = z.iter().map(|&x| Dual::constant(x)).collect();
    let mut grad = vec![0.0; z.len()];
    for d in 0..z.len() {
        seeded[d].eps = 1.0;
        grad[d] = f.eval_dual(&seeded)?.eps;
        seeded[d].eps = 0.0;
    }
    Ok(grad)
}

/// `z ↦ c`, independent of time and state.
#[derive(Debug, Clone)]
pub struct ConstantField {
    dim_in: usize,
    values: Vec<f64>,
}

impl ConstantField {
    pub fn new(dim_in: usize, values: Vec<f64>) -> Self {
        Self { dim_in, values }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(dim, vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Self::new(dim, vec![value; dim])
    }
}

impl GenericField for ConstantField {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.values.len()
    }
    fn apply<S: Real>(&self, _t: f64, _z: &[S]) -> Result<Vec<S>> {
        Ok(self.values.iter().map(|&v| S::cst(v)).collect())
    }
}

/// Affine map `z ↦ A z + b` with `A` stored row-major (`dim_out × dim_in`).
#[derive(Debug, Clone)]
pub struct AffineField {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl AffineField {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let dim_in = matrix.first().map_or(0, Vec::len);
        for row in &matrix {
            check_len(dim_in, row.len())?;
        }
        check_len(matrix.len(), offset.len())?;
        Ok(Self { matrix, offset })
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { scale } else { 0.0 }).collect())
            .collect();
        Self {
            matrix,
            offset: vec![0.0; dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }
}

impl GenericField for AffineField {
    fn dim_in(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }
    fn dim_out(&self) -> usize {
        self.offset.len()
    }
    fn apply<S: Real>(&self, _t: f64, z: &[S]) -> Result<Vec<S>> {
        Ok(self
            .matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, &b)| {
                row.iter()
                    .zip(z)
                    .fold(S::cst(b), |acc, (&a, &x)| acc + x * a)
            })
            .collect())
    }
}

/// Log-density of independent Gaussians, up to an additive constant:
/// `−Σ_d (z_d − μ_d)² / (2 s_d²)`.
#[derive(Debug, Clone)]
pub struct GaussianLogDensity {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl GenericScalarField for GaussianLogDensity {
    fn dim_in(&self) -> usize {
        self.mean.len()
    }
    fn apply<S: Real>(&self, z: &[S]) -> Result<S> {
        let mut acc = S::zero();
        for ((&x, &m), &s) in z.iter().zip(&self.mean).zip(&self.std) {
            let r = x + (-m);
            acc += r * r * (-0.5 / (s * s));
        }
        Ok(acc)
    }
}

/// `log Σ_k exp(−(z − c_k)² / width)` in one dimension.
#[derive(Debug, Clone)]
pub struct MixtureLogDensity {
    pub centers: Vec<f64>,
    pub width: f64,
}

impl MixtureLogDensity {
    /// Two equal bumps at 0.3 and 0.7 with `width = 0.005`.
    pub fn bimodal() -> Self {
        Self {
            centers: vec![0.3, 0.7],
            width: 0.005,
        }
    }
}

impl GenericScalarField for MixtureLogDensity {
    fn dim_in(&self) -> usize {
        1
    }
    fn apply<S: Real>(&self, z: &[S]) -> Result<S> {
        let x = z[0];
        let logits: Vec<S> = self
            .centers
            .iter()
            .map(|&c| {
                let r = x + (-c);
                r * r * (-1.0 / self.width)
            })
            .collect();
        let m = logits
            .iter()
            .map(|l| l.re())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut sum = S::zero();
        for l in logits {
            sum += (l + (-m)).exp();
        }
        Ok(sum.ln() + m)
    }
}

/// `log p̃ + shift`; the same density rescaled by `e^shift`.
pub struct ShiftedLogDensity {
    pub inner: SharedScalarField,
    pub shift: f64,
}

impl GenericScalarField for ShiftedLogDensity {
    fn dim_in(&self) -> usize {
        self.inner.dim_in()
    }
    fn apply<S: Real>(&self, z: &[S]) -> Result<S> {
        Ok(S::eval_scalar_field(self.inner.as_ref(), z)? + self.shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    struct Powers;

    impl GenericField for Powers {
        fn dim_in(&self) -> usize {
            2
        }
        fn dim_out(&self) -> usize {
            2
        }
        fn apply<S: Real>(&self, _t: f64, z: &[S]) -> Result<Vec<S>> {
            Ok(vec![z[0] * z[0], z[1] * z[1] * z[1]])
        }
    }

    #[test]
    fn identity_diag_is_ones() {
        let f = AffineField::identity(3);
        assert_eq!(diag_jacobian(&f, 0.0, &[0.1, -2.0, 5.0]).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn power_rule_diag() {
        assert_eq!(diag_jacobian(&Powers, 0.0, &[1.0, 1.0]).unwrap(), vec![2.0, 3.0]);
        let (v, d) = value_and_diag_jacobian(&Powers, 0.0, &[0.5, -2.0]).unwrap();
        assert_eq!(v, vec![0.25, -8.0]);
        assert_eq!(d, vec![1.0, 12.0]);
    }

    #[test]
    fn affine_jvp_is_matrix_column() {
        let f = AffineField::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![0.5, 0.5]).unwrap();
        let out = jvp(&f, 0.0, &DualVector::basis(&[0.3, 0.7], 0)).unwrap();
        assert_eq!(out.tangent, vec![1.0, 3.0]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let f = AffineField::identity(2);
        assert!(matches!(
            f.eval(0.0, &[1.0]),
            Err(Error::Shape { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn mixture_score_matches_finite_difference() {
        let p = MixtureLogDensity::bimodal();
        for &z in &[0.1, 0.3, 0.45, 0.62, 0.9] {
            let g = scalar_gradient(&p, &[z]).unwrap()[0];
            let h = 1e-6;
            let fd = (p.eval(&[z + h]).unwrap() - p.eval(&[z - h]).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(g, fd, epsilon = 1e-4 * (1.0 + fd.abs()));
        }
    }
}
