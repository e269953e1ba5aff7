//! Forward-mode dual numbers and the scalar abstraction shared by `f64` and
//! `Dual`, so every field can be evaluated with or without a tangent.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::field::{Field, ScalarField};
use crate::Result;

/// Scalar type a field can be evaluated on.
pub trait Real:
    Copy
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
{
    fn cst(x: f64) -> Self;
    /// Real part.
    fn re(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn tanh(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn erf(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn is_finite(self) -> bool;

    /// Evaluates a type-erased field on this scalar type.
    fn eval_field(f: &dyn Field, t: f64, z: &[Self]) -> Result<Vec<Self>>;

    fn eval_scalar_field(f: &dyn ScalarField, z: &[Self]) -> Result<Self>;
}

impl Real for f64 {
    #[inline]
    fn cst(x: f64) -> Self {
        x
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn ln_1p(self) -> Self {
        f64::ln_1p(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn erf(self) -> Self {
        libm::erf(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn eval_field(f: &dyn Field, t: f64, z: &[Self]) -> Result<Vec<Self>> {
        f.eval(t, z)
    }
    fn eval_scalar_field(f: &dyn ScalarField, z: &[Self]) -> Result<Self> {
        f.eval(z)
    }
}

/// Dual number `re + eps·ε` with `ε² = 0`; `eps` carries the directional
/// derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub const fn new(re: f64, eps: f64) -> Self {
        Self { re, eps }
    }

    pub const fn constant(re: f64) -> Self {
        Self { re, eps: 0.0 }
    }

    pub const fn variable(re: f64) -> Self {
        Self { re, eps: 1.0 }
    }

    #[inline]
    fn chain(self, f: f64, df: f64) -> Self {
        Self::new(f, df * self.eps)
    }
}

impl fmt::Display for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}ε", self.re, self.eps)
    }
}

impl Add for Dual {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl Add<f64> for Dual {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Self::new(self.re + o, self.eps)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.re += o.re;
        self.eps += o.eps;
    }
}

impl Sub for Dual {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl Mul for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl Mul<f64> for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        Self::new(self.re * o, self.eps * o)
    }
}

impl Div for Dual {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Self::new(q, (self.eps - q * o.eps) / o.re)
    }
}

impl Neg for Dual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl Real for Dual {
    #[inline]
    fn cst(x: f64) -> Self {
        Self::constant(x)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    #[inline]
    fn ln(self) -> Self {
        self.chain(self.re.ln(), 1.0 / self.re)
    }
    #[inline]
    fn ln_1p(self) -> Self {
        self.chain(self.re.ln_1p(), 1.0 / (1.0 + self.re))
    }
    #[inline]
    fn tanh(self) -> Self {
        let th = self.re.tanh();
        self.chain(th, 1.0 - th * th)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, 0.5 / s)
    }
    #[inline]
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    #[inline]
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    #[inline]
    fn erf(self) -> Self {
        let d = std::f64::consts::FRAC_2_SQRT_PI * (-self.re * self.re).exp();
        self.chain(libm::erf(self.re), d)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        self.chain(self.re.powi(n), f64::from(n) * self.re.powi(n - 1))
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.eps.is_finite()
    }
    fn eval_field(f: &dyn Field, t: f64, z: &[Self]) -> Result<Vec<Self>> {
        f.eval_dual(t, z)
    }
    fn eval_scalar_field(f: &dyn ScalarField, z: &[Self]) -> Result<Self> {
        f.eval_dual(z)
    }
}

/// A point together with a tangent direction; the vector form of [`Dual`].
#[derive(Clone, Debug, PartialEq)]
pub struct DualVector {
    pub value: Vec<f64>,
    pub tangent: Vec<f64>,
}

impl DualVector {
    pub fn new(value: Vec<f64>, tangent: Vec<f64>) -> Self {
        assert_eq!(value.len(), tangent.len(), "value/tangent length mismatch");
        Self { value, tangent }
    }

    /// Seeds `value` with the `d`-th basis direction.
    pub fn basis(value: &[f64], d: usize) -> Self {
        let mut tangent = vec![0.0; value.len()];
        tangent[d] = 1.0;
        Self::new(value.to_vec(), tangent)
    }

    pub fn constant(value: &[f64]) -> Self {
        Self::new(value.to_vec(), vec![0.0; value.len()])
    }

    pub fn to_duals(&self) -> Vec<Dual> {
        self.value
            .iter()
            .zip(&self.tangent)
            .map(|(&re, &eps)| Dual::new(re, eps))
            .collect()
    }

    pub fn from_duals(xs: &[Dual]) -> Self {
        Self {
            value: xs.iter().map(|x| x.re).collect(),
            tangent: xs.iter().map(|x| x.eps).collect(),
        }
    }
}
