//! Inference-only multilayer perceptrons with Glorot-normal initialization
//! drawn from the keyed counter generator.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use crate::dual::{Dual, DualVector, Real};
use crate::field::GenericField;
use crate::rng::{splitmix64, Domain, KeyedRng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Celu,
    Gelu,
    Elu,
    Selu,
    Silu,
}

const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;

impl Activation {
    pub const ALL: [Activation; 5] = [
        Activation::Celu,
        Activation::Gelu,
        Activation::Elu,
        Activation::Selu,
        Activation::Silu,
    ];

    #[inline]
    pub fn apply<S: Real>(self, x: S) -> S {
        match self {
            // CELU with shape 1 coincides with ELU with alpha 1
            Activation::Celu | Activation::Elu => {
                if x.re() > 0.0 {
                    x
                } else {
                    x.exp() + (-1.0)
                }
            }
            Activation::Gelu => x * ((x * std::f64::consts::FRAC_1_SQRT_2).erf() + 1.0) * 0.5,
            Activation::Selu => {
                if x.re() > 0.0 {
                    x * SELU_LAMBDA
                } else {
                    (x.exp() + (-1.0)) * (SELU_ALPHA * SELU_LAMBDA)
                }
            }
            Activation::Silu => x / ((-x).exp() + 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Celu => "celu",
            Activation::Gelu => "gelu",
            Activation::Elu => "elu",
            Activation::Selu => "selu",
            Activation::Silu => "silu",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Activation::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown activation '{s}'")))
    }
}

/// `log(1 + e^x)`, evaluated without overflow.
#[inline]
pub fn softplus<S: Real>(x: S) -> S {
    if x.re() > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Row-major `fan_out × fan_in`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub seed: u64,
}

/// Glorot-normal initialization: `W_ij ~ N(0, 2 / (fan_in + fan_out))`,
/// biases zero. Entry `(layer, row, col)` is drawn from its own counter.
pub fn mlp_init(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<MlpParams> {
    if layer_sizes.len() < 2 {
        return Err(Error::Config(format!(
            "an MLP needs at least an input and an output size, got {layer_sizes:?}"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Config(format!("layer sizes must be ≥ 1, got {layer_sizes:?}")));
    }
    let rng = KeyedRng::new(seed, Domain::Init);
    let layers = layer_sizes
        .windows(2)
        .enumerate()
        .map(|(l, w)| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let std = (2.0 / (fan_in + fan_out) as f64).sqrt();
            let mut weights = Vec::with_capacity(fan_in * fan_out);
            for i in 0..fan_out {
                for j in 0..fan_in {
                    weights.push(std * rng.normal(l as u64, i as u32, j as u32));
                }
            }
            Layer {
                fan_in,
                fan_out,
                weights,
                bias: vec![0.0; fan_out],
            }
        })
        .collect();
    Ok(MlpParams {
        layers,
        activation,
        seed,
    })
}

impl MlpParams {
    /// Builds a network from explicit layers, checking that shapes chain.
    pub fn from_layers(layers: Vec<Layer>, activation: Activation, seed: u64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("an MLP needs at least one layer".into()));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.weights.len() != l.fan_in * l.fan_out {
                return Err(Error::Shape {
                    expected: l.fan_in * l.fan_out,
                    got: l.weights.len(),
                });
            }
            if l.bias.len() != l.fan_out {
                return Err(Error::Shape {
                    expected: l.fan_out,
                    got: l.bias.len(),
                });
            }
            if k > 0 && layers[k - 1].fan_out != l.fan_in {
                return Err(Error::Shape {
                    expected: layers[k - 1].fan_out,
                    got: l.fan_in,
                });
            }
        }
        Ok(Self {
            layers,
            activation,
            seed,
        })
    }

    pub fn fan_in(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn fan_out(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.fan_in())
            .chain(self.layers.iter().map(|l| l.fan_out))
            .collect()
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.fan_out, l.fan_in)).collect()
    }

    /// Order-sensitive hash over every parameter's bit pattern.
    pub fn checksum(&self) -> u64 {
        let mut h = splitmix64(self.seed);
        for l in &self.layers {
            for x in l.weights.iter().chain(&l.bias) {
                h = splitmix64(h ^ x.to_bits());
            }
        }
        h
    }

    /// Affine layers with the activation between them; the last layer is
    /// affine only.
    pub fn forward<S: Real>(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.fan_in() {
            return Err(Error::Shape {
                expected: self.fan_in(),
                got: x.len(),
            });
        }
        let mut h: Vec<S> = x.to_vec();
        let last = self.layers.len() - 1;
        for (k, l) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(l.fan_out);
            for (row, &b) in l.weights.chunks_exact(l.fan_in).zip(&l.bias) {
                let mut acc = S::cst(b);
                for (&w, &hi) in row.iter().zip(&h) {
                    acc += hi * w;
                }
                out.push(if k < last { self.activation.apply(acc) } else { acc });
            }
            h = out;
        }
        Ok(h)
    }

    /// Text dump: header (sizes, activation, seed) and row-major parameters.
    /// Floats are written in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sizes: Vec<String> = self.sizes().iter().map(usize::to_string).collect();
        let _ = writeln!(s, "mlp v1");
        let _ = writeln!(s, "activation {}", self.activation);
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "sizes {}", sizes.join(" "));
        for (k, l) in self.layers.iter().enumerate() {
            let _ = writeln!(s, "layer {k}");
            for row in l.weights.chunks_exact(l.fan_in) {
                let vals: Vec<String> = row.iter().map(f64::to_string).collect();
                let _ = writeln!(s, "w {}", vals.join(" "));
            }
            let vals: Vec<String> = l.bias.iter().map(f64::to_string).collect();
            let _ = writeln!(s, "b {}", vals.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of file, expected {what}")))
        };
        if next("header")? != "mlp v1" {
            return Err(Error::Parse("missing 'mlp v1' header".into()));
        }
        let activation: Activation = field(next("activation")?, "activation")?.parse()?;
        let seed: u64 = field(next("seed")?, "seed")?
            .parse()
            .map_err(|e| Error::Parse(format!("seed: {e}")))?;
        let sizes = parse_list::<usize>(field(next("sizes")?, "sizes")?)?;
        if sizes.len() < 2 {
            return Err(Error::Parse("need at least two sizes".into()));
        }
        let mut layers = Vec::new();
        for (k, w) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let tag = field(next("layer")?, "layer")?;
            if tag != k.to_string() {
                return Err(Error::Parse(format!("expected layer {k}, found '{tag}'")));
            }
            let mut weights = Vec::with_capacity(fan_in * fan_out);
            for _ in 0..fan_out {
                let row = parse_list::<f64>(field(next("weight row")?, "w")?)?;
                if row.len() != fan_in {
                    return Err(Error::Parse(format!(
                        "layer {k}: weight row has {} entries, expected {fan_in}",
                        row.len()
                    )));
                }
                weights.extend(row);
            }
            let bias = parse_list::<f64>(field(next("bias")?, "b")?)?;
            layers.push(Layer {
                fan_in,
                fan_out,
                weights,
                bias,
            });
        }
        Self::from_layers(layers, activation, seed)
    }
}

fn field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .filter(|rest| rest.is_empty() || rest.starts_with(' '))
        .map(str::trim)
        .ok_or_else(|| Error::Parse(format!("expected '{key} …', found '{line}'")))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    s.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|e| Error::Parse(format!("'{t}': {e}"))))
        .collect()
}

pub fn mlp_eval(p: &MlpParams, x: &[f64]) -> Result<Vec<f64>> {
    p.forward(x)
}

/// Value and Jacobian-vector product along `x.tangent`.
pub fn mlp_eval_dual(p: &MlpParams, x: &DualVector) -> Result<DualVector> {
    let out: Vec<Dual> = p.forward(&x.to_duals())?;
    Ok(DualVector::from_duals(&out))
}

/// How network outputs are mapped before use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMap {
    Identity,
    /// Strictly positive outputs, for diffusions.
    Softplus,
}

/// An MLP of the state, `z ↦ map(net(z))`, used as a drift or diffusion.
#[derive(Debug, Clone)]
pub struct MlpField {
    pub params: Arc<MlpParams>,
    pub output: OutputMap,
}

impl MlpField {
    pub fn new(params: MlpParams, output: OutputMap) -> Self {
        Self {
            params: Arc::new(params),
            output,
        }
    }
}

impl GenericField for MlpField {
    fn dim_in(&self) -> usize {
        self.params.fan_in()
    }
    fn dim_out(&self) -> usize {
        self.params.fan_out()
    }
    fn apply<S: Real>(&self, _t: f64, z: &[S]) -> Result<Vec<S>> {
        let out = self.params.forward(z)?;
        Ok(match self.output {
            OutputMap::Identity => out,
            OutputMap::Softplus => out.into_iter().map(softplus).collect(),
        })
    }
}

/// Scalar MLP usable as an unnormalized log-density.
#[derive(Debug, Clone)]
pub struct MlpScalarField {
    pub params: Arc<MlpParams>,
}

impl crate::field::GenericScalarField for MlpScalarField {
    fn dim_in(&self) -> usize {
        self.params.fan_in()
    }
    fn apply<S: Real>(&self, z: &[S]) -> Result<S> {
        Ok(self.params.forward(z)?[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn celu(x: f64) -> f64 {
        x.max(0.0) + (x.exp() - 1.0).min(0.0)
    }

    #[test]
    fn paper_architecture_shapes() {
        let p = mlp_init(&[1, 64, 64, 64, 1], Activation::Celu, 0).unwrap();
        assert_eq!(p.shapes(), vec![(64, 1), (64, 64), (64, 64), (1, 64)]);
        assert!(p.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn init_is_deterministic_and_seed_sensitive() {
        let a = mlp_init(&[1, 64, 64, 64, 1], Activation::Celu, 0).unwrap();
        let b = mlp_init(&[1, 64, 64, 64, 1], Activation::Celu, 0).unwrap();
        let c = mlp_init(&[1, 64, 64, 64, 1], Activation::Celu, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.checksum(), b.checksum());
        assert_ne!(a.checksum(), c.checksum());
    }

    #[test]
    fn glorot_std() {
        for seed in [0, 1] {
            let p = mlp_init(&[64, 64, 64], Activation::Celu, seed).unwrap();
            let w = &p.layers[1].weights;
            assert!(w.len() >= 4096);
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            let std = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
            let target = (2.0f64 / 128.0).sqrt();
            assert!((std / target - 1.0).abs() < 0.2, "std {std} vs {target}");
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(mlp_init(&[], Activation::Celu, 0).is_err());
        assert!(mlp_init(&[3], Activation::Celu, 0).is_err());
        assert!(mlp_init(&[1, 0, 1], Activation::Celu, 0).is_err());
    }

    #[test]
    fn constant_output_from_bias() {
        let mut p = mlp_init(&[2, 5, 1], Activation::Gelu, 3).unwrap();
        for l in &mut p.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        p.layers[1].bias[0] = 0.75;
        for x in [[0.0, 0.0], [3.0, -1.0]] {
            assert_eq!(mlp_eval(&p, &x).unwrap(), vec![0.75]);
        }
        let d = mlp_eval_dual(&p, &DualVector::basis(&[0.2, 0.1], 0)).unwrap();
        assert_eq!(d.tangent, vec![0.0]);
    }

    #[test]
    fn single_affine_layer_is_identity() {
        let p = MlpParams::from_layers(
            vec![Layer {
                fan_in: 1,
                fan_out: 1,
                weights: vec![1.0],
                bias: vec![0.0],
            }],
            Activation::Celu,
            0,
        )
        .unwrap();
        assert_eq!(mlp_eval(&p, &[-2.5]).unwrap(), vec![-2.5]);
    }

    #[test]
    fn tiny_net_by_hand() {
        let p = MlpParams::from_layers(
            vec![
                Layer {
                    fan_in: 1,
                    fan_out: 2,
                    weights: vec![1.5, -2.0],
                    bias: vec![0.1, 0.3],
                },
                Layer {
                    fan_in: 2,
                    fan_out: 1,
                    weights: vec![0.7, -1.1],
                    bias: vec![0.05],
                },
            ],
            Activation::Celu,
            0,
        )
        .unwrap();
        for x in [-1.3, 0.0, 0.4, 2.0] {
            let expect = 0.7 * celu(1.5 * x + 0.1) - 1.1 * celu(-2.0 * x + 0.3) + 0.05;
            assert_abs_diff_eq!(mlp_eval(&p, &[x]).unwrap()[0], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn affine_tangent_is_column() {
        let p = MlpParams::from_layers(
            vec![Layer {
                fan_in: 2,
                fan_out: 3,
                weights: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                bias: vec![0.0; 3],
            }],
            Activation::Celu,
            0,
        )
        .unwrap();
        let d = mlp_eval_dual(&p, &DualVector::basis(&[0.3, -0.2], 0)).unwrap();
        assert_eq!(d.tangent, vec![1.0, 3.0, 5.0]);
    }

    #[test]
    fn dual_matches_finite_differences_for_every_activation() {
        for act in Activation::ALL {
            let p = mlp_init(&[1, 64, 64, 64, 1], act, 0).unwrap();
            let x = 0.37;
            let d = mlp_eval_dual(&p, &DualVector::basis(&[x], 0)).unwrap();
            let h = 1e-5;
            let fd = (mlp_eval(&p, &[x + h]).unwrap()[0] - mlp_eval(&p, &[x - h]).unwrap()[0]) / (2.0 * h);
            assert_eq!(d.value, mlp_eval(&p, &[x]).unwrap());
            assert_abs_diff_eq!(d.tangent[0], fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn activation_reference_values() {
        assert_abs_diff_eq!(Activation::Celu.apply(-1.0), (-1f64).exp() - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(Activation::Gelu.apply(1.0), 0.841_344_746_068_542_9, epsilon = 1e-12);
        assert_abs_diff_eq!(Activation::Selu.apply(1.0), SELU_LAMBDA, epsilon = 1e-15);
        assert_abs_diff_eq!(Activation::Silu.apply(1.0), 1.0 / (1.0 + (-1f64).exp()), epsilon = 1e-15);
        assert_abs_diff_eq!(softplus(0.0), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(softplus(800.0), 800.0, epsilon = 1e-12);
        assert!(softplus(-800.0) >= 0.0);
    }

    #[test]
    fn activation_names_parse() {
        for a in Activation::ALL {
            assert_eq!(a.name().parse::<Activation>().unwrap(), a);
        }
        assert!("relu".parse::<Activation>().is_err());
    }

    #[test]
    fn truncated_dump_is_an_error() {
        let text = mlp_init(&[2, 3, 1], Activation::Elu, 1).unwrap().to_text();
        let cut: String = text.lines().take(6).collect::<Vec<_>>().join("\n");
        assert!(MlpParams::from_text(&cut).is_err());
    }

    proptest! {
        #[test]
        fn text_dump_round_trips(seed in any::<u64>(), hidden in 1usize..6, act in 0usize..5) {
            let p = mlp_init(&[2, hidden, 3], Activation::ALL[act], seed).unwrap();
            let q = MlpParams::from_text(&p.to_text()).unwrap();
            prop_assert_eq!(p, q);
        }
    }
}
