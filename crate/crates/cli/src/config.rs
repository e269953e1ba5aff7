//! JSON experiment configuration. The `kind` field selects the experiment:
//! `simulate` (trajectories), `weight_field` (heatmaps of `w`) or
//! `conditions` (boundary condition suite).

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use viable_sde::dynamics::PAPER_HIDDEN;
use viable_sde::field::{GaussianLogDensity, MixtureLogDensity, SharedScalarField};
use viable_sde::geometry::{HalfSpace, Polyhedron};
use viable_sde::nets::Activation;
use viable_sde::weights::WeightParams;

use crate::error::{CliError, CliResult};

/// Tolerance for `z0 ∈ K` and for the CSV `in_k` column.
pub const MEMBERSHIP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Simulate(SimulateConfig),
    WeightField(WeightFieldConfig),
    Conditions(ConditionsConfig),
}

impl Experiment {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn name(&self) -> &str {
        match self {
            Experiment::Simulate(c) => &c.name,
            Experiment::WeightField(c) => &c.name,
            Experiment::Conditions(c) => &c.name,
        }
    }

    pub fn output(&self) -> Option<&PathBuf> {
        match self {
            Experiment::Simulate(c) => c.output.as_ref(),
            Experiment::WeightField(c) => c.output.as_ref(),
            Experiment::Conditions(c) => c.output.as_ref(),
        }
    }

    pub fn set_seeds(&mut self, seeds: Vec<u64>) {
        match self {
            Experiment::Simulate(c) => c.seeds = seeds,
            Experiment::Conditions(c) => c.seeds = seeds,
            Experiment::WeightField(_) => {}
        }
    }

    /// Every violation found, without running anything.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.name().is_empty() || self.name().contains(['/', '\\']) {
            out.push(format!("name: {:?} must be a nonempty file-name-safe string", self.name()));
        }
        match self {
            Experiment::Simulate(c) => c.validate(&mut out),
            Experiment::WeightField(c) => c.validate(&mut out),
            Experiment::Conditions(c) => c.validate(&mut out),
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum PolySpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Halfspaces(Vec<HalfSpaceSpec>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HalfSpaceSpec {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl PolySpec {
    pub fn unit_interval() -> Self {
        PolySpec::Box {
            lo: vec![0.0],
            hi: vec![1.0],
        }
    }

    pub fn unit_square() -> Self {
        PolySpec::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        }
    }

    pub fn triangle() -> Self {
        PolySpec::Halfspaces(vec![
            HalfSpaceSpec {
                u: vec![0.0, 0.0],
                v: vec![1.0, 0.0],
            },
            HalfSpaceSpec {
                u: vec![0.0, 0.0],
                v: vec![0.0, 1.0],
            },
            HalfSpaceSpec {
                u: vec![1.0, 0.0],
                v: vec![-1.0, -1.0],
            },
        ])
    }

    pub fn build(&self) -> viable_sde::Result<Polyhedron> {
        match self {
            PolySpec::Box { lo, hi } => Polyhedron::boxed(lo, hi),
            PolySpec::Halfspaces(hs) => Polyhedron::new(
                hs.iter()
                    .map(|h| HalfSpace::new(h.u.clone(), h.v.clone()))
                    .collect::<viable_sde::Result<_>>()?,
            ),
        }
    }

    pub fn label(&self) -> String {
        if *self == PolySpec::unit_interval() {
            return "interval".into();
        }
        if *self == PolySpec::triangle() {
            return "triangle".into();
        }
        match self {
            PolySpec::Box { lo, .. } => format!("box{}d", lo.len()),
            PolySpec::Halfspaces(hs) => format!("poly{}", hs.len()),
        }
    }

    fn is_unit_interval(&self) -> bool {
        match self.build() {
            Ok(k) => k.dim() == 1 && k.bounding_box() == (&[0.0][..], &[1.0][..]),
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Parameterization {
    Unconstrained,
    SigmoidIto,
    Absorbed,
    Wsp,
    WspStationary,
}

impl Parameterization {
    pub fn name(self) -> &'static str {
        match self {
            Parameterization::Unconstrained => "unconstrained",
            Parameterization::SigmoidIto => "sigmoid_ito",
            Parameterization::Absorbed => "absorbed",
            Parameterization::Wsp => "wsp",
            Parameterization::WspStationary => "wsp_stationary",
        }
    }

    /// Whether trajectories are meant to stay in `K`, so `z0` must lie in it.
    pub fn constrained(self) -> bool {
        !matches!(self, Parameterization::Unconstrained)
    }

    fn needs_unit_interval(self) -> bool {
        matches!(self, Parameterization::SigmoidIto | Parameterization::Absorbed)
    }
}

impl fmt::Display for Parameterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: String,
}

fn default_hidden() -> Vec<usize> {
    PAPER_HIDDEN.to_vec()
}

fn default_activation() -> String {
    "celu".into()
}

impl Default for BaseSpec {
    fn default() -> Self {
        Self {
            hidden: default_hidden(),
            activation: default_activation(),
        }
    }
}

impl BaseSpec {
    pub fn activation(&self) -> CliResult<Activation> {
        self.activation
            .parse()
            .map_err(|e: viable_sde::Error| CliError::Config(format!("base.activation: {e}")))
    }

    fn validate(&self, out: &mut Vec<String>) {
        if self.hidden.contains(&0) {
            out.push("base.hidden: layer widths must be at least 1".into());
        }
        if let Err(e) = self.activation() {
            out.push(e.to_string());
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WspSpec {
    #[serde(default = "ten")]
    pub alpha: f64,
    #[serde(default = "ten")]
    pub beta: f64,
    #[serde(default = "one_f")]
    pub gamma: f64,
    #[serde(default = "eps_default")]
    pub eps: f64,
}

fn ten() -> f64 {
    10.0
}
fn one_f() -> f64 {
    1.0
}
fn eps_default() -> f64 {
    0.01
}
fn one_u32() -> u32 {
    1
}
fn forty() -> usize {
    40
}

impl Default for WspSpec {
    fn default() -> Self {
        Self {
            alpha: 10.0,
            beta: 10.0,
            gamma: 1.0,
            eps: 0.01,
        }
    }
}

impl WspSpec {
    pub fn weights(&self) -> viable_sde::Result<WeightParams> {
        WeightParams::new(self.alpha, self.beta)
    }

    fn validate(&self, out: &mut Vec<String>) {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma), ("eps", self.eps)] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("wsp.{name} must be positive, got {v}"));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Milstein,
    Euler,
    KlOde,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub solver: SolverKind,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "R", default = "forty")]
    pub terms: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
}

impl SolverSpec {
    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    fn validate(&self, out: &mut Vec<String>) {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push("dt must be positive".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            out.push("T must be positive".into());
        }
        if self.dt > 0.0 && self.horizon > 0.0 {
            let n = (self.horizon / self.dt).round();
            if n < 1.0 || (n * self.dt - self.horizon).abs() > 1e-9 {
                out.push(format!("dt = {} must divide T = {}", self.dt, self.horizon));
            }
        }
        if self.solver == SolverKind::KlOde && self.terms == 0 {
            out.push("R must be at least 1".into());
        }
        match (self.rtol, self.atol) {
            (Some(r), Some(a)) if !(r > 0.0 && a > 0.0) => out.push("rtol and atol must be positive".into()),
            (Some(_), None) | (None, Some(_)) => out.push("rtol and atol must be given together".into()),
            _ => {}
        }
        if self.rtol.is_some() && self.solver != SolverKind::KlOde {
            out.push("rtol/atol only apply to the kl_ode solver".into());
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    /// `log p̃ = −(z − mean)² / (2 std²)`.
    Gauss { mean: f64, std: f64 },
    /// Equal bumps at 0.3 and 0.7, `log Σ exp(−(z − c)² / 0.005)`.
    Bimodal,
}

impl TargetSpec {
    pub fn build(&self) -> SharedScalarField {
        match self {
            TargetSpec::Gauss { mean, std } => Arc::new(GaussianLogDensity {
                mean: vec![*mean],
                std: vec![*std],
            }),
            TargetSpec::Bimodal => Arc::new(MixtureLogDensity::bimodal()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Assertion {
    /// Every stored state of every run lies in `K` within `tol`.
    Viable {
        parameterization: Parameterization,
        #[serde(default = "membership_tol")]
        tol: f64,
    },
    /// At least `min_seeds` seeds have a run that leaves `K`.
    Exits {
        parameterization: Parameterization,
        min_seeds: usize,
    },
    /// Boundary conditions hold for every seed.
    Conditions { parameterization: Parameterization },
    /// Kolmogorov–Smirnov distance of pooled post-burn-in states to the target.
    Ks { parameterization: Parameterization, max: f64 },
    /// Stationary flux residual on 1 000 interior points.
    Flux { parameterization: Parameterization, max: f64 },
}

fn membership_tol() -> f64 {
    MEMBERSHIP_TOL
}

impl Assertion {
    pub fn parameterization(&self) -> Parameterization {
        match self {
            Assertion::Viable { parameterization, .. }
            | Assertion::Exits { parameterization, .. }
            | Assertion::Conditions { parameterization }
            | Assertion::Ks { parameterization, .. }
            | Assertion::Flux { parameterization, .. } => *parameterization,
        }
    }

    pub fn label(&self) -> String {
        let check = match self {
            Assertion::Viable { .. } => "viable",
            Assertion::Exits { .. } => "exits",
            Assertion::Conditions { .. } => "conditions",
            Assertion::Ks { .. } => "ks",
            Assertion::Flux { .. } => "flux",
        };
        format!("assert.{check}.{}", self.parameterization())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub name: String,
    pub polyhedron: PolySpec,
    pub parameterizations: Vec<Parameterization>,
    #[serde(default)]
    pub base: BaseSpec,
    #[serde(default)]
    pub wsp: WspSpec,
    pub solver: SolverSpec,
    pub z0: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default = "one_u32")]
    pub samples_per_seed: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    /// Time between stored states; every step when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_dt: Option<f64>,
    /// States before this time are left out of histograms and distances.
    #[serde(default)]
    pub burn_in: f64,
    /// Boundary samples per facet for the per-seed condition report.
    #[serde(default = "report_samples")]
    pub n_boundary_samples: usize,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn report_samples() -> usize {
    100
}

impl SimulateConfig {
    /// Stored-state stride in solver steps.
    pub fn record_every(&self) -> usize {
        match self.record_dt {
            Some(r) if self.solver.dt > 0.0 => ((r / self.solver.dt).round() as usize).max(1),
            _ => 1,
        }
    }

    fn validate(&self, out: &mut Vec<String>) {
        self.solver.validate(out);
        self.base.validate(out);
        self.wsp.validate(out);
        if self.seeds.is_empty() {
            out.push("seeds must be nonempty".into());
        }
        if self.samples_per_seed == 0 {
            out.push("samples_per_seed must be at least 1".into());
        }
        if self.parameterizations.is_empty() {
            out.push("parameterizations must be nonempty".into());
        }
        let mut seen = Vec::new();
        for p in &self.parameterizations {
            if seen.contains(p) {
                out.push(format!("parameterizations: {p} listed twice"));
            }
            seen.push(*p);
        }
        if let Some(r) = self.record_dt {
            if !(r > 0.0) {
                out.push("record_dt must be positive".into());
            }
        }
        if !(self.burn_in >= 0.0) || (self.solver.horizon > 0.0 && self.burn_in >= self.solver.horizon) {
            out.push("burn_in must lie in [0, T)".into());
        }
        let poly = match self.polyhedron.build() {
            Ok(k) => Some(k),
            Err(e) => {
                out.push(format!("polyhedron: {e}"));
                None
            }
        };
        if let Some(k) = &poly {
            if self.z0.len() != k.dim() {
                out.push(format!("z0 has {} entries, polyhedron is {}-dimensional", self.z0.len(), k.dim()));
            } else if self.parameterizations.iter().any(|p| p.constrained()) && !k.contains(&self.z0, MEMBERSHIP_TOL) {
                out.push("z0 outside polyhedron".into());
            }
        }
        for p in &self.parameterizations {
            if p.needs_unit_interval() && !self.polyhedron.is_unit_interval() {
                out.push(format!("{p} is defined on K = [0, 1] only"));
            }
            if p.needs_unit_interval() && self.z0.iter().any(|&z| z <= 0.0 || z >= 1.0) {
                out.push(format!("{p} needs z0 strictly inside (0, 1)"));
            }
        }
        if self.parameterizations.contains(&Parameterization::WspStationary) {
            if self.target.is_none() {
                out.push("target: required by wsp_stationary".into());
            }
            if poly.as_ref().is_some_and(|k| k.dim() != 1) {
                out.push("wsp_stationary is one-dimensional".into());
            }
            if self.solver.solver == SolverKind::KlOde {
                out.push("wsp_stationary needs an Ito solver (milstein or euler)".into());
            }
        }
        if let Some(TargetSpec::Gauss { std, .. }) = &self.target {
            if !(*std > 0.0) {
                out.push("target.std must be positive".into());
            }
        }
        for a in &self.assertions {
            if !self.parameterizations.contains(&a.parameterization()) {
                out.push(format!("{}: parameterization not simulated", a.label()));
            }
            if matches!(a, Assertion::Ks { .. } | Assertion::Flux { .. })
                && a.parameterization() != Parameterization::WspStationary
            {
                out.push(format!("{}: only defined for wsp_stationary", a.label()));
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WeightFieldConfig {
    pub name: String,
    pub polyhedra: Vec<PolySpec>,
    #[serde(default)]
    pub wsp: WspSpec,
    pub resolution: usize,
    #[serde(default)]
    pub quiver: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl WeightFieldConfig {
    fn validate(&self, out: &mut Vec<String>) {
        self.wsp.validate(out);
        if self.resolution < 2 {
            out.push("resolution must be at least 2".into());
        }
        if self.polyhedra.is_empty() {
            out.push("polyhedra must be nonempty".into());
        }
        for (i, p) in self.polyhedra.iter().enumerate() {
            match p.build() {
                Ok(k) if k.dim() > 2 => out.push(format!("polyhedra[{i}]: plots support dimension 1 or 2, got {}", k.dim())),
                Ok(_) => {}
                Err(e) => out.push(format!("polyhedra[{i}]: {e}")),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConditionsConfig {
    pub name: String,
    pub polyhedra: Vec<PolySpec>,
    pub parameterizations: Vec<Parameterization>,
    #[serde(default)]
    pub base: BaseSpec,
    #[serde(default)]
    pub wsp: WspSpec,
    pub seeds: Vec<u64>,
    #[serde(default = "facet_samples")]
    pub n_boundary_samples: usize,
    /// Expected overall outcome per parameterization name.
    #[serde(default)]
    pub expect: BTreeMap<Parameterization, Expectation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn facet_samples() -> usize {
    viable_sde::analysis::DEFAULT_FACET_SAMPLES
}

impl ConditionsConfig {
    fn validate(&self, out: &mut Vec<String>) {
        self.base.validate(out);
        self.wsp.validate(out);
        if self.seeds.is_empty() {
            out.push("seeds must be nonempty".into());
        }
        if self.n_boundary_samples == 0 {
            out.push("n_boundary_samples must be at least 1".into());
        }
        for (i, p) in self.polyhedra.iter().enumerate() {
            if let Err(e) = p.build() {
                out.push(format!("polyhedra[{i}]: {e}"));
            }
            for q in &self.parameterizations {
                if q.needs_unit_interval() && !p.is_unit_interval() {
                    out.push(format!("polyhedra[{i}]: {q} is defined on K = [0, 1] only"));
                }
                if *q == Parameterization::WspStationary {
                    out.push("wsp_stationary has no condition suite; use simulate with a flux assertion".into());
                }
            }
        }
        for p in self.expect.keys() {
            if !self.parameterizations.contains(p) {
                out.push(format!("expect.{p}: parameterization not checked"));
            }
        }
    }
}
