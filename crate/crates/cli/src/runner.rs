//! Builds the dynamics for each parameterization, fans (seed, sample) jobs out
//! to a bounded worker pool and collects the analysis results in a fixed
//! (parameterization, seed, sample) order.

use std::sync::Arc;

use log::{debug, info};
use rayon::prelude::*;
use viable_sde::analysis::{
    check_boundary_conditions, distribution_distance, stationary_flux_max, viability, ConditionReport, ViabilityReport,
};
use viable_sde::dynamics::{
    make_absorbed, make_sigmoid_transformed, make_stationary, make_wsp, mlp_dynamics, Calculus, DynamicsSpec,
    StationaryConfig, WspConfig,
};
use viable_sde::field::SharedScalarField;
use viable_sde::geometry::Polyhedron;
use viable_sde::solvers::{integrate_sde, simulate_kl_sde, NoiseStream, Scheme, StepControl, Trajectory};

use crate::config::{
    BaseSpec, ConditionsConfig, Parameterization, SimulateConfig, SolverKind, TargetSpec, WspSpec, MEMBERSHIP_TOL,
};
use crate::error::{CliError, CliResult};

/// Interior points for the stationary flux residual.
pub const FLUX_POINTS: usize = 1000;
/// Histogram bins for the total-variation distance.
pub const HIST_BINS: usize = 40;

/// Everything needed to build dynamics for one (parameterization, seed).
pub struct Builder<'a> {
    pub poly: Arc<Polyhedron>,
    pub base: &'a BaseSpec,
    pub wsp: &'a WspSpec,
    pub calculus: Calculus,
    pub target: Option<SharedScalarField>,
}

/// Dynamics of one panel, plus the stationary configuration when there is one.
pub struct PanelDynamics {
    pub spec: DynamicsSpec,
    pub stationary: Option<StationaryConfig>,
}

impl Builder<'_> {
    pub fn base_dynamics(&self, seed: u64) -> viable_sde::Result<DynamicsSpec> {
        let act = self
            .base
            .activation()
            .map_err(|e| viable_sde::Error::Config(e.to_string()))?;
        mlp_dynamics(self.poly.dim(), &self.base.hidden, act, seed, self.calculus)
    }

    fn wsp_config(&self, base: DynamicsSpec) -> viable_sde::Result<WspConfig> {
        let mut cfg = WspConfig::new(base, self.poly.clone());
        cfg.weights = self.wsp.weights()?;
        cfg.gamma = self.wsp.gamma;
        cfg.eps = self.wsp.eps;
        Ok(cfg)
    }

    pub fn build(&self, p: Parameterization, seed: u64) -> viable_sde::Result<PanelDynamics> {
        let base = self.base_dynamics(seed)?;
        let mut out = PanelDynamics {
            spec: base.clone(),
            stationary: None,
        };
        match p {
            Parameterization::Unconstrained => {}
            Parameterization::SigmoidIto => out.spec = make_sigmoid_transformed(&base)?,
            Parameterization::Absorbed => {
                out.spec = make_absorbed(base.drift, base.diffusion, self.calculus)?;
            }
            Parameterization::Wsp => out.spec = make_wsp(&self.wsp_config(base)?)?,
            Parameterization::WspStationary => {
                let target = self
                    .target
                    .clone()
                    .ok_or_else(|| viable_sde::Error::Config("wsp_stationary needs a target".into()))?;
                let diffusion = make_wsp(&self.wsp_config(base)?)?.diffusion;
                let cfg = StationaryConfig::new(diffusion, target)?;
                out.spec = make_stationary(&cfg)?;
                out.stationary = Some(cfg);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub seed: u64,
    pub sample: u32,
    pub traj: Trajectory,
    pub viability: ViabilityReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryStats {
    /// Pooled post-burn-in first coordinates of every run.
    pub samples: Vec<f64>,
    pub ks: f64,
    pub tv: f64,
    /// Largest flux residual over the seeds.
    pub flux: f64,
    pub support: (f64, f64),
}

#[derive(Debug)]
pub struct Panel {
    pub param: Parameterization,
    pub runs: Vec<Run>,
    /// Boundary-condition report per seed; evaluation errors are kept as text.
    pub conditions: Vec<(u64, Result<ConditionReport, String>)>,
    pub stationary: Option<Result<StationaryStats, String>>,
}

impl Panel {
    pub fn seeds_exited(&self) -> usize {
        let mut seeds: Vec<u64> = self
            .runs
            .iter()
            .filter(|r| r.viability.first_exit_time.is_some())
            .map(|r| r.seed)
            .collect();
        seeds.dedup();
        seeds.len()
    }
}

#[derive(Debug)]
pub struct Simulation {
    pub poly: Polyhedron,
    pub panels: Vec<Panel>,
}

impl Simulation {
    pub fn panel(&self, p: Parameterization) -> Option<&Panel> {
        self.panels.iter().find(|x| x.param == p)
    }
}

pub fn calculus_for(solver: SolverKind) -> Calculus {
    match solver {
        SolverKind::KlOde => Calculus::Stratonovich,
        SolverKind::Milstein | SolverKind::Euler => Calculus::Ito,
    }
}

/// Runs `f` on a pool bounded by the machine's parallelism.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn simulate_one(cfg: &SimulateConfig, dynamics: &PanelDynamics, seed: u64, sample: u32) -> viable_sde::Result<Trajectory> {
    let s = &cfg.solver;
    let every = cfg.record_every();
    let (spec, z0) = (&dynamics.spec, &cfg.z0);
    let traj = match s.solver {
        SolverKind::Milstein | SolverKind::Euler => {
            let scheme = if s.solver == SolverKind::Milstein {
                Scheme::Milstein
            } else {
                Scheme::EulerMaruyama
            };
            let noise = NoiseStream::new(seed, sample, spec.dim, s.dt, s.n_steps());
            integrate_sde(spec, z0, 0.0, s.horizon, s.dt, &noise, scheme, every)?
        }
        SolverKind::KlOde => {
            let step = match (s.rtol, s.atol) {
                (Some(rtol), Some(atol)) => StepControl::Adaptive { rtol, atol },
                _ => StepControl::Fixed { dt: s.dt },
            };
            let mut t = simulate_kl_sde(spec, z0, s.horizon, s.terms, seed, sample, step)?;
            if every > 1 && matches!(step, StepControl::Fixed { .. }) {
                let last = t.len() - 1;
                let keep: Vec<usize> = (0..t.len()).filter(|&i| i % every == 0 || i == last).collect();
                t.times = keep.iter().map(|&i| t.times[i]).collect();
                t.states = keep.iter().map(|&i| t.states[i].clone()).collect();
            }
            t
        }
    };
    Ok(traj)
}

fn support_1d(poly: &Polyhedron) -> (f64, f64) {
    let (lo, hi) = poly.bounding_box();
    (lo[0], hi[0])
}

fn stationary_stats(
    cfg: &SimulateConfig,
    poly: &Polyhedron,
    runs: &[Run],
    dynamics: &[PanelDynamics],
) -> Result<StationaryStats, String> {
    let support = support_1d(poly);
    let target = cfg.target.as_ref().ok_or("no target")?.build();
    let mut flux: f64 = 0.0;
    for d in dynamics {
        let sc = d.stationary.as_ref().ok_or("missing stationary configuration")?;
        flux = flux.max(stationary_flux_max(sc, support, FLUX_POINTS).map_err(|e| e.to_string())?);
    }
    let mut samples = Vec::new();
    for r in runs {
        for (t, z) in r.traj.times.iter().zip(&r.traj.states) {
            if *t + 1e-12 < cfg.burn_in {
                continue;
            }
            let x = z[0];
            if x < support.0 - MEMBERSHIP_TOL || x > support.1 + MEMBERSHIP_TOL {
                return Err(format!("state {x} at t = {t} (seed {}) outside the support", r.seed));
            }
            samples.push(x.clamp(support.0, support.1));
        }
    }
    let (ks, tv) = distribution_distance(&samples, target.as_ref(), support, HIST_BINS).map_err(|e| e.to_string())?;
    Ok(StationaryStats {
        samples,
        ks,
        tv,
        flux,
        support,
    })
}

/// Simulates every configured parameterization. Fails on the first numeric
/// abort, naming the panel, seed and sample.
pub fn simulate(cfg: &SimulateConfig) -> CliResult<Simulation> {
    let poly = cfg.polyhedron.build()?;
    let shared = Arc::new(poly.clone());
    let builder = Builder {
        poly: shared,
        base: &cfg.base,
        wsp: &cfg.wsp,
        calculus: calculus_for(cfg.solver.solver),
        target: cfg.target.as_ref().map(TargetSpec::build),
    };
    let mut panels = Vec::new();
    for &p in &cfg.parameterizations {
        info!("{}: simulating {p}", cfg.name);
        let dynamics: Vec<PanelDynamics> = cfg
            .seeds
            .iter()
            .map(|&s| builder.build(p, s))
            .collect::<viable_sde::Result<_>>()?;
        let jobs: Vec<(usize, u64, u32)> = cfg
            .seeds
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| (0..cfg.samples_per_seed).map(move |k| (i, s, k)))
            .collect();
        let results: Vec<Result<Run, CliError>> = with_pool(|| {
            jobs.par_iter()
                .map(|&(i, seed, sample)| {
                    let traj = simulate_one(cfg, &dynamics[i], seed, sample).map_err(|source| CliError::Numeric {
                        panel: p.name().into(),
                        seed,
                        sample,
                        source,
                    })?;
                    let viability = viability(&traj, &poly, MEMBERSHIP_TOL);
                    debug!("{p} seed {seed} sample {sample}: exit {:?}", viability.first_exit_time);
                    Ok(Run {
                        seed,
                        sample,
                        traj,
                        viability,
                    })
                })
                .collect()
        });
        let runs = results.into_iter().collect::<CliResult<Vec<Run>>>()?;
        let conditions = with_pool(|| {
            cfg.seeds
                .par_iter()
                .zip(&dynamics)
                .map(|(&seed, d)| {
                    let rep = check_boundary_conditions(&d.spec, &poly, cfg.n_boundary_samples, &[0.0]);
                    (seed, rep.map_err(|e| e.to_string()))
                })
                .collect()
        });
        let stationary = (p == Parameterization::WspStationary).then(|| stationary_stats(cfg, &poly, &runs, &dynamics));
        panels.push(Panel {
            param: p,
            runs,
            conditions,
            stationary,
        });
    }
    Ok(Simulation { poly, panels })
}

/// Condition reports per (polyhedron, parameterization, seed), in config order.
pub struct ConditionsOutcome {
    pub entries: Vec<ConditionEntry>,
}

pub struct ConditionEntry {
    pub polyhedron: usize,
    pub label: String,
    pub param: Parameterization,
    pub seed: u64,
    pub report: Result<ConditionReport, String>,
}

pub fn run_conditions(cfg: &ConditionsConfig) -> CliResult<ConditionsOutcome> {
    let mut jobs = Vec::new();
    for (i, spec) in cfg.polyhedra.iter().enumerate() {
        let poly = Arc::new(spec.build()?);
        for &p in &cfg.parameterizations {
            for &seed in &cfg.seeds {
                jobs.push((i, spec.label(), poly.clone(), p, seed));
            }
        }
    }
    let entries = with_pool(|| {
        jobs.into_par_iter()
            .map(|(i, label, poly, p, seed)| {
                let builder = Builder {
                    poly: poly.clone(),
                    base: &cfg.base,
                    wsp: &cfg.wsp,
                    calculus: Calculus::Ito,
                    target: None,
                };
                let report = builder
                    .build(p, seed)
                    .and_then(|d| check_boundary_conditions(&d.spec, &poly, cfg.n_boundary_samples, &[0.0]))
                    .map_err(|e| e.to_string());
                ConditionEntry {
                    polyhedron: i,
                    label,
                    param: p,
                    seed,
                    report,
                }
            })
            .collect()
    });
    Ok(ConditionsOutcome { entries })
}
