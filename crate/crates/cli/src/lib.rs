//! Experiment runner for `viable-sde`: JSON configs and builtins, parallel
//! simulation, CSV/SVG artifacts and PASS/FAIL summaries.

pub mod artifacts;
pub mod builtins;
pub mod config;
pub mod error;
pub mod runner;
pub mod svg;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use viable_sde::analysis::{check_boundary_conditions, format_report, ReportLine, DEFAULT_FACET_SAMPLES};
use viable_sde::dynamics::{make_wsp, Calculus, DynamicsSpec, WspConfig};
use viable_sde::field::{ConstantField, SharedField};
use viable_sde::geometry::Polyhedron;
use viable_sde::nets::{MlpField, MlpParams, OutputMap};

pub use config::Experiment;
pub use error::{CliError, CliResult};

use config::Expectation;

/// Outcome of one experiment: assertion lines and the files written.
#[derive(Debug, Default)]
pub struct Summary {
    pub lines: Vec<ReportLine>,
    pub files: Vec<PathBuf>,
}

impl Summary {
    pub fn failures(&self) -> usize {
        self.lines.iter().filter(|l| !l.pass).count()
    }

    pub fn text(&self) -> String {
        format_report(&self.lines)
    }
}

/// Loads a builtin by name, or a JSON config from a path.
pub fn load_experiment(arg: &str) -> CliResult<Experiment> {
    if let Some(exp) = builtins::builtin(arg) {
        return Ok(exp);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| {
        CliError::Config(format!("{arg}: not a builtin ({}) and not readable: {e}", builtins::BUILTINS.join(", ")))
    })?;
    Experiment::from_json(&text)
}

/// Validates, runs and writes the artifacts of `exp` under `out/<name>/`.
pub fn run_experiment(exp: &Experiment, out: &Path) -> CliResult<Summary> {
    let problems = exp.validate();
    if !problems.is_empty() {
        return Err(CliError::Invalid(problems));
    }
    let dir = out.join(exp.name());
    let mut summary = Summary::default();
    match exp {
        Experiment::Simulate(cfg) => {
            let sim = runner::simulate(cfg)?;
            summary.files = artifacts::write_simulation(cfg, &sim, &dir)?;
            summary.lines = cfg.assertions.iter().map(|a| artifacts::evaluate(a, &sim)).collect();
        }
        Experiment::WeightField(cfg) => {
            for (i, spec) in cfg.polyhedra.iter().enumerate() {
                let poly = spec.build()?;
                let svg = artifacts::plot_weight_field(&poly, &cfg.wsp, cfg.resolution, cfg.quiver)?;
                let path = dir.join(format!("{i}_{}_weights.svg", spec.label()));
                summary.files.push(artifacts::write(&path, &svg)?);
            }
        }
        Experiment::Conditions(cfg) => {
            let outcome = runner::run_conditions(cfg)?;
            for (i, spec) in cfg.polyhedra.iter().enumerate() {
                for &p in &cfg.parameterizations {
                    let entries: Vec<_> =
                        outcome.entries.iter().filter(|e| e.polyhedron == i && e.param == p).collect();
                    let mut lines = Vec::new();
                    for e in &entries {
                        match &e.report {
                            Ok(r) => lines.extend(r.lines(&format!("seed{}.", e.seed))),
                            Err(_) => lines.push(ReportLine::new(format!("seed{}.evaluated", e.seed), f64::NAN, false)),
                        }
                    }
                    let stem = format!("{i}_{}_{p}", spec.label());
                    summary.files.push(artifacts::write(&dir.join(format!("{stem}_report.txt")), &format_report(&lines))?);
                    let passing = entries.iter().filter(|e| e.report.as_ref().is_ok_and(|r| r.pass())).count();
                    if let Some(expect) = cfg.expect.get(&p) {
                        let ok = match expect {
                            Expectation::Pass => passing == entries.len(),
                            Expectation::Fail => passing == 0,
                        };
                        summary.lines.push(ReportLine::new(format!("expect.{stem}.passing_seeds"), passing as f64, ok));
                    }
                }
            }
        }
    }
    summary.files.push(artifacts::write(&dir.join("summary.txt"), &summary.text())?);
    info!("{}: {} file(s), {} failing assertion(s)", exp.name(), summary.files.len(), summary.failures());
    Ok(summary)
}

/// Condition reports of a stored drift network, unconstrained and under WSP.
/// Without a diffusion network the diffusion is the constant 1.
pub fn check_weights(drift: &Path, diffusion: Option<&Path>, poly: Option<Polyhedron>) -> CliResult<Summary> {
    let load = |p: &Path| -> CliResult<MlpParams> { Ok(MlpParams::from_text(&std::fs::read_to_string(p)?)?) };
    let h = load(drift)?;
    let dim = h.fan_in();
    if h.fan_out() != dim {
        return Err(CliError::Config(format!("drift network maps {} to {} dimensions", dim, h.fan_out())));
    }
    let g: SharedField = match diffusion {
        Some(p) => Arc::new(MlpField::new(load(p)?, OutputMap::Softplus)),
        None => Arc::new(ConstantField::filled(dim, 1.0)),
    };
    let poly = poly.unwrap_or_else(|| Polyhedron::unit_box(dim));
    let base = DynamicsSpec::new(Arc::new(MlpField::new(h, OutputMap::Identity)), g, Calculus::Ito)?;
    let wsp = make_wsp(&WspConfig::new(base.clone(), Arc::new(poly.clone())))?;
    let mut summary = Summary::default();
    for (name, spec) in [("unconstrained", &base), ("wsp", &wsp)] {
        let rep = check_boundary_conditions(spec, &poly, DEFAULT_FACET_SAMPLES, &[0.0])?;
        summary.lines.extend(rep.lines(&format!("{name}.")));
    }
    Ok(summary)
}
