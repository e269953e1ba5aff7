//! Built-in experiment configurations.

use std::collections::BTreeMap;

use crate::config::{
    Assertion, BaseSpec, ConditionsConfig, Expectation, Experiment, Parameterization, PolySpec, SimulateConfig,
    SolverKind, SolverSpec, TargetSpec, WeightFieldConfig, WspSpec, MEMBERSHIP_TOL,
};

pub const BUILTINS: [&str; 5] = ["fig1_weights", "fig2_top", "fig2_stationary", "fig3_kl", "conditions_suite"];

pub fn list_builtins() -> Vec<&'static str> {
    BUILTINS.to_vec()
}

pub fn builtin(name: &str) -> Option<Experiment> {
    Some(match name {
        "fig1_weights" => fig1_weights(),
        "fig2_top" => Experiment::Simulate(fig2_top()),
        "fig2_stationary" => Experiment::Simulate(fig2_stationary()),
        "fig3_kl" => Experiment::Simulate(fig3_kl()),
        "conditions_suite" => conditions_suite(),
        _ => return None,
    })
}

fn fig1_weights() -> Experiment {
    Experiment::WeightField(WeightFieldConfig {
        name: "fig1_weights".into(),
        polyhedra: vec![PolySpec::unit_interval(), PolySpec::unit_square(), PolySpec::triangle()],
        wsp: WspSpec::default(),
        resolution: 80,
        quiver: true,
        output: None,
    })
}

use Parameterization::*;

/// Unconstrained, sigmoid, absorbed and WSP dynamics from `z0 = 0.99` on `[0, 1]`.
pub fn fig2_top() -> SimulateConfig {
    SimulateConfig {
        name: "fig2_top".into(),
        polyhedron: PolySpec::unit_interval(),
        parameterizations: vec![Unconstrained, SigmoidIto, Absorbed, Wsp],
        base: BaseSpec::default(),
        wsp: WspSpec::default(),
        solver: SolverSpec {
            solver: SolverKind::Milstein,
            dt: 1e-3,
            horizon: 5.0,
            terms: 40,
            rtol: None,
            atol: None,
        },
        z0: vec![0.99],
        seeds: (0..5).collect(),
        samples_per_seed: 3,
        target: None,
        record_dt: None,
        burn_in: 0.0,
        n_boundary_samples: 100,
        assertions: vec![
            Assertion::Viable {
                parameterization: Wsp,
                tol: MEMBERSHIP_TOL,
            },
            Assertion::Exits {
                parameterization: Unconstrained,
                min_seeds: 3,
            },
            Assertion::Conditions { parameterization: Wsp },
        ],
        output: None,
    }
}

/// The same grid with the Stratonovich dynamics driven by the cosine expansion.
pub fn fig3_kl() -> SimulateConfig {
    let mut c = fig2_top();
    c.name = "fig3_kl".into();
    c.solver.solver = SolverKind::KlOde;
    c
}

/// Stationary WSP dynamics for the bimodal stand-in target.
pub fn fig2_stationary() -> SimulateConfig {
    SimulateConfig {
        name: "fig2_stationary".into(),
        polyhedron: PolySpec::unit_interval(),
        parameterizations: vec![WspStationary],
        base: BaseSpec::default(),
        wsp: WspSpec::default(),
        solver: SolverSpec {
            solver: SolverKind::Milstein,
            dt: 1e-3,
            horizon: 200.0,
            terms: 40,
            rtol: None,
            atol: None,
        },
        z0: vec![0.5],
        seeds: (0..5).collect(),
        samples_per_seed: 1,
        target: Some(TargetSpec::Bimodal),
        record_dt: Some(0.5),
        burn_in: 20.0,
        n_boundary_samples: 100,
        assertions: vec![
            Assertion::Viable {
                parameterization: WspStationary,
                tol: MEMBERSHIP_TOL,
            },
            Assertion::Flux {
                parameterization: WspStationary,
                max: 1e-6,
            },
        ],
        output: None,
    }
}

pub fn conditions_suite() -> Experiment {
    Experiment::Conditions(ConditionsConfig {
        name: "conditions_suite".into(),
        polyhedra: vec![PolySpec::unit_square(), PolySpec::triangle()],
        parameterizations: vec![Wsp, Unconstrained],
        base: BaseSpec::default(),
        wsp: WspSpec::default(),
        seeds: (0..5).collect(),
        n_boundary_samples: viable_sde::analysis::DEFAULT_FACET_SAMPLES,
        expect: BTreeMap::from([(Wsp, Expectation::Pass), (Unconstrained, Expectation::Fail)]),
        output: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_is_valid() {
        for name in BUILTINS {
            let exp = builtin(name).unwrap();
            assert_eq!(exp.name(), name);
            assert!(exp.validate().is_empty(), "{name}: {:?}", exp.validate());
        }
        assert!(builtin("fig9").is_none());
    }

    #[test]
    fn builtins_round_trip_through_json() {
        for name in BUILTINS {
            let exp = builtin(name).unwrap();
            let text = serde_json::to_string_pretty(&exp).unwrap();
            assert_eq!(Experiment::from_json(&text).unwrap(), exp);
        }
    }
}
