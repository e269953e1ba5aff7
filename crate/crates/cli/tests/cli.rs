use std::path::Path;
use std::process::{Command, Output};

use viable_sde::geometry::Polyhedron;
use viable_sde::nets::{mlp_init, Activation};
use viable_sde::weights::{weight, WeightParams};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viable-sde")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_config(extra: &str) -> String {
    format!(
        r#"{{
            "kind": "simulate",
            "name": "small",
            "polyhedron": {{"box": {{"lo": [0], "hi": [1]}}}},
            "parameterizations": ["unconstrained", "wsp"],
            "base": {{"hidden": [16, 16]}},
            "solver": {{"solver": "milstein", "dt": 0.001, "T": 1.0}},
            "z0": [0.9],
            "seeds": [0, 1],
            "samples_per_seed": 2,
            "n_boundary_samples": 5{extra}
        }}"#
    )
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn list_names_every_builtin() {
    let o = bin(&["list"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(String::from).collect();
    for n in ["fig1_weights", "fig2_top", "fig2_stationary", "fig3_kl", "conditions_suite"] {
        assert!(names.iter().any(|x| x == n), "{n} missing");
    }
}

#[test]
fn validate_reports_all_problems() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_config("").replace("[0.9]", "[1.5]").replace("\"dt\": 0.001", "\"dt\": 0");
    let o = bin(&["validate", &write_config(dir.path(), &text)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("z0 outside polyhedron"), "{err}");
    assert!(err.contains("dt must be positive"), "{err}");
    assert!(bin(&["validate", "fig2_top"]).status.success());
}

#[test]
fn unknown_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_config("").replace("samples_per_seed", "samples_per_sed");
    let o = bin(&["run", &write_config(dir.path(), &text), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("samples_per_sed"));
}

#[test]
fn csv_is_bit_stable_and_in_k_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config(""));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = bin(&["run", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).is_empty());
    }
    let k = Polyhedron::unit_box(1);
    for p in ["unconstrained", "wsp"] {
        let x = std::fs::read(a.join("small").join(format!("{p}.csv"))).unwrap();
        let y = std::fs::read(b.join("small").join(format!("{p}.csv"))).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("seed,sample,t,z_1,in_k"));
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 2 * 2 * 1001);
        for r in &rows {
            let z: f64 = r[3].parse().unwrap();
            assert_eq!(r[4] == "1", k.contains(&[z], 1e-6));
        }
        // (seed, sample) order
        let keys: Vec<(u64, u32)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
        assert!(keys.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.join("small").join(format!("{p}.svg")).exists());
        assert!(a.join("small").join(format!("{p}_report.txt")).exists());
    }
}

#[test]
fn seeds_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config(""));
    let o = bin(&["run", &cfg, "--out", dir.path().to_str().unwrap(), "--seeds", "7", "--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("small/wsp.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.starts_with("7,")));
}

#[test]
fn failed_assertion_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#", "assertions": [{"check": "viable", "parameterization": "unconstrained"}, {"check": "viable", "parameterization": "wsp"}]"#;
    let text = small_config(extra).replace("\"T\": 1.0", "\"T\": 5.0").replace("[0.9]", "[0.99]");
    let o = bin(&["run", &write_config(dir.path(), &text), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("assert.viable.unconstrained"), "{out}");
    assert!(out.contains("assert.viable.wsp 0e0 PASS"), "{out}");
    let summary = std::fs::read_to_string(dir.path().join("small/summary.txt")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn numeric_abort_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_config("").replace(
        r#""solver": "milstein", "dt": 0.001, "T": 1.0"#,
        r#""solver": "kl_ode", "dt": 0.001, "T": 1.0, "rtol": 1e-300, "atol": 1e-300"#,
    );
    let o = bin(&["run", &write_config(dir.path(), &text), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("seed 0, sample 0"), "{}", stderr(&o));
}

#[test]
fn weight_field_plots() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "fig1_weights", "--out", dir.path().to_str().unwrap(), "--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("fig1_weights");
    // 1D curve through (0, 0) and (1, 0)
    let curve = std::fs::read_to_string(out.join("0_interval_weights.svg")).unwrap();
    let line = curve.lines().find(|l| l.starts_with("<polyline")).unwrap();
    assert!(line.contains("points=\"60.00,360.00 "), "{line}");
    assert!(line.contains(" 390.00,360.00\""), "{line}");
    // triangle center marker at (r, r)
    let r = (2.0 - std::f64::consts::SQRT_2) / 2.0;
    let tri = std::fs::read_to_string(out.join("2_triangle_weights.svg")).unwrap();
    let marker = format!(r##"<circle cx="{:.2}" cy="{:.2}" r="5.00" fill="#d62728"/>"##, 50.0 + 340.0 * r, 20.0 + 340.0 * (1.0 - r));
    assert!(tri.contains(&marker), "{marker}");
    assert!(out.join("1_box2d_weights.svg").exists());
}

#[test]
fn square_weights_are_small_near_edges() {
    let k = Polyhedron::unit_box(2);
    let p = WeightParams::new(10.0, 10.0).unwrap();
    for i in 0..=20 {
        let s = i as f64 / 20.0;
        for z in [[1e-3, s], [1.0 - 1e-3, s], [s, 1e-3], [s, 1.0 - 1e-3]] {
            assert!(weight(&k, &p, &z).unwrap() < 0.01, "{z:?}");
        }
    }
}

#[test]
fn check_reports_stored_network() {
    let dir = tempfile::tempdir().unwrap();
    let net = mlp_init(&[1, 32, 32, 1], Activation::Silu, 5).unwrap();
    let path = dir.path().join("drift.txt");
    std::fs::write(&path, net.to_text()).unwrap();
    let o = bin(&["check", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().filter(|l| l.starts_with("wsp.")).all(|l| l.ends_with("PASS")), "{out}");
    // constant unit diffusion is nonzero on the boundary
    assert!(out.lines().any(|l| l.starts_with("unconstrained.") && l.ends_with("FAIL")), "{out}");
    let missing = bin(&["check", dir.path().join("nope.txt").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}
