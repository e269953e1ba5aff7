//! CSV trajectories, SVG panels and text reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use viable_sde::analysis::{format_report, ReportLine};
use viable_sde::dynamics::center_pull;
use viable_sde::geometry::Polyhedron;
use viable_sde::weights::weight;

use crate::config::{Assertion, SimulateConfig, WspSpec, MEMBERSHIP_TOL};
use crate::error::{CliError, CliResult};
use crate::runner::{Panel, Run, Simulation, StationaryStats};
use crate::svg::{color, polygon_vertices, ramp, Frame, Svg};

/// Polyline points per trajectory in panel plots.
const MAX_PLOT_POINTS: usize = 1000;

pub fn csv_header(dim: usize) -> String {
    let mut h = String::from("seed,sample,t");
    for d in 1..=dim {
        let _ = write!(h, ",z_{d}");
    }
    h.push_str(",in_k");
    h
}

/// All runs in (seed, sample) order; `in_k` is recomputed from each row's state.
pub fn trajectories_csv(runs: &[Run], poly: &Polyhedron) -> String {
    let mut out = csv_header(poly.dim());
    out.push('\n');
    for r in runs {
        for (t, z) in r.traj.times.iter().zip(&r.traj.states) {
            let _ = write!(out, "{},{},{}", r.seed, r.sample, t);
            for x in z {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{}", u8::from(poly.contains(z, MEMBERSHIP_TOL)));
        }
    }
    out
}

fn data_range(values: impl Iterator<Item = f64>, lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    let (mut a, mut b) = (lo, hi);
    for v in values.filter(|v| v.is_finite()) {
        a = a.min(v);
        b = b.max(v);
    }
    // keep K readable when a run escapes far away
    let a = a.max(lo - 2.0 * span);
    let b = b.min(hi + 2.0 * span);
    let pad = 0.05 * (b - a);
    (a - pad, b + pad)
}

/// One stacked sub-plot per coordinate, every run as a polyline, K's bounds dashed.
pub fn panel_svg(title: &str, runs: &[Run], poly: &Polyhedron, horizon: f64) -> String {
    let dim = poly.dim();
    let (lo, hi) = poly.bounding_box();
    let sub_h = 220.0;
    let mut svg = Svg::new(640.0, 60.0 + dim as f64 * (sub_h + 50.0));
    svg.text((320.0, 24.0), 14.0, "middle", title);
    for d in 0..dim {
        let (y0, y1) = data_range(runs.iter().flat_map(|r| r.traj.states.iter().map(move |z| z[d])), lo[d], hi[d]);
        let frame = Frame {
            x0: 0.0,
            x1: horizon,
            y0,
            y1,
            left: 70.0,
            top: 40.0 + d as f64 * (sub_h + 50.0),
            width: 540.0,
            height: sub_h,
        };
        frame.axes(&mut svg, "t", &format!("z_{}", d + 1));
        for bound in [lo[d], hi[d]] {
            svg.line(frame.map(0.0, bound), frame.map(horizon, bound), "black", 1.0, true);
        }
        for (i, r) in runs.iter().enumerate() {
            let stride = r.traj.len().div_ceil(MAX_PLOT_POINTS).max(1);
            let pts: Vec<(f64, f64)> = r
                .traj
                .times
                .iter()
                .zip(&r.traj.states)
                .enumerate()
                .filter(|(k, _)| k % stride == 0 || *k + 1 == r.traj.len())
                .map(|(_, (t, z))| frame.map(*t, z[d].clamp(y0, y1)))
                .collect();
            svg.polyline(&pts, color(i), 1.0);
        }
    }
    svg.finish()
}

/// Histogram of pooled samples against the normalized target density.
pub fn histogram_svg(title: &str, stats: &StationaryStats, log_p: &dyn viable_sde::field::ScalarField) -> String {
    let (a, b) = stats.support;
    let bins = crate::runner::HIST_BINS;
    let width = (b - a) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &stats.samples {
        counts[(((x - a) / width) as usize).min(bins - 1)] += 1;
    }
    let n = stats.samples.len().max(1) as f64;
    let hist: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let m = 500;
    let xs: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
    let raw: Vec<f64> = xs.iter().map(|&x| log_p.eval(&[x]).map(f64::exp).unwrap_or(0.0)).collect();
    let mass: f64 = raw.windows(2).map(|w| 0.5 * (w[0] + w[1]) * (b - a) / m as f64).sum();
    let density: Vec<f64> = raw.iter().map(|p| p / mass).collect();
    let top = hist.iter().chain(&density).fold(0.0f64, |acc, &v| acc.max(v)) * 1.1;
    let mut svg = Svg::new(640.0, 340.0);
    svg.text((320.0, 24.0), 14.0, "middle", title);
    let frame = Frame {
        x0: a,
        x1: b,
        y0: 0.0,
        y1: top.max(1e-12),
        left: 70.0,
        top: 40.0,
        width: 540.0,
        height: 240.0,
    };
    for (i, h) in hist.iter().enumerate() {
        let (px, py) = frame.map(a + i as f64 * width, *h);
        let (qx, qy) = frame.map(a + (i + 1) as f64 * width, 0.0);
        svg.rect(px, py, qx - px, qy - py, "#9ecae1");
    }
    let curve: Vec<(f64, f64)> = xs.iter().zip(&density).map(|(&x, &p)| frame.map(x, p)).collect();
    svg.polyline(&curve, "#d62728", 2.0);
    frame.axes(&mut svg, "z", "density");
    svg.finish()
}

/// Heatmap of `w` (curve in 1D) with K's outline, the Chebyshev center and,
/// optionally, arrows of the center pull `c_h`.
pub fn plot_weight_field(poly: &Polyhedron, wsp: &WspSpec, resolution: usize, quiver: bool) -> CliResult<String> {
    let params = wsp.weights()?;
    let (lo, hi) = poly.bounding_box();
    let (center, _) = poly.chebyshev_center();
    let mut svg = Svg::new(420.0, 420.0);
    match poly.dim() {
        1 => {
            let frame = Frame {
                x0: lo[0],
                x1: hi[0],
                y0: 0.0,
                y1: 1.05,
                left: 60.0,
                top: 30.0,
                width: 330.0,
                height: 330.0,
            };
            let n = resolution.max(2);
            let mut pts = Vec::with_capacity(n);
            for i in 0..n {
                let z = lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64;
                pts.push(frame.map(z, weight(poly, &params, &[z])?));
            }
            svg.polyline(&pts, "#1f77b4", 2.0);
            let (cx, cy) = frame.map(center[0], 0.0);
            svg.circle((cx, cy), 4.0, "black");
            frame.axes(&mut svg, "z", "w(z)");
        }
        2 => {
            let frame = Frame {
                x0: lo[0],
                x1: hi[0],
                y0: lo[1],
                y1: hi[1],
                left: 50.0,
                top: 20.0,
                width: 340.0,
                height: 340.0,
            };
            let n = resolution.max(2);
            let (dx, dy) = ((hi[0] - lo[0]) / n as f64, (hi[1] - lo[1]) / n as f64);
            for i in 0..n {
                for j in 0..n {
                    let z = [lo[0] + (i as f64 + 0.5) * dx, lo[1] + (j as f64 + 0.5) * dy];
                    if !poly.contains(&z, 0.0) {
                        continue;
                    }
                    let w = weight(poly, &params, &z)?;
                    let (px, py) = frame.map(lo[0] + i as f64 * dx, lo[1] + (j + 1) as f64 * dy);
                    svg.rect(px, py, frame.width / n as f64, frame.height / n as f64, &ramp(w));
                }
            }
            let outline: Vec<(f64, f64)> = polygon_vertices(poly).iter().map(|v| frame.map(v[0], v[1])).collect();
            svg.polygon(&outline, "black", 2.0);
            if quiver {
                let m = 10;
                for i in 0..m {
                    for j in 0..m {
                        let z = [
                            lo[0] + (i as f64 + 0.5) * (hi[0] - lo[0]) / m as f64,
                            lo[1] + (j as f64 + 0.5) * (hi[1] - lo[1]) / m as f64,
                        ];
                        if !poly.contains(&z, 0.0) {
                            continue;
                        }
                        let c = center_pull(poly, wsp.gamma, wsp.eps, &z);
                        let scale = 0.4 * (hi[0] - lo[0]) / m as f64 / wsp.gamma;
                        let tip = [z[0] + scale * c[0], z[1] + scale * c[1]];
                        svg.line(frame.map(z[0], z[1]), frame.map(tip[0], tip[1]), "white", 1.2, false);
                        let (tx, ty) = frame.map(tip[0], tip[1]);
                        svg.circle((tx, ty), 1.5, "white");
                    }
                }
            }
            let (cx, cy) = frame.map(center[0], center[1]);
            svg.circle((cx, cy), 5.0, "#d62728");
            frame.axes(&mut svg, "z_1", "z_2");
        }
        d => {
            return Err(CliError::Core(viable_sde::Error::Unsupported(format!(
                "weight plots need dimension 1 or 2, got {d}"
            ))))
        }
    }
    Ok(svg.finish())
}

/// Per-run viability, per-seed conditions and stationary statistics.
pub fn panel_report(panel: &Panel) -> Vec<ReportLine> {
    let mut lines = Vec::new();
    for r in &panel.runs {
        lines.extend(r.viability.lines(&format!("seed{}.sample{}.", r.seed, r.sample)));
    }
    for (seed, rep) in &panel.conditions {
        match rep {
            Ok(rep) => lines.extend(rep.lines(&format!("seed{seed}.conditions."))),
            Err(_) => lines.push(ReportLine::new(format!("seed{seed}.conditions.evaluated"), f64::NAN, false)),
        }
    }
    match &panel.stationary {
        Some(Ok(s)) => {
            lines.push(ReportLine::new("stationary.ks", s.ks, true));
            lines.push(ReportLine::new("stationary.tv", s.tv, true));
            lines.push(ReportLine::new("stationary.flux", s.flux, true));
            lines.push(ReportLine::new("stationary.n_samples", s.samples.len() as f64, true));
        }
        Some(Err(_)) => lines.push(ReportLine::new("stationary.evaluated", f64::NAN, false)),
        None => {}
    }
    lines
}

/// The value and outcome of one configured assertion.
pub fn evaluate(assertion: &Assertion, sim: &Simulation) -> ReportLine {
    let label = assertion.label();
    let Some(panel) = sim.panel(assertion.parameterization()) else {
        return ReportLine::new(label, f64::NAN, false);
    };
    match assertion {
        Assertion::Viable { tol, .. } => {
            let worst = panel.runs.iter().map(|r| r.viability.max_violation).fold(0.0, f64::max);
            ReportLine::new(label, worst, worst <= *tol)
        }
        Assertion::Exits { min_seeds, .. } => {
            let n = panel.seeds_exited();
            ReportLine::new(label, n as f64, n >= *min_seeds)
        }
        Assertion::Conditions { .. } => {
            let failing = panel
                .conditions
                .iter()
                .filter(|(_, r)| !r.as_ref().is_ok_and(|r| r.pass()))
                .count();
            ReportLine::new(label, failing as f64, failing == 0)
        }
        Assertion::Ks { max, .. } => match &panel.stationary {
            Some(Ok(s)) => ReportLine::new(label, s.ks, s.ks < *max),
            _ => ReportLine::new(label, f64::NAN, false),
        },
        Assertion::Flux { max, .. } => match &panel.stationary {
            Some(Ok(s)) => ReportLine::new(label, s.flux, s.flux < *max),
            _ => ReportLine::new(label, f64::NAN, false),
        },
    }
}

pub fn write(path: &Path, contents: &str) -> CliResult<PathBuf> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(path.to_path_buf())
}

/// Writes CSV, SVG and report files for a simulation; returns the written paths.
pub fn write_simulation(cfg: &SimulateConfig, sim: &Simulation, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for panel in &sim.panels {
        let name = panel.param.name();
        files.push(write(&dir.join(format!("{name}.csv")), &trajectories_csv(&panel.runs, &sim.poly))?);
        let title = format!("{} ({name})", cfg.name);
        files.push(write(&dir.join(format!("{name}.svg")), &panel_svg(&title, &panel.runs, &sim.poly, cfg.solver.horizon))?);
        files.push(write(&dir.join(format!("{name}_report.txt")), &format_report(&panel_report(panel)))?);
        if let (Some(Ok(stats)), Some(target)) = (&panel.stationary, &cfg.target) {
            let svg = histogram_svg(&format!("{title}: samples after burn-in"), stats, target.build().as_ref());
            files.push(write(&dir.join(format!("{name}_hist.svg")), &svg)?);
        }
    }
    Ok(files)
}
