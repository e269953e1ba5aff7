//! Numeric checks on dynamics and trajectories: viability, the boundary
//! conditions on drift and diffusion, sampled Lipschitz and growth bounds,
//! the stationary flux, and distances between samples and a target density.

use std::fmt;

use crate::dual::{Dual, Real};
use crate::dynamics::{stationary_drift, DynamicsSpec, StationaryConfig};
use crate::field::{Field, ScalarField};
use crate::geometry::Polyhedron;
use crate::rng::{Domain, KeyedRng};
use crate::solvers::Trajectory;
use crate::{Error, Result};

/// Tolerance for the boundary condition checks.
pub const CONDITION_TOL: f64 = 1e-9;
/// Boundary samples per facet when no count is given.
pub const DEFAULT_FACET_SAMPLES: usize = 1000;
const NEAR_PAIRS: usize = 100;
const NEAR_DISTANCE: f64 = 1e-4;
const CENTER_PAIRS: u64 = 10;
const QUADRATURE_POINTS: usize = 10_000;

/// One line of a flat text report: `name value PASS|FAIL`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportLine {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

impl ReportLine {
    pub fn new(name: impl Into<String>, value: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            pass,
        }
    }
}

impl fmt::Display for ReportLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{} {:e} {}", self.name, self.value, status)
    }
}

pub fn format_report(lines: &[ReportLine]) -> String {
    lines.iter().map(|l| format!("{l}\n")).collect()
}

pub fn parse_report(text: &str) -> Result<Vec<ReportLine>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let [name, value, status] = parts[..] else {
                return Err(Error::Parse(format!("expected `name value status`, got {l:?}")));
            };
            let value = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad value in {l:?}")))?;
            let pass = match status {
                "PASS" => true,
                "FAIL" => false,
                other => return Err(Error::Parse(format!("bad status {other:?}"))),
            };
            Ok(ReportLine::new(name, value, pass))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViabilityReport {
    pub fraction_in_k: f64,
    /// Largest violated facet distance (zero when none is violated).
    pub max_violation: f64,
    pub first_exit_time: Option<f64>,
    pub n_points: usize,
    pub tol: f64,
}

impl ViabilityReport {
    pub fn viable(&self) -> bool {
        self.first_exit_time.is_none()
    }

    pub fn lines(&self, prefix: &str) -> Vec<ReportLine> {
        let ok = self.viable();
        vec![
            ReportLine::new(format!("{prefix}fraction_in_k"), self.fraction_in_k, ok),
            ReportLine::new(format!("{prefix}max_violation"), self.max_violation, ok),
            ReportLine::new(
                format!("{prefix}first_exit_time"),
                self.first_exit_time.unwrap_or(f64::NAN),
                ok,
            ),
        ]
    }
}

/// Membership of every state of `traj` in `poly` with tolerance `tol`.
pub fn viability(traj: &Trajectory, poly: &Polyhedron, tol: f64) -> ViabilityReport {
    let mut inside = 0usize;
    let mut max_violation: f64 = 0.0;
    let mut first_exit_time = None;
    for (t, z) in traj.times.iter().zip(&traj.states) {
        let violation = (-poly.min_distance(z)).max(0.0);
        max_violation = max_violation.max(violation);
        if violation <= tol {
            inside += 1;
        } else if first_exit_time.is_none() {
            first_exit_time = Some(*t);
        }
    }
    let n = traj.len();
    ViabilityReport {
        fraction_in_k: if n == 0 { 1.0 } else { inside as f64 / n as f64 },
        max_violation,
        first_exit_time,
        n_points: n,
        tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetConditions {
    pub facet: usize,
    /// Accepted boundary samples (times the number of time samples).
    pub n_samples: usize,
    /// `min ⟨h, v̂_s⟩` over boundary samples.
    pub min_drift_inner: f64,
    /// `max_d |g_d v̂_s^d|` over boundary samples.
    pub max_diffusion: f64,
    /// Set when the face could not be sampled.
    pub skipped: bool,
}

impl FacetConditions {
    pub fn drift_pass(&self) -> bool {
        self.skipped || self.min_drift_inner >= -CONDITION_TOL
    }

    pub fn diffusion_pass(&self) -> bool {
        self.skipped || self.max_diffusion <= CONDITION_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub facets: Vec<FacetConditions>,
    /// Sampled lower bounds on the Lipschitz constants in `z`.
    pub lipschitz_drift: f64,
    pub lipschitz_diffusion: f64,
    /// `sup (‖h‖² + ‖g‖²) / (1 + ‖z‖²)` over sampled interior points.
    pub growth_ratio: f64,
}

impl ConditionReport {
    pub fn drift_pass(&self) -> bool {
        self.facets.iter().all(FacetConditions::drift_pass)
    }

    pub fn diffusion_pass(&self) -> bool {
        self.facets.iter().all(FacetConditions::diffusion_pass)
    }

    pub fn pass(&self) -> bool {
        self.drift_pass() && self.diffusion_pass()
    }

    pub fn lines(&self, prefix: &str) -> Vec<ReportLine> {
        let mut out = Vec::new();
        for f in &self.facets {
            out.push(ReportLine::new(
                format!("{prefix}facet_{}.min_drift_inner", f.facet),
                f.min_drift_inner,
                f.drift_pass(),
            ));
            out.push(ReportLine::new(
                format!("{prefix}facet_{}.max_diffusion", f.facet),
                f.max_diffusion,
                f.diffusion_pass(),
            ));
        }
        for (name, v) in [
            ("lipschitz_drift", self.lipschitz_drift),
            ("lipschitz_diffusion", self.lipschitz_diffusion),
            ("growth_ratio", self.growth_ratio),
        ] {
            out.push(ReportLine::new(format!("{prefix}{name}"), v, v.is_finite()));
        }
        out
    }

    pub fn to_text(&self) -> String {
        format_report(&self.lines(""))
    }
}

/// Uniform points on the bounded face of facet `s`, by rejection within the
/// face's bounding box in its hyperplane. Empty when the face is degenerate or
/// rejection keeps failing.
pub fn sample_facet(poly: &Polyhedron, s: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let Some(frame) = poly.face_frame(s) else {
        return Vec::new();
    };
    let rng = KeyedRng::new(seed, Domain::Sampling);
    let k = frame.basis.len();
    let mut out = Vec::with_capacity(n);
    let max_attempts = 1000 * n.max(1);
    let mut coords = vec![0.0; k];
    for attempt in 0..max_attempts {
        if out.len() == n {
            break;
        }
        for (j, c) in coords.iter_mut().enumerate() {
            let u = rng.uniform(attempt as u64, s as u32, j as u32);
            *c = frame.lo[j] + u * (frame.hi[j] - frame.lo[j]);
        }
        let z = frame.point(&coords);
        if poly.contains(&z, CONDITION_TOL) {
            out.push(z);
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Worst-case boundary values of the drift and diffusion on every facet,
/// plus sampled Lipschitz and growth estimates over `K`.
pub fn check_boundary_conditions(
    spec: &DynamicsSpec,
    poly: &Polyhedron,
    n_boundary_samples: usize,
    t_samples: &[f64],
) -> Result<ConditionReport> {
    if spec.dim != poly.dim() {
        return Err(Error::Shape {
            expected: poly.dim(),
            got: spec.dim,
        });
    }
    let times: &[f64] = if t_samples.is_empty() { &[0.0] } else { t_samples };
    let mut facets = Vec::with_capacity(poly.n_facets());
    for (s, hs) in poly.halfspaces().iter().enumerate() {
        let points = sample_facet(poly, s, n_boundary_samples, s as u64);
        if points.is_empty() {
            log::warn!("facet {s}: face has measure zero or could not be sampled, skipping");
            facets.push(FacetConditions {
                facet: s,
                n_samples: 0,
                min_drift_inner: f64::INFINITY,
                max_diffusion: 0.0,
                skipped: true,
            });
            continue;
        }
        let v = hs.unit_normal();
        let mut min_inner = f64::INFINITY;
        let mut max_diff: f64 = 0.0;
        for z in &points {
            for &t in times {
                let h = spec.drift.eval(t, z)?;
                let g = spec.diffusion.eval(t, z)?;
                min_inner = min_inner.min(dot(&h, v));
                for (gd, vd) in g.iter().zip(v) {
                    max_diff = max_diff.max((gd * vd).abs());
                }
            }
        }
        facets.push(FacetConditions {
            facet: s,
            n_samples: points.len() * times.len(),
            min_drift_inner: min_inner,
            max_diffusion: max_diff,
            skipped: false,
        });
    }
    let lipschitz_drift = lipschitz_estimate(spec.drift.as_ref(), poly, 200, 0)?;
    let lipschitz_diffusion = lipschitz_estimate(spec.diffusion.as_ref(), poly, 200, 0)?;
    let rng = KeyedRng::new(1, Domain::Sampling);
    let mut growth_ratio: f64 = 0.0;
    for i in 0..200 {
        let z = poly.sample_uniform(&rng, i);
        for &t in times {
            let h = spec.drift.eval(t, &z)?;
            let g = spec.diffusion.eval(t, &z)?;
            growth_ratio = growth_ratio.max((norm2(&h) + norm2(&g)) / (1.0 + norm2(&z)));
        }
    }
    Ok(ConditionReport {
        facets,
        lipschitz_drift,
        lipschitz_diffusion,
        growth_ratio,
    })
}

/// Largest difference quotient `‖f(z) − f(z')‖ / ‖z − z'‖` over `n_pairs`
/// uniform pairs in `domain` and 100 pairs at distance `1e-4` (ten of them
/// anchored at the Chebyshev center), at `t = 0`.
/// Pairs are a fixed prefix-stable stream, so the estimate is nondecreasing in
/// `n_pairs`. A lower bound on the true constant.
pub fn lipschitz_estimate(f: &dyn Field, domain: &Polyhedron, n_pairs: usize, seed: u64) -> Result<f64> {
    if n_pairs == 0 {
        return Err(Error::Config("n_pairs must be at least 1".into()));
    }
    let rng = KeyedRng::new(seed, Domain::Sampling);
    let quotient = |a: &[f64], b: &[f64]| -> Result<f64> {
        let fa = f.eval(0.0, a)?;
        let fb = f.eval(0.0, b)?;
        let num: f64 = fa.iter().zip(&fb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        Ok(if den > 0.0 { num / den } else { 0.0 })
    };
    let mut best: f64 = 0.0;
    // near pairs first so they do not depend on n_pairs
    let dim = domain.dim();
    let near = KeyedRng::new(seed ^ 0x4e45_4152, Domain::Sampling);
    let center = domain.chebyshev_center().0;
    for k in 0..NEAR_PAIRS as u64 {
        // a few anchors at the Chebyshev center, where the inward pull has its kink
        let a = if k < CENTER_PAIRS {
            center.to_vec()
        } else {
            domain.sample_uniform(&near, 2 * k)
        };
        let mut dir: Vec<f64> = (0..dim).map(|d| near.normal(2 * k + 1, d as u32, 0)).collect();
        let n = norm2(&dir).sqrt();
        if n == 0.0 {
            continue;
        }
        dir.iter_mut().for_each(|x| *x *= NEAR_DISTANCE / n);
        let plus: Vec<f64> = a.iter().zip(&dir).map(|(x, d)| x + d).collect();
        let minus: Vec<f64> = a.iter().zip(&dir).map(|(x, d)| x - d).collect();
        let b = if domain.contains(&plus, 0.0) {
            plus
        } else if domain.contains(&minus, 0.0) {
            minus
        } else {
            continue;
        };
        best = best.max(quotient(&a, &b)?);
    }
    for i in 0..n_pairs as u64 {
        let a = domain.sample_uniform(&rng, 2 * i);
        let b = domain.sample_uniform(&rng, 2 * i + 1);
        best = best.max(quotient(&a, &b)?);
    }
    Ok(best)
}

/// `max_z |h(z) p̃(z) − ½ d/dz[g(z)² p̃(z)]|` over `n` evenly spaced interior
/// points of `support`, for the stationary drift `h` of a 1D configuration.
pub fn stationary_flux_max(cfg: &StationaryConfig, support: (f64, f64), n: usize) -> Result<f64> {
    if cfg.dim != 1 {
        return Err(Error::Unsupported(format!(
            "flux check is one-dimensional, got dimension {}",
            cfg.dim
        )));
    }
    let (a, b) = support;
    if !(b > a) || n == 0 {
        return Err(Error::Config(format!("need a nonempty support and grid, got ({a}, {b}), n = {n}")));
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let z = a + (i + 1) as f64 * (b - a) / (n + 1) as f64;
        let h = stationary_drift(cfg, &[z])?[0];
        let zd = [Dual::variable(z)];
        let g = cfg.diffusion.eval_dual(0.0, &zd)?[0];
        let p = cfg.log_ptilde.eval_dual(&zd)?.exp();
        let g2p = g * g * p;
        let flux = h * p.re - 0.5 * g2p.eps;
        if !flux.is_finite() {
            return Err(Error::Domain(format!("non-finite flux at z = {z}")));
        }
        worst = worst.max(flux.abs());
    }
    Ok(worst)
}

/// Normalized CDF of `exp(log_ptilde)` on a uniform quadrature grid.
struct TargetCdf {
    a: f64,
    h: f64,
    cdf: Vec<f64>,
}

impl TargetCdf {
    fn new(log_ptilde: &dyn ScalarField, (a, b): (f64, f64)) -> Result<Self> {
        let n = QUADRATURE_POINTS;
        let h = (b - a) / (n - 1) as f64;
        let logs = (0..n)
            .map(|i| log_ptilde.eval(&[a + i as f64 * h]))
            .collect::<Result<Vec<f64>>>()?;
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Err(Error::Domain("target density vanishes on the support".into()));
        }
        let p: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * h * (p[i - 1] + p[i]);
        }
        let total = cdf[n - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { a, h, cdf })
    }

    fn at(&self, x: f64) -> f64 {
        let s = ((x - self.a) / self.h).max(0.0);
        let i = s.floor() as usize;
        if i + 1 >= self.cdf.len() {
            return 1.0;
        }
        let frac = s - i as f64;
        self.cdf[i] + frac * (self.cdf[i + 1] - self.cdf[i])
    }
}

/// Kolmogorov–Smirnov distance of the empirical CDF and total-variation
/// distance of an `n_bins` histogram, both against `exp(log_ptilde)`
/// normalized on `support`.
pub fn distribution_distance(
    samples: &[f64],
    log_ptilde: &dyn ScalarField,
    support: (f64, f64),
    n_bins: usize,
) -> Result<(f64, f64)> {
    let (a, b) = support;
    if samples.is_empty() || n_bins == 0 || !(b > a) {
        return Err(Error::Config("need samples, bins and a nonempty support".into()));
    }
    if let Some(x) = samples.iter().find(|&&x| !(x >= a && x <= b)) {
        return Err(Error::Domain(format!("sample {x} outside [{a}, {b}]")));
    }
    if samples.iter().all(|&x| x == samples[0]) {
        log::warn!("all samples equal {}; empirical CDF is degenerate", samples[0]);
    }
    let target = TargetCdf::new(log_ptilde, support)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = target.at(x);
        ks = ks.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    let width = (b - a) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &x in samples {
        let k = (((x - a) / width) as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    let mut tv = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == n_bins { b } else { lo + width };
        let q = target.at(hi) - target.at(lo);
        tv += (c as f64 / n - q).abs();
    }
    Ok((ks, 0.5 * tv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Calculus;
    use crate::field::{AffineField, ConstantField, GaussianLogDensity};
    use crate::solvers::{StepControl, TrajectoryMeta};
    use std::sync::Arc;

    fn path(times: Vec<f64>, values: Vec<f64>) -> Trajectory {
        Trajectory {
            times,
            states: values.into_iter().map(|v| vec![v]).collect(),
            in_k: None,
            meta: TrajectoryMeta {
                solver: "synthetic".into(),
                seed: 0,
                sample: 0,
                step: StepControl::Fixed { dt: 0.01 },
            },
        }
    }

    #[test]
    fn constant_path_is_viable() {
        let k = Polyhedron::unit_box(1);
        let r = viability(&path(vec![0.0, 1.0, 2.0], vec![0.5; 3]), &k, 1e-6);
        assert_eq!(r.fraction_in_k, 1.0);
        assert_eq!(r.max_violation, 0.0);
        assert!(r.first_exit_time.is_none());
        assert_eq!(r.n_points, 3);
    }

    #[test]
    fn linear_exit_time() {
        // z(t) = 0.5 + 0.2 t leaves [0, 1] at t = 2.5
        let dt = 0.01;
        let times: Vec<f64> = (0..=500).map(|i| i as f64 * dt).collect();
        let values = times.iter().map(|t| 0.5 + 0.2 * t).collect();
        let r = viability(&path(times, values), &Polyhedron::unit_box(1), 1e-6);
        let exit = r.first_exit_time.unwrap();
        assert!((exit - 2.5).abs() <= dt + 1e-12, "{exit}");
        assert!((r.max_violation - 0.5).abs() < 1e-9);
        assert!(r.fraction_in_k < 1.0);
    }

    #[test]
    fn report_text_round_trip() {
        let lines = vec![ReportLine::new("a", 1.5, true), ReportLine::new("b.c", -2e-12, false)];
        let text = format_report(&lines);
        assert_eq!(parse_report(&text).unwrap(), lines);
        assert!(parse_report("x 1").is_err());
        assert!(parse_report("x 1 MAYBE").is_err());
    }

    #[test]
    fn facet_samples_lie_on_face() {
        let tri = Polyhedron::unit_simplex(2);
        for s in 0..3 {
            let pts = sample_facet(&tri, s, 50, 0);
            assert_eq!(pts.len(), 50);
            for z in &pts {
                assert!(tri.halfspaces()[s].distance(z).abs() < 1e-12);
                assert!(tri.contains(z, 1e-9));
            }
        }
        assert_eq!(sample_facet(&Polyhedron::unit_box(1), 1, 5, 0), vec![vec![1.0]; 5]);
    }

    #[test]
    fn linear_lipschitz() {
        let f = AffineField::scaled_identity(2, 3.0);
        let k = Polyhedron::unit_box(2);
        let est = lipschitz_estimate(&f, &k, 50, 0).unwrap();
        assert!((2.99..=3.0 + 1e-9).contains(&est), "{est}");
    }

    #[test]
    fn zero_diffusion_has_zero_flux() {
        let cfg = StationaryConfig::new(
            Arc::new(ConstantField::zeros(1)),
            Arc::new(GaussianLogDensity {
                mean: vec![0.5],
                std: vec![0.1],
            }),
        )
        .unwrap();
        assert_eq!(stationary_flux_max(&cfg, (0.0, 1.0), 100).unwrap(), 0.0);
    }

    #[test]
    fn single_bin_tv_vanishes() {
        let target = GaussianLogDensity {
            mean: vec![0.5],
            std: vec![0.2],
        };
        let (_, tv) = distribution_distance(&[0.1, 0.5, 0.9], &target, (0.0, 1.0), 1).unwrap();
        assert!(tv.abs() < 1e-12);
        assert!(distribution_distance(&[1.5], &target, (0.0, 1.0), 10).is_err());
    }

    #[test]
    fn conditions_on_constant_inward_field() {
        // h = 0, g = 0 satisfies both conditions trivially
        let spec = DynamicsSpec::new(
            Arc::new(ConstantField::zeros(2)),
            Arc::new(ConstantField::zeros(2)),
            Calculus::Ito,
        )
        .unwrap();
        let rep = check_boundary_conditions(&spec, &Polyhedron::unit_simplex(2), 20, &[0.0]).unwrap();
        assert!(rep.pass());
        assert_eq!(rep.facets.len(), 3);
        assert!(rep.to_text().lines().all(|l| l.ends_with("PASS")));
        // constant noise violates the diffusion condition
        let noisy = DynamicsSpec::new(
            Arc::new(ConstantField::zeros(2)),
            Arc::new(ConstantField::filled(2, 0.1)),
            Calculus::Ito,
        )
        .unwrap();
        let rep = check_boundary_conditions(&noisy, &Polyhedron::unit_box(2), 20, &[0.0]).unwrap();
        assert!(rep.drift_pass() && !rep.diffusion_pass());
    }
}
