//! Compact polyhedra as finite intersections of closed half-spaces
//! `H(u, v) = { z : ⟨z − u, v⟩ ≥ 0 }`.

pub mod lp;

use crate::dual::Real;
use crate::rng::KeyedRng;
use crate::{Error, Result};

use lp::LpOutcome;

/// Default absolute tolerance for facet arithmetic.
pub const BOUNDARY_TOL: f64 = 1e-9;

const MIN_NORMAL_NORM: f64 = 1e-12;

/// Closed half-space with anchor `u` and inward normal `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    u: Vec<f64>,
    v: Vec<f64>,
    unit: Vec<f64>,
}

impl HalfSpace {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::Shape {
                expected: u.len(),
                got: v.len(),
            });
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > MIN_NORMAL_NORM) {
            return Err(Error::DegenerateNormal(norm));
        }
        let unit = v.iter().map(|x| x / norm).collect();
        Ok(Self { u, v, unit })
    }

    pub fn anchor(&self) -> &[f64] {
        &self.u
    }

    pub fn normal(&self) -> &[f64] {
        &self.v
    }

    pub fn unit_normal(&self) -> &[f64] {
        &self.unit
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Signed distance `⟨z − u, v⟩ / ‖v‖`; nonnegative exactly on the half-space.
    #[inline]
    pub fn distance<S: Real>(&self, z: &[S]) -> S {
        let mut acc = S::zero();
        for ((&zi, &ui), &ni) in z.iter().zip(&self.u).zip(&self.unit) {
            acc += (zi + (-ui)) * ni;
        }
        acc
    }
}

/// Nonempty, bounded intersection of half-spaces with its Chebyshev center.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    halfspaces: Vec<HalfSpace>,
    dim: usize,
    center: Vec<f64>,
    radius: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Polyhedron {
    /// Validates nonemptiness and compactness, then caches the Chebyshev
    /// center and the axis-aligned bounding box.
    pub fn new(halfspaces: Vec<HalfSpace>) -> Result<Self> {
        let dim = halfspaces
            .first()
            .map(HalfSpace::dim)
            .ok_or_else(|| Error::Config("polyhedron needs at least one half-space".into()))?;
        if dim == 0 {
            return Err(Error::Config("polyhedron dimension must be ≥ 1".into()));
        }
        for hs in &halfspaces {
            if hs.dim() != dim {
                return Err(Error::Shape {
                    expected: dim,
                    got: hs.dim(),
                });
            }
        }
        let (lower, upper) = bounding_box(&halfspaces, dim)?;
        let (center, radius) = solve_chebyshev(&halfspaces, dim)?;
        if radius <= 0.0 {
            return Err(Error::EmptyPolyhedron);
        }
        Ok(Self {
            halfspaces,
            dim,
            center,
            radius,
            lower,
            upper,
        })
    }

    /// Axis-aligned box `∏ [lo_i, hi_i]` with unit normals, facets ordered
    /// `lower_0, upper_0, lower_1, upper_1, …`.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Shape {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        let d = lo.len();
        let mut hs = Vec::with_capacity(2 * d);
        for i in 0..d {
            if !(lo[i] < hi[i]) {
                return Err(Error::Config(format!(
                    "box bound {i}: lo ({}) must be < hi ({})",
                    lo[i], hi[i]
                )));
            }
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            hs.push(HalfSpace::new(lo.to_vec(), e.clone())?);
            e[i] = -1.0;
            hs.push(HalfSpace::new(hi.to_vec(), e)?);
        }
        Self::new(hs)
    }

    pub fn unit_box(dim: usize) -> Self {
        Self::boxed(&vec![0.0; dim], &vec![1.0; dim]).expect("unit box is compact")
    }

    /// Standard simplex `{ z ≥ 0, Σ z ≤ 1 }`.
    pub fn unit_simplex(dim: usize) -> Self {
        let mut hs = Vec::with_capacity(dim + 1);
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            hs.push(HalfSpace::new(vec![0.0; dim], e).expect("nonzero normal"));
        }
        let mut anchor = vec![0.0; dim];
        anchor[0] = 1.0;
        hs.push(HalfSpace::new(anchor, vec![-1.0; dim]).expect("nonzero normal"));
        Self::new(hs).expect("simplex is compact")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn n_facets(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn chebyshev_center(&self) -> (&[f64], f64) {
        (&self.center, self.radius)
    }

    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    pub fn distances<S: Real>(&self, z: &[S]) -> Vec<S> {
        self.halfspaces.iter().map(|h| h.distance(z)).collect()
    }

    pub fn min_distance(&self, z: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.distance(z))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        z.len() == self.dim && self.min_distance(z) >= -tol
    }

    /// Indices of facets with `|d(u_s, v_s, z)| ≤ tol`.
    pub fn active_facets(&self, z: &[f64], tol: f64) -> Vec<usize> {
        self.halfspaces
            .iter()
            .enumerate()
            .filter(|(_, h)| h.distance(z).abs() <= tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// Draws a point uniformly from `K` by rejection from the bounding box.
    /// `index` selects the draw; attempts use disjoint counters.
    pub fn sample_uniform(&self, rng: &KeyedRng, index: u64) -> Vec<f64> {
        let mut z = vec![0.0; self.dim];
        for attempt in 0..u32::MAX {
            for (d, zd) in z.iter_mut().enumerate() {
                let u = rng.uniform(index, attempt, d as u32);
                *zd = self.lower[d] + u * (self.upper[d] - self.lower[d]);
            }
            if self.contains(&z, 0.0) {
                return z;
            }
        }
        unreachable!("rejection sampling from a nonempty polyhedron")
    }

    /// Parameterization of facet `s`'s face `K ∩ {⟨z − u_s, v_s⟩ = 0}` by an
    /// orthonormal basis of the hyperplane and the face's bounding box in those
    /// coordinates. `None` when the face is empty.
    pub fn face_frame(&self, s: usize) -> Option<FaceFrame> {
        let hs = &self.halfspaces[s];
        let basis = hyperplane_basis(hs.unit_normal());
        let origin = hs.anchor().to_vec();
        let d = self.dim;
        // constraints in z: K plus equality on facet s
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for h in &self.halfspaces {
            push_halfspace_row(&mut rows, &mut rhs, h, d);
        }
        let flipped = HalfSpace {
            u: hs.u.clone(),
            v: hs.v.iter().map(|x| -x).collect(),
            unit: hs.unit.iter().map(|x| -x).collect(),
        };
        push_halfspace_row(&mut rows, &mut rhs, &flipped, d);
        // feasibility check with zero objective
        if !matches!(lp::maximize(&vec![0.0; 2 * d], &rows, &rhs), LpOutcome::Optimal { .. }) {
            return None;
        }
        let mut lo = Vec::with_capacity(basis.len());
        let mut hi = Vec::with_capacity(basis.len());
        for b in &basis {
            // coordinate ⟨z − origin, b⟩; optimize ±⟨z, b⟩
            let shift: f64 = origin.iter().zip(b).map(|(o, x)| o * x).sum();
            let mut range = [0.0; 2];
            for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
                let c: Vec<f64> = b
                    .iter()
                    .map(|x| sign * x)
                    .chain(b.iter().map(|x| -sign * x))
                    .collect();
                match lp::maximize(&c, &rows, &rhs) {
                    LpOutcome::Optimal { value, .. } => range[k] = sign * value - shift,
                    _ => return None,
                }
            }
            hi.push(range[0]);
            lo.push(range[1]);
        }
        Some(FaceFrame {
            facet: s,
            origin,
            basis,
            lo,
            hi,
        })
    }
}

/// Bounded face of one facet, in hyperplane coordinates.
#[derive(Debug, Clone)]
pub struct FaceFrame {
    pub facet: usize,
    pub origin: Vec<f64>,
    /// Orthonormal basis of the facet's hyperplane (`D − 1` vectors).
    pub basis: Vec<Vec<f64>>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl FaceFrame {
    pub fn point(&self, coords: &[f64]) -> Vec<f64> {
        let mut z = self.origin.clone();
        for (b, &c) in self.basis.iter().zip(coords) {
            for (zi, bi) in z.iter_mut().zip(b) {
                *zi += c * bi;
            }
        }
        z
    }

    /// Largest extent of the face box; zero for a point face.
    pub fn extent(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h - l)
            .fold(0.0, f64::max)
    }
}

fn hyperplane_basis(normal: &[f64]) -> Vec<Vec<f64>> {
    let d = normal.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d.saturating_sub(1));
    for i in 0..d {
        if basis.len() + 1 == d {
            break;
        }
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        for q in std::iter::once(normal).chain(basis.iter().map(Vec::as_slice)) {
            let p: f64 = e.iter().zip(q).map(|(a, b)| a * b).sum();
            for (ei, qi) in e.iter_mut().zip(q) {
                *ei -= p * qi;
            }
        }
        let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(e.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

// −⟨z, v̂⟩ ≤ −⟨u, v̂⟩ with z = z⁺ − z⁻
fn push_halfspace_row(rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>, h: &HalfSpace, d: usize) {
    let mut row = Vec::with_capacity(2 * d);
    row.extend(h.unit.iter().map(|x| -x));
    row.extend(h.unit.iter().copied());
    rows.push(row);
    rhs.push(-h.u.iter().zip(&h.unit).map(|(a, b)| a * b).sum::<f64>());
}

fn bounding_box(halfspaces: &[HalfSpace], d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for h in halfspaces {
        push_halfspace_row(&mut rows, &mut rhs, h, d);
    }
    let mut lower = vec![0.0; d];
    let mut upper = vec![0.0; d];
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; 2 * d];
            c[i] = sign;
            c[d + i] = -sign;
            match lp::maximize(&c, &rows, &rhs) {
                LpOutcome::Optimal { value, .. } => {
                    if sign > 0.0 {
                        upper[i] = value;
                    } else {
                        lower[i] = -value;
                    }
                }
                LpOutcome::Infeasible => return Err(Error::EmptyPolyhedron),
                LpOutcome::Unbounded => return Err(Error::NotCompact),
            }
        }
    }
    Ok((lower, upper))
}

// maximize r s.t. ⟨z, v̂_s⟩ − r ≥ ⟨u_s, v̂_s⟩ ; variables (z⁺, z⁻, r)
fn solve_chebyshev(halfspaces: &[HalfSpace], d: usize) -> Result<(Vec<f64>, f64)> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for h in halfspaces {
        push_halfspace_row(&mut rows, &mut rhs, h, d);
        rows.last_mut().expect("row just pushed").push(1.0);
    }
    let mut c = vec![0.0; 2 * d + 1];
    c[2 * d] = 1.0;
    match lp::maximize(&c, &rows, &rhs) {
        LpOutcome::Optimal { x, value } => {
            let center = (0..d).map(|i| x[i] - x[d + i]).collect();
            Ok((center, value))
        }
        LpOutcome::Infeasible => Err(Error::EmptyPolyhedron),
        LpOutcome::Unbounded => Err(Error::NotCompact),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hs(u: &[f64], v: &[f64]) -> HalfSpace {
        HalfSpace::new(u.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(hs(&[0.0], &[1.0]).distance(&[0.5]), 0.5);
        assert_eq!(hs(&[1.0], &[-1.0]).distance(&[1.0]), 0.0);
        assert_abs_diff_eq!(hs(&[0.0, 0.0], &[3.0, 4.0]).distance(&[1.0, 1.0]), 1.4, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_normal_rejected() {
        assert!(matches!(
            HalfSpace::new(vec![0.0, 0.0], vec![1e-13, 0.0]),
            Err(Error::DegenerateNormal(_))
        ));
    }

    #[test]
    fn contains_examples() {
        let k = Polyhedron::unit_box(1);
        assert!(k.contains(&[0.5], 0.0));
        assert!(k.contains(&[1.000_000_5], 1e-6));
        assert!(!Polyhedron::unit_box(2).contains(&[0.5, -0.01], 0.0));
    }

    #[test]
    fn active_facet_examples() {
        let k = Polyhedron::unit_box(1);
        assert_eq!(k.active_facets(&[0.0], BOUNDARY_TOL), vec![0]);
        assert!(k.active_facets(&[0.5], 1e-9).is_empty());
        let sq = Polyhedron::unit_box(2);
        assert_eq!(sq.active_facets(&[0.0, 0.0], 1e-9), vec![0, 2]);
    }

    #[test]
    fn unit_square_center() {
        let k = Polyhedron::unit_box(2);
        let (c, r) = k.chebyshev_center();
        assert_abs_diff_eq!(r, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn slab_radius_is_unique_center_is_not() {
        let k = Polyhedron::boxed(&[0.0, 0.0], &[1.0, 3.0]).unwrap();
        let (c, r) = k.chebyshev_center();
        assert_abs_diff_eq!(r, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c[0], 0.5, epsilon = 1e-12);
        assert!((0.5 - 1e-12..=2.5 + 1e-12).contains(&c[1]));
    }

    #[test]
    fn triangle_incenter() {
        let k = Polyhedron::unit_simplex(2);
        let r_expect = (2.0 - 2f64.sqrt()) / 2.0;
        let (c, r) = k.chebyshev_center();
        assert_abs_diff_eq!(r, r_expect, epsilon = 1e-12);
        assert_abs_diff_eq!(c[0], r_expect, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], r_expect, epsilon = 1e-12);
    }

    #[test]
    fn empty_and_unbounded_rejected() {
        let empty = Polyhedron::new(vec![hs(&[1.0], &[1.0]), hs(&[0.0], &[-1.0])]);
        assert!(matches!(empty, Err(Error::EmptyPolyhedron)));
        let slab = Polyhedron::new(vec![hs(&[0.0, 0.0], &[1.0, 0.0]), hs(&[1.0, 0.0], &[-1.0, 0.0])]);
        assert!(matches!(slab, Err(Error::NotCompact)));
        let flat = Polyhedron::new(vec![hs(&[0.5], &[1.0]), hs(&[0.5], &[-1.0])]);
        assert!(matches!(flat, Err(Error::EmptyPolyhedron)));
    }

    #[test]
    fn box_vertices_are_tight_on_exactly_d_facets() {
        let k = Polyhedron::boxed(&[-1.0, 0.0, 2.0], &[1.0, 0.5, 3.0]).unwrap();
        for mask in 0..8u32 {
            let v: Vec<f64> = (0..3)
                .map(|i| {
                    let (lo, hi) = k.bounding_box();
                    if mask & (1 << i) == 0 { lo[i] } else { hi[i] }
                })
                .collect();
            assert!(k.contains(&v, 0.0));
            assert_eq!(k.active_facets(&v, 0.0).len(), 3);
        }
    }

    #[test]
    fn triangle_face_frames() {
        let k = Polyhedron::unit_simplex(2);
        for s in 0..3 {
            let f = k.face_frame(s).unwrap();
            assert_eq!(f.basis.len(), 1);
            let mid = f.point(&[(f.lo[0] + f.hi[0]) / 2.0]);
            assert!(k.contains(&mid, 1e-12));
            assert!(k.active_facets(&mid, 1e-12).contains(&s));
        }
        // hypotenuse length √2
        let f = k.face_frame(2).unwrap();
        assert_abs_diff_eq!(f.hi[0] - f.lo[0], 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn interval_faces_are_points() {
        let k = Polyhedron::unit_box(1);
        let f = k.face_frame(1).unwrap();
        assert!(f.basis.is_empty());
        assert_eq!(f.point(&[]), vec![1.0]);
    }
}
