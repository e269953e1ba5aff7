use proptest::prelude::*;
use viable_sde::geometry::{HalfSpace, Polyhedron};

fn min_distance_grid_max(poly: &Polyhedron, n: usize) -> f64 {
    let (lo, hi) = poly.bounding_box();
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        for j in 0..=n {
            let z = [
                lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64,
                lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64,
            ];
            best = best.max(poly.min_distance(&z));
        }
    }
    best
}

fn pentagon() -> Polyhedron {
    let hs = |u: [f64; 2], v: [f64; 2]| HalfSpace::new(u.to_vec(), v.to_vec()).unwrap();
    Polyhedron::new(vec![
        hs([0.0, 0.0], [0.0, 1.0]),
        hs([0.0, 0.0], [1.0, 0.0]),
        hs([2.0, 0.0], [-1.0, 0.0]),
        hs([0.0, 1.5], [1.0, -2.0]),
        hs([2.0, 1.0], [-1.0, -1.0]),
    ])
    .unwrap()
}

#[test]
fn chebyshev_center_beats_every_grid_point() {
    let slab = Polyhedron::boxed(&[0.0, 0.0], &[1.0, 3.0]).unwrap();
    for poly in [Polyhedron::unit_box(2), Polyhedron::unit_simplex(2), slab, pentagon()] {
        let (c, r) = poly.chebyshev_center();
        assert!((poly.min_distance(c) - r).abs() < 1e-9);
        assert!(poly.contains(c, 0.0));
        assert!(r > 0.0);
        let grid = min_distance_grid_max(&poly, 100);
        assert!(grid <= r + 1e-6, "grid {grid} > radius {r}");
        assert!(grid >= r - 0.05, "grid oracle too coarse: {grid} vs {r}");
    }
}

#[test]
fn analytic_radii() {
    assert!((Polyhedron::unit_box(2).chebyshev_center().1 - 0.5).abs() < 1e-9);
    let tri = Polyhedron::unit_simplex(2);
    let (c, r) = tri.chebyshev_center();
    let expect = (2.0 - 2f64.sqrt()) / 2.0;
    assert!((r - expect).abs() < 1e-9);
    assert!((c[0] - expect).abs() < 1e-9 && (c[1] - expect).abs() < 1e-9);
}

#[test]
fn three_dimensional_box() {
    let k = Polyhedron::boxed(&[0.0, -1.0, 2.0], &[4.0, 1.0, 3.0]).unwrap();
    let (_, r) = k.chebyshev_center();
    assert!((r - 0.5).abs() < 1e-9);
    assert_eq!(k.n_facets(), 6);
}

proptest! {
    #[test]
    fn distance_invariant_under_normal_scaling(
        u in prop::array::uniform2(-2.0f64..2.0),
        v in prop::array::uniform2(-2.0f64..2.0),
        z in prop::array::uniform2(-3.0f64..3.0),
        c in 1e-3f64..1e3,
    ) {
        prop_assume!(v[0].hypot(v[1]) > 1e-3);
        let a = HalfSpace::new(u.to_vec(), v.to_vec()).unwrap();
        let b = HalfSpace::new(u.to_vec(), v.iter().map(|x| c * x).collect()).unwrap();
        let (da, db) = (a.distance(&z[..]), b.distance(&z[..]));
        prop_assert!((da - db).abs() <= 1e-12 * da.abs().max(1.0));
    }

    #[test]
    fn distance_is_linear(
        z in prop::array::uniform2(-3.0f64..3.0),
        w in prop::array::uniform2(-3.0f64..3.0),
        s in -2.0f64..2.0,
    ) {
        let h = HalfSpace::new(vec![0.2, -0.1], vec![3.0, 4.0]).unwrap();
        let mix: Vec<f64> = z.iter().zip(&w).map(|(a, b)| a + s * b).collect();
        let origin = h.distance(&[0.0, 0.0][..]);
        let lhs = h.distance(&mix[..]) - origin;
        let rhs = (h.distance(&z[..]) - origin) + s * (h.distance(&w[..]) - origin);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn random_boxes_have_interior_centers(
        lo in prop::array::uniform2(-5.0f64..5.0),
        ext in prop::array::uniform2(0.1f64..4.0),
    ) {
        let hi = [lo[0] + ext[0], lo[1] + ext[1]];
        let k = Polyhedron::boxed(&lo, &hi).unwrap();
        let (c, r) = k.chebyshev_center();
        prop_assert!(k.contains(c, 0.0));
        prop_assert!((r - 0.5 * ext[0].min(ext[1])).abs() < 1e-9);
    }
}
