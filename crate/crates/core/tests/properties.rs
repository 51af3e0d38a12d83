use std::f64::consts::TAU;

use numrange::geometry::{convex_hull, hausdorff, point_segment_distance};
use numrange::linalg::{hermitian_eig, random_matrix, random_unit_vector, ComplexMatrix, C64};
use numrange::range::{boundary_curve, curve_contains, support_point};
use numrange::reducing::{deflate, half_plane_inequality_gap, reducing_eigenspace, reducing_residual};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = C64> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn cloud(min: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(point(), min..40)
}

fn inside_hull(hull: &[C64], z: C64, tol: f64) -> bool {
    let n = hull.len();
    if n < 3 {
        return (0..n).any(|i| point_segment_distance(z, hull[i], hull[(i + 1) % n]) <= tol);
    }
    (0..n).all(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        numrange::geometry::cross(b - a, z - a) >= -tol * (b - a).norm()
    })
}

/// `T + i·s·I` with `s` chosen so that `W` touches the real axis from above.
fn in_upper_half_plane(t: &ComplexMatrix) -> ComplexMatrix {
    let lift = support_point(t, -std::f64::consts::FRAC_PI_2).unwrap().support;
    t.shifted(C64::new(0.0, lift))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hull_contains_all_points_and_is_idempotent(pts in cloud(3)) {
        let hull = convex_hull(&pts);
        for &z in &pts {
            prop_assert!(inside_hull(&hull, z, 1e-9));
        }
        let again = convex_hull(&hull);
        prop_assert_eq!(again.len(), hull.len());
    }

    #[test]
    fn hausdorff_is_a_metric_on_polygons(a in cloud(3), b in cloud(3), c in cloud(3)) {
        let (a, b, c) = (convex_hull(&a), convex_hull(&b), convex_hull(&c));
        let ab = hausdorff(&a, &b);
        prop_assert!((ab - hausdorff(&b, &a)).abs() <= 1e-12);
        prop_assert!(hausdorff(&a, &a) <= 1e-12);
        // densification makes each evaluation exact only up to its step
        let slack = 3e-4 * 20.0;
        prop_assert!(ab <= hausdorff(&a, &c) + hausdorff(&c, &b) + slack);
    }

    #[test]
    fn hausdorff_translation_invariant(a in cloud(3), b in cloud(3), shift in point()) {
        let (a, b) = (convex_hull(&a), convex_hull(&b));
        let moved = |p: &[C64]| p.iter().map(|z| z + shift).collect::<Vec<_>>();
        let d0 = hausdorff(&a, &b);
        let d1 = hausdorff(&moved(&a), &moved(&b));
        prop_assert!((d0 - d1).abs() <= 1e-9 * (1.0 + d0));
    }

    #[test]
    fn hermitian_eig_reconstructs(n in 1usize..12, seed in any::<u64>()) {
        let a = random_matrix(n, seed).hermitian_part();
        let eig = hermitian_eig(&a).unwrap();
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let err = eig.reconstruct().sub(&a).frobenius_norm();
        prop_assert!(err <= 1e-11 * (1.0 + a.frobenius_norm()));
    }

    #[test]
    fn rayleigh_quotients_lie_in_the_range(n in 2usize..7, seed in any::<u64>()) {
        let t = random_matrix(n, seed);
        let curve = boundary_curve(&t, 256).unwrap();
        prop_assert!(curve.is_convex(1e-9));
        let tol = 1e-9 * t.op_norm().unwrap();
        for k in 0..20 {
            let x = random_unit_vector(n, seed.wrapping_add(k));
            prop_assert!(curve_contains(&curve, t.quadratic_form(x.coords()), tol));
        }
        for p in &curve.points {
            let along = (C64::from_polar(1.0, -p.theta) * p.point).re;
            prop_assert!((along - p.support).abs() <= tol);
        }
    }

    #[test]
    fn support_is_equivariant(n in 2usize..6, seed in any::<u64>(), phi in 0.0..TAU, shift in point(), theta in 0.0..TAU) {
        let t = random_matrix(n, seed);
        let rot = C64::from_polar(1.0, phi);
        let moved = t.scale(rot).shifted(shift);
        let h = support_point(&t, theta - phi).unwrap().support;
        let h_moved = support_point(&moved, theta).unwrap().support;
        let expect = h + (C64::from_polar(1.0, -theta) * shift).re;
        prop_assert!((h_moved - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
        let h_adj = support_point(&t.adjoint(), theta).unwrap().support;
        let h_conj = support_point(&t, -theta).unwrap().support;
        prop_assert!((h_adj - h_conj).abs() <= 1e-10 * (1.0 + h_conj.abs()));
    }

    #[test]
    fn deflation_bookkeeping(k in 1usize..4, m in 1usize..5, seed in any::<u64>(), lam in point()) {
        // λI_k ⊕ B, conjugated by a unitary; generic B has no reducing
        // eigenvector at λ
        let b = random_matrix(m, seed).shifted(lam + C64::new(20.0, 0.0));
        let t = ComplexMatrix::direct_sum(&[ComplexMatrix::identity(k).scale(lam), b]);
        let u = numrange::linalg::random_unitary(k + m, seed ^ 0x5a5a);
        let t = u.matmul(&t).matmul(&u.adjoint());
        let cert = reducing_eigenspace(&t, lam, 1e-8).unwrap();
        prop_assert_eq!(cert.dimension, k);
        for v in &cert.basis {
            prop_assert!(reducing_residual(&t, lam, v).unwrap() <= 1e-9 * t.op_norm().unwrap());
        }
        let rest = deflate(&t, &cert).unwrap();
        prop_assert_eq!(rest.n(), m);
        let tr = |a: &ComplexMatrix| (0..a.n()).map(|i| a[(i, i)]).sum::<C64>();
        prop_assert!((tr(&t) - lam * k as f64 - tr(&rest)).norm() <= 1e-9 * (1.0 + tr(&t).norm()));
    }

    #[test]
    fn inequality_gap_nonnegative_in_standard_position(
        n in 2usize..6,
        seed in any::<u64>(),
        re in -3.0..3.0f64,
        im in -3.0..3.0f64,
    ) {
        let t = in_upper_half_plane(&random_matrix(n, seed));
        let u = random_unit_vector(n, seed.wrapping_add(1));
        let z = random_unit_vector(n, seed.wrapping_add(2)).into_coords();
        let gap = half_plane_inequality_gap(&t, &u, &z, C64::new(re, im)).unwrap();
        prop_assert!(gap >= -1e-10);
    }
}
