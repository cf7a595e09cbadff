use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tangent_qk::quatlin::{
    commutant_basis, dim4_product, in_gn, volume_form, isotropy_check, kraines, line_lemma_check, quat_mul, sample_gn, sample_isometry,
    sample_rotation3, standard_triple, Quaternion,
};

fn quaternion() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-3.0..3.0f64).prop_map(|[w, x, y, z]| Quaternion::new(w, x, y, z))
}

fn invertible(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-0.4..0.4f64, n * n)
        .prop_map(move |v| DMatrix::identity(n, n) + DMatrix::from_vec(n, n, v))
        .prop_filter("well conditioned", |a| a.clone().svd(false, false).singular_values.min() > 0.2)
}

fn vec4() -> impl Strategy<Value = DVector<f64>> {
    prop::array::uniform4(-2.0..2.0f64).prop_map(|a| DVector::from_row_slice(&a))
}

/// A metric on R⁴ with a unit vector and the oriented volume form.
fn euclidean4() -> impl Strategy<Value = (DMatrix<f64>, DVector<f64>)> {
    (invertible(4), vec4()).prop_filter_map("nonzero unit candidate", |(a, u)| {
        let g = a.transpose() * a;
        let n = (u.transpose() * &g * &u)[(0, 0)].sqrt();
        (n > 1e-3).then(|| (g, u / n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_multiplicative(p in quaternion(), q in quaternion()) {
        let pq = quat_mul(&p, &q);
        prop_assert!((pq.norm() - p.norm() * q.norm()).abs() <= 1e-12 * (1.0 + pq.norm()));
    }

    #[test]
    fn product_is_associative(p in quaternion(), q in quaternion(), r in quaternion()) {
        let a = quat_mul(&quat_mul(&p, &q), &r);
        let b = quat_mul(&p, &quat_mul(&q, &r));
        prop_assert!((a - b).norm() <= 1e-11 * (1.0 + a.norm()));
    }

    #[test]
    fn conjugated_triple_stays_quaternionic(a in invertible(8)) {
        let t = standard_triple(2).conjugated(&a).unwrap();
        prop_assert!(t.residual() <= 1e-10, "{}", t.residual());
    }

    #[test]
    fn rotated_triple_stays_quaternionic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = standard_triple(2).rotated(&sample_rotation3(&mut rng));
        prop_assert!(t.residual() <= 1e-12);
        // the Kraines form does not see the rotation
        let d = kraines(&t).unwrap().raw.sub(&kraines(&standard_triple(2)).unwrap().raw).max_abs();
        prop_assert!(d <= 1e-11);
    }

    #[test]
    fn kraines_form_is_invariant_under_change_of_basis(a in invertible(8)) {
        let t = standard_triple(2);
        let moved = t.conjugated(&a).unwrap();
        // Ω' = A^{-*}Ω, so pulling back by A recovers Ω
        let pulled = kraines(&moved).unwrap().raw.pullback(&a);
        prop_assert!(pulled.sub(&kraines(&t).unwrap().raw).max_abs() <= 1e-9);
    }

    #[test]
    fn isotropy_agrees_with_membership(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = standard_triple(2);
        let comm = commutant_basis(&t);
        let a = sample_gn(&t, &comm, &mut rng);
        let (member, _) = in_gn(&a, &t, 1e-8).unwrap();
        prop_assert!(member);
        prop_assert!(isotropy_check(&a, &t).unwrap() <= 1e-9);
        let b = sample_isometry(&t.g, &mut rng);
        let (member, dist) = in_gn(&b, &t, 1e-8).unwrap();
        let iso = isotropy_check(&b, &t).unwrap();
        prop_assert_eq!(member, iso <= 1e-8, "distance {} isotropy {}", dist, iso);
    }

    #[test]
    fn quaternionic_line_has_unit_determinant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = standard_triple(2);
        let y0 = DVector::from_fn(8, |_, _| rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal));
        let y = &y0 / y0.norm();
        let (iy, jy, ky) = (&t.i * &y, &t.j * &y, &t.k * &y);
        let r = line_lemma_check(&y, [&iy, &jy, &ky], &t).unwrap();
        prop_assert!((r.det - 1.0).abs() <= 1e-12);
        prop_assert!(r.residual <= 1e-10);
    }

    #[test]
    fn dim4_product_is_bilinear_and_multiplicative((g, u) in euclidean4(), x in vec4(), y in vec4(), z in vec4(), c in -2.0..2.0f64) {
        let vol = volume_form(&g, 1.0);
        let mul = |a: &DVector<f64>, b: &DVector<f64>| dim4_product(&u, a, b, &g, &vol).unwrap();
        let norm = |a: &DVector<f64>| (a.transpose() * &g * a)[(0, 0)].sqrt();
        let lhs = mul(&(&x * c + &y), &z);
        let rhs = mul(&x, &z) * c + mul(&y, &z);
        prop_assert!((&lhs - &rhs).amax() <= 1e-10 * (1.0 + rhs.amax()));
        let lhs = mul(&z, &(&x * c + &y));
        let rhs = mul(&z, &x) * c + mul(&z, &y);
        prop_assert!((&lhs - &rhs).amax() <= 1e-10 * (1.0 + rhs.amax()));
        let p = mul(&x, &y);
        prop_assert!((norm(&p) - norm(&x) * norm(&y)).abs() <= 1e-10 * (1.0 + norm(&p)));
        // U is the unit
        prop_assert!((mul(&u, &x) - &x).amax() <= 1e-10 * (1.0 + x.amax()));
    }
}
