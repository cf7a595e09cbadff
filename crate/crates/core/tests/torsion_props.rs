use nalgebra::DMatrix;
use proptest::prelude::*;
use tangent_qk::base_manifold::{lower_torsion, torsion_decompose, torsion_inner};

const M: usize = 4;

/// A positive definite metric near the identity.
fn metric() -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-0.5..0.5f64, M * M).prop_map(|v| {
        let a = DMatrix::identity(M, M) + DMatrix::from_vec(M, M, v);
        a.transpose() * a
    })
    .prop_filter("condition number below 1e3", |g| {
        let sv = g.clone().svd(false, false).singular_values;
        sv.max() < 1e3 * sv.min()
    })
}

/// `T^k_{ij}`, antisymmetric in `i, j`.
fn torsion() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, M * M * M).prop_map(|raw| {
        let mut t = vec![0.0; M * M * M];
        for k in 0..M {
            for i in 0..M {
                for j in 0..M {
                    t[(k * M + i) * M + j] = raw[(k * M + i) * M + j] - raw[(k * M + j) * M + i];
                }
            }
        }
        t
    })
}

/// Raises the last index of a lowered tensor back to `T^k_{ij}`.
fn raise(low: &[f64], ginv: &DMatrix<f64>) -> Vec<f64> {
    let mut t = vec![0.0; M * M * M];
    for k in 0..M {
        for i in 0..M {
            for j in 0..M {
                t[(k * M + i) * M + j] = (0..M).map(|l| ginv[(k, l)] * low[(i * M + j) * M + l]).sum();
            }
        }
    }
    t
}

/// Round-off allowance: `ε · |T| · cond(g)`.
fn allowance(t: &[f64], g: &DMatrix<f64>) -> f64 {
    let sv = g.clone().svd(false, false).singular_values;
    let size = t.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    1e-14 * size * sv.max() / sv.min() * sv.max()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parts_resum_and_are_orthogonal(t in torsion(), g in metric()) {
        let ginv = g.clone().try_inverse().unwrap();
        let p = torsion_decompose(&t, &g).unwrap();
        let low = lower_torsion(&t, &g);
        let tol = allowance(&t, &g);
        prop_assert!(max_diff(&p.resum(), &low) <= tol);
        let parts = [&p.remainder, &p.skew, &p.vectorial];
        let norm = |x: &[f64]| torsion_inner(x, x, &ginv).sqrt();
        for a in 0..3 {
            for b in a + 1..3 {
                let cos = torsion_inner(parts[a], parts[b], &ginv) / (norm(parts[a]) * norm(parts[b])).max(1e-300);
                prop_assert!(cos.abs() <= 1e-12, "cos {} pair {}{} norms {} {}", cos, a, b, norm(parts[a]), norm(parts[b]));
            }
        }
    }

    #[test]
    fn projections_are_idempotent(t in torsion(), g in metric()) {
        let ginv = g.clone().try_inverse().unwrap();
        let p = torsion_decompose(&t, &g).unwrap();
        let tol = 10.0 * allowance(&t, &g);
        let again = |part: &[f64]| torsion_decompose(&raise(part, &ginv), &g).unwrap();
        let r = again(&p.remainder);
        prop_assert!(max_diff(&r.remainder, &p.remainder) <= tol);
        prop_assert!(max_diff(&r.skew, &vec![0.0; r.skew.len()]) <= tol);
        let s = again(&p.skew);
        prop_assert!(max_diff(&s.skew, &p.skew) <= tol);
        prop_assert!(max_diff(&s.vectorial, &vec![0.0; s.skew.len()]) <= tol);
        let v = again(&p.vectorial);
        prop_assert!(max_diff(&v.vectorial, &p.vectorial) <= tol);
        prop_assert!(max_diff(&v.remainder, &vec![0.0; v.skew.len()]) <= tol);
    }
}
