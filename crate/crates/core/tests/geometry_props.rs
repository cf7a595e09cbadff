use nalgebra::DMatrix;
use proptest::prelude::*;
use tangent_qk::base_manifold::{
    base_connection, curvature, endo_parallel_residual, first_bianchi_residual, lowered_curvature, metric_residual,
    torsion, ChartManifold, ConnectionMode,
};
use tangent_qk::obata::obata_check;
use tangent_qk::scenario::ScenarioSpec;
use tangent_qk::tangent_bundle::{StructureKind, TMPoint, TmGeometry};

/// Parameters of a non-flat, diagonally dominant metric on `[0,1]^m`.
#[derive(Clone, Debug)]
struct Metric {
    m: usize,
    freq: Vec<(f64, f64)>,
    off: f64,
}

impl Metric {
    fn entry(&self, i: usize, j: usize) -> String {
        let (a, b) = self.freq[i];
        match (i, j) {
            _ if i == j => format!("1 + 0.3*sin({a}*x1 + {b}*x{})^2", self.m),
            (0, 1) | (1, 0) => format!("{}*cos(x2 - x1)", self.off),
            _ => "0".into(),
        }
    }

    fn text(&self, torsion: &[(usize, usize, usize, f64)], extra: &str) -> String {
        let m = self.m;
        let mut s = format!("[scenario]\nname = p\ndim = {m}\nconnection = torsioned\n[box]\n");
        for i in 1..=m {
            s += &format!("x{i} = 0, 1\n");
        }
        s += "[metric]\n";
        for i in 0..m {
            for j in i..m {
                s += &format!("g_{}_{} = {}\n", i + 1, j + 1, self.entry(i, j));
            }
        }
        if !torsion.is_empty() {
            s += "[torsion]\n";
            for (k, i, j, v) in torsion {
                s += &format!("T_{k}_{i}_{j} = {v}\n");
            }
        }
        s + extra
    }

    /// The rotation by a right angle, for `m = 2`.
    fn rotation(&self) -> String {
        let (g11, g12, g22) = (self.entry(0, 0), self.entry(0, 1), self.entry(1, 1));
        let root = format!("sqrt(({g11})*({g22}) - ({g12})^2)");
        format!(
            "[acs]\nJ_1_1 = -({g12})/{root}\nJ_1_2 = -({g22})/{root}\nJ_2_1 = ({g11})/{root}\nJ_2_2 = ({g12})/{root}\n"
        )
    }
}

fn metric(dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Metric> {
    dims.prop_flat_map(|m| {
        (prop::collection::vec((0.2..2.0f64, -2.0..2.0f64), m), -0.2..0.2f64)
            .prop_map(move |(freq, off)| Metric { m, freq, off })
    })
}

fn torsion_entries(m: usize) -> impl Strategy<Value = Vec<(usize, usize, usize, f64)>> {
    prop::collection::vec((1..=m, 1..=m, 1..=m, -1.0..1.0f64), 0..4)
        .prop_map(|v| v.into_iter().filter(|(_, i, j, _)| i < j).collect())
}

fn manifold(text: &str) -> ChartManifold {
    ScenarioSpec::parse(text).unwrap().manifold().unwrap()
}

fn point(m: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(0.0..1.0f64, m), prop::collection::vec(-1.5..1.5f64, m))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn metric_connection_realizes_the_declared_torsion(
        (g, t, (x, _)) in metric(2..=4).prop_flat_map(|g| { let m = g.m; (Just(g), torsion_entries(m), point(m)) })
    ) {
        let mfd = manifold(&g.text(&t, ""));
        let conn = base_connection(&mfd, ConnectionMode::Torsioned, &x).unwrap();
        let declared: Vec<f64> = mfd.torsion_jets(&x, 0).unwrap().map_or(vec![0.0; g.m.pow(3)], |v| v.iter().map(|j| j.value()).collect());
        let realized = torsion(&conn);
        prop_assert!(realized.iter().zip(&declared).all(|(a, b)| (a - b).abs() <= 1e-10));
        prop_assert!(metric_residual(&conn, &mfd.metric_jet(&x, 1).unwrap()) <= 1e-10);
        let r = curvature(&conn);
        let low = lowered_curvature(&r, &mfd.metric_at(&x).unwrap(), g.m);
        let m = g.m;
        for k in 0..m { for l in 0..m { for i in 0..m { for j in 0..m {
            let a = low[((k * m + l) * m + i) * m + j] + low[((l * m + k) * m + i) * m + j];
            prop_assert!(a.abs() <= 1e-9);
            let b = r[((l * m + k) * m + i) * m + j] + r[((l * m + k) * m + j) * m + i];
            prop_assert!(b == 0.0);
        }}}}
    }

    #[test]
    fn torsion_free_case_is_levi_civita((g, (x, _)) in metric(2..=4).prop_flat_map(|g| { let m = g.m; (Just(g), point(m)) })) {
        let mfd = manifold(&g.text(&[], ""));
        let lc = base_connection(&mfd, ConnectionMode::LeviCivita, &x).unwrap();
        let mc = base_connection(&mfd, ConnectionMode::Torsioned, &x).unwrap();
        let d: Vec<f64> = lc.values().iter().zip(mc.values()).map(|(a, b)| a - b).collect();
        prop_assert!(max_abs(&d) <= 1e-12);
        prop_assert!(first_bianchi_residual(&curvature(&lc), g.m) <= 1e-9);
    }

    #[test]
    fn hermitianized_connection_preserves_the_structure(
        (g, t, (x, _)) in metric(2..=2).prop_flat_map(|g| (Just(g), torsion_entries(2), point(2)))
    ) {
        let mfd = manifold(&g.text(&t, &g.rotation()));
        let conn = base_connection(&mfd, ConnectionMode::Hermitianized, &x).unwrap();
        let j = mfd.acs_jet(&x, 2).unwrap().unwrap();
        prop_assert!(endo_parallel_residual(&conn, &j) <= 1e-9);
        prop_assert!(metric_residual(&conn, &mfd.metric_jet(&x, 1).unwrap()) <= 1e-9);
    }

    #[test]
    fn tangent_bundle_connection_and_structures(
        (g, t, (x, v)) in metric(2..=3).prop_flat_map(|g| { let m = g.m; (Just(g), torsion_entries(m), point(m)) })
    ) {
        let acs = if g.m == 2 { g.rotation() } else { String::new() };
        let mfd = manifold(&g.text(&t, &acs));
        let tm = TmGeometry::new(&mfd, ConnectionMode::Torsioned, &TMPoint { x, v }).unwrap();
        let gamma = tm.levi_civita();
        let oracle = tm.levi_civita_oracle();
        let d: Vec<f64> = gamma.iter().zip(&oracle).map(|(a, b)| a - b).collect();
        prop_assert!(max_abs(&d) <= 1e-8, "oracle {}", max_abs(&d));
        prop_assert!(tm.metric_residual(&gamma) <= 1e-8);
        prop_assert!(tm.torsion_residual(&gamma) <= 1e-8);
        prop_assert!(tm.term_support_residual() <= 1e-10);
        prop_assert!(tm.horizontal_bracket_residual() <= 1e-8);
        prop_assert!(tm.splitting_residual().unwrap() <= 1e-10);
        // the block form of G in the adapted frame is diag(g, g)
        let p = tm.frame_matrix().values();
        let pinv = p.clone().try_inverse().unwrap();
        let block = pinv.transpose() * tm.metric() * &pinv;
        let gb = tm.base_metric();
        let m = g.m;
        let expected = DMatrix::from_fn(2 * m, 2 * m, |r, c| if r / m == c / m { gb[(r % m, c % m)] } else { 0.0 });
        prop_assert!((block - expected).amax() <= 1e-12 * (1.0 + gb.amax()) * 10.0);
        prop_assert!(tm.algebra_residual(&tm.structure(StructureKind::I).unwrap()) <= 1e-10);
        if g.m == 2 {
            for kind in StructureKind::ALL {
                prop_assert!(tm.algebra_residual(&tm.structure(kind).unwrap()) <= 1e-10, "{}", kind.name());
            }
            let val = |k: StructureKind| tm.structure(k).unwrap().values();
            let (i, jm, k) = (val(StructureKind::I), val(StructureKind::JMinus), val(StructureKind::K));
            prop_assert!((&k * &i + &i * &k).amax() <= 1e-10);
            prop_assert!((&k * &jm + &jm * &k).amax() <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn obata_connection_parallelizes_conformal_triples(c in prop::array::uniform4(-0.5..0.5f64), x in prop::collection::vec(-1.0..1.0f64, 4)) {
        // g = e^{2f}δ with the standard triple rescaled to stay orthogonal
        let f = format!("{}*x1*x2 + {}*x3 + {}*sin(x4) + {}*x1^2", c[0], c[1], c[2], c[3]);
        let mut s = String::from("[scenario]\nname = o\ndim = 4\nconnection = obata\n[box]\n");
        for i in 1..=4 {
            s += &format!("x{i} = -1, 1\n");
        }
        s += "[metric]\n";
        for i in 1..=4 {
            s += &format!("g_{i}_{i} = exp(2*({f}))\n");
        }
        let t = tangent_qk::quatlin::standard_triple(1);
        for (n, mat) in t.members().iter().enumerate() {
            s += &format!("[triple.{}]\n", n + 1);
            for r in 0..4 {
                for col in 0..4 {
                    if mat[(r, col)] != 0.0 {
                        s += &format!("J_{}_{} = {}\n", r + 1, col + 1, mat[(r, col)]);
                    }
                }
            }
        }
        let mfd = manifold(&s);
        let report = obata_check(&mfd, ConnectionMode::LeviCivita, &x).unwrap();
        prop_assert!(report.parallel.iter().all(|r| *r <= 1e-8), "{:?}", report.parallel);
        prop_assert!(report.metric <= 1e-8);
    }
}
