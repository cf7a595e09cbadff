use std::fmt::Write as _;

use proptest::prelude::*;
use tangent_qk::scenario::{CheckId, ScenarioSpec};

fn expr_text(m: usize) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("0".to_string()),
        (-50..50i32).prop_map(|c| format!("{}", c as f64 / 8.0)),
        (1..=m).prop_map(|i| format!("x{i}")),
        Just("pi".to_string()),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]))
                .prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            inner.clone().prop_map(|a| format!("-{a}")),
            (prop::sample::select(vec!["sin", "cos", "exp", "sqrt"]), inner).prop_map(|(f, a)| format!("{f}({a})")),
        ]
    })
}

/// Optional entries keyed by index tuple.
fn entries(m: usize, arity: usize) -> impl Strategy<Value = Vec<(Vec<usize>, String)>> {
    prop::collection::vec((prop::collection::vec(1..=m, arity), expr_text(m)), 0..6)
}

fn scenario_text() -> impl Strategy<Value = String> {
    (1..=4usize).prop_flat_map(|m| {
        (
            Just(m),
            entries(m, 2),
            entries(m, 3),
            prop::option::of(entries(m, 2)),
            prop::collection::vec(0..CheckId::ALL.len(), 0..5),
            prop::collection::vec((0..CheckId::ALL.len(), any::<bool>(), 1e-12..1.0f64), 0..3),
            (1..200usize, any::<u64>()),
        )
    })
    .prop_map(|(m, metric, torsion, acs, checks, tols, (samples, seed))| {
        let mut s = format!("[scenario]\nname = random\ndim = {m}\nsamples = {samples}\nseed = {seed}\n[box]\n");
        for i in 1..=m {
            let _ = writeln!(s, "x{i} = -{i}, {}", 2 * i);
        }
        s.push_str("[metric]\n");
        for i in 1..=m {
            let _ = writeln!(s, "g_{i}_{i} = 1");
        }
        for (ij, e) in metric {
            let _ = writeln!(s, "g_{}_{} = {e}", ij[0], ij[1]);
        }
        let torsion: Vec<_> = torsion.into_iter().filter(|(k, _)| k[1] != k[2]).collect();
        if !torsion.is_empty() {
            s.push_str("[torsion]\n");
            for (k, e) in torsion {
                let _ = writeln!(s, "T_{}_{}_{} = {e}", k[0], k[1], k[2]);
            }
        }
        if let Some(acs) = acs {
            s.push_str("[acs]\n");
            for (ij, e) in acs {
                let _ = writeln!(s, "J_{}_{} = {e}", ij[0], ij[1]);
            }
        }
        let mut names: Vec<&str> = checks.iter().map(|c| CheckId::ALL[*c].name()).collect();
        names.dedup();
        let _ = writeln!(s, "[checks]\nlist = {}", names.join(", "));
        if let Some(first) = names.first() {
            let _ = writeln!(s, "expect_nonzero = {first}");
        }
        s.push_str("[tolerances]\n");
        for (c, nonzero, v) in tols {
            let _ = writeln!(s, "{}{} = {v:e}", CheckId::ALL[c].name(), if nonzero { ".nonzero" } else { "" });
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_text_round_trips(text in scenario_text()) {
        let spec = ScenarioSpec::parse(&text).unwrap();
        let canonical = spec.to_text();
        let back = ScenarioSpec::parse(&canonical).unwrap();
        prop_assert_eq!(&back, &spec, "{}", canonical);
        prop_assert_eq!(back.to_text(), canonical);
    }

    #[test]
    fn later_entries_override_earlier_ones(e in expr_text(2), f in expr_text(2)) {
        let base = "[scenario]\nname = o\ndim = 2\n[box]\nx1 = 0, 1\nx2 = 0, 1\n[metric]\ng_1_1 = 1\ng_2_2 = 1\n";
        let spec = ScenarioSpec::parse(&format!("{base}g_1_2 = {e}\ng_1_2 = {f}\n")).unwrap();
        let parsed = tangent_qk::exprlang::parse(&f).unwrap();
        let expected = if parsed.is_zero_literal() { tangent_qk::exprlang::Expr::num(0.0) } else { parsed };
        prop_assert_eq!(&spec.metric[1], &expected);
        prop_assert_eq!(&spec.metric[2], &expected);
    }
}
