//! Scenarios shipped with the library, written in the scenario file format.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::spec::ScenarioSpec;
use crate::quatlin::standard_triple;

const FRAME: &str = "tm_lc_oracle, tm_lc_metric, tm_lc_torsion, tau, horizontal_bracket, structures_algebra, d_star_parallel";
const SURFACE: &str = "surface_table, surface_bracket, surface_k_scale";

pub const NAMES: &[&str] = &[
    "flat_torus_2",
    "flat_c1_kahler",
    "flat_c2_kahler",
    "flat_r3_skew_torsion",
    "flat_c2_type30_torsion",
    "flat_c2_skew_torsion",
    "s2_round",
    "hyperbolic_plane",
    "r4_conformal_obata",
    "r8_quaternionic_flat",
    "surface_torsion_f2",
];

fn header(name: &str, dim: usize, connection: &str, bounds: &[(&str, &str)]) -> String {
    let mut s = format!("[scenario]\nname = {name}\ndim = {dim}\nconnection = {connection}\n\n[box]\n");
    for (i, (lo, hi)) in bounds.iter().enumerate() {
        let _ = writeln!(s, "x{} = {lo}, {hi}", i + 1);
    }
    s
}

fn identity_metric(dim: usize) -> String {
    let mut s = String::from("\n[metric]\n");
    for i in 1..=dim {
        let _ = writeln!(s, "g_{i}_{i} = 1");
    }
    s
}

/// Rotation by `+90°` in each coordinate plane `(2i−1, 2i)`.
fn standard_acs(dim: usize) -> String {
    let mut s = String::from("\n[acs]\n");
    for p in 0..dim / 2 {
        let (a, b) = (2 * p + 1, 2 * p + 2);
        let _ = writeln!(s, "J_{a}_{b} = -1\nJ_{b}_{a} = 1");
    }
    s
}

fn matrix_section(header: &str, a: &DMatrix<f64>) -> String {
    let mut s = format!("\n[{header}]\n");
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if a[(i, j)] != 0.0 {
                let _ = writeln!(s, "J_{}_{} = {}", i + 1, j + 1, a[(i, j)]);
            }
        }
    }
    s
}

fn standard_triple_sections(n: usize, with_acs: bool) -> String {
    let t = standard_triple(n);
    let mut s = String::new();
    if with_acs {
        s += &matrix_section("acs", &t.i);
    }
    for (k, a) in [&t.i, &t.j, &t.k].into_iter().enumerate() {
        s += &matrix_section(&format!("triple.{}", k + 1), a);
    }
    s
}

fn checks(list: &[&str], nonzero: &str) -> String {
    let mut s = format!("\n[checks]\nlist = {}\n", list.join(", "));
    if !nonzero.is_empty() {
        let _ = writeln!(s, "expect_nonzero = {nonzero}");
    }
    s
}

/// Scenario text for a built-in name.
pub fn builtin_text(name: &str) -> Option<String> {
    let tau2pi = ("0", "6.283185307179586");
    let unit = ("-1", "1");
    let text = match name {
        "flat_torus_2" => {
            header(name, 2, "lc", &[tau2pi, tau2pi])
                + &identity_metric(2)
                + &standard_acs(2)
                + &checks(
                    &[
                        FRAME,
                        "nijenhuis_I, d_omega_I, parallel_I, nijenhuis_Jp, nijenhuis_Jm, nijenhuis_K",
                        "d_omega_Jp, d_omega_Jm, d_omega_K",
                        SURFACE,
                        "einstein_defect, einstein_scalar_eq",
                    ],
                    "",
                )
        }
        "flat_c1_kahler" => {
            header(name, 2, "lc", &[unit, unit])
                + &identity_metric(2)
                + &standard_acs(2)
                + &checks(&[FRAME, "nijenhuis_Jp, nijenhuis_Jm, nijenhuis_K, d_omega_Jp, d_omega_Jm, d_omega_K"], "")
        }
        "flat_c2_kahler" => {
            header(name, 4, "lc", &[unit; 4])
                + &identity_metric(4)
                + &standard_acs(4)
                + &checks(
                    &[
                        FRAME,
                        "nijenhuis_I, nijenhuis_Jp, nijenhuis_Jm, nijenhuis_K",
                        "d_omega_I, d_omega_Jp, d_omega_Jm, d_omega_K, parallel_I",
                        "d_kraines, qk_defect, qk_identity",
                    ],
                    "",
                )
        }
        "flat_r3_skew_torsion" => {
            header(name, 3, "torsioned", &[unit; 3])
                + &identity_metric(3)
                + "\n[torsion]\nT_1_2_3 = 0.5\nT_2_3_1 = 0.5\nT_3_1_2 = 0.5\n"
                + &checks(&[FRAME, "nijenhuis_I, d_omega_I, torsion_decomposition"], "tau, nijenhuis_I, d_omega_I")
        }
        "flat_c2_type30_torsion" => {
            header(name, 4, "torsioned", &[unit; 4])
                + &identity_metric(4)
                + &standard_acs(4)
                + "\n[torsion]\nT_1_1_2 = 0.4\nT_2_1_2 = -0.3\n"
                + &checks(
                    &[FRAME, "torsion_j_type, d_omega_Jp, d_omega_Jm, d_omega_I, d_omega_K, torsion_decomposition"],
                    "tau, d_omega_I, d_omega_K",
                )
                + "\n[tolerances]\nd_omega_Jp = 1e-7\nd_omega_Jm = 1e-7\n"
        }
        "flat_c2_skew_torsion" => {
            header(name, 4, "torsioned", &[unit; 4])
                + &identity_metric(4)
                + &standard_acs(4)
                + "\n[torsion]\nT_1_2_3 = 0.5\nT_2_3_1 = 0.5\nT_3_1_2 = 0.5\n"
                + &checks(
                    &[FRAME, "torsion_j_type, d_omega_Jp, d_omega_Jm, d_omega_K, d_kraines, qk_defect, qk_identity"],
                    "tau, torsion_j_type, d_omega_Jp, d_omega_Jm, d_omega_K, d_kraines, qk_defect",
                )
        }
        "s2_round" => {
            header(name, 2, "lc", &[("0.5", "2.6"), ("0", "6.28")])
                + "\n[metric]\ng_1_1 = 1\ng_2_2 = sin(x1)^2\n"
                + "\n[acs]\nJ_1_2 = -sin(x1)\nJ_2_1 = 1/sin(x1)\n"
                + &checks(
                    &[FRAME, "nijenhuis_I, d_omega_I, parallel_I, d_omega_K, nijenhuis_K", SURFACE, "einstein_defect"],
                    "nijenhuis_I, parallel_I, nijenhuis_K, einstein_defect",
                )
        }
        "hyperbolic_plane" => {
            header(name, 2, "lc", &[unit, ("0.5", "2")])
                + "\n[metric]\ng_1_1 = 1/x2^2\ng_2_2 = 1/x2^2\n"
                + &standard_acs(2)
                + &checks(
                    &[FRAME, "nijenhuis_I, d_omega_I, d_omega_K", SURFACE, "einstein_defect"],
                    "nijenhuis_I, einstein_defect",
                )
        }
        "r4_conformal_obata" => {
            header(name, 4, "obata", &[unit; 4])
                + "\n[metric]\ng_1_1 = exp(2*x1*x2)\ng_2_2 = exp(2*x1*x2)\ng_3_3 = exp(2*x1*x2)\ng_4_4 = exp(2*x1*x2)\n"
                + &standard_triple_sections(1, true)
                + &checks(
                    &["tm_lc_oracle, tm_lc_metric, tm_lc_torsion, structures_algebra, d_star_parallel, tau", "obata_parallel, obata_metric, obata_input_parallel"],
                    "tau, obata_input_parallel",
                )
        }
        "r8_quaternionic_flat" => {
            header(name, 8, "lc", &[unit; 8])
                + &identity_metric(8)
                + &standard_triple_sections(2, false)
                + &checks(&[FRAME, "family_d_kraines, d_kraines, qk_defect"], "")
        }
        "surface_torsion_f2" => {
            header(name, 2, "torsioned", &[unit, unit])
                + &identity_metric(2)
                + &standard_acs(2)
                + "\n[torsion]\nT_2_1_2 = 0.5\n"
                + &checks(
                    &["tm_lc_oracle, tm_lc_metric, tm_lc_torsion, tau, horizontal_bracket", SURFACE, "einstein_scalar_eq"],
                    "tau",
                )
        }
        _ => return None,
    };
    Some(text)
}

pub fn builtin(name: &str) -> Option<ScenarioSpec> {
    builtin_text(name).map(|t| ScenarioSpec::parse(&t).unwrap_or_else(|e| panic!("built-in `{name}` is malformed: {e}")))
}
