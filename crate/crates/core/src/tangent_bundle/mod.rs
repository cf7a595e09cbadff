//! The tangent bundle `TM` in the induced chart `(x¹..xᵐ, v¹..vᵐ)`.
//!
//! The base connection `D` splits `TTM = H ⊕ V`. The adapted frame is
//! `E_i = ∂x_i − N^k_i ∂v_k` (horizontal lifts) and `F_i = ∂v_i`, with
//! `N^k_i = Γ^k_{ij} v^j`. Coordinate components `c` and frame components `f`
//! are related by `f = P c`, `P = [[Id, 0], [N, Id]]`. The metric is
//! `G = Pᵀ diag(g, g) P`, so `H ⊥ V` with the base metric on both factors.
//!
//! `θ` maps `E_i ↦ F_i`; the canonical structure is `I = θᵗ − θ`, hence
//! `I E_i = −F_i` and `I F_i = E_i`.
//!
//! The Levi-Civita connection of `G` is assembled in the frame as
//! `∇ = D* − ½R*(·,·)ξ + A + τ` and converted to coordinates; an independent
//! path applies the Christoffel formula to `G` directly.

mod defect;
mod structures;

use nalgebra::DMatrix;

use crate::base_manifold::{
    base_connection, christoffel, curvature, idx3, idx4, torsion, ChartManifold, ConnectionCoeffs, ConnectionMode,
};
use crate::error::{GeomError, Result};
use crate::jet::{Jet, JetMatrix};

pub use defect::QkDefect;
pub use structures::{StructureKind, StiefelPair};

/// A point `(x, v)` of `TM`.
#[derive(Clone, Debug, PartialEq)]
pub struct TMPoint {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// A tangent vector of `TM`: `a` on `∂x`, `b` on `∂v`.
#[derive(Clone, Debug, PartialEq)]
pub struct TMVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl TMVector {
    pub fn to_coords(&self) -> Vec<f64> {
        self.a.iter().chain(&self.b).copied().collect()
    }
}

/// The canonical vertical field `ξ_v = v`.
pub fn canonical_xi(p: &TMPoint) -> TMVector {
    TMVector { a: vec![0.0; p.x.len()], b: p.v.clone() }
}

/// Frame-coefficient arrays `C^γ_{αβ}` (`∇_{𝔈α} 𝔈β = C^γ_{αβ} 𝔈γ`) of the
/// four terms of the Levi-Civita connection, stored at `(γ*n + α)*n + β`.
#[derive(Clone, Debug)]
pub struct FrameTerms {
    pub d_star: Vec<f64>,
    pub curvature: Vec<f64>,
    pub a: Vec<f64>,
    pub tau: Vec<f64>,
}

impl FrameTerms {
    pub fn total(&self) -> Vec<f64> {
        (0..self.d_star.len())
            .map(|n| self.d_star[n] + self.curvature[n] + self.a[n] + self.tau[n])
            .collect()
    }
}

/// All pointwise data on `TM` at one point, as jets in the `2m` induced
/// coordinates (first order).
#[derive(Clone, Debug)]
pub struct TmGeometry {
    m: usize,
    point: TMPoint,
    base: ConnectionCoeffs,
    g: DMatrix<f64>,
    gamma: Vec<f64>,
    torsion: Vec<f64>,
    curvature: Vec<f64>,
    acs: Option<JetMatrix>,
    triple: Option<[JetMatrix; 3]>,
    /// `N^k_i` at `k*m + i`.
    n_jet: Vec<Jet>,
    p: JetMatrix,
    p_inv: JetMatrix,
    big_g: JetMatrix,
}

fn embed_matrix(a: &JetMatrix, n: usize) -> JetMatrix {
    a.map(|j| j.embed(n, 0))
}

impl TmGeometry {
    pub fn new(mfd: &ChartManifold, mode: ConnectionMode, point: &TMPoint) -> Result<Self> {
        let m = mfd.dim();
        if point.x.len() != m || point.v.len() != m {
            return Err(GeomError::Dimension { expected: m, got: point.x.len().min(point.v.len()) });
        }
        let n = 2 * m;
        let x = &point.x;
        let base = base_connection(mfd, mode, x)?;
        let g_jet = mfd.metric_jet(x, 1)?;
        let g = g_jet.values();
        let gamma = base.values();
        let torsion = torsion(&base);
        let curvature = curvature(&base);
        let acs = match mfd.acs_jet(x, 1)? {
            Some(j) => Some(embed_matrix(&j, n)),
            None => mfd.triple_jets(x, 1)?.map(|[a, _, _]| embed_matrix(&a, n)),
        };
        let triple = mfd.triple_jets(x, 1)?.map(|t| t.map(|j| embed_matrix(&j, n)));
        let v: Vec<Jet> = (0..m).map(|j| Jet::variable(point.v[j], m + j, n, 1)).collect();
        let mut n_jet = Vec::with_capacity(m * m);
        for k in 0..m {
            for i in 0..m {
                let mut acc = Jet::constant(0.0, n, 1);
                for (j, vj) in v.iter().enumerate() {
                    acc.add_product(&base.get(k, i, j).embed(n, 0), vj);
                }
                n_jet.push(acc);
            }
        }
        let one = Jet::constant(1.0, n, 1);
        let zero = Jet::constant(0.0, n, 1);
        let block = |sign: f64| {
            JetMatrix::from_fn(n, |r, c| {
                if r == c {
                    one.clone()
                } else if r >= m && c < m {
                    n_jet[(r - m) * m + c].scale(sign)
                } else {
                    zero.clone()
                }
            })
        };
        let p = block(1.0);
        let p_inv = block(-1.0);
        let gd = embed_matrix(&g_jet, n);
        let diag = JetMatrix::from_fn(n, |r, c| {
            if r < m && c < m {
                gd.get(r, c).clone()
            } else if r >= m && c >= m {
                gd.get(r - m, c - m).clone()
            } else {
                zero.clone()
            }
        });
        let big_g = p.transpose().matmul(&diag).matmul(&p);
        Ok(TmGeometry { m, point: point.clone(), base, g, gamma, torsion, curvature, acs, triple, n_jet, p, p_inv, big_g })
    }

    pub fn base_dim(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    pub fn point(&self) -> &TMPoint {
        &self.point
    }

    pub fn base_connection(&self) -> &ConnectionCoeffs {
        &self.base
    }

    pub fn base_metric(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn base_torsion(&self) -> &[f64] {
        &self.torsion
    }

    pub fn base_curvature(&self) -> &[f64] {
        &self.curvature
    }

    pub fn metric(&self) -> DMatrix<f64> {
        self.big_g.values()
    }

    pub fn metric_jet(&self) -> &JetMatrix {
        &self.big_g
    }

    /// Frame-to-coordinate change `P` (`f = P c`).
    pub fn frame_matrix(&self) -> &JetMatrix {
        &self.p
    }

    pub fn frame_matrix_inverse(&self) -> &JetMatrix {
        &self.p_inv
    }

    /// `N^k_i`.
    pub fn nonlinear_connection(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |k, i| self.n_jet[k * self.m + i].value())
    }

    /// Horizontal lift `(u, −Γ(u, v))` in coordinates.
    pub fn horizontal_lift(&self, u: &[f64]) -> TMVector {
        let nm = self.nonlinear_connection();
        let b = (0..self.m).map(|k| -(0..self.m).map(|i| nm[(k, i)] * u[i]).sum::<f64>()).collect();
        TMVector { a: u.to_vec(), b }
    }

    pub fn vertical_lift(&self, w: &[f64]) -> TMVector {
        TMVector { a: vec![0.0; self.m], b: w.to_vec() }
    }

    /// Largest lowered torsion component `|T_{ijk}|` of the base connection.
    pub fn torsion_norm(&self) -> f64 {
        self.torsion.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// `R(e_i, e_j) v` components `R^l_{kij} v^k`, at `(l*m + i)*m + j`.
    fn curvature_on_v(&self) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m * m * m];
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    out[(l * m + i) * m + j] =
                        (0..m).map(|k| self.curvature[idx4(m, l, k, i, j)] * self.point.v[k]).sum();
                }
            }
        }
        out
    }

    /// The four frame terms of the Levi-Civita connection of `G`.
    pub fn frame_terms(&self) -> FrameTerms {
        let m = self.m;
        let n = 2 * m;
        let at = |c: usize, a: usize, b: usize| (c * n + a) * n + b;
        let gam = |k: usize, i: usize, j: usize| self.gamma[idx3(m, k, i, j)];
        let ginv = self.g.clone().try_inverse().expect("metric must be invertible");
        let mut d_star = vec![0.0; n * n * n];
        let mut curv = vec![0.0; n * n * n];
        let mut a = vec![0.0; n * n * n];
        let mut tau = vec![0.0; n * n * n];
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    d_star[at(k, i, j)] = gam(k, i, j);
                    d_star[at(m + k, i, m + j)] = gam(k, i, j);
                }
            }
        }
        let rv = self.curvature_on_v();
        let rv_at = |l: usize, i: usize, j: usize| rv[(l * m + i) * m + j];
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    curv[at(m + l, i, j)] = -0.5 * rv_at(l, i, j);
                }
            }
        }
        // ⟨A_X Y, e_z⟩ = ½⟨R(X^h, e_z)v, Y^v⟩ + ½⟨R(Y^h, e_z)v, X^v⟩
        let pair = |h: usize, vert: usize, z: usize| {
            0.5 * (0..m).map(|l| self.g[(vert, l)] * rv_at(l, h, z)).sum::<f64>()
        };
        for i in 0..m {
            for j in 0..m {
                let w_hv: Vec<f64> = (0..m).map(|z| pair(i, j, z)).collect();
                let w_vh: Vec<f64> = (0..m).map(|z| pair(j, i, z)).collect();
                for k in 0..m {
                    let s1: f64 = (0..m).map(|z| ginv[(k, z)] * w_hv[z]).sum();
                    let s2: f64 = (0..m).map(|z| ginv[(k, z)] * w_vh[z]).sum();
                    a[at(k, i, m + j)] = s1;
                    a[at(k, m + i, j)] = s2;
                }
            }
        }
        // τ(X,Y,Z) = ½(T(Y,X,Z) − T(Z,X,Y) + T(Y,Z,X)) on horizontal slots
        let low = crate::base_manifold::lower_torsion(&self.torsion, &self.g);
        let t = |p: usize, q: usize, r: usize| low[(p * m + q) * m + r];
        for i in 0..m {
            for j in 0..m {
                let tz: Vec<f64> = (0..m).map(|z| 0.5 * (t(j, i, z) - t(z, i, j) + t(j, z, i))).collect();
                for k in 0..m {
                    tau[at(k, i, j)] = (0..m).map(|z| ginv[(k, z)] * tz[z]).sum();
                }
            }
        }
        FrameTerms { d_star, curvature: curv, a, tau }
    }

    /// Coordinate coefficients `Γ̃^c_{ab}` of the connection with frame
    /// coefficients `frame`:
    /// `Γ̃^c_{ab} = (P⁻¹)^c_γ [∂_a P^γ_b + P^α_a P^β_b C^γ_{αβ}]`.
    pub fn to_coordinates(&self, frame: &[f64]) -> Vec<f64> {
        let n = 2 * self.m;
        let p = self.p.values();
        let pinv = self.p_inv.values();
        // stage 1: D^γ_{αb} = C^γ_{αβ} P^β_b
        let mut d1 = vec![0.0; n * n * n];
        for c in 0..n {
            for al in 0..n {
                for b in 0..n {
                    let mut s = 0.0;
                    for be in 0..n {
                        let cf = frame[(c * n + al) * n + be];
                        if cf != 0.0 {
                            s += cf * p[(be, b)];
                        }
                    }
                    d1[(c * n + al) * n + b] = s;
                }
            }
        }
        // stage 2: add P^α_a and the derivative term
        let mut d2 = vec![0.0; n * n * n];
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let mut s = self.p.get(c, b).d(a);
                    for al in 0..n {
                        s += p[(al, a)] * d1[(c * n + al) * n + b];
                    }
                    d2[(c * n + a) * n + b] = s;
                }
            }
        }
        let mut out = vec![0.0; n * n * n];
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    out[(c * n + a) * n + b] = (0..n).map(|g| pinv[(c, g)] * d2[(g * n + a) * n + b]).sum();
                }
            }
        }
        out
    }

    /// Levi-Civita connection of `G` from the frame formula.
    pub fn levi_civita(&self) -> Vec<f64> {
        self.to_coordinates(&self.frame_terms().total())
    }

    /// Pull-back connection `D*` in coordinates.
    pub fn d_star(&self) -> Vec<f64> {
        self.to_coordinates(&self.frame_terms().d_star)
    }

    /// Levi-Civita connection of `G` by the Christoffel formula.
    pub fn levi_civita_oracle(&self) -> Vec<f64> {
        christoffel(&self.big_g).iter().map(Jet::value).collect()
    }

    /// Max of `|∂_a G_{bc} − Γ̃^d_{ab} G_{dc} − Γ̃^d_{ac} G_{bd}|`.
    pub fn metric_residual(&self, gamma: &[f64]) -> f64 {
        let n = 2 * self.m;
        let gv = self.big_g.values();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut r = self.big_g.get(b, c).d(a);
                    for d in 0..n {
                        r -= gamma[(d * n + a) * n + b] * gv[(d, c)] + gamma[(d * n + a) * n + c] * gv[(b, d)];
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }

    pub fn torsion_residual(&self, gamma: &[f64]) -> f64 {
        let n = 2 * self.m;
        let mut worst: f64 = 0.0;
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    worst = worst.max((gamma[(c * n + a) * n + b] - gamma[(c * n + b) * n + a]).abs());
                }
            }
        }
        worst
    }

    /// `[E_i, E_j]` in frame components minus `−R(e_i, e_j)v` on `V`; the
    /// horizontal part must vanish.
    pub fn horizontal_bracket_residual(&self) -> f64 {
        let m = self.m;
        let n = 2 * m;
        // E_i in coordinates: x-part e_i, v-part −N^k_i
        let comp = |i: usize, c: usize| -> Jet {
            if c < m {
                Jet::constant((c == i) as u8 as f64, n, 1)
            } else {
                self.n_jet[(c - m) * m + i].scale(-1.0)
            }
        };
        let rv = self.curvature_on_v();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let ei: Vec<Jet> = (0..n).map(|c| comp(i, c)).collect();
                let ej: Vec<Jet> = (0..n).map(|c| comp(j, c)).collect();
                let bracket: Vec<f64> = (0..n)
                    .map(|c| (0..n).map(|a| ei[a].value() * ej[c].d(a) - ej[a].value() * ei[c].d(a)).sum())
                    .collect();
                let nm = self.nonlinear_connection();
                for c in 0..m {
                    worst = worst.max(bracket[c].abs());
                    // frame vertical component f^F = c^v + N c^x
                    let fv = bracket[m + c] + (0..m).map(|a| nm[(c, a)] * bracket[a]).sum::<f64>();
                    worst = worst.max((fv + rv[(c * m + i) * m + j]).abs());
                }
            }
        }
        worst
    }

    /// Largest `|D*_{E_i} ξ|` (coordinate components).
    pub fn xi_horizontal_residual(&self) -> f64 {
        let m = self.m;
        let n = 2 * m;
        let ds = self.d_star();
        let xi: Vec<f64> = canonical_xi(&self.point).to_coords();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            let x = self.horizontal_lift(&(0..m).map(|r| (r == i) as u8 as f64).collect::<Vec<_>>()).to_coords();
            for c in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    let dxi = if c >= m && a == c { 1.0 } else { 0.0 };
                    let mut t = dxi;
                    for b in 0..n {
                        t += ds[(c * n + a) * n + b] * xi[b];
                    }
                    s += x[a] * t;
                }
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    /// Largest frame component of `τ`.
    pub fn tau_norm(&self) -> f64 {
        self.frame_terms().tau.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Largest component of `A` on equal-type pairs and of `τ` with a
    /// vertical slot; both vanish identically.
    pub fn term_support_residual(&self) -> f64 {
        let m = self.m;
        let n = 2 * m;
        let ft = self.frame_terms();
        let mut worst: f64 = 0.0;
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let idx = (c * n + a) * n + b;
                    if (a < m) == (b < m) {
                        worst = worst.max(ft.a[idx].abs());
                    }
                    if a >= m || b >= m || c >= m {
                        worst = worst.max(ft.tau[idx].abs());
                    }
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::{parse, Expr};

    fn exprs(src: &[&str]) -> Vec<Expr> {
        src.iter().map(|s| parse(s).unwrap()).collect()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |w, (x, y)| w.max((x - y).abs()))
    }

    #[test]
    fn flat_plane_gives_flat_connection() {
        let mfd = ChartManifold::new(vec![(-1.0, 1.0); 2], exprs(&["1", "0", "0", "1"])).unwrap();
        let p = TMPoint { x: vec![0.1, 0.2], v: vec![0.7, -0.3] };
        let tm = TmGeometry::new(&mfd, ConnectionMode::LeviCivita, &p).unwrap();
        assert!(tm.levi_civita().iter().all(|g| *g == 0.0));
        assert!(tm.levi_civita_oracle().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn sphere_formula_matches_oracle() {
        let mfd = ChartManifold::new(vec![(0.5, 2.6), (0.0, 6.2)], exprs(&["1", "0", "0", "sin(x1)^2"])).unwrap();
        let p = TMPoint { x: vec![1.1, 0.4], v: vec![0.6, -1.3] };
        let tm = TmGeometry::new(&mfd, ConnectionMode::LeviCivita, &p).unwrap();
        let f = tm.levi_civita();
        assert!(max_diff(&f, &tm.levi_civita_oracle()) < 1e-12);
        assert!(tm.metric_residual(&f) < 1e-12);
        assert!(tm.torsion_residual(&f) < 1e-12);
        assert!(tm.horizontal_bracket_residual() < 1e-12);
        assert!(tm.xi_horizontal_residual() < 1e-14);
        assert!(tm.term_support_residual() == 0.0);
    }

    #[test]
    fn zero_section_metric_is_block_diagonal() {
        let mfd = ChartManifold::new(vec![(-1.0, 1.0), (0.5, 2.0)], exprs(&["1/x2^2", "0", "0", "1/x2^2"])).unwrap();
        let p = TMPoint { x: vec![0.3, 1.2], v: vec![0.0, 0.0] };
        let tm = TmGeometry::new(&mfd, ConnectionMode::LeviCivita, &p).unwrap();
        let g = tm.metric();
        for r in 0..4 {
            for c in 0..4 {
                if (r < 2) != (c < 2) {
                    assert_eq!(g[(r, c)], 0.0);
                }
            }
        }
    }

    #[test]
    fn torsioned_formula_matches_oracle() {
        // conformally flat R³ with a non-constant torsion
        let g = exprs(&["exp(x3)", "0", "0", "0", "exp(x3)", "0", "0", "0", "exp(x3)"]);
        let mut t = vec![Expr::num(0.0); 27];
        t[idx3(3, 2, 0, 1)] = parse("x1 + 0.5").unwrap();
        t[idx3(3, 2, 1, 0)] = parse("-(x1 + 0.5)").unwrap();
        t[idx3(3, 0, 1, 2)] = parse("sin(x2)").unwrap();
        t[idx3(3, 0, 2, 1)] = parse("-sin(x2)").unwrap();
        let mfd = ChartManifold::new(vec![(-1.0, 1.0); 3], g).unwrap().with_torsion(t).unwrap();
        let p = TMPoint { x: vec![0.2, -0.4, 0.3], v: vec![0.5, 1.1, -0.8] };
        let tm = TmGeometry::new(&mfd, ConnectionMode::Torsioned, &p).unwrap();
        let f = tm.levi_civita();
        assert!(max_diff(&f, &tm.levi_civita_oracle()) < 1e-11, "{}", max_diff(&f, &tm.levi_civita_oracle()));
        assert!(tm.tau_norm() > 1e-3);
        assert!(tm.horizontal_bracket_residual() < 1e-12);
    }
}
