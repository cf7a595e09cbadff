//! Almost complex structures on `TM` built from the splitting, their
//! Nijenhuis tensors, fundamental 2-forms and covariant derivatives.

use nalgebra::DMatrix;

use super::TmGeometry;
use crate::error::{GeomError, Result};
use crate::forms::{exterior_derivative, wedge_jet, AltForm};
use crate::jet::{Jet, JetMatrix};

/// Frame blocks (on `H ⊕ V`):
/// - `I  = [[0, Id], [−Id, 0]]`
/// - `J± = diag(𝒥, ±𝒥)`
/// - `K  = I J⁻ = [[0, −𝒥], [−𝒥, 0]]`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StructureKind {
    I,
    JPlus,
    JMinus,
    K,
}

impl StructureKind {
    pub const ALL: [StructureKind; 4] = [StructureKind::I, StructureKind::JPlus, StructureKind::JMinus, StructureKind::K];

    pub fn name(self) -> &'static str {
        match self {
            StructureKind::I => "I",
            StructureKind::JPlus => "J+",
            StructureKind::JMinus => "J-",
            StructureKind::K => "K",
        }
    }
}

/// An orthonormal pair `(a, b)` in `R⁴` selecting the family triple
/// `(I_a, I_b, I_a I_b)` with `I_x = x₀ I + Σ_k x_k diag(𝒥_k, −𝒥_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StiefelPair {
    pub a: [f64; 4],
    pub b: [f64; 4],
}

impl StiefelPair {
    /// Largest deviation from orthonormality.
    pub fn residual(&self) -> f64 {
        let dot = |u: &[f64; 4], w: &[f64; 4]| u.iter().zip(w).map(|(p, q)| p * q).sum::<f64>();
        (dot(&self.a, &self.a) - 1.0)
            .abs()
            .max((dot(&self.b, &self.b) - 1.0).abs())
            .max(dot(&self.a, &self.b).abs())
    }

    /// Gram-Schmidt on two generic vectors.
    pub fn orthonormalize(a: [f64; 4], b: [f64; 4]) -> Option<Self> {
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na < 1e-12 {
            return None;
        }
        let a = a.map(|x| x / na);
        let d: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
        let mut b2 = [0.0; 4];
        for i in 0..4 {
            b2[i] = b[i] - d * a[i];
        }
        let nb = b2.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nb < 1e-12 {
            return None;
        }
        Some(StiefelPair { a, b: b2.map(|x| x / nb) })
    }
}

impl TmGeometry {
    fn zero_jet(&self) -> Jet {
        Jet::constant(0.0, self.dim(), 1)
    }

    fn block(&self, f: impl Fn(usize, usize, usize, usize) -> Jet) -> JetMatrix {
        let m = self.m;
        JetMatrix::from_fn(2 * m, |r, c| f(r / m, c / m, r % m, c % m))
    }

    fn acs_frame(&self, what: &'static str) -> Result<&JetMatrix> {
        self.acs.as_ref().ok_or(GeomError::MissingAcs(what))
    }

    fn triple_frame(&self, what: &'static str) -> Result<&[JetMatrix; 3]> {
        self.triple.as_ref().ok_or(GeomError::MissingTriple(what))
    }

    /// Frame matrix of `kind`.
    pub fn frame_structure(&self, kind: StructureKind) -> Result<JetMatrix> {
        let z = self.zero_jet();
        let id = |i: usize, j: usize, s: f64| Jet::constant(if i == j { s } else { 0.0 }, self.dim(), 1);
        Ok(match kind {
            StructureKind::I => self.block(|br, bc, i, j| match (br, bc) {
                (0, 1) => id(i, j, 1.0),
                (1, 0) => id(i, j, -1.0),
                _ => z.clone(),
            }),
            StructureKind::JPlus | StructureKind::JMinus => {
                let j = self.acs_frame("J± structure")?;
                let s = if kind == StructureKind::JPlus { 1.0 } else { -1.0 };
                self.block(|br, bc, a, b| match (br, bc) {
                    (0, 0) => j.get(a, b).clone(),
                    (1, 1) => j.get(a, b).scale(s),
                    _ => z.clone(),
                })
            }
            StructureKind::K => {
                let j = self.acs_frame("K structure")?;
                self.block(|br, bc, a, b| if br != bc { j.get(a, b).scale(-1.0) } else { z.clone() })
            }
        })
    }

    pub fn frame_to_coords(&self, s: &JetMatrix) -> JetMatrix {
        self.p_inv.matmul(s).matmul(&self.p)
    }

    /// Coordinate matrix of `kind`, as first-order jets on `TM`.
    pub fn structure(&self, kind: StructureKind) -> Result<JetMatrix> {
        Ok(self.frame_to_coords(&self.frame_structure(kind)?))
    }

    /// `(I, J⁻, K)`.
    pub fn qk_triple(&self) -> Result<[JetMatrix; 3]> {
        Ok([self.structure(StructureKind::I)?, self.structure(StructureKind::JMinus)?, self.structure(StructureKind::K)?])
    }

    /// `I_x` for `x ∈ S³ ⊂ R⁴`, in coordinates.
    pub fn family_member(&self, x: &[f64; 4]) -> Result<JetMatrix> {
        let t = self.triple_frame("structure family")?;
        let i = self.frame_structure(StructureKind::I)?;
        let s = self.block(|br, bc, a, b| {
            let mut acc = i.get(br * self.m + a, bc * self.m + b).scale(x[0]);
            if br == bc {
                let sign = if br == 0 { 1.0 } else { -1.0 };
                for k in 0..3 {
                    acc.add_scaled(sign * x[k + 1], t[k].get(a, b));
                }
            }
            acc
        });
        Ok(self.frame_to_coords(&s))
    }

    pub fn family_triple(&self, pair: &StiefelPair) -> Result<[JetMatrix; 3]> {
        let a = self.family_member(&pair.a)?;
        let b = self.family_member(&pair.b)?;
        let c = a.matmul(&b);
        Ok([a, b, c])
    }

    /// Largest entry of `|S² + Id|` and `|SᵀGS − G|`.
    pub fn algebra_residual(&self, s: &JetMatrix) -> f64 {
        crate::base_manifold::complex_structure_residual(&s.values(), &self.metric())
    }

    /// Algebra residual of each member plus `|S₁S₂ − S₃|` and `|S₂S₁ + S₃|`.
    pub fn triple_residual(&self, t: &[JetMatrix; 3]) -> f64 {
        let v: Vec<DMatrix<f64>> = t.iter().map(JetMatrix::values).collect();
        let own = t.iter().map(|s| self.algebra_residual(s)).fold(0.0, f64::max);
        own.max((&v[0] * &v[1] - &v[2]).amax()).max((&v[1] * &v[0] + &v[2]).amax())
    }

    /// Coordinate matrix of `θ`: `E_i ↦ F_i`, `F_i ↦ 0`.
    pub fn theta(&self) -> DMatrix<f64> {
        let m = self.m;
        let frame = DMatrix::from_fn(2 * m, 2 * m, |r, c| if r >= m && c < m && r - m == c { 1.0 } else { 0.0 });
        self.p_inv.values() * frame * self.p.values()
    }

    /// `θ² = 0`, `θθᵗ + θᵗθ = Id` and `I = θᵗ − θ`, where `θᵗ` is the
    /// `G`-adjoint of `θ`.
    pub fn splitting_residual(&self) -> Result<f64> {
        let n = self.dim();
        let g = self.metric();
        let ginv = g.clone().try_inverse().ok_or(GeomError::Precondition("singular metric on TM".into()))?;
        let th = self.theta();
        let tht = &ginv * th.transpose() * &g;
        let i = self.structure(StructureKind::I)?.values();
        let r1 = (&th * &th).amax();
        let r2 = (&th * &tht + &tht * &th - DMatrix::identity(n, n)).amax();
        let r3 = (i - (&tht - &th)).amax();
        Ok(r1.max(r2).max(r3))
    }

    /// Largest component of the Nijenhuis tensor
    /// `N^e_{ab} = S^c_a ∂_c S^e_b − S^c_b ∂_c S^e_a + S^e_d (∂_b S^d_a − ∂_a S^d_b)`.
    pub fn nijenhuis(&self, s: &JetMatrix) -> f64 {
        let n = self.dim();
        let sv = s.values();
        let mut worst: f64 = 0.0;
        for e in 0..n {
            for a in 0..n {
                for b in (a + 1)..n {
                    let mut acc = 0.0;
                    for c in 0..n {
                        acc += sv[(c, a)] * s.get(e, b).d(c) - sv[(c, b)] * s.get(e, a).d(c);
                        acc += sv[(e, c)] * (s.get(c, a).d(b) - s.get(c, b).d(a));
                    }
                    worst = worst.max(acc.abs());
                }
            }
        }
        worst
    }

    /// `ω(X, Y) = G(S X, Y)`, i.e. `ω_{ab} = S^c_a G_{cb}`.
    pub fn two_form(&self, s: &JetMatrix) -> AltForm<Jet> {
        let w = s.transpose().matmul(&self.big_g);
        AltForm::from_fn(self.dim(), 2, |t| w.get(t[0], t[1]).clone())
    }

    pub fn d_two_form(&self, s: &JetMatrix) -> AltForm {
        exterior_derivative(&self.two_form(s))
    }

    /// Unnormalized Kraines form `Σ ω_i ∧ ω_i`.
    pub fn kraines_form(&self, t: &[JetMatrix; 3]) -> AltForm<Jet> {
        let forms: Vec<AltForm<Jet>> = t.iter().map(|s| self.two_form(s)).collect();
        let mut out = wedge_jet(&forms[0], &forms[0]);
        for f in &forms[1..] {
            let w = wedge_jet(f, f);
            out = AltForm::from_fn(out.dim(), 4, |idx| out.sorted(idx) + w.sorted(idx));
        }
        out
    }

    pub fn d_kraines(&self, t: &[JetMatrix; 3]) -> AltForm {
        exterior_derivative(&self.kraines_form(t))
    }

    /// `(∇_a S)^c_b = ∂_a S^c_b + Γ̃^c_{ad} S^d_b − Γ̃^d_{ab} S^c_d`, one
    /// matrix per coordinate direction `a`.
    pub fn covariant_endo(&self, s: &JetMatrix, gamma: &[f64]) -> Vec<DMatrix<f64>> {
        let n = self.dim();
        let sv = s.values();
        (0..n)
            .map(|a| {
                DMatrix::from_fn(n, n, |c, b| {
                    let mut acc = s.get(c, b).d(a);
                    for d in 0..n {
                        acc += gamma[(c * n + a) * n + d] * sv[(d, b)] - gamma[(d * n + a) * n + b] * sv[(c, d)];
                    }
                    acc
                })
            })
            .collect()
    }

    pub fn parallel_residual(&self, s: &JetMatrix, gamma: &[f64]) -> f64 {
        self.covariant_endo(s, gamma).iter().map(DMatrix::amax).fold(0.0, f64::max)
    }
}
