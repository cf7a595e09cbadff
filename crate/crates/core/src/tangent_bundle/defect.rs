//! How far a triple of structures on `TM` is from being quaternion-Kähler.
//!
//! With `⟨A, B⟩ = tr(G⁻¹AᵀGB)/n` the triple is orthonormal. Writing
//! `∇q_j = Σ_i α_ij q_i + L_j` with `L_j ⊥ span(q)`, the Kraines form of a
//! torsion-free metric connection satisfies `dΩ = 2 Σ_j ω_j ∧ λ_j`, where
//! `λ_j(X,Y,Z)` is the cyclic sum of `G(L_j(X)Y, Z)`.

use nalgebra::DMatrix;

use super::TmGeometry;
use crate::error::{GeomError, Result};
use crate::forms::{values, wedge, AltForm};
use crate::jet::JetMatrix;

#[derive(Clone, Debug)]
pub struct QkDefect {
    /// Largest `|L_j(∂_a)|` entry.
    pub l_norm: f64,
    /// Largest `|α_ij + α_ji|`; vanishes for a metric connection.
    pub alpha_skew: f64,
    /// Largest component of `dΩ`.
    pub d_kraines: f64,
    /// Least-squares `c` in `dΩ ≈ c Σ ω_j ∧ λ_j`; `None` when the right side
    /// vanishes.
    pub fit_constant: Option<f64>,
    /// Largest component of `dΩ − c Σ ω_j ∧ λ_j` at the fitted `c`.
    pub fit_residual: f64,
    /// Largest component of `dΩ − 2 Σ ω_j ∧ λ_j`.
    pub identity_residual: f64,
}

impl TmGeometry {
    /// Defect of `triple` with respect to the connection `gamma`.
    pub fn qk_defect(&self, triple: &[JetMatrix; 3], gamma: &[f64]) -> Result<QkDefect> {
        let n = self.dim();
        let g = self.metric();
        let ginv = g.clone().try_inverse().ok_or(GeomError::Precondition("singular metric on TM".into()))?;
        let q: Vec<DMatrix<f64>> = triple.iter().map(JetMatrix::values).collect();
        let inner = |a: &DMatrix<f64>, b: &DMatrix<f64>| (&ginv * a.transpose() * &g * b).trace() / n as f64;
        let dq: Vec<Vec<DMatrix<f64>>> = triple.iter().map(|s| self.covariant_endo(s, gamma)).collect();
        let mut l: Vec<Vec<DMatrix<f64>>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
        let mut l_norm: f64 = 0.0;
        let mut alpha_skew: f64 = 0.0;
        for a in 0..n {
            let mut alpha = [[0.0; 3]; 3];
            for j in 0..3 {
                for i in 0..3 {
                    alpha[i][j] = inner(&dq[j][a], &q[i]);
                }
            }
            for j in 0..3 {
                let mut lj = dq[j][a].clone();
                for i in 0..3 {
                    lj -= &q[i] * alpha[i][j];
                    alpha_skew = alpha_skew.max((alpha[i][j] + alpha[j][i]).abs());
                }
                l_norm = l_norm.max(lj.amax());
                l[j].push(&g * lj);
            }
        }
        let mut rhs = AltForm::zeros(n, 5);
        for j in 0..3 {
            let gl = &l[j];
            let lambda = AltForm::from_fn(n, 3, |t| {
                let (a, b, c) = (t[0], t[1], t[2]);
                gl[a][(c, b)] + gl[b][(a, c)] + gl[c][(b, a)]
            });
            let omega = values(&self.two_form(&triple[j]));
            rhs = rhs.add(&wedge(&omega, &lambda));
        }
        let dk = self.d_kraines(triple);
        let norm = rhs.dot(&rhs);
        let fit_constant = (norm > 1e-24).then(|| dk.dot(&rhs) / norm);
        let fit_residual = dk.sub(&rhs.scaled(fit_constant.unwrap_or(0.0))).max_abs();
        let identity_residual = dk.sub(&rhs.scaled(2.0)).max_abs();
        Ok(QkDefect { l_norm, alpha_skew, d_kraines: dk.max_abs(), fit_constant, fit_residual, identity_residual })
    }
}
