//! Tensor calculus on a single chart of the base manifold.
//!
//! Index conventions, fixed once for the whole crate:
//! - `Γ^k_{ij}` is stored at `(k*m + i)*m + j` and means `D_{∂i} ∂j = Γ^k_{ij} ∂k`
//!   (the first lower index is the differentiation direction).
//! - `T^k_{ij} = Γ^k_{ij} − Γ^k_{ji}`, stored like `Γ`.
//! - `R^l_{kij}` is stored at `((l*m + k)*m + i)*m + j` and means
//!   `R(∂i, ∂j) ∂k = R^l_{kij} ∂l` with `R(X,Y) = D_X D_Y − D_Y D_X − D_{[X,Y]}`.
//! - Endomorphisms are matrices acting on column vectors: `𝒥^i_j` is row `i`,
//!   column `j`.

mod connection;
mod torsion;

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::exprlang::{eval_jet, Expr};
use crate::jet::{Jet, JetMatrix};

pub use connection::{
    base_connection, christoffel, contorsion, covariant_endo, curvature, endo_parallel_residual,
    first_bianchi_residual, levi_civita, lowered_curvature, metric_connection, metric_residual,
    parallelizing_shift, torsion, torsion_jets, ConnectionCoeffs, ConnectionMode,
};
pub use torsion::{
    curvature_holo_components, lower_torsion, torsion_decompose, torsion_inner, torsion_j_type,
    HoloBlocks, TorsionParts, TorsionType,
};

#[inline]
pub fn idx3(m: usize, k: usize, i: usize, j: usize) -> usize {
    (k * m + i) * m + j
}

#[inline]
pub fn idx4(m: usize, l: usize, k: usize, i: usize, j: usize) -> usize {
    ((l * m + k) * m + i) * m + j
}

/// Tolerances used by [`ChartManifold::validate_at`].
pub const TORSION_ANTISYMMETRY_TOL: f64 = 1e-10;
pub const STRUCTURE_TOL: f64 = 1e-8;

/// Metric, optional torsion and optional almost complex data on one chart.
#[derive(Clone, Debug)]
pub struct ChartManifold {
    dim: usize,
    bounds: Vec<(f64, f64)>,
    metric: Vec<Expr>,
    torsion: Option<Vec<Expr>>,
    acs: Option<Vec<Expr>>,
    triple: Option<[Vec<Expr>; 3]>,
}

fn eval_matrix(exprs: &[Expr], what: &str, n: usize, x: &[f64], order: u8) -> Result<JetMatrix> {
    let mut err = None;
    let m = JetMatrix::from_fn(n, |i, j| match eval_jet(&exprs[i * n + j], x, order) {
        Ok(v) => v,
        Err(source) => {
            err.get_or_insert(GeomError::Eval {
                what: format!("{what}_{}_{}", i + 1, j + 1),
                point: x.to_vec(),
                source,
            });
            Jet::constant(0.0, x.len(), order)
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(m),
    }
}

/// Largest entry of `|A² + Id|` and `|AᵀgA − g|`.
pub fn complex_structure_residual(a: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let sq = a * a + DMatrix::identity(n, n);
    let orth = a.transpose() * g * a - g;
    sq.amax().max(orth.amax())
}

impl ChartManifold {
    /// `metric` holds `g_ij` row-major (`m*m` entries).
    pub fn new(bounds: Vec<(f64, f64)>, metric: Vec<Expr>) -> Result<Self> {
        let dim = bounds.len();
        if metric.len() != dim * dim {
            return Err(GeomError::Dimension { expected: dim * dim, got: metric.len() });
        }
        Ok(ChartManifold { dim, bounds, metric, torsion: None, acs: None, triple: None })
    }

    /// `t` holds `T^k_{ij}` at `(k*m + i)*m + j`.
    pub fn with_torsion(mut self, t: Vec<Expr>) -> Result<Self> {
        let m = self.dim;
        if t.len() != m * m * m {
            return Err(GeomError::Dimension { expected: m * m * m, got: t.len() });
        }
        self.torsion = Some(t);
        Ok(self)
    }

    pub fn with_acs(mut self, j: Vec<Expr>) -> Result<Self> {
        if j.len() != self.dim * self.dim {
            return Err(GeomError::Dimension { expected: self.dim * self.dim, got: j.len() });
        }
        self.acs = Some(j);
        Ok(self)
    }

    pub fn with_triple(mut self, t: [Vec<Expr>; 3]) -> Result<Self> {
        for j in &t {
            if j.len() != self.dim * self.dim {
                return Err(GeomError::Dimension { expected: self.dim * self.dim, got: j.len() });
            }
        }
        self.triple = Some(t);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn metric_exprs(&self) -> &[Expr] {
        &self.metric
    }

    pub fn torsion_exprs(&self) -> Option<&[Expr]> {
        self.torsion.as_deref()
    }

    pub fn acs_exprs(&self) -> Option<&[Expr]> {
        self.acs.as_deref()
    }

    pub fn triple_exprs(&self) -> Option<&[Vec<Expr>; 3]> {
        self.triple.as_ref()
    }

    pub fn has_torsion(&self) -> bool {
        self.torsion.as_ref().is_some_and(|t| t.iter().any(|e| !e.is_zero_literal()))
    }

    pub fn has_acs(&self) -> bool {
        self.acs.is_some()
    }

    pub fn has_triple(&self) -> bool {
        self.triple.is_some()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && x.iter().zip(&self.bounds).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn metric_jet(&self, x: &[f64], order: u8) -> Result<JetMatrix> {
        eval_matrix(&self.metric, "g", self.dim, x, order)
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.metric_jet(x, 0)?.values())
    }

    /// Torsion components as jets, or `None` when no torsion is declared.
    pub fn torsion_jets(&self, x: &[f64], order: u8) -> Result<Option<Vec<Jet>>> {
        let Some(t) = &self.torsion else { return Ok(None) };
        let m = self.dim;
        let mut out = Vec::with_capacity(t.len());
        for (n, e) in t.iter().enumerate() {
            let j = eval_jet(e, x, order).map_err(|source| GeomError::Eval {
                what: format!("T_{}_{}_{}", n / (m * m) + 1, (n / m) % m + 1, n % m + 1),
                point: x.to_vec(),
                source,
            })?;
            out.push(j);
        }
        Ok(Some(out))
    }

    pub fn acs_jet(&self, x: &[f64], order: u8) -> Result<Option<JetMatrix>> {
        self.acs.as_ref().map(|j| eval_matrix(j, "J", self.dim, x, order)).transpose()
    }

    pub fn triple_jets(&self, x: &[f64], order: u8) -> Result<Option<[JetMatrix; 3]>> {
        let Some([a, b, c]) = &self.triple else { return Ok(None) };
        Ok(Some([
            eval_matrix(a, "J1", self.dim, x, order)?,
            eval_matrix(b, "J2", self.dim, x, order)?,
            eval_matrix(c, "J3", self.dim, x, order)?,
        ]))
    }

    /// Checks the pointwise structural invariants at `x`.
    pub fn validate_at(&self, x: &[f64]) -> Result<()> {
        let m = self.dim;
        let g = self.metric_at(x)?;
        let sym = (&g - g.transpose()).amax();
        if sym > 1e-12 || g.clone().cholesky().is_none() {
            return Err(GeomError::NotPositiveDefinite { point: x.to_vec() });
        }
        if let Some(t) = self.torsion_jets(x, 0)? {
            let mut residual: f64 = 0.0;
            for k in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        residual = residual.max((t[idx3(m, k, i, j)].value() + t[idx3(m, k, j, i)].value()).abs());
                    }
                }
            }
            if residual > TORSION_ANTISYMMETRY_TOL {
                return Err(GeomError::TorsionNotAntisymmetric { point: x.to_vec(), residual });
            }
        }
        if let Some(j) = self.acs_jet(x, 0)? {
            let residual = complex_structure_residual(&j.values(), &g);
            if residual > STRUCTURE_TOL {
                return Err(GeomError::InvalidComplexStructure { which: "J".into(), point: x.to_vec(), residual });
            }
        }
        if let Some(t) = self.triple_jets(x, 0)? {
            let vals: Vec<DMatrix<f64>> = t.iter().map(|j| j.values()).collect();
            for (n, a) in vals.iter().enumerate() {
                let residual = complex_structure_residual(a, &g);
                if residual > STRUCTURE_TOL {
                    return Err(GeomError::InvalidComplexStructure {
                        which: format!("J{}", n + 1),
                        point: x.to_vec(),
                        residual,
                    });
                }
            }
            let residual = (&vals[0] * &vals[1] - &vals[2]).amax();
            if residual > STRUCTURE_TOL {
                return Err(GeomError::InvalidTriple { point: x.to_vec(), residual });
            }
        }
        Ok(())
    }
}
