//! The connection `D = ∇ + ¼(A_I + A_J + A_K)`, `A_E = (∇E)E`, which
//! parallelizes a pointwise quaternionic triple while staying metric.

use nalgebra::DMatrix;

use crate::base_manifold::{
    base_connection, complex_structure_residual, covariant_endo, endo_parallel_residual, metric_residual,
    parallelizing_shift, ChartManifold, ConnectionCoeffs, ConnectionMode, STRUCTURE_TOL,
};
use crate::error::{GeomError, Result};
use crate::jet::JetMatrix;

/// `A_E(X) = (∇_X E)E` together with the two identities it satisfies.
#[derive(Clone, Debug)]
pub struct EndoShift {
    pub a: DMatrix<f64>,
    /// `|[A_E, E] + 2∇_X E|`.
    pub commutator_residual: f64,
    /// `|gA + (gA)ᵀ|`.
    pub skew_residual: f64,
}

/// `A_E` along `direction`. `e` needs one derivative order more than `conn`
/// carries, so that `∇E` is available at the point.
pub fn a_of_endo(conn: &ConnectionCoeffs, e: &JetMatrix, g: &DMatrix<f64>, direction: &[f64]) -> Result<EndoShift> {
    let m = conn.dim();
    if direction.len() != m {
        return Err(GeomError::Dimension { expected: m, got: direction.len() });
    }
    let ev = e.values();
    let residual = complex_structure_residual(&ev, g);
    if residual > STRUCTURE_TOL {
        return Err(GeomError::InvalidComplexStructure { which: "E".into(), point: vec![], residual });
    }
    let de = covariant_endo(conn, e);
    let mut dx = DMatrix::zeros(m, m);
    for (i, d) in de.iter().enumerate() {
        dx += d.values() * direction[i];
    }
    let a = &dx * &ev;
    let commutator_residual = (&a * &ev - &ev * &a + &dx * 2.0).amax();
    let ga = g * &a;
    let skew_residual = (&ga + ga.transpose()).amax();
    Ok(EndoShift { a, commutator_residual, skew_residual })
}

/// The triple-parallelizing connection built from `input`.
pub fn obata_connection(input: &ConnectionCoeffs, triple: &[JetMatrix; 3]) -> ConnectionCoeffs {
    parallelizing_shift(input, triple, 0.25)
}

/// Residuals of the construction at one base point.
#[derive(Clone, Debug)]
pub struct ObataReport {
    /// `|DI|, |DJ|, |DK|` for the shifted connection.
    pub parallel: [f64; 3],
    /// `|∇I|, |∇J|, |∇K|` for the input connection.
    pub input_parallel: [f64; 3],
    pub metric: f64,
    /// Largest entry of the torsion of `D`.
    pub torsion: f64,
}

/// Builds `D` from the `input` connection of `mfd` at `x` and measures it.
pub fn obata_check(mfd: &ChartManifold, input: ConnectionMode, x: &[f64]) -> Result<ObataReport> {
    if input == ConnectionMode::Obata {
        return Err(GeomError::Precondition("input connection must not already be the shifted one".into()));
    }
    let conn = base_connection(mfd, input, x)?;
    let t = mfd.triple_jets(x, 2)?.ok_or(GeomError::MissingTriple("obata connection"))?;
    let d = obata_connection(&conn, &t);
    let g = mfd.metric_jet(x, 1)?;
    let parallel = [0, 1, 2].map(|n| endo_parallel_residual(&d, &t[n]));
    let input_parallel = [0, 1, 2].map(|n| endo_parallel_residual(&conn, &t[n]));
    let torsion = crate::base_manifold::torsion(&d).iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    Ok(ObataReport { parallel, input_parallel, metric: metric_residual(&d, &g), torsion })
}
