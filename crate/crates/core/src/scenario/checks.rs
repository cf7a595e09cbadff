//! Registry of checks: identifiers, statements, default thresholds and the
//! per-point evaluation.

use crate::base_manifold::{
    endo_parallel_residual, torsion_decompose, torsion_inner, torsion_j_type, ChartManifold, ConnectionMode,
};
use crate::error::{GeomError, Result};
use crate::obata::obata_check;
use crate::surface2d::SurfacePoint;
use crate::tangent_bundle::{StiefelPair, StructureKind, TMPoint, TmGeometry};

macro_rules! checks {
    ($($variant:ident => $name:literal, $zero:expr, $nonzero:expr, $anchor:literal;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum CheckId { $($variant),* }

        impl CheckId {
            pub const ALL: &'static [CheckId] = &[$(CheckId::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(CheckId::$variant => $name),* }
            }

            /// The identity or property the residual measures.
            pub fn anchor(self) -> &'static str {
                match self { $(CheckId::$variant => $anchor),* }
            }

            /// Pass threshold when the residual is expected to vanish.
            pub fn zero_threshold(self) -> f64 {
                match self { $(CheckId::$variant => $zero),* }
            }

            /// Threshold the residual must exceed when declared nonzero.
            pub fn nonzero_threshold(self) -> f64 {
                match self { $(CheckId::$variant => $nonzero),* }
            }

            pub fn from_name(s: &str) -> Option<CheckId> {
                match s { $($name => Some(CheckId::$variant),)* _ => None }
            }
        }
    };
}

checks! {
    TmLcOracle => "tm_lc_oracle", 1e-6, 1e-4,
        "TM Levi-Civita: frame formula agrees with the Christoffel symbols of G";
    TmLcMetric => "tm_lc_metric", 1e-8, 1e-4, "TM Levi-Civita connection is metric";
    TmLcTorsion => "tm_lc_torsion", 1e-8, 1e-4, "TM Levi-Civita connection is torsion-free";
    Tau => "tau", 1e-10, 1e-6, "tau vanishes exactly when the base torsion does";
    HorizontalBracket => "horizontal_bracket", 1e-8, 1e-4, "[X^h, Y^h] = [X,Y]^h - R(X,Y)xi";
    StructuresAlgebra => "structures_algebra", 1e-9, 1e-4,
        "I, J+, J-, K are G-orthogonal complex structures; (I, J-, K) is a triple; theta splits TTM";
    DStarParallel => "d_star_parallel", 1e-10, 1e-4, "D* parallelizes xi along H, I, and J+-, K when DJ = 0";
    NijenhuisI => "nijenhuis_I", 1e-9, 1e-3, "I is integrable iff R = 0 and T = 0";
    NijenhuisJp => "nijenhuis_Jp", 1e-8, 1e-4, "Nijenhuis tensor of J+";
    NijenhuisJm => "nijenhuis_Jm", 1e-8, 1e-4, "Nijenhuis tensor of J-";
    NijenhuisK => "nijenhuis_K", 1e-8, 1e-4, "Nijenhuis tensor of K";
    DOmegaI => "d_omega_I", 1e-8, 1e-4, "omega_I is closed iff the base torsion vanishes";
    DOmegaJp => "d_omega_Jp", 1e-8, 1e-4, "omega_J+ is closed for admissible torsion";
    DOmegaJm => "d_omega_Jm", 1e-8, 1e-4, "omega_J- is closed for admissible torsion";
    DOmegaK => "d_omega_K", 1e-8, 1e-4, "omega_K is closed iff the base torsion vanishes";
    ParallelI => "parallel_I", 1e-8, 1e-3, "I is parallel for the TM Levi-Civita connection";
    TorsionJType => "torsion_j_type", 1e-10, 1e-4,
        "torsion has no skew part and T(X,Y,JZ) has vanishing cyclic sum";
    TorsionDecomposition => "torsion_decomposition", 1e-12, 1e-4,
        "skew, vectorial and remainder parts are orthogonal and resum to T";
    DKraines => "d_kraines", 1e-7, 1e-4, "Kraines form of (I, J-, K) is closed";
    QkDefect => "qk_defect", 1e-7, 1e-4, "covariant derivative of (I, J-, K) stays in the span of the triple";
    QkIdentity => "qk_identity", 1e-8, 1e-4, "d Omega = 2 sum omega_i ^ lambda_i";
    FamilyDKraines => "family_d_kraines", 1e-6, 1e-4, "Kraines form of the family triple (I_a, I_b, I_a I_b) is closed";
    ObataParallel => "obata_parallel", 1e-8, 1e-3, "D + (1/4) sum (DE)E parallelizes the triple";
    ObataMetric => "obata_metric", 1e-8, 1e-3, "the triple-parallel connection is metric";
    ObataInputParallel => "obata_input_parallel", 1e-8, 1e-3, "the triple is parallel for the input connection";
    SurfaceTable => "surface_table", 1e-7, 1e-4, "connection table of the frame (xi, eta, xi_h, eta_h)";
    SurfaceBracket => "surface_bracket", 1e-7, 1e-4, "[xi_h, eta_h] = -c^2 k eta - f1 xi_h - f2 eta_h";
    SurfaceKScale => "surface_k_scale", 1e-10, 1e-4, "k depends on the base point only";
    EinsteinDefect => "einstein_defect", 1e-5, 1e-3, "Ric of TM is proportional to G";
    EinsteinScalarEq => "einstein_scalar_eq", 1e-5, 1e-4,
        "c^2 eta_h(f1) - xi_h(f2) - c^2 f1^2 - f2^2 equals -f2^2";
}

/// Torsion below this size counts as absent for the nonzero side of `tau`.
pub const TAU_TORSION_FLOOR: f64 = 1e-3;

/// Inputs shared by all checks at one sample.
pub struct Sample {
    pub point: TMPoint,
    pub pair: StiefelPair,
}

/// Per-point residual. `None` marks a check that does not apply at the point.
pub type Outcome = std::result::Result<Option<f64>, String>;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |w, (x, y)| w.max((x - y).abs()))
}

/// Lazily built data shared by the checks at one point.
struct Ctx<'a> {
    mfd: &'a ChartManifold,
    mode: ConnectionMode,
    sample: &'a Sample,
    tm: Option<TmGeometry>,
    lc: Option<Vec<f64>>,
    surface: Option<SurfacePoint<'a>>,
}

impl<'a> Ctx<'a> {
    fn tm(&mut self) -> Result<&TmGeometry> {
        if self.tm.is_none() {
            self.tm = Some(TmGeometry::new(self.mfd, self.mode, &self.sample.point)?);
        }
        Ok(self.tm.as_ref().expect("just built"))
    }

    fn lc(&mut self) -> Result<Vec<f64>> {
        if self.lc.is_none() {
            let g = self.tm()?.levi_civita();
            self.lc = Some(g);
        }
        Ok(self.lc.clone().expect("just built"))
    }

    fn surface(&mut self) -> Result<&SurfacePoint<'a>> {
        if self.surface.is_none() {
            self.surface = Some(SurfacePoint::new(self.mfd, self.mode, &self.sample.point)?);
        }
        Ok(self.surface.as_ref().expect("just built"))
    }

    /// `D𝒥 = 0` for the base connection at this point.
    fn base_parallelizes_acs(&mut self) -> Result<bool> {
        let x = &self.sample.point.x;
        let j = match self.mfd.acs_jet(x, 2)? {
            Some(j) => j,
            None => match self.mfd.triple_jets(x, 2)? {
                Some([a, _, _]) => a,
                None => return Ok(false),
            },
        };
        Ok(endo_parallel_residual(self.tm()?.base_connection(), &j) < 1e-9)
    }

    fn structure(&mut self, kind: StructureKind) -> Result<crate::jet::JetMatrix> {
        self.tm()?.structure(kind)
    }

    fn eval(&mut self, id: CheckId, nonzero: bool) -> Result<Option<f64>> {
        use CheckId::*;
        let (mfd, sample) = (self.mfd, self.sample);
        let value = match id {
            TmLcOracle => {
                let tm = self.tm()?;
                max_diff(&tm.levi_civita(), &tm.levi_civita_oracle())
            }
            TmLcMetric => {
                let g = self.lc()?;
                self.tm()?.metric_residual(&g)
            }
            TmLcTorsion => {
                let g = self.lc()?;
                self.tm()?.torsion_residual(&g)
            }
            Tau => {
                let tm = self.tm()?;
                if nonzero && tm.torsion_norm() <= TAU_TORSION_FLOOR {
                    return Ok(None);
                }
                tm.tau_norm()
            }
            HorizontalBracket => self.tm()?.horizontal_bracket_residual(),
            StructuresAlgebra => {
                let tm = self.tm()?;
                let mut worst = tm.splitting_residual()?;
                worst = worst.max(tm.algebra_residual(&tm.structure(StructureKind::I)?));
                if mfd.has_acs() || mfd.has_triple() {
                    for k in [StructureKind::JPlus, StructureKind::JMinus, StructureKind::K] {
                        worst = worst.max(tm.algebra_residual(&tm.structure(k)?));
                    }
                    worst = worst.max(tm.triple_residual(&tm.qk_triple()?));
                }
                worst
            }
            DStarParallel => {
                let with_j = (mfd.has_acs() || mfd.has_triple()) && self.base_parallelizes_acs()?;
                let tm = self.tm()?;
                let ds = tm.d_star();
                let mut worst = tm.xi_horizontal_residual().max(tm.parallel_residual(&tm.structure(StructureKind::I)?, &ds));
                if with_j {
                    for k in [StructureKind::JPlus, StructureKind::JMinus, StructureKind::K] {
                        worst = worst.max(tm.parallel_residual(&tm.structure(k)?, &ds));
                    }
                }
                worst
            }
            NijenhuisI | NijenhuisJp | NijenhuisJm | NijenhuisK => {
                let kind = structure_of(id);
                let s = self.structure(kind)?;
                self.tm()?.nijenhuis(&s)
            }
            DOmegaI | DOmegaJp | DOmegaJm | DOmegaK => {
                let kind = structure_of(id);
                let s = self.structure(kind)?;
                self.tm()?.d_two_form(&s).max_abs()
            }
            ParallelI => {
                let g = self.lc()?;
                let s = self.structure(StructureKind::I)?;
                self.tm()?.parallel_residual(&s, &g)
            }
            TorsionJType => {
                let tm = self.tm()?;
                let x = &sample.point.x;
                let j = match mfd.acs_jet(x, 0)? {
                    Some(j) => j.values(),
                    None => mfd.triple_jets(x, 0)?.ok_or(GeomError::MissingAcs("torsion type"))?[0].values(),
                };
                let t = torsion_j_type(tm.base_torsion(), &j, tm.base_metric())?;
                t.skew3.max(t.cyclic_j)
            }
            TorsionDecomposition => {
                let tm = self.tm()?;
                let g = tm.base_metric();
                let ginv = g.clone().try_inverse().ok_or(GeomError::NotPositiveDefinite { point: vec![] })?;
                let parts = torsion_decompose(tm.base_torsion(), g)?;
                let low = crate::base_manifold::lower_torsion(tm.base_torsion(), g);
                let mut worst = max_diff(&parts.resum(), &low);
                let p = [&parts.skew, &parts.vectorial, &parts.remainder];
                for a in 0..3 {
                    for b in (a + 1)..3 {
                        worst = worst.max(torsion_inner(p[a], p[b], &ginv).abs());
                    }
                }
                worst
            }
            DKraines | QkDefect | QkIdentity => {
                let g = self.lc()?;
                let tm = self.tm()?;
                let t = tm.qk_triple()?;
                match id {
                    DKraines => tm.d_kraines(&t).max_abs(),
                    _ => {
                        let d = tm.qk_defect(&t, &g)?;
                        if id == QkDefect {
                            d.l_norm
                        } else {
                            d.identity_residual
                        }
                    }
                }
            }
            FamilyDKraines => {
                let pair = sample.pair;
                let tm = self.tm()?;
                tm.d_kraines(&tm.family_triple(&pair)?).max_abs()
            }
            ObataParallel | ObataMetric | ObataInputParallel => {
                let input = if mfd.has_torsion() { ConnectionMode::Torsioned } else { ConnectionMode::LeviCivita };
                let r = obata_check(mfd, input, &sample.point.x)?;
                match id {
                    ObataParallel => max_abs(&r.parallel),
                    ObataMetric => r.metric,
                    _ => max_abs(&r.input_parallel),
                }
            }
            SurfaceTable => self.surface()?.table_check().iter().flatten().fold(0.0_f64, |a, b| a.max(*b)),
            SurfaceBracket => self.surface()?.bracket_residual(),
            SurfaceKScale => self.surface()?.k_scale_residual(2.0)?,
            EinsteinDefect => self.surface()?.einstein_defect()?.defect,
            EinsteinScalarEq => {
                let s = self.surface()?;
                let f2 = s.frame().f2;
                (s.einstein_defect()?.scalar_eq_residual + f2 * f2).abs()
            }
        };
        Ok(Some(value))
    }
}

fn structure_of(id: CheckId) -> StructureKind {
    match id {
        CheckId::NijenhuisI | CheckId::DOmegaI => StructureKind::I,
        CheckId::NijenhuisJp | CheckId::DOmegaJp => StructureKind::JPlus,
        CheckId::NijenhuisJm | CheckId::DOmegaJm => StructureKind::JMinus,
        _ => StructureKind::K,
    }
}

/// Evaluates `checks` at one sample; `nonzero[i]` selects the side of check `i`.
pub fn evaluate(mfd: &ChartManifold, mode: ConnectionMode, sample: &Sample, checks: &[(CheckId, bool)]) -> Vec<Outcome> {
    let mut ctx = Ctx { mfd, mode, sample, tm: None, lc: None, surface: None };
    checks.iter().map(|(id, nz)| ctx.eval(*id, *nz).map_err(|e| e.to_string())).collect()
}

/// Whether a check needs the frame over a surface.
pub fn needs_surface(id: CheckId) -> bool {
    matches!(
        id,
        CheckId::SurfaceTable | CheckId::SurfaceBracket | CheckId::SurfaceKScale | CheckId::EinsteinDefect | CheckId::EinsteinScalarEq
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in CheckId::ALL {
            assert_eq!(CheckId::from_name(id.name()), Some(*id));
            assert!(id.zero_threshold() > 0.0 && id.nonzero_threshold() > 0.0);
        }
    }
}
