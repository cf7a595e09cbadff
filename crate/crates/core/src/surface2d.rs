//! Tangent bundles of surfaces: the adapted frame `(ξ, η, ξ_h, η_h)`, its
//! connection table, and the Ricci tensor of `TM`.
//!
//! At `(x, v)` with `c = |v| > 0`: `w` is `v/c` rotated by `+90°` for the
//! metric volume form, `ξ = (0, v)`, `η = (0, w)`, `ξ_h` and `η_h` are the
//! horizontal lifts of `v` and `w`. The frame is built as a field of
//! first-order jets so covariant derivatives of it are exact.

use nalgebra::DMatrix;

use crate::base_manifold::{torsion_jets, ChartManifold, ConnectionMode};
use crate::error::{GeomError, Result};
use crate::jet::Jet;
use crate::tangent_bundle::{TMPoint, TMVector, TmGeometry};

/// Finite-difference step for the derivative of the connection coefficients.
pub const RICCI_STEP: f64 = 1e-4;

/// Frame vectors and scalar functions at one point.
#[derive(Clone, Debug)]
pub struct SurfaceFrame {
    pub c: f64,
    pub xi: TMVector,
    pub eta: TMVector,
    pub xi_h: TMVector,
    pub eta_h: TMVector,
    /// `⟨R(u, w)u, w⟩` with `u = v/c`.
    pub k: f64,
    /// `T(v, w) = f₁ v + f₂ w`.
    pub f1: f64,
    pub f2: f64,
}

#[derive(Clone, Debug)]
pub struct EinsteinDefect {
    pub ricci: DMatrix<f64>,
    /// Largest entry of `Ric − (tr_G Ric / 4) G`.
    pub defect: f64,
    /// `c² η_h(f₁) − ξ_h(f₂) − c² f₁² − f₂²`.
    pub scalar_eq_residual: f64,
}

/// Names of the frame fields in table order.
pub const FIELD_NAMES: [&str; 4] = ["xi", "eta", "xi_h", "eta_h"];

/// A point of `TM` over a surface together with the frame fields.
pub struct SurfacePoint<'a> {
    mfd: &'a ChartManifold,
    mode: ConnectionMode,
    tm: TmGeometry,
    /// Coordinate components of `ξ, η, ξ_h, η_h`.
    fields: [Vec<Jet>; 4],
    c: Jet,
    f1: Jet,
    f2: Jet,
    k: f64,
}

fn to_vector(f: &[Jet]) -> TMVector {
    TMVector { a: vec![f[0].value(), f[1].value()], b: vec![f[2].value(), f[3].value()] }
}

impl<'a> SurfacePoint<'a> {
    pub fn new(mfd: &'a ChartManifold, mode: ConnectionMode, p: &TMPoint) -> Result<Self> {
        if mfd.dim() != 2 {
            return Err(GeomError::Dimension { expected: 2, got: mfd.dim() });
        }
        let tm = TmGeometry::new(mfd, mode, p)?;
        let n = 4;
        let g = mfd.metric_jet(&p.x, 1)?.map(|j| j.embed(n, 0));
        let v: Vec<Jet> = (0..2).map(|j| Jet::variable(p.v[j], 2 + j, n, 1)).collect();
        let quad = |a: &[Jet], b: &[Jet]| {
            let mut acc = Jet::constant(0.0, n, 1);
            for i in 0..2 {
                for j in 0..2 {
                    acc.add_product(&(g.get(i, j) * &a[i]), &b[j]);
                }
            }
            acc
        };
        let c2 = quad(&v, &v);
        if c2.value() < 1e-20 {
            return Err(GeomError::ZeroSection);
        }
        let c = c2.sqrt();
        let det = &(g.get(0, 0) * g.get(1, 1)) - &(g.get(0, 1) * g.get(1, 0));
        let s = det.sqrt();
        // w = √det g · g⁻¹ ε v / c, ε = [[0, −1], [1, 0]]
        let ev = [-&v[1], v[0].clone()];
        let scale = &s / &(&det * &c);
        let w: Vec<Jet> = vec![
            &(&(g.get(1, 1) * &ev[0]) - &(g.get(0, 1) * &ev[1])) * &scale,
            &(&(g.get(0, 0) * &ev[1]) - &(g.get(1, 0) * &ev[0])) * &scale,
        ];
        let conn = tm.base_connection();
        let gam = |k: usize, i: usize, j: usize| conn.get(k, i, j).embed(n, 0);
        let lift = |u: &[Jet]| -> Vec<Jet> {
            let mut out = vec![u[0].clone(), u[1].clone()];
            for k in 0..2 {
                let mut acc = Jet::constant(0.0, n, 1);
                for i in 0..2 {
                    for j in 0..2 {
                        acc.add_product(&(&gam(k, i, j) * &u[i]), &v[j]);
                    }
                }
                out.push(-acc);
            }
            out
        };
        let zero = Jet::constant(0.0, n, 1);
        let xi = vec![zero.clone(), zero.clone(), v[0].clone(), v[1].clone()];
        let eta = vec![zero.clone(), zero, w[0].clone(), w[1].clone()];
        let xi_h = lift(&v);
        let eta_h = lift(&w);
        let t: Vec<Jet> = torsion_jets(conn).iter().map(|j| j.embed(n, 0)).collect();
        let tvw: Vec<Jet> = (0..2)
            .map(|k| {
                let mut acc = Jet::constant(0.0, n, 1);
                for i in 0..2 {
                    for j in 0..2 {
                        acc.add_product(&(&t[(k * 2 + i) * 2 + j] * &v[i]), &w[j]);
                    }
                }
                acc
            })
            .collect();
        let f1 = &quad(&tvw, &v) / &c2;
        let f2 = quad(&tvw, &w);
        let r = tm.base_curvature();
        let gv = tm.base_metric();
        let cv = c.value();
        let u = [p.v[0] / cv, p.v[1] / cv];
        let wv = [w[0].value(), w[1].value()];
        let mut k = 0.0;
        for l in 0..2 {
            for kk in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let rl = r[((l * 2 + kk) * 2 + i) * 2 + j] * u[kk] * u[i] * wv[j];
                        k += (0..2).map(|q| gv[(q, l)] * rl * wv[q]).sum::<f64>();
                    }
                }
            }
        }
        Ok(SurfacePoint { mfd, mode, tm, fields: [xi, eta, xi_h, eta_h], c, f1, f2, k })
    }

    pub fn geometry(&self) -> &TmGeometry {
        &self.tm
    }

    pub fn frame(&self) -> SurfaceFrame {
        let [xi, eta, xi_h, eta_h] = &self.fields;
        SurfaceFrame {
            c: self.c.value(),
            xi: to_vector(xi),
            eta: to_vector(eta),
            xi_h: to_vector(xi_h),
            eta_h: to_vector(eta_h),
            k: self.k,
            f1: self.f1.value(),
            f2: self.f2.value(),
        }
    }

    fn values(&self, i: usize) -> [f64; 4] {
        let f = &self.fields[i];
        [f[0].value(), f[1].value(), f[2].value(), f[3].value()]
    }

    /// `∇_X Y` for frame fields `X = fields[x]`, `Y = fields[y]`.
    fn covariant(&self, gamma: &[f64], x: usize, y: usize) -> [f64; 4] {
        let xv = self.values(x);
        let yv = self.values(y);
        let yf = &self.fields[y];
        let mut out = [0.0; 4];
        for (c, o) in out.iter_mut().enumerate() {
            for a in 0..4 {
                let mut t = yf[c].d(a);
                for b in 0..4 {
                    t += gamma[(c * 4 + a) * 4 + b] * yv[b];
                }
                *o += xv[a] * t;
            }
        }
        out
    }

    fn combo(&self, coeffs: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, s) in coeffs.iter().enumerate() {
            if *s != 0.0 {
                let f = self.values(i);
                for c in 0..4 {
                    out[c] += s * f[c];
                }
            }
        }
        out
    }

    /// Right-hand sides of the table: `∇_{row} col` in the frame basis.
    pub fn table_expected(&self) -> [[[f64; 4]; 4]; 4] {
        let (c, k, f1, f2) = (self.c.value(), self.k, self.f1.value(), self.f2.value());
        let c2 = c * c;
        let z = [0.0; 4];
        [
            [[1.0, 0.0, 0.0, 0.0], z, [0.0, 0.0, 1.0, 0.0], z],
            [
                [0.0, 1.0, 0.0, 0.0],
                [-1.0 / c2, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 1.0 + 0.5 * k * c2],
                [0.0, 0.0, -(1.0 / c2 + 0.5 * k), 0.0],
            ],
            [z, [0.0, 0.0, 0.0, 0.5 * k * c2], [0.0, 0.0, 0.0, f1 * c2], [0.0, -0.5 * k * c2, -f1, 0.0]],
            [z, [0.0, 0.0, -0.5 * k, 0.0], [0.0, 0.5 * k * c2, 0.0, f2], [0.0, 0.0, -f2 / c2, 0.0]],
        ]
    }

    /// Residual of each table entry, `[row][col]` for `∇_{row} col`, with rows
    /// and columns ordered `ξ, η, ξ_h, η_h`.
    pub fn table_check(&self) -> [[f64; 4]; 4] {
        let gamma = self.tm.levi_civita();
        let expected = self.table_expected();
        let mut out = [[0.0; 4]; 4];
        for x in 0..4 {
            for y in 0..4 {
                let got = self.covariant(&gamma, x, y);
                let want = self.combo(expected[x][y]);
                out[x][y] = got.iter().zip(&want).fold(0.0_f64, |w, (a, b)| w.max((a - b).abs()));
            }
        }
        out
    }

    fn derive(&self, x: usize, f: &Jet) -> f64 {
        let xv = self.values(x);
        (0..4).map(|a| xv[a] * f.d(a)).sum()
    }

    /// `[ξ_h, η_h] + c²kη + f₁ξ_h + f₂η_h`, largest coordinate component.
    pub fn bracket_residual(&self) -> f64 {
        let (a, b) = (&self.fields[2], &self.fields[3]);
        let (c, k) = (self.c.value(), self.k);
        let rhs = self.combo([0.0, -c * c * k, -self.f1.value(), -self.f2.value()]);
        (0..4)
            .map(|i| {
                let br: f64 = (0..4).map(|j| a[j].value() * b[i].d(j) - b[j].value() * a[i].d(j)).sum();
                (br - rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `k` at `(x, λv)` minus `k` at `(x, v)`.
    pub fn k_scale_residual(&self, lambda: f64) -> Result<f64> {
        let p = self.tm.point();
        let q = TMPoint { x: p.x.clone(), v: p.v.iter().map(|c| c * lambda).collect() };
        Ok((SurfacePoint::new(self.mfd, self.mode, &q)?.k - self.k).abs())
    }

    fn gamma_at(&self, coord: usize, h: f64) -> Result<Vec<f64>> {
        let p = self.tm.point();
        let mut q = p.clone();
        if coord < 2 {
            q.x[coord] += h;
        } else {
            q.v[coord - 2] += h;
        }
        Ok(TmGeometry::new(self.mfd, self.mode, &q)?.levi_civita())
    }

    /// `∂_a Γ̃` by central differences with one Richardson step.
    fn gamma_derivatives(&self) -> Result<Vec<Vec<f64>>> {
        let h = RICCI_STEP;
        (0..4)
            .map(|a| {
                let central = |s: f64| -> Result<Vec<f64>> {
                    let (p, m) = (self.gamma_at(a, s)?, self.gamma_at(a, -s)?);
                    Ok(p.iter().zip(&m).map(|(u, w)| (u - w) / (2.0 * s)).collect())
                };
                let (d1, d2) = (central(h)?, central(h / 2.0)?);
                Ok(d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect())
            })
            .collect()
    }

    /// Ricci tensor of `TM`, its Einstein defect, and the scalar equation.
    pub fn einstein_defect(&self) -> Result<EinsteinDefect> {
        let n = 4;
        let g = self.tm.levi_civita();
        let dg = self.gamma_derivatives()?;
        let at = |c: usize, a: usize, b: usize| (c * n + a) * n + b;
        // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{cp} Γ^p_{db} − Γ^a_{dp} Γ^p_{cb}
        let riem = |a: usize, b: usize, c: usize, d: usize| {
            let mut r = dg[c][at(a, d, b)] - dg[d][at(a, c, b)];
            for p in 0..n {
                r += g[at(a, c, p)] * g[at(p, d, b)] - g[at(a, d, p)] * g[at(p, c, b)];
            }
            r
        };
        let ricci = DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| riem(a, b, a, d)).sum());
        let big_g = self.tm.metric();
        let ginv = big_g.clone().try_inverse().ok_or(GeomError::Precondition("singular metric on TM".into()))?;
        let scal = (&ginv * &ricci).trace();
        let defect = (&ricci - &big_g * (scal / n as f64)).amax();
        let (c, f1, f2) = (self.c.value(), self.f1.value(), self.f2.value());
        let scalar_eq_residual =
            c * c * self.derive(3, &self.f1) - self.derive(2, &self.f2) - c * c * f1 * f1 - f2 * f2;
        Ok(EinsteinDefect { ricci, defect, scalar_eq_residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::{parse, Expr};

    fn exprs(src: &[&str]) -> Vec<Expr> {
        src.iter().map(|s| parse(s).unwrap()).collect()
    }

    fn sphere() -> ChartManifold {
        ChartManifold::new(vec![(0.5, 2.6), (0.0, 6.2)], exprs(&["1", "0", "0", "sin(x1)^2"])).unwrap()
    }

    #[test]
    fn frame_is_orthonormal_and_direct() {
        let mfd = sphere();
        let p = TMPoint { x: vec![1.1, 0.3], v: vec![0.4, 0.9] };
        let s = SurfacePoint::new(&mfd, ConnectionMode::LeviCivita, &p).unwrap();
        let f = s.frame();
        let g = mfd.metric_at(&p.x).unwrap();
        let ip = |a: &[f64], b: &[f64]| (0..2).map(|i| (0..2).map(|j| g[(i, j)] * a[i] * b[j]).sum::<f64>()).sum::<f64>();
        assert!((ip(&f.eta.b, &f.eta.b) - 1.0).abs() < 1e-12);
        assert!(ip(&f.eta.b, &p.v).abs() < 1e-12);
        let det = p.v[0] * f.eta.b[1] - p.v[1] * f.eta.b[0];
        assert!(det > 0.0);
    }

    #[test]
    fn flat_plane_has_no_curvature_or_torsion_functions() {
        let mfd = ChartManifold::new(vec![(-1.0, 1.0); 2], exprs(&["1", "0", "0", "1"])).unwrap();
        let p = TMPoint { x: vec![0.0, 0.0], v: vec![1.0, 0.5] };
        let s = SurfacePoint::new(&mfd, ConnectionMode::LeviCivita, &p).unwrap();
        let f = s.frame();
        assert_eq!((f.k, f.f1, f.f2), (0.0, 0.0, 0.0));
        assert!(s.table_check().iter().flatten().all(|r| *r < 1e-12));
    }

    #[test]
    fn zero_section_is_rejected() {
        let mfd = sphere();
        let p = TMPoint { x: vec![1.0, 1.0], v: vec![0.0, 0.0] };
        assert!(matches!(SurfacePoint::new(&mfd, ConnectionMode::LeviCivita, &p), Err(GeomError::ZeroSection)));
    }
}
