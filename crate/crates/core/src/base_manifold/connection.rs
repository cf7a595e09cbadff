use nalgebra::DMatrix;

use super::{idx3, idx4, ChartManifold};
use crate::error::{GeomError, Result};
use crate::jet::{Jet, JetMatrix};

/// How the base connection `D` is obtained from the chart data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectionMode {
    /// Levi-Civita connection; declared torsion is ignored.
    LeviCivita,
    /// The metric connection with the declared torsion.
    Torsioned,
    /// The torsioned connection made Hermitian by `D + ½(D𝒥)𝒥`.
    Hermitianized,
    /// The torsioned connection shifted by `¼ Σ (D𝒥ᵢ)𝒥ᵢ` so that it
    /// parallelizes the declared quaternionic triple.
    Obata,
}

impl ConnectionMode {
    pub fn name(self) -> &'static str {
        match self {
            ConnectionMode::LeviCivita => "lc",
            ConnectionMode::Torsioned => "torsioned",
            ConnectionMode::Hermitianized => "hermitianized",
            ConnectionMode::Obata => "obata",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Self::LeviCivita, Self::Torsioned, Self::Hermitianized, Self::Obata]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

/// Connection coefficients near a point, as jets in the chart coordinates.
#[derive(Clone, Debug)]
pub struct ConnectionCoeffs {
    m: usize,
    gamma: Vec<Jet>,
    pub is_metric: bool,
    pub is_hermitian: bool,
}

impl ConnectionCoeffs {
    pub fn new(m: usize, gamma: Vec<Jet>) -> Self {
        assert_eq!(gamma.len(), m * m * m);
        ConnectionCoeffs { m, gamma, is_metric: false, is_hermitian: false }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> &Jet {
        &self.gamma[idx3(self.m, k, i, j)]
    }

    pub fn jets(&self) -> &[Jet] {
        &self.gamma
    }

    pub fn values(&self) -> Vec<f64> {
        self.gamma.iter().map(Jet::value).collect()
    }

    pub fn order(&self) -> u8 {
        self.gamma[0].order()
    }
}

/// `Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})`; the result has
/// one order less than `g`.
pub fn christoffel(g: &JetMatrix) -> Vec<Jet> {
    let m = g.dim();
    let order = g.get(0, 0).order();
    assert!(order >= 1, "christoffel symbols need metric derivatives");
    let ginv = g.map(|j| j.truncate(order - 1)).inverse().expect("metric must be invertible");
    let dg: Vec<JetMatrix> = (0..m).map(|a| g.map(|j| j.partial(a))).collect();
    let mut out = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut acc = ginv.get(0, 0).zero_like();
                for l in 0..m {
                    let mut first = dg[i].get(j, l).clone();
                    first += dg[j].get(i, l);
                    first -= dg[l].get(i, j);
                    acc.add_product(ginv.get(k, l), &first);
                }
                out.push(acc.scale(0.5));
            }
        }
    }
    out
}

/// Contorsion `K^k_{ij}` with `⟨K_X Y, Z⟩ = ½(T(X,Y,Z) − T(Y,Z,X) + T(Z,X,Y))`
/// and `T(X,Y,Z) = ⟨T(X,Y), Z⟩`.
pub fn contorsion(t: &[Jet], g: &JetMatrix) -> Vec<Jet> {
    let m = g.dim();
    let order = t[0].order().min(g.get(0, 0).order());
    let g = g.map(|j| j.truncate(order));
    let ginv = g.inverse().expect("metric must be invertible");
    // lowered T_{ijk} = g_{kl} T^l_{ij}
    let mut low = Vec::with_capacity(m * m * m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut acc = g.get(0, 0).zero_like();
                for l in 0..m {
                    acc.add_product(g.get(k, l), &t[idx3(m, l, i, j)].truncate(order));
                }
                low.push(acc);
            }
        }
    }
    let tl = |a: usize, b: usize, c: usize| &low[(a * m + b) * m + c];
    let mut kl = Vec::with_capacity(m * m * m);
    for i in 0..m {
        for j in 0..m {
            for l in 0..m {
                let mut v = tl(i, j, l).clone();
                v -= tl(j, l, i);
                v += tl(l, i, j);
                kl.push(v.scale(0.5));
            }
        }
    }
    let mut out = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut acc = g.get(0, 0).zero_like();
                for l in 0..m {
                    acc.add_product(ginv.get(k, l), &kl[(i * m + j) * m + l]);
                }
                out.push(acc);
            }
        }
    }
    out
}

/// Levi-Civita connection at `x`, with first derivatives.
pub fn levi_civita(mfd: &ChartManifold, x: &[f64]) -> Result<ConnectionCoeffs> {
    let g = mfd.metric_jet(x, 2)?;
    if g.values().cholesky().is_none() {
        return Err(GeomError::NotPositiveDefinite { point: x.to_vec() });
    }
    let mut c = ConnectionCoeffs::new(mfd.dim(), christoffel(&g));
    c.is_metric = true;
    Ok(c)
}

/// The unique metric connection whose torsion is the declared one.
pub fn metric_connection(mfd: &ChartManifold, x: &[f64]) -> Result<ConnectionCoeffs> {
    let mut lc = levi_civita(mfd, x)?;
    if let Some(t) = mfd.torsion_jets(x, 1)? {
        let g = mfd.metric_jet(x, 1)?;
        let k = contorsion(&t, &g);
        for (a, b) in lc.gamma.iter_mut().zip(&k) {
            *a += b;
        }
    }
    Ok(lc)
}

/// `(D_i E)^a_b = ∂_i E^a_b + Γ^a_{ic} E^c_b − Γ^c_{ib} E^a_c`, one matrix per
/// direction `i`. The result has one order less than `e`.
pub fn covariant_endo(conn: &ConnectionCoeffs, e: &JetMatrix) -> Vec<JetMatrix> {
    let m = conn.dim();
    let order = e.get(0, 0).order();
    assert!(order >= 1, "covariant derivative needs derivatives of the field");
    let e0 = e.map(|j| j.truncate(order - 1));
    (0..m)
        .map(|i| {
            JetMatrix::from_fn(m, |a, b| {
                let mut acc = e.get(a, b).partial(i);
                for c in 0..m {
                    acc.add_product(&conn.get(a, i, c).truncate(order - 1), e0.get(c, b));
                    let mut t = conn.get(c, i, b).truncate(order - 1);
                    t = &t * e0.get(a, c);
                    acc -= &t;
                }
                acc
            })
        })
        .collect()
}

/// `Γ' = Γ + weight · Σ_E (D E) E`. With weight ½ and a single complex
/// structure this is the Hermitian averaging; with weight ¼ and a
/// quaternionic triple it is the connection parallelizing the triple.
pub fn parallelizing_shift(conn: &ConnectionCoeffs, endos: &[JetMatrix], weight: f64) -> ConnectionCoeffs {
    let m = conn.dim();
    let order = conn.order();
    let mut gamma = conn.gamma.clone();
    for e in endos {
        let de = covariant_endo(conn, e);
        let e0 = e.map(|j| j.truncate(order));
        for (i, dei) in de.iter().enumerate() {
            let shift = dei.map(|j| j.truncate(order)).matmul(&e0);
            for a in 0..m {
                for b in 0..m {
                    gamma[idx3(m, a, i, b)].add_scaled(weight, shift.get(a, b));
                }
            }
        }
    }
    ConnectionCoeffs { m, gamma, is_metric: conn.is_metric, is_hermitian: conn.is_hermitian }
}

/// Base connection for `mode` at `x`.
pub fn base_connection(mfd: &ChartManifold, mode: ConnectionMode, x: &[f64]) -> Result<ConnectionCoeffs> {
    match mode {
        ConnectionMode::LeviCivita => levi_civita(mfd, x),
        ConnectionMode::Torsioned => metric_connection(mfd, x),
        ConnectionMode::Hermitianized => {
            let d = metric_connection(mfd, x)?;
            let j = mfd.acs_jet(x, 2)?.ok_or(GeomError::MissingAcs("hermitianized connection"))?;
            let mut h = parallelizing_shift(&d, &[j], 0.5);
            h.is_hermitian = true;
            Ok(h)
        }
        ConnectionMode::Obata => {
            let d = metric_connection(mfd, x)?;
            let t = mfd.triple_jets(x, 2)?.ok_or(GeomError::MissingTriple("obata connection"))?;
            Ok(parallelizing_shift(&d, &t, 0.25))
        }
    }
}

/// Torsion values `T^k_{ij} = Γ^k_{ij} − Γ^k_{ji}`.
pub fn torsion(conn: &ConnectionCoeffs) -> Vec<f64> {
    torsion_jets(conn).iter().map(Jet::value).collect()
}

pub fn torsion_jets(conn: &ConnectionCoeffs) -> Vec<Jet> {
    let m = conn.dim();
    let mut out = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                out.push(conn.get(k, i, j) - conn.get(k, j, i));
            }
        }
    }
    out
}

/// `R^l_{kij} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{ip}Γ^p_{jk} − Γ^l_{jp}Γ^p_{ik}`.
pub fn curvature(conn: &ConnectionCoeffs) -> Vec<f64> {
    let m = conn.dim();
    assert!(conn.order() >= 1, "curvature needs connection derivatives");
    let g = |k: usize, i: usize, j: usize| conn.get(k, i, j).value();
    let mut out = vec![0.0; m * m * m * m];
    for l in 0..m {
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let mut r = conn.get(l, j, k).d(i) - conn.get(l, i, k).d(j);
                    for p in 0..m {
                        r += g(l, i, p) * g(p, j, k) - g(l, j, p) * g(p, i, k);
                    }
                    out[idx4(m, l, k, i, j)] = r;
                }
            }
        }
    }
    out
}

/// Max of `|∂_i g_{jk} − Γ^l_{ij} g_{lk} − Γ^l_{ik} g_{jl}|`.
pub fn metric_residual(conn: &ConnectionCoeffs, g: &JetMatrix) -> f64 {
    let m = conn.dim();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut r = g.get(j, k).d(i);
                for l in 0..m {
                    r -= conn.get(l, i, j).value() * g.get(l, k).value();
                    r -= conn.get(l, i, k).value() * g.get(j, l).value();
                }
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

/// Max of the cyclic sum `R(X,Y)Z + R(Y,Z)X + R(Z,X)Y` over coordinate fields.
pub fn first_bianchi_residual(r: &[f64], m: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for l in 0..m {
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let s = r[idx4(m, l, k, i, j)] + r[idx4(m, l, i, j, k)] + r[idx4(m, l, j, k, i)];
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// Largest entry of the covariant derivative of `e` under `conn`.
pub fn endo_parallel_residual(conn: &ConnectionCoeffs, e: &JetMatrix) -> f64 {
    covariant_endo(conn, e).iter().map(|d| d.values().amax()).fold(0.0, f64::max)
}

pub fn lowered_curvature(r: &[f64], g: &DMatrix<f64>, m: usize) -> Vec<f64> {
    // R_{pkij} = g_{pl} R^l_{kij}
    let mut out = vec![0.0; r.len()];
    for p in 0..m {
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    out[idx4(m, p, k, i, j)] = (0..m).map(|l| g[(p, l)] * r[idx4(m, l, k, i, j)]).sum();
                }
            }
        }
    }
    out
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

    /// Christoffel symbols by central differences of the metric.
    fn fd_christoffel(mfd: &ChartManifold, x: &[f64]) -> Vec<f64> {
        let m = mfd.dim();
        let h = 1e-5;
        let dg: Vec<DMatrix<f64>> = (0..m)
            .map(|a| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[a] += h;
                xm[a] -= h;
                (mfd.metric_at(&xp).unwrap() - mfd.metric_at(&xm).unwrap()) / (2.0 * h)
            })
            .collect();
        let ginv = mfd.metric_at(x).unwrap().try_inverse().unwrap();
        let mut out = vec![0.0; m * m * m];
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    out[idx3(m, k, i, j)] = 0.5
                        * (0..m)
                            .map(|l| ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                            .sum::<f64>();
                }
            }
        }
        out
    }

    #[test]
    fn sphere_christoffel_symbols() {
        let mfd = sphere();
        let x = [1.1, 0.4];
        let lc = levi_civita(&mfd, &x).unwrap();
        let (s, c) = (x[0].sin(), x[0].cos());
        assert!((lc.get(0, 1, 1).value() + s * c).abs() < 1e-14);
        assert!((lc.get(1, 0, 1).value() - c / s).abs() < 1e-14);
        for (a, b) in lc.values().iter().zip(fd_christoffel(&mfd, &x)) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn hyperbolic_christoffel_symbol() {
        let mfd = ChartManifold::new(vec![(-1.0, 1.0), (0.5, 2.0)], exprs(&["1/x2^2", "0", "0", "1/x2^2"])).unwrap();
        let x = [0.2, 1.3];
        let lc = levi_civita(&mfd, &x).unwrap();
        assert!((lc.get(0, 0, 1).value() + 1.0 / x[1]).abs() < 1e-14);
        for (a, b) in lc.values().iter().zip(fd_christoffel(&mfd, &x)) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn sphere_has_unit_sectional_curvature() {
        let mfd = sphere();
        for x in [[0.7, 0.1], [1.4, 3.0], [2.2, 5.5]] {
            let lc = levi_civita(&mfd, &x).unwrap();
            let g = mfd.metric_at(&x).unwrap();
            let r = lowered_curvature(&curvature(&lc), &g, 2);
            // ⟨R(∂1,∂2)∂2, ∂1⟩ = K (g11 g22 − g12²)
            let sec = r[idx4(2, 0, 1, 0, 1)] / (g[(0, 0)] * g[(1, 1)] - g[(0, 1)].powi(2));
            assert!((sec - 1.0).abs() < 1e-8, "{sec}");
            assert!(first_bianchi_residual(&curvature(&lc), 2) < 1e-12);
        }
    }

    #[test]
    fn skew_torsion_roundtrip_on_flat_space() {
        let mut t = vec![Expr::num(0.0); 27];
        let eps = |i: usize, j: usize, k: usize| ((i as i32 - j as i32) * (j as i32 - k as i32) * (k as i32 - i as i32)) as f64 / 2.0;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    t[idx3(3, k, i, j)] = Expr::num(0.7 * eps(i, j, k));
                }
            }
        }
        let mfd = ChartManifold::new(vec![(-1.0, 1.0); 3], exprs(&["1", "0", "0", "0", "1", "0", "0", "0", "1"]))
            .unwrap()
            .with_torsion(t)
            .unwrap();
        let x = [0.1, 0.2, 0.3];
        let d = metric_connection(&mfd, &x).unwrap();
        let tt = torsion(&d);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert!((tt[idx3(3, k, i, j)] - 0.7 * eps(i, j, k)).abs() < 1e-14);
                }
            }
        }
        let g = mfd.metric_jet(&x, 1).unwrap();
        assert!(metric_residual(&d, &g) < 1e-14);
    }

    #[test]
    fn vectorial_torsion_stays_metric() {
        // T(X,Y) = ⟨e1,X⟩Y − ⟨e1,Y⟩X on a conformally flat R³
        let mut t = vec![Expr::num(0.0); 27];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let v = (i == 0) as i32 * (j == k) as i32 - (j == 0) as i32 * (i == k) as i32;
                    t[idx3(3, k, i, j)] = Expr::num(v as f64);
                }
            }
        }
        let g = exprs(&["exp(x2)", "0", "0", "0", "exp(x2)", "0", "0", "0", "exp(x2)"]);
        let mfd = ChartManifold::new(vec![(-1.0, 1.0); 3], g).unwrap().with_torsion(t).unwrap();
        let x = [0.3, -0.2, 0.5];
        let d = metric_connection(&mfd, &x).unwrap();
        assert!(metric_residual(&d, &mfd.metric_jet(&x, 1).unwrap()) < 1e-12);
    }

    #[test]
    fn hermitian_averaging_parallelizes_the_structure() {
        // conformal metric on R⁴ with a non-constant rotation inside the first plane
        let g = exprs(&[
            "exp(x1*x3)", "0", "0", "0", "0", "exp(x1*x3)", "0", "0", "0", "0", "exp(x1*x3)", "0", "0", "0", "0",
            "exp(x1*x3)",
        ]);
        let j = exprs(&["0", "-1", "0", "0", "1", "0", "0", "0", "0", "0", "0", "-1", "0", "0", "1", "0"]);
        let mut t = vec![Expr::num(0.0); 64];
        t[idx3(4, 2, 0, 1)] = parse("x2").unwrap();
        t[idx3(4, 2, 1, 0)] = parse("-x2").unwrap();
        let mfd = ChartManifold::new(vec![(-1.0, 1.0); 4], g)
            .unwrap()
            .with_acs(j)
            .unwrap()
            .with_torsion(t)
            .unwrap();
        let x = [0.2, 0.5, -0.4, 0.1];
        let raw = metric_connection(&mfd, &x).unwrap();
        let jj = mfd.acs_jet(&x, 2).unwrap().unwrap();
        assert!(endo_parallel_residual(&raw, &jj) > 1e-3);
        let h = base_connection(&mfd, ConnectionMode::Hermitianized, &x).unwrap();
        assert!(endo_parallel_residual(&h, &jj) < 1e-12);
        assert!(metric_residual(&h, &mfd.metric_jet(&x, 1).unwrap()) < 1e-12);
    }
}
