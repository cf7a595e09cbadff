use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{idx3, idx4};
use crate::error::{GeomError, Result};

/// Lowered torsion `T_{ijk} = g_{kl} T^l_{ij}`, stored at `(i*m + j)*m + k`.
pub fn lower_torsion(t: &[f64], g: &DMatrix<f64>) -> Vec<f64> {
    let m = g.nrows();
    let mut out = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                out[(i * m + j) * m + k] = (0..m).map(|l| g[(k, l)] * t[idx3(m, l, i, j)]).sum();
            }
        }
    }
    out
}

/// `g^{ia} g^{jb} g^{kc} A_{ijk} B_{abc}` for lowered 3-tensors.
pub fn torsion_inner(a: &[f64], b: &[f64], ginv: &DMatrix<f64>) -> f64 {
    let m = ginv.nrows();
    // raise all three indices of b one at a time
    let mut cur = b.to_vec();
    for slot in 0..3 {
        let mut next = vec![0.0; cur.len()];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let idx = [i, j, k];
                    let mut s = 0.0;
                    for l in 0..m {
                        let mut src = idx;
                        src[slot] = l;
                        s += ginv[(idx[slot], l)] * cur[(src[0] * m + src[1]) * m + src[2]];
                    }
                    next[(i * m + j) * m + k] = s;
                }
            }
        }
        cur = next;
    }
    a.iter().zip(&cur).map(|(x, y)| x * y).sum()
}

/// Orthogonal splitting of a lowered torsion tensor into the totally skew
/// part, the vectorial part `V_i g_{jk} − V_j g_{ik}` and the remainder.
#[derive(Clone, Debug)]
pub struct TorsionParts {
    pub remainder: Vec<f64>,
    pub skew: Vec<f64>,
    pub vectorial: Vec<f64>,
    /// The 1-form `V_i` of the vectorial part.
    pub vector: Vec<f64>,
}

impl TorsionParts {
    pub fn resum(&self) -> Vec<f64> {
        (0..self.skew.len()).map(|n| self.remainder[n] + self.skew[n] + self.vectorial[n]).collect()
    }
}

/// Decomposes the upper-index torsion `t` with respect to `g`.
pub fn torsion_decompose(t: &[f64], g: &DMatrix<f64>) -> Result<TorsionParts> {
    let m = g.nrows();
    if m < 2 {
        return Err(GeomError::Precondition("torsion decomposition needs dimension at least 2".into()));
    }
    let mut asym: f64 = 0.0;
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                asym = asym.max((t[idx3(m, k, i, j)] + t[idx3(m, k, j, i)]).abs());
            }
        }
    }
    let size = t.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if asym > 1e-12 * size {
        return Err(GeomError::TorsionNotAntisymmetric { point: Vec::new(), residual: asym });
    }
    let ginv = g.clone().try_inverse().ok_or_else(|| GeomError::NotPositiveDefinite { point: Vec::new() })?;
    let low = lower_torsion(t, g);
    let at = |i: usize, j: usize, k: usize| low[(i * m + j) * m + k];
    let mut skew = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                skew[(i * m + j) * m + k] = (at(i, j, k) + at(j, k, i) + at(k, i, j)) / 3.0;
            }
        }
    }
    // trace c_i = g^{jk} T_{ijk}; the vectorial part has trace (m − 1) V_i
    let vector: Vec<f64> = (0..m)
        .map(|i| {
            let mut c = 0.0;
            for j in 0..m {
                for k in 0..m {
                    c += ginv[(j, k)] * at(i, j, k);
                }
            }
            c / (m as f64 - 1.0)
        })
        .collect();
    let mut vectorial = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                vectorial[(i * m + j) * m + k] = vector[i] * g[(j, k)] - vector[j] * g[(i, k)];
            }
        }
    }
    let remainder = (0..low.len()).map(|n| low[n] - skew[n] - vectorial[n]).collect();
    Ok(TorsionParts { remainder, skew, vectorial, vector })
}

/// Type of a torsion tensor with respect to an orthogonal complex structure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorsionType {
    /// Largest component of the totally skew part.
    pub skew3: f64,
    /// Largest `|T(X,Y,𝒥Z) + T(Y,Z,𝒥X) + T(Z,X,𝒥Y)|` on basis vectors.
    pub cyclic_j: f64,
    /// Largest `|T(u,v,w)|` with `u,v,w` in the `+i` eigenspace.
    pub pure: f64,
    /// Largest lowered component of mixed type.
    pub mixed: f64,
}

impl TorsionType {
    /// Condition under which the 2-forms of `𝒥 ⊕ ±𝒥` on the tangent bundle
    /// are closed for a flat Hermitian connection.
    pub fn admissible(&self, tol: f64) -> bool {
        self.skew3 <= tol && self.cyclic_j <= tol
    }
}

/// `½(e_a − i𝒥e_a)`, spanning the `+i` eigenspace of `𝒥`.
fn holomorphic_vectors(j: &DMatrix<f64>) -> Vec<Vec<Complex64>> {
    let m = j.nrows();
    (0..m)
        .map(|a| (0..m).map(|r| Complex64::new(0.5 * (r == a) as u8 as f64, -0.5 * j[(r, a)])).collect())
        .collect()
}

fn conj(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| z.conj()).collect()
}

pub fn torsion_j_type(t: &[f64], j: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<TorsionType> {
    let m = g.nrows();
    let parts = torsion_decompose(t, g)?;
    let low = lower_torsion(t, g);
    let skew3 = parts.skew.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let tri = |x: &[f64], y: &[f64], z: &[f64]| {
        let mut s = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    s += low[(a * m + b) * m + c] * x[a] * y[b] * z[c];
                }
            }
        }
        s
    };
    let basis: Vec<Vec<f64>> = (0..m).map(|a| (0..m).map(|r| (r == a) as u8 as f64).collect()).collect();
    let jb: Vec<Vec<f64>> = (0..m).map(|a| j.column(a).iter().copied().collect()).collect();
    let mut cyclic_j: f64 = 0.0;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let s = tri(&basis[a], &basis[b], &jb[c]) + tri(&basis[b], &basis[c], &jb[a]) + tri(&basis[c], &basis[a], &jb[b]);
                cyclic_j = cyclic_j.max(s.abs());
            }
        }
    }
    let ctri = |x: &[Complex64], y: &[Complex64], z: &[Complex64]| {
        let mut s = Complex64::new(0.0, 0.0);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    s += x[a] * y[b] * z[c] * low[(a * m + b) * m + c];
                }
            }
        }
        s
    };
    let u = holomorphic_vectors(j);
    let ub: Vec<Vec<Complex64>> = u.iter().map(|v| conj(v)).collect();
    let (mut pure, mut mixed): (f64, f64) = (0.0, 0.0);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                pure = pure.max(ctri(&u[a], &u[b], &u[c]).norm());
                mixed = mixed
                    .max(ctri(&u[a], &u[b], &ub[c]).norm())
                    .max(ctri(&u[a], &ub[b], &u[c]).norm())
                    .max(ctri(&ub[a], &u[b], &u[c]).norm());
            }
        }
    }
    Ok(TorsionType { skew3, cyclic_j, pure, mixed })
}

/// Largest norms of the curvature blocks `R(u,v)w`, `R(u,v)w̄` and
/// `R(u,v̄)w` for `u, v, w` in the `+i` eigenspace of `𝒥`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoloBlocks {
    pub uv_w: f64,
    pub uv_wbar: f64,
    pub uvbar_w: f64,
}

pub fn curvature_holo_components(r: &[f64], j: &DMatrix<f64>) -> HoloBlocks {
    let m = j.nrows();
    let u = holomorphic_vectors(j);
    let ub: Vec<Vec<Complex64>> = u.iter().map(|v| conj(v)).collect();
    let apply = |x: &[Complex64], y: &[Complex64], z: &[Complex64]| {
        let mut norm2 = 0.0;
        for l in 0..m {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..m {
                for i in 0..m {
                    for jj in 0..m {
                        s += x[i] * y[jj] * z[k] * r[idx4(m, l, k, i, jj)];
                    }
                }
            }
            norm2 += s.norm_sqr();
        }
        norm2.sqrt()
    };
    let mut out = HoloBlocks { uv_w: 0.0, uv_wbar: 0.0, uvbar_w: 0.0 };
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                out.uv_w = out.uv_w.max(apply(&u[a], &u[b], &u[c]));
                out.uv_wbar = out.uv_wbar.max(apply(&u[a], &u[b], &ub[c]));
                out.uvbar_w = out.uvbar_w.max(apply(&u[a], &ub[b], &u[c]));
            }
        }
    }
    out
}
