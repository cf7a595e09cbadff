//! Quaternionic linear algebra on a single Euclidean fiber.
//!
//! Quaternions are nalgebra's [`Quaternion`]; `R^{4n}` is identified with
//! `H^n` blockwise, coordinates `(w, x, y, z)` on the basis `(1, i, j, k)`.
//! The standard triple is right multiplication: `I = R_i`, `J = R_j` and
//! `K = IJ = −R_k`, so that `IJ = K = −JI`.
//!
//! 2-forms of structures are `ω_S(X, Y) = ⟨SX, Y⟩`, i.e. the matrix `Sᵀg`.
//! The Kraines form `Ω = Σ ω_S ∧ ω_S` uses the determinant wedge of
//! [`crate::forms`]; on an orthonormal quaternionic line `(Y, IY, JY, KY)`
//! it evaluates to 6, and [`KRAINES_NORMALIZATION`] rescales it to 4.

use nalgebra::{DMatrix, DVector, Matrix3, UnitQuaternion};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{GeomError, Result};
use crate::forms::{wedge, AltForm};

pub type Quaternion = nalgebra::Quaternion<f64>;

/// Factor taking the raw Kraines form to the one with value 4 on a
/// quaternionic line.
pub const KRAINES_NORMALIZATION: f64 = 2.0 / 3.0;

/// Hamilton product.
pub fn quat_mul(p: &Quaternion, q: &Quaternion) -> Quaternion {
    p * q
}

/// A quaternionic triple of endomorphisms of `R^{4n}` with its inner product.
#[derive(Clone, Debug)]
pub struct QTriple {
    pub i: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub g: DMatrix<f64>,
}

fn right_i() -> [[f64; 4]; 4] {
    // q·i for q = w + x i + y j + z k is (−x, w, z, −y)
    [[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]
}

fn right_j() -> [[f64; 4]; 4] {
    // q·j = (−y, −z, w, x)
    [[0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]
}

fn block_diagonal(n: usize, block: [[f64; 4]; 4]) -> DMatrix<f64> {
    DMatrix::from_fn(4 * n, 4 * n, |r, c| if r / 4 == c / 4 { block[r % 4][c % 4] } else { 0.0 })
}

/// Right multiplication by `i`, `j` on `H^n`, with `K = IJ` and `g = Id`.
pub fn standard_triple(n: usize) -> QTriple {
    assert!(n >= 1);
    let i = block_diagonal(n, right_i());
    let j = block_diagonal(n, right_j());
    let k = &i * &j;
    QTriple { i, j, k, g: DMatrix::identity(4 * n, 4 * n) }
}

impl QTriple {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn members(&self) -> [&DMatrix<f64>; 3] {
        [&self.i, &self.j, &self.k]
    }

    /// Largest violation of `S² = −Id`, `SᵀgS = g`, `IJ = K = −JI`.
    pub fn residual(&self) -> f64 {
        let n = self.dim();
        let id = DMatrix::<f64>::identity(n, n);
        let mut r: f64 = 0.0;
        for s in self.members() {
            r = r.max((s * s + &id).amax());
            r = r.max((s.transpose() * &self.g * s - &self.g).amax());
        }
        r = r.max((&self.i * &self.j - &self.k).amax());
        r.max((&self.j * &self.i + &self.k).amax())
    }

    /// `(I', J', K')ᵀ = r (I, J, K)ᵀ`; for `r ∈ SO(3)` this is again a triple.
    pub fn rotated(&self, r: &Matrix3<f64>) -> QTriple {
        let s = self.members();
        let comb = |row: usize| (0..3).fold(DMatrix::zeros(self.dim(), self.dim()), |acc, c| acc + s[c] * r[(row, c)]);
        QTriple { i: comb(0), j: comb(1), k: comb(2), g: self.g.clone() }
    }

    /// The triple transported by an invertible map: `S ↦ A S A⁻¹`, `g ↦ A⁻ᵀ g A⁻¹`.
    pub fn conjugated(&self, a: &DMatrix<f64>) -> Option<QTriple> {
        let inv = a.clone().try_inverse()?;
        let c = |s: &DMatrix<f64>| a * s * &inv;
        Some(QTriple { i: c(&self.i), j: c(&self.j), k: c(&self.k), g: inv.transpose() * &self.g * &inv })
    }
}

/// `ω(X, Y) = ⟨SX, Y⟩` as the antisymmetric matrix `Sᵀg`.
pub fn two_form_of(s: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    let residual = (s * s + DMatrix::identity(n, n)).amax().max((s.transpose() * g * s - g).amax());
    if residual > 1e-8 {
        return Err(GeomError::InvalidComplexStructure { which: "S".into(), point: Vec::new(), residual });
    }
    Ok(s.transpose() * g)
}

/// Raw and normalized Kraines form of a triple.
#[derive(Clone, Debug)]
pub struct Kraines {
    pub raw: AltForm,
    pub normalized: AltForm,
}

pub fn kraines(t: &QTriple) -> Result<Kraines> {
    let mut raw = AltForm::zeros(t.dim(), 4);
    for s in t.members() {
        let w = AltForm::from_matrix(&two_form_of(s, &t.g)?);
        raw = raw.add(&wedge(&w, &w));
    }
    let normalized = raw.scaled(KRAINES_NORMALIZATION);
    Ok(Kraines { raw, normalized })
}

fn isometry_residual(a: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
    (a.transpose() * g * a - g).amax()
}

fn require_isometry(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<()> {
    let r = isometry_residual(a, g);
    if r > 1e-8 {
        return Err(GeomError::Precondition(format!("map is not an isometry (residual {r:.3e})")));
    }
    Ok(())
}

/// g-orthogonal projector onto the column span of `b`.
fn projector(b: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let gram = b.transpose() * g * b;
    let inv = gram.try_inverse().expect("spanning set must be independent");
    b * inv * b.transpose() * g
}

fn line_basis(x: &DVector<f64>, t: &QTriple) -> DMatrix<f64> {
    DMatrix::from_columns(&[x.clone(), &t.i * x, &t.j * x, &t.k * x])
}

/// Whether `A` maps every quaternionic line `span{X, IX, JX, KX}` of a basis
/// vector onto the quaternionic line of `AX`; returns the largest projector
/// distance.
pub fn in_gn(a: &DMatrix<f64>, t: &QTriple, tol: f64) -> Result<(bool, f64)> {
    require_isometry(a, &t.g)?;
    let n = t.dim();
    let mut worst: f64 = 0.0;
    for c in 0..n {
        let x = DVector::from_fn(n, |r, _| (r == c) as u8 as f64);
        let image = a * line_basis(&x, t);
        let target = line_basis(&(a * &x), t);
        worst = worst.max((projector(&image, &t.g) - projector(&target, &t.g)).norm());
    }
    Ok((worst < tol, worst))
}

/// Largest `|Ω(A·, A·, A·, A·) − Ω|` over basis 4-tuples (raw Kraines form).
pub fn isotropy_check(a: &DMatrix<f64>, t: &QTriple) -> Result<f64> {
    require_isometry(a, &t.g)?;
    let omega = kraines(t)?.raw;
    let mut pulled = AltForm::zeros(t.dim(), 4);
    for s in t.members() {
        // (A*ω)(X, Y) = ω(AX, AY)
        let w = a.transpose() * two_form_of(s, &t.g)? * a;
        let w = AltForm::from_matrix(&w);
        pulled = pulled.add(&wedge(&w, &w));
    }
    Ok(pulled.sub(&omega).max_abs())
}

/// Result of comparing the normalized Kraines form with `4·det` of the
/// line coefficients.
#[derive(Clone, Copy, Debug)]
pub struct LineLemma {
    pub det: f64,
    pub max_z: f64,
    pub omega_normalized: f64,
    /// `|Ω_normalized(Y, Y1, Y2, Y3) − 4 det|`.
    pub residual: f64,
}

pub fn line_lemma_check(y: &DVector<f64>, ys: [&DVector<f64>; 3], t: &QTriple) -> Result<LineLemma> {
    let g = &t.g;
    let all = [y, ys[0], ys[1], ys[2]];
    let mut orth: f64 = 0.0;
    for (a, u) in all.iter().enumerate() {
        for (b, w) in all.iter().enumerate() {
            let ip = (u.transpose() * g * *w)[(0, 0)];
            orth = orth.max((ip - (a == b) as u8 as f64).abs());
        }
    }
    if orth > 1e-8 {
        return Err(GeomError::Precondition(format!("frame is not orthonormal (residual {orth:.3e})")));
    }
    let q = [&t.i * y, &t.j * y, &t.k * y];
    let mut coeff = Matrix3::zeros();
    let mut max_z: f64 = 0.0;
    for (r, yj) in ys.iter().enumerate() {
        let mut z = (*yj).clone();
        for (c, qc) in q.iter().enumerate() {
            let a = (qc.transpose() * g * *yj)[(0, 0)];
            coeff[(r, c)] = a;
            z -= qc * a;
        }
        max_z = max_z.max((z.transpose() * g * &z)[(0, 0)].sqrt());
    }
    let det = coeff.determinant();
    let omega = kraines(t)?.normalized;
    let cols: Vec<Vec<f64>> = all.iter().map(|v| v.iter().copied().collect()).collect();
    let omega_normalized = omega.eval(&[&cols[0], &cols[1], &cols[2], &cols[3]]);
    Ok(LineLemma { det, max_z, omega_normalized, residual: (omega_normalized - 4.0 * det).abs() })
}

/// Basis of the g-skew endomorphisms commuting with `I` and `J`.
pub fn commutant_basis(t: &QTriple) -> Vec<DMatrix<f64>> {
    let n = t.dim();
    let ginv = t.g.clone().try_inverse().expect("metric must be invertible");
    let mut skew = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            let mut s = DMatrix::zeros(n, n);
            s[(p, q)] = 1.0;
            s[(q, p)] = -1.0;
            skew.push(&ginv * s);
        }
    }
    let rows = 2 * n * n;
    let mut m = DMatrix::zeros(rows, skew.len());
    for (c, b) in skew.iter().enumerate() {
        let ci = b * &t.i - &t.i * b;
        let cj = b * &t.j - &t.j * b;
        for (r, v) in ci.iter().chain(cj.iter()).enumerate() {
            m[(r, c)] = *v;
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max();
    let mut out = Vec::new();
    for (r, s) in svd.singular_values.iter().enumerate() {
        if *s <= 1e-10 * smax.max(1.0) {
            let mut b = DMatrix::zeros(n, n);
            for (c, basis) in skew.iter().enumerate() {
                b += basis * v_t[(r, c)];
            }
            out.push(b);
        }
    }
    out
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// `exp(a)·exp(b)` with `a` a random element of `span{I, J, K}` and `b` a
/// random element of the commutant `sp(n)`.
pub fn sample_gn<R: Rng + ?Sized>(t: &QTriple, commutant: &[DMatrix<f64>], rng: &mut R) -> DMatrix<f64> {
    let n = t.dim();
    let mut a = DMatrix::zeros(n, n);
    for s in t.members() {
        a += s * gaussian(rng);
    }
    let mut b = DMatrix::zeros(n, n);
    for c in commutant {
        b += c * gaussian(rng);
    }
    a.exp() * b.exp()
}

/// `exp(B)` for a random g-skew `B` with independent standard normal entries.
pub fn sample_isometry<R: Rng + ?Sized>(g: &DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
    let n = g.nrows();
    let mut s = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in p + 1..n {
            let v = gaussian(rng);
            s[(p, q)] = v;
            s[(q, p)] = -v;
        }
    }
    let ginv = g.clone().try_inverse().expect("metric must be invertible");
    (ginv * s).exp()
}

/// Uniformly distributed rotation of R³.
pub fn sample_rotation3<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    let q = Quaternion::new(gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng));
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

/// `vol = s·√det g · e⁰∧e¹∧e²∧e³` on R⁴ with orientation sign `s`.
pub fn volume_form(g: &DMatrix<f64>, orientation: f64) -> AltForm {
    let v = orientation.signum() * g.determinant().sqrt();
    AltForm::from_fn(4, 4, |_| v)
}

fn ip(u: &DVector<f64>, w: &DVector<f64>, g: &DMatrix<f64>) -> f64 {
    (u.transpose() * g * w)[(0, 0)]
}

fn require_unit(u: &DVector<f64>, g: &DMatrix<f64>, what: &str) -> Result<()> {
    let n = ip(u, u, g);
    if (n - 1.0).abs() > 1e-10 {
        return Err(GeomError::Precondition(format!("{what} must be a unit vector (norm² {n})")));
    }
    Ok(())
}

/// `A₁ × A₂` with `⟨A₁×A₂, A₃⟩ = vol(U, A₁, A₂, A₃)`.
fn cross(u: &DVector<f64>, a1: &DVector<f64>, a2: &DVector<f64>, g: &DMatrix<f64>, vol: &AltForm) -> DVector<f64> {
    let (uu, x1, x2): (Vec<f64>, Vec<f64>, Vec<f64>) =
        (u.iter().copied().collect(), a1.iter().copied().collect(), a2.iter().copied().collect());
    let w = DVector::from_fn(4, |c, _| {
        let e: Vec<f64> = (0..4).map(|r| (r == c) as u8 as f64).collect();
        vol.eval(&[&uu, &x1, &x2, &e])
    });
    g.clone().try_inverse().expect("metric must be invertible") * w
}

/// The product on R⁴ with unit `U`:
/// `X₁·X₂ = (λ₁λ₂ − ⟨A₁,A₂⟩)U + λ₁A₂ + λ₂A₁ + A₁×A₂` for `Xᵢ = λᵢU + Aᵢ`.
pub fn dim4_product(
    u: &DVector<f64>,
    x1: &DVector<f64>,
    x2: &DVector<f64>,
    g: &DMatrix<f64>,
    vol: &AltForm,
) -> Result<DVector<f64>> {
    require_unit(u, g, "U")?;
    let l1 = ip(x1, u, g);
    let l2 = ip(x2, u, g);
    let a1 = x1 - u * l1;
    let a2 = x2 - u * l2;
    let c = cross(u, &a1, &a2, g, vol);
    Ok(u * (l1 * l2 - ip(&a1, &a2, g)) + &a2 * l1 + &a1 * l2 + c)
}

/// Matrix of `X ↦ v·X` for the product of [`dim4_product`].
pub fn dim4_left_matrix(u: &DVector<f64>, v: &DVector<f64>, g: &DMatrix<f64>, vol: &AltForm) -> Result<DMatrix<f64>> {
    let mut cols = Vec::with_capacity(4);
    for c in 0..4 {
        let e = DVector::from_fn(4, |r, _| (r == c) as u8 as f64);
        cols.push(dim4_product(u, v, &e, g, vol)?);
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Hodge star of a 2-form on R⁴: `(*α)_{cd} = ½ α^{ab} vol_{abcd}`.
pub fn hodge_star2(alpha: &AltForm, g: &DMatrix<f64>, vol: &AltForm) -> AltForm {
    let ginv = g.clone().try_inverse().expect("metric must be invertible");
    let a = alpha.to_matrix();
    let raised = &ginv * a * ginv.transpose();
    AltForm::from_fn(4, 2, |t| {
        let mut s = 0.0;
        for p in 0..4 {
            for q in 0..4 {
                s += raised[(p, q)] * vol.get(&[p, q, t[0], t[1]]);
            }
        }
        0.5 * s
    })
}

/// The 2-form of left multiplication by a unit `v ⊥ U`.
pub fn dim4_omega(u: &DVector<f64>, v: &DVector<f64>, g: &DMatrix<f64>, vol: &AltForm) -> Result<AltForm> {
    require_unit(u, g, "U")?;
    require_unit(v, g, "v")?;
    if ip(u, v, g).abs() > 1e-10 {
        return Err(GeomError::Precondition("v must be orthogonal to U".into()));
    }
    let l = dim4_left_matrix(u, v, g, vol)?;
    Ok(AltForm::from_matrix(&two_form_of(&l, g)?))
}

/// `U♭∧v♭ + *(U♭∧v♭)`.
pub fn dim4_omega_formula(u: &DVector<f64>, v: &DVector<f64>, g: &DMatrix<f64>, vol: &AltForm) -> AltForm {
    let ub = g * u;
    let vb = g * v;
    let uv = AltForm::from_fn(4, 2, |t| ub[t[0]] * vb[t[1]] - ub[t[1]] * vb[t[0]]);
    uv.add(&hodge_star2(&uv, g, vol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hamilton_products() {
        let i = Quaternion::new(0.0, 1.0, 0.0, 0.0);
        let j = Quaternion::new(0.0, 0.0, 1.0, 0.0);
        assert_eq!(quat_mul(&i, &j), Quaternion::new(0.0, 0.0, 0.0, 1.0));
        let p = Quaternion::new(0.3, -1.2, 0.5, 2.0);
        assert_eq!(quat_mul(&p, &Quaternion::identity()), p);
        let a = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let b = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(quat_mul(&a, &b), Quaternion::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn standard_triple_relations() {
        let t = standard_triple(1);
        assert_eq!(&t.i * &t.j, t.k);
        assert_eq!(&t.j * &t.i, -&t.k);
        assert_eq!(&t.i * &t.i, -DMatrix::<f64>::identity(4, 4));
        let t2 = standard_triple(2);
        for s in t2.members() {
            assert!((s.norm() - 8f64.sqrt()).abs() < 1e-14);
        }
        assert!(t2.residual() < 1e-15);
    }

    #[test]
    fn kraines_on_a_quaternionic_line() {
        let t = standard_triple(1);
        let k = kraines(&t).unwrap();
        let e = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let cols: Vec<Vec<f64>> =
            [e.clone(), &t.i * &e, &t.j * &e, &t.k * &e].iter().map(|v| v.iter().copied().collect()).collect();
        let vs = [cols[0].as_slice(), &cols[1], &cols[2], &cols[3]];
        assert!((k.raw.eval(&vs) - 6.0).abs() < 1e-14);
        assert!((k.normalized.eval(&vs) - 4.0).abs() < 1e-14);
        let rep = [cols[0].as_slice(), &cols[0], &cols[2], &cols[3]];
        assert_eq!(k.raw.eval(&rep), 0.0);
    }

    #[test]
    fn kraines_is_invariant_under_rotation_of_the_triple() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = standard_triple(2);
        let base = kraines(&t).unwrap().raw;
        for _ in 0..10 {
            let r = sample_rotation3(&mut rng);
            let rot = t.rotated(&r);
            assert!(rot.residual() < 1e-12);
            assert!(kraines(&rot).unwrap().raw.sub(&base).max_abs() < 1e-10);
        }
    }

    #[test]
    fn group_membership() {
        let t = standard_triple(2);
        let id = DMatrix::identity(8, 8);
        assert_eq!(in_gn(&id, &t, 1e-8).unwrap(), (true, 0.0));
        let sp1 = (&t.k * 0.8).exp();
        assert!(in_gn(&sp1, &t, 1e-8).unwrap().0);
        assert!(isotropy_check(&t.i, &t).unwrap() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let generic = sample_isometry(&t.g, &mut rng);
        let (inside, residual) = in_gn(&generic, &t, 1e-8).unwrap();
        assert!(!inside && residual > 1e-3);
        assert!(in_gn(&(&id * 2.0), &t, 1e-8).is_err());
    }

    #[test]
    fn commutant_is_sp_n() {
        assert_eq!(commutant_basis(&standard_triple(1)).len(), 3);
        assert_eq!(commutant_basis(&standard_triple(2)).len(), 10);
    }

    #[test]
    fn line_lemma_on_the_line_itself() {
        let t = standard_triple(1);
        let y = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
        let (iy, jy, ky) = (&t.i * &y, &t.j * &y, &t.k * &y);
        let r = line_lemma_check(&y, [&iy, &jy, &ky], &t).unwrap();
        assert!((r.det - 1.0).abs() < 1e-14 && r.max_z < 1e-14);
        assert!((r.omega_normalized - 4.0).abs() < 1e-14);
        let s = line_lemma_check(&y, [&jy, &iy, &ky], &t).unwrap();
        assert!((s.det + 1.0).abs() < 1e-14 && (s.omega_normalized + 4.0).abs() < 1e-14);
        assert!(line_lemma_check(&y, [&iy, &iy, &ky], &t).is_err());
    }

    #[test]
    fn dim4_product_is_quaternion_multiplication() {
        let g = DMatrix::identity(4, 4);
        let vol = volume_form(&g, 1.0);
        let u = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(dim4_product(&u, &u, &u, &g, &vol).unwrap(), u);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = Quaternion::new(gaussian(&mut rng), gaussian(&mut rng), gaussian(&mut rng), gaussian(&mut rng));
            let q = Quaternion::new(gaussian(&mut rng), gaussian(&mut rng), gaussian(&mut rng), gaussian(&mut rng));
            let v = |a: &Quaternion| DVector::from_vec(vec![a.w, a.i, a.j, a.k]);
            let got = dim4_product(&u, &v(&p), &v(&q), &g, &vol).unwrap();
            assert!((got - v(&quat_mul(&p, &q))).amax() < 1e-12);
        }
    }

    #[test]
    fn dim4_omega_standard_case_is_self_dual() {
        let g = DMatrix::identity(4, 4);
        let vol = volume_form(&g, 1.0);
        let u = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let v = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        let w = dim4_omega(&u, &v, &g, &vol).unwrap();
        let expected = AltForm::from_fn(4, 2, |t| match (t[0], t[1]) {
            (0, 1) | (2, 3) => 1.0,
            _ => 0.0,
        });
        assert!(w.sub(&expected).max_abs() < 1e-15);
        assert!(hodge_star2(&w, &g, &vol).sub(&w).max_abs() < 1e-15);
        assert!(dim4_omega_formula(&u, &v, &g, &vol).sub(&w).max_abs() < 1e-15);
    }
}
