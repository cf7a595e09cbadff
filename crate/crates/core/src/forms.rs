//! Alternating multilinear forms stored on strictly increasing index tuples.
//!
//! Wedge products use the determinant convention: for 2-forms
//! `(α∧β)(a,b,c,d)` sums `α(J)β(K)` over the six ordered splits of
//! `{a,b,c,d}`, so `ω∧ω(a,b,c,d) = 2[ω_ab ω_cd − ω_ac ω_bd + ω_ad ω_bc]`.
//! The exterior derivative of coordinate components is
//! `(dα)_{a0..ak} = Σ_i (−1)^i ∂_{a_i} α_{a0..âi..ak}`, which matches the
//! same convention (`d(α∧β) = dα∧β + (−1)^p α∧dβ`).

use crate::jet::Jet;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Colexicographic rank of a strictly increasing tuple.
fn rank(tuple: &[usize]) -> usize {
    tuple.iter().enumerate().map(|(i, &c)| binomial(c, i + 1)).sum()
}

/// All strictly increasing `k`-tuples of `0..n`, in colex order.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); binomial(n, k)];
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return Vec::new();
    }
    loop {
        out[rank(&cur)] = cur.clone();
        // next lexicographic combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Sorts `idx` in place and returns the permutation sign, or `None` when an
/// index repeats.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AltForm<T = f64> {
    dim: usize,
    degree: usize,
    comps: Vec<T>,
}

impl<T: Clone> AltForm<T> {
    pub fn from_fn(dim: usize, degree: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let comps = increasing_tuples(dim, degree).iter().map(|t| f(t)).collect();
        AltForm { dim, degree, comps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Component on a strictly increasing tuple.
    pub fn sorted(&self, tuple: &[usize]) -> &T {
        &self.comps[rank(tuple)]
    }

    pub fn components(&self) -> &[T] {
        &self.comps
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> AltForm<U> {
        AltForm { dim: self.dim, degree: self.degree, comps: self.comps.iter().map(f).collect() }
    }
}

impl AltForm<f64> {
    pub fn zeros(dim: usize, degree: usize) -> Self {
        AltForm { dim, degree, comps: vec![0.0; binomial(dim, degree)] }
    }

    /// Component on an arbitrary index tuple, with sign.
    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut t = idx.to_vec();
        match sort_with_sign(&mut t) {
            Some(s) => s * self.comps[rank(&t)],
            None => 0.0,
        }
    }

    /// 2-form from an antisymmetric matrix (upper triangle is read).
    pub fn from_matrix(m: &nalgebra::DMatrix<f64>) -> Self {
        AltForm::from_fn(m.nrows(), 2, |t| m[(t[0], t[1])])
    }

    pub fn to_matrix(&self) -> nalgebra::DMatrix<f64> {
        assert_eq!(self.degree, 2);
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(&[i, j]))
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.comps.iter().zip(&other.comps).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        AltForm {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Evaluates the form on `degree` vectors.
    pub fn eval(&self, vectors: &[&[f64]]) -> f64 {
        assert_eq!(vectors.len(), self.degree);
        let tuples = increasing_tuples(self.dim, self.degree);
        let k = self.degree;
        let mut total = 0.0;
        for (t, c) in tuples.iter().zip(&self.comps) {
            if *c == 0.0 {
                continue;
            }
            let m = nalgebra::DMatrix::from_fn(k, k, |r, s| vectors[s][t[r]]);
            total += c * m.determinant();
        }
        total
    }

    /// Pull-back by a linear map `a`: `(a*α)(v..) = α(a v, ..)`.
    pub fn pullback(&self, a: &nalgebra::DMatrix<f64>) -> Self {
        let cols: Vec<Vec<f64>> = (0..self.dim).map(|j| a.column(j).iter().copied().collect()).collect();
        AltForm::from_fn(self.dim, self.degree, |t| {
            let vs: Vec<&[f64]> = t.iter().map(|&i| cols[i].as_slice()).collect();
            self.eval(&vs)
        })
    }
}

/// Splits a sorted tuple into (first part, rest) of sizes `p` and `len - p`,
/// calling `f(sign, first, rest)` for every split.
fn for_each_split(tuple: &[usize], p: usize, mut f: impl FnMut(f64, &[usize], &[usize])) {
    let n = tuple.len();
    for pick in increasing_tuples(n, p) {
        let mut first = Vec::with_capacity(p);
        let mut rest = Vec::with_capacity(n - p);
        let mut perm = Vec::with_capacity(n);
        let mut is_first = vec![false; n];
        for &i in &pick {
            is_first[i] = true;
        }
        for (i, &v) in tuple.iter().enumerate() {
            if is_first[i] {
                first.push(v);
            }
        }
        for (i, &v) in tuple.iter().enumerate() {
            if !is_first[i] {
                rest.push(v);
            }
        }
        perm.extend(pick.iter().copied());
        perm.extend((0..n).filter(|i| !is_first[*i]));
        let sign = sort_with_sign(&mut perm).expect("split is a permutation");
        f(sign, &first, &rest);
    }
}

/// Wedge product of real forms (determinant convention).
pub fn wedge(a: &AltForm, b: &AltForm) -> AltForm {
    assert_eq!(a.dim, b.dim);
    let (p, q) = (a.degree, b.degree);
    AltForm::from_fn(a.dim, p + q, |t| {
        let mut acc = 0.0;
        for_each_split(t, p, |s, first, rest| {
            acc += s * a.sorted(first) * b.sorted(rest);
        });
        acc
    })
}

/// Wedge product of jet-valued forms; derivatives follow the product rule.
pub fn wedge_jet(a: &AltForm<Jet>, b: &AltForm<Jet>) -> AltForm<Jet> {
    assert_eq!(a.dim, b.dim);
    let (p, q) = (a.degree, b.degree);
    let proto = a.comps[0].zero_like();
    AltForm::from_fn(a.dim, p + q, |t| {
        let mut acc = proto.clone();
        for_each_split(t, p, |s, first, rest| {
            let prod = a.sorted(first) * b.sorted(rest);
            acc.add_scaled(s, &prod);
        });
        acc
    })
}

/// Exterior derivative of a form whose components are first-order jets in
/// the coordinates of the underlying space.
pub fn exterior_derivative(a: &AltForm<Jet>) -> AltForm {
    let k = a.degree;
    AltForm::from_fn(a.dim, k + 1, |t| {
        let mut acc = 0.0;
        let mut rest = Vec::with_capacity(k);
        for i in 0..=k {
            rest.clear();
            rest.extend(t.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v));
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * a.sorted(&rest).d(t[i]);
        }
        acc
    })
}

pub fn values(a: &AltForm<Jet>) -> AltForm {
    a.map(|j| j.value())
}
