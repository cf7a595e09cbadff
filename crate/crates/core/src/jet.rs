//! Truncated multivariate Taylor expansions ("jets") of order at most two.
//!
//! A [`Jet`] carries a value together with its gradient and, at order two,
//! its (symmetric) Hessian with respect to `nvars` independent variables.
//! Arithmetic propagates derivatives exactly by the chain and product rules,
//! so every geometric quantity assembled from jets carries exact partial
//! derivatives instead of finite-difference estimates.
//!
//! Mixing jets of different order yields the lower order.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    nvars: usize,
    order: u8,
}

impl Jet {
    pub fn constant(value: f64, nvars: usize, order: u8) -> Self {
        assert!(order <= 2, "jet order must be 0, 1 or 2");
        let grad = if order >= 1 { vec![0.0; nvars] } else { Vec::new() };
        let hess = if order == 2 { vec![0.0; nvars * nvars] } else { Vec::new() };
        Jet { value, grad, hess, nvars, order }
    }

    /// The coordinate function `x_index`, evaluated at `value`.
    pub fn variable(value: f64, index: usize, nvars: usize, order: u8) -> Self {
        assert!(index < nvars);
        let mut j = Jet::constant(value, nvars, order);
        if order >= 1 {
            j.grad[index] = 1.0;
        }
        j
    }

    /// Builds a jet from explicit data; `hess` is row-major `nvars x nvars`.
    pub fn from_parts(value: f64, grad: Vec<f64>, hess: Option<Vec<f64>>) -> Self {
        let nvars = grad.len();
        match hess {
            Some(h) => {
                assert_eq!(h.len(), nvars * nvars);
                Jet { value, grad, hess: h, nvars, order: 2 }
            }
            None => Jet { value, grad, hess: Vec::new(), nvars, order: 1 },
        }
    }

    pub fn zero_like(&self) -> Self {
        Jet::constant(0.0, self.nvars, self.order)
    }

    pub fn constant_like(&self, c: f64) -> Self {
        Jet::constant(c, self.nvars, self.order)
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn order(&self) -> u8 {
        self.order
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// First partial derivative along variable `i`; zero for order-0 jets.
    #[inline]
    pub fn d(&self, i: usize) -> f64 {
        if self.order >= 1 {
            self.grad[i]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        if self.order == 2 {
            self.hess[i * self.nvars + j]
        } else {
            0.0
        }
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        (0..self.nvars)
            .map(|i| (0..self.nvars).map(|j| self.d2(i, j)).collect())
            .collect()
    }

    /// The partial derivative `∂f/∂x_i` as a jet of one lower order.
    pub fn partial(&self, i: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.nvars;
        if self.order == 2 {
            Jet {
                value: self.grad[i],
                grad: self.hess[i * n..(i + 1) * n].to_vec(),
                hess: Vec::new(),
                nvars: n,
                order: 1,
            }
        } else {
            Jet::constant(self.grad[i], n, 0)
        }
    }

    pub fn truncate(&self, order: u8) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        let mut j = self.clone();
        j.order = order;
        if order < 2 {
            j.hess.clear();
        }
        if order < 1 {
            j.grad.clear();
        }
        j
    }

    /// Re-expresses the jet in a larger variable set where the current
    /// variables occupy positions `offset..offset + nvars`.
    pub fn embed(&self, nvars_total: usize, offset: usize) -> Jet {
        assert!(offset + self.nvars <= nvars_total);
        let mut out = Jet::constant(self.value, nvars_total, self.order);
        if self.order >= 1 {
            out.grad[offset..offset + self.nvars].copy_from_slice(&self.grad);
        }
        if self.order == 2 {
            for i in 0..self.nvars {
                for j in 0..self.nvars {
                    out.hess[(offset + i) * nvars_total + offset + j] = self.hess[i * self.nvars + j];
                }
            }
        }
        out
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// the current value.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let n = self.nvars;
        let mut out = Jet::constant(f0, n, self.order);
        if self.order >= 1 {
            for i in 0..n {
                out.grad[i] = f1 * self.grad[i];
            }
        }
        if self.order == 2 {
            for i in 0..n {
                for j in 0..n {
                    out.hess[i * n + j] = f1 * self.hess[i * n + j] + f2 * self.grad[i] * self.grad[j];
                }
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.value *= c;
        out.grad.iter_mut().for_each(|g| *g *= c);
        out.hess.iter_mut().for_each(|h| *h *= c);
        out
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, c: f64, other: &Jet) {
        let order = self.order.min(other.order);
        self.align_order(order);
        self.value += c * other.value;
        if order >= 1 {
            for (a, b) in self.grad.iter_mut().zip(&other.grad) {
                *a += c * b;
            }
        }
        if order == 2 {
            for (a, b) in self.hess.iter_mut().zip(&other.hess) {
                *a += c * b;
            }
        }
    }

    /// `self += a * b` without building the temporary product.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        let order = self.order.min(a.order).min(b.order);
        self.align_order(order);
        let n = self.nvars;
        self.value += a.value * b.value;
        if order >= 1 {
            for i in 0..n {
                self.grad[i] += a.value * b.grad[i] + b.value * a.grad[i];
            }
        }
        if order == 2 {
            for i in 0..n {
                for j in 0..n {
                    let k = i * n + j;
                    self.hess[k] += a.value * b.hess[k]
                        + b.value * a.hess[k]
                        + a.grad[i] * b.grad[j]
                        + b.grad[i] * a.grad[j];
                }
            }
        }
    }

    fn align_order(&mut self, order: u8) {
        if order < self.order {
            *self = self.truncate(order);
        }
    }

    pub fn recip(&self) -> Jet {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Jet {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn sinh(&self) -> Jet {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(&self) -> Jet {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(&self) -> Jet {
        let t = self.value.tanh();
        let d = 1.0 - t * t;
        self.chain(t, d, -2.0 * t * d)
    }

    pub fn atan(&self) -> Jet {
        let v = self.value;
        let d = 1.0 / (1.0 + v * v);
        self.chain(v.atan(), d, -2.0 * v * d * d)
    }

    pub fn powi(&self, k: i32) -> Jet {
        let v = self.value;
        let f0 = v.powi(k);
        let f1 = if k == 0 { 0.0 } else { k as f64 * v.powi(k - 1) };
        let f2 = if k == 0 || k == 1 { 0.0 } else { (k * (k - 1)) as f64 * v.powi(k - 2) };
        self.chain(f0, f1, f2)
    }

    fn combine(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.nvars, other.nvars, "jets live in different variable sets");
        let order = self.order.min(other.order);
        let mut out = Jet::constant(f(self.value, other.value), self.nvars, order);
        if order >= 1 {
            for i in 0..self.nvars {
                out.grad[i] = f(self.grad[i], other.grad[i]);
            }
        }
        if order == 2 {
            for k in 0..self.hess.len() {
                out.hess[k] = f(self.hess[k], other.hess[k]);
            }
        }
        out
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.combine(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.combine(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert_eq!(self.nvars, rhs.nvars, "jets live in different variable sets");
        let order = self.order.min(rhs.order);
        let mut out = Jet::constant(0.0, self.nvars, order);
        out.add_product(self, rhs);
        out
    }
}

impl Div for &Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.value += rhs;
        out
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.add_scaled(1.0, rhs);
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.add_scaled(-1.0, rhs);
    }
}

/// Square matrix of jets stored row-major.
#[derive(Clone, Debug)]
pub struct JetMatrix {
    n: usize,
    data: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Jet) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        JetMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.data[i * self.n + j]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Jet {
        &mut self.data[i * self.n + j]
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        JetMatrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn values(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).value())
    }

    /// Matrix of `∂/∂x_k` values.
    pub fn derivative_values(&self, k: usize) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).d(k))
    }

    pub fn matmul(&self, other: &JetMatrix) -> JetMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        JetMatrix::from_fn(n, |i, j| {
            let mut acc = self.get(i, 0).zero_like();
            for k in 0..n {
                acc.add_product(self.get(i, k), other.get(k, j));
            }
            acc
        })
    }

    pub fn transpose(&self) -> JetMatrix {
        JetMatrix::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    /// Inverse of an order <= 1 jet matrix via `d(A⁻¹) = -A⁻¹ dA A⁻¹`.
    pub fn inverse(&self) -> Option<JetMatrix> {
        let n = self.n;
        let first = self.get(0, 0);
        let (nvars, order) = (first.nvars(), first.order());
        assert!(order <= 1, "jet matrix inverse supports order <= 1");
        let inv = self.values().try_inverse()?;
        let mut grads: Vec<nalgebra::DMatrix<f64>> = Vec::new();
        if order == 1 {
            for k in 0..nvars {
                grads.push(-(&inv * self.derivative_values(k) * &inv));
            }
        }
        Some(JetMatrix::from_fn(n, |i, j| {
            if order == 1 {
                Jet::from_parts(inv[(i, j)], grads.iter().map(|g| g[(i, j)]).collect(), None)
            } else {
                Jet::constant(inv[(i, j)], nvars, 0)
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_second_order() {
        // f = x0 * x1 at (2, 3)
        let x = Jet::variable(2.0, 0, 2, 2);
        let y = Jet::variable(3.0, 1, 2, 2);
        let f = &x * &y;
        assert_eq!(f.value(), 6.0);
        assert_eq!(f.grad(), &[3.0, 2.0]);
        assert_eq!(f.hessian(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn partial_lowers_order() {
        let x = Jet::variable(1.5, 0, 1, 2);
        let f = x.powi(3);
        let df = f.partial(0);
        assert_eq!(df.order(), 1);
        assert!((df.value() - 3.0 * 1.5 * 1.5).abs() < 1e-14);
        assert!((df.d(0) - 6.0 * 1.5).abs() < 1e-14);
    }

    #[test]
    fn embed_places_derivatives() {
        let x = Jet::variable(0.5, 1, 2, 2).sin();
        let e = x.embed(5, 2);
        assert_eq!(e.d(3), 0.5f64.cos());
        assert_eq!(e.d(1), 0.0);
        assert_eq!(e.d2(3, 3), -0.5f64.sin());
    }

    #[test]
    fn matrix_inverse_derivative() {
        // A(t) = [[1 + t, 0], [t, 2]]
        let t = Jet::variable(0.3, 0, 1, 1);
        let one = t.constant_like(1.0);
        let a = JetMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => &one + &t,
            (1, 0) => t.clone(),
            (1, 1) => t.constant_like(2.0),
            _ => t.zero_like(),
        });
        let inv = a.inverse().unwrap();
        // (1 + t)^-1 has derivative -(1 + t)^-2
        assert!((inv.get(0, 0).d(0) + 1.0 / (1.3f64 * 1.3)).abs() < 1e-14);
        // entry (1,0) = -t / (2 (1 + t)), derivative -1 / (2 (1 + t)^2)
        assert!((inv.get(1, 0).d(0) + 0.5 / (1.3f64 * 1.3)).abs() < 1e-14);
    }
}
