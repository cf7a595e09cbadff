use thiserror::Error;

use super::{BinOp, Expr, Func};
use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{subexpr}`: {reason} (argument {argument})")]
    Domain { subexpr: String, reason: &'static str, argument: f64 },
    #[error("variable x{index} is not bound (point has dimension {dim})")]
    UnboundVariable { index: usize, dim: usize },
}

/// Largest integer exponent evaluated by repeated multiplication.
const MAX_INT_POWER: f64 = 64.0;

/// Evaluates `e` at `x` with exact value, gradient and Hessian.
pub fn eval_jet2(e: &Expr, x: &[f64]) -> Result<Jet, EvalError> {
    eval_jet(e, x, 2)
}

/// Evaluates `e` at `x` as a jet of the given order in `x.len()` variables.
pub fn eval_jet(e: &Expr, x: &[f64], order: u8) -> Result<Jet, EvalError> {
    let n = x.len();
    Evaluator { x, n, order }.go(e)
}

/// Plain value of `e` at `x`.
pub fn eval(e: &Expr, x: &[f64]) -> Result<f64, EvalError> {
    eval_jet(e, x, 0).map(|j| j.value())
}

struct Evaluator<'a> {
    x: &'a [f64],
    n: usize,
    order: u8,
}

impl Evaluator<'_> {
    fn constant(&self, v: f64) -> Jet {
        Jet::constant(v, self.n, self.order)
    }

    fn domain(e: &Expr, reason: &'static str, argument: f64) -> EvalError {
        EvalError::Domain { subexpr: e.to_string(), reason, argument }
    }

    fn go(&self, e: &Expr) -> Result<Jet, EvalError> {
        Ok(match e {
            Expr::Num(v) => self.constant(*v),
            Expr::Pi => self.constant(std::f64::consts::PI),
            Expr::E => self.constant(std::f64::consts::E),
            Expr::Var(i) => {
                if *i >= self.n {
                    return Err(EvalError::UnboundVariable { index: i + 1, dim: self.n });
                }
                Jet::variable(self.x[*i], *i, self.n, self.order)
            }
            Expr::Neg(a) => -self.go(a)?,
            Expr::Binary(op, a, b) => {
                let lhs = self.go(a)?;
                match op {
                    BinOp::Add => lhs + self.go(b)?,
                    BinOp::Sub => lhs - self.go(b)?,
                    BinOp::Mul => lhs * self.go(b)?,
                    BinOp::Div => {
                        let rhs = self.go(b)?;
                        if rhs.value() == 0.0 || !rhs.value().is_finite() {
                            return Err(Self::domain(e, "division by zero", rhs.value()));
                        }
                        lhs / rhs
                    }
                    BinOp::Pow => self.power(e, lhs, b)?,
                }
            }
            Expr::Call(f, a) => {
                let arg = self.go(a)?;
                let v = arg.value();
                match f {
                    Func::Sin => arg.sin(),
                    Func::Cos => arg.cos(),
                    Func::Tan => {
                        if v.cos().abs() < 1e-300 {
                            return Err(Self::domain(e, "tan pole", v));
                        }
                        arg.tan()
                    }
                    Func::Exp => arg.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(Self::domain(e, "log of non-positive value", v));
                        }
                        arg.ln()
                    }
                    Func::Sqrt => {
                        if v <= 0.0 {
                            return Err(Self::domain(e, "sqrt of non-positive value", v));
                        }
                        arg.sqrt()
                    }
                    Func::Sinh => arg.sinh(),
                    Func::Cosh => arg.cosh(),
                    Func::Tanh => arg.tanh(),
                    Func::Atan => arg.atan(),
                }
            }
        })
    }

    fn power(&self, whole: &Expr, base: Jet, exponent: &Expr) -> Result<Jet, EvalError> {
        if let Some(k) = exponent.as_constant() {
            if k.fract() == 0.0 && k.abs() <= MAX_INT_POWER {
                if k < 0.0 && base.value() == 0.0 {
                    return Err(Self::domain(whole, "negative power of zero", 0.0));
                }
                return Ok(base.powi(k as i32));
            }
        }
        // a^b = exp(b log a), defined for a > 0 only
        if base.value() <= 0.0 {
            return Err(Self::domain(whole, "non-integer power of non-positive base", base.value()));
        }
        let b = self.go(exponent)?;
        Ok((b * base.ln()).exp())
    }
}
