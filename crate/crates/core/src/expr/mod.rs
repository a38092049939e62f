//! Symbolic expression core.
//!
//! Expressions are immutable trees over exact rational constants, variables,
//! n-ary sums and products, rational powers and a fixed set of unary kernels
//! `{exp, sin, cos, ln, sqrt}`. All operations are pure functions; sharing
//! between threads is safe.

mod calculus;
mod display;
mod eval;
pub(crate) mod normal;
mod zero;

pub use calculus::{differentiate, euler_lagrange, substitute, total_time_derivative};
pub use display::pretty;
pub use eval::{evaluate, Point};
pub use zero::{is_zero, residual_check, Verdict, ZeroCheck, ZeroSettings};

use num::{BigInt, BigRational, One, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

/// A variable of the mechanical setting.
///
/// Identity is the kind plus the coordinate index; display names for
/// coordinates are supplied externally when printing. The derived `Ord` is
/// the fixed total order used everywhere (parameters sort first so that
/// monomials print coefficient-like factors before dynamical ones).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    /// Named symbolic parameter (`w`, `b`, ...).
    Param(String),
    /// The time variable `t`.
    Time,
    /// Coordinate `x_i`, 1-based.
    Coord(u32),
    /// Velocity `x'_i`.
    Vel(u32),
    /// Acceleration `x''_i`.
    Accel(u32),
    /// Third derivative `x'''_i`; never accepted in user input, arises only
    /// from total time derivatives of acceleration-dependent expressions.
    Jerk(u32),
}

impl Variable {
    pub fn param(name: &str) -> Self {
        Variable::Param(name.to_string())
    }

    /// Coordinate index for indexed kinds.
    pub fn index(&self) -> Option<u32> {
        match self {
            Variable::Coord(i) | Variable::Vel(i) | Variable::Accel(i) | Variable::Jerk(i) => {
                Some(*i)
            }
            _ => None,
        }
    }

    pub fn is_jerk(&self) -> bool {
        matches!(self, Variable::Jerk(_))
    }

    /// The variable one time-derivative order up, if representable.
    pub(crate) fn raised(&self) -> Option<Variable> {
        match self {
            Variable::Coord(i) => Some(Variable::Vel(*i)),
            Variable::Vel(i) => Some(Variable::Accel(*i)),
            Variable::Accel(i) => Some(Variable::Jerk(*i)),
            _ => None,
        }
    }

    /// Display name; coordinate names come from `coords`, falling back to
    /// `x{i}` when no context is available.
    pub fn display_with(&self, coords: &[String]) -> String {
        let base = |i: &u32| -> String {
            coords
                .get((*i - 1) as usize)
                .cloned()
                .unwrap_or_else(|| format!("x{i}"))
        };
        match self {
            Variable::Param(s) => s.clone(),
            Variable::Time => "t".to_string(),
            Variable::Coord(i) => base(i),
            Variable::Vel(i) => format!("{}'", base(i)),
            Variable::Accel(i) => format!("{}''", base(i)),
            Variable::Jerk(i) => format!("{}'''", base(i)),
        }
    }
}

impl std::fmt::Display for Variable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.display_with(&[]))
    }
}

/// The fixed kernel set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KernelFn {
    Exp,
    Sin,
    Cos,
    Ln,
    Sqrt,
}

impl KernelFn {
    pub fn name(self) -> &'static str {
        match self {
            KernelFn::Exp => "exp",
            KernelFn::Sin => "sin",
            KernelFn::Cos => "cos",
            KernelFn::Ln => "ln",
            KernelFn::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(KernelFn::Exp),
            "sin" => Some(KernelFn::Sin),
            "cos" => Some(KernelFn::Cos),
            "ln" => Some(KernelFn::Ln),
            "sqrt" => Some(KernelFn::Sqrt),
            _ => None,
        }
    }
}

/// Immutable symbolic expression tree.
///
/// Constants are exact rationals; no floating point enters the tree.
/// [`Expr::normalize`] produces the deterministic canonical form (flattened,
/// constant-folded, distributively expanded where polynomial, ordered by the
/// derived total order on nodes).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Expr {
    Const(BigRational),
    Var(Variable),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// Base raised to an exact rational exponent.
    Power(Box<Expr>, BigRational),
    Kernel(KernelFn, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Self {
        Expr::Const(BigRational::zero())
    }

    pub fn one() -> Self {
        Expr::Const(BigRational::one())
    }

    pub fn int(k: i64) -> Self {
        Expr::Const(BigRational::from_integer(BigInt::from(k)))
    }

    /// Exact rational constant `n/d`. Panics if `d == 0`.
    pub fn rational(n: i64, d: i64) -> Self {
        Expr::Const(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(v: Variable) -> Self {
        Expr::Var(v)
    }

    pub fn time() -> Self {
        Expr::Var(Variable::Time)
    }

    pub fn coord(i: u32) -> Self {
        Expr::Var(Variable::Coord(i))
    }

    pub fn vel(i: u32) -> Self {
        Expr::Var(Variable::Vel(i))
    }

    pub fn accel(i: u32) -> Self {
        Expr::Var(Variable::Accel(i))
    }

    pub fn jerk(i: u32) -> Self {
        Expr::Var(Variable::Jerk(i))
    }

    pub fn param(name: &str) -> Self {
        Expr::Var(Variable::param(name))
    }

    pub fn exp(e: Expr) -> Self {
        Expr::Kernel(KernelFn::Exp, Box::new(e))
    }

    pub fn sin(e: Expr) -> Self {
        Expr::Kernel(KernelFn::Sin, Box::new(e))
    }

    pub fn cos(e: Expr) -> Self {
        Expr::Kernel(KernelFn::Cos, Box::new(e))
    }

    pub fn ln(e: Expr) -> Self {
        Expr::Kernel(KernelFn::Ln, Box::new(e))
    }

    pub fn sqrt(e: Expr) -> Self {
        Expr::Kernel(KernelFn::Sqrt, Box::new(e))
    }

    pub fn pow_int(self, k: i64) -> Self {
        Expr::Power(Box::new(self), BigRational::from_integer(BigInt::from(k)))
    }

    pub fn pow_rational(self, n: i64, d: i64) -> Self {
        Expr::Power(Box::new(self), BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn recip(self) -> Self {
        self.pow_int(-1)
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_const_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    /// Deterministic canonical form; idempotent.
    pub fn normalize(&self) -> Expr {
        normal::normalize(self)
    }

    /// All variables occurring in the tree.
    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Sum(xs) | Expr::Product(xs) => {
                for x in xs {
                    x.collect_vars(out);
                }
            }
            Expr::Power(b, _) => b.collect_vars(out),
            Expr::Kernel(_, a) => a.collect_vars(out),
        }
    }

    pub fn contains(&self, v: &Variable) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(u) => u == v,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(|x| x.contains(v)),
            Expr::Power(b, _) => b.contains(v),
            Expr::Kernel(_, a) => a.contains(v),
        }
    }

    pub fn contains_jerk(&self) -> bool {
        self.any_var(&|v| v.is_jerk())
    }

    pub fn contains_accel(&self) -> bool {
        self.any_var(&|v| matches!(v, Variable::Accel(_)))
    }

    fn any_var(&self, pred: &dyn Fn(&Variable) -> bool) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => pred(v),
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(|x| x.any_var(pred)),
            Expr::Power(b, _) => b.any_var(pred),
            Expr::Kernel(_, a) => a.any_var(pred),
        }
    }

    /// Render with coordinate display names.
    pub fn pretty(&self, coords: &[String]) -> String {
        display::pretty(self, coords)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, -rhs])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Product(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Product(vec![self, rhs.recip()])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Product(vec![Expr::int(-1), self])
    }
}


/// Errors raised by expression operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExprError {
    #[error("expression already contains a third-order derivative")]
    JerkInInput,
    #[error("Lagrangian depends on accelerations or higher derivatives")]
    AccelerationInLagrangian,
    #[error("evaluation left the real domain: {0}")]
    EvaluationDomain(String),
    #[error("no value assigned for variable `{0}`")]
    UnassignedVariable(String),
}
