//! Pointwise numeric evaluation.

use super::{Expr, ExprError, KernelFn, Variable};
use num::ToPrimitive;
use std::collections::BTreeMap;

/// Finite real assignment for every variable of an expression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point {
    assignments: BTreeMap<Variable, f64>,
}

impl Point {
    pub fn new() -> Self {
        Point::default()
    }

    pub fn with(mut self, v: Variable, value: f64) -> Self {
        self.assignments.insert(v, value);
        self
    }

    pub fn set(&mut self, v: Variable, value: f64) {
        self.assignments.insert(v, value);
    }

    pub fn get(&self, v: &Variable) -> Option<f64> {
        self.assignments.get(v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &f64)> {
        self.assignments.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

/// IEEE double-precision value of `e` at `p` by structural recursion.
pub fn evaluate(e: &Expr, p: &Point) -> Result<f64, ExprError> {
    Ok(eval_scaled(e, p)?.0)
}

/// Evaluate and also report the largest absolute value attained by any
/// subexpression, used as the scale reference of the numeric zero test.
pub(crate) fn eval_scaled(e: &Expr, p: &Point) -> Result<(f64, f64), ExprError> {
    let mut scale = 0.0_f64;
    let v = eval_rec(e, p, &mut scale)?;
    Ok((v, scale))
}

fn eval_rec(e: &Expr, p: &Point, scale: &mut f64) -> Result<f64, ExprError> {
    let value = match e {
        Expr::Const(c) => c
            .to_f64()
            .ok_or_else(|| ExprError::EvaluationDomain("constant out of f64 range".into()))?,
        Expr::Var(v) => p
            .get(v)
            .ok_or_else(|| ExprError::UnassignedVariable(v.to_string()))?,
        Expr::Sum(xs) => {
            let mut acc = 0.0;
            for x in xs {
                acc += eval_rec(x, p, scale)?;
            }
            acc
        }
        Expr::Product(xs) => {
            let mut acc = 1.0;
            for x in xs {
                acc *= eval_rec(x, p, scale)?;
            }
            acc
        }
        Expr::Power(b, r) => {
            let base = eval_rec(b, p, scale)?;
            if r.is_integer() {
                let k = r
                    .to_integer()
                    .to_i64()
                    .ok_or_else(|| ExprError::EvaluationDomain("exponent overflow".into()))?;
                if base == 0.0 && k < 0 {
                    return Err(ExprError::EvaluationDomain(
                        "zero raised to a negative power".into(),
                    ));
                }
                if let Ok(ki) = i32::try_from(k) {
                    base.powi(ki)
                } else {
                    base.powf(k as f64)
                }
            } else {
                let exp = r
                    .to_f64()
                    .ok_or_else(|| ExprError::EvaluationDomain("exponent out of range".into()))?;
                if base < 0.0 {
                    return Err(ExprError::EvaluationDomain(
                        "fractional power of a negative value".into(),
                    ));
                }
                if base == 0.0 && exp < 0.0 {
                    return Err(ExprError::EvaluationDomain(
                        "zero raised to a negative power".into(),
                    ));
                }
                base.powf(exp)
            }
        }
        Expr::Kernel(f, a) => {
            let arg = eval_rec(a, p, scale)?;
            match f {
                KernelFn::Exp => arg.exp(),
                KernelFn::Sin => arg.sin(),
                KernelFn::Cos => arg.cos(),
                KernelFn::Ln => {
                    if arg <= 0.0 {
                        return Err(ExprError::EvaluationDomain(
                            "logarithm of a non-positive value".into(),
                        ));
                    }
                    arg.ln()
                }
                KernelFn::Sqrt => {
                    if arg < 0.0 {
                        return Err(ExprError::EvaluationDomain(
                            "square root of a negative value".into(),
                        ));
                    }
                    arg.sqrt()
                }
            }
        }
    };
    if value.abs() > *scale {
        *scale = value.abs();
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_polynomial_term() {
        let e = Expr::param("w").pow_int(2) * Expr::coord(1);
        let p = Point::new()
            .with(Variable::param("w"), 2.0)
            .with(Variable::Coord(1), 3.0);
        assert_eq!(evaluate(&e, &p).unwrap(), 12.0);
    }

    #[test]
    fn exponential_of_zero_is_one() {
        let e = Expr::exp(Expr::param("b") * Expr::time());
        let p = Point::new()
            .with(Variable::param("b"), 0.0)
            .with(Variable::Time, 5.0);
        assert_eq!(evaluate(&e, &p).unwrap(), 1.0);
    }

    #[test]
    fn linear_relation_root_evaluates_to_zero() {
        // x'' + b*x' + w^2*x at x''=-2.5, b=1, x'=0.5, w=sqrt(2), x=1
        let e = Expr::accel(1)
            + Expr::param("b") * Expr::vel(1)
            + Expr::param("w").pow_int(2) * Expr::coord(1);
        let p = Point::new()
            .with(Variable::Accel(1), -2.5)
            .with(Variable::param("b"), 1.0)
            .with(Variable::Vel(1), 0.5)
            .with(Variable::param("w"), 2.0_f64.sqrt())
            .with(Variable::Coord(1), 1.0);
        let v = evaluate(&e, &p).unwrap();
        assert!(v.abs() < 1e-12, "got {v}");
    }

    #[test]
    fn domain_violations_are_reported() {
        let p = Point::new().with(Variable::Coord(1), -1.0);
        assert!(matches!(
            evaluate(&Expr::ln(Expr::coord(1)), &p),
            Err(ExprError::EvaluationDomain(_))
        ));
        assert!(matches!(
            evaluate(&Expr::coord(1).pow_rational(1, 2), &p),
            Err(ExprError::EvaluationDomain(_))
        ));
        let zero_div = Expr::coord(1) + Expr::one();
        assert!(matches!(
            evaluate(&zero_div.recip(), &p),
            Err(ExprError::EvaluationDomain(_))
        ));
    }

    #[test]
    fn unassigned_variable_is_an_error() {
        assert!(matches!(
            evaluate(&Expr::coord(2), &Point::new()),
            Err(ExprError::UnassignedVariable(_))
        ));
    }
}
