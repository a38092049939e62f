//! Differentiation, substitution, the total time derivative and the
//! Euler–Lagrange operator.
//!
//! All variables are treated as mutually independent under partial
//! differentiation; the chain over time is applied explicitly by
//! [`total_time_derivative`].

use super::{Expr, ExprError, KernelFn, Variable};
use num::{BigRational, One};

/// Partial derivative `∂e/∂v`; total function, result normalized.
pub fn differentiate(e: &Expr, v: &Variable) -> Expr {
    diff_raw(e, v).normalize()
}

fn diff_raw(e: &Expr, v: &Variable) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(u) => {
            if u == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| diff_raw(x, v)).collect()),
        Expr::Product(xs) => {
            let mut terms = Vec::with_capacity(xs.len());
            for (i, _) in xs.iter().enumerate() {
                let mut factors = xs.clone();
                factors[i] = diff_raw(&xs[i], v);
                terms.push(Expr::Product(factors));
            }
            Expr::Sum(terms)
        }
        Expr::Power(b, r) => {
            // d(b^r) = r * b^(r-1) * b'
            let down = r - BigRational::one();
            Expr::Product(vec![
                Expr::Const(r.clone()),
                Expr::Power(b.clone(), down),
                diff_raw(b, v),
            ])
        }
        Expr::Kernel(f, a) => {
            let inner = diff_raw(a, v);
            let outer = match f {
                KernelFn::Exp => Expr::exp((**a).clone()),
                KernelFn::Sin => Expr::cos((**a).clone()),
                KernelFn::Cos => -Expr::sin((**a).clone()),
                KernelFn::Ln => (**a).clone().recip(),
                KernelFn::Sqrt => {
                    Expr::rational(1, 2) * (**a).clone().pow_rational(-1, 2)
                }
            };
            outer * inner
        }
    }
}

/// Total time derivative for an `n`-coordinate context:
/// `∂e/∂t + Σ_j (∂e/∂x_j)x'_j + (∂e/∂x'_j)x''_j + (∂e/∂x''_j)x'''_j`.
///
/// The third-order extension term is what makes the operator total on
/// acceleration-dependent expressions; the input itself must be free of
/// third-order variables.
pub fn total_time_derivative(e: &Expr, n: u32) -> Result<Expr, ExprError> {
    if e.contains_jerk() {
        return Err(ExprError::JerkInInput);
    }
    let mut terms = vec![diff_raw(e, &Variable::Time)];
    for j in 1..=n {
        for var in [Variable::Coord(j), Variable::Vel(j), Variable::Accel(j)] {
            let raised = var.raised().expect("raisable kinds only");
            terms.push(diff_raw(e, &var) * Expr::Var(raised));
        }
    }
    Ok(Expr::Sum(terms).normalize())
}

/// Replace every occurrence of `target` by `replacement`; result normalized.
pub fn substitute(e: &Expr, target: &Variable, replacement: &Expr) -> Expr {
    subst_raw(e, target, replacement).normalize()
}

fn subst_raw(e: &Expr, target: &Variable, replacement: &Expr) -> Expr {
    match e {
        Expr::Const(_) => e.clone(),
        Expr::Var(v) => {
            if v == target {
                replacement.clone()
            } else {
                e.clone()
            }
        }
        Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| subst_raw(x, target, replacement)).collect()),
        Expr::Product(xs) => {
            Expr::Product(xs.iter().map(|x| subst_raw(x, target, replacement)).collect())
        }
        Expr::Power(b, r) => Expr::Power(Box::new(subst_raw(b, target, replacement)), r.clone()),
        Expr::Kernel(f, a) => Expr::Kernel(*f, Box::new(subst_raw(a, target, replacement))),
    }
}

/// Euler–Lagrange equations `E_i = d/dt(∂L/∂x'_i) - ∂L/∂x_i` for `i = 1..n`.
///
/// The Lagrangian may depend on time, coordinates, velocities and parameters
/// only; results are linear in accelerations and free of third-order terms.
pub fn euler_lagrange(lagrangian: &Expr, n: u32) -> Result<Vec<Expr>, ExprError> {
    if lagrangian.contains_jerk() || lagrangian.contains_accel() {
        return Err(ExprError::AccelerationInLagrangian);
    }
    let mut out = Vec::with_capacity(n as usize);
    for i in 1..=n {
        let momentum = differentiate(lagrangian, &Variable::Vel(i));
        let force = differentiate(lagrangian, &Variable::Coord(i));
        let eq = total_time_derivative(&momentum, n)? - force;
        out.push(eq.normalize());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dho_force() -> Expr {
        // x'' + b*x' + w^2*x
        Expr::accel(1)
            + Expr::param("b") * Expr::vel(1)
            + Expr::param("w").pow_int(2) * Expr::coord(1)
    }

    #[test]
    fn velocity_partial_of_damped_force_is_damping() {
        let d = differentiate(&dho_force(), &Variable::Vel(1));
        assert_eq!(d, Expr::param("b"));
    }

    #[test]
    fn accel_partial_of_linear_term_is_one() {
        let f = Expr::accel(1) + Expr::param("w").pow_int(2) * Expr::coord(1);
        assert_eq!(differentiate(&f, &Variable::Accel(1)), Expr::one());
    }

    #[test]
    fn power_rule_through_exponential_weight() {
        let e = Expr::exp(Expr::param("b") * Expr::time())
            * Expr::vel(1).pow_int(2)
            * Expr::rational(1, 2);
        let d = differentiate(&e, &Variable::Vel(1));
        let expected = (Expr::exp(Expr::param("b") * Expr::time()) * Expr::vel(1)).normalize();
        assert_eq!(d, expected);
    }

    #[test]
    fn total_derivative_of_coordinate_is_velocity() {
        assert_eq!(total_time_derivative(&Expr::coord(1), 1).unwrap(), Expr::vel(1));
    }

    #[test]
    fn total_derivative_of_constant_momentum_vanishes() {
        let dfdxpp = differentiate(&dho_force(), &Variable::Accel(1));
        let d = total_time_derivative(&dfdxpp, 1).unwrap();
        assert!(d.is_const_zero());
    }

    #[test]
    fn total_derivative_uses_product_and_chain_rules() {
        let e = Expr::exp(Expr::param("b") * Expr::time()) * Expr::vel(1);
        let d = total_time_derivative(&e, 1).unwrap();
        let expected = (Expr::param("b") * Expr::exp(Expr::param("b") * Expr::time()) * Expr::vel(1)
            + Expr::exp(Expr::param("b") * Expr::time()) * Expr::accel(1))
        .normalize();
        assert_eq!(d, expected);
    }

    #[test]
    fn total_derivative_rejects_third_order_input() {
        let e = Expr::jerk(1) * Expr::coord(1);
        assert_eq!(total_time_derivative(&e, 1), Err(ExprError::JerkInInput));
    }

    #[test]
    fn substitution_eliminates_acceleration() {
        let g = Expr::param("b") * Expr::vel(1) + Expr::param("w").pow_int(2) * Expr::coord(1);
        let f = Expr::accel(1) + g.clone();
        let s = substitute(&f, &Variable::Accel(1), &(-g));
        assert!(s.is_const_zero());
    }

    #[test]
    fn substitution_examples() {
        let e = Expr::param("w").pow_int(2) * Expr::coord(1);
        assert!(substitute(&e, &Variable::Coord(1), &Expr::zero()).is_const_zero());
        let e2 = Expr::vel(1) * Expr::coord(1);
        assert_eq!(
            substitute(&e2, &Variable::Vel(1), &Expr::int(2)),
            (Expr::int(2) * Expr::coord(1)).normalize()
        );
    }

    #[test]
    fn euler_lagrange_of_shm_lagrangian() {
        let l = Expr::vel(1).pow_int(2) * Expr::rational(1, 2)
            - Expr::param("w").pow_int(2) * Expr::coord(1).pow_int(2) * Expr::rational(1, 2);
        let eqs = euler_lagrange(&l, 1).unwrap();
        let expected = (Expr::accel(1) + Expr::param("w").pow_int(2) * Expr::coord(1)).normalize();
        assert_eq!(eqs, vec![expected]);
    }

    #[test]
    fn euler_lagrange_of_damped_lagrangian() {
        let weight = Expr::exp(Expr::param("b") * Expr::time());
        let l = weight.clone()
            * (Expr::vel(1).pow_int(2) * Expr::rational(1, 2)
                - Expr::param("w").pow_int(2) * Expr::coord(1).pow_int(2) * Expr::rational(1, 2));
        let eqs = euler_lagrange(&l, 1).unwrap();
        let expected = (weight * dho_force()).normalize();
        assert_eq!(eqs, vec![expected]);
    }

    #[test]
    fn pure_gauge_lagrangian_has_trivial_equations() {
        let eqs = euler_lagrange(&Expr::vel(1), 1).unwrap();
        assert!(eqs[0].is_const_zero());
    }

    #[test]
    fn euler_lagrange_rejects_acceleration_dependence() {
        let l = Expr::accel(1) * Expr::coord(1);
        assert_eq!(euler_lagrange(&l, 1), Err(ExprError::AccelerationInLagrangian));
    }
}
