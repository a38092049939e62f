//! Closed-form antiderivatives for the integrand class the construction
//! needs: polynomials in the integration variable, optionally times a single
//! `exp`, `sin` or `cos` factor whose argument is linear in that variable
//! with a one-term (monomial) coefficient. Everything else is reported as
//! unsupported rather than approximated.
//!
//! Every antiderivative is verified by differentiation before it is
//! returned; with monomial coefficients the by-parts algebra cancels exactly
//! in the normal form, so verification failures indicate a genuinely
//! unsupported integrand.

use crate::expr::normal::{expr_terms, Factor};
use crate::expr::{differentiate, substitute, Expr, KernelFn, Variable};
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("unsupported integrand: {0}")]
pub struct Unsupported(pub String);

/// Largest power of the integration variable handled by parts.
const BY_PARTS_DEPTH: i64 = 8;

/// Antiderivative of `e` in `v` with integration constant zero.
pub(crate) fn antiderivative(e: &Expr, v: &Variable) -> Result<Expr, Unsupported> {
    let normalized = e.normalize();
    let mut pieces: Vec<Expr> = Vec::new();
    for (coeff, factors) in expr_terms(&normalized) {
        pieces.push(integrate_term(&coeff, &factors, v)?);
    }
    let result = Expr::Sum(pieces).normalize();
    let back = differentiate(&result, v);
    if !(back - normalized.clone()).normalize().is_const_zero() {
        return Err(Unsupported(format!(
            "verification failed for `{normalized}`"
        )));
    }
    Ok(result)
}

/// Definite integral of `e` over the unit interval of `v`.
pub(crate) fn definite_unit(e: &Expr, v: &Variable) -> Result<Expr, Unsupported> {
    let anti = antiderivative(e, v)?;
    let upper = substitute(&anti, v, &Expr::one());
    let lower = substitute(&anti, v, &Expr::zero());
    Ok((upper - lower).normalize())
}

fn integrate_term(
    coeff: &BigRational,
    factors: &[(Factor, BigRational)],
    v: &Variable,
) -> Result<Expr, Unsupported> {
    let mut free: Vec<Expr> = vec![Expr::Const(coeff.clone())];
    let mut v_power = BigRational::zero();
    let mut kernels: Vec<(KernelFn, Expr, BigRational)> = Vec::new();

    for (factor, exp) in factors {
        match factor {
            Factor::Var(u) if u == v => v_power = exp.clone(),
            Factor::Kernel(f, arg) if arg.contains(v) => {
                kernels.push((*f, arg.clone(), exp.clone()));
            }
            Factor::Opaque(inner) if inner.contains(v) => {
                return Err(Unsupported(format!(
                    "compound base `{inner}` depends on the integration variable"
                )));
            }
            _ => {
                let base = match factor {
                    Factor::Var(u) => Expr::Var(u.clone()),
                    Factor::Kernel(f, a) => Expr::Kernel(*f, Box::new(a.clone())),
                    Factor::Opaque(inner) => inner.clone(),
                };
                if exp.is_one() {
                    free.push(base);
                } else {
                    free.push(Expr::Power(Box::new(base), exp.clone()));
                }
            }
        }
    }
    let free_part = Expr::Product(free).normalize();

    if kernels.is_empty() {
        // power rule
        if v_power == BigRational::from_integer((-1).into()) {
            return Err(Unsupported(
                "inverse first power of the integration variable".into(),
            ));
        }
        let up = v_power + BigRational::one();
        let integral =
            Expr::Power(Box::new(Expr::Var(v.clone())), up.clone()) * Expr::Const(up).recip();
        return Ok((free_part * integral).normalize());
    }
    if kernels.len() > 1 {
        return Err(Unsupported(
            "more than one kernel depends on the integration variable".into(),
        ));
    }
    let (kernel, arg, kexp) = kernels.pop().expect("one kernel");
    if !kexp.is_one() {
        return Err(Unsupported(format!(
            "kernel power {kexp} of the integration variable"
        )));
    }
    if !matches!(kernel, KernelFn::Exp | KernelFn::Sin | KernelFn::Cos) {
        return Err(Unsupported(format!(
            "kernel `{}` of the integration variable",
            kernel.name()
        )));
    }
    if !v_power.is_integer() || v_power.is_negative() {
        return Err(Unsupported(format!(
            "power {v_power} alongside a kernel factor"
        )));
    }
    let k = v_power.to_integer().to_i64().unwrap_or(i64::MAX);
    if k > BY_PARTS_DEPTH {
        return Err(Unsupported(format!(
            "polynomial degree {k} exceeds the by-parts depth"
        )));
    }
    // argument must be linear in v with a one-term slope so that the
    // divisions below cancel exactly under the normal form
    let slope = differentiate(&arg, v);
    if slope.is_const_zero() || slope.contains(v) || matches!(slope, Expr::Sum(_)) {
        return Err(Unsupported(format!(
            "kernel argument `{arg}` is not linear in the integration variable"
        )));
    }
    let integral = by_parts(kernel, &arg, &slope, v, k);
    Ok((free_part * integral).normalize())
}

/// `∫ v^k K(arg) dv` for `K ∈ {exp, sin, cos}` and `d(arg)/dv = slope`.
fn by_parts(kernel: KernelFn, arg: &Expr, slope: &Expr, v: &Variable, k: i64) -> Expr {
    let vk = |k: i64| Expr::Var(v.clone()).pow_int(k);
    let inv = slope.clone().recip();
    match kernel {
        KernelFn::Exp => {
            let head = vk(k) * Expr::exp(arg.clone()) * inv.clone();
            if k == 0 {
                head
            } else {
                head - Expr::int(k) * inv * by_parts(KernelFn::Exp, arg, slope, v, k - 1)
            }
        }
        KernelFn::Sin => {
            let head = -(vk(k) * Expr::cos(arg.clone()) * inv.clone());
            if k == 0 {
                head
            } else {
                head + Expr::int(k) * inv * by_parts(KernelFn::Cos, arg, slope, v, k - 1)
            }
        }
        KernelFn::Cos => {
            let head = vk(k) * Expr::sin(arg.clone()) * inv.clone();
            if k == 0 {
                head
            } else {
                head - Expr::int(k) * inv * by_parts(KernelFn::Sin, arg, slope, v, k - 1)
            }
        }
        _ => unreachable!("filtered above"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> Variable {
        Variable::Time
    }

    #[test]
    fn power_rule_with_rational_exponents() {
        let e = Expr::time().pow_int(3) * Expr::param("w");
        let a = antiderivative(&e, &t()).unwrap();
        assert_eq!(
            a,
            (Expr::rational(1, 4) * Expr::param("w") * Expr::time().pow_int(4)).normalize()
        );
        let r = Expr::time().pow_rational(1, 2);
        let ar = antiderivative(&r, &t()).unwrap();
        assert_eq!(
            ar,
            (Expr::rational(2, 3) * Expr::time().pow_rational(3, 2)).normalize()
        );
    }

    #[test]
    fn constant_integrates_linearly() {
        let a = antiderivative(&Expr::param("b"), &t()).unwrap();
        assert_eq!(a, (Expr::param("b") * Expr::time()).normalize());
        assert!(antiderivative(&Expr::zero(), &t()).unwrap().is_const_zero());
    }

    #[test]
    fn exponential_by_parts_verifies() {
        // ∫ t^2 exp(b t) dt; the verification inside antiderivative is the oracle
        let e = Expr::time().pow_int(2) * Expr::exp(Expr::param("b") * Expr::time());
        antiderivative(&e, &t()).unwrap();
    }

    #[test]
    fn trig_by_parts_verifies() {
        let e = Expr::time().pow_int(3) * Expr::sin(Expr::param("w") * Expr::time());
        antiderivative(&e, &t()).unwrap();
        let c = Expr::time() * Expr::cos(Expr::param("w") * Expr::time() + Expr::one());
        antiderivative(&c, &t()).unwrap();
    }

    #[test]
    fn unit_interval_of_scaled_velocity() {
        // ∫₀¹ s·x' ds = x'/2 drives the straight-line kinetic reconstruction
        let s = Variable::param("__s");
        let e = Expr::Var(s.clone()) * Expr::vel(1);
        let d = definite_unit(&e, &s).unwrap();
        assert_eq!(d, (Expr::rational(1, 2) * Expr::vel(1)).normalize());
    }

    #[test]
    fn rejects_out_of_class_integrands() {
        assert!(antiderivative(&Expr::time().recip(), &t()).is_err());
        assert!(antiderivative(&Expr::ln(Expr::time()), &t()).is_err());
        let two_kernels = Expr::exp(Expr::time()) * Expr::sin(Expr::time());
        assert!(antiderivative(&two_kernels, &t()).is_err());
        let nonlinear = Expr::exp(Expr::time().pow_int(2) + Expr::time());
        assert!(antiderivative(&nonlinear, &t()).is_err());
        let multi_term_slope = Expr::exp((Expr::param("a") + Expr::param("b")) * Expr::time());
        assert!(antiderivative(&multi_term_slope, &t()).is_err());
    }

    #[test]
    fn gaussian_argument_is_linear_in_time_elsewhere() {
        // exp(t^2/2) is fine when integrating in a different variable
        let e = Expr::exp(Expr::time().pow_int(2) * Expr::rational(1, 2)) * Expr::coord(1);
        let a = antiderivative(&e, &Variable::Coord(1)).unwrap();
        assert_eq!(
            a,
            (Expr::rational(1, 2)
                * Expr::exp(Expr::time().pow_int(2) * Expr::rational(1, 2))
                * Expr::coord(1).pow_int(2))
            .normalize()
        );
    }
}
