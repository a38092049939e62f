//! Jacobi last multipliers for one-dimensional systems `x'' + G(t,x,x') = 0`.
//!
//! A nonvanishing factor `Λ` turns a dissipative equation into one that
//! satisfies the third Helmholtz condition: along solutions the condition
//! reduces to `dΛ/dt = Λ ∂G/∂x'`, so `Λ = exp(∫ (∂G/∂x') dt)`. That time
//! integral is well defined only when `∂G/∂x'` is constant or a function of
//! `t` alone; anything broader would require solving the multiplier PDE and
//! is reported as unsupported rather than guessed at.

use crate::construct::{construct, ConstructError, LagrangianResult, ValidationMode};
use crate::expr::{differentiate, Expr, ExprError, Variable, ZeroCheck, ZeroSettings};
use crate::helmholtz::{check, decompose, Condition, HelmholtzError, OdeSystem};
use crate::integrate::{antiderivative, Unsupported};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MultiplierError {
    #[error("multiplier search requires a one-dimensional system, got n = {0}")]
    NotOneDimensional(usize),
    #[error("unsupported velocity structure: {0}")]
    VelocityStructureUnsupported(String),
    #[error("cannot integrate the damping coefficient in closed form: {0}")]
    IntegrationUnsupported(String),
    #[error("multiplied system still fails the third Helmholtz condition")]
    MultiplierInvalid { residual: Expr },
    #[error(transparent)]
    Helmholtz(#[from] HelmholtzError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A multiplier `Λ`, the modified system `Λ·F = 0`, the H3 verdict on it,
/// and optionally the Lagrangian constructed from the modified system.
#[derive(Debug, Clone)]
pub struct MultiplierResult {
    pub factor: Expr,
    /// `∂G/∂x'`, the integrand of the multiplier exponent.
    pub damping: Expr,
    pub modified: OdeSystem,
    pub h3: ZeroCheck,
    pub construction: Option<LagrangianResult>,
}

/// Compute the Jacobi last multiplier of a one-dimensional system.
///
/// The equation is first brought to unit acceleration coefficient; a
/// coefficient depending on the coordinate or velocity is out of the
/// supported class.
pub fn jacobi_multiplier(
    sys: &OdeSystem,
    settings: &ZeroSettings,
) -> Result<MultiplierResult, MultiplierError> {
    if sys.n() != 1 {
        return Err(MultiplierError::NotOneDimensional(sys.n()));
    }
    let dec = decompose(sys, settings)?;
    let q = dec.accel_coeff[0][0].clone();
    let p = dec.force[0].clone();

    let g = if q.is_const_one() {
        p
    } else {
        // divide out the acceleration coefficient; only t-dependence keeps
        // the quotient inside the multiplier ansatz
        if q.contains(&Variable::Coord(1)) || q.contains(&Variable::Vel(1)) {
            return Err(MultiplierError::VelocityStructureUnsupported(format!(
                "acceleration coefficient `{q}` depends on the coordinate or velocity"
            )));
        }
        (p * q.clone().recip()).normalize()
    };

    let damping = differentiate(&g, &Variable::Vel(1));
    if damping.contains(&Variable::Coord(1)) || damping.contains(&Variable::Vel(1)) {
        return Err(MultiplierError::VelocityStructureUnsupported(format!(
            "∂G/∂x' = `{damping}` depends on the coordinate or velocity; \
             the general multiplier PDE is out of scope"
        )));
    }

    let exponent =
        antiderivative(&damping, &Variable::Time).map_err(|Unsupported(msg)| {
            MultiplierError::IntegrationUnsupported(msg)
        })?;
    let factor = Expr::exp(exponent).normalize();

    let modified_eq = (factor.clone() * (Expr::accel(1) + g)).normalize();
    let modified = OdeSystem::new(
        sys.coordinates().to_vec(),
        sys.parameters().to_vec(),
        vec![modified_eq],
    )?;

    let report = check(&modified, settings)?;
    let entry = report
        .entry(Condition::H3, 1, 1)
        .expect("n = 1 always has the (1,1) entry");
    if !entry.check.is_zero() {
        return Err(MultiplierError::MultiplierInvalid {
            residual: entry.residual.clone(),
        });
    }

    Ok(MultiplierResult {
        factor,
        damping,
        modified,
        h3: entry.check.clone(),
        construction: None,
    })
}

/// Multiplier search followed by Lagrangian construction on the modified
/// system; the validation record is tagged with the multiplier so callers
/// know `EL(L)` matches `Λ·F` rather than `F` itself.
pub fn multiplier_then_construct(
    sys: &OdeSystem,
    settings: &ZeroSettings,
) -> Result<MultiplierResult, MultiplierError> {
    let mut result = jacobi_multiplier(sys, settings)?;
    let mut built = construct(&result.modified, settings)?;
    built.validation.mode = ValidationMode::ViaMultiplier {
        factor: result.factor.clone(),
    };
    result.construction = Some(built);
    Ok(result)
}

/// Positivity of the exponential multiplier at the seeded sample points.
pub fn multiplier_positive(
    factor: &Expr,
    settings: &ZeroSettings,
) -> Result<bool, ExprError> {
    use rand::{Rng, SeedableRng};
    let vars: Vec<Variable> = factor.variables().into_iter().collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(settings.seed);
    for _ in 0..settings.samples {
        let mut point = crate::expr::Point::new();
        for v in &vars {
            point.set(v.clone(), rng.gen_range(-2.0..=2.0));
        }
        let value = crate::expr::evaluate(factor, &point)?;
        if !value.is_finite() || value <= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{substitute, Verdict};

    fn settings() -> ZeroSettings {
        ZeroSettings::default()
    }

    fn dho() -> OdeSystem {
        OdeSystem::new(
            vec!["x1".into()],
            vec!["b".into(), "w".into()],
            vec![
                Expr::accel(1)
                    + Expr::param("b") * Expr::vel(1)
                    + Expr::param("w").pow_int(2) * Expr::coord(1),
            ],
        )
        .unwrap()
    }

    fn shm() -> OdeSystem {
        OdeSystem::new(
            vec!["x1".into()],
            vec!["w".into()],
            vec![Expr::accel(1) + Expr::param("w").pow_int(2) * Expr::coord(1)],
        )
        .unwrap()
    }

    #[test]
    fn damped_oscillator_multiplier_is_exponential() {
        let res = jacobi_multiplier(&dho(), &settings()).unwrap();
        let expected = Expr::exp(Expr::param("b") * Expr::time()).normalize();
        assert_eq!(res.factor, expected);
        assert_eq!(res.factor.pretty(&[]), "exp(b*t)");
        assert_eq!(res.h3.verdict, Verdict::ProvenZero);
    }

    #[test]
    fn undamped_limit_gives_unit_multiplier() {
        let res = jacobi_multiplier(&shm(), &settings()).unwrap();
        assert!(res.factor.is_const_one());
        assert_eq!(res.modified.equations(), shm().equations());
    }

    #[test]
    fn velocity_dependent_damping_is_unsupported() {
        // G = x'^2 / x has ∂G/∂x' = 2x'/x
        let sys = OdeSystem::new(
            vec!["x1".into()],
            vec![],
            vec![Expr::accel(1) + Expr::vel(1).pow_int(2) * Expr::coord(1).recip()],
        )
        .unwrap();
        let err = jacobi_multiplier(&sys, &settings()).unwrap_err();
        assert!(matches!(err, MultiplierError::VelocityStructureUnsupported(_)));
    }

    #[test]
    fn time_dependent_damping_integrates() {
        // x'' + t x' = 0 gives Λ = exp(t^2/2)
        let sys = OdeSystem::new(
            vec!["x1".into()],
            vec![],
            vec![Expr::accel(1) + Expr::time() * Expr::vel(1)],
        )
        .unwrap();
        let res = multiplier_then_construct(&sys, &settings()).unwrap();
        let expected =
            Expr::exp(Expr::time().pow_int(2) * Expr::rational(1, 2)).normalize();
        assert_eq!(res.factor, expected);
        let built = res.construction.unwrap();
        assert!(built.validation.all_proven());
        // oracle: EL(e^{t^2/2} x'^2 / 2) = e^{t^2/2}(x'' + t x')
        let l = (expected * Expr::vel(1).pow_int(2) * Expr::rational(1, 2)).normalize();
        let eqs = crate::expr::euler_lagrange(&l, 1).unwrap();
        assert_eq!(eqs[0], res.modified.equations()[0]);
    }

    #[test]
    fn multiplier_pipeline_reproduces_damped_lagrangian() {
        let res = multiplier_then_construct(&dho(), &settings()).unwrap();
        let built = res.construction.as_ref().unwrap();
        let expected = (Expr::exp(Expr::param("b") * Expr::time())
            * (Expr::vel(1).pow_int(2) * Expr::rational(1, 2)
                - Expr::param("w").pow_int(2) * Expr::coord(1).pow_int(2) * Expr::rational(1, 2)))
        .normalize();
        assert_eq!(built.lagrangian, expected);
        assert!(matches!(
            built.validation.mode,
            ValidationMode::ViaMultiplier { .. }
        ));
    }

    #[test]
    fn vanishing_damping_limit_recovers_undamped_lagrangian() {
        let res = multiplier_then_construct(&dho(), &settings()).unwrap();
        let at_zero = substitute(
            &res.factor,
            &Variable::param("b"),
            &Expr::zero(),
        );
        assert!(at_zero.is_const_one());
        let l = res.construction.as_ref().unwrap().lagrangian.clone();
        let l_zero = substitute(&l, &Variable::param("b"), &Expr::zero());
        let shm_l = construct(&shm(), &settings()).unwrap().lagrangian;
        assert!((l_zero - shm_l).normalize().is_const_zero());
    }

    #[test]
    fn scaled_acceleration_coefficient_is_divided_out() {
        // 2 x'' + 2 b x' + 2 w^2 x: constant coefficient normalizes away
        let sys = OdeSystem::new(
            vec!["x1".into()],
            vec!["b".into(), "w".into()],
            vec![
                Expr::int(2) * Expr::accel(1)
                    + Expr::int(2) * Expr::param("b") * Expr::vel(1)
                    + Expr::int(2) * Expr::param("w").pow_int(2) * Expr::coord(1),
            ],
        )
        .unwrap();
        let res = jacobi_multiplier(&sys, &settings()).unwrap();
        assert_eq!(
            res.factor,
            Expr::exp(Expr::param("b") * Expr::time()).normalize()
        );
    }

    #[test]
    fn multiplier_is_positive_at_samples() {
        let res = jacobi_multiplier(&dho(), &settings()).unwrap();
        assert!(multiplier_positive(&res.factor, &settings()).unwrap());
    }

    #[test]
    fn rejects_higher_dimensional_systems() {
        let sys = OdeSystem::new(
            vec!["x1".into(), "x2".into()],
            vec![],
            vec![Expr::accel(1), Expr::accel(2)],
        )
        .unwrap();
        assert!(matches!(
            jacobi_multiplier(&sys, &settings()),
            Err(MultiplierError::NotOneDimensional(2))
        ));
    }
}
