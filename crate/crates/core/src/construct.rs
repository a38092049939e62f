//! Lagrangian reconstruction for systems passing the Helmholtz conditions.
//!
//! The pipeline mirrors the structure the conditions force on the equations:
//! the acceleration coefficients `Q` integrate to the velocity part `G0`
//! (twice through an exact differential form in the velocities), the
//! remainder defines a closed 2-form on `(t, x)`-space with space/space
//! components `φ_ik` and time/space components `θ_i`, and potentials
//! `H_i(t,x)`, `H0(t,x)` for that form complete the Lagrangian
//! `L = G0 + Σ H_i x'_i + H0`.
//!
//! Exact forms are integrated along straight-line paths (Poincaré homotopy)
//! with closed-form parameter integrals; potentials vanish at the reference
//! point. The potential solve is staged: first `H_i` from `φ` by the
//! homotopy in `x` at fixed `t`, then `H0` by integrating the exact `x`-form
//! `∂H_i/∂t - θ_i`, whose closure is exactly the compatibility identity.
//! Every stage is verified by substitution on every call; a Lagrangian is
//! returned only after its Euler–Lagrange equations reproduce the input.

use crate::expr::{
    differentiate, euler_lagrange, is_zero, residual_check, substitute, Expr, ExprError, Variable,
    ZeroCheck, ZeroSettings,
};
use crate::helmholtz::{check, decompose, AccelDecomposition, HelmholtzError, HelmholtzReport, OdeSystem};
use crate::integrate::{antiderivative, definite_unit, Unsupported};
use num::{BigRational, One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("system fails the Helmholtz conditions; no Lagrangian exists")]
    ConditionsFail(Box<HelmholtzReport>),
    #[error("form is not exact: mixed partials for components {i} and {j} differ by `{residual}`")]
    NotExact { i: usize, j: usize, residual: Expr },
    #[error("unsupported integrand: {0}")]
    UnsupportedIntegrand(String),
    #[error("{what} should be velocity-free but depends on velocities: `{residual}`")]
    VelocityDependentResidue { what: String, residual: Expr },
    #[error("{which} closure fails for indices {indices:?}: residual `{residual}`")]
    ClosureFailure {
        which: String,
        indices: Vec<usize>,
        residual: Expr,
    },
    #[error("postcondition violated: {0}")]
    Postcondition(String),
    #[error("constructed Lagrangian failed round-trip validation")]
    ValidationFailure(Box<ValidationRecord>),
    #[error(transparent)]
    Helmholtz(#[from] HelmholtzError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

impl From<Unsupported> for ConstructError {
    fn from(u: Unsupported) -> Self {
        ConstructError::UnsupportedIntegrand(u.0)
    }
}

/// Path parameter of the homotopy integrals. The leading underscores keep it
/// outside the user identifier grammar.
fn path_param() -> Variable {
    Variable::param("__s")
}

// ---------------------------------------------------------------------------
// Exact differential forms
// ---------------------------------------------------------------------------

fn check_exactness(
    f: &[Expr],
    vars: &[Variable],
    settings: &ZeroSettings,
) -> Result<(), ConstructError> {
    for i in 0..f.len() {
        for j in (i + 1)..f.len() {
            let residual = differentiate(&f[i], &vars[j]) - differentiate(&f[j], &vars[i]);
            let (residual, check) = residual_check(&residual, settings)?;
            if !check.is_zero() {
                return Err(ConstructError::NotExact {
                    i: i + 1,
                    j: j + 1,
                    residual,
                });
            }
        }
    }
    Ok(())
}

fn verify_gradient(
    potential: &Expr,
    f: &[Expr],
    vars: &[Variable],
    settings: &ZeroSettings,
) -> Result<(), ConstructError> {
    for (i, fi) in f.iter().enumerate() {
        let residual = differentiate(potential, &vars[i]) - fi.clone();
        let check = is_zero(&residual, settings)?;
        if !check.is_zero() {
            return Err(ConstructError::Postcondition(format!(
                "potential gradient component {} does not match: `{}`",
                i + 1,
                residual.normalize()
            )));
        }
    }
    Ok(())
}

/// Potential `F` of an exact form `Σ f_i d(vars_i)`, via the straight-line
/// path from `reference`: `F = Σ (v_i - r_i) ∫₀¹ f_i(r + s(v - r)) ds`.
/// `F(reference) = 0`, and `∂F/∂vars_i = f_i` is verified before returning.
pub fn integrate_exact_form(
    f: &[Expr],
    vars: &[Variable],
    reference: &[BigRational],
    settings: &ZeroSettings,
) -> Result<Expr, ConstructError> {
    assert_eq!(f.len(), vars.len());
    assert_eq!(f.len(), reference.len());
    check_exactness(f, vars, settings)?;
    let s = path_param();
    let mut integrand_terms = Vec::with_capacity(f.len());
    for (i, fi) in f.iter().enumerate() {
        let mut g = fi.clone();
        for (j, vj) in vars.iter().enumerate() {
            let r = Expr::Const(reference[j].clone());
            let path = r.clone() + Expr::Var(s.clone()) * (Expr::Var(vj.clone()) - r);
            g = substitute(&g, vj, &path);
        }
        let displacement = Expr::Var(vars[i].clone()) - Expr::Const(reference[i].clone());
        integrand_terms.push(displacement * g);
    }
    let integrand = Expr::Sum(integrand_terms).normalize();
    let potential = definite_unit(&integrand, &s)?;
    verify_gradient(&potential, f, vars, settings)?;
    Ok(potential)
}

/// Potential of an exact form along the axis-ordered staircase path
/// (integrate the first variable, then the second, ...). Independent route
/// used to witness path independence against [`integrate_exact_form`].
pub fn integrate_exact_form_staircase(
    f: &[Expr],
    vars: &[Variable],
    reference: &[BigRational],
    settings: &ZeroSettings,
) -> Result<Expr, ConstructError> {
    assert_eq!(f.len(), vars.len());
    assert_eq!(f.len(), reference.len());
    check_exactness(f, vars, settings)?;
    let mut total = Expr::zero();
    for (i, fi) in f.iter().enumerate() {
        let mut leg = fi.clone();
        for j in (i + 1)..vars.len() {
            leg = substitute(&leg, &vars[j], &Expr::Const(reference[j].clone()));
        }
        let anti = antiderivative(&leg, &vars[i])?;
        let at_ref = substitute(&anti, &vars[i], &Expr::Const(reference[i].clone()));
        total = total + anti - at_ref;
    }
    let potential = total.normalize();
    verify_gradient(&potential, f, vars, settings)?;
    Ok(potential)
}

/// Zero reference, with a documented fallback at all-ones when the default
/// reference leaves the closed-form class (kernel singular at the origin).
fn integrate_with_fallback(
    f: &[Expr],
    vars: &[Variable],
    settings: &ZeroSettings,
) -> Result<(Expr, bool), ConstructError> {
    let zeros = vec![BigRational::zero(); vars.len()];
    match integrate_exact_form(f, vars, &zeros, settings) {
        Ok(p) => Ok((p, false)),
        Err(ConstructError::UnsupportedIntegrand(_)) => {
            let ones = vec![BigRational::one(); vars.len()];
            let p = integrate_exact_form(f, vars, &ones, settings)?;
            Ok((p, true))
        }
        Err(other) => Err(other),
    }
}

// ---------------------------------------------------------------------------
// Velocity part
// ---------------------------------------------------------------------------

/// `R_i = ∂G0/∂x'_i` and the velocity part `G0` itself, reconstructed from
/// the acceleration coefficients by integrating each row form `Σ_j Q_ij dx'_j`
/// and then the form `Σ_i R_i dx'_i`, both from the zero-velocity reference.
#[derive(Debug, Clone)]
pub struct VelocityPotential {
    pub gradient: Vec<Expr>,
    pub velocity_part: Expr,
    pub used_fallback: bool,
}

pub fn velocity_gradient(
    dec: &AccelDecomposition,
    settings: &ZeroSettings,
) -> Result<VelocityPotential, ConstructError> {
    let n = dec.n();
    let vels: Vec<Variable> = (1..=n as u32).map(Variable::Vel).collect();
    let mut gradient = Vec::with_capacity(n);
    let mut used_fallback = false;
    for row in &dec.accel_coeff {
        let (r, fb) = integrate_with_fallback(row, &vels, settings)?;
        used_fallback |= fb;
        gradient.push(r);
    }
    let (velocity_part, fb) = integrate_with_fallback(&gradient, &vels, settings)?;
    used_fallback |= fb;
    Ok(VelocityPotential {
        gradient,
        velocity_part,
        used_fallback,
    })
}

// ---------------------------------------------------------------------------
// Compatibility data
// ---------------------------------------------------------------------------

/// Components of the closed 2-form on `(t, x)`-space that the remaining
/// potentials must integrate: `space_space[i][k] = φ_ik` (antisymmetric) is
/// the right side of `∂H_i/∂x_k - ∂H_k/∂x_i`, and `time_space[i] = θ_i` the
/// right side of `∂H_i/∂t - ∂H0/∂x_i`. Both are velocity-free once the
/// Helmholtz conditions hold; this is checked, then closure of the form.
#[derive(Debug, Clone)]
pub struct CompatibilityData {
    pub space_space: Vec<Vec<Expr>>,
    pub time_space: Vec<Expr>,
}

impl CompatibilityData {
    pub fn n(&self) -> usize {
        self.time_space.len()
    }
}

pub fn compatibility(
    dec: &AccelDecomposition,
    velocity_part: &Expr,
    settings: &ZeroSettings,
) -> Result<CompatibilityData, ConstructError> {
    let n = dec.n();
    let p = &dec.force;
    let g0 = velocity_part;
    let coord = |i: usize| Variable::Coord(i as u32 + 1);
    let vel = |i: usize| Variable::Vel(i as u32 + 1);

    let mut space_space = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for k in (i + 1)..n {
            let phi = Expr::rational(1, 2)
                * (differentiate(&p[i], &vel(k)) - differentiate(&p[k], &vel(i)))
                + differentiate(&differentiate(g0, &vel(k)), &coord(i))
                - differentiate(&differentiate(g0, &coord(k)), &vel(i));
            let phi = phi.normalize();
            space_space[i][k] = phi.clone();
            space_space[k][i] = (-phi).normalize();
        }
    }

    let mut time_space = Vec::with_capacity(n);
    for i in 0..n {
        let mut theta = p[i].clone() + differentiate(g0, &coord(i))
            - differentiate(&differentiate(g0, &vel(i)), &Variable::Time);
        for j in 0..n {
            theta = theta
                - differentiate(&differentiate(g0, &vel(j)), &coord(i)) * Expr::vel(j as u32 + 1)
                + Expr::rational(1, 2)
                    * (differentiate(&p[j], &vel(i)) - differentiate(&p[i], &vel(j)))
                    * Expr::vel(j as u32 + 1);
        }
        time_space.push(theta.normalize());
    }

    // the Helmholtz conditions imply these are velocity-free; verify, then
    // strip any numerically-dead velocity atoms
    let strip = |e: &Expr, what: String| -> Result<Expr, ConstructError> {
        for j in 0..n {
            let d = differentiate(e, &vel(j));
            let (residual, check) = residual_check(&d, settings)?;
            if !check.is_zero() {
                return Err(ConstructError::VelocityDependentResidue { what, residual });
            }
        }
        let mut out = e.clone();
        for j in 0..n {
            out = substitute(&out, &vel(j), &Expr::zero());
        }
        Ok(out)
    };
    for i in 0..n {
        time_space[i] = strip(&time_space[i].clone(), format!("theta_{}", i + 1))?;
        for k in 0..n {
            if i != k {
                space_space[i][k] = strip(
                    &space_space[i][k].clone(),
                    format!("phi_({},{})", i + 1, k + 1),
                )?;
            }
        }
    }

    // time/space closure: ∂φ_ik/∂t - ∂θ_i/∂x_k + ∂θ_k/∂x_i = 0
    for i in 0..n {
        for k in (i + 1)..n {
            let residual = differentiate(&space_space[i][k], &Variable::Time)
                - differentiate(&time_space[i], &coord(k))
                + differentiate(&time_space[k], &coord(i));
            let (residual, check) = residual_check(&residual, settings)?;
            if !check.is_zero() {
                return Err(ConstructError::ClosureFailure {
                    which: "time-space".into(),
                    indices: vec![i + 1, k + 1],
                    residual,
                });
            }
        }
    }
    // space/space closure: cyclic sum of ∂φ_ij/∂x_l = 0
    for i in 0..n {
        for j in (i + 1)..n {
            for l in (j + 1)..n {
                let residual = differentiate(&space_space[i][j], &coord(l))
                    + differentiate(&space_space[j][l], &coord(i))
                    + differentiate(&space_space[l][i], &coord(j));
                let (residual, check) = residual_check(&residual, settings)?;
                if !check.is_zero() {
                    return Err(ConstructError::ClosureFailure {
                        which: "space-space".into(),
                        indices: vec![i + 1, j + 1, l + 1],
                        residual,
                    });
                }
            }
        }
    }

    Ok(CompatibilityData {
        space_space,
        time_space,
    })
}

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

/// The reconstructed `H_i` (coefficients of `x'_i`) and `H0`.
#[derive(Debug, Clone)]
pub struct Potentials {
    pub linear: Vec<Expr>,
    pub scalar: Expr,
    pub used_fallback: bool,
}

/// Solve `∂H_i/∂x_k - ∂H_k/∂x_i = φ_ik`, `∂H_i/∂t - ∂H0/∂x_i = θ_i`.
///
/// `H_i` comes from the Poincaré homotopy of the `φ` 2-form in `x` at fixed
/// `t`; `H0` from integrating the exact `x`-form `∂H_i/∂t - θ_i`. Both
/// relations are verified by substitution before returning.
pub fn solve_potentials(
    c: &CompatibilityData,
    settings: &ZeroSettings,
) -> Result<Potentials, ConstructError> {
    let n = c.n();
    let s = path_param();
    let coords: Vec<Variable> = (1..=n as u32).map(Variable::Coord).collect();

    let mut linear = vec![Expr::zero(); n];
    for a in 0..n {
        for b in (a + 1)..n {
            // coefficient of dx_a ∧ dx_b is φ_ba
            let phi_ba = &c.space_space[b][a];
            if phi_ba.is_const_zero() {
                continue;
            }
            let mut scaled = phi_ba.clone();
            for v in &coords {
                let path = Expr::Var(s.clone()) * Expr::Var(v.clone());
                scaled = substitute(&scaled, v, &path);
            }
            let integrand = (Expr::Var(s.clone()) * scaled).normalize();
            let w = definite_unit(&integrand, &s)?;
            linear[b] = (linear[b].clone() + Expr::Var(coords[a].clone()) * w.clone()).normalize();
            linear[a] = (linear[a].clone() - Expr::Var(coords[b].clone()) * w).normalize();
        }
    }

    let psi: Vec<Expr> = (0..n)
        .map(|i| {
            (differentiate(&linear[i], &Variable::Time) - c.time_space[i].clone()).normalize()
        })
        .collect();
    let (scalar, used_fallback) = integrate_with_fallback(&psi, &coords, settings)?;

    // substitution check of both defining relations
    for i in 0..n {
        for k in (i + 1)..n {
            let residual = differentiate(&linear[i], &coords[k])
                - differentiate(&linear[k], &coords[i])
                - c.space_space[i][k].clone();
            let check = is_zero(&residual, settings)?;
            if !check.is_zero() {
                return Err(ConstructError::Postcondition(format!(
                    "curl relation for H_{} and H_{} fails: `{}`",
                    i + 1,
                    k + 1,
                    residual.normalize()
                )));
            }
        }
        let residual = differentiate(&linear[i], &Variable::Time)
            - differentiate(&scalar, &coords[i])
            - c.time_space[i].clone();
        let check = is_zero(&residual, settings)?;
        if !check.is_zero() {
            return Err(ConstructError::Postcondition(format!(
                "time relation for H_{} fails: `{}`",
                i + 1,
                residual.normalize()
            )));
        }
    }

    Ok(Potentials {
        linear,
        scalar,
        used_fallback,
    })
}

// ---------------------------------------------------------------------------
// Full construction
// ---------------------------------------------------------------------------

/// How a constructed Lagrangian was matched against its source system.
#[derive(Debug, Clone)]
pub enum ValidationMode {
    /// `EL(L)_i - F_i` vanishes for the system as given.
    Exact,
    /// The system was premultiplied by a Jacobi multiplier first.
    ViaMultiplier { factor: Expr },
}

#[derive(Debug, Clone)]
pub struct EquationResidual {
    pub equation: usize,
    pub residual: Expr,
    pub check: ZeroCheck,
}

#[derive(Debug, Clone)]
pub struct ValidationRecord {
    pub mode: ValidationMode,
    pub residuals: Vec<EquationResidual>,
}

impl ValidationRecord {
    pub fn all_zero(&self) -> bool {
        self.residuals.iter().all(|r| r.check.is_zero())
    }

    pub fn all_proven(&self) -> bool {
        self.residuals.iter().all(|r| r.check.verdict.is_proven())
    }
}

pub const GAUGE_NOTE: &str =
    "the Lagrangian is unique only up to adding a total time derivative d f(t, x)/dt";

/// A constructed Lagrangian with its parts and round-trip validation record.
#[derive(Debug, Clone)]
pub struct LagrangianResult {
    pub lagrangian: Expr,
    /// `G0`: the full velocity dependence beyond the linear terms.
    pub velocity_part: Expr,
    /// `H_i`: coefficients of `x'_i`, functions of `(t, x)`.
    pub linear_coeffs: Vec<Expr>,
    /// `H0`: the velocity-free part.
    pub scalar_part: Expr,
    pub gauge_note: &'static str,
    /// Set when an integration reference had to be shifted off the origin.
    pub reference_note: Option<String>,
    pub validation: ValidationRecord,
}

/// Run the full pipeline on a system that passes [`check`]; the result is
/// validated by recomputing Euler–Lagrange equations and is never returned
/// unvalidated.
pub fn construct(
    sys: &OdeSystem,
    settings: &ZeroSettings,
) -> Result<LagrangianResult, ConstructError> {
    let report = check(sys, settings)?;
    if !report.passed() {
        return Err(ConstructError::ConditionsFail(Box::new(report)));
    }
    let dec = decompose(sys, settings)?;
    let vp = velocity_gradient(&dec, settings)?;
    let comp = compatibility(&dec, &vp.velocity_part, settings)?;
    let pots = solve_potentials(&comp, settings)?;

    let n = sys.n();
    let mut lagrangian = vp.velocity_part.clone() + pots.scalar.clone();
    for (i, h) in pots.linear.iter().enumerate() {
        lagrangian = lagrangian + h.clone() * Expr::vel(i as u32 + 1);
    }
    let lagrangian = lagrangian.normalize();

    let equations = euler_lagrange(&lagrangian, n as u32)?;
    let mut residuals = Vec::with_capacity(n);
    let mut ok = true;
    for (i, (e, f)) in equations.iter().zip(sys.equations()).enumerate() {
        let (residual, check) = residual_check(&(e.clone() - f.clone()), settings)?;
        ok &= check.is_zero();
        residuals.push(EquationResidual {
            equation: i + 1,
            residual,
            check,
        });
    }
    let validation = ValidationRecord {
        mode: ValidationMode::Exact,
        residuals,
    };
    if !ok {
        return Err(ConstructError::ValidationFailure(Box::new(validation)));
    }
    let reference_note = (vp.used_fallback || pots.used_fallback)
        .then(|| "integration reference shifted to the all-ones point".to_string());
    Ok(LagrangianResult {
        lagrangian,
        velocity_part: vp.velocity_part,
        linear_coeffs: pots.linear,
        scalar_part: pots.scalar,
        gauge_note: GAUGE_NOTE,
        reference_note,
        validation,
    })
}

/// Gauge-level equivalence: two Lagrangians are compared through their
/// Euler–Lagrange equations, which quotients out total-derivative terms.
pub fn gauge_equivalent(
    l1: &Expr,
    l2: &Expr,
    n: u32,
    settings: &ZeroSettings,
) -> Result<bool, ExprError> {
    let e1 = euler_lagrange(l1, n)?;
    let e2 = euler_lagrange(l2, n)?;
    for (a, b) in e1.iter().zip(&e2) {
        if !is_zero(&(a.clone() - b.clone()), settings)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
