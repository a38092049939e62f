//! The Helmholtz conditions H1–H3 and the structure they force on a system.
//!
//! For a system `F_i(t, x, x', x'') = 0` the three conditions are, as
//! residuals oriented left-minus-right of the printed identities:
//!
//! - `H1_ij = ∂F_i/∂x''_j - ∂F_j/∂x''_i` for `i < j`
//! - `H2_ij = (∂F_i/∂x_j - ∂F_j/∂x_i) - ½ d/dt(∂F_i/∂x'_j - ∂F_j/∂x'_i)`
//!   for `i < j`; the total derivative introduces third-order variables and
//!   the residual must vanish identically in those as well
//! - `H3_ij = (∂F_i/∂x'_j + ∂F_j/∂x'_i) - 2 d/dt(∂F_j/∂x''_i)` for `i ≤ j`
//!
//! For `n = 1` the antisymmetric conditions H1 and H2 are vacuous and are
//! reported as such, not as passes. H3 is stated in its literal unsymmetrized
//! form; under H1 it coincides with the `i ↔ j` symmetrized version, so the
//! report lists H1 before H3.

use crate::expr::{
    differentiate, is_zero, residual_check, substitute, total_time_derivative, Expr, ExprError,
    Variable, ZeroCheck, ZeroSettings,
};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HelmholtzError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("equation {i} is not linear in accelerations (second derivative wrt x''_{j}, x''_{k} is nonzero)")]
    NonlinearAcceleration { i: usize, j: usize, k: usize },
    #[error("equation {i} did not reassemble from its acceleration decomposition")]
    Reassembly { i: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A system of `n` second-order equations `F_i = 0`, one per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSystem {
    coordinates: Vec<String>,
    parameters: Vec<String>,
    equations: Vec<Expr>,
}

impl OdeSystem {
    /// Validates counts, index bounds and the absence of third-order
    /// variables; equations are stored normalized.
    pub fn new(
        coordinates: Vec<String>,
        parameters: Vec<String>,
        equations: Vec<Expr>,
    ) -> Result<Self, HelmholtzError> {
        let n = coordinates.len();
        if n == 0 {
            return Err(HelmholtzError::InvalidSystem(
                "a system needs at least one coordinate".into(),
            ));
        }
        if equations.len() != n {
            return Err(HelmholtzError::InvalidSystem(format!(
                "{} coordinates but {} equations",
                n,
                equations.len()
            )));
        }
        let equations: Vec<Expr> = equations.iter().map(|e| e.normalize()).collect();
        for (idx, eq) in equations.iter().enumerate() {
            for v in eq.variables() {
                if v.is_jerk() {
                    return Err(HelmholtzError::InvalidSystem(format!(
                        "equation {} contains a third-order derivative",
                        idx + 1
                    )));
                }
                if let Some(i) = v.index() {
                    if i as usize > n {
                        return Err(HelmholtzError::InvalidSystem(format!(
                            "equation {} references coordinate index {} beyond n = {}",
                            idx + 1,
                            i,
                            n
                        )));
                    }
                }
            }
        }
        Ok(OdeSystem {
            coordinates,
            parameters,
            equations,
        })
    }

    pub fn n(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn equations(&self) -> &[Expr] {
        &self.equations
    }

    /// System with every equation multiplied by `factor`, normalized.
    pub fn scaled(&self, factor: &Expr) -> Result<OdeSystem, HelmholtzError> {
        OdeSystem::new(
            self.coordinates.clone(),
            self.parameters.clone(),
            self.equations
                .iter()
                .map(|e| (factor.clone() * e.clone()).normalize())
                .collect(),
        )
    }
}

/// The linear-in-acceleration form `F_i = P_i + Σ_j Q_ij x''_j`.
///
/// `force` is `P` (acceleration-free) and `accel_coeff` is the matrix `Q`.
#[derive(Debug, Clone)]
pub struct AccelDecomposition {
    pub force: Vec<Expr>,
    pub accel_coeff: Vec<Vec<Expr>>,
    pub symmetric: bool,
}

impl AccelDecomposition {
    pub fn n(&self) -> usize {
        self.force.len()
    }
}

/// Extract the acceleration decomposition, verifying linearity in `x''`
/// (each second acceleration derivative must vanish) and recording whether
/// the coefficient matrix is symmetric.
pub fn decompose(
    sys: &OdeSystem,
    settings: &ZeroSettings,
) -> Result<AccelDecomposition, HelmholtzError> {
    let n = sys.n();
    for (idx, f) in sys.equations().iter().enumerate() {
        for j in 1..=n {
            for k in j..=n {
                let second = differentiate(
                    &differentiate(f, &Variable::Accel(j as u32)),
                    &Variable::Accel(k as u32),
                );
                let check = is_zero(&second, settings)?;
                if !check.is_zero() {
                    return Err(HelmholtzError::NonlinearAcceleration {
                        i: idx + 1,
                        j,
                        k,
                    });
                }
            }
        }
    }
    let strip_accel = |e: &Expr| -> Expr {
        let mut out = e.clone();
        for j in 1..=n {
            out = substitute(&out, &Variable::Accel(j as u32), &Expr::zero());
        }
        out
    };
    let mut force = Vec::with_capacity(n);
    let mut accel_coeff = Vec::with_capacity(n);
    for f in sys.equations() {
        force.push(strip_accel(f));
        let row: Vec<Expr> = (1..=n)
            .map(|j| strip_accel(&differentiate(f, &Variable::Accel(j as u32))))
            .collect();
        accel_coeff.push(row);
    }
    // reassembly must reproduce F_i
    for (idx, f) in sys.equations().iter().enumerate() {
        let mut rebuilt = force[idx].clone();
        for (j, q) in accel_coeff[idx].iter().enumerate() {
            rebuilt = rebuilt + q.clone() * Expr::accel((j + 1) as u32);
        }
        let check = is_zero(&(rebuilt - f.clone()), settings)?;
        if !check.is_zero() {
            return Err(HelmholtzError::Reassembly { i: idx + 1 });
        }
    }
    let mut symmetric = true;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = accel_coeff[i][j].clone() - accel_coeff[j][i].clone();
            if !is_zero(&diff, settings)?.is_zero() {
                symmetric = false;
            }
        }
    }
    Ok(AccelDecomposition {
        force,
        accel_coeff,
        symmetric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    H1,
    H2,
    H3,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Condition::H1 => write!(f, "H1"),
            Condition::H2 => write!(f, "H2"),
            Condition::H3 => write!(f, "H3"),
        }
    }
}

/// One residual identity, indexed by the ordered pair it came from.
#[derive(Debug, Clone)]
pub struct ResidualEntry {
    pub condition: Condition,
    pub i: usize,
    pub j: usize,
    pub residual: Expr,
    pub check: ZeroCheck,
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub condition: Condition,
    /// True when the index range is empty (H1/H2 at n = 1).
    pub vacuous: bool,
    pub entries: Vec<ResidualEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overall {
    Pass,
    /// Every residual vanishes, but at least one only numerically.
    PassWithCaveat,
    Fail,
}

#[derive(Debug, Clone)]
pub struct HelmholtzReport {
    pub n: usize,
    pub settings: ZeroSettings,
    pub conditions: Vec<ConditionReport>,
    pub overall: Overall,
}

impl HelmholtzReport {
    pub fn passed(&self) -> bool {
        !matches!(self.overall, Overall::Fail)
    }

    pub fn condition(&self, c: Condition) -> &ConditionReport {
        self.conditions
            .iter()
            .find(|r| r.condition == c)
            .expect("all three conditions are always present")
    }

    pub fn entry(&self, c: Condition, i: usize, j: usize) -> Option<&ResidualEntry> {
        self.condition(c)
            .entries
            .iter()
            .find(|e| e.i == i && e.j == j)
    }
}

/// Decide H1–H3 for a system.
pub fn check(sys: &OdeSystem, settings: &ZeroSettings) -> Result<HelmholtzReport, HelmholtzError> {
    let n = sys.n();
    let nn = n as u32;
    let f = sys.equations();
    let part = |i: usize, v: Variable| differentiate(&f[i], &v);

    let mut h1 = Vec::new();
    let mut h2 = Vec::new();
    let mut h3 = Vec::new();

    for i in 0..n {
        for j in (i + 1)..n {
            let residual = part(i, Variable::Accel((j + 1) as u32))
                - part(j, Variable::Accel((i + 1) as u32));
            let (residual, check) = residual_check(&residual, settings)?;
            h1.push(ResidualEntry {
                condition: Condition::H1,
                i: i + 1,
                j: j + 1,
                residual,
                check,
            });
        }
    }

    for i in 0..n {
        for j in (i + 1)..n {
            let coord_part = part(i, Variable::Coord((j + 1) as u32))
                - part(j, Variable::Coord((i + 1) as u32));
            let vel_part = part(i, Variable::Vel((j + 1) as u32))
                - part(j, Variable::Vel((i + 1) as u32));
            let residual =
                coord_part - Expr::rational(1, 2) * total_time_derivative(&vel_part, nn)?;
            let (residual, check) = residual_check(&residual, settings)?;
            h2.push(ResidualEntry {
                condition: Condition::H2,
                i: i + 1,
                j: j + 1,
                residual,
                check,
            });
        }
    }

    for i in 0..n {
        for j in i..n {
            let sym = part(i, Variable::Vel((j + 1) as u32)) + part(j, Variable::Vel((i + 1) as u32));
            let momentum = part(j, Variable::Accel((i + 1) as u32));
            let residual = sym - Expr::int(2) * total_time_derivative(&momentum, nn)?;
            let (residual, check) = residual_check(&residual, settings)?;
            h3.push(ResidualEntry {
                condition: Condition::H3,
                i: i + 1,
                j: j + 1,
                residual,
                check,
            });
        }
    }

    let conditions = vec![
        ConditionReport {
            condition: Condition::H1,
            vacuous: n == 1,
            entries: h1,
        },
        ConditionReport {
            condition: Condition::H2,
            vacuous: n == 1,
            entries: h2,
        },
        ConditionReport {
            condition: Condition::H3,
            vacuous: false,
            entries: h3,
        },
    ];

    let mut overall = Overall::Pass;
    for report in &conditions {
        for entry in &report.entries {
            match &entry.check.verdict {
                crate::expr::Verdict::ProvenZero => {}
                crate::expr::Verdict::NumericallyZero => {
                    if overall == Overall::Pass {
                        overall = Overall::PassWithCaveat;
                    }
                }
                crate::expr::Verdict::Nonzero(_) => overall = Overall::Fail,
            }
        }
    }

    Ok(HelmholtzReport {
        n,
        settings: *settings,
        conditions,
        overall,
    })
}

/// Finer-grained identities implied by H1–H3 on the decomposition,
/// used to diagnose failures and as preconditions of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivedCondition {
    /// `∂Q_ik/∂x'_j = ∂Q_jk/∂x'_i` (velocity exactness of the rows of Q).
    VelocityExactness,
    /// `∂Q_ik/∂x_j - ∂Q_jk/∂x_i = ½(∂²P_i/∂x'_j∂x'_k - ∂²P_j/∂x'_i∂x'_k)`.
    CoefficientBalance,
    /// The combined force identity obtained from the cyclic interchange.
    ForceIdentity,
}

impl std::fmt::Display for DerivedCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DerivedCondition::VelocityExactness => write!(f, "velocity-exactness"),
            DerivedCondition::CoefficientBalance => write!(f, "coefficient-balance"),
            DerivedCondition::ForceIdentity => write!(f, "force-identity"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DerivedEntry {
    pub condition: DerivedCondition,
    pub i: usize,
    pub j: usize,
    pub k: Option<usize>,
    pub residual: Expr,
    pub check: ZeroCheck,
}

#[derive(Debug, Clone)]
pub struct DerivedReport {
    pub entries: Vec<DerivedEntry>,
}

impl DerivedReport {
    pub fn all_zero(&self) -> bool {
        self.entries.iter().all(|e| e.check.is_zero())
    }
}

/// Evaluate the derived diagnostic identities on a symmetric decomposition.
pub fn derived_conditions(
    dec: &AccelDecomposition,
    settings: &ZeroSettings,
) -> Result<DerivedReport, HelmholtzError> {
    let n = dec.n();
    let q = &dec.accel_coeff;
    let p = &dec.force;
    let mut entries = Vec::new();

    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                let residual = differentiate(&q[i][k], &Variable::Vel((j + 1) as u32))
                    - differentiate(&q[j][k], &Variable::Vel((i + 1) as u32));
                let (residual, check) = residual_check(&residual, settings)?;
                entries.push(DerivedEntry {
                    condition: DerivedCondition::VelocityExactness,
                    i: i + 1,
                    j: j + 1,
                    k: Some(k + 1),
                    residual,
                    check,
                });
            }
        }
    }

    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                let vjk = Variable::Vel((j + 1) as u32);
                let vik = Variable::Vel((i + 1) as u32);
                let vk = Variable::Vel((k + 1) as u32);
                let lhs = differentiate(&q[i][k], &Variable::Coord((j + 1) as u32))
                    - differentiate(&q[j][k], &Variable::Coord((i + 1) as u32));
                let rhs = Expr::rational(1, 2)
                    * (differentiate(&differentiate(&p[i], &vjk), &vk)
                        - differentiate(&differentiate(&p[j], &vik), &vk));
                let (residual, check) = residual_check(&(lhs - rhs), settings)?;
                entries.push(DerivedEntry {
                    condition: DerivedCondition::CoefficientBalance,
                    i: i + 1,
                    j: j + 1,
                    k: Some(k + 1),
                    residual,
                    check,
                });
            }
        }
    }

    for i in 0..n {
        for j in (i + 1)..n {
            let xi = Variable::Coord((i + 1) as u32);
            let xj = Variable::Coord((j + 1) as u32);
            let vi = Variable::Vel((i + 1) as u32);
            let vj = Variable::Vel((j + 1) as u32);
            let mut residual = differentiate(&p[j], &xi) - differentiate(&p[i], &xj);
            let mut bracket = differentiate(&differentiate(&p[i], &Variable::Time), &vj)
                - differentiate(&differentiate(&p[j], &Variable::Time), &vi);
            for k in 0..n {
                let xk_vel = Expr::vel((k + 1) as u32);
                let vk = Variable::Vel((k + 1) as u32);
                let cyc = differentiate(&differentiate(&p[i], &xj), &vk)
                    - differentiate(&differentiate(&p[k], &xj), &vi)
                    + differentiate(&differentiate(&p[k], &xi), &vj)
                    - differentiate(&differentiate(&p[j], &xi), &vk);
                bracket = bracket + cyc * xk_vel;
            }
            residual = residual + Expr::rational(1, 2) * bracket;
            let (residual, check) = residual_check(&residual, settings)?;
            entries.push(DerivedEntry {
                condition: DerivedCondition::ForceIdentity,
                i: i + 1,
                j: j + 1,
                k: None,
                residual,
                check,
            });
        }
    }

    Ok(DerivedReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Verdict;

    fn settings() -> ZeroSettings {
        ZeroSettings::default()
    }

    fn shm() -> OdeSystem {
        OdeSystem::new(
            vec!["x1".into()],
            vec!["w".into()],
            vec![Expr::accel(1) + Expr::param("w").pow_int(2) * Expr::coord(1)],
        )
        .unwrap()
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

    fn weighted_dho() -> OdeSystem {
        let weight = Expr::exp(Expr::param("b") * Expr::time());
        OdeSystem::new(
            vec!["x1".into()],
            vec!["b".into(), "w".into()],
            vec![
                weight
                    * (Expr::accel(1)
                        + Expr::param("b") * Expr::vel(1)
                        + Expr::param("w").pow_int(2) * Expr::coord(1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn decomposes_weighted_damped_oscillator() {
        let dec = decompose(&weighted_dho(), &settings()).unwrap();
        let weight = Expr::exp(Expr::param("b") * Expr::time()).normalize();
        assert_eq!(dec.accel_coeff[0][0], weight.clone());
        let expected_force = (weight
            * (Expr::param("b") * Expr::vel(1) + Expr::param("w").pow_int(2) * Expr::coord(1)))
        .normalize();
        assert_eq!(dec.force[0], expected_force);
        assert!(dec.symmetric);
    }

    #[test]
    fn decomposes_linear_extraction() {
        let dec = decompose(&shm(), &settings()).unwrap();
        assert!(dec.accel_coeff[0][0].is_const_one());
        assert_eq!(
            dec.force[0],
            (Expr::param("w").pow_int(2) * Expr::coord(1)).normalize()
        );
    }

    #[test]
    fn rejects_quadratic_accelerations() {
        let sys = OdeSystem::new(
            vec!["x1".into()],
            vec![],
            vec![Expr::accel(1).pow_int(2)],
        )
        .unwrap();
        let err = decompose(&sys, &settings()).unwrap_err();
        assert!(matches!(err, HelmholtzError::NonlinearAcceleration { i: 1, j: 1, k: 1 }));
    }

    #[test]
    fn shm_passes_with_proven_residual() {
        let report = check(&shm(), &settings()).unwrap();
        assert_eq!(report.overall, Overall::Pass);
        let h3 = report.entry(Condition::H3, 1, 1).unwrap();
        assert_eq!(h3.check.verdict, Verdict::ProvenZero);
        assert!(report.condition(Condition::H1).vacuous);
        assert!(report.condition(Condition::H2).vacuous);
    }

    #[test]
    fn dho_fails_h3_with_residual_2b() {
        let report = check(&dho(), &settings()).unwrap();
        assert_eq!(report.overall, Overall::Fail);
        let h3 = report.entry(Condition::H3, 1, 1).unwrap();
        assert_eq!(h3.residual.pretty(&[]), "2*b");
        assert!(matches!(h3.check.verdict, Verdict::Nonzero(_)));
    }

    #[test]
    fn multiplier_weighted_dho_passes() {
        let report = check(&weighted_dho(), &settings()).unwrap();
        assert_eq!(report.overall, Overall::Pass);
    }

    #[test]
    fn asymmetric_acceleration_coupling_fails_h1() {
        let sys = OdeSystem::new(
            vec!["x1".into(), "x2".into()],
            vec![],
            vec![Expr::accel(1) + Expr::accel(2), Expr::accel(2)],
        )
        .unwrap();
        let report = check(&sys, &settings()).unwrap();
        assert_eq!(report.overall, Overall::Fail);
        let h1 = report.entry(Condition::H1, 1, 2).unwrap();
        assert!(h1.residual.is_const_one());
    }

    #[test]
    fn h1_residual_is_antisymmetric() {
        // recomputing with swapped roles flips the sign
        let sys = OdeSystem::new(
            vec!["x1".into(), "x2".into()],
            vec![],
            vec![Expr::accel(1) + Expr::accel(2), Expr::accel(2)],
        )
        .unwrap();
        let f = sys.equations();
        let a = differentiate(&f[0], &Variable::Accel(2)) - differentiate(&f[1], &Variable::Accel(1));
        let b = differentiate(&f[1], &Variable::Accel(1)) - differentiate(&f[0], &Variable::Accel(2));
        assert!((a + b).normalize().is_const_zero());
    }

    #[test]
    fn coupled_oscillator_diagnostics_are_zero() {
        let sys = OdeSystem::new(
            vec!["x1".into(), "x2".into()],
            vec![],
            vec![
                Expr::accel(1) + Expr::coord(2),
                Expr::accel(2) + Expr::coord(1),
            ],
        )
        .unwrap();
        let dec = decompose(&sys, &settings()).unwrap();
        let report = derived_conditions(&dec, &settings()).unwrap();
        assert!(report.all_zero());
        for entry in &report.entries {
            assert_eq!(entry.check.verdict, Verdict::ProvenZero);
        }
    }

    #[test]
    fn shm_diagnostics_are_zero() {
        let dec = decompose(&shm(), &settings()).unwrap();
        let report = derived_conditions(&dec, &settings()).unwrap();
        // n = 1: every diagnostic ranges over i < j, so the report is empty
        assert!(report.entries.is_empty());
        assert!(report.all_zero());
    }

    #[test]
    fn velocity_free_weight_satisfies_velocity_exactness() {
        let sys = OdeSystem::new(
            vec!["x1".into(), "x2".into()],
            vec!["b".into()],
            vec![
                Expr::exp(Expr::param("b") * Expr::time()) * Expr::accel(1),
                Expr::exp(Expr::param("b") * Expr::time()) * Expr::accel(2),
            ],
        )
        .unwrap();
        let dec = decompose(&sys, &settings()).unwrap();
        let report = derived_conditions(&dec, &settings()).unwrap();
        for entry in report
            .entries
            .iter()
            .filter(|e| e.condition == DerivedCondition::VelocityExactness)
        {
            assert_eq!(entry.check.verdict, Verdict::ProvenZero);
        }
    }

    #[test]
    fn h2_residuals_are_checked_as_identities_in_third_order_variables() {
        // ∂F1/∂x2' = x1'' makes the H2 total derivative produce x1''';
        // the residual must be treated as nonzero in that free variable
        let sys = OdeSystem::new(
            vec!["x1".into(), "x2".into()],
            vec![],
            vec![Expr::accel(1) * Expr::vel(2), Expr::accel(2)],
        )
        .unwrap();
        let report = check(&sys, &settings()).unwrap();
        let h2 = report.entry(Condition::H2, 1, 2).unwrap();
        assert!(h2.residual.contains_jerk(), "{}", h2.residual);
        assert_eq!(
            h2.residual,
            (Expr::rational(-1, 2) * Expr::jerk(1)).normalize()
        );
        assert!(matches!(h2.check.verdict, Verdict::Nonzero(_)));
    }

    #[test]
    fn report_is_deterministic() {
        let r1 = check(&dho(), &settings()).unwrap();
        let r2 = check(&dho(), &settings()).unwrap();
        let e1 = r1.entry(Condition::H3, 1, 1).unwrap();
        let e2 = r2.entry(Condition::H3, 1, 1).unwrap();
        assert_eq!(e1.check, e2.check);
    }
}
