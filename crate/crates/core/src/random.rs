//! Seeded generators for the property and acceptance suites.
//!
//! The admissible Lagrangian family is quadratic in velocities with a
//! constant positive-definite velocity Hessian (integer, strictly diagonally
//! dominant) and polynomial coefficients of total degree at most three in
//! `(t, x)`. Exact forms are gradients of potentials built from polynomials
//! plus at most one exponential factor in a single variable, which keeps
//! both integration routes inside the closed-form class.

use crate::expr::{differentiate, Expr, Variable};
use rand::Rng;

fn rand_coeff<R: Rng>(rng: &mut R) -> Expr {
    let numer = loop {
        let k = rng.gen_range(-3i64..=3);
        if k != 0 {
            break k;
        }
    };
    let denom = if rng.gen_bool(0.3) { 2 } else { 1 };
    Expr::rational(numer, denom)
}

/// Random polynomial over `vars` with total degree at most `max_degree`.
pub fn polynomial<R: Rng>(rng: &mut R, vars: &[Variable], max_degree: u32, max_terms: u32) -> Expr {
    let n_terms = rng.gen_range(1..=max_terms.max(1));
    let mut terms = Vec::with_capacity(n_terms as usize);
    for _ in 0..n_terms {
        let mut factors = vec![rand_coeff(rng)];
        let mut remaining = max_degree;
        for v in vars {
            if remaining == 0 {
                break;
            }
            let e = rng.gen_range(0..=remaining.min(3));
            if e > 0 {
                factors.push(Expr::Var(v.clone()).pow_int(e as i64));
                remaining -= e;
            }
        }
        terms.push(Expr::Product(factors));
    }
    Expr::Sum(terms).normalize()
}

fn tx_vars(n: u32) -> Vec<Variable> {
    let mut vars = vec![Variable::Time];
    vars.extend((1..=n).map(Variable::Coord));
    vars
}

/// Constant, symmetric, strictly diagonally dominant (hence positive
/// definite) integer velocity Hessian.
pub fn spd_matrix<R: Rng>(rng: &mut R, n: u32) -> Vec<Vec<i64>> {
    let n = n as usize;
    let mut m = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(-2i64..=2);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    for i in 0..n {
        let off: i64 = (0..n).filter(|j| *j != i).map(|j| m[i][j].abs()).sum();
        m[i][i] = off + 1 + rng.gen_range(0i64..=2);
    }
    m
}

/// A member of the admissible Lagrangian family:
/// `½ Σ M_ij x'_i x'_j + Σ A_i(t,x) x'_i + B(t,x)`.
pub fn admissible_lagrangian<R: Rng>(rng: &mut R, n: u32) -> Expr {
    let m = spd_matrix(rng, n);
    let mut terms = Vec::new();
    for i in 0..n as usize {
        for j in 0..n as usize {
            if m[i][j] != 0 {
                terms.push(
                    Expr::rational(m[i][j], 2)
                        * Expr::vel(i as u32 + 1)
                        * Expr::vel(j as u32 + 1),
                );
            }
        }
    }
    let vars = tx_vars(n);
    for i in 1..=n {
        terms.push(polynomial(rng, &vars, 3, 4) * Expr::vel(i));
    }
    terms.push(polynomial(rng, &vars, 3, 4));
    Expr::Sum(terms).normalize()
}

/// Random gauge function `f(t, x)` whose total derivative leaves
/// Euler–Lagrange equations unchanged.
pub fn gauge_function<R: Rng>(rng: &mut R, n: u32) -> Expr {
    polynomial(rng, &tx_vars(n), 3, 4)
}

/// Exact differential form over `vars`: returns the gradient components and
/// the potential they came from.
pub fn exact_form<R: Rng>(rng: &mut R, vars: &[Variable]) -> (Vec<Expr>, Expr) {
    let mut potential = polynomial(rng, vars, 4, 5);
    if rng.gen_bool(0.5) {
        // one exponential in a single variable keeps parameter integrals
        // inside the closed-form class on every path
        let k = rng.gen_range(0..vars.len());
        let c = rng.gen_range(1i64..=2);
        let others: Vec<Variable> = vars
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, v)| v.clone())
            .collect();
        let weight = if others.is_empty() {
            rand_coeff(rng)
        } else {
            polynomial(rng, &others, 2, 3)
        };
        potential = (potential
            + weight * Expr::exp(Expr::int(c) * Expr::Var(vars[k].clone())))
        .normalize();
    }
    let gradient = vars
        .iter()
        .map(|v| differentiate(&potential, v))
        .collect();
    (gradient, potential)
}

/// Non-exact form: an exact form with an asymmetric perturbation whose curl
/// is a nonzero constant-coefficient monomial.
pub fn curled_form<R: Rng>(rng: &mut R, vars: &[Variable]) -> Vec<Expr> {
    assert!(vars.len() >= 2, "a curl needs at least two variables");
    let (mut f, _) = exact_form(rng, vars);
    let i = rng.gen_range(0..vars.len());
    let j = loop {
        let j = rng.gen_range(0..vars.len());
        if j != i {
            break j;
        }
    };
    let c = rng.gen_range(1i64..=3);
    let k = rng.gen_range(1i64..=3);
    f[i] = (f[i].clone() + Expr::int(c) * Expr::Var(vars[j].clone()).pow_int(k)).normalize();
    f
}

/// Random expression tree for derivative-oracle tests. Logarithms and square
/// roots are applied to `2 + u^2` so every sample point stays in domain.
pub fn oracle_expression<R: Rng>(rng: &mut R, vars: &[Variable], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.7) {
            let v = &vars[rng.gen_range(0..vars.len())];
            Expr::Var(v.clone())
        } else {
            rand_coeff(rng)
        };
    }
    match rng.gen_range(0u32..10) {
        0..=2 => {
            let k = rng.gen_range(2..=3);
            Expr::Sum((0..k).map(|_| oracle_expression(rng, vars, depth - 1)).collect())
        }
        3..=5 => Expr::Product(vec![
            oracle_expression(rng, vars, depth - 1),
            oracle_expression(rng, vars, depth - 1),
        ]),
        6 => oracle_expression(rng, vars, depth - 1).pow_int(rng.gen_range(2..=3)),
        7 => Expr::exp(Expr::rational(1, 4) * oracle_expression(rng, vars, depth - 1)),
        8 => {
            let arg = oracle_expression(rng, vars, depth - 1);
            if rng.gen_bool(0.5) {
                Expr::sin(arg)
            } else {
                Expr::cos(arg)
            }
        }
        _ => {
            let guarded =
                Expr::int(2) + oracle_expression(rng, vars, depth - 1).pow_int(2);
            if rng.gen_bool(0.5) {
                Expr::ln(guarded)
            } else {
                Expr::sqrt(guarded)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_deterministic() {
        let a = admissible_lagrangian(&mut ChaCha8Rng::seed_from_u64(7), 2);
        let b = admissible_lagrangian(&mut ChaCha8Rng::seed_from_u64(7), 2);
        assert_eq!(a, b);
    }

    #[test]
    fn hessian_is_diagonally_dominant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let m = spd_matrix(&mut rng, n);
            for i in 0..n as usize {
                let off: i64 = (0..n as usize)
                    .filter(|j| *j != i)
                    .map(|j| m[i][j].abs())
                    .sum();
                assert!(m[i][i] > off);
                for j in 0..n as usize {
                    assert_eq!(m[i][j], m[j][i]);
                }
            }
        }
    }

    #[test]
    fn exact_forms_really_are_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vars = vec![Variable::Coord(1), Variable::Coord(2)];
        for _ in 0..10 {
            let (f, potential) = exact_form(&mut rng, &vars);
            for (i, v) in vars.iter().enumerate() {
                assert_eq!(f[i], differentiate(&potential, v));
            }
        }
    }
}
