//! Deterministic normal form.
//!
//! The canonical form is a sparse multivariate polynomial with exact rational
//! coefficients over "factors": variables, kernel applications and opaque
//! bases (sums or constants carried under a non-expandable power). A term is
//! `coeff · Π factor^exponent` with rational exponents; like terms merge, sums
//! raised to small positive integer powers expand distributively, exponential
//! factors combine via `exp(a)·exp(b) = exp(a+b)` and `exp(u)^r = exp(r·u)`,
//! and `sqrt(u)` is rewritten as `u^(1/2)`.
//!
//! No trig/log identities are applied; equality beyond this form is the job
//! of the seeded numeric zero test.

use super::{Expr, KernelFn, Variable};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

pub(crate) type Rat = BigRational;

/// Sums raised to integer powers above this stay opaque instead of expanding.
const EXPAND_CAP: i64 = 32;
/// Bound on exponent magnitude for exact rational constant folding.
const COEFF_POW_CAP: i64 = 4096;

/// One multiplicative factor of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Factor {
    Var(Variable),
    /// Kernel application; the argument is canonical.
    Kernel(KernelFn, Expr),
    /// A canonical sum (or unfoldable constant) kept whole under a power.
    Opaque(Expr),
}

impl Factor {
    fn to_expr(&self) -> Expr {
        match self {
            Factor::Var(v) => Expr::Var(v.clone()),
            Factor::Kernel(f, a) => Expr::Kernel(*f, Box::new(a.clone())),
            Factor::Opaque(e) => e.clone(),
        }
    }
}

/// Monomial: factor → nonzero rational exponent.
pub(crate) type Mono = BTreeMap<Factor, Rat>;

/// Normalized polynomial: monomial → nonzero coefficient.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Poly {
    terms: BTreeMap<Mono, Rat>,
}

impl Poly {
    pub(crate) fn zero() -> Self {
        Poly::default()
    }

    pub(crate) fn one() -> Self {
        Poly::from_const(Rat::one())
    }

    pub(crate) fn from_const(c: Rat) -> Self {
        let mut p = Poly::zero();
        p.add_term(Mono::new(), c);
        p
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Mono::new())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    fn add_term(&mut self, mono: Mono, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub(crate) fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub(crate) fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut out = Poly::zero();
        for (m, k) in &self.terms {
            out.add_term(m.clone(), k.clone() * c);
        }
        out
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut mono = m1.clone();
                for (f, e) in m2 {
                    merge_exponent(&mut mono, f.clone(), e.clone());
                }
                push_term(&mut out, mono, c1.clone() * c2.clone());
            }
        }
        out
    }

    /// Raise to an exact rational power, staying sound everywhere the
    /// operands are defined; anything unsound to rewrite stays opaque.
    pub(crate) fn pow(&self, e: &Rat) -> Poly {
        if e.is_zero() {
            return Poly::one();
        }
        if e.is_one() {
            return self.clone();
        }
        if self.is_zero() {
            return if e.is_positive() {
                Poly::zero()
            } else {
                // 0^negative: undefined; keep symbolic so evaluation reports it
                let mut mono = Mono::new();
                mono.insert(Factor::Opaque(Expr::zero()), e.clone());
                let mut p = Poly::zero();
                p.add_term(mono, Rat::one());
                p
            };
        }
        if self.terms.len() == 1 {
            let (mono, coeff) = self.terms.iter().next().expect("single term");
            if e.is_integer() {
                if let Some(k) = e.to_integer().to_i64() {
                    if k.abs() <= COEFF_POW_CAP {
                        let new_coeff = rat_pow_int(coeff, k);
                        let mut out = Poly::zero();
                        let mut scaled = Mono::new();
                        for (f, ex) in mono {
                            scaled.insert(f.clone(), ex.clone() * e);
                        }
                        push_term(&mut out, scaled, new_coeff);
                        return out;
                    }
                }
                return self.opaque_power(e);
            }
            // fractional exponent
            if mono.is_empty() {
                // pure constant
                if let Some(folded) = fold_const_root(coeff, e) {
                    return Poly::from_const(folded);
                }
                return self.opaque_power(e);
            }
            if coeff.is_one() && mono.len() == 1 {
                let (f, ex) = mono.iter().next().expect("single factor");
                if ex.is_one() {
                    // bare atom: atom^e is the definition, nothing to rewrite
                    let mut out = Poly::zero();
                    let mut m = Mono::new();
                    m.insert(f.clone(), e.clone());
                    push_term(&mut out, m, Rat::one());
                    return out;
                }
            }
            return self.opaque_power(e);
        }
        // multi-term base
        if e.is_integer() && e.is_positive() {
            if let Some(k) = e.to_integer().to_i64() {
                if k <= EXPAND_CAP {
                    return self.pow_usize(k as usize);
                }
            }
        }
        self.opaque_power(e)
    }

    fn pow_usize(&self, k: usize) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    fn opaque_power(&self, e: &Rat) -> Poly {
        let mut mono = Mono::new();
        mono.insert(Factor::Opaque(rebuild(self)), e.clone());
        let mut p = Poly::zero();
        // do not route through push_term: the exponent is non-promotable by
        // construction, and constants were already offered for folding
        p.add_term(mono, Rat::one());
        p
    }
}

fn merge_exponent(mono: &mut Mono, f: Factor, e: Rat) {
    match mono.entry(f) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(e);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get().clone() + e;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

/// Insert `coeff · mono` into `out`, canonicalizing the monomial first:
/// all exponential factors fuse into a single `exp(·)^1`, opaque constants
/// fold into the coefficient when their exponent allows it, and opaque sums
/// that acquired a small positive integer exponent expand distributively.
fn push_term(out: &mut Poly, mono: Mono, coeff: Rat) {
    if coeff.is_zero() {
        return;
    }
    let mut coeff = coeff;
    let mut plain = Mono::new();
    let mut exp_args: Vec<(Expr, Rat)> = Vec::new();
    let mut expandable: Vec<(Expr, i64)> = Vec::new();
    let mut zero_term = false;

    for (f, e) in mono {
        match f {
            Factor::Kernel(KernelFn::Exp, arg) => exp_args.push((arg, e)),
            Factor::Opaque(inner) => {
                if let Expr::Const(c) = &inner {
                    if let Some(folded) = fold_opaque_const(c, &e) {
                        match folded {
                            FoldedConst::Value(v) => coeff *= v,
                            FoldedConst::Zero => zero_term = true,
                            FoldedConst::Keep => {
                                plain.insert(Factor::Opaque(inner), e);
                            }
                        }
                        continue;
                    }
                    plain.insert(Factor::Opaque(inner), e);
                    continue;
                }
                if e.is_integer() && e.is_positive() {
                    if let Some(k) = e.to_integer().to_i64() {
                        if k <= EXPAND_CAP {
                            expandable.push((inner, k));
                            continue;
                        }
                    }
                }
                plain.insert(Factor::Opaque(inner), e);
            }
            other => {
                plain.insert(other, e);
            }
        }
    }
    if zero_term {
        return;
    }

    if exp_args.len() == 1 && exp_args[0].1.is_one() {
        let (arg, e) = exp_args.pop().expect("one element");
        plain.insert(Factor::Kernel(KernelFn::Exp, arg), e);
    } else if !exp_args.is_empty() {
        let mut total = Poly::zero();
        for (arg, e) in exp_args {
            total = total.add(&to_poly(&arg).scale(&e));
        }
        if !total.is_zero() {
            plain.insert(Factor::Kernel(KernelFn::Exp, rebuild(&total)), Rat::one());
        }
    }

    if expandable.is_empty() {
        out.add_term(plain, coeff);
        return;
    }
    let mut acc = Poly::zero();
    acc.add_term(plain, coeff);
    for (inner, k) in expandable {
        let p = to_poly(&inner).pow_usize(k as usize);
        acc = acc.mul(&p);
    }
    for (m, c) in acc.terms {
        out.add_term(m, c);
    }
}

enum FoldedConst {
    Value(Rat),
    Zero,
    Keep,
}

fn fold_opaque_const(c: &Rat, e: &Rat) -> Option<FoldedConst> {
    if c.is_zero() {
        return if e.is_positive() {
            Some(FoldedConst::Zero)
        } else {
            Some(FoldedConst::Keep)
        };
    }
    if e.is_integer() {
        if let Some(k) = e.to_integer().to_i64() {
            if k.abs() <= COEFF_POW_CAP {
                return Some(FoldedConst::Value(rat_pow_int(c, k)));
            }
        }
        return Some(FoldedConst::Keep);
    }
    match fold_const_root(c, e) {
        Some(v) => Some(FoldedConst::Value(v)),
        None => Some(FoldedConst::Keep),
    }
}

fn rat_pow_int(c: &Rat, k: i64) -> Rat {
    if k == 0 {
        return Rat::one();
    }
    let mag = k.unsigned_abs();
    debug_assert!(mag <= COEFF_POW_CAP as u64);
    let n = c.numer().pow(mag as u32);
    let d = c.denom().pow(mag as u32);
    if k > 0 {
        Rat::new(n, d)
    } else {
        Rat::new(d, n)
    }
}

/// Exact value of `c^(p/q)` when it exists as a rational, e.g. `4^(1/2) = 2`.
fn fold_const_root(c: &Rat, e: &Rat) -> Option<Rat> {
    if c.is_negative() {
        return None;
    }
    if c.is_zero() {
        return e.is_positive().then(Rat::zero);
    }
    if c.is_one() {
        return Some(Rat::one());
    }
    let q = e.denom().to_u32().filter(|q| *q <= 64)?;
    let p = e.numer().to_i64().filter(|p| p.abs() <= COEFF_POW_CAP)?;
    let rn = c.numer().nth_root(q);
    let rd = c.denom().nth_root(q);
    if rn.pow(q) != *c.numer() || rd.pow(q) != *c.denom() {
        return None;
    }
    let root = Rat::new(rn, rd);
    Some(rat_pow_int(&root, p))
}

/// Convert an arbitrary tree into the normalized polynomial.
pub(crate) fn to_poly(e: &Expr) -> Poly {
    match e {
        Expr::Const(c) => {
            if c.is_zero() {
                Poly::zero()
            } else {
                Poly::from_const(c.clone())
            }
        }
        Expr::Var(v) => {
            let mut m = Mono::new();
            m.insert(Factor::Var(v.clone()), Rat::one());
            let mut p = Poly::zero();
            p.add_term(m, Rat::one());
            p
        }
        Expr::Sum(xs) => {
            let mut acc = Poly::zero();
            for x in xs {
                acc = acc.add(&to_poly(x));
            }
            acc
        }
        Expr::Product(xs) => {
            let mut acc = Poly::one();
            for x in xs {
                if acc.is_zero() {
                    return acc;
                }
                acc = acc.mul(&to_poly(x));
            }
            acc
        }
        Expr::Power(b, r) => to_poly(b).pow(r),
        Expr::Kernel(f, a) => {
            let ap = to_poly(a);
            match f {
                KernelFn::Sqrt => ap.pow(&Rat::new(BigInt::one(), BigInt::from(2))),
                KernelFn::Exp => {
                    if ap.is_zero() {
                        Poly::one()
                    } else {
                        kernel_term(KernelFn::Exp, &ap)
                    }
                }
                KernelFn::Ln => {
                    if ap.is_one() {
                        Poly::zero()
                    } else {
                        kernel_term(KernelFn::Ln, &ap)
                    }
                }
                KernelFn::Sin => {
                    if ap.is_zero() {
                        Poly::zero()
                    } else {
                        kernel_term(KernelFn::Sin, &ap)
                    }
                }
                KernelFn::Cos => {
                    if ap.is_zero() {
                        Poly::one()
                    } else {
                        kernel_term(KernelFn::Cos, &ap)
                    }
                }
            }
        }
    }
}

fn kernel_term(f: KernelFn, arg: &Poly) -> Poly {
    let mut m = Mono::new();
    m.insert(Factor::Kernel(f, rebuild(arg)), Rat::one());
    let mut p = Poly::zero();
    p.add_term(m, Rat::one());
    p
}

/// Rebuild the canonical tree: terms in descending monomial order, factors in
/// ascending order, explicit leading rational coefficients.
pub(crate) fn rebuild(p: &Poly) -> Expr {
    if p.terms.is_empty() {
        return Expr::zero();
    }
    let mut terms: Vec<Expr> = Vec::with_capacity(p.terms.len());
    for (mono, coeff) in p.terms.iter().rev() {
        terms.push(term_expr(mono, coeff));
    }
    if terms.len() == 1 {
        terms.pop().expect("one term")
    } else {
        Expr::Sum(terms)
    }
}

fn term_expr(mono: &Mono, coeff: &Rat) -> Expr {
    let mut factors: Vec<Expr> = Vec::with_capacity(mono.len() + 1);
    for (f, e) in mono {
        if e.is_one() {
            factors.push(f.to_expr());
        } else {
            factors.push(Expr::Power(Box::new(f.to_expr()), e.clone()));
        }
    }
    if factors.is_empty() {
        return Expr::Const(coeff.clone());
    }
    if !coeff.is_one() {
        factors.insert(0, Expr::Const(coeff.clone()));
    }
    if factors.len() == 1 {
        factors.pop().expect("one factor")
    } else {
        Expr::Product(factors)
    }
}

pub(crate) fn normalize(e: &Expr) -> Expr {
    rebuild(&to_poly(e))
}

/// Flat view of the normalized terms of `e`, for integration and analysis.
pub(crate) fn expr_terms(e: &Expr) -> Vec<(Rat, Vec<(Factor, Rat)>)> {
    let p = to_poly(e);
    p.terms
        .iter()
        .rev()
        .map(|(m, c)| {
            (
                c.clone(),
                m.iter().map(|(f, e)| (f.clone(), e.clone())).collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(e: Expr) -> Expr {
        e.normalize()
    }

    #[test]
    fn commuting_products_cancel() {
        let e = Expr::vel(1) * Expr::coord(1) - Expr::coord(1) * Expr::vel(1);
        assert!(norm(e).is_const_zero());
    }

    #[test]
    fn exp_factors_combine() {
        let b = Expr::param("b");
        let t = Expr::time();
        let e = Expr::exp(b.clone() * t.clone()) * Expr::exp(-(b * t));
        assert!(norm(e).is_const_one());
    }

    #[test]
    fn identity_elements_fold() {
        let e = Expr::one() * Expr::accel(1) + Expr::zero();
        assert_eq!(norm(e), Expr::accel(1));
    }

    #[test]
    fn distributes_integer_powers() {
        let e = (Expr::coord(1) + Expr::one()).pow_int(2);
        let expanded = Expr::coord(1).pow_int(2) + Expr::int(2) * Expr::coord(1) + Expr::one();
        assert_eq!(norm(e), norm(expanded));
    }

    #[test]
    fn negative_sum_powers_stay_opaque() {
        // no polynomial division: the product below is equal to one but is
        // left for the numeric zero test, while opaque powers of the same
        // opaque base do cancel exactly
        let s = Expr::coord(1) + Expr::one();
        let idem = norm(s.clone().pow_int(-2));
        assert_eq!(idem.clone().normalize(), idem);
        let e = norm(s.clone().pow_int(-2) * s.clone().pow_int(-1));
        assert_eq!(e, norm(s.pow_int(-3)));
    }

    #[test]
    fn sqrt_is_half_power_and_merges() {
        let e = Expr::sqrt(Expr::coord(1)) * Expr::sqrt(Expr::coord(1));
        assert_eq!(norm(e), Expr::coord(1));
        let r2 = norm(Expr::sqrt(Expr::int(4)));
        assert_eq!(r2, Expr::int(2));
        let irr = norm(Expr::sqrt(Expr::int(2)));
        assert_eq!(irr.clone().normalize(), irr);
    }

    #[test]
    fn exp_power_folds_into_argument() {
        let x = Expr::coord(1);
        let e = Expr::exp(x.clone()).pow_int(2);
        assert_eq!(norm(e), norm(Expr::exp(Expr::int(2) * x)));
    }

    #[test]
    fn rational_constant_arithmetic_is_exact() {
        let e = Expr::rational(1, 3) + Expr::rational(1, 6);
        assert_eq!(norm(e), Expr::rational(1, 2));
        let p = Expr::rational(2, 3).pow_int(-2);
        assert_eq!(norm(p), Expr::rational(9, 4));
    }

    #[test]
    fn zero_to_zero_is_one() {
        assert!(norm(Expr::zero().pow_int(0)).is_const_one());
    }

    #[test]
    fn normalization_is_idempotent_on_mixed_tree() {
        let b = Expr::param("b");
        let e = Expr::exp(b.clone() * Expr::time())
            * (Expr::vel(1).pow_int(2) * Expr::rational(1, 2)
                - Expr::param("w").pow_int(2) * Expr::coord(1).pow_int(2) * Expr::rational(1, 2))
            + (Expr::coord(2) + Expr::one()).pow_int(-1)
            + Expr::sin(Expr::coord(1)).pow_int(2);
        let n1 = norm(e);
        assert_eq!(n1.normalize(), n1);
    }
}
