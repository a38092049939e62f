//! Expression rendering in the parser grammar.
//!
//! Output re-parses to an equivalent expression (jerk variables excepted:
//! their `'''` suffix is deliberately rejected by the parser).

use super::Expr;
use num::{BigRational, One, Signed, Zero};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_POWER: u8 = 3;
const PREC_ATOM: u8 = 4;

/// Render `e` using `coords` for coordinate display names.
pub fn pretty(e: &Expr, coords: &[String]) -> String {
    let mut out = String::new();
    write_expr(e, coords, 0, &mut out);
    out
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", pretty(self, &[]))
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Sum(_) => PREC_SUM,
        Expr::Product(_) => PREC_PRODUCT,
        Expr::Power(_, _) => PREC_POWER,
        Expr::Const(c) => {
            if c.is_negative() || !c.is_integer() {
                PREC_SUM // renders with '-' or '/', parenthesize like a sum
            } else {
                PREC_ATOM
            }
        }
        Expr::Var(_) | Expr::Kernel(_, _) => PREC_ATOM,
    }
}

fn write_expr(e: &Expr, coords: &[String], parent: u8, out: &mut String) {
    match e {
        Expr::Sum(terms) => {
            let parens = parent > PREC_SUM;
            if parens {
                out.push('(');
            }
            write_terms(terms, coords, out);
            if parens {
                out.push(')');
            }
        }
        _ if parent <= PREC_SUM => {
            write_terms(std::slice::from_ref(e), coords, out);
        }
        Expr::Product(_) => {
            let parens = parent > PREC_PRODUCT;
            if parens {
                out.push('(');
            }
            write_product(e, coords, out);
            if parens {
                out.push(')');
            }
        }
        Expr::Const(c) => {
            if prec(e) < parent {
                out.push('(');
                write_const(c, out);
                out.push(')');
            } else {
                write_const(c, out);
            }
        }
        Expr::Var(v) => out.push_str(&v.display_with(coords)),
        Expr::Power(_, _) => write_power(e, coords, out),
        Expr::Kernel(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(a, coords, 0, out);
            out.push(')');
        }
    }
}

/// Sign-aware rendering of a sequence of additive terms.
fn write_terms(terms: &[Expr], coords: &[String], out: &mut String) {
    for (idx, term) in terms.iter().enumerate() {
        let (negative, positive) = split_sign(term);
        if idx == 0 {
            if negative {
                out.push('-');
            }
        } else if negative {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        match &positive {
            Expr::Sum(inner) => write_terms(inner, coords, out),
            Expr::Product(_) => write_product(&positive, coords, out),
            other => write_expr(other, coords, PREC_PRODUCT, out),
        }
    }
}

/// Strip a literal leading negative constant.
fn split_sign(e: &Expr) -> (bool, Expr) {
    match e {
        Expr::Const(c) if c.is_negative() => (true, Expr::Const(-c.clone())),
        Expr::Product(fs) => {
            if let Some(Expr::Const(c)) = fs.first() {
                if c.is_negative() {
                    let flipped = -c.clone();
                    let mut rest: Vec<Expr> = fs[1..].to_vec();
                    if !flipped.is_one() || rest.is_empty() {
                        rest.insert(0, Expr::Const(flipped));
                    }
                    let expr = if rest.len() == 1 {
                        rest.pop().expect("one factor")
                    } else {
                        Expr::Product(rest)
                    };
                    return (true, expr);
                }
            }
            (false, e.clone())
        }
        _ => (false, e.clone()),
    }
}

fn write_product(e: &Expr, coords: &[String], out: &mut String) {
    match e {
        Expr::Product(fs) => {
            for (idx, f) in fs.iter().enumerate() {
                if idx > 0 {
                    out.push('*');
                }
                match f {
                    // `1/2*x` re-parses as `(1/2)*x`: same precedence, left assoc
                    Expr::Const(c) if !c.is_negative() => write_const(c, out),
                    _ => write_expr(f, coords, PREC_PRODUCT + 1, out),
                }
            }
        }
        other => write_expr(other, coords, PREC_PRODUCT + 1, out),
    }
}

fn write_power(e: &Expr, coords: &[String], out: &mut String) {
    if let Expr::Power(base, exp) = e {
        write_expr(base, coords, PREC_POWER + 1, out);
        out.push('^');
        if exp.is_integer() && !exp.is_negative() {
            out.push_str(&exp.to_string());
        } else {
            out.push('(');
            write_const(exp, out);
            out.push(')');
        }
    }
}

fn write_const(c: &BigRational, out: &mut String) {
    if c.is_zero() {
        out.push('0');
        return;
    }
    out.push_str(&c.to_string());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_golden_forms() {
        let two_b = (Expr::int(2) * Expr::param("b")).normalize();
        assert_eq!(pretty(&two_b, &[]), "2*b");

        let lam = Expr::exp(Expr::param("b") * Expr::time()).normalize();
        assert_eq!(pretty(&lam, &[]), "exp(b*t)");
    }

    #[test]
    fn renders_signs_and_fractions() {
        let e = (Expr::vel(1).pow_int(2) * Expr::rational(1, 2)
            - Expr::param("w").pow_int(2) * Expr::coord(1).pow_int(2) * Expr::rational(1, 2))
        .normalize();
        assert_eq!(pretty(&e, &[]), "1/2*x1'^2 - 1/2*w^2*x1^2");
        let neg = (-(Expr::int(2) * Expr::param("b"))).normalize();
        assert_eq!(pretty(&neg, &[]), "-2*b");
    }

    #[test]
    fn parenthesizes_opaque_bases_and_exponents() {
        let e = (Expr::coord(1) + Expr::one()).pow_int(-1).normalize();
        assert_eq!(pretty(&e, &[]), "(x1 + 1)^(-1)");
        let r = Expr::coord(1).pow_rational(1, 2).normalize();
        assert_eq!(pretty(&r, &[]), "x1^(1/2)");
    }

    #[test]
    fn uses_coordinate_names() {
        let names = vec!["q".to_string()];
        assert_eq!(pretty(&Expr::accel(1), &names), "q''");
        assert_eq!(pretty(&Expr::jerk(1), &names), "q'''");
    }
}
