//! Canonical text rendering.
//!
//! Terms print in the same descending order they are stored in, so equal
//! expressions always render identically: `3/2*x1_0^2*yt1 - y0_1 + 1`.
//! A non-trivial denominator is parenthesized: `(yt1 + 1)/(x0_1^2*yt2)`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::poly::{Monomial, Polynomial};
use super::rational::RationalExpr;

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return write!(f, "1");
        }
        let mut first = true;
        for &(s, e) in self.exponents() {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", s.name())?;
            } else {
                write!(f, "{}^{}", s.name(), e)?;
            }
        }
        Ok(())
    }
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    m: &Monomial,
    c_abs: &BigRational,
) -> fmt::Result {
    if m.is_unit() {
        write!(f, "{}", c_abs)
    } else if c_abs.is_one() {
        write!(f, "{}", m)
    } else {
        write!(f, "{}*{}", c_abs, m)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().iter().enumerate() {
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write_term(f, m, &c.abs())?;
        }
        Ok(())
    }
}

impl fmt::Display for RationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            return write!(f, "{}", self.num());
        }
        // Numerator needs parentheses when it is a sum.
        if self.num().num_terms() > 1 {
            write!(f, "({})", self.num())?;
        } else {
            write!(f, "{}", self.num())?;
        }
        write!(f, "/")?;
        // Denominator needs parentheses unless it is a bare power of one
        // symbol with unit coefficient (its leading coefficient is positive
        // by canonical form).
        let den = self.den();
        let bare = den.num_terms() == 1
            && den
                .leading()
                .map(|(m, c)| c.is_one() && m.exponents().len() == 1)
                .unwrap_or(false);
        if bare {
            write!(f, "{}", den)
        } else {
            write!(f, "({})", den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::symbol;
    use num_traits::Zero;

    fn p_var(name: &str) -> Polynomial {
        Polynomial::var(symbol::var(name))
    }

    #[test]
    fn polynomial_rendering() {
        assert_eq!(Polynomial::zero().to_string(), "0");
        assert_eq!(Polynomial::int(-3).to_string(), "-3");
        let u = p_var("u");
        let v = p_var("v");
        // 3/2*u^2*v - v + 1
        let e = &(&(&u * &u) * &v).scale(&BigRational::new(3.into(), 2.into()))
            - &(&v - &Polynomial::one());
        assert_eq!(e.to_string(), "3/2*u^2*v - v + 1");
    }

    #[test]
    fn leading_negative_sign_is_tight() {
        let u = p_var("u");
        let e = &Polynomial::zero() - &(&u * &u);
        assert_eq!(e.to_string(), "-u^2");
    }

    #[test]
    fn quotient_rendering() {
        let u = RationalExpr::from(p_var("u"));
        let v = RationalExpr::from(p_var("v"));
        let one = RationalExpr::one();

        assert_eq!(u.div(&v.pow(2)).unwrap().to_string(), "u/v^2");
        assert_eq!(
            u.add(&one).div(&v.sub(&one)).unwrap().to_string(),
            "(u + 1)/(v - 1)"
        );
        // A product denominator is not "bare" and keeps its parentheses.
        assert_eq!(
            one.div(&u.mul(&v)).unwrap().to_string(),
            "1/(u*v)"
        );
        assert_eq!(RationalExpr::zero().to_string(), "0");
        assert!(BigRational::zero().is_zero());
    }
}
