//! Rational expressions: quotients of polynomials, kept fully reduced.
//!
//! Canonical form: the pair is reduced by its polynomial gcd, and the
//! denominator is integer-primitive with a positive leading coefficient.
//! Structural equality on the canonical form therefore decides equality of
//! the underlying rational functions.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::gcd::{make_primitive, poly_gcd};
use super::poly::{Monomial, Polynomial};
use super::symbol::SymbolId;
use super::ExprError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalExpr {
    num: Polynomial,
    den: Polynomial,
}

impl RationalExpr {
    /// Reduce and normalize `num / den`; errors when `den` is the zero polynomial.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(RationalExpr {
                num: Polynomial::zero(),
                den: Polynomial::one(),
            });
        }
        if den.is_one() {
            return Ok(RationalExpr { num, den });
        }
        let g = poly_gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.try_div_exact(&g).expect("gcd divides numerator"),
                den.try_div_exact(&g).expect("gcd divides denominator"),
            )
        };
        Ok(Self::normalized(num, den))
    }

    /// Normalize an already-reduced pair: denominator integer-primitive and
    /// positive-leading, the rational unit absorbed into the numerator.
    fn normalized(num: Polynomial, den: Polynomial) -> Self {
        let (c, den) = make_primitive(&den);
        if c.is_one() {
            return RationalExpr { num, den };
        }
        RationalExpr {
            num: num.scale(&(BigRational::one() / c)),
            den,
        }
    }

    pub fn zero() -> Self {
        RationalExpr {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn one() -> Self {
        RationalExpr {
            num: Polynomial::one(),
            den: Polynomial::one(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        RationalExpr {
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    pub fn int(n: i64) -> Self {
        RationalExpr {
            num: Polynomial::int(n),
            den: Polynomial::one(),
        }
    }

    pub fn var(sym: SymbolId) -> Self {
        RationalExpr {
            num: Polynomial::var(sym),
            den: Polynomial::one(),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True when the canonical denominator is 1.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn contains(&self, sym: SymbolId) -> bool {
        self.num.contains(sym) || self.den.contains(sym)
    }

    pub fn add(&self, rhs: &RationalExpr) -> RationalExpr {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        // gcd of denominators first; the sum can only share factors with it.
        let g = poly_gcd(&self.den, &rhs.den);
        if g.is_one() {
            let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
            let den = &self.den * &rhs.den;
            if num.is_zero() {
                return RationalExpr::zero();
            }
            return Self::normalized(num, den);
        }
        let b1 = self.den.try_div_exact(&g).expect("gcd divides");
        let d1 = rhs.den.try_div_exact(&g).expect("gcd divides");
        let num = &(&self.num * &d1) + &(&rhs.num * &b1);
        if num.is_zero() {
            return RationalExpr::zero();
        }
        let h = poly_gcd(&num, &g);
        if h.is_one() {
            return Self::normalized(num, &self.den * &d1);
        }
        let num = num.try_div_exact(&h).expect("gcd divides");
        let den = &self.den.try_div_exact(&h).expect("gcd divides") * &d1;
        Self::normalized(num, den)
    }

    pub fn sub(&self, rhs: &RationalExpr) -> RationalExpr {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> RationalExpr {
        RationalExpr {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, rhs: &RationalExpr) -> RationalExpr {
        if self.is_zero() || rhs.is_zero() {
            return RationalExpr::zero();
        }
        // Cross-cancel before multiplying so the product is born reduced.
        let g1 = poly_gcd(&self.num, &rhs.den);
        let g2 = poly_gcd(&rhs.num, &self.den);
        let a = self.num.try_div_exact(&g1).expect("gcd divides");
        let d = rhs.den.try_div_exact(&g1).expect("gcd divides");
        let c = rhs.num.try_div_exact(&g2).expect("gcd divides");
        let b = self.den.try_div_exact(&g2).expect("gcd divides");
        Self::normalized(&a * &c, &b * &d)
    }

    pub fn div(&self, rhs: &RationalExpr) -> Result<RationalExpr, ExprError> {
        if rhs.is_zero() {
            return Err(ExprError::ZeroDenominator);
        }
        Ok(self.mul(&RationalExpr::normalized(
            rhs.den.clone(),
            rhs.num.clone(),
        )))
    }

    pub fn pow(&self, n: u32) -> RationalExpr {
        // Already-reduced parts stay reduced under powering.
        Self::normalized(self.num.pow(n), self.den.pow(n))
    }

    /// Replace symbols by expressions, as a homomorphism of the function field.
    /// Unbound symbols map to themselves. Errors when the substituted
    /// denominator vanishes identically.
    pub fn substitute(
        &self,
        bindings: &HashMap<SymbolId, RationalExpr>,
    ) -> Result<RationalExpr, ExprError> {
        let num = substitute_poly(&self.num, bindings);
        let den = substitute_poly(&self.den, bindings);
        if den.is_zero() {
            return Err(ExprError::DegenerateSubstitution);
        }
        num.div(&den)
    }

    /// Group the expression by monomials in `vars`. The denominator must be
    /// free of `vars`; the returned map satisfies
    /// `sum(key * value) == self` and has no zero values.
    pub fn collect(
        &self,
        vars: &[SymbolId],
    ) -> Result<BTreeMap<Monomial, RationalExpr>, ExprError> {
        for &v in vars {
            if self.den.contains(v) {
                return Err(ExprError::NotPolynomialInVars(v.name()));
            }
        }
        let mut groups: HashMap<Monomial, Vec<(Monomial, BigRational)>> = HashMap::new();
        for (m, c) in self.num.terms() {
            let (inside, outside) = m.split(vars);
            groups.entry(inside).or_default().push((outside, c.clone()));
        }
        let mut out = BTreeMap::new();
        for (key, terms) in groups {
            let p = Polynomial::from_terms(terms);
            let value = RationalExpr::new(p, self.den.clone())?;
            if !value.is_zero() {
                out.insert(key, value);
            }
        }
        Ok(out)
    }

    /// Residue at the unique zero of the denominator viewed as a degree-1
    /// polynomial in `z`: for `num / (d0 + d1*z)` this is `num(-d0/d1) / d1`.
    pub fn residue_simple_pole(&self, z: SymbolId) -> Result<RationalExpr, ExprError> {
        let den_c = self.den.coeffs_in(z);
        if den_c.len() != 2 {
            return Err(ExprError::UnsupportedPole {
                var: z.name(),
                found: (den_c.len() - 1) as u32,
            });
        }
        let d0 = RationalExpr::from(den_c[0].clone());
        let d1 = RationalExpr::from(den_c[1].clone());
        let z0 = d0.neg().div(&d1)?;
        let num_c = self.num.coeffs_in(z);
        let mut acc = RationalExpr::zero();
        for c in num_c.iter().rev() {
            acc = acc.mul(&z0).add(&RationalExpr::from(c.clone()));
        }
        acc.div(&d1)
    }

    /// Evaluate at a full rational binding of every symbol present.
    pub fn eval(
        &self,
        bindings: &HashMap<SymbolId, BigRational>,
    ) -> Result<BigRational, ExprError> {
        let den = eval_poly(&self.den, bindings)?;
        if den.is_zero() {
            return Err(ExprError::PoleAtPoint);
        }
        Ok(eval_poly(&self.num, bindings)? / den)
    }
}

impl From<Polynomial> for RationalExpr {
    fn from(num: Polynomial) -> Self {
        RationalExpr {
            num,
            den: Polynomial::one(),
        }
    }
}

fn eval_poly(
    p: &Polynomial,
    bindings: &HashMap<SymbolId, BigRational>,
) -> Result<BigRational, ExprError> {
    let mut acc = BigRational::zero();
    for (m, c) in p.terms() {
        let mut t = c.clone();
        for &(s, e) in m.exponents() {
            let v = bindings
                .get(&s)
                .ok_or_else(|| ExprError::UnboundSymbol(s.name()))?;
            for _ in 0..e {
                t *= v;
            }
        }
        acc += t;
    }
    Ok(acc)
}

/// Substitute into a polynomial. Takes a fast all-polynomial path when every
/// binding actually used is itself polynomial.
fn substitute_poly(p: &Polynomial, bindings: &HashMap<SymbolId, RationalExpr>) -> RationalExpr {
    let used: Vec<SymbolId> = p
        .symbols()
        .into_iter()
        .filter(|s| bindings.contains_key(s))
        .collect();
    if used.is_empty() {
        return RationalExpr::from(p.clone());
    }
    let all_poly = used.iter().all(|s| bindings[s].is_polynomial());
    if all_poly {
        let mut powers: HashMap<(SymbolId, u32), Polynomial> = HashMap::new();
        let mut acc = Polynomial::zero();
        for (m, c) in p.terms() {
            let mut unbound: Vec<(SymbolId, u32)> = Vec::new();
            let mut factor = Polynomial::constant(c.clone());
            for &(s, e) in m.exponents() {
                if let Some(b) = bindings.get(&s) {
                    let pw = powers
                        .entry((s, e))
                        .or_insert_with(|| b.num().pow(e))
                        .clone();
                    factor = &factor * &pw;
                } else {
                    unbound.push((s, e));
                }
            }
            acc = &acc + &factor.mul_monomial(&Monomial::from_pairs(&unbound), &BigRational::one());
        }
        return RationalExpr::from(acc);
    }
    let mut powers: HashMap<(SymbolId, u32), RationalExpr> = HashMap::new();
    let mut acc = RationalExpr::zero();
    for (m, c) in p.terms() {
        let mut unbound: Vec<(SymbolId, u32)> = Vec::new();
        let mut factor = RationalExpr::constant(c.clone());
        for &(s, e) in m.exponents() {
            if let Some(b) = bindings.get(&s) {
                let pw = powers.entry((s, e)).or_insert_with(|| b.pow(e)).clone();
                factor = factor.mul(&pw);
            } else {
                unbound.push((s, e));
            }
        }
        let tail = RationalExpr::from(Polynomial::monomial(
            Monomial::from_pairs(&unbound),
            BigRational::one(),
        ));
        acc = acc.add(&factor.mul(&tail));
    }
    acc
}
