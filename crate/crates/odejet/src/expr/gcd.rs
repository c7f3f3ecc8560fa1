//! Multivariate polynomial GCD.
//!
//! Two routes share the fast paths (zero, constant, equal, monomial):
//!
//! * **Peeling**, when one operand has few terms — the overwhelmingly common
//!   shape here, where one side is a product of powers of small structural
//!   denominators. The small side is split into per-variable content and
//!   primitive part; irreducible factors are certified cheaply (a primitive
//!   polynomial linear in some variable is irreducible) or found by
//!   squarefree reduction, and their multiplicities in the big side are
//!   counted by plain trial division. This never multiplies large
//!   polynomials together.
//!
//! * The classical recursive content/primitive scheme with a subresultant
//!   pseudo-remainder sequence, as a fallback for operand pairs without
//!   small structure.
//!
//! Results are integer-primitive with a positive leading coefficient, so
//! they are canonical representatives up to units.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::Polynomial;
use super::symbol::SymbolId;

/// Positive rational `c` such that `p / c` has coprime integer coefficients;
/// zero for the zero polynomial.
pub fn rational_content(p: &Polynomial) -> BigRational {
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for (_, c) in p.terms() {
        num_gcd = num_gcd.gcd(&c.numer().abs());
        den_lcm = den_lcm.lcm(c.denom());
    }
    if num_gcd.is_zero() {
        BigRational::zero()
    } else {
        BigRational::new(num_gcd, den_lcm)
    }
}

/// Split `p` as `c * q` with `q` integer-primitive and positive-leading;
/// the sign of `p`'s leading coefficient goes into `c`.
pub fn make_primitive(p: &Polynomial) -> (BigRational, Polynomial) {
    if p.is_zero() {
        return (BigRational::zero(), Polynomial::zero());
    }
    let mut c = rational_content(p);
    if p.leading().unwrap().1.is_negative() {
        c = -c;
    }
    let q = p.scale(&(BigRational::one() / c.clone()));
    (c, q)
}

fn normalized(p: &Polynomial) -> Polynomial {
    make_primitive(p).1
}

/// Greatest common divisor of all monomials of `p` (unit coefficient).
fn monomial_content(p: &Polynomial) -> super::poly::Monomial {
    let mut iter = p.terms().iter();
    let mut acc = match iter.next() {
        Some((m, _)) => m.clone(),
        None => return super::poly::Monomial::unit(),
    };
    for (m, _) in iter {
        if acc.is_unit() {
            break;
        }
        // Intersect exponent vectors.
        let pairs: Vec<_> = acc
            .exponents()
            .iter()
            .filter_map(|&(s, e)| {
                let e2 = m.degree_in(s);
                if e2 == 0 {
                    None
                } else {
                    Some((s, e.min(e2)))
                }
            })
            .collect();
        acc = super::poly::Monomial::from_pairs(&pairs);
    }
    acc
}

/// Content of `p` with respect to `v`: the gcd of its `v`-coefficients.
fn content_in(p: &Polynomial, v: SymbolId) -> Polynomial {
    let coeffs = p.coeffs_in(v);
    let mut acc = Polynomial::zero();
    for c in &coeffs {
        if c.is_zero() {
            continue;
        }
        acc = poly_gcd(&acc, c);
        if acc.is_one() {
            break;
        }
    }
    acc
}

/// An operand with at most this many terms is peeled factor by factor
/// instead of entering the pseudo-remainder sequence. Denominators in this
/// engine are products of powers of small structural factors and stay far
/// below the limit even fully expanded.
const PEEL_LIMIT: usize = 200;

/// Primitive, positive-leading gcd. `gcd(0, p)` normalizes `p`;
/// nonzero constants are units, giving gcd one.
pub fn poly_gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return normalized(b);
    }
    if b.is_zero() {
        return normalized(a);
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one();
    }
    if a == b {
        return normalized(a);
    }
    // Single-term operands reduce to a monomial intersection.
    if a.num_terms() == 1 {
        return monomial_gcd(a, b);
    }
    if b.num_terms() == 1 {
        return monomial_gcd(b, a);
    }
    // Univariate operands in a shared symbol: plain Euclid over ℚ, which
    // sidesteps the content recursion entirely.
    let sa = a.symbols();
    if sa.len() == 1 && b.symbols() == sa {
        return univariate_gcd(a, b, sa[0]);
    }

    let (big, small) = if a.num_terms() >= b.num_terms() {
        (a, b)
    } else {
        (b, a)
    };
    if small.num_terms() <= PEEL_LIMIT {
        return normalized(&peel_gcd(big, small));
    }
    classical_gcd(a, b)
}

/// Intersection of a single monomial with the monomial content of `other`.
fn monomial_gcd(single: &Polynomial, other: &Polynomial) -> Polynomial {
    let m = monomial_content(other);
    let g = single.leading().unwrap().0.clone();
    let pairs: Vec<_> = g
        .exponents()
        .iter()
        .filter_map(|&(s, e)| {
            let e2 = m.degree_in(s);
            if e2 == 0 {
                None
            } else {
                Some((s, e.min(e2)))
            }
        })
        .collect();
    Polynomial::monomial(
        super::poly::Monomial::from_pairs(&pairs),
        BigRational::one(),
    )
}

/// The content/primitive recursion over the least significant present
/// symbol, with the subresultant PRS on the primitive parts.
fn classical_gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let v = match (a.symbols().first().copied(), b.symbols().first().copied()) {
        (Some(sa), Some(sb)) => sa.min(sb),
        (Some(s), None) | (None, Some(s)) => s,
        (None, None) => unreachable!("non-constant polynomials have symbols"),
    };
    let da = a.degree_in(v);
    let db = b.degree_in(v);
    // A common divisor must be free of `v` when one operand is.
    if da == 0 {
        return poly_gcd(a, &content_in(b, v));
    }
    if db == 0 {
        return poly_gcd(&content_in(a, v), b);
    }

    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let pa = a.try_div_exact(&ca).expect("content divides");
    let pb = b.try_div_exact(&cb).expect("content divides");
    let cg = poly_gcd(&ca, &cb);
    let pg = prs_gcd(&pa, &pb, v);
    normalized(&(&cg * &pg))
}

/// gcd up to a rational unit, with `small` the few-term side. Splits `small`
/// into content and primitive part in its cheapest variable and recurses;
/// factor classes of the two parts are disjoint, so contributions multiply.
fn peel_gcd(big: &Polynomial, small: &Polynomial) -> Polynomial {
    if big.is_constant() || small.is_constant() {
        return Polynomial::one();
    }
    if big == small {
        return big.clone();
    }
    if small.num_terms() == 1 || big.num_terms() == 1 {
        let (s, o) = if small.num_terms() == 1 {
            (small, big)
        } else {
            (big, small)
        };
        return monomial_gcd(s, o);
    }
    let v = small
        .symbols()
        .into_iter()
        .min_by_key(|&s| small.degree_in(s))
        .expect("non-constant polynomial has symbols");
    let c = content_in(small, v);
    let pp = small.try_div_exact(&c).expect("content divides");
    let mut g = if c.is_one() {
        Polynomial::one()
    } else {
        peel_gcd(big, &c)
    };
    if !pp.is_constant() {
        g = &g * &peel_primitive(big, &pp);
    }
    g
}

/// gcd(big, pp) up to a unit, where `pp` is primitive in the variable it was
/// split on — so every irreducible factor of `pp` involves that variable.
fn peel_primitive(big: &Polynomial, pp: &Polynomial) -> Polynomial {
    match irreducible_seed(pp) {
        Some(q) => {
            // Multiplicity of q in pp, and the cofactor of the other classes.
            let mut rest = pp.clone();
            let mut e = 0u32;
            while let Some(next) = rest.try_div_exact(&q) {
                rest = next;
                e += 1;
            }
            debug_assert!(e >= 1, "seed must divide its source");
            // Multiplicity of q in big, capped at e, by trial division.
            let mut g = Polynomial::one();
            let mut t = big.clone();
            for _ in 0..e {
                match t.try_div_exact(&q) {
                    Some(next) => {
                        t = next;
                        g = &g * &q;
                    }
                    None => break,
                }
            }
            if !rest.is_constant() {
                g = &g * &peel_gcd(big, &rest);
            }
            g
        }
        // No cheap factor certificate: fall back to the classical route.
        None => classical_gcd(big, pp),
    }
}

/// One irreducible factor of `p` (a few-term polynomial, primitive in some
/// variable), or None when no cheap certificate applies. A primitive
/// polynomial linear in one of its variables is irreducible; otherwise strip
/// repeated factors via gcd with a partial derivative and retry.
fn irreducible_seed(p: &Polynomial) -> Option<Polynomial> {
    let symbols = p.symbols();
    for &u in &symbols {
        if p.degree_in(u) == 1 && content_in(p, u).is_one() {
            return Some(normalized(p));
        }
    }
    let v = symbols
        .into_iter()
        .min_by_key(|&s| p.degree_in(s))
        .expect("non-constant polynomial has symbols");
    let r = poly_gcd(p, &p.partial(v));
    if r.is_constant() {
        return None; // squarefree, yet nonlinear in every variable
    }
    let squarefree = p.try_div_exact(&r).expect("gcd divides");
    irreducible_seed(&squarefree)
}

/// Monic Euclidean gcd for two nonzero univariate operands in `v`.
fn univariate_gcd(a: &Polynomial, b: &Polynomial, v: SymbolId) -> Polynomial {
    fn dense(p: &Polynomial, v: SymbolId) -> Vec<BigRational> {
        p.coeffs_in(v)
            .iter()
            .map(|c| c.as_constant().unwrap_or_else(BigRational::zero))
            .collect()
    }
    fn trim(r: &mut Vec<BigRational>) {
        while r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
    }
    let mut r0 = dense(a, v);
    let mut r1 = dense(b, v);
    trim(&mut r0);
    trim(&mut r1);
    while !r1.is_empty() {
        let lead = r1.last().unwrap().clone();
        while r0.len() >= r1.len() {
            let q = r0.last().unwrap() / &lead;
            let shift = r0.len() - r1.len();
            for (i, c) in r1.iter().enumerate() {
                let t = &q * c;
                r0[shift + i] -= t;
            }
            // The leading term cancels exactly.
            debug_assert!(r0.last().unwrap().is_zero());
            r0.pop();
            trim(&mut r0);
        }
        std::mem::swap(&mut r0, &mut r1);
    }
    let coeffs: Vec<Polynomial> = r0.into_iter().map(Polynomial::constant).collect();
    normalized(&Polynomial::from_coeffs_in(v, &coeffs))
}

/// Pseudo-remainder of dense `a` by dense `b` (coefficients in the other
/// variables), i.e. `lc(b)^(da-db+1) * a mod b` up to sign.
fn prem(a: &[Polynomial], b: &[Polynomial]) -> Vec<Polynomial> {
    let db = b.len() - 1;
    let d = &b[db];
    let mut r: Vec<Polynomial> = a.to_vec();
    let mut e = (a.len() - 1) as i64 - db as i64 + 1;
    while r.len() - 1 >= db && !r.iter().all(Polynomial::is_zero) {
        let dr = r.len() - 1;
        if dr < db {
            break;
        }
        let lead = r[dr].clone();
        // r := d*r - lead * x^(dr-db) * b
        for c in r.iter_mut() {
            *c = &*c * d;
        }
        if !lead.is_zero() {
            for i in 0..=db {
                r[dr - db + i] = &r[dr - db + i] - &(&lead * &b[i]);
            }
        }
        debug_assert!(r[dr].is_zero());
        r.pop();
        while r.len() > 1 && r.last().unwrap().is_zero() {
            r.pop();
        }
        e -= 1;
        if r.iter().all(Polynomial::is_zero) {
            break;
        }
    }
    // Keep the pseudo-remainder scale consistent when the degree dropped early.
    if e > 0 {
        let mut f = Polynomial::one();
        for _ in 0..e {
            f = &f * d;
        }
        for c in r.iter_mut() {
            *c = &*c * &f;
        }
    }
    r
}

/// Subresultant PRS gcd of two polynomials primitive in `v`.
fn prs_gcd(pa: &Polynomial, pb: &Polynomial, v: SymbolId) -> Polynomial {
    let mut a = pa.coeffs_in(v);
    let mut b = pb.coeffs_in(v);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    let mut g = Polynomial::one();
    let mut h = Polynomial::one();
    loop {
        let delta = (a.len() - 1) - (b.len() - 1);
        let r = prem(&a, &b);
        if r.iter().all(Polynomial::is_zero) {
            break;
        }
        if r.len() == 1 {
            // Nonzero remainder free of `v`: the primitive parts are coprime.
            return Polynomial::one();
        }
        let divisor = &g * &h.pow(delta as u32);
        let reduced: Vec<Polynomial> = r
            .iter()
            .map(|c| c.try_div_exact(&divisor).expect("subresultant division is exact"))
            .collect();
        a = b;
        b = reduced;
        g = a.last().unwrap().clone();
        h = match delta {
            0 => h,
            1 => g.clone(),
            _ => g
                .pow(delta as u32)
                .try_div_exact(&h.pow(delta as u32 - 1))
                .expect("subresultant h-update is exact"),
        };
    }
    let last = Polynomial::from_coeffs_in(v, &b);
    let cont = content_in(&last, v);
    normalized(&last.try_div_exact(&cont).expect("content divides"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::poly::Monomial;
    use crate::expr::symbol;

    fn xp() -> Polynomial {
        Polynomial::var(symbol::var("x"))
    }
    fn yp() -> Polynomial {
        Polynomial::var(symbol::var("y"))
    }

    #[test]
    fn gcd_of_shared_factor() {
        let f = &xp() + &yp(); // x + y
        let a = &f * &xp();
        let b = &f * &yp();
        assert_eq!(poly_gcd(&a, &b), f);
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let a = &xp() + &Polynomial::one();
        let b = &yp() + &Polynomial::int(2);
        assert_eq!(poly_gcd(&a, &b), Polynomial::one());
    }

    #[test]
    fn gcd_normalizes_sign_and_scale() {
        let f = &xp() + &yp();
        let a = f.scale(&BigRational::new((-6).into(), 1.into()));
        let b = f.scale(&BigRational::new(4.into(), 3.into()));
        assert_eq!(poly_gcd(&a, &b), f);
    }

    #[test]
    fn gcd_with_powers() {
        let w = &xp() + &yp();
        let a = &w.pow(3) * &(&xp() + &Polynomial::one());
        let b = &w.pow(2) * &(&yp() + &Polynomial::int(5));
        assert_eq!(poly_gcd(&a, &b), w.pow(2));
    }

    #[test]
    fn gcd_monomial_fast_path() {
        let x2y = Polynomial::monomial(
            Monomial::from_pairs(&[(symbol::var("x"), 2), (symbol::var("y"), 1)]),
            BigRational::one(),
        );
        let b = &(&xp() * &yp()) * &(&xp() + &yp());
        let g = poly_gcd(&x2y, &b);
        let xy = Polynomial::monomial(
            Monomial::from_pairs(&[(symbol::var("x"), 1), (symbol::var("y"), 1)]),
            BigRational::one(),
        );
        assert_eq!(g, xy);
    }

    #[test]
    fn gcd_univariate_euclid() {
        let x = xp();
        let f = &x + &Polynomial::one();
        let a = &f.pow(2) * &(&x.scale(&BigRational::from_integer(2.into())) - &Polynomial::int(3));
        let b = &f * &(&x.pow(3) + &Polynomial::int(7));
        assert_eq!(poly_gcd(&a, &b), f);
    }

    #[test]
    fn gcd_univariate_coprime() {
        let x = xp();
        let a = &x.pow(4) + &Polynomial::int(1);
        let b = &x.pow(3) - &Polynomial::int(2);
        assert_eq!(poly_gcd(&a, &b), Polynomial::one());
    }

    #[test]
    fn primitive_split() {
        let p = (&xp() + &yp()).scale(&BigRational::new(6.into(), 4.into()));
        let (c, q) = make_primitive(&p);
        assert_eq!(c, BigRational::new(3.into(), 2.into()));
        assert_eq!(q, &xp() + &yp());
    }
}
