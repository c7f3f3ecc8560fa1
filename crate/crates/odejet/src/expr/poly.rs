//! Sparse multivariate polynomials over exact rationals.
//!
//! A `Monomial` is a sorted exponent list, a `Polynomial` an ordered list of
//! `(Monomial, coefficient)` terms. Terms are kept strictly descending in the
//! graded lexicographic order (total degree first, then symbol order), with
//! no zero coefficients, so structural equality is canonical equality.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::symbol::SymbolId;

/// Product of symbol powers; exponents are positive and sorted by symbol id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<(SymbolId, u32)>,
}

impl Monomial {
    /// The empty product.
    pub fn unit() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn var(sym: SymbolId) -> Self {
        Monomial { exps: vec![(sym, 1)] }
    }

    /// Build from arbitrary (symbol, exponent) pairs; merges duplicates,
    /// drops zero exponents.
    pub fn from_pairs(pairs: &[(SymbolId, u32)]) -> Self {
        let mut exps: Vec<(SymbolId, u32)> = Vec::with_capacity(pairs.len());
        for &(s, e) in pairs {
            if e == 0 {
                continue;
            }
            match exps.binary_search_by_key(&s, |&(t, _)| t) {
                Ok(i) => exps[i].1 += e,
                Err(i) => exps.insert(i, (s, e)),
            }
        }
        Monomial { exps }
    }

    pub fn is_unit(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree_in(&self, sym: SymbolId) -> u32 {
        self.exps
            .iter()
            .find(|&&(s, _)| s == sym)
            .map_or(0, |&(_, e)| e)
    }

    pub fn symbols(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.exps.iter().map(|&(s, _)| s)
    }

    pub fn exponents(&self) -> &[(SymbolId, u32)] {
        &self.exps
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            match self.exps[i].0.cmp(&other.exps[j].0) {
                Ordering::Less => {
                    exps.push(self.exps[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    exps.push(other.exps[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    exps.push((self.exps[i].0, self.exps[i].1 + other.exps[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        exps.extend_from_slice(&self.exps[i..]);
        exps.extend_from_slice(&other.exps[j..]);
        Monomial { exps }
    }

    /// Exact quotient, or `None` when some exponent of `other` exceeds ours.
    pub fn try_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = Vec::with_capacity(self.exps.len());
        let mut j = 0;
        for &(s, e) in &self.exps {
            let mut e_out = e;
            while j < other.exps.len() && other.exps[j].0 < s {
                return None; // divisor has a symbol we lack
            }
            if j < other.exps.len() && other.exps[j].0 == s {
                if other.exps[j].1 > e {
                    return None;
                }
                e_out = e - other.exps[j].1;
                j += 1;
            }
            if e_out > 0 {
                exps.push((s, e_out));
            }
        }
        if j < other.exps.len() {
            return None;
        }
        Some(Monomial { exps })
    }

    /// Remove `sym` entirely, returning the remaining monomial.
    pub fn without(&self, sym: SymbolId) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .copied()
                .filter(|&(s, _)| s != sym)
                .collect(),
        }
    }

    /// Split into (part supported on `vars`, remaining part).
    pub fn split(&self, vars: &[SymbolId]) -> (Monomial, Monomial) {
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for &(s, e) in &self.exps {
            if vars.contains(&s) {
                inside.push((s, e));
            } else {
                outside.push((s, e));
            }
        }
        (Monomial { exps: inside }, Monomial { exps: outside })
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first; ties broken by the first
    /// symbol (in interning order) where the exponents differ, higher
    /// exponent winning.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.exps.get(i), other.exps.get(j)) {
                (None, None) => return Ordering::Equal,
                // A symbol the other side lacks means a higher exponent at
                // the earliest point of difference.
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(sa, ea)), Some(&(sb, eb))) => match sa.cmp(&sb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(&eb) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        ord => return ord,
                    },
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    /// Strictly descending monomials, no zero coefficients.
    terms: Vec<(Monomial, BigRational)>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        if c.is_zero() {
            Polynomial::zero()
        } else {
            Polynomial { terms: vec![(Monomial::unit(), c)] }
        }
    }

    pub fn int(n: i64) -> Self {
        Polynomial::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(sym: SymbolId) -> Self {
        Polynomial {
            terms: vec![(Monomial::var(sym), BigRational::one())],
        }
    }

    pub fn monomial(mono: Monomial, coeff: BigRational) -> Self {
        if coeff.is_zero() {
            Polynomial::zero()
        } else {
            Polynomial { terms: vec![(mono, coeff)] }
        }
    }

    /// Normalize an arbitrary term list into canonical form.
    pub fn from_terms(terms: Vec<(Monomial, BigRational)>) -> Self {
        let mut sorted = terms;
        sorted.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Monomial, BigRational)> = Vec::with_capacity(sorted.len());
        for (m, c) in sorted {
            if c.is_zero() {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == m => {
                    last.1 += c;
                    if last.1.is_zero() {
                        out.pop();
                    }
                }
                _ => out.push((m, c)),
            }
        }
        Polynomial { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_unit() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.iter().all(|(m, _)| m.is_unit())
    }

    /// The constant value, when `is_constant`.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            Some(BigRational::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn terms(&self) -> &[(Monomial, BigRational)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Leading term in the graded lexicographic order.
    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.first().map(|(m, c)| (m, c))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, sym: SymbolId) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.degree_in(sym))
            .max()
            .unwrap_or(0)
    }

    pub fn contains(&self, sym: SymbolId) -> bool {
        self.terms.iter().any(|(m, _)| m.degree_in(sym) > 0)
    }

    /// All symbols appearing with positive exponent, ascending.
    pub fn symbols(&self) -> Vec<SymbolId> {
        let mut syms: Vec<SymbolId> = Vec::new();
        for (m, _) in &self.terms {
            for s in m.symbols() {
                if let Err(i) = syms.binary_search(&s) {
                    syms.insert(i, s);
                }
            }
        }
        syms
    }

    /// Coefficient of an exact monomial (zero if absent).
    pub fn coeff_of(&self, mono: &Monomial) -> BigRational {
        match self.terms.binary_search_by(|(m, _)| mono.cmp(m)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial, coeff: &BigRational) -> Polynomial {
        if coeff.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.mul(mono), k * coeff))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut result = Polynomial::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Formal partial derivative with respect to one symbol.
    pub fn partial(&self, sym: SymbolId) -> Polynomial {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = m.degree_in(sym);
            if e == 0 {
                continue;
            }
            let mut pairs: Vec<(SymbolId, u32)> = m.exponents().to_vec();
            for p in pairs.iter_mut() {
                if p.0 == sym {
                    p.1 -= 1;
                }
            }
            terms.push((
                Monomial::from_pairs(&pairs),
                c * BigRational::from_integer(BigInt::from(e)),
            ));
        }
        Polynomial::from_terms(terms)
    }

    /// Exact multivariate division: `Some(q)` with `self = q * div`, else `None`.
    pub fn try_div_exact(&self, div: &Polynomial) -> Option<Polynomial> {
        assert!(!div.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(Polynomial::zero());
        }
        if let Some(c) = div.as_constant() {
            return Some(self.scale(&(BigRational::one() / c)));
        }
        let (dm, dc) = div.leading().unwrap();
        let mut rem = self.clone();
        let mut quo: Vec<(Monomial, BigRational)> = Vec::new();
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.try_div(dm)?;
            let qc = rc / dc;
            rem = &rem - &div.mul_monomial(&qm, &qc);
            quo.push((qm, qc));
        }
        Some(Polynomial::from_terms(quo))
    }

    /// Dense coefficient list of `self` viewed as univariate in `sym`
    /// (index = exponent; entries are polynomials free of `sym`).
    pub fn coeffs_in(&self, sym: SymbolId) -> Vec<Polynomial> {
        let deg = self.degree_in(sym) as usize;
        let mut buckets: Vec<Vec<(Monomial, BigRational)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.degree_in(sym) as usize;
            buckets[e].push((m.without(sym), c.clone()));
        }
        buckets.into_iter().map(Polynomial::from_terms).collect()
    }

    /// Rebuild from a dense univariate coefficient list.
    pub fn from_coeffs_in(sym: SymbolId, coeffs: &[Polynomial]) -> Polynomial {
        let mut terms = Vec::new();
        for (e, p) in coeffs.iter().enumerate() {
            let power = Monomial::from_pairs(&[(sym, e as u32)]);
            for (m, c) in p.terms() {
                terms.push((m.mul(&power), c.clone()));
            }
        }
        Polynomial::from_terms(terms)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out: Vec<(Monomial, BigRational)> =
            Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < rhs.terms.len() {
            match rhs.terms[j].0.cmp(&self.terms[i].0) {
                Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(rhs.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.terms[i].1 + &rhs.terms[j].1;
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&rhs.terms[j..]);
        Polynomial { terms: out }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        // Multiply through a hash accumulator, then sort once.
        let mut acc: HashMap<Monomial, BigRational> =
            HashMap::with_capacity(self.terms.len() * rhs.terms.len() / 2 + 1);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        *e.get_mut() += c;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                }
            }
        }
        let mut terms: Vec<(Monomial, BigRational)> = acc.into_iter().collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Polynomial { terms }
    }
}
