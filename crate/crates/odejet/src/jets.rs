//! Jet calculus for an invertible change of both plane coordinates.
//!
//! The untransformed curve is `y(x)`; the transformed curve is `ỹ(x̃)` with
//! jet symbols `yt1, yt2, yt3`. The inverse map `(x̃, ỹ) ↦ (x, y)` is kept
//! opaque: only its partial derivatives up to third order enter, as the
//! symbols `x1_0 … x0_3` and `y1_0 … y0_3`. The total derivative along the
//! transformed curve is
//!
//! ```text
//! D = ∂/∂x̃ + yt1·∂/∂ỹ + yt2·∂/∂yt1 + yt3·∂/∂yt2
//! ```
//!
//! which on an inverse-map derivative reads `D Φ_{i.j} = Φ_{i+1.j} +
//! yt1·Φ_{i.j+1}`. Derivative orders beyond three are out of budget by
//! design and raise errors instead of silently inventing symbols.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::One;

use crate::expr::{symbol, ExprError, MapComponent, Monomial, Polynomial, RationalExpr, SymbolId, SymbolKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JetError {
    #[error("cannot differentiate {0}: no total-derivative rule applies")]
    NotDifferentiable(String),
    #[error("total derivative of {0} exceeds the third-order budget")]
    OrderBudget(String),
    #[error("unexpected structure: {0}")]
    StructureViolation(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Inverse-map derivative symbol, `comp` ∈ {X, Y}, order `dx + dy` ≤ 3.
pub fn phi(comp: MapComponent, dx: u8, dy: u8) -> SymbolId {
    symbol::phi(comp, dx, dy)
}

/// Transformed-curve jet symbol `ytk`.
pub fn t(order: u8) -> SymbolId {
    symbol::jet(order, true)
}

/// Untransformed-curve jet symbol `yk`.
pub fn yk(order: u8) -> SymbolId {
    symbol::jet(order, false)
}

/// The (dx, dy) pairs of one family's derivative symbols, in interning order.
pub const PHI_ORDERS: [(u8, u8); 9] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 0),
    (1, 1),
    (1, 2),
    (2, 0),
    (2, 1),
    (3, 0),
];

/// All eighteen inverse-map derivative symbols, x-family then y-family.
pub fn inverse_map_symbols() -> Vec<SymbolId> {
    let mut out = Vec::with_capacity(18);
    for comp in [MapComponent::X, MapComponent::Y] {
        for (dx, dy) in PHI_ORDERS {
            out.push(phi(comp, dx, dy));
        }
    }
    out
}

/// `W = x1_0 + x0_1*yt1`, the total derivative of the x-component; the
/// denominator of the first prolongation.
pub fn w() -> Polynomial {
    &Polynomial::var(phi(MapComponent::X, 1, 0))
        + &(&Polynomial::var(phi(MapComponent::X, 0, 1)) * &Polynomial::var(t(1)))
}

/// `W̃ = y1_0 + y0_1*yt1`, the total derivative of the y-component.
pub fn w_tilde() -> Polynomial {
    &Polynomial::var(phi(MapComponent::Y, 1, 0))
        + &(&Polynomial::var(phi(MapComponent::Y, 0, 1)) * &Polynomial::var(t(1)))
}

/// `detS = x1_0*y0_1 - x0_1*y1_0`, the Jacobian determinant of the inverse map.
pub fn det_s() -> Polynomial {
    let x10 = Polynomial::var(phi(MapComponent::X, 1, 0));
    let x01 = Polynomial::var(phi(MapComponent::X, 0, 1));
    let y10 = Polynomial::var(phi(MapComponent::Y, 1, 0));
    let y01 = Polynomial::var(phi(MapComponent::Y, 0, 1));
    &(&x10 * &y01) - &(&x01 * &y10)
}

fn d_symbol(s: SymbolId) -> Result<Polynomial, JetError> {
    match s.kind() {
        SymbolKind::MapDeriv {
            comp: comp @ (MapComponent::X | MapComponent::Y),
            dx,
            dy,
        } => {
            if dx + dy >= 3 {
                return Err(JetError::OrderBudget(s.name()));
            }
            let dx_part = Polynomial::var(phi(comp, dx + 1, dy));
            let dy_part = Polynomial::var(phi(comp, dx, dy + 1));
            Ok(&dx_part + &(&dy_part * &Polynomial::var(t(1))))
        }
        SymbolKind::Jet { order, tilde: true } => {
            if order >= 3 {
                return Err(JetError::OrderBudget(s.name()));
            }
            Ok(Polynomial::var(t(order + 1)))
        }
        _ => Err(JetError::NotDifferentiable(s.name())),
    }
}

fn d_poly(p: &Polynomial) -> Result<Polynomial, JetError> {
    let mut out = Polynomial::zero();
    for s in p.symbols() {
        let ds = d_symbol(s)?;
        out = &out + &(&p.partial(s) * &ds);
    }
    Ok(out)
}

/// Total derivative of a rational expression along the transformed curve.
pub fn total_derivative(e: &RationalExpr) -> Result<RationalExpr, JetError> {
    if e.is_polynomial() {
        return Ok(RationalExpr::from(d_poly(e.num())?));
    }
    let dn = d_poly(e.num())?;
    let dd = d_poly(e.den())?;
    let num = &(&dn * e.den()) - &(e.num() * &dd);
    let den = e.den() * e.den();
    Ok(RationalExpr::new(num, den)?)
}

/// The first three derivatives of the untransformed curve, expressed through
/// transformed jets and inverse-map derivatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prolongation {
    pub yp: RationalExpr,
    pub ypp: RationalExpr,
    pub yppp: RationalExpr,
}

impl Prolongation {
    /// Derive the full tower: `y' = W̃/W`, then `y⁽ᵏ⁺¹⁾ = D(y⁽ᵏ⁾)/W`.
    pub fn derive() -> Result<Self, JetError> {
        let w_expr = RationalExpr::from(w());
        let yp = RationalExpr::new(w_tilde(), w())?;
        let ypp = total_derivative(&yp)?.div(&w_expr)?;
        let yppp = total_derivative(&ypp)?.div(&w_expr)?;
        Ok(Prolongation { yp, ypp, yppp })
    }

    pub fn get(&self, order: u8) -> Result<&RationalExpr, JetError> {
        match order {
            1 => Ok(&self.yp),
            2 => Ok(&self.ypp),
            3 => Ok(&self.yppp),
            _ => Err(JetError::StructureViolation(format!(
                "prolongation order {order} outside 1..=3"
            ))),
        }
    }
}

/// The eleven numerator slots of the third prolongation over `W^5`, as
/// multiplier monomials in the transformed jets, in table order. The first
/// slot's coefficient is the full `yt3`-coefficient and is the only one
/// allowed to carry `yt1` (degree at most one); all later coefficients are
/// jet-free.
pub fn slot_monomials() -> [Monomial; 11] {
    let t1 = t(1);
    let t2 = t(2);
    let t3 = t(3);
    [
        Monomial::from_pairs(&[(t3, 1)]),
        Monomial::from_pairs(&[(t2, 2)]),
        Monomial::from_pairs(&[(t2, 1), (t1, 2)]),
        Monomial::from_pairs(&[(t2, 1), (t1, 1)]),
        Monomial::from_pairs(&[(t2, 1)]),
        Monomial::from_pairs(&[(t1, 5)]),
        Monomial::from_pairs(&[(t1, 4)]),
        Monomial::from_pairs(&[(t1, 3)]),
        Monomial::from_pairs(&[(t1, 2)]),
        Monomial::from_pairs(&[(t1, 1)]),
        Monomial::unit(),
    ]
}

pub const SLOT_NAMES: [&str; 11] = [
    "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9", "a10", "a11",
];

/// Coefficient table of the third prolongation's numerator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    slots: [Polynomial; 11],
}

impl CoefficientTable {
    pub fn from_slots(slots: [Polynomial; 11]) -> Self {
        CoefficientTable { slots }
    }

    pub fn slot(&self, index: usize) -> &Polynomial {
        &self.slots[index]
    }

    pub fn slots(&self) -> &[Polynomial; 11] {
        &self.slots
    }

    /// Rebuild `(Σ slotᵢ·monoᵢ)/W^5` from the table.
    pub fn reconstruct(&self) -> RationalExpr {
        let monos = slot_monomials();
        let mut num = Polynomial::zero();
        for (slot, mono) in self.slots.iter().zip(monos) {
            num = &num + &slot.mul_monomial(&mono, &BigRational::one());
        }
        RationalExpr::new(num, w().pow(5)).expect("W^5 is not zero")
    }
}

/// Decompose a third-prolongation expression into the eleven-slot table.
/// The expression must equal a polynomial over `W^5`, with the numerator's
/// jet structure exactly: linear in `yt3` (coefficient of degree ≤ 1 in
/// `yt1`), degree ≤ 2 in `yt2` (the `yt2²` coefficient jet-free, the `yt2`
/// coefficient of degree ≤ 2 in `yt1`), and a jet-free part of degree ≤ 5
/// in `yt1`. Anything else is a structure violation.
pub fn extract_coefficients(yppp: &RationalExpr) -> Result<CoefficientTable, JetError> {
    let w5 = w().pow(5);
    let num = if yppp.den() == &w5 {
        yppp.num().clone()
    } else {
        let lifted = yppp.mul(&RationalExpr::from(w5));
        if !lifted.is_polynomial() {
            return Err(JetError::StructureViolation(format!(
                "denominator {} does not divide W^5",
                yppp.den()
            )));
        }
        lifted.num().clone()
    };

    let groups = RationalExpr::from(num).collect(&[t(2), t(3)])?;
    let mut slots: [Polynomial; 11] = std::array::from_fn(|_| Polynomial::zero());
    let violation = |mono: &Monomial| {
        JetError::StructureViolation(format!("unexpected jet monomial {mono} in numerator"))
    };

    for (mono, val) in &groups {
        let e2 = mono.degree_in(t(2));
        let e3 = mono.degree_in(t(3));
        debug_assert!(val.is_polynomial());
        let p = val.num();
        match (e3, e2) {
            (1, 0) => {
                if p.degree_in(t(1)) > 1 {
                    return Err(JetError::StructureViolation(format!(
                        "yt3 coefficient has degree {} in yt1",
                        p.degree_in(t(1))
                    )));
                }
                slots[0] = p.clone();
            }
            (0, 2) => {
                if p.contains(t(1)) {
                    return Err(JetError::StructureViolation(
                        "yt2^2 coefficient is not jet-free".into(),
                    ));
                }
                slots[1] = p.clone();
            }
            (0, 1) => {
                let c = p.coeffs_in(t(1));
                if c.len() > 3 {
                    return Err(JetError::StructureViolation(format!(
                        "yt2 coefficient has degree {} in yt1",
                        c.len() - 1
                    )));
                }
                for (k, cp) in c.into_iter().enumerate() {
                    // ascending powers yt1^0..yt1^2 fill slots a5, a4, a3
                    slots[4 - k] = cp;
                }
            }
            (0, 0) => {
                let c = p.coeffs_in(t(1));
                if c.len() > 6 {
                    return Err(JetError::StructureViolation(format!(
                        "jet-free part has degree {} in yt1",
                        c.len() - 1
                    )));
                }
                for (k, cp) in c.into_iter().enumerate() {
                    // ascending powers yt1^0..yt1^5 fill slots a11 down to a6
                    slots[10 - k] = cp;
                }
            }
            _ => return Err(violation(mono)),
        }
    }
    Ok(CoefficientTable::from_slots(slots))
}

/// Bind every inverse-map derivative symbol to a constant (unlisted symbols
/// default to zero). Convenience for specializing general formulas to a
/// concrete map.
pub fn constant_phi_bindings(values: &[(SymbolId, BigRational)]) -> HashMap<SymbolId, RationalExpr> {
    let mut out: HashMap<SymbolId, RationalExpr> = inverse_map_symbols()
        .into_iter()
        .map(|s| (s, RationalExpr::zero()))
        .collect();
    for (s, v) in values {
        out.insert(*s, RationalExpr::constant(v.clone()));
    }
    out
}
