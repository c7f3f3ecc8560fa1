//! Exact symbolic kernel: interned symbols, multivariate polynomials over
//! arbitrary-precision rationals, and canonically reduced rational
//! expressions. Everything downstream builds on the guarantee that equal
//! expressions are structurally equal.

pub mod display;
pub mod gcd;
pub mod poly;
pub mod rational;
pub mod symbol;

pub use poly::{Monomial, Polynomial};
pub use rational::RationalExpr;
pub use symbol::{MapComponent, SymbolId, SymbolKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("division by a zero expression")]
    ZeroDenominator,
    #[error("substitution makes a denominator vanish identically")]
    DegenerateSubstitution,
    #[error("cannot collect: denominator involves {0}")]
    NotPolynomialInVars(String),
    #[error("expected a simple pole: denominator has degree {found} in {var}")]
    UnsupportedPole { var: String, found: u32 },
    #[error("no value bound for symbol {0}")]
    UnboundSymbol(String),
    #[error("expression has a pole at the evaluation point")]
    PoleAtPoint,
}
