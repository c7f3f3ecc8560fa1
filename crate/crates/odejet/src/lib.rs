//! Exact symbolic engine for point transformations of third-order ODE jets.
//!
//! The crate derives how the first three derivatives of a plane curve
//! transform under an invertible change of both coordinates, extracts the
//! polynomial coefficient structure of the third derivative, and checks
//! closure of rational ODE classes under such transformations — all in exact
//! big-rational arithmetic, with an independent numeric oracle for
//! cross-validation.

pub mod expr;
pub mod formulas;
pub mod invariance;
pub mod jets;
pub mod oracle;
