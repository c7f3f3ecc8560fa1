//! Map files: concrete point transformations read from disk.
//!
//! Default convention (matching the engine): the file gives the source
//! coordinates as polynomial functions of the transformed ones,
//!
//! ```text
//! # comments run to end of line
//! x = xt + yt^2
//! y = yt
//! base = (0, 1/2)        # optional point in the transformed plane
//! ```
//!
//! With `--forward` the file instead gives the transformed coordinates as
//! functions of the source ones (`xt = ...`, `yt = ...`), and the loader
//! inverts the map exactly. Exact inversion is supported for affine maps
//! (nonzero determinant) and for triangular maps, where `xt` is affine in
//! `x` alone and `yt` is `c(x) + d*y` with constant `d != 0`. Anything else
//! is rejected: enter such maps in the default convention instead. A
//! `base = (x0, y0)` line in a forward file is a point in the source plane
//! and is pushed through the map.
//!
//! The names `identity` and `general` are reserved: they denote the
//! identity map and the fully symbolic map, not files.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use num_rational::BigRational;
use num_traits::Zero;

use odejet::expr::rational::RationalExpr;
use odejet::expr::symbol;
use odejet::expr::{Polynomial, SymbolId};
use odejet::invariance::MapInput;
use odejet::oracle::ConcreteMap;

use crate::parser::{self, Lexicon, ParseError};

/// An error in a map argument or file, with the file line when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapFileError {
    /// 1-based line in the map file; 0 when the error is not line-specific.
    pub line: usize,
    pub message: String,
}

impl MapFileError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        MapFileError {
            line,
            message: message.into(),
        }
    }

    fn whole(message: impl Into<String>) -> Self {
        MapFileError {
            line: 0,
            message: message.into(),
        }
    }
}

impl fmt::Display for MapFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for MapFileError {}

/// Resolve the `--map` argument: a reserved name or a path to a map file.
pub fn resolve_map_arg(arg: &str, forward: bool) -> Result<MapInput, MapFileError> {
    match arg {
        "identity" => Ok(MapInput::Concrete(ConcreteMap::identity())),
        "general" => {
            if forward {
                Err(MapFileError::whole(
                    "the general symbolic map has no forward form to invert",
                ))
            } else {
                Ok(MapInput::General)
            }
        }
        path => {
            let text = std::fs::read_to_string(Path::new(path)).map_err(|e| {
                MapFileError::whole(format!("cannot read map file '{path}': {e}"))
            })?;
            let map = parse_map_file(&text, forward)?;
            Ok(MapInput::Concrete(map))
        }
    }
}

/// Parse map-file text in the given convention.
pub fn parse_map_file(text: &str, forward: bool) -> Result<ConcreteMap, MapFileError> {
    let (first_key, second_key) = if forward { ("xt", "yt") } else { ("x", "y") };
    let mut first: Option<Polynomial> = None;
    let mut second: Option<Polynomial> = None;
    let mut base: Option<(BigRational, BigRational)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(MapFileError::at(
                lineno,
                format!("expected '<name> = <expression>', got '{}'", line.trim()),
            ));
        };
        let key = line[..eq].trim();
        let value = &line[eq + 1..];
        let value_col = eq + 2; // 1-based column where the value text begins
        if key == "base" {
            if base.is_some() {
                return Err(MapFileError::at(lineno, "duplicate 'base' line"));
            }
            base = Some(parse_base(value, lineno)?);
        } else if key == first_key || key == second_key {
            let slot = if key == first_key { &mut first } else { &mut second };
            if slot.is_some() {
                return Err(MapFileError::at(lineno, format!("duplicate '{key}' line")));
            }
            let lexicon = if forward {
                Lexicon::forward_components()
            } else {
                Lexicon::map_components()
            };
            let expr = parser::parse_with(value, &lexicon)
                .map_err(|e| relocate(e, lineno, value_col))?;
            if !expr.is_polynomial() {
                return Err(MapFileError::at(
                    lineno,
                    format!("the '{key}' component must be a polynomial; denominators are not supported in map files"),
                ));
            }
            *slot = Some(expr.num().clone());
        } else {
            return Err(MapFileError::at(
                lineno,
                format!("unknown assignment '{key}'; expected '{first_key}', '{second_key}' or 'base'"),
            ));
        }
    }

    let first = first.ok_or_else(|| {
        MapFileError::whole(format!("the map file never assigns '{first_key}'"))
    })?;
    let second = second.ok_or_else(|| {
        MapFileError::whole(format!("the map file never assigns '{second_key}'"))
    })?;

    if forward {
        invert_forward(first, second, base)
    } else {
        let (bx, by) = base.unwrap_or_else(|| (BigRational::zero(), BigRational::zero()));
        Ok(ConcreteMap {
            chi: first,
            psi: second,
            base: (bx, by),
        })
    }
}

/// Remap an expression-relative error position into file coordinates. The
/// value text is a single line, so its line-1 errors land on the file line;
/// a multi-line value cannot happen (lines are split before parsing).
fn relocate(e: ParseError, file_line: usize, value_col: usize) -> MapFileError {
    MapFileError::at(
        file_line,
        format!("column {}: {}", value_col + e.col - 1, e.message),
    )
}

fn parse_base(value: &str, lineno: usize) -> Result<(BigRational, BigRational), MapFileError> {
    let v = value.trim();
    let inner = v
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| {
            MapFileError::at(lineno, "base must be written as '(a, b)' with rational a, b")
        })?;
    // Split at the comma outside any parentheses (components may be
    // parenthesized arithmetic like (1/3 + 1)).
    let mut depth = 0usize;
    let mut split = None;
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                split = Some(i);
                break;
            }
            _ => {}
        }
    }
    let split = split.ok_or_else(|| {
        MapFileError::at(lineno, "base must have two comma-separated components")
    })?;
    let parse = |s: &str| {
        parser::parse_constant(s)
            .map_err(|e| MapFileError::at(lineno, format!("in base: {}", e.message)))
    };
    Ok((parse(&inner[..split])?, parse(&inner[split + 1..])?))
}

fn x_sym() -> SymbolId {
    symbol::var("x")
}
fn y_sym() -> SymbolId {
    symbol::var("y")
}
fn xt_sym() -> SymbolId {
    symbol::var("xt")
}
fn yt_sym() -> SymbolId {
    symbol::var("yt")
}

/// `(constant, x-coefficient, y-coefficient)` when the polynomial is affine
/// in `x` and `y` with constant coefficients.
fn affine_parts(p: &Polynomial) -> Option<(BigRational, BigRational, BigRational)> {
    let by_x = p.coeffs_in(x_sym());
    if by_x.len() > 2 {
        return None;
    }
    let cx = match by_x.get(1) {
        None => BigRational::zero(),
        Some(c) => c.as_constant()?,
    };
    let rest = by_x.first().cloned().unwrap_or_else(Polynomial::zero);
    let by_y = rest.coeffs_in(y_sym());
    if by_y.len() > 2 {
        return None;
    }
    let cy = match by_y.get(1) {
        None => BigRational::zero(),
        Some(c) => c.as_constant()?,
    };
    let c0 = match by_y.first() {
        None => BigRational::zero(),
        Some(c) => c.as_constant()?,
    };
    Some((c0, cx, cy))
}

/// Invert a forward map exactly, or explain why that is not supported.
fn invert_forward(
    f1: Polynomial,
    f2: Polynomial,
    base: Option<(BigRational, BigRational)>,
) -> Result<ConcreteMap, MapFileError> {
    let xt_p = Polynomial::var(xt_sym());
    let yt_p = Polynomial::var(yt_sym());

    let inverse = if let (Some((a0, a1, a2)), Some((b0, b1, b2))) =
        (affine_parts(&f1), affine_parts(&f2))
    {
        // xt = a0 + a1 x + a2 y, yt = b0 + b1 x + b2 y.
        let det = &a1 * &b2 - &a2 * &b1;
        if det.is_zero() {
            return Err(MapFileError::whole(
                "the forward map is affine but its determinant is zero, so it has no inverse",
            ));
        }
        let u = &xt_p - &Polynomial::constant(a0);
        let v = &yt_p - &Polynomial::constant(b0);
        let chi = &u.scale(&(&b2 / &det)) - &v.scale(&(&a2 / &det));
        let psi = &v.scale(&(&a1 / &det)) - &u.scale(&(&b1 / &det));
        (chi, psi)
    } else {
        invert_triangular(&f1, &f2, &xt_p, &yt_p)?
    };
    let (chi, psi) = inverse;

    let base = match base {
        None => (BigRational::zero(), BigRational::zero()),
        Some((x0, y0)) => {
            // Push the source-plane base point forward.
            let mut at = HashMap::new();
            at.insert(x_sym(), x0);
            at.insert(y_sym(), y0);
            let image = |p: &Polynomial| {
                RationalExpr::from(p.clone())
                    .eval(&at)
                    .expect("a polynomial evaluates everywhere")
            };
            (image(&f1), image(&f2))
        }
    };

    Ok(ConcreteMap {
        chi,
        psi,
        base,
    })
}

fn invert_triangular(
    f1: &Polynomial,
    f2: &Polynomial,
    xt_p: &Polynomial,
    yt_p: &Polynomial,
) -> Result<(Polynomial, Polynomial), MapFileError> {
    let unsupported = |reason: &str| {
        MapFileError::whole(format!(
            "cannot invert this forward map exactly ({reason}); supported forms are affine maps \
             and triangular maps (xt affine in x alone, yt = c(x) + d*y with constant d != 0) — \
             enter other maps in the default convention instead"
        ))
    };

    // xt-component: affine in x alone.
    if f1.contains(y_sym()) {
        return Err(unsupported("xt depends on y"));
    }
    let by_x = f1.coeffs_in(x_sym());
    if by_x.len() > 2 {
        return Err(unsupported("xt is nonlinear in x"));
    }
    let a = by_x
        .first()
        .and_then(|c| c.as_constant())
        .unwrap_or_else(BigRational::zero);
    let b = by_x.get(1).and_then(|c| c.as_constant()).unwrap_or_else(BigRational::zero);
    if b.is_zero() {
        return Err(unsupported("xt does not depend on x"));
    }

    // yt-component: c(x) + d*y with constant d.
    let by_y = f2.coeffs_in(y_sym());
    if by_y.len() > 2 {
        return Err(unsupported("yt is nonlinear in y"));
    }
    let c_of_x = by_y.first().cloned().unwrap_or_else(Polynomial::zero);
    let d = match by_y.get(1) {
        None => BigRational::zero(),
        Some(p) => p
            .as_constant()
            .ok_or_else(|| unsupported("the y-coefficient of yt is not constant"))?,
    };
    if d.is_zero() {
        return Err(unsupported("yt does not depend on y"));
    }

    // x = (xt - a)/b.
    let chi = (xt_p - &Polynomial::constant(a)).scale(&b.recip());
    // y = (yt - c((xt - a)/b))/d.
    let mut bind = HashMap::new();
    bind.insert(x_sym(), RationalExpr::from(chi.clone()));
    let c_inv = RationalExpr::from(c_of_x)
        .substitute(&bind)
        .expect("polynomial substitution into a polynomial cannot fail");
    debug_assert!(c_inv.is_polynomial());
    let psi = (yt_p - c_inv.num()).scale(&d.recip());
    Ok((chi, psi))
}
