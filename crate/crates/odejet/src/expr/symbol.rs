//! Interned symbols: the indeterminates every polynomial is built from.
//!
//! Symbols live in a process-global, append-only table so that a `SymbolId`
//! is a cheap `u32` and the term order of every polynomial is identical
//! across all expressions in a session. The table is seeded with the fixed
//! vocabulary of the jet calculus (map derivatives, jet variables, the
//! twelve coefficient letters, the four coordinate names) in a deterministic
//! order; anything else is appended on first use.

use std::fmt;
use std::sync::{OnceLock, RwLock};

/// Which function of the change of coordinates a derivative symbol belongs to.
///
/// `X` and `Y` are the components of the *inverse* map, i.e. the functions
/// x(xt, yt) and y(xt, yt) that express the original coordinates through the
/// transformed ones. `XTilde`/`YTilde` name the components of the direct map;
/// they are registered so the direct Jacobian can be written down, but the
/// engine never differentiates through them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MapComponent {
    X,
    Y,
    XTilde,
    YTilde,
}

impl MapComponent {
    fn prefix(self) -> &'static str {
        match self {
            MapComponent::X => "x",
            MapComponent::Y => "y",
            MapComponent::XTilde => "xt",
            MapComponent::YTilde => "yt",
        }
    }
}

/// What a symbol denotes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    /// Partial derivative of a map component: `dx` times in the first
    /// transformed coordinate, `dy` times in the second.
    MapDeriv { comp: MapComponent, dx: u8, dy: u8 },
    /// Jet variable of the given order; `tilde` marks the transformed frame.
    Jet { order: u8, tilde: bool },
    /// Coefficient letter treated as a single opaque indeterminate.
    Opaque(String),
    /// Plain named variable.
    Var(String),
}

impl SymbolKind {
    /// Surface name used by the printer and accepted back by the parser.
    pub fn name(&self) -> String {
        match self {
            SymbolKind::MapDeriv { comp, dx, dy } => {
                format!("{}{}_{}", comp.prefix(), dx, dy)
            }
            SymbolKind::Jet { order, tilde } => {
                if *tilde {
                    format!("yt{order}")
                } else {
                    format!("y{order}")
                }
            }
            SymbolKind::Opaque(s) | SymbolKind::Var(s) => s.clone(),
        }
    }
}

/// Index into the global symbol table. Ordering follows registration order,
/// which the table keeps deterministic for the standard vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The kind this id was registered with.
    pub fn kind(self) -> SymbolKind {
        table().read().unwrap().kinds[self.index()].clone()
    }

    /// Surface name (stable per session).
    pub fn name(self) -> String {
        self.kind().name()
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

struct Table {
    kinds: Vec<SymbolKind>,
    index: std::collections::HashMap<SymbolKind, u32>,
}

impl Table {
    fn new() -> Self {
        let mut t = Table {
            kinds: Vec::new(),
            index: std::collections::HashMap::new(),
        };
        // Multi-indices (dx, dy) with 1 <= dx + dy <= 3, ascending.
        let full: &[(u8, u8)] = &[
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
        let first: &[(u8, u8)] = &[(0, 1), (1, 0)];
        // Map derivatives first, by (component name, dx, dy). The direct-map
        // entries only exist to first order (the direct Jacobian).
        for &(dx, dy) in full {
            t.push(SymbolKind::MapDeriv { comp: MapComponent::X, dx, dy });
        }
        for &(dx, dy) in first {
            t.push(SymbolKind::MapDeriv { comp: MapComponent::XTilde, dx, dy });
        }
        for &(dx, dy) in full {
            t.push(SymbolKind::MapDeriv { comp: MapComponent::Y, dx, dy });
        }
        for &(dx, dy) in first {
            t.push(SymbolKind::MapDeriv { comp: MapComponent::YTilde, dx, dy });
        }
        // Jet variables by order, transformed frame first.
        for order in 1..=3 {
            t.push(SymbolKind::Jet { order, tilde: true });
        }
        for order in 1..=3 {
            t.push(SymbolKind::Jet { order, tilde: false });
        }
        // Coefficient letters, alphabetically.
        for letter in ["B", "K", "L", "M", "N", "P", "Q", "R", "S", "T", "X", "Y"] {
            t.push(SymbolKind::Opaque(letter.to_string()));
        }
        // Coordinate names.
        for v in ["x", "y", "xt", "yt"] {
            t.push(SymbolKind::Var(v.to_string()));
        }
        t
    }

    fn push(&mut self, kind: SymbolKind) -> SymbolId {
        if let Some(&i) = self.index.get(&kind) {
            return SymbolId(i);
        }
        let i = self.kinds.len() as u32;
        self.kinds.push(kind.clone());
        self.index.insert(kind, i);
        SymbolId(i)
    }
}

fn table() -> &'static RwLock<Table> {
    static TABLE: OnceLock<RwLock<Table>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(Table::new()))
}

/// Intern a symbol, returning its stable id. Idempotent.
pub fn intern(kind: SymbolKind) -> SymbolId {
    if let Some(&i) = table().read().unwrap().index.get(&kind) {
        return SymbolId(i);
    }
    table().write().unwrap().push(kind)
}

/// Number of symbols registered so far (standard vocabulary plus ad hoc names).
pub fn symbol_count() -> usize {
    table().read().unwrap().kinds.len()
}

/// Derivative symbol of an inverse-map component (`x` or `y` family).
pub fn phi(comp: MapComponent, dx: u8, dy: u8) -> SymbolId {
    intern(SymbolKind::MapDeriv { comp, dx, dy })
}

/// Jet variable of the given order, in the transformed (`tilde`) or original frame.
pub fn jet(order: u8, tilde: bool) -> SymbolId {
    intern(SymbolKind::Jet { order, tilde })
}

/// Opaque coefficient letter.
pub fn opaque(name: &str) -> SymbolId {
    intern(SymbolKind::Opaque(name.to_string()))
}

/// Plain named variable.
pub fn var(name: &str) -> SymbolId {
    intern(SymbolKind::Var(name.to_string()))
}
