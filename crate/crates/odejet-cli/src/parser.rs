//! Recursive-descent parser for the surface expression language.
//!
//! Grammar (ASCII surface syntax for equations and map components):
//!
//! ```text
//! expr  := term  (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' natural)?
//! atom  := '(' expr ')' | natural | identifier
//! ```
//!
//! `^` binds tighter than unary minus, which binds tighter than `*` and `/`,
//! which bind tighter than `+` and binary `-`. The binary operators are
//! left-associative. Exponents must be nonnegative integer literals; rational
//! constants are written with the division operator (`3/4`), which is exact.
//!
//! The identifier set depends on context (a [`Lexicon`]): equation right-hand
//! sides use the coordinates `x`, `y`, the jets `y1`, `y2` and the twelve
//! coefficient letters; map components use only the coordinates of their
//! source frame. Every parse produces a canonical [`RationalExpr`], so
//! parsing the printed form of a parse result returns the identical value.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use odejet::expr::rational::RationalExpr;
use odejet::expr::symbol;
use odejet::expr::{ExprError, SymbolId};
use odejet::invariance::CLASS_COEFF_NAMES;

/// A syntax or semantic error with its 1-based position in the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

/// The identifiers one parsing context accepts, each bound to its symbol.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<(String, SymbolId)>,
    /// Names this context for "unknown identifier" messages.
    context: &'static str,
}

impl Lexicon {
    /// Equation right-hand sides: coordinates, jets below the defined order,
    /// and the twelve coefficient letters.
    pub fn equation() -> Self {
        let mut entries = vec![
            ("x".to_string(), symbol::var("x")),
            ("y".to_string(), symbol::var("y")),
            ("y1".to_string(), symbol::jet(1, false)),
            ("y2".to_string(), symbol::jet(2, false)),
        ];
        for name in CLASS_COEFF_NAMES {
            entries.push((name.to_string(), symbol::opaque(name)));
        }
        Lexicon {
            entries,
            context: "an equation right-hand side",
        }
    }

    /// Map components in the default convention: the source coordinates are
    /// written as functions of the transformed ones, `xt` and `yt`.
    pub fn map_components() -> Self {
        Lexicon {
            entries: vec![
                ("xt".to_string(), symbol::var("xt")),
                ("yt".to_string(), symbol::var("yt")),
            ],
            context: "a map component (a function of xt, yt)",
        }
    }

    /// Map components in the forward convention: the transformed coordinates
    /// as functions of the source ones, `x` and `y`.
    pub fn forward_components() -> Self {
        Lexicon {
            entries: vec![
                ("x".to_string(), symbol::var("x")),
                ("y".to_string(), symbol::var("y")),
            ],
            context: "a forward map component (a function of x, y)",
        }
    }

    /// Constant expressions (base points): no identifiers at all.
    pub fn constants() -> Self {
        Lexicon {
            entries: Vec::new(),
            context: "a constant",
        }
    }

    fn resolve(&self, name: &str) -> Option<SymbolId> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, sym)| sym)
    }

    fn expected(&self) -> String {
        if self.entries.is_empty() {
            return "no identifiers are allowed here".to_string();
        }
        let names: Vec<&str> = self.entries.iter().map(|(n, _)| n.as_str()).collect();
        format!("expected one of: {}", names.join(", "))
    }
}

/// Parse an equation right-hand side over the full identifier set.
pub fn parse_expression(text: &str) -> Result<RationalExpr, ParseError> {
    parse_with(text, &Lexicon::equation())
}

/// Parse with an explicit identifier context.
pub fn parse_with(text: &str, lexicon: &Lexicon) -> Result<RationalExpr, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        lexicon,
    };
    let value = parser.expr()?;
    match parser.peek() {
        None => Ok(value),
        Some(t) => Err(ParseError::new(
            t.line,
            t.col,
            format!("unexpected {} after a complete expression", t.tok.describe()),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer literal '{n}'"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".to_string(),
            Tok::Minus => "'-'".to_string(),
            Tok::Star => "'*'".to_string(),
            Tok::Slash => "'/'".to_string(),
            Tok::Caret => "'^'".to_string(),
            Tok::LParen => "'('".to_string(),
            Tok::RParen => "')'".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut line = 1usize;
    let mut col = 1usize;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |line: &mut usize, col: &mut usize, c: char| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        match c {
            c if c.is_whitespace() => {
                advance(&mut line, &mut col, c);
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push(Spanned {
                    tok,
                    line: tline,
                    col: tcol,
                });
                advance(&mut line, &mut col, c);
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    digits.push(chars[i]);
                    advance(&mut line, &mut col, chars[i]);
                    i += 1;
                }
                let n: BigInt = digits.parse().expect("digit run parses as an integer");
                out.push(Spanned {
                    tok: Tok::Int(n),
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut name = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    name.push(chars[i]);
                    advance(&mut line, &mut col, chars[i]);
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(name),
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(ParseError::new(
                    tline,
                    tcol,
                    format!("unexpected character '{other}'"),
                ));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    pos: usize,
    lexicon: &'a Lexicon,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Position of the frontier for end-of-input errors: the last token's
    /// position, or 1:1 on empty input.
    fn here(&self) -> (usize, usize) {
        match self.tokens.get(self.pos).or_else(|| self.tokens.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn expr(&mut self) -> Result<RationalExpr, ParseError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            let negate = match t.tok {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.next();
            let rhs = self.term()?;
            acc = if negate { acc.sub(&rhs) } else { acc.add(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalExpr, ParseError> {
        let mut acc = self.unary()?;
        while let Some(t) = self.peek() {
            let divide = match t.tok {
                Tok::Star => false,
                Tok::Slash => true,
                _ => break,
            };
            let (line, col) = (t.line, t.col);
            self.next();
            let rhs = self.unary()?;
            acc = if divide {
                acc.div(&rhs).map_err(|e| match e {
                    ExprError::ZeroDenominator => ParseError::new(
                        line,
                        col,
                        "division by an expression that is identically zero",
                    ),
                    other => ParseError::new(line, col, other.to_string()),
                })?
            } else {
                acc.mul(&rhs)
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RationalExpr, ParseError> {
        if let Some(t) = self.peek() {
            if t.tok == Tok::Minus {
                self.next();
                return Ok(self.unary()?.neg());
            }
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalExpr, ParseError> {
        let base = self.atom()?;
        let Some(t) = self.peek() else {
            return Ok(base);
        };
        if t.tok != Tok::Caret {
            return Ok(base);
        }
        let (line, col) = (t.line, t.col);
        self.next();
        match self.next() {
            Some(Spanned {
                tok: Tok::Int(n), ..
            }) => {
                let e = n.to_u32().ok_or_else(|| {
                    ParseError::new(line, col, format!("exponent {n} is too large"))
                })?;
                Ok(base.pow(e))
            }
            Some(t) => Err(ParseError::new(
                t.line,
                t.col,
                format!(
                    "exponents must be nonnegative integer literals, found {}",
                    t.tok.describe()
                ),
            )),
            None => Err(ParseError::new(
                line,
                col,
                "expected a nonnegative integer exponent after '^'",
            )),
        }
    }

    fn atom(&mut self) -> Result<RationalExpr, ParseError> {
        let Some(t) = self.next() else {
            let (line, col) = self.here();
            return Err(ParseError::new(
                line,
                col,
                "expected an expression, found end of input",
            ));
        };
        match t.tok {
            Tok::LParen => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Spanned {
                        tok: Tok::RParen, ..
                    }) => Ok(inner),
                    Some(u) => Err(ParseError::new(
                        u.line,
                        u.col,
                        format!("expected ')', found {}", u.tok.describe()),
                    )),
                    None => Err(ParseError::new(
                        t.line,
                        t.col,
                        "unclosed '(': expected ')' before end of input",
                    )),
                }
            }
            Tok::Int(n) => Ok(RationalExpr::constant(BigRational::new(n, BigInt::one()))),
            Tok::Ident(name) => match self.lexicon.resolve(&name) {
                Some(sym) => Ok(RationalExpr::var(sym)),
                None => Err(ParseError::new(
                    t.line,
                    t.col,
                    format!(
                        "unknown identifier '{}' in {}; {}",
                        name,
                        self.lexicon.context,
                        self.lexicon.expected()
                    ),
                )),
            },
            other => Err(ParseError::new(
                t.line,
                t.col,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }
}

/// Parse a constant (integer or ratio like `-3/4`) for base points.
pub fn parse_constant(text: &str) -> Result<BigRational, ParseError> {
    let value = parse_with(text, &Lexicon::constants())?;
    value.as_constant().ok_or_else(|| {
        ParseError::new(1, 1, format!("'{}' is not a constant", text.trim()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use odejet::expr::Polynomial;

    fn parses_to(text: &str, expected: &RationalExpr) {
        let got = parse_expression(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(&got, expected, "input: {text}");
    }

    #[test]
    fn literals_and_rational_constants() {
        parses_to("42", &RationalExpr::int(42));
        parses_to("3/4", &RationalExpr::int(3).div(&RationalExpr::int(4)).unwrap());
        parses_to("-3/4", &RationalExpr::int(-3).div(&RationalExpr::int(4)).unwrap());
        parses_to("0", &RationalExpr::zero());
    }

    #[test]
    fn precedence_and_associativity() {
        let x = RationalExpr::var(symbol::var("x"));
        let y = RationalExpr::var(symbol::var("y"));
        // ^ over unary minus: -x^2 = -(x^2).
        parses_to("-x^2", &x.pow(2).neg());
        // unary minus over *: -2*x = (-2)*x (same value either way).
        parses_to("-2*x", &x.mul(&RationalExpr::int(-2)));
        // * over +.
        parses_to("x + 2*y", &x.add(&y.mul(&RationalExpr::int(2))));
        // Left association of - and /.
        parses_to("x - y - x", &y.neg());
        parses_to("8/2/2", &RationalExpr::int(2));
        // Parentheses beat everything.
        let sq = x.add(&y).pow(2).mul(&RationalExpr::int(3));
        parses_to("3*(x+y)^2", &sq);
        let expanded = parse_expression("3*x^2 + 6*x*y + 3*y^2").unwrap();
        assert_eq!(sq, expanded);
    }

    #[test]
    fn class_shaped_inputs() {
        let e = parse_expression("y2^2/(Y - X*y1)").unwrap();
        let y2sq = RationalExpr::from(Polynomial::var(symbol::jet(2, false)).pow(2));
        let den = RationalExpr::var(symbol::opaque("Y")).sub(
            &RationalExpr::var(symbol::opaque("X"))
                .mul(&RationalExpr::var(symbol::jet(1, false))),
        );
        assert_eq!(e, y2sq.div(&den).unwrap());
        // Canonical form keeps the denominator's leading coefficient
        // positive, so the pair is stored sign-flipped.
        assert!(e.den().contains(symbol::opaque("X")));
        assert!(e.den().contains(symbol::jet(1, false)));
    }

    #[test]
    fn error_positions_and_messages() {
        let e = parse_expression("1/(x-x)").unwrap_err();
        assert_eq!((e.line, e.col), (1, 2));
        assert!(e.message.contains("identically zero"), "{}", e.message);

        let e = parse_expression("x^-2").unwrap_err();
        assert!(e.message.contains("nonnegative integer"), "{}", e.message);

        let e = parse_expression("x + z").unwrap_err();
        assert_eq!((e.line, e.col), (1, 5));
        assert!(e.message.contains("unknown identifier 'z'"), "{}", e.message);

        let e = parse_expression("(x + 1").unwrap_err();
        assert!(e.message.contains("unclosed"), "{}", e.message);

        let e = parse_expression("").unwrap_err();
        assert!(e.message.contains("end of input"), "{}", e.message);

        let e = parse_expression("x 1").unwrap_err();
        assert!(e.message.contains("after a complete expression"), "{}", e.message);

        let e = parse_expression("x @ y").unwrap_err();
        assert!(e.message.contains("unexpected character '@'"), "{}", e.message);
    }

    #[test]
    fn lexicons_restrict_identifiers() {
        assert!(parse_with("xt^2 + yt", &Lexicon::map_components()).is_ok());
        let e = parse_with("x + 1", &Lexicon::map_components()).unwrap_err();
        assert!(e.message.contains("expected one of: xt, yt"), "{}", e.message);
        // Jets are equation-only.
        assert!(parse_with("y1", &Lexicon::forward_components()).is_err());
        // And the letter lexicon includes all twelve coefficients.
        assert!(parse_expression("B+P+Q+R+S+L+K+M+N+T+X+Y").is_ok());
    }

    #[test]
    fn constant_parsing() {
        assert_eq!(parse_constant("5"), Ok(BigRational::from_integer(5.into())));
        assert_eq!(
            parse_constant("-7/2"),
            Ok(BigRational::new((-7).into(), 2.into()))
        );
        assert!(parse_constant("x").is_err());
        // Constant arithmetic folds exactly.
        assert_eq!(
            parse_constant("(1/3 + 1/6) * 2"),
            Ok(BigRational::from_integer(1.into()))
        );
    }

    #[test]
    fn printing_then_parsing_is_the_identity() {
        for text in [
            "y2^2/(Y - X*y1)",
            "(B*y2^2 + K*y1^3 + T)/(Y - X*y1)",
            "3*(x+y)^2 - y1/7",
            "-x^2*y + 2/3",
            "1/(x*y)",
            "(x + 1)/(y - 1)",
        ] {
            let e = parse_expression(text).unwrap();
            let printed = e.to_string();
            let reparsed = parse_expression(&printed)
                .unwrap_or_else(|err| panic!("reprint of {text} as {printed}: {err}"));
            assert_eq!(e, reparsed, "canonical print of {text} was {printed}");
        }
    }

    #[test]
    fn printing_then_parsing_is_the_identity_on_random_expressions() {
        use rand::{Rng, SeedableRng};

        // Everything the surface grammar can name.
        let lexicon = Lexicon::equation();
        let names = [
            "x", "y", "y1", "y2", "B", "P", "Q", "R", "S", "L", "K", "M", "N", "T", "X", "Y",
        ];
        let symbols: Vec<RationalExpr> = names
            .iter()
            .map(|n| parse_with(n, &lexicon).unwrap())
            .collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let random_poly = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut acc = RationalExpr::zero();
            for _ in 0..rng.gen_range(1..=4) {
                let mut term = RationalExpr::constant(BigRational::new(
                    rng.gen_range(-9..=9i64).into(),
                    rng.gen_range(1..=4i64).into(),
                ));
                for _ in 0..rng.gen_range(0..=2) {
                    let s = &symbols[rng.gen_range(0..symbols.len())];
                    term = term.mul(&s.pow(rng.gen_range(1..=3)));
                }
                acc = acc.add(&term);
            }
            acc
        };
        let mut round_trips = 0;
        while round_trips < 200 {
            let num = random_poly(&mut rng);
            let e = if rng.gen_bool(0.5) {
                let den = random_poly(&mut rng);
                match num.div(&den) {
                    Ok(e) => e,
                    Err(_) => continue, // den happened to be zero; resample
                }
            } else {
                num
            };
            let printed = e.to_string();
            let reparsed = parse_with(&printed, &lexicon)
                .unwrap_or_else(|err| panic!("failed to reparse {printed}: {err}"));
            assert_eq!(e, reparsed, "round trip changed {printed}");
            round_trips += 1;
        }
    }
}
