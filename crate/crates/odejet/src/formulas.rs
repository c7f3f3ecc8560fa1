//! The stored reference formulas this engine is built to check.
//!
//! Everything here is a hand-entered transcription of the engine's target
//! results: the eleven-slot coefficient table of the third prolongation, the
//! second prolongation in split form, the transformed image of the equation
//! `y''' = 0`, and the coefficient pair governing closure of the rational
//! class. None of it is derived at runtime — the point is that the engine
//! *re-derives* all of it from first principles and the two must agree
//! exactly. A checksummed golden file pins the transcription against
//! accidental edits.

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::expr::{symbol, MapComponent, Polynomial, RationalExpr};
use crate::jets::{
    extract_coefficients, slot_monomials, CoefficientTable, Prolongation, SLOT_NAMES,
};
use crate::oracle::{self, OracleError};

fn x(dx: u8, dy: u8) -> Polynomial {
    Polynomial::var(symbol::phi(MapComponent::X, dx, dy))
}

fn y(dx: u8, dy: u8) -> Polynomial {
    Polynomial::var(symbol::phi(MapComponent::Y, dx, dy))
}

fn t1() -> Polynomial {
    Polynomial::var(symbol::jet(1, true))
}

fn t2() -> Polynomial {
    Polynomial::var(symbol::jet(2, true))
}

fn letter(name: &str) -> Polynomial {
    Polynomial::var(symbol::opaque(name))
}

/// `c * f1 * f2 * ...`
fn term(c: i64, factors: &[&Polynomial]) -> Polynomial {
    factors
        .iter()
        .fold(Polynomial::int(c), |acc, f| &acc * *f)
}

fn sum(terms: &[Polynomial]) -> Polynomial {
    terms.iter().fold(Polynomial::zero(), |acc, t| &acc + t)
}

/// `y1_0*x0_1 - x1_0*y0_1`, the combination every denominator-side formula
/// below is written with (the negative of the Jacobian determinant).
fn neg_det() -> Polynomial {
    &(&y(1, 0) * &x(0, 1)) - &(&x(1, 0) * &y(0, 1))
}

/// The reference coefficient table of the third prolongation: the numerator
/// of `y'''` over `W^5` decomposed into the eleven jet slots.
pub fn reference_coefficients() -> CoefficientTable {
    let a1 = -&(&(&x(1, 0) + &(&x(0, 1) * &t1())) * &neg_det());
    let a2 = term(3, &[&x(0, 1), &neg_det()]);
    let a3 = sum(&[
        term(-6, &[&y(0, 1), &x(1, 0), &x(0, 2)]),
        term(-3, &[&y(1, 1), &x(0, 1), &x(0, 1)]),
        term(3, &[&y(1, 0), &x(0, 2), &x(0, 1)]),
        term(3, &[&y(0, 2), &x(1, 0), &x(0, 1)]),
        term(3, &[&y(0, 1), &x(1, 1), &x(0, 1)]),
    ]);
    let a4 = sum(&[
        term(9, &[&y(1, 0), &x(0, 1), &x(1, 1)]),
        term(-3, &[&y(2, 0), &x(0, 1), &x(0, 1)]),
        term(3, &[&y(0, 1), &x(2, 0), &x(0, 1)]),
        term(3, &[&y(0, 2), &x(1, 0), &x(1, 0)]),
        term(-3, &[&y(1, 0), &x(0, 2), &x(1, 0)]),
        term(-9, &[&y(0, 1), &x(1, 1), &x(1, 0)]),
    ]);
    let a5 = sum(&[
        term(-3, &[&y(1, 0), &x(1, 1), &x(1, 0)]),
        term(6, &[&y(1, 0), &x(2, 0), &x(0, 1)]),
        term(-3, &[&y(0, 1), &x(1, 0), &x(2, 0)]),
        term(3, &[&y(1, 1), &x(1, 0), &x(1, 0)]),
        term(-3, &[&y(2, 0), &x(1, 0), &x(0, 1)]),
    ]);
    let a6 = sum(&[
        term(3, &[&y(0, 1), &x(0, 2), &x(0, 2)]),
        term(-3, &[&y(0, 2), &x(0, 1), &x(0, 2)]),
        term(1, &[&y(0, 3), &x(0, 1), &x(0, 1)]),
        term(-1, &[&y(0, 1), &x(0, 3), &x(0, 1)]),
    ]);
    let a7 = sum(&[
        term(-3, &[&y(0, 1), &x(1, 2), &x(0, 1)]),
        term(-3, &[&y(0, 2), &x(1, 0), &x(0, 2)]),
        term(-1, &[&y(0, 1), &x(0, 3), &x(1, 0)]),
        term(-6, &[&y(1, 1), &x(0, 2), &x(0, 1)]),
        term(2, &[&y(0, 3), &x(1, 0), &x(0, 1)]),
        term(3, &[&y(1, 0), &x(0, 2), &x(0, 2)]),
        term(-1, &[&y(1, 0), &x(0, 3), &x(0, 1)]),
        term(-6, &[&y(0, 2), &x(1, 1), &x(0, 1)]),
        term(12, &[&y(0, 1), &x(1, 1), &x(0, 2)]),
        term(3, &[&y(1, 2), &x(0, 1), &x(0, 1)]),
    ]);
    let a8 = sum(&[
        term(-3, &[&y(0, 1), &x(2, 1), &x(0, 1)]),
        term(-6, &[&y(0, 2), &x(1, 1), &x(1, 0)]),
        term(-1, &[&y(1, 0), &x(0, 3), &x(1, 0)]),
        term(-3, &[&y(0, 1), &x(1, 2), &x(1, 0)]),
        term(12, &[&y(0, 1), &x(1, 1), &x(1, 1)]),
        term(-3, &[&y(0, 2), &x(2, 0), &x(0, 1)]),
        term(-3, &[&y(2, 0), &x(0, 2), &x(0, 1)]),
        term(-6, &[&y(1, 1), &x(0, 2), &x(1, 0)]),
        term(6, &[&y(0, 1), &x(2, 0), &x(0, 2)]),
        term(-12, &[&y(1, 1), &x(0, 1), &x(1, 1)]),
        term(6, &[&y(1, 2), &x(1, 0), &x(0, 1)]),
        term(1, &[&y(0, 3), &x(1, 0), &x(1, 0)]),
        term(3, &[&y(2, 1), &x(0, 1), &x(0, 1)]),
        term(-3, &[&y(1, 0), &x(1, 2), &x(0, 1)]),
        term(12, &[&y(1, 0), &x(1, 1), &x(0, 2)]),
    ]);
    let a9 = sum(&[
        term(-3, &[&y(1, 0), &x(1, 2), &x(1, 0)]),
        term(12, &[&y(0, 1), &x(2, 0), &x(1, 1)]),
        term(3, &[&y(1, 2), &x(1, 0), &x(1, 0)]),
        term(1, &[&y(3, 0), &x(0, 1), &x(0, 1)]),
        term(-6, &[&y(2, 0), &x(1, 1), &x(0, 1)]),
        term(-3, &[&y(0, 1), &x(2, 1), &x(1, 0)]),
        term(-6, &[&y(1, 1), &x(2, 0), &x(0, 1)]),
        term(-3, &[&y(1, 0), &x(2, 1), &x(0, 1)]),
        term(-1, &[&y(0, 1), &x(3, 0), &x(0, 1)]),
        term(-3, &[&y(0, 2), &x(2, 0), &x(1, 0)]),
        term(6, &[&y(1, 0), &x(2, 0), &x(0, 2)]),
        term(6, &[&y(2, 1), &x(1, 0), &x(0, 1)]),
        term(-12, &[&y(1, 1), &x(1, 0), &x(1, 1)]),
        term(12, &[&y(1, 0), &x(1, 1), &x(1, 1)]),
        term(-3, &[&y(2, 0), &x(0, 2), &x(1, 0)]),
    ]);
    let a10 = sum(&[
        term(-3, &[&y(2, 0), &x(0, 1), &x(2, 0)]),
        term(12, &[&y(1, 0), &x(2, 0), &x(1, 1)]),
        term(-6, &[&y(2, 0), &x(1, 1), &x(1, 0)]),
        term(-6, &[&y(1, 1), &x(2, 0), &x(1, 0)]),
        term(-3, &[&y(1, 0), &x(2, 1), &x(1, 0)]),
        term(-1, &[&y(0, 1), &x(3, 0), &x(1, 0)]),
        term(2, &[&y(3, 0), &x(1, 0), &x(0, 1)]),
        term(3, &[&y(0, 1), &x(2, 0), &x(2, 0)]),
        term(3, &[&y(2, 1), &x(1, 0), &x(1, 0)]),
        term(-1, &[&y(1, 0), &x(3, 0), &x(0, 1)]),
    ]);
    let a11 = sum(&[
        term(-1, &[&y(1, 0), &x(3, 0), &x(1, 0)]),
        term(1, &[&y(3, 0), &x(1, 0), &x(1, 0)]),
        term(3, &[&y(1, 0), &x(2, 0), &x(2, 0)]),
        term(-3, &[&y(2, 0), &x(1, 0), &x(2, 0)]),
    ]);
    CoefficientTable::from_slots([a1, a2, a3, a4, a5, a6, a7, a8, a9, a10, a11])
}

/// The reference second prolongation, in its natural split form:
/// `[y2_0 + 2*y1_1*yt1 + y0_2*yt1^2 + y0_1*yt2]/W^2
///  - (y1_0 + y0_1*yt1)*[x2_0 + 2*x1_1*yt1 + x0_2*yt1^2 + x0_1*yt2]/W^3`.
pub fn reference_second_derivative() -> RationalExpr {
    let w = crate::jets::w();
    let bracket = |f: &dyn Fn(u8, u8) -> Polynomial| -> Polynomial {
        sum(&[
            f(2, 0),
            term(2, &[&f(1, 1), &t1()]),
            &f(0, 2) * &t1().pow(2),
            &f(0, 1) * &t2(),
        ])
    };
    let first = RationalExpr::new(bracket(&y), w.pow(2)).expect("W^2 nonzero");
    let w_tilde = crate::jets::w_tilde();
    let second = RationalExpr::new(&w_tilde * &bracket(&x), w.pow(3)).expect("W^3 nonzero");
    first.sub(&second)
}

/// The reference image of the equation `y''' = 0` under a general point
/// transformation, solved for `yt3`:
/// `yt3 = 3*x0_1*yt2^2/W + [a3*yt2*yt1^2 + ... + a11]/(W*(y1_0*x0_1 - x1_0*y0_1))`.
pub fn reference_zero_rhs_transform() -> RationalExpr {
    let w = crate::jets::w();
    let table = reference_coefficients();
    let monos = slot_monomials();
    let first = RationalExpr::new(&term(3, &[&x(0, 1)]) * &t2().pow(2), w.clone())
        .expect("W nonzero");
    // Slots a3..a11 with their jet monomials.
    let mut num = Polynomial::zero();
    for i in 2..11 {
        num = &num + &table.slot(i).mul_monomial(&monos[i], &BigRational::one());
    }
    let second = RationalExpr::new(num, &w * &neg_det()).expect("denominator nonzero");
    first.add(&second)
}

/// The reference (constant, linear) parts in `yt1` of the numerator of the
/// transformed equation's `yt2^2`-coefficient, over the denominator
/// `x1_0 + x0_1*yt1`:
///
/// * constant part: `3*x0_1*(Y*x1_0 - X*y1_0) + B*(x1_0*y0_1 - x0_1*y1_0)`
/// * linear part:   `3*x0_1*(Y*x0_1 - X*y0_1)`
pub fn reference_quad_jet_coeff_pair() -> (Polynomial, Polynomial) {
    let big_b = letter("B");
    let big_x = letter("X");
    let big_y = letter("Y");
    let constant = &term(3, &[&x(0, 1)])
        * &(&(&big_y * &x(1, 0)) - &(&big_x * &y(1, 0)));
    let constant = &constant + &(&big_b * &-&neg_det());
    let linear = &term(3, &[&x(0, 1)])
        * &(&(&big_y * &x(0, 1)) - &(&big_x * &y(0, 1)));
    (constant, linear)
}

/// Which side the numeric arbitration supports when a derived slot disagrees
/// with its stored transcription.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArbitrationVerdict {
    /// Only the freshly derived polynomial survives the numeric checks.
    Derived,
    /// Only the stored transcription survives them.
    Stored,
    /// Both candidates pass every sampled case; the difference is invisible
    /// to the chosen sample.
    Inconclusive,
    /// Neither candidate passes — the defect is deeper than this one slot.
    Neither,
}

/// Comparison of one coefficient slot: derived against stored.
#[derive(Debug, Clone, Serialize)]
pub struct SlotComparison {
    pub name: &'static str,
    pub matches: bool,
    /// Terms of `derived - stored`, rendered; empty when the slot matches.
    pub difference_terms: Vec<String>,
    /// Numeric arbitration outcome; present only on a mismatch.
    pub oracle_verdict: Option<ArbitrationVerdict>,
}

/// Machine-readable result of re-deriving the coefficient table and
/// comparing it slot by slot against the stored transcription.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub oracle_cases: u64,
    pub slots: Vec<SlotComparison>,
    pub match_count: usize,
    pub all_match: bool,
    /// The derived table itself re-checked numerically on the same streams,
    /// so a clean comparison is still backed by independent evidence.
    pub derived_oracle_pass: bool,
    pub summary: String,
}

/// Re-derive the third-prolongation coefficient table from first principles
/// and compare it against the stored reference, arbitrating any disputed
/// slot with the numeric oracle over `oracle_cases` seeded concrete maps.
pub fn verify_prolongation(seed: u64, oracle_cases: u64) -> Result<VerificationReport, OracleError> {
    verify_against(&reference_coefficients(), seed, oracle_cases)
}

/// Same comparison against an arbitrary stored table (lets tests inject a
/// corrupted transcription and watch the arbitration side with the
/// derivation).
pub fn verify_against(
    stored: &CoefficientTable,
    seed: u64,
    oracle_cases: u64,
) -> Result<VerificationReport, OracleError> {
    let prolongation = Prolongation::derive()?;
    let derived = extract_coefficients(&prolongation.yppp)?;
    let mut slots = Vec::with_capacity(SLOT_NAMES.len());
    let mut match_count = 0;
    for (i, name) in SLOT_NAMES.iter().enumerate() {
        let matches = derived.slot(i) == stored.slot(i);
        let (difference_terms, oracle_verdict) = if matches {
            match_count += 1;
            (Vec::new(), None)
        } else {
            let diff = derived.slot(i) - stored.slot(i);
            let terms = diff
                .terms()
                .iter()
                .map(|(m, c)| Polynomial::monomial(m.clone(), c.clone()).to_string())
                .collect();
            let verdict = arbitrate_slot(&derived, stored, i, seed, oracle_cases)?;
            (terms, Some(verdict))
        };
        slots.push(SlotComparison {
            name,
            matches,
            difference_terms,
            oracle_verdict,
        });
    }
    let derived_oracle_pass = oracle::table_batch(&derived, seed, oracle_cases)?.all_passed();
    let all_match = match_count == SLOT_NAMES.len();
    let summary = if all_match {
        format!(
            "{}/{} slots match; derived table confirmed on {} numeric cases",
            match_count,
            SLOT_NAMES.len(),
            oracle_cases
        )
    } else {
        let disputed: Vec<String> = slots
            .iter()
            .filter(|s| !s.matches)
            .map(|s| format!("{} ({:?})", s.name, s.oracle_verdict.unwrap()))
            .collect();
        format!(
            "{}/{} slots match; disputed: {}",
            match_count,
            SLOT_NAMES.len(),
            disputed.join(", ")
        )
    };
    Ok(VerificationReport {
        seed,
        oracle_cases,
        slots,
        match_count,
        all_match,
        derived_oracle_pass,
        summary,
    })
}

/// Decide a disputed slot numerically: run the full-table check once with
/// the derived table and once with a hybrid that swaps in the stored slot,
/// everything else equal.
fn arbitrate_slot(
    derived: &CoefficientTable,
    stored: &CoefficientTable,
    index: usize,
    seed: u64,
    cases: u64,
) -> Result<ArbitrationVerdict, OracleError> {
    let mut hybrid = derived.slots().clone();
    hybrid[index] = stored.slot(index).clone();
    let hybrid = CoefficientTable::from_slots(hybrid);
    let derived_ok = oracle::table_batch(derived, seed, cases)?.all_passed();
    let stored_ok = oracle::table_batch(&hybrid, seed, cases)?.all_passed();
    Ok(match (derived_ok, stored_ok) {
        (true, false) => ArbitrationVerdict::Derived,
        (false, true) => ArbitrationVerdict::Stored,
        (true, true) => ArbitrationVerdict::Inconclusive,
        (false, false) => ArbitrationVerdict::Neither,
    })
}

/// Canonical text of a coefficient table, one `name = polynomial` line per
/// slot. This is the golden-file body format.
pub fn canonical_table_text(table: &CoefficientTable) -> String {
    let mut out = String::new();
    for (name, slot) in SLOT_NAMES.iter().zip(table.slots()) {
        out.push_str(name);
        out.push_str(" = ");
        out.push_str(&slot.to_string());
        out.push('\n');
    }
    out
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data)
        .iter()
        .map(|b| format!("{:02x}", b))
        .collect()
}

/// Render the full golden file: a checksum header followed by the canonical
/// table text.
pub fn golden_file_text(table: &CoefficientTable) -> String {
    let body = canonical_table_text(table);
    format!("# sha256: {}\n{}", sha256_hex(body.as_bytes()), body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    use crate::expr::SymbolId;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn derived_table_matches_reference() {
        let p = Prolongation::derive().unwrap();
        let derived = extract_coefficients(&p.yppp).unwrap();
        let reference = reference_coefficients();
        for i in 0..11 {
            assert_eq!(
                derived.slot(i),
                reference.slot(i),
                "slot {} disagrees:\n derived:   {}\n reference: {}",
                SLOT_NAMES[i],
                derived.slot(i),
                reference.slot(i)
            );
        }
    }

    #[test]
    fn derived_second_derivative_matches_reference() {
        let p = Prolongation::derive().unwrap();
        assert_eq!(p.ypp, reference_second_derivative());
    }

    #[test]
    fn reference_table_specializes_to_curved_graph_maps() {
        // Inverse map x = x̃, y = ψ(x̃, ỹ): only x1_0 = 1 survives in the
        // x-family, and the numerator collapses to
        // y0_1*yt3 + 3*y0_2*yt2*yt1 + 3*y1_1*yt2 + y0_3*yt1^3 + 3*y1_2*yt1^2
        // + 3*y2_1*yt1 + y3_0.
        let table = reference_coefficients();
        let mut b: HashMap<SymbolId, RationalExpr> = HashMap::new();
        for (dx, dy) in crate::jets::PHI_ORDERS {
            let v = if (dx, dy) == (1, 0) { q(1) } else { q(0) };
            b.insert(symbol::phi(MapComponent::X, dx, dy), RationalExpr::constant(v));
        }
        let specialized = |p: &Polynomial| RationalExpr::from(p.clone()).substitute(&b).unwrap();
        let expect: [RationalExpr; 11] = [
            RationalExpr::from(y(0, 1)),
            RationalExpr::zero(),
            RationalExpr::zero(),
            RationalExpr::from(term(3, &[&y(0, 2)])),
            RationalExpr::from(term(3, &[&y(1, 1)])),
            RationalExpr::zero(),
            RationalExpr::zero(),
            RationalExpr::from(y(0, 3)),
            RationalExpr::from(term(3, &[&y(1, 2)])),
            RationalExpr::from(term(3, &[&y(2, 1)])),
            RationalExpr::from(y(3, 0)),
        ];
        for i in 0..11 {
            assert_eq!(specialized(table.slot(i)), expect[i], "slot {}", SLOT_NAMES[i]);
        }
    }

    #[test]
    fn zero_rhs_transform_is_block_structured() {
        // The reference image of y''' = 0 has no yt3, is quadratic in yt2,
        // and its yt2^2 coefficient is 3*x0_1/W.
        let e = reference_zero_rhs_transform();
        let t2s = symbol::jet(2, true);
        let t3s = symbol::jet(3, true);
        assert!(!e.contains(t3s));
        let groups = e.collect(&[t2s]).unwrap();
        let quad = crate::expr::Monomial::from_pairs(&[(t2s, 2)]);
        let coeff = &groups[&quad];
        let expect = RationalExpr::new(term(3, &[&x(0, 1)]), crate::jets::w()).unwrap();
        assert_eq!(coeff, &expect);
    }

    #[test]
    fn quad_jet_pair_cross_determinant() {
        // constant*x0_1 - linear*x1_0 == x0_1*(B + 3X)*(x1_0*y0_1 - x0_1*y1_0):
        // the identity behind the closure obstruction.
        let (constant, linear) = reference_quad_jet_coeff_pair();
        let lhs = &(&constant * &x(0, 1)) - &(&linear * &x(1, 0));
        let det = -&neg_det();
        let rhs = &(&x(0, 1) * &(&letter("B") + &term(3, &[&letter("X")]))) * &det;
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn verification_report_is_clean_on_the_reference() {
        let report = verify_prolongation(11_235, 5).unwrap();
        assert!(report.all_match);
        assert_eq!(report.match_count, 11);
        assert!(report.derived_oracle_pass);
        assert!(report.slots.iter().all(|s| s.matches));
        assert!(report.slots.iter().all(|s| s.oracle_verdict.is_none()));
        assert!(report.summary.starts_with("11/11"));
    }

    #[test]
    fn verification_arbitrates_a_corrupted_slot_toward_the_derivation() {
        // Corrupt one stored slot by +1; the comparison must flag exactly
        // that slot, show the constant difference, and the numeric checks
        // must side with the derived polynomial.
        let corrupted = oracle::corrupt_slot(&reference_coefficients(), 6);
        let report = verify_against(&corrupted, 0xFEED, 5).unwrap();
        assert!(!report.all_match);
        assert_eq!(report.match_count, 10);
        for (i, slot) in report.slots.iter().enumerate() {
            if i == 6 {
                assert!(!slot.matches);
                assert_eq!(slot.difference_terms, vec!["-1".to_string()]);
                assert_eq!(slot.oracle_verdict, Some(ArbitrationVerdict::Derived));
            } else {
                assert!(slot.matches, "slot {} falsely disputed", slot.name);
            }
        }
        assert!(report.derived_oracle_pass);
        assert!(report.summary.contains("10/11"));
    }

    #[test]
    fn verification_report_serializes() {
        let report = verify_prolongation(7, 2).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"all_match\":true"));
        assert!(json.contains("\"oracle_cases\":2"));
    }

    #[test]
    fn golden_file_pins_the_reference_table() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/data/reference_coefficients.txt"
        ))
        .expect("golden file present");
        let (header, body) = text.split_once('\n').expect("header line");
        let hash = header
            .strip_prefix("# sha256: ")
            .expect("checksum header");
        assert_eq!(hash, sha256_hex(body.as_bytes()), "golden file corrupted");
        assert_eq!(
            body,
            canonical_table_text(&reference_coefficients()),
            "stored table text no longer matches the transcription"
        );
    }

    #[test]
    #[ignore = "regenerates the golden file content on stdout"]
    fn print_golden_file() {
        print!("{}", golden_file_text(&reference_coefficients()));
    }

    #[test]
    fn table_slots_are_dense_cubics() {
        // Every slot of the reference table is a cubic form in the map
        // derivatives (slot a1 carries one extra jet factor).
        let table = reference_coefficients();
        for (i, slot) in table.slots().iter().enumerate() {
            assert!(!slot.is_zero());
            for (m, _) in slot.terms() {
                let jet_deg = m.degree_in(symbol::jet(1, true));
                assert_eq!(
                    m.degree() - jet_deg,
                    3,
                    "slot {} term {} is not cubic in map derivatives",
                    SLOT_NAMES[i],
                    m
                );
                assert!(jet_deg == 0 || i == 0);
            }
        }
    }
}
