//! End-to-end driver: derive the third-order transformation coefficients
//! from scratch, compare them with the built-in reference table, and
//! cross-check both against randomized numeric ground truth.
//!
//! Run with `cargo run --example derive_and_check`.

use odejet::formulas::{reference_coefficients, reference_zero_rhs_transform};
use odejet::jets::{extract_coefficients, Prolongation, SLOT_NAMES};
use odejet::oracle::{prolongation_batch, table_batch, zero_rhs_batch};

fn main() {
    let prolongation = Prolongation::derive().expect("prolongation derivation");
    let derived = extract_coefficients(&prolongation.yppp).expect("coefficient extraction");
    let reference = reference_coefficients();

    println!("derived coefficient table vs reference:");
    let mut all = true;
    for (i, name) in SLOT_NAMES.iter().enumerate() {
        let ok = derived.slot(i) == reference.slot(i);
        all &= ok;
        println!("  {name:<4} {}", if ok { "match" } else { "MISMATCH" });
    }
    assert!(all, "derived table deviates from reference");

    let seed = 20260814;
    let cases = 12;
    let prolong = prolongation_batch(&prolongation, seed, cases).expect("prolongation batch");
    println!(
        "numeric prolongation check: {}/{} cases agree (seed {seed})",
        prolong.cases - prolong.failures.len() as u64,
        prolong.cases
    );
    assert!(prolong.all_passed());

    let table = table_batch(&derived, seed, cases).expect("table batch");
    println!(
        "numeric coefficient-table check: {}/{} cases agree",
        table.cases - table.failures.len() as u64,
        table.cases
    );
    assert!(table.all_passed());

    let law = reference_zero_rhs_transform();
    let zero = zero_rhs_batch(&law, seed, cases).expect("straight-line image batch");
    println!(
        "numeric straight-line transform check: {}/{} cases agree",
        zero.cases - zero.failures.len() as u64,
        zero.cases
    );
    assert!(zero.all_passed());

    println!("all runtime checks passed");
}
