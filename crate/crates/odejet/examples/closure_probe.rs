//! Timing probe for the closure checks (run with --release or dev as needed).

use std::time::Instant;

use odejet::invariance;

fn main() {
    let t = Instant::now();
    let omega = invariance::omega_necessary_condition().expect("omega report");
    println!(
        "omega: matches_target={} vanishes={}  [{:?}]",
        omega.matches_target,
        omega.vanishes_under_constraint,
        t.elapsed()
    );

    let t = Instant::now();
    let free = invariance::free_b_closure_obstruction().expect("obstruction report");
    println!(
        "free-B: closes={} obstructions={:?}  [{:?}]",
        free.closes,
        free.obstructions,
        t.elapsed()
    );

    let t = Instant::now();
    match invariance::invariant_closure_check() {
        Ok(cert) => {
            println!("closure: ok, gauge={:?}  [{:?}]", cert.gauge.as_ref().map(|g| g.to_string()), t.elapsed());
            for (name, law) in &cert.laws {
                let s = law.to_string();
                let show = if s.len() > 100 { format!("{}...({} chars)", &s[..100], s.len()) } else { s };
                println!("  {name} = {show}");
            }
        }
        Err(e) => println!("closure: REFUTED: {e}  [{:?}]", t.elapsed()),
    }

    let t = Instant::now();
    match invariance::second_order_closure_checks() {
        Ok([c3, c4]) => {
            println!("second-order: both closed  [{:?}]", t.elapsed());
            for cert in [&c3, &c4] {
                println!("  class: {}", cert.class);
                for (name, law) in &cert.laws {
                    let s = law.to_string();
                    let show = if s.len() > 120 { format!("{}...({} chars)", &s[..120], s.len()) } else { s };
                    println!("    {name} = {show}");
                }
            }
        }
        Err(e) => println!("second-order: REFUTED: {e}  [{:?}]", t.elapsed()),
    }
}
