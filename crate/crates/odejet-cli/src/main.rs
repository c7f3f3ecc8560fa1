//! `odejet` — exact transformation calculus for third-order ODE jets.
//!
//! Every subcommand runs a set of named checks and emits a [`RunReport`]:
//! plain text by default, JSON with `--json`. Exit code 0 means every check
//! passed, 1 means a mathematical check failed or was refuted, 2 means the
//! invocation itself was unusable (bad flags, unparsable expressions,
//! malformed or non-invertible map files).

mod mapfile;
mod parser;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser as ClapParser, Subcommand};

use odejet::expr::rational::RationalExpr;
use odejet::formulas;
use odejet::invariance::{self, InvarianceError, MapInput, CLASS_COEFF_NAMES};
use odejet::jets::{self, Prolongation};
use odejet::oracle;

use report::RunReport;

#[derive(ClapParser)]
#[command(
    name = "odejet",
    version,
    about = "Exact symbolic engine for point transformations of third-order ODE jets"
)]
struct Cli {
    /// Emit the run report as JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for the reproducible numeric ground-truth sampler.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Suppress detail blocks; keep one line per check.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Re-derive the third-derivative expansion and verify the stored
    /// coefficient table, the second-derivative rule, the quadratic-jet
    /// residue identity, and the straight-line transform.
    Verify {
        /// Seeded numeric cases for confirmation and mismatch arbitration.
        #[arg(long, default_value_t = 20)]
        cases: u64,
    },
    /// Certify that an equation class is closed under point transformations.
    Closure {
        /// Equation order: 3 for the rational third-order class, 2 for the
        /// two second-order regression classes.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=3))]
        order: u8,
    },
    /// Transform an equation right-hand side by a point map and print the
    /// result in the new coordinates.
    Transform {
        /// Map file path, or 'identity', or 'general' (fully symbolic).
        #[arg(long)]
        map: String,
        /// Right-hand side of y3 = f(x, y, y1, y2).
        #[arg(long)]
        rhs: String,
        /// The map file gives the forward map (xt, yt as functions of x, y);
        /// invert it exactly. Affine and triangular maps only.
        #[arg(long)]
        forward: bool,
    },
    /// Test whether a right-hand side lies in the rational third-order
    /// class, extracting canonical coefficients when it does.
    CheckClass {
        /// Right-hand side of y3 = f(x, y, y1, y2).
        #[arg(long)]
        rhs: String,
        /// Additionally require the quadratic-jet coefficient to be tied to
        /// the denominator slope (B = -3X).
        #[arg(long)]
        invariant: bool,
    },
    /// Run the seeded numeric ground-truth suites against the derived
    /// symbolic formulas.
    Oracle {
        /// Cases per suite.
        #[arg(long, default_value_t = 25)]
        cases: u64,
    },
}

/// An error that makes the invocation unusable (exit code 2).
struct UsageError(String);

type CmdResult = Result<(RunReport, Option<String>), UsageError>;

/// Write to stdout without panicking when a downstream reader (e.g.
/// `head`) closes the pipe early; the exit code still reflects the checks.
fn emit(text: &str) {
    use std::io::{ErrorKind, Write};
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() != ErrorKind::BrokenPipe {
            eprintln!("error: cannot write output: {e}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let started = Instant::now();
    match run(&cli, &echo) {
        Err(UsageError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Ok((mut report, primary)) => {
            report.wall_ms = started.elapsed().as_millis() as u64;
            if cli.json {
                let json =
                    serde_json::to_string_pretty(&report).expect("the report serializes");
                emit(&format!("{json}\n"));
            } else {
                if let Some(text) = primary {
                    emit(&format!("{text}\n"));
                }
                emit(&report.render_human(cli.quiet));
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: &Cli, echo: &str) -> CmdResult {
    match &cli.command {
        Command::Verify { cases } => cmd_verify(echo, cli.seed, *cases),
        Command::Closure { order } => cmd_closure(echo, cli.seed, *order),
        Command::Transform { map, rhs, forward } => {
            cmd_transform(echo, cli.seed, map, rhs, *forward)
        }
        Command::CheckClass { rhs, invariant } => cmd_check_class(echo, cli.seed, rhs, *invariant),
        Command::Oracle { cases } => cmd_oracle(echo, cli.seed, *cases),
    }
}

fn cmd_verify(echo: &str, seed: u64, cases: u64) -> CmdResult {
    let mut report = RunReport::new(echo, seed);
    match formulas::verify_prolongation(seed, cases) {
        Err(e) => report.check(
            "coefficient-table",
            false,
            format!("the numeric sampler failed: {e}"),
        ),
        Ok(vr) => {
            for slot in &vr.slots {
                let details = if slot.matches {
                    String::new()
                } else {
                    format!(
                        "differs by: {}; numeric arbitration favors: {}",
                        slot.difference_terms.join(", "),
                        slot.oracle_verdict
                            .map(|v| format!("{v:?}"))
                            .unwrap_or_else(|| "unresolved".to_string())
                    )
                };
                report.check(format!("coefficient {}", slot.name), slot.matches, details);
            }
            report.check(
                "derived-table-numeric-confirmation",
                vr.derived_oracle_pass,
                format!("{} seeded ground-truth cases", vr.oracle_cases),
            );
        }
    }
    match Prolongation::derive() {
        Err(e) => report.check("second-derivative-rule", false, e.to_string()),
        Ok(p) => {
            let ok = p.ypp == formulas::reference_second_derivative();
            report.check(
                "second-derivative-rule",
                ok,
                if ok {
                    "the derived second jet equals the stored rule"
                } else {
                    "the derived second jet differs from the stored rule"
                },
            );
        }
    }
    match invariance::omega_necessary_condition() {
        Err(e) => report.check("quadratic-jet-residue", false, e.to_string()),
        Ok(om) => report.check(
            "quadratic-jet-residue",
            om.matches_target && om.vanishes_under_constraint,
            "the scaled residue equals (B + 3*X)*detS and vanishes under B = -3*X",
        ),
    }
    match invariance::transform_equation(&RationalExpr::zero(), &MapInput::General) {
        Err(e) => report.check("zero-rhs-transform", false, e.to_string()),
        Ok(g) => {
            let ok = g == formulas::reference_zero_rhs_transform();
            report.check("zero-rhs-transform", ok, format!("yt3 = {g}"));
        }
    }
    Ok((report, None))
}

fn render_certificate(cert: &invariance::ClosureCertificate) -> String {
    let mut out = format!("{}\n", cert.class);
    if let Some(constraint) = cert.constraint {
        out.push_str(&format!("constraint verified: {constraint}\n"));
    }
    if let Some(gauge) = &cert.gauge {
        out.push_str(&format!("gauge factor: {gauge}\n"));
    }
    out.push_str(&format!("provenance: {}\n", cert.provenance));
    out.push_str("transformed coefficient laws (canonical gauge):\n");
    for (name, law) in &cert.laws {
        out.push_str(&format!("{name}~ = {law}\n"));
    }
    out.trim_end().to_string()
}

fn cmd_closure(echo: &str, seed: u64, order: u8) -> CmdResult {
    let mut report = RunReport::new(echo, seed);
    match order {
        3 => {
            match invariance::invariant_closure_check() {
                Err(e) => report.check("constrained-third-order-closure", false, e.to_string()),
                Ok(cert) => report.check(
                    "constrained-third-order-closure",
                    cert.rebuild_verified,
                    render_certificate(&cert),
                ),
            }
            match invariance::free_b_closure_obstruction() {
                Err(e) => report.check("unconstrained-family-obstruction", false, e.to_string()),
                Ok(ob) => {
                    let pass = !ob.closes
                        && ob.omega.matches_target
                        && ob.omega.vanishes_under_constraint;
                    let mut details = String::from(
                        "with a free quadratic-jet coefficient the transformed equation leaves the class:\n",
                    );
                    for o in &ob.obstructions {
                        details.push_str(&format!("- {o}\n"));
                    }
                    details.push_str(
                        "the residue obstruction equals (B + 3*X)*detS and vanishes exactly under B = -3*X",
                    );
                    report.check("unconstrained-family-obstruction", pass, details);
                }
            }
        }
        2 => match invariance::second_order_closure_checks() {
            Err(e) => report.check("second-order-closures", false, e.to_string()),
            Ok([cubic, quartic]) => {
                report.check(
                    "cubic-slope-closure",
                    cubic.rebuild_verified,
                    render_certificate(&cubic),
                );
                report.check(
                    "quartic-over-line-closure",
                    quartic.rebuild_verified,
                    render_certificate(&quartic),
                );
            }
        },
        other => return Err(UsageError(format!("--order must be 2 or 3, got {other}"))),
    }
    Ok((report, None))
}

fn cmd_transform(echo: &str, seed: u64, map_arg: &str, rhs: &str, forward: bool) -> CmdResult {
    let map = mapfile::resolve_map_arg(map_arg, forward)
        .map_err(|e| UsageError(format!("--map: {e}")))?;
    let f = parser::parse_expression(rhs).map_err(|e| UsageError(format!("--rhs: {e}")))?;
    let g = invariance::transform_equation(&f, &map).map_err(|e| match e {
        InvarianceError::UnsupportedRhs(m) => UsageError(format!("--rhs: {m}")),
        InvarianceError::DegenerateMap(m) => UsageError(format!("--map: {m}")),
        other => UsageError(other.to_string()),
    })?;
    // Results are printed in the transformed frame's own names, with the
    // tildes dropped: x, y, y1, y2 again. Symbolic (general-map) results
    // also mention the inverse-map derivative symbols x1_0, x0_1, ...
    let shown = invariance::retag_tilde_to_plain(&g).map_err(|e| UsageError(e.to_string()))?;
    let text = shown.to_string();
    let mut report = RunReport::new(echo, seed);
    report.check("transform", true, format!("y3 = {text}"));
    Ok((report, Some(text)))
}

/// Rewrite transformed-frame jet and coordinate names back into the surface
/// names the user typed (`yt2` -> `y2`, `xt` -> `x`, ...). The jet names are
/// replaced first so the bare-coordinate pass cannot clip them.
fn to_plain_names(s: &str) -> String {
    s.replace("yt1", "y1")
        .replace("yt2", "y2")
        .replace("yt3", "y3")
        .replace("yt", "y")
        .replace("xt", "x")
}

fn cmd_check_class(echo: &str, seed: u64, rhs: &str, invariant: bool) -> CmdResult {
    let f = parser::parse_expression(rhs).map_err(|e| UsageError(format!("--rhs: {e}")))?;
    let g = invariance::retag_plain_to_tilde(&f).map_err(|e| UsageError(e.to_string()))?;
    let m = invariance::class_membership(&g, invariant)
        .map_err(|e| UsageError(e.to_string()))?;
    let mut report = RunReport::new(echo, seed);
    if m.in_class {
        let coeffs = m.coeffs.expect("coefficients are present when in class");
        let mut details = String::from("canonical coefficients:\n");
        for (name, entry) in CLASS_COEFF_NAMES.iter().zip(coeffs.entries()) {
            let shown =
                invariance::retag_tilde_to_plain(entry).map_err(|e| UsageError(e.to_string()))?;
            details.push_str(&format!("{name} = {shown}\n"));
        }
        if let Some(gauge) = &m.gauge {
            let shown =
                invariance::retag_tilde_to_plain(gauge).map_err(|e| UsageError(e.to_string()))?;
            details.push_str(&format!("gauge factor: {shown}\n"));
        }
        if invariant {
            details.push_str(
                "the quadratic-jet coefficient is tied to the denominator slope (B = -3X)\n",
            );
        }
        report.check("class-membership", true, details.trim_end().to_string());
    } else {
        let reasons: Vec<String> = m
            .obstructions
            .iter()
            .map(|o| format!("- {}", to_plain_names(o)))
            .collect();
        report.check(
            "class-membership",
            false,
            format!("outside the class:\n{}", reasons.join("\n")),
        );
    }
    Ok((report, None))
}

fn batch_check(
    report: &mut RunReport,
    name: &str,
    outcome: Result<oracle::BatchOutcome, oracle::OracleError>,
) {
    match outcome {
        Err(e) => report.check(name, false, format!("the sampler failed: {e}")),
        Ok(b) => {
            let pass = b.all_passed();
            let details = if pass {
                format!("{} seeded cases agree exactly", b.cases)
            } else {
                format!("failing case indices: {:?}", b.failures)
            };
            report.check(name, pass, details);
        }
    }
}

fn cmd_oracle(echo: &str, seed: u64, cases: u64) -> CmdResult {
    let mut report = RunReport::new(echo, seed);
    let prolong = match Prolongation::derive() {
        Err(e) => {
            report.check("prolongation-derivation", false, e.to_string());
            return Ok((report, None));
        }
        Ok(p) => p,
    };
    batch_check(
        &mut report,
        "prolongation-samples",
        oracle::prolongation_batch(&prolong, seed, cases),
    );
    match jets::extract_coefficients(&prolong.yppp) {
        Err(e) => report.check("coefficient-table-samples", false, e.to_string()),
        Ok(table) => batch_check(
            &mut report,
            "coefficient-table-samples",
            oracle::table_batch(&table, seed, cases),
        ),
    }
    match invariance::transform_equation(&RationalExpr::zero(), &MapInput::General) {
        Err(e) => report.check("zero-rhs-samples", false, e.to_string()),
        Ok(g) => batch_check(
            &mut report,
            "zero-rhs-samples",
            oracle::zero_rhs_batch(&g, seed, cases),
        ),
    }
    Ok((report, None))
}
