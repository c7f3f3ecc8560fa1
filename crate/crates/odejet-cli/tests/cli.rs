//! End-to-end tests of the `odejet` binary: the exit-code contract, the
//! structured-report schema, and map-file handling.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_odejet"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 output")
}

/// Write a map file into a per-process scratch directory.
fn map_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("odejet-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("map file written");
    path
}

#[test]
fn exit_codes_conform_to_the_contract() {
    // (arguments, expected exit code)
    let matrix: &[(&[&str], i32)] = &[
        // All checks pass.
        (&["verify", "--cases", "3"], 0),
        (&["closure", "--order", "3"], 0),
        (&["closure", "--order", "2"], 0),
        (&["oracle", "--cases", "2"], 0),
        (&["transform", "--map", "identity", "--rhs", "0"], 0),
        (&["check-class", "--rhs", "3*y2^2/y1", "--invariant"], 0),
        // Mathematical refutations: a right-hand side outside the family,
        // and a family member violating the invariance constraint.
        (&["check-class", "--rhs", "y2^3"], 1),
        (&["check-class", "--rhs", "y2^2/y1", "--invariant"], 1),
        // Usage and parse errors.
        (&["closure", "--order", "4"], 2),
        (&["transform", "--map", "identity", "--rhs", "1/(x-x)"], 2),
        (&["transform", "--map", "/no/such/file.map", "--rhs", "0"], 2),
        (&["transform", "--map", "general", "--rhs", "0", "--forward"], 2),
        (&["check-class", "--rhs", "y3"], 2),
        (&["check-class", "--rhs", "y1 +"], 2),
        (&["no-such-subcommand"], 2),
        (&[], 2),
    ];
    for (args, expected) in matrix {
        let out = run(args);
        assert_eq!(
            exit_code(&out),
            *expected,
            "odejet {} exited {} (stdout: {} stderr: {})",
            args.join(" "),
            exit_code(&out),
            stdout(&out),
            stderr(&out),
        );
    }
}

#[test]
fn parse_errors_carry_positions_and_exit_2() {
    let out = run(&["transform", "--map", "identity", "--rhs", "1/(x-x)"]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("error:"), "missing error prefix: {err}");
    assert!(
        err.contains("identically zero"),
        "degenerate denominator not explained: {err}"
    );
    assert!(err.contains("1:2"), "missing line:column position: {err}");
}

#[test]
fn transform_by_the_identity_prints_the_input_back() {
    let out = run(&["transform", "--map", "identity", "--rhs", "0"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout(&out).lines().next(), Some("0"));

    let out = run(&["transform", "--map", "identity", "--rhs", "y1^2 - x*y2"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let first = text.lines().next().expect("transform output");
    // Same expression, canonically reordered.
    let back = run(&["transform", "--map", "identity", "--rhs", first]);
    assert_eq!(stdout(&back).lines().next(), Some(first));
}

#[test]
fn json_reports_parse_under_the_schema_for_every_subcommand() {
    let invocations: &[&[&str]] = &[
        &["--json", "verify", "--cases", "3"],
        &["--json", "closure", "--order", "3"],
        &["--json", "closure", "--order", "2"],
        &["--json", "oracle", "--cases", "2"],
        &["--json", "transform", "--map", "identity", "--rhs", "y1^2"],
        &["--json", "check-class", "--rhs", "3*y2^2/y1", "--invariant"],
        &["--json", "check-class", "--rhs", "y2^3"],
    ];
    for args in invocations {
        let out = run(args);
        let text = stdout(&out);
        let v: serde_json::Value =
            serde_json::from_str(&text).unwrap_or_else(|e| panic!("bad JSON for {args:?}: {e}"));
        let obj = v.as_object().expect("report is an object");
        for field in ["command", "seed", "checks", "verdict", "wall_ms"] {
            assert!(obj.contains_key(field), "missing {field} in {text}");
        }
        assert!(obj["seed"].is_u64());
        assert!(obj["wall_ms"].is_u64());
        let verdict = obj["verdict"].as_str().expect("verdict is a string");
        assert!(verdict == "pass" || verdict == "fail");
        let checks = obj["checks"].as_array().expect("checks is an array");
        assert!(!checks.is_empty());
        for check in checks {
            let check = check.as_object().expect("check is an object");
            assert!(check["name"].is_string());
            assert!(check["details"].is_string());
            let status = check["status"].as_str().expect("status is a string");
            assert!(status == "pass" || status == "fail");
        }
        // The verdict is the conjunction of the check statuses.
        let all_pass = checks.iter().all(|c| c["status"] == "pass");
        assert_eq!(verdict == "pass", all_pass);
        assert_eq!(verdict == "pass", exit_code(&out) == 0);
    }
}

#[test]
fn verify_report_covers_the_full_derivation() {
    let out = run(&["--json", "verify", "--cases", "3"]);
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    let names: Vec<&str> = v["checks"]
        .as_array()
        .expect("checks")
        .iter()
        .map(|c| c["name"].as_str().expect("name"))
        .collect();
    for i in 1..=11 {
        let slot = format!("coefficient a{i}");
        assert!(names.contains(&slot.as_str()), "missing {slot} in {names:?}");
    }
    for name in [
        "derived-table-numeric-confirmation",
        "second-derivative-rule",
        "quadratic-jet-residue",
        "zero-rhs-transform",
    ] {
        assert!(names.contains(&name), "missing {name} in {names:?}");
    }
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn map_files_use_the_inverse_convention_by_default() {
    // Read as the inverse convention x(xt, yt), this shear puts a unit in
    // the x-by-yt slot, and the zero equation must pick up exactly the
    // leading correction 3*y2^2/(y1 + 1). A forward misread would place
    // the unit elsewhere and change the sign pattern.
    let path = map_file(
        "shear.map",
        "# x and y as functions of xt and yt\nx = xt + yt\ny = yt\nbase = (2, 1)\n",
    );
    let out = run(&["transform", "--map", path.to_str().unwrap(), "--rhs", "0"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out).lines().next(), Some("3*y2^2/(y1 + 1)"));

    // When x depends on xt alone the change of variables is a plain affine
    // substitution and the zero equation is fixed.
    let path = map_file("rescale.map", "x = 2*xt + 1\ny = xt + 3*yt\n");
    let out = run(&["transform", "--map", path.to_str().unwrap(), "--rhs", "0"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out).lines().next(), Some("0"));
}

#[test]
fn forward_maps_are_inverted_exactly() {
    // The forward map xt = 2x, yt = y - x^2 is triangular; entered with
    // --forward it must transform like its hand-computed inverse
    // x = xt/2, y = yt + xt^2/4.
    let forward = map_file("forward.map", "xt = 2*x\nyt = y - x^2\n");
    let inverse = map_file("inverse.map", "x = 1/2*xt\ny = yt + 1/4*xt^2\n");
    let via_forward = run(&[
        "transform",
        "--map",
        forward.to_str().unwrap(),
        "--forward",
        "--rhs",
        "y1*y2",
    ]);
    let via_inverse = run(&[
        "transform",
        "--map",
        inverse.to_str().unwrap(),
        "--rhs",
        "y1*y2",
    ]);
    assert_eq!(exit_code(&via_forward), 0, "stderr: {}", stderr(&via_forward));
    assert_eq!(exit_code(&via_inverse), 0, "stderr: {}", stderr(&via_inverse));
    // The transformed equations must agree (later report lines carry timings).
    assert_eq!(
        stdout(&via_forward).lines().next(),
        stdout(&via_inverse).lines().next()
    );
}

#[test]
fn degenerate_and_malformed_map_files_are_usage_errors() {
    let degenerate = map_file("degenerate.map", "x = xt\ny = 2*xt\n");
    let out = run(&["transform", "--map", degenerate.to_str().unwrap(), "--rhs", "0"]);
    assert_eq!(exit_code(&out), 2);
    assert!(
        stderr(&out).contains("Jacobian determinant vanishes"),
        "unexplained rejection: {}",
        stderr(&out)
    );

    let malformed = map_file("malformed.map", "x = xt\n");
    let out = run(&["transform", "--map", malformed.to_str().unwrap(), "--rhs", "0"]);
    assert_eq!(exit_code(&out), 2);

    let rational = map_file("rational.map", "x = 1/xt\ny = yt\n");
    let out = run(&["transform", "--map", rational.to_str().unwrap(), "--rhs", "0"]);
    assert_eq!(exit_code(&out), 2);
    assert!(
        stderr(&out).contains("denominators are not supported"),
        "unexplained rejection: {}",
        stderr(&out)
    );
}

#[test]
fn quiet_mode_suppresses_details_but_not_the_verdict() {
    let loud = run(&["verify", "--cases", "2"]);
    let quiet = run(&["--quiet", "verify", "--cases", "2"]);
    assert_eq!(exit_code(&loud), 0);
    assert_eq!(exit_code(&quiet), 0);
    assert!(stdout(&quiet).len() < stdout(&loud).len());
    assert!(stdout(&quiet).contains("verdict: pass"));
}

#[test]
fn closing_the_output_pipe_early_does_not_panic() {
    let out = Command::new("sh")
        .arg("-c")
        .arg(format!(
            "{} verify --cases 2 | head -n 1",
            env!("CARGO_BIN_EXE_odejet")
        ))
        .output()
        .expect("shell pipeline runs");
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(!err.contains("panicked"), "broken pipe panicked: {err}");
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("check "));
}

#[test]
fn seeds_flow_into_reports() {
    let out = run(&["--json", "--seed", "123", "oracle", "--cases", "2"]);
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["seed"], 123);
}
