//! The binary end to end: output, exit codes and golden comparison.

use std::process::Command;

use padyn::decomposition::DecompositionReport;

fn padyn(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_padyn")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/golden/degree4_p2.txt");

#[test]
fn reduce_prints_reduction_and_verdict() {
    let (code, out, _) = padyn(&["reduce", "--p", "3", "(2z+3)/((z-1)(z-2))"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("2z / (z^2+2); good reduction: yes"));
    let (_, out, _) = padyn(&["reduce", "--p", "3", "--map", "-(2z^2+2z+1)/(z^3-3z^2+z+1)"]);
    assert_eq!(out.lines().next(), Some("1 / (z+2); good reduction: no"));
    let (_, out, _) = padyn(&["reduce", "--p", "3", "--coeffs", r#"{"num":[3,2],"den":[2,-3,1]}"#]);
    assert_eq!(out.lines().next(), Some("2z / (z^2+2); good reduction: yes"));
}

#[test]
fn exit_codes_are_stable() {
    assert_eq!(padyn(&["reduce", "--p", "3", "(z+"]).0, 2);
    assert_eq!(padyn(&["reduce", "--p", "6", "z"]).0, 3);
    assert_eq!(padyn(&["decompose", "--p", "3", "--max-level", "2", "z^2"]).0, 3);
    assert_eq!(padyn(&["decompose", "--p", "2", "(z^2+2)/z"]).0, 4);
    let (code, out, err) = padyn(&["check", "--p", "3", "z"]);
    assert_eq!(code, 3);
    assert!(out.is_empty() && err.contains("degree"));
}

#[test]
fn decompose_json_round_trips_and_dot_renders() {
    let (code, out, _) = padyn(&["decompose", "--p", "3", "--format", "json", "(2z+3)/((z-1)(z-2))"]);
    assert_eq!(code, 0);
    let report = DecompositionReport::from_json(&out).unwrap();
    assert_eq!(report.components.len(), 1);
    assert_eq!(report.components[0].balls, ["0"]);
    assert!(report.periodic_orbits.is_empty());
    let (code, dot, _) = padyn(&["decompose", "--p", "3", "--format", "dot", "z^2"]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("digraph lifts {") && dot.contains("grows tails"));
}

#[test]
fn orbit_of_the_fourth_iterate() {
    let (code, out, _) = padyn(&[
        "orbit", "--p", "3", "--start", "1", "--iters", "3", "--step", "4", "--mod-level", "3",
        "-(2z^2+2z+1)/(z^3-3z^2+z+1)",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("1 -> 7 -> 13 -> 19"), "{out}");
}

#[test]
fn criterion_lists_every_congruence() {
    let (code, out, _) = padyn(&["criterion-p2", "(1 + z^2 + 3z^3 + z^4)/(3z + z^2 + z^4)"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.ends_with("mod 2)") || l.ends_with("mod 4)") || l.contains(": pass")).count(), 8);
    assert!(out.contains("mixed term = 1 mod 4: pass (residue 1 mod 4)"));
    assert!(out.contains("criterion satisfied: yes"));
}

#[test]
fn search_matches_golden_and_flags_mismatches() {
    let (code, out, err) = padyn(&["search", "--golden", GOLDEN]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out, std::fs::read_to_string(GOLDEN).unwrap());
    let tampered = std::env::temp_dir().join("padyn_tampered_golden.txt");
    std::fs::write(&tampered, out.replacen("1 0 1 3 3 1 0", "1 0 1 3 3 1 2", 1)).unwrap();
    let (code, _, err) = padyn(&["search", "--golden", tampered.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("golden mismatch"));
    let (code, out, _) = padyn(&["search", "--degree", "3", "--modulus", "8", "--mode", "good-reduction-minimal", "--format", "json"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"hits\": []"));
}
