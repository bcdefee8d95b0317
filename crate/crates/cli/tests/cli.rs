//! Black-box checks of the command line surface: exit codes, output
//! framing, environment handling, and error reporting.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(parts: &[&str]) -> PathBuf {
    let mut path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    for part in parts {
        path.push(part);
    }
    path
}

fn semvercalc(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_semvercalc"));
    cmd.env_remove("SEMVERCALC_POLICY");
    for arg in args {
        cmd.arg(arg);
    }
    cmd
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().unwrap();
    (
        status.code().expect("process was signalled"),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn optimistic_policy_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/policies/optimistic.pol")
}

#[test]
fn identical_inputs_exit_zero_with_a_none_verdict() {
    let old = fixture(&["rename", "old.sdl"]);
    let (code, stdout, _) = run(semvercalc(&["check"]).arg(&old).arg(&old));
    assert_eq!(code, 0);
    assert!(stdout.contains("verdict: none"), "{stdout}");
}

#[test]
fn exit_codes_follow_the_verdict() {
    let cases = [
        ("rename", 3),
        ("fnadded", 2),
        ("implonly", 0),
        ("license", 0),
    ];
    for (scenario, expected) in cases {
        let (code, _, stderr) = run(semvercalc(&["check"])
            .arg(fixture(&[scenario, "old.sdl"]))
            .arg(fixture(&[scenario, "new.sdl"])));
        assert_eq!(code, expected, "scenario {scenario}: {stderr}");
    }
}

#[test]
fn exit_zero_flag_suppresses_the_gating_code() {
    let (code, stdout, _) = run(semvercalc(&["check", "--exit-zero"])
        .arg(fixture(&["rename", "old.sdl"]))
        .arg(fixture(&["rename", "new.sdl"])));
    assert_eq!(code, 0);
    assert!(stdout.contains("verdict: major"), "{stdout}");
}

#[test]
fn policy_env_var_selects_the_policy() {
    let old = fixture(&["opaqueswap", "old.sdl"]);
    let new = fixture(&["opaqueswap", "new.sdl"]);

    let (code, _, _) = run(semvercalc(&["check"]).arg(&old).arg(&new));
    assert_eq!(code, 3, "bundled default should stay cautious");

    let (code, stdout, stderr) = run(semvercalc(&["check"])
        .env("SEMVERCALC_POLICY", optimistic_policy_path())
        .arg(&old)
        .arg(&new));
    assert_eq!(code, 2, "{stderr}");
    assert!(stdout.contains("verdict: minor"), "{stdout}");
}

#[test]
fn policy_flag_beats_the_env_var() {
    let pessimistic =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/policies/pessimistic.pol");
    let (code, stdout, _) = run(semvercalc(&["check"])
        .env("SEMVERCALC_POLICY", &pessimistic)
        .arg("--policy")
        .arg(optimistic_policy_path())
        .arg(fixture(&["opaqueswap", "old.sdl"]))
        .arg(fixture(&["opaqueswap", "new.sdl"])));
    assert_eq!(code, 2);
    assert!(stdout.contains("verdict: minor"), "{stdout}");
}

#[test]
fn prov_out_round_trips_through_explain() {
    let dir = tempfile::tempdir().unwrap();
    let prov = dir.path().join("rename.prov");
    let (code, check_text, _) = run(semvercalc(&["check", "--exit-zero", "--prov-out"])
        .arg(&prov)
        .arg(fixture(&["rename", "old.sdl"]))
        .arg(fixture(&["rename", "new.sdl"])));
    assert_eq!(code, 0);

    let record = fs::read_to_string(&prov).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&record).unwrap();
    assert_eq!(parsed["format"], "semvercalc-prov-1");

    let (code, explain_text, _) = run(semvercalc(&["explain"]).arg(&prov));
    assert_eq!(code, 0);
    assert_eq!(explain_text, check_text);
}

#[test]
fn structured_check_output_is_the_record_itself() {
    let (code, stdout, _) = run(
        semvercalc(&["check", "--exit-zero", "--output", "structured"])
            .arg(fixture(&["fnadded", "old.sdl"]))
            .arg(fixture(&["fnadded", "new.sdl"])),
    );
    assert_eq!(code, 0);
    let record: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(record["format"], "semvercalc-prov-1");
    assert_eq!(record["verdict"], "minor");
    assert_eq!(record["component"], "cachekit");
}

#[test]
fn closed_mode_requires_a_usage_file() {
    let (code, _, stderr) = run(semvercalc(&["check", "--mode", "closed"])
        .arg(fixture(&["rename", "old.sdl"]))
        .arg(fixture(&["rename", "new.sdl"])));
    assert_eq!(code, 1);
    assert!(stderr.contains("--usage"), "{stderr}");
}

#[test]
fn closed_mode_scopes_the_verdict() {
    let (code, stdout, _) = run(semvercalc(&["check", "--mode", "closed", "--usage"])
        .arg(fixture(&["dormant.use"]))
        .arg(fixture(&["rename", "old.sdl"]))
        .arg(fixture(&["rename", "new.sdl"])));
    assert_eq!(code, 0);
    assert!(stdout.contains("verdict: none"), "{stdout}");
}

#[test]
fn lint_reports_findings_and_exits_one() {
    let (code, stdout, _) = run(semvercalc(&["lint"]).arg(fixture(&["lint", "broken.sdl"])));
    assert_eq!(code, 1);
    assert!(stdout.contains("precondition is unsatisfiable"), "{stdout}");
    assert!(stdout.contains("export helper"), "{stdout}");

    let (code, stdout, _) = run(semvercalc(&["lint"]).arg(fixture(&["fnadded", "old.sdl"])));
    assert_eq!(code, 0);
    assert!(stdout.contains("no findings"), "{stdout}");
}

#[test]
fn resolve_prints_the_selected_version() {
    let (code, stdout, _) = run(semvercalc(&["resolve"])
        .arg(fixture(&["registry"]))
        .args(["lib", "1.2.*"]));
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "1.2.9");

    let (code, _, stderr) = run(semvercalc(&["resolve"])
        .arg(fixture(&["registry"]))
        .args(["lib", "4.*"]));
    assert_eq!(code, 1);
    assert!(stderr.contains("error"), "{stderr}");
}

#[test]
fn advise_flags_declared_bumps_that_disagree() {
    let (code, stdout, _) = run(semvercalc(&["advise"])
        .arg(fixture(&["registry"]))
        .args(["lib", "1.2.3", "1.*"]));
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2, "{stdout}");
    assert!(
        lines[0].starts_with("1.2.3 -> 1.2.9") && lines[0].ends_with("agreement"),
        "{stdout}"
    );
    assert!(
        lines[1].starts_with("1.2.3 -> 1.3.0") && lines[1].ends_with("DISAGREEMENT"),
        "{stdout}"
    );
}

#[test]
fn surface_counts_public_and_exported_functions() {
    let (code, stdout, _) =
        run(semvercalc(&["surface"]).arg(fixture(&["rename_scoped", "old.sdl"])));
    assert_eq!(code, 0);
    assert!(stdout.contains("component: visitkit 3.1.0"), "{stdout}");
    assert!(stdout.contains("total functions: 2"), "{stdout}");
    assert!(stdout.contains("public functions: 2"), "{stdout}");
    assert!(stdout.contains("exported functions: 1"), "{stdout}");
}

#[test]
fn bump_prints_the_next_version() {
    let (code, stdout, _) = run(&mut semvercalc(&["bump", "1.4.9", "minor"]));
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "1.5.0");

    let (code, stdout, _) = run(&mut semvercalc(&["bump", "1.4.9", "none"]));
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "1.4.9");
}

#[test]
fn unreadable_input_exits_one_with_a_diagnostic() {
    let (code, _, stderr) = run(semvercalc(&["check"])
        .arg(fixture(&["rename", "missing.sdl"]))
        .arg(fixture(&["rename", "new.sdl"])));
    assert_eq!(code, 1);
    assert!(stderr.starts_with("error:"), "{stderr}");
}

#[test]
fn facts_output_feeds_classify() {
    let (code, facts_text, _) = run(semvercalc(&["facts"])
        .arg(fixture(&["prestrengthen", "old.sdl"]))
        .arg(fixture(&["prestrengthen", "new.sdl"])));
    assert_eq!(code, 0);
    assert!(facts_text.contains("preStrengthened"), "{facts_text}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("facts.txt");
    fs::write(&path, &facts_text).unwrap();
    let (code, stdout, _) = run(semvercalc(&["classify"]).arg(&path));
    assert_eq!(code, 3);
    assert!(stdout.contains("verdict: major"), "{stdout}");
}
