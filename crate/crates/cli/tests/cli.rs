use std::io::Write;
use std::process::{Command, Output, Stdio};

use sixsquare::design::ResolvableDesign;
use sixsquare::families::{galaxy_replicate, gamma, Variant};
use sixsquare::format::{read_design, write_design};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sixsquare")).args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_sixsquare"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_matches_embedded_files() {
    let cases = [
        (["--family", "gamma", "--variant", "RC", "--r", "8"], include_str!("../../core/data/gamma-rc-8.txt")),
        (["--family", "delta", "--variant", "RC", "--r", "8"], include_str!("../../core/data/delta-rc-8.txt")),
    ];
    for (args, expected) in cases {
        let mut full = vec!["generate"];
        full.extend(args);
        let o = run(&full);
        assert!(o.status.success(), "{args:?}");
        assert_eq!(stdout(&o), expected, "{args:?}");
    }
    let o = run(&["generate", "--family", "theta", "--variant", "plain", "--r", "8"]);
    let theta = read_design(include_str!("../../core/data/theta-8.txt")).unwrap();
    assert_eq!(read_design(&stdout(&o)).unwrap(), theta);
}

#[test]
fn evaluate_theta_8() {
    let o = run(&["evaluate", "theta-8"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("A: 0.8549\n"));
    assert!(out.contains("A exact: 7007/8196\n"));
    for line in ["factor=11/12 decimal=0.9167 multiplicity=9", "factor=7/8 decimal=0.8750 multiplicity=10", "factor=13/16 decimal=0.8125 multiplicity=16"] {
        assert!(out.contains(line), "{line}");
    }
}

#[test]
fn precision_flag() {
    let out = stdout(&run(&["--precision", "7", "evaluate", "gamma-5"]));
    assert!(out.contains("A: 0.8382815\n"), "{out}");
}

#[test]
fn robustness_gamma_rc_5() {
    let out = stdout(&run(&["robustness", "gamma-rc-5"]));
    assert!(out.contains("worst: 0.8341\n"));
    assert!(out.contains("average: 0.8364\n"));
}

#[test]
fn report_formats() {
    let csv = stdout(&run(&["--format", "csv", "evaluate", "gamma-rc-2"]));
    assert!(csv.starts_with("key,value\n"));
    assert!(csv.contains("factor,decimal,multiplicity\n"));
    let table = stdout(&run(&["--format", "table", "evaluate", "gamma-rc-2"]));
    assert!(table.contains("A exact"));
}

#[test]
fn boolean_verbs_use_exit_status() {
    assert_eq!(run(&["isomorphic", "gamma-r-2", "gamma-c-2"]).status.code(), Some(0));
    assert_eq!(run(&["isomorphic", "gamma-6", "delta-6"]).status.code(), Some(1));
    assert_eq!(run(&["sylvester-check", "delta-rc-8"]).status.code(), Some(0));
    let base = gamma(7, Variant::RC).unwrap();
    let extra = ResolvableDesign::from_parts(36, 6, vec![galaxy_replicate(1)], "");
    let repeated = write_design(&base.concat(&extra));
    assert_eq!(run_stdin(&["sylvester-check", "-"], &repeated).status.code(), Some(1));
    assert_eq!(run(&["sylvester-check", "gamma-rc-7"]).status.code(), Some(4));
}

#[test]
fn automorphism_orders() {
    for (name, order) in [("gamma-rc-8", "1440"), ("theta-8", "1"), ("delta-rc-8", "144")] {
        let out = stdout(&run(&["autorder", name]));
        assert!(out.contains(&format!("automorphism group order: {order}\n")), "{name}: {out}");
    }
}

#[test]
fn error_exit_codes() {
    assert_eq!(run(&["evaluate", "no-such-design"]).status.code(), Some(2));
    assert_eq!(run_stdin(&["evaluate", "-"], "1 2 x\n").status.code(), Some(2));
    assert_eq!(run(&["evaluate", "gamma-1"]).status.code(), Some(3));
    assert_eq!(run(&["evaluate", "gamma-0"]).status.code(), Some(3));
    assert_eq!(run(&["generate", "--family", "gamma", "--variant", "RC", "--r", "9"]).status.code(), Some(4));
    assert_eq!(run(&["search", "--r", "3", "--cooling-rate", "1.5"]).status.code(), Some(4));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["export"]).status.code(), Some(64));
}

#[test]
fn search_is_deterministic_and_valid() {
    let args = ["search", "--r", "3", "--restarts", "2", "--seed", "7", "--budget", "none"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.contains("# seed: 7\n"));
    let design = read_design(&out).unwrap();
    assert!(design.is_valid());
    assert_eq!(design.r(), 3);
}

#[test]
fn emitted_designs_read_back() {
    for args in [
        vec!["generate", "--family", "gamma", "--variant", "C", "--r", "4"],
        vec!["generate", "--family", "delta", "--variant", "plain", "--r", "6"],
        vec!["generate", "--family", "theta", "--variant", "plain", "--r", "4"],
        vec!["dual", "delta-6"],
    ] {
        let o = run(&args);
        assert!(o.status.success(), "{args:?}");
        let design = read_design(&stdout(&o)).unwrap();
        assert!(design.is_valid(), "{args:?}");
        let again = run_stdin(&["evaluate", "-"], &stdout(&o));
        assert!(again.status.success(), "{args:?}");
    }
}

#[test]
fn export_writes_readable_files() {
    let dir = std::env::temp_dir().join(format!("sixsquare-export-{}", std::process::id()));
    let o = run(&["export", "theta-8", "gamma-r-3", "--dir", dir.to_str().unwrap()]);
    assert!(o.status.success());
    for name in ["theta-8", "gamma-r-3"] {
        let text = std::fs::read_to_string(dir.join(format!("{name}.txt"))).unwrap();
        let design = read_design(&text).unwrap();
        assert_eq!(design.label(), name);
        assert!(design.is_valid());
    }
    std::fs::remove_dir_all(dir).unwrap();
}
