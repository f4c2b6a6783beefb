//! End-to-end checks of the binary: flag handling, exit codes, output
//! formats and the CSV round-trip contract.

use hubbard_ent_cli::output::{parse_csv, reserialize_csv, CSV_HEADER};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hubbard-ent"))
        .args(args)
        .env_remove("HUBBARD_ENT_SIG_DIGITS")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().unwrap()
}

#[test]
fn scan_u_integral_is_symmetric_and_round_trips() {
    let out = run(&[
        "scan-u", "--u-min", "-2", "--u-max", "2", "--points", "5", "--methods", "integral",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let (comments, rows) = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(comments.iter().any(|c| c.contains("abs_tol")));
    // evenness of the entanglement column
    let ev = |i: usize| rows[i].entanglement.unwrap();
    assert!((ev(0) - ev(4)).abs() <= 1e-10);
    assert!((ev(1) - ev(3)).abs() <= 1e-10);
    // byte-identical round trip
    assert_eq!(reserialize_csv(&comments, &rows, 17), text);
}

#[test]
fn scan_u_rejects_bad_flags() {
    assert_eq!(exit_code(&run(&["scan-u", "--points", "0"])), 1);
    assert_eq!(
        exit_code(&run(&["scan-u", "--methods", "sorcery", "--points", "3"])),
        1
    );
    assert_eq!(
        exit_code(&run(&["scan-u", "--L", "7", "--methods", "bethe", "--points", "3"])),
        1
    );
    assert_eq!(
        exit_code(&run(&["scan-u", "--u-min", "2", "--u-max", "-2", "--points", "3"])),
        1
    );
}

#[test]
fn scan_u_methods_combined_desk_scale() {
    let out = run(&[
        "scan-u", "--L", "6", "--u-min", "1", "--u-max", "4", "--points", "2", "--methods",
        "integral,bethe,ed",
    ]);
    assert_eq!(exit_code(&out), 0);
    let (_, rows) = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 6);
    for chunk in rows.chunks(3) {
        let bethe_ev = chunk[1].entanglement.unwrap();
        let ed_ev = chunk[2].entanglement.unwrap();
        assert!((bethe_ev - ed_ev).abs() <= 1e-4);
        assert_eq!(chunk[0].method, "integral");
        assert_eq!(chunk[1].method, "bethe");
        assert_eq!(chunk[2].method, "ed");
    }
}

#[test]
fn scan_u_seventy_sites_bethe_tracks_integral() {
    let out = run(&[
        "scan-u", "--L", "70", "--methods", "integral,bethe", "--u-min", "1", "--u-max", "8",
        "--points", "8",
    ]);
    assert_eq!(exit_code(&out), 0);
    let (_, rows) = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 16);
    for chunk in rows.chunks(2) {
        let w_integral = chunk[0].double_occupancy.unwrap();
        let w_bethe = chunk[1].double_occupancy.unwrap();
        assert!(
            (w_integral - w_bethe).abs() <= 5e-3,
            "methods disagree at U = {}",
            chunk[0].param
        );
        assert!(chunk[1].energy_per_site.is_some());
        assert!(chunk[0].energy_per_site.is_none());
    }
}

#[test]
fn scan_u_partial_failure_exits_two() {
    // U = 2 falls in neither series window, so the lone point fails
    let out = run(&[
        "scan-u", "--u-min", "2", "--u-max", "2", "--points", "1", "--methods", "series",
    ]);
    assert_eq!(exit_code(&out), 2);
    let (_, rows) = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].status.starts_with("error:"));
    assert!(rows[0].double_occupancy.is_none());
}

#[test]
fn scan_n_infinite_coupling_peak() {
    let out = run(&["scan-n", "--L", "12", "--U", "inf"]);
    assert_eq!(exit_code(&out), 0);
    let (_, rows) = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 11);
    let peak = rows
        .iter()
        .filter(|r| r.param <= 1.0)
        .max_by(|a, b| a.entanglement.partial_cmp(&b.entanglement).unwrap())
        .unwrap();
    assert!((peak.param - 2.0 / 3.0).abs() < 1e-12);
    assert!((peak.entanglement.unwrap() - 3.0f64.log2()).abs() < 1e-12);
    // mirror pairs carry equal entropy
    assert_eq!(rows[0].entanglement, rows[10].entanglement);
}

#[test]
fn scan_n_rejects_odd_chains() {
    assert_eq!(exit_code(&run(&["scan-n", "--L", "61", "--U", "4"])), 1);
    assert_eq!(exit_code(&run(&["scan-n", "--L", "12", "--U", "-1"])), 1);
    assert_eq!(exit_code(&run(&["scan-n", "--L", "12", "--U", "nonsense"])), 1);
}

#[test]
fn scan_mz_saturates_and_orders_rows() {
    let out = run(&["scan-mz", "--L", "12", "--U", "4"]);
    assert_eq!(exit_code(&out), 0);
    let (_, rows) = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 7);
    for pair in rows.windows(2) {
        assert!(pair[1].param > pair[0].param);
        assert!(pair[1].entanglement.unwrap() <= pair[0].entanglement.unwrap());
    }
    let last = rows.last().unwrap();
    assert!((last.param - 0.5).abs() < 1e-15);
    assert!(last.entanglement.unwrap().abs() <= 1e-10);
}

#[test]
fn scan_mz_rejects_empty_sector() {
    assert_eq!(exit_code(&run(&["scan-mz", "--N", "0"])), 1);
}

#[test]
fn validate_quick_passes() {
    let out = run(&["validate", "--suite", "quick"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("summary: 5 passed, 0 failed"));
    assert!(text.contains("{\"suite\":\"quick\",\"passed\":5,\"failed\":0}"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn validate_rejects_unknown_suite() {
    assert_eq!(exit_code(&run(&["validate", "--suite", "everything"])), 1);
}

#[test]
fn json_output_shape() {
    let out = run(&[
        "scan-u", "--u-min", "0", "--u-max", "0", "--points", "1", "--methods", "integral",
        "--format", "json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("{\n  \"metadata\""));
    assert!(text.contains("\"records\": ["));
    assert!(text.contains("\"w\": 2.5000000000000000e-1"));
    assert!(text.contains("\"energy_per_site\": null"));
}

#[test]
fn precision_override_via_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_hubbard-ent"))
        .args([
            "scan-u", "--u-min", "0", "--u-max", "0", "--points", "1", "--methods", "integral",
        ])
        .env("HUBBARD_ENT_SIG_DIGITS", "6")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("2.50000e-1"), "unexpected output: {text}");
    let (comments, rows) = parse_csv(&text).unwrap();
    assert_eq!(reserialize_csv(&comments, &rows, 6), text);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(exit_code(&run(&["--help"])), 0);
    assert_eq!(exit_code(&run(&["--version"])), 0);
    assert!(stdout(&run(&["--version"])).contains(env!("CARGO_PKG_VERSION")));
    // a bare unknown subcommand is a usage error
    assert_eq!(exit_code(&run(&["transmute"])), 1);
}

#[test]
fn header_constant_matches_contract() {
    assert_eq!(CSV_HEADER, "param,energy_per_site,w,Ev,method,status");
}
