//! End-to-end checks of the command-line interface.

use std::process::Command;

fn ribbonrec(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_ribbonrec"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).to_string(),
        String::from_utf8_lossy(&out.stderr).to_string(),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn vn_latex_matches_reference() {
    let (stdout, _, code) = ribbonrec(&[
        "vn",
        "--genus",
        "1",
        "--boundaries",
        "1",
        "--format",
        "latex",
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        stdout.trim(),
        r"\tfrac{1}{48} m_{(1)} + \tfrac{\pi^2 t^2}{24}"
    );
}

#[test]
fn lattice_odd_parity_is_zero() {
    let (stdout, _, code) = ribbonrec(&[
        "lattice",
        "--genus",
        "0",
        "--boundaries",
        "3",
        "--L",
        "1,1,1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "0");
}

#[test]
fn lattice_rejects_non_integers() {
    let (_, stderr, code) = ribbonrec(&[
        "lattice",
        "--genus",
        "0",
        "--boundaries",
        "3",
        "--L",
        "1/2,1,1",
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("integer"));
}

#[test]
fn unstable_type_is_a_domain_error() {
    let (_, _, code) = ribbonrec(&["vk", "--genus", "0", "--boundaries", "2"]);
    assert_eq!(code, 1);
}

#[test]
fn table_verification_passes() {
    let (stdout, _, code) = ribbonrec(&["table1", "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), 12);
}

#[test]
fn graph_roundtrip_through_files() {
    let (stdout, _, code) = ribbonrec(&["graphs", "--genus", "1", "--boundaries", "1"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["count"], 1);
    let graph = &doc["graphs"][0];
    let dir = std::env::temp_dir().join("ribbonrec-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("torus.json");
    std::fs::write(&path, serde_json::to_string(graph).unwrap()).unwrap();

    let (stdout, _, code) = ribbonrec(&[
        "mcshane",
        "--graph",
        path.to_str().unwrap(),
        "--metric",
        "2,3,5/2",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("total = 1"));

    let (stdout, _, code) = ribbonrec(&[
        "multicurves",
        "--graph",
        path.to_str().unwrap(),
        "--metric",
        "1,1,1",
        "--t",
        "4",
    ]);
    assert_eq!(code, 0);
    let count: u64 = stdout.trim().lines().last().unwrap().parse().unwrap();
    assert!(count > 1);
}

#[test]
fn fnflip_reports_values() {
    let (stdout, _, code) = ribbonrec(&[
        "fnflip",
        "--surface",
        "1,1",
        "--L",
        "2",
        "--ell",
        "1",
        "--tau",
        "1/2",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("ell' = 1/2"));
    assert!(stdout.contains("tau' = -1/2"));
}

#[test]
fn mc_average_closed_form() {
    let (stdout, _, code) = ribbonrec(&["mc-average", "--surface", "1,1", "--L", "4"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("(closed form)"));
    let value: f64 = stdout.split_whitespace().next().unwrap().parse().unwrap();
    assert!((value - 16.0 / 48.0).abs() < 1e-12);
}

#[test]
fn stable_graph_listing() {
    let (stdout, _, code) = ribbonrec(&["stable-graphs", "--genus", "0", "--boundaries", "4"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(stdout.split("\n{").next().unwrap()).unwrap();
    assert_eq!(doc["count"], 4);
}

#[test]
fn non_trivalent_graph_is_a_domain_error() {
    // The two-edge torus cell (one 4-valent vertex) rejects multicurve and
    // partition-of-unity commands.
    let dir = std::env::temp_dir().join("ribbonrec-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("torus2.json");
    std::fs::write(
        &path,
        r#"{"n_half_edges": 4, "iota": [2, 3, 0, 1], "sigma_cycles": [[0, 1, 2, 3]], "face_labels": {"0": 1}}"#,
    )
    .unwrap();
    let (_, stderr, code) = ribbonrec(&[
        "multicurves",
        "--graph",
        path.to_str().unwrap(),
        "--metric",
        "1,1",
        "--t",
        "3",
    ]);
    assert_eq!(code, 1, "{stderr}");
    assert!(stderr.contains("trivalent"));
    let (_, _, code) =
        ribbonrec(&["mcshane", "--graph", path.to_str().unwrap(), "--metric", "1,1"]);
    assert_eq!(code, 1);
}
