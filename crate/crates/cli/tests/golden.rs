//! Frozen artifacts: any byte change in these outputs is a format or numerics change.

use std::path::Path;
use std::process::Command;

fn check(golden: &str, args: &[&str]) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cfg = dir.join("figure.ini");
    let out = Command::new(env!("CARGO_BIN_EXE_optosqueeze"))
        .args(&args[..1])
        .args(["-c", cfg.to_str().unwrap(), "--serial"])
        .args(&args[1..])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = std::fs::read_to_string(dir.join(golden)).unwrap();
    let actual = String::from_utf8(out.stdout).unwrap();
    for (i, (a, e)) in actual.lines().zip(expected.lines()).enumerate() {
        assert_eq!(a, e, "{golden}: first difference at line {}", i + 1);
    }
    assert_eq!(actual, expected, "{golden}: length differs");
}

#[test]
fn energy_report() {
    check("energy.txt", &["energy"]);
}

#[test]
fn spectrum_csv() {
    check("spectrum.csv", &["spectrum", "--set", "numerics.omega_points=41"]);
}

#[test]
fn r_family_csv() {
    check("r_family.csv", &["sweep", "--kind", "r-family", "--set", "numerics.phi_points=72"]);
}

#[test]
fn stability_map_csv() {
    check(
        "stability_map.csv",
        &["stability-map", "--x", "coupling_hz=0:6e6:5", "--y", "detuning_hz=-1e7:1e7:5"],
    );
}
