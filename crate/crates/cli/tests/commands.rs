use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optosqueeze"))
}

fn figure() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/figure.ini")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn payload(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no {key}"))
}

#[test]
fn coherent_payload_is_independent_of_r_zero() {
    let cfg = figure();
    let cfg = cfg.to_str().unwrap();
    let zero = stdout(&run(&["energy", "-c", cfg, "--set", "squeeze.r=0"]));
    let text = std::fs::read_to_string(cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let omitted = dir.path().join("coherent.ini");
    std::fs::write(&omitted, text.replace("r = 1\n", "").replace("phi_pi = 0.8\n", "")).unwrap();
    let none = stdout(&run(&["energy", "-c", omitted.to_str().unwrap()]));
    assert_eq!(payload(&zero), payload(&none));
    assert_eq!(value(&zero, "delta_e_J"), "0.0000000000000000e0");
}

#[test]
fn sweep_argmin_matches_energy_at_that_phase() {
    let cfg = figure();
    let cfg = cfg.to_str().unwrap();
    let sweep = stdout(&run(&["sweep", "-c", cfg, "--kind", "phase"]));
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(sweep.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 720);
    let argmin: Vec<_> = rows.iter().filter(|r| &r[5] == "true").collect();
    assert_eq!(argmin.len(), 1);
    let phi = &argmin[0][0];
    let energy = stdout(&run(&["energy", "-c", cfg, "--set", &format!("squeeze.phi_rad={phi}")]));
    assert_eq!(value(&energy, "e_m_J"), &argmin[0][1]);
    assert_eq!(value(&energy, "t_eff_K"), &argmin[0][3]);
}

#[test]
fn spectrum_total_is_reconstructed_from_components() {
    let cfg = figure();
    let out = stdout(&run(&["spectrum", "-c", cfg.to_str().unwrap()]));
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(out.as_bytes());
    let (n, m) = (1f64.sinh().powi(2), 1f64.sinh() * 1f64.cosh());
    let phi = 0.8 * std::f64::consts::PI;
    let mut count = 0;
    for rec in reader.records() {
        let v: Vec<f64> = rec.unwrap().iter().map(|s| s.parse().unwrap()).collect();
        let total = v[1] + v[2] + n * v[3] + m * (v[4] * phi.cos() - v[5] * phi.sin());
        let last_digit = 1e-16 * 10f64.powf(v[6].abs().log10().floor());
        assert!((total - v[6]).abs() <= last_digit, "ω = {}: {total} vs {}", v[0], v[6]);
        count += 1;
    }
    assert_eq!(count, 2001);
}

#[test]
fn serial_runs_are_byte_identical() {
    let cfg = figure();
    let cfg = cfg.to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    for cmd in [&["energy"][..], &["sweep", "--kind", "r-family"], &["spectrum"]] {
        let mut files = Vec::new();
        for i in 0..2 {
            let path = dir.path().join(format!("{}-{i}", cmd.join("_")));
            let mut args = cmd.to_vec();
            args.extend(["-c", cfg, "--serial", "-o", path.to_str().unwrap()]);
            let out = run(&args);
            assert!(out.status.success());
            assert!(out.stdout.is_empty());
            files.push(std::fs::read(path).unwrap());
        }
        assert_eq!(files[0], files[1], "{cmd:?}");
        let parallel = stdout(&run(&[cmd, &["-c", cfg]].concat()));
        let serial = String::from_utf8(files[0].clone()).unwrap();
        assert_eq!(payload(&parallel), payload(&serial), "{cmd:?}");
    }
}

#[test]
fn exit_codes() {
    let cfg = figure();
    let cfg = cfg.to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.ini");
    std::fs::write(&empty, "").unwrap();

    let out = run(&["energy", "-c", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("omega_m"));

    assert_eq!(run(&["energy", "-c", "/nonexistent.ini"]).status.code(), Some(3));
    assert_eq!(run(&["energy", "-c", cfg, "--set", "bath.T_hz=1"]).status.code(), Some(3));

    let unstable = run(&["energy", "-c", cfg, "--set", "drive.detuning_hz=-7.575e6"]);
    assert_eq!(unstable.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unstable.stderr).contains("eigenvalues"));

    let starved = run(&["energy", "-c", cfg, "--set", "numerics.max_panels=16", "--set", "numerics.quad_tol=1e-11"]);
    assert_eq!(starved.status.code(), Some(4));

    let cal = run(&["calibrate", "-c", cfg, "--target-K", "1e-9"]);
    assert_eq!(cal.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&cal.stderr).contains("best achieved"));
}

#[test]
fn calibrate_reports_recovered_parameters() {
    let cfg = figure();
    let out = stdout(&run(&["calibrate", "-c", cfg.to_str().unwrap(), "--target-K", "1e-3", "--grid", "3"]));
    let residual: f64 = value(&out, "residual").parse().unwrap();
    assert!(residual < 0.1);
    let k: f64 = value(&out, "kappa_over_omega_m").parse().unwrap();
    assert!((0.5..=2.0).contains(&k));
}

#[test]
fn stability_map_grid_and_axis_errors() {
    let cfg = figure();
    let cfg = cfg.to_str().unwrap();
    let out = stdout(&run(&[
        "stability-map",
        "-c",
        cfg,
        "--x",
        "coupling_hz=0:6e6:4",
        "--y",
        "kappa_hz=1e6:2e7:3",
    ]));
    let lines = payload(&out);
    assert_eq!(lines[0], "coupling_rad_s,kappa_rad_s,stability,routh_hurwitz,marginal,max_re_lambda_rad_s");
    assert_eq!(lines.len(), 13);
    assert_eq!(run(&["stability-map", "-c", cfg, "--x", "power_W=0:1:3", "--y", "kappa_hz=1:2:2"]).status.code(), Some(3));
    assert_eq!(run(&["stability-map", "-c", cfg, "--x", "coupling=0:1:3", "--y", "kappa_hz=1:2:2"]).status.code(), Some(3));
}

#[test]
fn coupling_sweep_marks_unstable_members() {
    let cfg = figure();
    let out = stdout(&run(&[
        "sweep",
        "-c",
        cfg.to_str().unwrap(),
        "--kind",
        "coupling",
        "--couplings-hz",
        "1.5e6,3e6,30e6",
        "--set",
        "numerics.omega_points=11",
    ]));
    let lines = payload(&out);
    assert_eq!(lines.len(), 1 + 11 + 11 + 1);
    assert!(lines.last().unwrap().contains(",unstable,"));
}
