//! Acceptance criteria 1–12, one line each.
//!
//! Runs as a plain binary so the verdict lines are always visible. Exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use common::{figure_params, figure_point, omega_m, stable_draw};
use optosqueeze::constants::{HBAR, K_B};
use optosqueeze::energetics::{assemble_energy_with, integrate_component};
use optosqueeze::operating_point::{direct_operating_point, drift_matrix, is_stable, STABILITY_MARGIN};
use optosqueeze::params::thermal_occupancy;
use optosqueeze::sweep::{
    calibrate_baseline, optimal_phase, phase_grid, phase_sweep_with, r_family_minima, CalibrationBox,
};
use optosqueeze::{
    assemble_energy, derive_photon_stats, energy_decomposition, EnergyReport, EnergySource, Numerics, SpectralKernel,
    SqueezeField, SystemParams, TempConvention,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn c1_coherent_limit(reports: &mut Vec<(EnergyReport, f64)>) -> Verdict {
    let mut rng = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (op, p) = stable_draw(&mut rng);
        let dec = energy_decomposition(&op, &p, &Numerics::default()).unwrap();
        let phi = rng.random_range(0.0..TAU);
        for sq in [derive_photon_stats(0.0, phi).unwrap(), SqueezeField::coherent()] {
            let rep = assemble_energy(&dec, &sq);
            worst = worst.max(rel(rep.e_m, dec.e_th)).max(rep.delta_e.abs() / dec.e_th);
            reports.push((rep, p.omega_m));
        }
    }
    Verdict::new(worst <= 1e-12, format!("50 draws, worst relative deviation {worst:.2e}"))
}

/// Thermal spectrum of the bare oscillator, written out independently.
fn bare_thermal_energy_trapezoid(p: &SystemParams, points: usize) -> f64 {
    let (wm, gm) = (p.omega_m, p.gamma_m);
    let beta = HBAR / (2.0 * K_B * p.bath_temperature);
    let s = |w: f64| {
        let den = (wm * wm - w * w).powi(2) + w * w * gm * gm;
        let bracket = if w == 0.0 { 1.0 / beta } else { w * (1.0 / (beta * w).tanh() + 1.0) };
        (gm / wm) * wm * wm / den * bracket * (1.0 + (w / wm).powi(2)) / 2.0
    };
    let (a, b) = (-4.0 * wm, 4.0 * wm);
    let h = (b - a) / (points - 1) as f64;
    let mut sum = 0.5 * (s(a) + s(b));
    for i in 1..points - 1 {
        sum += s(a + h * i as f64);
    }
    HBAR * wm * sum * h / (2.0 * PI)
}

fn c2_thermal_oracle() -> Verdict {
    let (op, p) = figure_point(0.0, 1.0, 0.2);
    let dec = energy_decomposition(&op, &p, &Numerics::with_tol(1e-5)).unwrap();
    let e_m = assemble_energy(&dec, &SqueezeField::coherent()).e_m;
    let nbar = thermal_occupancy(p.bath_temperature, p.omega_m);
    let analytic = HBAR * p.omega_m * (nbar + 0.5);
    let oracle = bare_thermal_energy_trapezoid(&p, 10_000_000);
    let (da, dt) = (rel(e_m, analytic), rel(e_m, oracle));
    Verdict::new(
        da < 1e-3 && dt < 1e-3 && (nbar - 75.8).abs() < 0.05,
        format!("n̄ = {nbar:.4}, E_m = {e_m:.6e} J, vs analytic {da:.2e}, vs trapezoid {dt:.2e}"),
    )
}

fn c3_nonnegativity() -> Verdict {
    let mut rng = rng(3);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let (op, p) = stable_draw(&mut rng);
        let sq = derive_photon_stats(rng.random_range(0.0..3.0), rng.random_range(0.0..TAU)).unwrap();
        let k = SpectralKernel::new(&op, &p);
        let span = 4.0 * (p.omega_m + op.delta.abs() + p.kappa);
        let mut grid: Vec<f64> = (0..=4000).map(|i| -span + 2.0 * span * i as f64 / 4000.0).collect();
        for c in k.structure_points() {
            grid.extend((-50..=50).map(|j| c + j as f64 * p.gamma_m * 0.1));
        }
        let values: Vec<f64> = grid.iter().map(|&w| k.spectrum_point(w, &sq).s_q_total).collect();
        let max = values.iter().cloned().fold(0.0, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        worst = worst.min(min / max);
    }
    Verdict::new(worst >= -1e-12, format!("200 draws, worst min/max = {worst:.2e}"))
}

fn c4_reduced_denominator() -> Verdict {
    let mut rng = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let g = rng.random_range(0.0..0.5);
        let d = rng.random_range(-1.5..1.5);
        let k = rng.random_range(0.05..2.0);
        let p = figure_params(g, d, k);
        let kernel = SpectralKernel::from_parts(d * p.omega_m, g * p.omega_m, &p);
        let w = rng.random_range(-3.0..3.0) * p.omega_m;
        let ds = kernel.d_s(w).unwrap().norm_sqr();
        let (w2, ge) = kernel.effective_freq_damping(w);
        let rhs = (w2 - w * w).powi(2) + w * w * ge * ge;
        worst = worst.max(rel(ds, rhs));
    }
    Verdict::new(worst <= 1e-10, format!("10^4 evaluations, worst relative deviation {worst:.2e}"))
}

/// E(φ) = A + B cos φ + C sin φ through three samples.
fn fit_sinusoid(phis: [f64; 3], e: [f64; 3]) -> impl Fn(f64) -> f64 {
    let m = nalgebra::Matrix3::from_fn(|i, j| match j {
        0 => 1.0,
        1 => phis[i].cos(),
        _ => phis[i].sin(),
    });
    let c = m.lu().solve(&nalgebra::Vector3::from(e)).unwrap();
    move |phi: f64| c[0] + c[1] * phi.cos() + c[2] * phi.sin()
}

fn c5_sinusoid(reports: &mut Vec<(EnergyReport, f64)>) -> Verdict {
    let mut rng = rng(5);
    let phis = phase_grid(720);
    let numerics = Numerics::default();
    let mut worst_ratio: f64 = 0.0;
    let mut argmin_ok = true;
    for _ in 0..5 {
        let (op, p) = stable_draw(&mut rng);
        let r = rng.random_range(0.2..2.0);
        let base = derive_photon_stats(r, 0.0).unwrap();
        let fit_idx = [0, 240, 480];
        let direct: Vec<(f64, f64)> = fit_idx
            .iter()
            .map(|&i| {
                let res = integrate_component(EnergySource::Assembled(base.with_phase(phis[i])), &op, &p, &numerics)
                    .unwrap();
                (res.value, res.error)
            })
            .collect();
        let fit = fit_sinusoid(
            fit_idx.map(|i| phis[i]),
            [direct[0].0, direct[1].0, direct[2].0],
        );
        let dec = energy_decomposition(&op, &p, &numerics).unwrap();
        let sweep = phase_sweep_with(&dec, r, &phis, &op, &p, TempConvention::default()).unwrap();
        let fit_err = direct.iter().map(|d| d.1).fold(0.0, f64::max);
        let bound = 3.0 * (fit_err + dec.quadrature_error * base.m_stat.max(base.n_stat).max(1.0));
        for (i, rep) in sweep.reports.iter().enumerate() {
            if fit_idx.contains(&i) {
                continue;
            }
            worst_ratio = worst_ratio.max((fit(phis[i]) - rep.e_m).abs() / bound);
            reports.push((*rep, p.omega_m));
        }
        let phi_m = optimal_phase(&dec).unwrap();
        let dist = (sweep.argmin_phase() - phi_m).abs();
        argmin_ok &= dist.min(TAU - dist) <= TAU / 720.0;
    }
    Verdict::new(
        worst_ratio <= 1.0 && argmin_ok,
        format!("5 draws × 717 phases, worst |fit − E|/(3·err) = {worst_ratio:.2e}, argmin within one step: {argmin_ok}"),
    )
}

fn c6_stability_cross_check() -> Verdict {
    let mut rng = rng(6);
    let (mut stable, mut unstable, mut exempt, mut disagree) = (0, 0, 0, 0);
    for _ in 0..1000 {
        let wm = omega_m();
        let mut p = figure_params(0.0, 0.0, 1.0);
        p.gamma_m = rng.random_range(1e-5..0.1) * wm;
        p.kappa = rng.random_range(0.02..2.0) * wm;
        let delta = rng.random_range(-2.0..2.0) * wm;
        let g = rng.random_range(0.0..1.0) * wm;
        let rep = is_stable(&drift_matrix(delta, g, &p)).unwrap();
        if rep.max_real.abs() < STABILITY_MARGIN * p.kappa.max(wm) {
            exempt += 1;
            continue;
        }
        if rep.stable {
            stable += 1;
        } else {
            unstable += 1;
        }
        if !rep.verdicts_agree() {
            disagree += 1;
        }
    }
    Verdict::new(
        disagree == 0 && stable > 100 && unstable > 100,
        format!("{stable} stable, {unstable} unstable, {exempt} marginal, {disagree} disagreements"),
    )
}

fn c7_decomposition_consistency() -> Verdict {
    let mut rng = rng(7);
    let (op, p) = figure_point(0.25, 0.75, 1.1);
    let numerics = Numerics::default();
    let dec = energy_decomposition(&op, &p, &numerics).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let sq = derive_photon_stats(rng.random_range(0.0..3.0), rng.random_range(0.0..TAU)).unwrap();
        let assembled = assemble_energy(&dec, &sq).e_m;
        let direct = integrate_component(EnergySource::Assembled(sq), &op, &p, &numerics).unwrap();
        let bound = 3.0 * (direct.error + dec.quadrature_error * sq.m_stat.max(sq.n_stat).max(1.0));
        worst = worst.max((assembled - direct.value).abs() / bound);
    }
    Verdict::new(worst <= 1.0, format!("10 draws, worst |Δ|/(3·err) = {worst:.2e}"))
}

struct Calibrated {
    op: optosqueeze::OperatingPoint,
    params: SystemParams,
    summary: String,
    baseline_ok: bool,
    baseline_t: f64,
}

fn calibrate() -> Result<Calibrated, String> {
    let wm = omega_m();
    let p = figure_params(0.3, 1.0, 0.2);
    let bx = CalibrationBox::scaled(wm, (0.5, 2.0), (0.25, 1.5), (0.05, 0.35));
    let cal = calibrate_baseline(1e-3, &bx, &p, &Numerics::default(), TempConvention::HalfKbT, 0.1)
        .map_err(|e| e.to_string())?;
    let op = direct_operating_point(cal.coupling, cal.delta, &cal.params).map_err(|e| e.to_string())?;
    Ok(Calibrated {
        summary: format!(
            "κ = {:.4} ω_m, Δ = {:.4} ω_m, G = {:.4} ω_m, T_eff(r=0) = {:.4} mK",
            cal.kappa / wm,
            cal.delta / wm,
            cal.coupling / wm,
            cal.achieved_t_eff * 1e3
        ),
        baseline_ok: cal.residual <= 0.1,
        baseline_t: cal.achieved_t_eff,
        op,
        params: cal.params,
    })
}

fn c8_sign_pattern(cal: &Calibrated) -> Verdict {
    let dec = energy_decomposition(&cal.op, &cal.params, &Numerics::default()).unwrap();
    let base = derive_photon_stats(0.3, 0.0).unwrap();
    let de = |phi: f64| assemble_energy(&dec, &base.with_phase(phi)).delta_e;
    let max = phase_grid(720).into_iter().map(|phi| de(phi).abs()).fold(0.0, f64::max);
    let v = [0.2, 0.4, 0.6, 0.8, 1.0].map(|x| de(x * PI));
    let pass = v[0] > 0.0 && v[1].abs() < 0.15 * max && v[2] < 0.0 && v[3] < 0.0 && v[4] < 0.0;
    let units = HBAR * cal.params.omega_m;
    Verdict::new(
        pass,
        format!(
            "ΔE/ħω_m at φ/π = 0.2, 0.4, 0.6, 0.8, 1.0: {:+.4}, {:+.4}, {:+.4}, {:+.4}, {:+.4} (max |ΔE| {:.4})",
            v[0] / units,
            v[1] / units,
            v[2] / units,
            v[3] / units,
            v[4] / units,
            max / units
        ),
    )
}

fn c9_optimal_phase(cal: &Calibrated) -> Verdict {
    let dec = energy_decomposition(&cal.op, &cal.params, &Numerics::default()).unwrap();
    let sweep = phase_sweep_with(&dec, 1.0, &phase_grid(720), &cal.op, &cal.params, TempConvention::HalfKbT).unwrap();
    let phi = sweep.argmin_phase() / PI;
    Verdict::new((0.7..=0.9).contains(&phi), format!("argmin φ = {phi:.4}π"))
}

fn c10_11_family(cal: &Calibrated) -> (Verdict, Verdict) {
    let rs = [0.3, 1.0, 1.5, 2.0];
    let fam = r_family_minima(
        &rs,
        &phase_grid(720),
        &cal.op,
        &cal.params,
        &Numerics::default(),
        TempConvention::HalfKbT,
    )
    .unwrap();
    let t: Vec<f64> = fam.rows.iter().map(|r| r.min_report.t_eff).collect();
    let t0 = fam.baseline.min_report.t_eff;
    let c10 = Verdict::new(
        cal.baseline_ok && (1e-4..=4e-4).contains(&t[1]),
        format!("T_eff(r=0) = {:.4} mK, min T_eff(r=1) = {:.4} mK", t0 * 1e3, t[1] * 1e3),
    );
    let early = (t[1] - t[0]).abs();
    let late = (t[3] - t[2]).abs();
    let c11 = Verdict::new(
        t[1] < t[0] && late < early,
        format!(
            "min T_eff (mK) at r = 0.3, 1, 1.5, 2: {:.4}, {:.4}, {:.4}, {:.4}",
            t[0] * 1e3,
            t[1] * 1e3,
            t[2] * 1e3,
            t[3] * 1e3
        ),
    );
    (c10, c11)
}

fn c12_identity(reports: &[(EnergyReport, f64)]) -> Verdict {
    let mut worst: f64 = 0.0;
    for (rep, wm) in reports {
        for c in [TempConvention::HalfKbT, TempConvention::Equipartition] {
            let r = rep.in_convention(c);
            worst = worst.max(rel(K_B * r.t_eff, HBAR * wm * (r.n_eff + 0.5)));
        }
    }
    Verdict::new(
        worst <= 1e-12 && !reports.is_empty(),
        format!("{} reports × 2 conventions, worst relative deviation {worst:.2e}", reports.len()),
    )
}

fn main() {
    let start = Instant::now();
    let mut reports = Vec::new();
    let mut verdicts: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut record = |n: u32, name: &'static str, v: Verdict| {
        println!("criterion {n:>2} [{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        verdicts.push((n, name, v));
    };

    record(1, "coherent-limit identity", c1_coherent_limit(&mut reports));
    record(2, "thermal oracle", c2_thermal_oracle());
    record(3, "spectrum nonnegativity", c3_nonnegativity());
    record(4, "reduced denominator identity", c4_reduced_denominator());
    record(5, "sinusoid structure", c5_sinusoid(&mut reports));
    record(6, "stability cross-check", c6_stability_cross_check());
    record(7, "decomposition consistency", c7_decomposition_consistency());

    match calibrate() {
        Ok(cal) => {
            println!(
                "calibration: {} (baseline within 10%: {}, {:.4} mK)",
                cal.summary,
                cal.baseline_ok,
                cal.baseline_t * 1e3
            );
            record(8, "phase sign pattern at r = 0.3", c8_sign_pattern(&cal));
            record(9, "optimal phase at r = 1", c9_optimal_phase(&cal));
            let (c10, c11) = c10_11_family(&cal);
            record(10, "cooling factor", c10);
            record(11, "r-family saturation", c11);
            let dec = energy_decomposition(&cal.op, &cal.params, &Numerics::default()).unwrap();
            for r in [0.3, 1.0, 2.0] {
                let sq = derive_photon_stats(r, 0.8 * PI).unwrap();
                reports.push((assemble_energy_with(&dec, &sq, TempConvention::HalfKbT), cal.params.omega_m));
            }
        }
        Err(e) => {
            for (n, name) in [
                (8, "phase sign pattern at r = 0.3"),
                (9, "optimal phase at r = 1"),
                (10, "cooling factor"),
                (11, "r-family saturation"),
            ] {
                record(n, name, Verdict::new(false, format!("calibration failed: {e}")));
            }
        }
    }
    record(12, "temperature/occupancy identity", c12_identity(&reports));

    let failed: Vec<u32> = verdicts.iter().filter(|v| !v.2.pass).map(|v| v.0).collect();
    println!(
        "acceptance: {}/{} passed in {:.1} s",
        verdicts.len() - failed.len(),
        verdicts.len(),
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
