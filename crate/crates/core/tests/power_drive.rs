//! Operating points obtained from a laser power through the steady-state cubic.

use approx::assert_relative_eq;
use optosqueeze::operating_point::{solve_steady_state, steady_state_residual};
use optosqueeze::params::{coupling_from_geometry, hz_to_rad_s, omega_from_wavelength, pump_amplitude};
use optosqueeze::sweep::{linear_grid, stability_map, MapAxis};
use optosqueeze::{energy_decomposition, resolve_operating_point, Drive, Execution, Numerics, SystemParams};

fn power_params(watts: f64, delta0_over_wm: f64) -> SystemParams {
    let wm = hz_to_rad_s(10.1e6);
    let omega_p = omega_from_wavelength(1064e-9);
    let mass = 1e-13;
    let length = 1e-3;
    let g_m = coupling_from_geometry(omega_p, length, mass, wm).unwrap().g_m;
    SystemParams {
        omega_m: wm,
        gamma_m: hz_to_rad_s(150.0),
        mass: Some(mass),
        omega_p: Some(omega_p),
        omega_c: Some(omega_p + delta0_over_wm * wm),
        cavity_length: Some(length),
        kappa: 0.5 * wm,
        delta0: delta0_over_wm * wm,
        g_m,
        drive: Drive::Power { watts },
        bath_temperature: 0.037,
    }
}

#[test]
fn principal_root_is_self_consistent() {
    let p = power_params(1e-3, 1.0);
    let op = resolve_operating_point(&p).unwrap();
    let omega_p = p.omega_p.unwrap();
    let eps = pump_amplitude(1e-3, omega_p, p.kappa).unwrap();
    let q = op.q_s.unwrap();
    let scale = q * (p.kappa.powi(2) + p.delta0.powi(2));
    assert!(steady_state_residual(q, eps, &p).abs() <= 1e-12 * scale);
    assert_relative_eq!(op.delta, p.delta0 - p.g_m * q, max_relative = 1e-14);
    assert_relative_eq!(op.coupling, p.g_m * op.a_s.unwrap(), max_relative = 1e-14);
    assert!(op.principal && op.is_stable());
    let all = solve_steady_state(&p).unwrap();
    assert_eq!(all[0].q_s, op.q_s);
}

#[test]
fn more_power_means_stronger_coupling_and_energy_is_defined() {
    let weak = resolve_operating_point(&power_params(1e-4, 1.0)).unwrap();
    let strong = resolve_operating_point(&power_params(4e-4, 1.0)).unwrap();
    assert!(strong.coupling > weak.coupling);
    let p = power_params(4e-4, 1.0);
    let dec = energy_decomposition(&strong, &p, &Numerics::default()).unwrap();
    assert!(dec.e_th > 0.0 && dec.e_n > 0.0);
}

#[test]
fn blue_detuning_destabilizes_at_high_power() {
    let p = power_params(1e-3, 1.0);
    let powers = linear_grid(1e-5, 1e-3, 5);
    let detunings: Vec<f64> = [-1.0, 1.0].iter().map(|d| d * p.omega_m).collect();
    let map = stability_map(MapAxis::Power, &powers, MapAxis::BareDetuning, &detunings, &p, Execution::Serial).unwrap();
    let blue: Vec<_> = map.cells.iter().filter(|c| c.y < 0.0).collect();
    let red: Vec<_> = map.cells.iter().filter(|c| c.y > 0.0).collect();
    assert!(red.iter().all(|c| c.stable));
    assert!(blue.iter().any(|c| !c.stable));
    assert!(map.cells.iter().all(|c| c.marginal || c.stable == c.routh_hurwitz_stable));
}
