#![allow(dead_code)]

use optosqueeze::operating_point::direct_operating_point;
use optosqueeze::params::hz_to_rad_s;
use optosqueeze::{OperatingPoint, SystemParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const OMEGA_M_HZ: f64 = 10.1e6;
pub const GAMMA_M_HZ: f64 = 150.0;
pub const G_M_HZ: f64 = 260.0;
pub const BATH_K: f64 = 0.037;

pub fn omega_m() -> f64 {
    hz_to_rad_s(OMEGA_M_HZ)
}

/// Figure-regime parameters with (G, Δ, κ) given in units of ω_m.
pub fn figure_params(g: f64, delta: f64, kappa: f64) -> SystemParams {
    let wm = omega_m();
    SystemParams::direct(
        wm,
        hz_to_rad_s(GAMMA_M_HZ),
        kappa * wm,
        hz_to_rad_s(G_M_HZ),
        g * wm,
        delta * wm,
        BATH_K,
    )
}

pub fn figure_point(g: f64, delta: f64, kappa: f64) -> (OperatingPoint, SystemParams) {
    let p = figure_params(g, delta, kappa);
    let op = direct_operating_point(g * p.omega_m, delta * p.omega_m, &p).unwrap();
    (op, p)
}

/// A random red-detuned parameter set that is stable, in the figure regime.
pub fn stable_draw(rng: &mut ChaCha8Rng) -> (OperatingPoint, SystemParams) {
    loop {
        let g = rng.random_range(0.0..0.4);
        let d = rng.random_range(0.1..1.5);
        let k = rng.random_range(0.1..2.0);
        let mut p = figure_params(g, d, k);
        p.bath_temperature = rng.random_range(0.005..0.1);
        let op = direct_operating_point(g * p.omega_m, d * p.omega_m, &p).unwrap();
        if op.is_stable() && !op.stability.is_marginal() {
            return (op, p);
        }
    }
}
