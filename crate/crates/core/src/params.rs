//! System parameters, squeezed-field statistics and the scalar quantities
//! derived from them.
//!
//! Every rate is stored as an angular frequency in rad/s. Conversion from
//! ordinary frequencies happens once, at the configuration boundary, through
//! [`hz_to_rad_s`].

use std::f64::consts::{PI, TAU};

use crate::constants::{C, HBAR, K_B};
use crate::error::{Error, Result};

/// How the optical drive strength is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    /// Input laser power in W. The operating point follows from the
    /// steady-state cubic with the bare detuning `delta0`.
    Power { watts: f64 },
    /// Field-enhanced coupling `G` and effective detuning `Δ` given directly,
    /// both in rad/s. The steady-state cubic is bypassed.
    Direct { coupling: f64, detuning: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Mechanical angular frequency ω_m.
    pub omega_m: f64,
    /// Mechanical damping γ_m (half of the full energy damping rate).
    pub gamma_m: f64,
    /// Effective mass in kg, only needed to derive `g_m` from geometry.
    pub mass: Option<f64>,
    /// Laser angular frequency ω_p.
    pub omega_p: Option<f64>,
    /// Cavity angular frequency ω_c.
    pub omega_c: Option<f64>,
    /// Cavity length L_c in m.
    pub cavity_length: Option<f64>,
    /// Cavity damping κ (half of the full decay rate).
    pub kappa: f64,
    /// Bare detuning Δ0 = ω_c − ω_p.
    pub delta0: f64,
    /// Single-photon coupling g_m.
    pub g_m: f64,
    pub drive: Drive,
    /// Bath temperature T in K.
    pub bath_temperature: f64,
}

/// Smallest admissible γ_m as a fraction of ω_m. Below it the thermal
/// integral is dominated by a divergent undamped resonance.
pub const MIN_GAMMA_FRACTION: f64 = 1e-12;

impl SystemParams {
    /// A parameter set in direct-coupling mode with no optional geometry.
    pub fn direct(
        omega_m: f64,
        gamma_m: f64,
        kappa: f64,
        g_m: f64,
        coupling: f64,
        detuning: f64,
        bath_temperature: f64,
    ) -> Self {
        SystemParams {
            omega_m,
            gamma_m,
            mass: None,
            omega_p: None,
            omega_c: None,
            cavity_length: None,
            kappa,
            delta0: detuning,
            g_m,
            drive: Drive::Direct {
                coupling,
                detuning,
            },
            bath_temperature,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("kappa", self.kappa),
            ("bath_temperature", self.bath_temperature),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.gamma_m < MIN_GAMMA_FRACTION * self.omega_m {
            return Err(Error::domain(format!(
                "gamma_m = {} rad/s is below the minimum {:e}·omega_m",
                self.gamma_m, MIN_GAMMA_FRACTION
            )));
        }
        if !(self.g_m >= 0.0 && self.g_m.is_finite()) {
            return Err(Error::domain(format!("g_m must be nonnegative, got {}", self.g_m)));
        }
        if !self.delta0.is_finite() {
            return Err(Error::domain("delta0 must be finite"));
        }
        for (name, v) in [
            ("mass", self.mass),
            ("omega_p", self.omega_p),
            ("omega_c", self.omega_c),
            ("cavity_length", self.cavity_length),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::domain(format!("{name} must be positive, got {v}")));
                }
            }
        }
        match self.drive {
            Drive::Power { watts } => {
                if !(watts >= 0.0 && watts.is_finite()) {
                    return Err(Error::domain(format!("input power must be >= 0, got {watts}")));
                }
                if self.omega_p.is_none() {
                    return Err(Error::domain("power drive requires the laser frequency"));
                }
            }
            Drive::Direct {
                coupling,
                detuning,
            } => {
                if !(coupling >= 0.0 && coupling.is_finite()) {
                    return Err(Error::domain(format!("coupling G must be >= 0, got {coupling}")));
                }
                if !detuning.is_finite() {
                    return Err(Error::domain("detuning must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Mean thermal phonon number of the bath at ω_m.
    pub fn bath_occupancy(&self) -> f64 {
        thermal_occupancy(self.bath_temperature, self.omega_m)
    }
}

/// Squeezed reservoir: squeezing parameter, phase and photon statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeField {
    pub r: f64,
    /// Squeezing phase in [0, 2π).
    pub phi: f64,
    /// N = sinh²r.
    pub n_stat: f64,
    /// |M| = sinh r cosh r.
    pub m_stat: f64,
}

impl SqueezeField {
    /// Vacuum (coherent drive) input: N = M = 0.
    pub fn coherent() -> Self {
        SqueezeField {
            r: 0.0,
            phi: 0.0,
            n_stat: 0.0,
            m_stat: 0.0,
        }
    }

    pub fn with_phase(&self, phi: f64) -> Self {
        SqueezeField {
            phi: canonical_phase(phi),
            ..*self
        }
    }
}

impl Default for SqueezeField {
    fn default() -> Self {
        Self::coherent()
    }
}

/// Wrap an angle into [0, 2π).
pub fn canonical_phase(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

pub fn derive_photon_stats(r: f64, phi: f64) -> Result<SqueezeField> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("squeezing parameter must be >= 0, got {r}")));
    }
    if !phi.is_finite() {
        return Err(Error::domain("squeezing phase must be finite"));
    }
    let (s, c) = (r.sinh(), r.cosh());
    Ok(SqueezeField {
        r,
        phi: canonical_phase(phi),
        n_stat: s * s,
        m_stat: s * c,
    })
}

/// Pump amplitude ε_p = sqrt(P κ / (2 ħ ω_p)).
pub fn pump_amplitude(input_power: f64, omega_p: f64, kappa: f64) -> Result<f64> {
    if !(input_power >= 0.0) || !(omega_p > 0.0) || !(kappa > 0.0) {
        return Err(Error::domain(format!(
            "pump amplitude needs P >= 0, omega_p > 0, kappa > 0 (got {input_power}, {omega_p}, {kappa})"
        )));
    }
    Ok((input_power * kappa / (2.0 * HBAR * omega_p)).sqrt())
}

/// Single-photon coupling and the zero-point fluctuation it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricCoupling {
    pub g_m: f64,
    /// x_ZPF = sqrt(ħ / (2 m ω_m)), m.
    pub x_zpf: f64,
}

/// g_m = (ω_c / L_c)·x_ZPF.
pub fn coupling_from_geometry(
    omega_c: f64,
    cavity_length: f64,
    mass: f64,
    omega_m: f64,
) -> Result<GeometricCoupling> {
    if !(omega_c > 0.0 && cavity_length > 0.0 && mass > 0.0 && omega_m > 0.0) {
        return Err(Error::domain("geometric coupling needs positive omega_c, L_c, mass, omega_m"));
    }
    let x_zpf = (HBAR / (2.0 * mass * omega_m)).sqrt();
    Ok(GeometricCoupling {
        g_m: omega_c / cavity_length * x_zpf,
        x_zpf,
    })
}

/// Bose–Einstein occupancy n̄ = 1/(exp(ħω/k_B T) − 1).
pub fn thermal_occupancy(temperature: f64, omega: f64) -> f64 {
    let x = HBAR * omega / (K_B * temperature);
    1.0 / x.exp_m1()
}

pub fn hz_to_rad_s(hz: f64) -> f64 {
    TAU * hz
}

pub fn rad_s_to_hz(rad_s: f64) -> f64 {
    rad_s / TAU
}

/// Angular frequency of light with vacuum wavelength `lambda` (m).
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    2.0 * PI * C / lambda
}
