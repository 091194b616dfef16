//! Mechanical energy from the integrated spectra.
//!
//! Each coefficient spectrum is integrated once into its share of
//! `E = ½ħω_m(⟨q²⟩ + ⟨p²⟩)`; squeezing statistics are applied afterwards.

use std::f64::consts::PI;

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::operating_point::OperatingPoint;
use crate::parallel::{self, Execution};
use crate::params::{SqueezeField, SystemParams};
use crate::quadrature::{integrate_real_line, QuadOptions, QuadResult};
use crate::spectra::{assemble, Component, SpectralKernel};

/// Quadrature settings shared by every energy evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    /// Relative tolerance, in (1e-12, 1e-2).
    pub tol: f64,
    pub max_panels: usize,
    pub execution: Execution,
    /// Upper frequency limit for spectra carrying the bath noise, in units of
    /// max(ω_m, |Δ|, κ). The zero-point part of the bath makes ⟨p²⟩ grow
    /// logarithmically with this limit.
    pub bath_cutoff: f64,
}

/// Default bath cutoff, in units of max(ω_m, |Δ|, κ).
pub const BATH_CUTOFF: f64 = 1e3;

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            tol: 1e-6,
            max_panels: 4000,
            execution: Execution::default(),
            bath_cutoff: BATH_CUTOFF,
        }
    }
}

impl Numerics {
    pub fn with_tol(tol: f64) -> Self {
        Numerics {
            tol,
            ..Self::default()
        }
    }

    pub fn serial(self) -> Self {
        Numerics {
            execution: Execution::Serial,
            ..self
        }
    }

    fn quad_options(&self, cutoff: Option<f64>) -> QuadOptions {
        QuadOptions {
            max_panels: self.max_panels,
            cutoff,
            ..QuadOptions::new(self.tol)
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.tol > 1e-12 && self.tol < 1e-2) {
            return Err(Error::domain(format!("quadrature tolerance must lie in (1e-12, 1e-2), got {}", self.tol)));
        }
        if !(self.bath_cutoff > 1.0 && self.bath_cutoff.is_finite()) {
            return Err(Error::domain(format!("bath cutoff must be a finite factor > 1, got {}", self.bath_cutoff)));
        }
        Ok(())
    }
}

/// What to integrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergySource {
    Component(Component),
    /// The full spectrum assembled for a given squeezed field.
    Assembled(SqueezeField),
}

/// Energy share of one spectrum, in J, with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentEnergy {
    pub value: f64,
    pub error: f64,
}

pub fn integrate_component(
    source: EnergySource,
    op: &OperatingPoint,
    params: &SystemParams,
    numerics: &Numerics,
) -> Result<ComponentEnergy> {
    numerics.check()?;
    if !op.is_stable() {
        return Err(Error::Unstable {
            max_real: op.stability.max_real,
        });
    }
    let kernel = SpectralKernel::new(op, params);
    let wm = params.omega_m;
    // ½(⟨q²⟩ + ⟨p²⟩) density in units of ħω_m: (1/2π)·(1 + (ω/ω_m)²)/2·S(ω)
    let weight = move |w: f64| (1.0 + (w / wm) * (w / wm)) / (4.0 * PI);
    let scale = params.omega_m.max(kernel.delta().abs()).max(kernel.kappa());
    let bath = Some(numerics.bath_cutoff * scale);
    let res: QuadResult = match source {
        EnergySource::Component(c) => {
            let f = |w: f64| weight(w) * kernel.component(w, c);
            let cutoff = if c == Component::Thermal { bath } else { None };
            run(&f, &kernel, params, numerics, cutoff)?
        }
        EnergySource::Assembled(sq) => {
            let f = |w: f64| {
                let [th, ba, n, mc, ms] = kernel.components(w);
                weight(w) * assemble(th, ba, n, mc, ms, &sq)
            };
            run(&f, &kernel, params, numerics, bath)?
        }
    };
    let unit = HBAR * wm;
    Ok(ComponentEnergy {
        value: res.value * unit,
        error: res.error * unit,
    })
}

fn run<F: Fn(f64) -> f64>(
    f: &F,
    kernel: &SpectralKernel,
    params: &SystemParams,
    numerics: &Numerics,
    cutoff: Option<f64>,
) -> Result<QuadResult> {
    let structure = kernel.structure_points();
    let start = 4.0 * (params.omega_m + kernel.delta().abs() + kernel.kappa());
    integrate_real_line(f, &structure, start, &numerics.quad_options(cutoff))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDecomposition {
    /// Thermal plus vacuum back-action energy (r- and φ-independent), J.
    pub e_th: f64,
    /// Coefficient of N, J.
    pub e_n: f64,
    /// Coefficient of M cos φ, J.
    pub e_mc: f64,
    /// Coefficient of −M sin φ, J.
    pub e_ms: f64,
    /// Sum of the absolute error estimates of the integrals, J.
    pub quadrature_error: f64,
    /// Diagnostic split of `e_th`: bath-driven part.
    pub e_thermal_only: f64,
    /// Diagnostic split of `e_th`: vacuum back-action part.
    pub e_backaction: f64,
    pub omega_m: f64,
}

pub fn energy_decomposition(op: &OperatingPoint, params: &SystemParams, numerics: &Numerics) -> Result<EnergyDecomposition> {
    let parts = parallel::try_map(numerics.execution, &Component::ALL, |&c| {
        integrate_component(EnergySource::Component(c), op, params, numerics)
    })?;
    let [th, ba, n, mc, ms] = [parts[0], parts[1], parts[2], parts[3], parts[4]];
    Ok(EnergyDecomposition {
        e_th: th.value + ba.value,
        e_n: n.value,
        e_mc: mc.value,
        e_ms: ms.value,
        quadrature_error: parts.iter().map(|p| p.error).sum(),
        e_thermal_only: th.value,
        e_backaction: ba.value,
        omega_m: params.omega_m,
    })
}

/// How energy is mapped to an effective temperature and occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TempConvention {
    /// E_m = ½ k_B T_eff and E_m = ½ ħω_m (n_eff + ½).
    #[default]
    HalfKbT,
    /// E_m = k_B T_eff and E_m = ħω_m (n_eff + ½).
    Equipartition,
}

impl TempConvention {
    pub fn name(self) -> &'static str {
        match self {
            TempConvention::HalfKbT => "half_kbt",
            TempConvention::Equipartition => "equipartition",
        }
    }

    /// Energy per k_B T_eff (and per ħω_m(n_eff + ½)).
    fn energy_factor(self) -> f64 {
        match self {
            TempConvention::HalfKbT => 0.5,
            TempConvention::Equipartition => 1.0,
        }
    }

    pub fn temperature(self, e_m: f64) -> f64 {
        e_m / (self.energy_factor() * K_B)
    }

    pub fn occupancy(self, e_m: f64, omega_m: f64) -> f64 {
        e_m / (self.energy_factor() * HBAR * omega_m) - 0.5
    }

    /// Inverse of [`TempConvention::temperature`].
    pub fn energy_for_temperature(self, t_eff: f64) -> f64 {
        self.energy_factor() * K_B * t_eff
    }
}

impl std::str::FromStr for TempConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "half_kbt" | "paper" => Ok(TempConvention::HalfKbT),
            "equipartition" => Ok(TempConvention::Equipartition),
            other => Err(format!("unknown temperature convention `{other}` (expected half_kbt or equipartition)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub e_m: f64,
    pub delta_e: f64,
    pub t_eff: f64,
    pub n_eff: f64,
    pub convention: TempConvention,
    pub omega_m: f64,
}

impl EnergyReport {
    pub fn in_convention(&self, convention: TempConvention) -> EnergyReport {
        EnergyReport {
            t_eff: convention.temperature(self.e_m),
            n_eff: convention.occupancy(self.e_m, self.omega_m),
            convention,
            ..*self
        }
    }
}

/// Squeezed-field contribution ΔE = N e_n + M (e_mc cos φ − e_ms sin φ).
pub fn squeeze_contribution(dec: &EnergyDecomposition, squeeze: &SqueezeField) -> f64 {
    let (sin, cos) = squeeze.phi.sin_cos();
    squeeze.n_stat * dec.e_n + squeeze.m_stat * (dec.e_mc * cos - dec.e_ms * sin)
}

pub fn assemble_energy(dec: &EnergyDecomposition, squeeze: &SqueezeField) -> EnergyReport {
    assemble_energy_with(dec, squeeze, TempConvention::default())
}

pub fn assemble_energy_with(dec: &EnergyDecomposition, squeeze: &SqueezeField, convention: TempConvention) -> EnergyReport {
    let delta_e = squeeze_contribution(dec, squeeze);
    let e_m = dec.e_th + delta_e;
    EnergyReport {
        e_m,
        delta_e,
        t_eff: convention.temperature(e_m),
        n_eff: convention.occupancy(e_m, dec.omega_m),
        convention,
        omega_m: dec.omega_m,
    }
}
