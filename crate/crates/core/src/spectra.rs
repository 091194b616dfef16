//! Frequency-domain kernels and the phonon spectrum.
//!
//! The displacement spectrum is kept split into coefficient spectra so that
//! the squeezing statistics (N, M, φ) enter only at assembly:
//!
//! ```text
//! S_q = s_th + s_ba + N·s_n + M·(s_mc·cos φ − s_ms·sin φ)
//! ```

use num_complex::Complex64;

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::operating_point::OperatingPoint;
use crate::params::{SqueezeField, SystemParams};

/// Below this |ħω/2k_BT| the thermal bracket is evaluated by its series.
const THERMAL_SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega: f64,
    /// Thermal (bath-driven) component.
    pub s_th: f64,
    /// Vacuum radiation-pressure back-action.
    pub s_ba: f64,
    /// Coefficient of N.
    pub s_n: f64,
    /// Coefficient of M cos φ.
    pub s_mc: f64,
    /// Coefficient of −M sin φ.
    pub s_ms: f64,
    pub s_q_total: f64,
}

impl SpectrumPoint {
    pub fn assemble(&self, squeeze: &SqueezeField) -> f64 {
        assemble(
            self.s_th,
            self.s_ba,
            self.s_n,
            self.s_mc,
            self.s_ms,
            squeeze,
        )
    }
}

pub(crate) fn assemble(th: f64, ba: f64, n: f64, mc: f64, ms: f64, sq: &SqueezeField) -> f64 {
    let (sin, cos) = sq.phi.sin_cos();
    th + ba + sq.n_stat * n + sq.m_stat * (mc * cos - ms * sin)
}

/// Which coefficient spectrum to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Thermal,
    BackAction,
    N,
    MCos,
    MSin,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::Thermal,
        Component::BackAction,
        Component::N,
        Component::MCos,
        Component::MSin,
    ];
}

/// Precomputed per-operating-point constants for fast repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SpectralKernel {
    omega_m: f64,
    gamma_m: f64,
    kappa: f64,
    delta: f64,
    coupling: f64,
    /// 2 k_B T / ħ
    thermal_rate: f64,
}

impl SpectralKernel {
    pub fn new(op: &OperatingPoint, params: &SystemParams) -> Self {
        Self::from_parts(op.delta, op.coupling, params)
    }

    pub fn from_parts(delta: f64, coupling: f64, params: &SystemParams) -> Self {
        SpectralKernel {
            omega_m: params.omega_m,
            gamma_m: params.gamma_m,
            kappa: params.kappa,
            delta,
            coupling,
            thermal_rate: 2.0 * K_B * params.bath_temperature / HBAR,
        }
    }

    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// d(ω) = 2ΔG²ω_m + (ω + iκ − Δ)(ω + iκ + Δ)(ω_m² − ω² − iωγ_m)
    pub fn d(&self, omega: f64) -> Complex64 {
        let (k, dl, g, wm) = (self.kappa, self.delta, self.coupling, self.omega_m);
        let a = Complex64::new(omega - dl, k);
        let b = Complex64::new(omega + dl, k);
        let mech = Complex64::new(wm * wm - omega * omega, -omega * self.gamma_m);
        Complex64::new(2.0 * dl * g * g * wm, 0.0) + a * b * mech
    }

    /// Δ² + (κ − iω)²
    fn cavity_factor(&self, omega: f64) -> Complex64 {
        let z = Complex64::new(self.kappa, -omega);
        z * z + self.delta * self.delta
    }

    pub fn d_s(&self, omega: f64) -> Result<Complex64> {
        let c = self.cavity_factor(omega);
        if c.norm() == 0.0 {
            return Err(Error::Computation(format!(
                "reduced denominator undefined at omega = {omega}: Δ² + (κ − iω)² vanishes"
            )));
        }
        Ok(self.d(omega) / c)
    }

    /// [(ω−Δ)² + κ²]·[(ω+Δ)² + κ²]
    pub fn lorentz_product(&self, omega: f64) -> f64 {
        let k2 = self.kappa * self.kappa;
        ((omega - self.delta).powi(2) + k2) * ((omega + self.delta).powi(2) + k2)
    }

    /// (ω_eff²(ω), γ_eff(ω))
    pub fn effective_freq_damping(&self, omega: f64) -> (f64, f64) {
        let (k, dl, g, wm) = (self.kappa, self.delta, self.coupling, self.omega_m);
        let dd = self.lorentz_product(omega);
        let g2 = g * g * wm;
        let w2 = wm * wm + g2 * 2.0 * dl * (omega * omega - dl * dl - k * k) / dd;
        let gam = self.gamma_m + g2 * k * 4.0 * dl / dd;
        (w2, gam)
    }

    /// ω_m² / |d_s(ω)|², computed from d(ω) and the cavity factor.
    pub fn susceptibility(&self, omega: f64) -> f64 {
        let num = self.cavity_factor(omega).norm_sqr();
        self.omega_m * self.omega_m * num / self.d(omega).norm_sqr()
    }

    /// ω[coth(ħω/2k_BT) + 1].
    pub fn thermal_bracket(&self, omega: f64) -> f64 {
        let x = omega / self.thermal_rate;
        if x.abs() < THERMAL_SERIES_CUTOFF {
            self.thermal_rate * (1.0 + x + x * x / 3.0)
        } else {
            // coth x + 1 = −2 / expm1(−2x), stable on both sides of zero
            -2.0 * omega / (-2.0 * x).exp_m1()
        }
    }

    pub fn spectrum_point(&self, omega: f64, squeeze: &SqueezeField) -> SpectrumPoint {
        let [th, ba, n, mc, ms] = self.components(omega);
        SpectrumPoint {
            omega,
            s_th: th,
            s_ba: ba,
            s_n: n,
            s_mc: mc,
            s_ms: ms,
            s_q_total: assemble(th, ba, n, mc, ms, squeeze),
        }
    }

    /// [s_th, s_ba, s_n, s_mc, s_ms] at ω.
    pub fn components(&self, omega: f64) -> [f64; 5] {
        let (k, dl, g) = (self.kappa, self.delta, self.coupling);
        let chi = self.susceptibility(omega);
        let k2 = k * k;
        let lm = (omega - dl).powi(2) + k2;
        let lp = (omega + dl).powi(2) + k2;
        let g2k = g * g * k;
        let th = chi * self.gamma_m / self.omega_m * self.thermal_bracket(omega);
        let ba = chi * 2.0 * g2k / lm;
        let n = chi * 2.0 * g2k * (1.0 / lm + 1.0 / lp);
        let dd = lm * lp;
        let mc = chi * 4.0 * g2k * (omega * omega - dl * dl + k2) / dd;
        let ms = chi * 4.0 * g2k * 2.0 * k * dl / dd;
        [th, ba, n, mc, ms]
    }

    pub fn component(&self, omega: f64, which: Component) -> f64 {
        let c = self.components(omega);
        match which {
            Component::Thermal => c[0],
            Component::BackAction => c[1],
            Component::N => c[2],
            Component::MCos => c[3],
            Component::MSin => c[4],
        }
    }

    /// Locations of spectral structure: 0, ±Δ, ±ω_m and the self-consistent
    /// effective resonance ±ω with ω² = ω_eff²(ω).
    pub fn structure_points(&self) -> Vec<f64> {
        let mut pts = vec![0.0, self.delta.abs(), self.omega_m];
        let mut w = self.omega_m;
        for _ in 0..50 {
            let (w2, _) = self.effective_freq_damping(w);
            if !(w2 > 0.0) {
                break;
            }
            let next = w2.sqrt();
            if (next - w).abs() <= 1e-14 * w {
                w = next;
                break;
            }
            w = next;
        }
        if w.is_finite() && w > 0.0 {
            let (_, gam) = self.effective_freq_damping(w);
            pts.push(w);
            if gam > 0.0 && gam < w {
                pts.push(w - 3.0 * gam);
                pts.push(w + 3.0 * gam);
            }
        }
        let mut all: Vec<f64> = pts
            .iter()
            .filter(|p| p.is_finite() && **p >= 0.0)
            .flat_map(|&p| [p, -p])
            .collect();
        all.sort_by(f64::total_cmp);
        all.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
        all
    }
}

pub fn denominator_d(omega: f64, op: &OperatingPoint, params: &SystemParams) -> Complex64 {
    SpectralKernel::new(op, params).d(omega)
}

pub fn reduced_denominator(omega: f64, op: &OperatingPoint, params: &SystemParams) -> Result<Complex64> {
    SpectralKernel::new(op, params).d_s(omega)
}

pub fn effective_freq_damping(omega: f64, op: &OperatingPoint, params: &SystemParams) -> (f64, f64) {
    SpectralKernel::new(op, params).effective_freq_damping(omega)
}

pub fn spectrum_at(omega: f64, op: &OperatingPoint, params: &SystemParams, squeeze: &SqueezeField) -> SpectrumPoint {
    SpectralKernel::new(op, params).spectrum_point(omega, squeeze)
}

/// S_p(ω) = (ω/ω_m)² S_q(ω).
pub fn momentum_spectrum_at(
    omega: f64,
    op: &OperatingPoint,
    params: &SystemParams,
    squeeze: &SqueezeField,
) -> f64 {
    let ratio = omega / params.omega_m;
    ratio * ratio * spectrum_at(omega, op, params, squeeze).s_q_total
}
