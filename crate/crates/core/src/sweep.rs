//! Parameter sweeps, the optimal squeezing phase and baseline calibration.

use std::f64::consts::TAU;

use crate::energetics::{
    assemble_energy_with, energy_decomposition, integrate_component, EnergyDecomposition, EnergyReport, EnergySource,
    Numerics, TempConvention,
};
use crate::error::{Error, Result};
use crate::operating_point::{resolve_operating_point, OperatingPoint, StabilityReport};
use crate::parallel::{self, Execution};
use crate::params::{canonical_phase, derive_photon_stats, Drive, SqueezeField, SystemParams};
use crate::spectra::{Component, SpectralKernel, SpectrumPoint};

/// `n` equally spaced phases k·2π/n covering [0, 2π).
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn check_grid(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::domain(format!("{name} grid is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(format!("{name} grid contains a non-finite value")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

fn check_phase_grid(phis: &[f64]) -> Result<()> {
    check_grid("phase", phis)?;
    if phis[0] < 0.0 || *phis.last().unwrap() >= TAU {
        return Err(Error::domain("phase grid must lie in [0, 2π)"));
    }
    Ok(())
}

fn require_stable(op: &OperatingPoint) -> Result<()> {
    if op.is_stable() {
        Ok(())
    } else {
        Err(Error::Unstable {
            max_real: op.stability.max_real,
        })
    }
}

/// The φ ∈ [0, 2π) minimizing `e_mc cos φ − e_ms sin φ`.
pub fn optimal_phase(dec: &EnergyDecomposition) -> Result<f64> {
    optimal_phase_from(dec.e_mc, dec.e_ms)
}

pub fn optimal_phase_from(e_mc: f64, e_ms: f64) -> Result<f64> {
    if !(e_mc.is_finite() && e_ms.is_finite()) || (e_mc == 0.0 && e_ms == 0.0) {
        return Err(Error::UndefinedPhase);
    }
    // stationary points of the sinusoid are arctan(−e_ms/e_mc) and that plus π
    let base = if e_mc == 0.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        (-e_ms / e_mc).atan()
    };
    let value = |phi: f64| e_mc * phi.cos() - e_ms * phi.sin();
    let a = canonical_phase(base);
    let b = canonical_phase(base + std::f64::consts::PI);
    Ok(if value(a) <= value(b) { a } else { b })
}

/// Closed-form minimum over φ of the energy at squeezing `r`, in J.
pub fn minimum_energy(dec: &EnergyDecomposition, r: f64) -> Result<f64> {
    let sq = derive_photon_stats(r, 0.0)?;
    Ok(dec.e_th + sq.n_stat * dec.e_n - sq.m_stat * dec.e_mc.hypot(dec.e_ms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSweep {
    pub r: f64,
    pub phis: Vec<f64>,
    pub reports: Vec<EnergyReport>,
    /// Index of the grid point with the lowest energy.
    pub argmin: usize,
    pub argmax: usize,
    pub decomposition: EnergyDecomposition,
    pub stability: StabilityReport,
    pub params: SystemParams,
    pub coupling: f64,
    pub delta: f64,
}

impl PhaseSweep {
    pub fn min_report(&self) -> &EnergyReport {
        &self.reports[self.argmin]
    }

    pub fn argmin_phase(&self) -> f64 {
        self.phis[self.argmin]
    }
}

fn argmin_argmax(values: impl Iterator<Item = f64>) -> (usize, usize) {
    let mut lo = (0, f64::INFINITY);
    let mut hi = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v < lo.1 {
            lo = (i, v);
        }
        if v > hi.1 {
            hi = (i, v);
        }
    }
    (lo.0, hi.0)
}

/// Energy over a phase grid at fixed r, from one decomposition.
pub fn phase_sweep_with(
    dec: &EnergyDecomposition,
    r: f64,
    phis: &[f64],
    op: &OperatingPoint,
    params: &SystemParams,
    convention: TempConvention,
) -> Result<PhaseSweep> {
    require_stable(op)?;
    check_phase_grid(phis)?;
    let base = derive_photon_stats(r, 0.0)?;
    let reports: Vec<EnergyReport> = phis
        .iter()
        .map(|&phi| assemble_energy_with(dec, &base.with_phase(phi), convention))
        .collect();
    let (argmin, argmax) = argmin_argmax(reports.iter().map(|r| r.e_m));
    Ok(PhaseSweep {
        r,
        phis: phis.to_vec(),
        reports,
        argmin,
        argmax,
        decomposition: *dec,
        stability: op.stability.clone(),
        params: params.clone(),
        coupling: op.coupling,
        delta: op.delta,
    })
}

pub fn phase_sweep(
    r: f64,
    phis: &[f64],
    op: &OperatingPoint,
    params: &SystemParams,
    numerics: &Numerics,
    convention: TempConvention,
) -> Result<PhaseSweep> {
    require_stable(op)?;
    check_phase_grid(phis)?;
    derive_photon_stats(r, 0.0)?;
    let dec = energy_decomposition(op, params, numerics)?;
    phase_sweep_with(&dec, r, phis, op, params, convention)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RFamilyRow {
    pub r: f64,
    /// Grid phase with the lowest energy.
    pub phi_min: f64,
    pub min_report: EnergyReport,
    /// Closed-form minimizing phase, `None` when undefined.
    pub phi_optimal: Option<f64>,
    /// Closed-form minimum energy, J.
    pub e_min_closed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RFamily {
    /// The r = 0 row.
    pub baseline: RFamilyRow,
    pub rows: Vec<RFamilyRow>,
    pub decomposition: EnergyDecomposition,
    pub stability: StabilityReport,
    pub params: SystemParams,
    pub coupling: f64,
    pub delta: f64,
}

pub fn r_family_minima(
    rs: &[f64],
    phis: &[f64],
    op: &OperatingPoint,
    params: &SystemParams,
    numerics: &Numerics,
    convention: TempConvention,
) -> Result<RFamily> {
    require_stable(op)?;
    check_phase_grid(phis)?;
    check_grid("r", rs)?;
    if rs[0] < 0.0 {
        return Err(Error::domain("squeezing parameter r must be >= 0"));
    }
    let dec = energy_decomposition(op, params, numerics)?;
    let phi_optimal = optimal_phase(&dec).ok();
    let row = |r: f64| -> Result<RFamilyRow> {
        let sweep = phase_sweep_with(&dec, r, phis, op, params, convention)?;
        Ok(RFamilyRow {
            r,
            phi_min: sweep.argmin_phase(),
            min_report: *sweep.min_report(),
            phi_optimal,
            e_min_closed: minimum_energy(&dec, r)?,
        })
    };
    let baseline = row(0.0)?;
    let rows = rs.iter().map(|&r| row(r)).collect::<Result<Vec<_>>>()?;
    Ok(RFamily {
        baseline,
        rows,
        decomposition: dec,
        stability: op.stability.clone(),
        params: params.clone(),
        coupling: op.coupling,
        delta: op.delta,
    })
}

/// Effective detuning implied by the drive mode.
fn drive_detuning(params: &SystemParams) -> f64 {
    match params.drive {
        Drive::Direct { detuning, .. } => detuning,
        Drive::Power { .. } => params.delta0,
    }
}

fn with_direct(params: &SystemParams, coupling: f64, detuning: f64) -> SystemParams {
    SystemParams {
        drive: Drive::Direct { coupling, detuning },
        delta0: detuning,
        ..params.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpectrum {
    pub coupling: f64,
    pub stability: StabilityReport,
    /// Empty when the member is unstable.
    pub points: Vec<SpectrumPoint>,
    pub peak_omega: Option<f64>,
    pub peak_height: Option<f64>,
    /// Why the member was skipped, if it was.
    pub skipped: Option<String>,
}

/// S_q(ω) on a frequency grid for each coupling G, at the detuning of `params`.
pub fn coupling_family_spectra(
    couplings: &[f64],
    omegas: &[f64],
    params: &SystemParams,
    squeeze: &SqueezeField,
    execution: Execution,
) -> Result<Vec<CouplingSpectrum>> {
    check_grid("frequency", omegas)?;
    check_grid("coupling", couplings)?;
    let detuning = drive_detuning(params);
    parallel::try_map(execution, couplings, |&g| {
        let p = with_direct(params, g, detuning);
        let op = resolve_operating_point(&p)?;
        if !op.is_stable() {
            return Ok(CouplingSpectrum {
                coupling: g,
                stability: op.stability.clone(),
                points: Vec::new(),
                peak_omega: None,
                peak_height: None,
                skipped: Some(format!("unstable: max Re λ = {:e} rad/s", op.stability.max_real)),
            });
        }
        let kernel = SpectralKernel::new(&op, &p);
        let points: Vec<SpectrumPoint> = omegas.iter().map(|&w| kernel.spectrum_point(w, squeeze)).collect();
        let (_, imax) = argmin_argmax(points.iter().map(|s| s.s_q_total));
        Ok(CouplingSpectrum {
            coupling: g,
            stability: op.stability.clone(),
            peak_omega: Some(points[imax].omega),
            peak_height: Some(points[imax].s_q_total),
            points,
            skipped: None,
        })
    })
}

/// A parameter that a stability map can scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapAxis {
    /// Field-enhanced coupling G (direct mode), rad/s.
    Coupling,
    /// Effective detuning Δ (direct mode), rad/s.
    Detuning,
    /// Cavity damping κ, rad/s.
    Kappa,
    /// Input power (power mode), W.
    Power,
    /// Bare detuning Δ0 (power mode), rad/s.
    BareDetuning,
}

impl MapAxis {
    pub fn name(self) -> &'static str {
        match self {
            MapAxis::Coupling => "coupling",
            MapAxis::Detuning => "detuning",
            MapAxis::Kappa => "kappa",
            MapAxis::Power => "power",
            MapAxis::BareDetuning => "bare_detuning",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            MapAxis::Power => "W",
            _ => "rad/s",
        }
    }

    pub fn apply(self, params: &SystemParams, value: f64) -> Result<SystemParams> {
        let mut p = params.clone();
        match (self, &mut p.drive) {
            (MapAxis::Coupling, Drive::Direct { coupling, .. }) => *coupling = value,
            (MapAxis::Detuning, Drive::Direct { detuning, .. }) => {
                *detuning = value;
                p.delta0 = value;
            }
            (MapAxis::Kappa, _) => p.kappa = value,
            (MapAxis::Power, Drive::Power { watts }) => *watts = value,
            (MapAxis::BareDetuning, Drive::Power { .. }) => p.delta0 = value,
            (axis, _) => {
                return Err(Error::domain(format!(
                    "axis `{}` does not apply to the configured drive mode",
                    axis.name()
                )))
            }
        }
        Ok(p)
    }
}

impl std::str::FromStr for MapAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "coupling" => MapAxis::Coupling,
            "detuning" => MapAxis::Detuning,
            "kappa" => MapAxis::Kappa,
            "power" => MapAxis::Power,
            "bare_detuning" => MapAxis::BareDetuning,
            other => return Err(format!("unknown axis `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCell {
    pub x: f64,
    pub y: f64,
    pub stable: bool,
    pub routh_hurwitz_stable: bool,
    pub max_real: f64,
    pub marginal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMap {
    pub x_axis: MapAxis,
    pub y_axis: MapAxis,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major: all x for the first y, then the next y.
    pub cells: Vec<StabilityCell>,
}

pub fn stability_map(
    x_axis: MapAxis,
    xs: &[f64],
    y_axis: MapAxis,
    ys: &[f64],
    params: &SystemParams,
    execution: Execution,
) -> Result<StabilityMap> {
    if x_axis == y_axis {
        return Err(Error::domain("stability map axes must differ"));
    }
    check_grid(x_axis.name(), xs)?;
    check_grid(y_axis.name(), ys)?;
    let points: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let cells = parallel::try_map(execution, &points, |&(x, y)| {
        let p = y_axis.apply(&x_axis.apply(params, x)?, y)?;
        let op = resolve_operating_point(&p)?;
        let s = &op.stability;
        Ok(StabilityCell {
            x,
            y,
            stable: s.stable,
            routh_hurwitz_stable: s.routh_hurwitz_stable,
            max_real: s.max_real,
            marginal: s.is_marginal(),
        })
    })?;
    Ok(StabilityMap {
        x_axis,
        y_axis,
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        cells,
    })
}

/// Search region for calibration, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationBox {
    pub kappa: (f64, f64),
    pub delta: (f64, f64),
    pub coupling: (f64, f64),
    /// Points per axis of the coarse grid.
    pub grid: usize,
}

impl CalibrationBox {
    /// Box given in units of ω_m.
    pub fn scaled(omega_m: f64, kappa: (f64, f64), delta: (f64, f64), coupling: (f64, f64)) -> Self {
        let s = |(a, b): (f64, f64)| (a * omega_m, b * omega_m);
        CalibrationBox {
            kappa: s(kappa),
            delta: s(delta),
            coupling: s(coupling),
            grid: 5,
        }
    }

    fn ranges(&self) -> [(f64, f64); 3] {
        [self.kappa, self.delta, self.coupling]
    }

    fn check(&self) -> Result<()> {
        for (name, (lo, hi)) in ["kappa", "delta", "coupling"].iter().zip(self.ranges()) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::domain(format!("calibration box {name} range is invalid")));
            }
        }
        if self.kappa.0 <= 0.0 || self.coupling.0 < 0.0 {
            return Err(Error::domain("calibration box needs kappa > 0 and coupling >= 0"));
        }
        if self.grid < 2 {
            return Err(Error::domain("calibration grid needs at least 2 points per axis"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// Parameters in direct mode at the recovered (κ, Δ, G).
    pub params: SystemParams,
    pub kappa: f64,
    pub delta: f64,
    pub coupling: f64,
    pub target_t_eff: f64,
    pub achieved_t_eff: f64,
    /// |achieved − target| / target.
    pub residual: f64,
    pub evaluations: usize,
    pub convention: TempConvention,
}

/// r = 0 effective temperature at (κ, Δ, G), or `None` if unstable there.
fn baseline_t_eff(
    x: [f64; 3],
    params: &SystemParams,
    numerics: &Numerics,
    convention: TempConvention,
) -> Result<Option<f64>> {
    let p = SystemParams {
        kappa: x[0],
        ..with_direct(params, x[2], x[1])
    };
    let op = resolve_operating_point(&p)?;
    if !op.is_stable() {
        return Ok(None);
    }
    let th = integrate_component(EnergySource::Component(Component::Thermal), &op, &p, numerics)?;
    let ba = integrate_component(EnergySource::Component(Component::BackAction), &op, &p, numerics)?;
    Ok(Some(convention.temperature(th.value + ba.value)))
}

/// Find (κ, Δ, G) in the box whose r = 0 effective temperature is closest to
/// `target_t_eff`: coarse grid, then compass search from the best grid point.
pub fn calibrate_baseline(
    target_t_eff: f64,
    search: &CalibrationBox,
    params: &SystemParams,
    numerics: &Numerics,
    convention: TempConvention,
    residual_tol: f64,
) -> Result<Calibration> {
    if !(target_t_eff > 0.0 && target_t_eff.is_finite()) {
        return Err(Error::domain("calibration target must be a positive temperature"));
    }
    search.check()?;
    let ranges = search.ranges();
    let axes: Vec<Vec<f64>> = ranges.iter().map(|&(lo, hi)| linear_grid(lo, hi, search.grid)).collect();
    let mut grid = Vec::new();
    for &k in &axes[0] {
        for &d in &axes[1] {
            for &g in &axes[2] {
                grid.push([k, d, g]);
            }
        }
    }
    let residual = |t: f64| (t - target_t_eff).abs() / target_t_eff;
    let evaluated = parallel::try_map(numerics.execution, &grid, |x| baseline_t_eff(*x, params, numerics, convention))?;
    let mut evaluations = grid.len();
    let mut best: Option<([f64; 3], f64)> = None;
    for (x, t) in grid.iter().zip(&evaluated) {
        if let Some(t) = *t {
            if best.is_none_or(|(_, bt)| residual(t) < residual(bt)) {
                best = Some((*x, t));
            }
        }
    }
    let Some((mut x, mut t)) = best else {
        return Err(Error::Calibration {
            reason: "no stable point in the search box".into(),
            best_t_eff: f64::NAN,
            residual: f64::INFINITY,
        });
    };

    let mut step: Vec<f64> = ranges.iter().map(|(lo, hi)| (hi - lo) / 8.0).collect();
    let stop = 1e-4;
    while residual(t) > stop && step.iter().zip(&ranges).any(|(s, (lo, hi))| *s > 1e-4 * (hi - lo)) {
        let mut trial = Vec::with_capacity(6);
        for (i, &s) in step.iter().enumerate() {
            for sign in [-1.0, 1.0] {
                let mut y = x;
                y[i] = (y[i] + sign * s).clamp(ranges[i].0, ranges[i].1);
                if y != x {
                    trial.push(y);
                }
            }
        }
        let values = parallel::try_map(numerics.execution, &trial, |y| baseline_t_eff(*y, params, numerics, convention))?;
        evaluations += trial.len();
        let mut improved = false;
        for (y, v) in trial.iter().zip(values) {
            if let Some(v) = v {
                if residual(v) < residual(t) {
                    x = *y;
                    t = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s *= 0.5);
        }
    }

    let res = residual(t);
    if res > residual_tol {
        return Err(Error::Calibration {
            reason: format!("target {target_t_eff:e} K not reached within relative tolerance {residual_tol:e}"),
            best_t_eff: t,
            residual: res,
        });
    }
    Ok(Calibration {
        params: SystemParams {
            kappa: x[0],
            ..with_direct(params, x[2], x[1])
        },
        kappa: x[0],
        delta: x[1],
        coupling: x[2],
        target_t_eff,
        achieved_t_eff: t,
        residual: res,
        evaluations,
        convention,
    })
}
