//! Steady state of the driven cavity, the linearized drift matrix around it,
//! and the stability verdict.
//!
//! The steady displacement solves the cubic
//! `q [κ² + (Δ0 − g_m q)²] = g_m ε_p² / ω_m`. The intracavity amplitude is
//! taken real and positive (the pump phase absorbs the rest), so the
//! field-enhanced coupling `G = g_m a_s` is real.

use nalgebra::{Matrix3, Matrix4, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{pump_amplitude, Drive, SystemParams};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    /// Steady displacement in quadrature units. `None` in direct mode when
    /// g_m = 0 and the displacement cannot be inferred from G.
    pub q_s: Option<f64>,
    /// Steady intracavity amplitude (real, ≥ 0). `None` when it cannot be
    /// inferred (direct mode with g_m = 0).
    pub a_s: Option<f64>,
    pub p_s: f64,
    /// Effective detuning Δ = Δ0 − g_m q_s, rad/s.
    pub delta: f64,
    /// Effective coupling G = g_m a_s, rad/s.
    pub coupling: f64,
    /// Root reached continuously from q_s = 0 when the power is ramped up.
    pub principal: bool,
    pub stability: StabilityReport,
}

impl OperatingPoint {
    pub fn is_stable(&self) -> bool {
        self.stability.stable
    }
}

/// Drift matrix of the linearized fluctuations over the basis
/// (δa, δa†, δp, δq).
#[derive(Debug, Clone, PartialEq)]
pub struct DriftMatrix {
    pub entries: Matrix4<Complex64>,
    /// Frequency scale max(κ, ω_m) used for the stability margin and for
    /// conditioning the eigen-solve.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Eigenvalue verdict; this is the authoritative one.
    pub stable: bool,
    pub routh_hurwitz_stable: bool,
    pub eigenvalues: [Complex64; 4],
    pub max_real: f64,
    /// Stability margin ε_stab, rad/s.
    pub margin: f64,
    /// Real characteristic polynomial, highest power first, in units of
    /// `scale^k` (i.e. the polynomial of the scaled variable λ/scale).
    pub char_poly: [f64; 5],
    /// Largest |Im c_k| / max|c_k| of the characteristic coefficients.
    pub imag_residue: f64,
}

impl StabilityReport {
    pub fn verdicts_agree(&self) -> bool {
        self.stable == self.routh_hurwitz_stable
    }

    /// True when the largest real part sits inside the ±ε_stab band where
    /// the two verdicts may legitimately differ.
    pub fn is_marginal(&self) -> bool {
        self.max_real.abs() < self.margin
    }
}

/// Relative stability margin: ε_stab = `STABILITY_MARGIN`·max(κ, ω_m).
pub const STABILITY_MARGIN: f64 = 1e-9;

pub fn drift_matrix(op_delta: f64, op_coupling: f64, params: &SystemParams) -> DriftMatrix {
    let k = params.kappa;
    let d = op_delta;
    let g = op_coupling;
    let wm = params.omega_m;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let z = c(0.0, 0.0);
    #[rustfmt::skip]
    let entries = Matrix4::new(
        c(-k, -d), z,         z,                    c(0.0, g),
        z,         c(-k, d),  z,                    c(0.0, -g),
        c(g, 0.0), c(g, 0.0), c(-params.gamma_m, 0.0), c(-wm, 0.0),
        z,         z,         c(wm, 0.0),           z,
    );
    DriftMatrix {
        entries,
        scale: k.max(wm),
    }
}

/// Characteristic polynomial det(λI − A) by the Faddeev–LeVerrier recursion,
/// highest power first.
fn characteristic_polynomial(a: &Matrix4<Complex64>) -> [Complex64; 5] {
    let n = 4;
    let mut coeffs = [Complex64::new(0.0, 0.0); 5];
    coeffs[0] = Complex64::new(1.0, 0.0);
    let mut m = Matrix4::<Complex64>::zeros();
    for k in 1..=n {
        m = a * m + Matrix4::identity() * coeffs[k - 1];
        let am = a * m;
        coeffs[k] = -am.trace() / Complex64::new(k as f64, 0.0);
    }
    coeffs
}

/// Routh–Hurwitz test on a real polynomial (highest power first, leading
/// coefficient positive). Returns true iff every first-column entry of the
/// Routh array is strictly positive.
pub fn routh_hurwitz(coeffs: &[f64]) -> bool {
    let n = coeffs.len();
    if n == 0 || coeffs[0] <= 0.0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let width = n.div_ceil(2);
    let mut prev: Vec<f64> = (0..width).map(|i| coeffs.get(2 * i).copied().unwrap_or(0.0)).collect();
    let mut cur: Vec<f64> = (0..width).map(|i| coeffs.get(2 * i + 1).copied().unwrap_or(0.0)).collect();
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for _row in 1..n {
        if !(cur[0] > 1e-14 * scale) {
            return false;
        }
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let a = prev.get(j + 1).copied().unwrap_or(0.0);
                let b = cur.get(j + 1).copied().unwrap_or(0.0);
                (cur[0] * a - prev[0] * b) / cur[0]
            })
            .collect();
        prev = cur;
        cur = next;
    }
    true
}

pub fn is_stable(m: &DriftMatrix) -> Result<StabilityReport> {
    let s = m.scale;
    let scaled = m.entries.map(|z| z / s);

    let schur = Schur::try_new(scaled, 1e-15, 10_000).ok_or(Error::EigenFailure)?;
    let ev = schur.eigenvalues().ok_or(Error::EigenFailure)?;
    let eigenvalues = [ev[0] * s, ev[1] * s, ev[2] * s, ev[3] * s];
    let max_real = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let margin = STABILITY_MARGIN * s;

    let cp = characteristic_polynomial(&scaled);
    let cmax = cp.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    let imag_residue = cp.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs())) / cmax;
    let char_poly = [cp[0].re, cp[1].re, cp[2].re, cp[3].re, cp[4].re];

    Ok(StabilityReport {
        stable: max_real < -margin,
        routh_hurwitz_stable: routh_hurwitz(&char_poly),
        eigenvalues,
        max_real,
        margin,
        char_poly,
        imag_residue,
    })
}

/// Operating point with G and Δ imposed directly.
pub fn direct_operating_point(coupling: f64, delta: f64, params: &SystemParams) -> Result<OperatingPoint> {
    if !(coupling >= 0.0) || !coupling.is_finite() {
        return Err(Error::domain(format!("coupling G must be >= 0, got {coupling}")));
    }
    let (q_s, a_s) = if params.g_m > 0.0 {
        let a = coupling / params.g_m;
        (Some(params.g_m * a * a / params.omega_m), Some(a))
    } else {
        (None, None)
    };
    let stability = is_stable(&drift_matrix(delta, coupling, params))?;
    Ok(OperatingPoint {
        q_s,
        a_s,
        p_s: 0.0,
        delta,
        coupling,
        principal: true,
        stability,
    })
}

/// Residual of the steady-state cubic, `q[κ² + (Δ0 − g q)²] − g ε²/ω_m`.
pub fn steady_state_residual(q: f64, epsilon: f64, params: &SystemParams) -> f64 {
    let shifted = params.delta0 - params.g_m * q;
    q * (params.kappa * params.kappa + shifted * shifted) - params.g_m * epsilon * epsilon / params.omega_m
}

/// Real roots of the monic cubic x³ + c2 x² + c1 x + c0, ascending, each
/// Newton-polished.
fn real_cubic_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    #[rustfmt::skip]
    let companion = Matrix3::new(
        -c2, -c1, -c0,
        1.0, 0.0, 0.0,
        0.0, 1.0, 0.0,
    );
    let ev = companion.complex_eigenvalues();
    let poly = |x: f64| ((x + c2) * x + c1) * x + c0;
    let dpoly = |x: f64| (3.0 * x + 2.0 * c2) * x + c1;
    let mag = 1.0 + c2.abs().max(c1.abs()).max(c0.abs());

    let mut roots: Vec<f64> = Vec::with_capacity(3);
    for z in ev.iter() {
        if z.im.abs() > 1e-6 * mag.sqrt() {
            continue;
        }
        let mut x = z.re;
        for _ in 0..50 {
            let d = dpoly(x);
            if d == 0.0 {
                break;
            }
            let step = poly(x) / d;
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1e-300) {
                break;
            }
        }
        roots.push(x);
    }
    if roots.is_empty() {
        // A real cubic always has a real root; fall back to the eigenvalue
        // with the smallest imaginary part.
        let z = ev
            .iter()
            .min_by(|a, b| a.im.abs().total_cmp(&b.im.abs()))
            .copied()
            .unwrap_or_default();
        roots.push(z.re);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// All steady states for a power-driven system, ascending in q_s.
pub fn solve_steady_state(params: &SystemParams) -> Result<Vec<OperatingPoint>> {
    params.validate()?;
    let watts = match params.drive {
        Drive::Power { watts } => watts,
        Drive::Direct { .. } => {
            return Err(Error::domain("steady-state solve requires a power-specified drive"));
        }
    };
    let omega_p = params
        .omega_p
        .ok_or_else(|| Error::domain("power drive requires the laser frequency"))?;
    let epsilon = pump_amplitude(watts, omega_p, params.kappa)?;
    steady_states_for_amplitude(epsilon, params)
}

/// Steady states for a given pump amplitude ε_p (rad/s).
pub fn steady_states_for_amplitude(epsilon: f64, params: &SystemParams) -> Result<Vec<OperatingPoint>> {
    let g = params.g_m;
    let k = params.kappa;
    let d0 = params.delta0;

    let qs: Vec<f64> = if g == 0.0 || epsilon == 0.0 {
        vec![0.0]
    } else {
        // x = g q / K with K = sqrt(κ² + Δ0²) gives the well-scaled cubic
        // x³ − 2d x² + x − P = 0, d = Δ0/K, P = g² ε² / (ω_m K³).
        let kk = k.hypot(d0);
        let dn = d0 / kk;
        let p = g * g * epsilon * epsilon / (params.omega_m * kk * kk * kk);
        real_cubic_roots(-2.0 * dn, 1.0, -p)
            .into_iter()
            .map(|x| x * kk / g)
            .collect()
    };

    let mut points = Vec::with_capacity(qs.len());
    for (i, q) in qs.into_iter().enumerate() {
        let delta = d0 - g * q;
        let a = epsilon / k.hypot(delta);
        let coupling = g * a;
        let stability = is_stable(&drift_matrix(delta, coupling, params))?;
        points.push(OperatingPoint {
            q_s: Some(q),
            a_s: Some(a),
            p_s: 0.0,
            delta,
            coupling,
            principal: i == 0,
            stability,
        });
    }
    Ok(points)
}

/// Operating point implied by the drive: the principal steady state in power
/// mode, or the imposed (G, Δ) in direct mode.
pub fn resolve_operating_point(params: &SystemParams) -> Result<OperatingPoint> {
    params.validate()?;
    match params.drive {
        Drive::Direct { coupling, detuning } => direct_operating_point(coupling, detuning, params),
        Drive::Power { .. } => solve_steady_state(params)?
            .into_iter()
            .find(|p| p.principal)
            .ok_or_else(|| Error::Computation("steady-state solve returned no roots".into())),
    }
}
